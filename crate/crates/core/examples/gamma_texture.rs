//! The infinite-activity texture `h(z) = ln(1+z)` with its gamma marginal,
//! approximated by the normalized integer process at several `kappa`.
//!
//! `cargo run --release --example gamma_texture`

use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::estimators::summarize;
use bernstein_clutter::laws::gamma_texture_law;
use bernstein_clutter::texture::{sample_on_grid, simulate, SimConfig, SimMode};
use bernstein_clutter::validation::thinned_ks;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (nu, window) = (1.5, 6.0);
    let law = gamma_texture_law(nu)?;
    let model = BernsteinModel::infinite_builtin();
    println!(
        "gamma texture, nu = {nu}: mean 1, variance {:.4}",
        law.variance()
    );
    println!(
        "{:>8} {:>10} {:>10} {:>10}",
        "kappa", "mean", "variance", "KS"
    );
    for kappa in [10.0, 100.0, 1000.0] {
        let cfg = SimConfig {
            gamma: nu / window,
            window,
            kappa,
            duration: 3e4,
            dt: 0.1,
            seed: 7,
            mode: SimMode::InfiniteApprox,
        };
        // Integer counts divided by their mean give a unit-mean texture.
        let path = simulate(&model, &cfg)?.normalized();
        let tau = sample_on_grid(&path, cfg.dt, cfg.duration);
        let s = summarize(&tau, cfg.dt, 0.0)?;
        let (ks, _) = thinned_ks(&tau, &law, window, cfg.dt);
        println!(
            "{kappa:>8} {:>10.4} {:>10.4} {ks:>10.4}",
            s.mean, s.variance
        );
    }
    Ok(())
}
