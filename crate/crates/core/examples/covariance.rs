//! Empirical texture autocovariance against the triangle `(-h2/nu)(1 - s/T)`.

use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::estimators::summarize;
use bernstein_clutter::laws::texture_cov;
use bernstein_clutter::texture::{sample_on_grid, simulate, SimConfig, SimMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = BernsteinModel::finite_builtin();
    let cfg = SimConfig {
        gamma: 0.25,
        window: 8.0,
        kappa: 150.0,
        duration: 1e5,
        dt: 0.5,
        seed: 5,
        mode: SimMode::FiniteExact,
    };
    let tau = sample_on_grid(&simulate(&model, &cfg)?, cfg.dt, cfg.duration);
    let s = summarize(&tau, cfg.dt, 1.5 * cfg.window)?;
    println!("{:>6} {:>10} {:>10}", "lag", "empirical", "theory");
    for lv in s.autocov.iter().step_by(2) {
        let theory = texture_cov(cfg.nu(), cfg.window, model.h2(), lv.lag);
        println!("{:>6.1} {:>10.4} {:>10.4}", lv.lag, lv.value, theory);
    }
    Ok(())
}
