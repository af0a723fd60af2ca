//! Reference laws: K-texture and gamma marginals, and the Polya-Aeppli and
//! negative binomial window-count laws of the integer process.

use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::laws::{gamma_texture_law, k_texture_law, CountLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nu = 2.0;
    let (k, g) = (k_texture_law(nu)?, gamma_texture_law(nu)?);
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "tau", "K pdf", "K cdf", "gamma pdf", "gamma cdf"
    );
    for tau in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        println!(
            "{tau:>6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            k.density(tau),
            k.cdf(tau),
            g.density(tau),
            g.cdf(tau)
        );
    }
    println!("K-texture atom at zero: {:.6}", k.atom_at_zero());

    let kappa = 150.0;
    for model in [
        BernsteinModel::finite_builtin(),
        BernsteinModel::infinite_builtin(),
    ] {
        let law = CountLaw::for_model(&model, nu, kappa)?;
        let table = law.table();
        let mode = (0..table.len())
            .max_by(|&a, &b| table[a].total_cmp(&table[b]))
            .unwrap_or(0);
        println!(
            "{}: {law:?}, mean {:.1}, mode {mode}, {} terms",
            model.name(),
            law.mean(),
            table.len()
        );
    }
    Ok(())
}
