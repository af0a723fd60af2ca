//! The cluster-size law `K(kappa)`: PMF, PGF, moments and sampling for both
//! builtin Bernstein functions, and the continuous cluster law of the
//! finite-activity limit.

use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::mixing::{continuous_mixing, MixingLaw};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for model in [
        BernsteinModel::finite_builtin(),
        BernsteinModel::infinite_builtin(),
    ] {
        for kappa in [1.0, 150.0] {
            let law = MixingLaw::new(&model, kappa)?;
            let draws = 100_000;
            let sample_mean = (0..draws)
                .map(|_| law.sample(&mut rng).map(|k| k as f64))
                .sum::<Result<f64, _>>()?
                / draws as f64;
            println!("{} kappa = {kappa}", model.name());
            println!(
                "  p_K(1..5)   {:?}",
                (1..=5)
                    .map(|n| format!("{:.5}", law.pmf(n)))
                    .collect::<Vec<_>>()
            );
            println!("  PGF(0.5)    {:.6}", law.pgf(0.5)?);
            println!(
                "  E[K]        {:.4} (sample {sample_mean:.4})",
                law.mean_k()
            );
            println!("  E[K^2]      {:.4}", law.second_moment_k());
            println!(
                "  table size  {} (mass {:.12})",
                law.table().n_max(),
                law.table().mass()
            );
        }
    }
    let xi = continuous_mixing(&BernsteinModel::finite_builtin())?;
    println!(
        "cluster law of z/(z+1): exponential = {}, P(xi <= 1) = {:.6}",
        xi.is_exponential(),
        xi.cdf(1.0)
    );
    Ok(())
}
