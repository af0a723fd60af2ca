//! As `nu` grows the limit transform `G(z)` approaches `exp(-z)`, the
//! transform of a constant unit texture (Gaussian clutter).

use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::laws::gaussian_limit_distance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8} {:>14} {:>14}", "nu", "z/(z+1)", "ln(1+z)");
    for nu in [1.0, 10.0, 100.0, 1e3, 1e4, 1e5] {
        let finite = gaussian_limit_distance(&BernsteinModel::finite_builtin(), nu, 5.0)?;
        let infinite = gaussian_limit_distance(&BernsteinModel::infinite_builtin(), nu, 5.0)?;
        println!("{nu:>8} {finite:>14.3e} {infinite:>14.3e}");
    }
    Ok(())
}
