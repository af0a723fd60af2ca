//! Runs the built-in validation suites for a model, as `clutter validate`
//! does, with a shorter simulation.

use bernstein_clutter::bernstein::BernsteinModel;
use bernstein_clutter::validation::{
    all_passed, format_table, run_suite, Suite, ValidationSettings,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let settings = ValidationSettings {
        duration: 4e4,
        count_snapshots: 200_000,
        ..ValidationSettings::default()
    };
    let model = BernsteinModel::infinite_builtin();
    let mut checks = Vec::new();
    for suite in [Suite::Marginal, Suite::Covariance, Suite::Moments] {
        checks.extend(run_suite(&model, &settings, suite)?);
    }
    print!("{}", format_table(&checks));
    println!("all passed: {}", all_passed(&checks));
    Ok(())
}
