//! A texture defined by its Laplace-Stieltjes transform instead of a builtin:
//! first as a closure, then as a table like the one `clutter simulate
//! --model custom-lst --lst-file` reads.

use bernstein_clutter::bernstein::{check_bernstein, log_grid, BernsteinModel};
use bernstein_clutter::estimators::summarize;
use bernstein_clutter::lst_table::LstTable;
use bernstein_clutter::texture::{sample_on_grid, simulate, SimConfig, SimMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nu = 2.0;
    // Gamma texture: G(z) = (1 + z/nu)^-nu, so h(z) = ln(1 + z).
    let gamma_lst = move |z: f64| (1.0 + z / nu).powf(-nu);

    let model = BernsteinModel::from_lst(gamma_lst, nu)?;
    let report = check_bernstein(&model, &log_grid(1e-3, 1e3, 61), 4)?;
    println!(
        "closure: h(1) = {:.6} (ln 2 = {:.6}), {:?}, conditions pass = {}",
        model.eval(1.0)?,
        2f64.ln(),
        model.activity(),
        report.passed()
    );

    // Dense near zero so the curvature (and the variance) is resolved.
    let mut rows = Vec::new();
    let mut z = 0.0_f64;
    while z < 1e4 {
        rows.push((z, gamma_lst(z)));
        z = if z < 1.0 { z + 1e-4 } else { z * 1.01 };
    }
    let table = LstTable::new(&rows)?;
    let model = table.into_model(nu)?;
    // Held constant past the last node, a table always has finite activity.
    println!(
        "table: {} nodes, {:?}, -h2 = {:.5}",
        rows.len(),
        model.activity(),
        -model.h2()
    );

    let window = 8.0;
    let cfg = SimConfig {
        gamma: nu / window,
        window,
        kappa: 150.0,
        duration: 4e4,
        dt: 0.1,
        seed: 3,
        mode: SimMode::FiniteExact,
    };
    let tau = sample_on_grid(&simulate(&model, &cfg)?, cfg.dt, cfg.duration);
    let s = summarize(&tau, cfg.dt, 0.0)?;
    println!(
        "simulated: mean {:.4}, variance {:.4} (gamma law: 1, {:.4})",
        s.mean,
        s.variance,
        1.0 / nu
    );
    Ok(())
}
