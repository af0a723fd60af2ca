//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; the process fails if any
//! criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::thread;

use bernstein_clutter::bernstein::{check_bernstein, limit_transform, log_grid, BernsteinModel};
use bernstein_clutter::cli;
use bernstein_clutter::estimators::{
    autocov_standard_error, autocovariance, empirical_pmf, excess_kurtosis, ks_distance,
    ks_distance_with_atoms, summarize, total_variation, tv_noise_floor,
};
use bernstein_clutter::laws::{
    gamma_texture_law, gaussian_limit_distance, k_texture_law, lst_moments,
};
use bernstein_clutter::mixing::MixingLaw;
use bernstein_clutter::rng;
use bernstein_clutter::speckle::{compose, gen_speckle, grid_len, SpeckleSpec};
use bernstein_clutter::texture::{count_snapshots, sample_on_grid, simulate, SimConfig, SimMode};
use statrs::function::gamma::gamma_lr;

const GAMMA: f64 = 0.25;
const DURATION: f64 = 1e5;
const DT: f64 = 0.1;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    fn all(parts: Vec<Outcome>) -> Self {
        let passed = parts.iter().all(|p| p.passed);
        let detail = parts
            .into_iter()
            .map(|p| format!("{}{}", if p.passed { "" } else { "[failed] " }, p.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Self { passed, detail }
    }
}

fn config(nu: f64, mode: SimMode, kappa: f64, seed: u64) -> SimConfig {
    SimConfig {
        gamma: GAMMA,
        window: nu / GAMMA,
        kappa,
        duration: DURATION,
        dt: DT,
        seed,
        mode,
    }
}

fn grid_tau(model: &BernsteinModel, cfg: &SimConfig) -> Vec<f64> {
    let path = simulate(model, cfg).expect("simulation");
    let norm = path.normalization();
    sample_on_grid(&path, cfg.dt, cfg.duration)
        .into_iter()
        .map(|v| v / norm)
        .collect()
}

fn thin(tau: &[f64], cfg: &SimConfig) -> Vec<f64> {
    let stride = (cfg.window / cfg.dt).floor() as usize + 1;
    tau.iter().step_by(stride).copied().collect()
}

/// The finite-builtin limit is a Poisson(nu) number of Exp(nu) marks.
fn k_texture_cdf_oracle(nu: f64, x: f64) -> f64 {
    let mut weight = (-nu).exp();
    let mut total = weight;
    if x <= 0.0 {
        return total;
    }
    for m in 1..2000 {
        weight *= nu / m as f64;
        total += weight * gamma_lr(m as f64, nu * x);
        if m as f64 > nu && weight < 1e-18 {
            break;
        }
    }
    total
}

fn gamma_cdf_oracle(nu: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(nu, nu * x)
    }
}

/// Compound Poisson with geometric clusters by the Panjer recursion.
fn polya_aeppli_oracle(lambda: f64, p: f64, n_max: usize) -> Vec<f64> {
    let cluster = |j: usize| p * (1.0 - p).powi(j as i32 - 1);
    let mut f = vec![(-lambda).exp()];
    for n in 1..=n_max {
        let s: f64 = (1..=n).map(|j| j as f64 * cluster(j) * f[n - j]).sum();
        f.push(lambda / n as f64 * s);
    }
    f
}

/// Negative binomial with shape `nu` and mean `nbar` by its ratio recursion.
fn negbin_oracle(nu: f64, nbar: f64, n_max: usize) -> Vec<f64> {
    let q = nbar / (nu + nbar);
    let mut f = vec![(nu * (nu / (nu + nbar)).ln()).exp()];
    for n in 0..n_max {
        f.push(f[n] * (n as f64 + nu) / (n as f64 + 1.0) * q);
    }
    f
}

fn from_table(table: &[f64]) -> impl Fn(u64) -> f64 + '_ {
    |k| table.get(k as usize).copied().unwrap_or(0.0)
}

fn criterion_1() -> Outcome {
    let cfg = config(2.0, SimMode::FiniteExact, 150.0, 101);
    let tau = grid_tau(&BernsteinModel::finite_builtin(), &cfg);
    let var = summarize(&tau, DT, 0.0).unwrap().variance;
    Outcome::new(
        (0.95..=1.05).contains(&var),
        format!("variance {var:.4} in [0.95, 1.05]"),
    )
}

fn criterion_2() -> Outcome {
    let cfg = config(0.75, SimMode::FiniteExact, 150.0, 102);
    let tau = grid_tau(&BernsteinModel::finite_builtin(), &cfg);
    let zero = summarize(&tau, DT, 0.0).unwrap().zero_fraction;
    let expected = (-0.75_f64).exp();
    Outcome::new(
        (zero - expected).abs() <= 0.01,
        format!("zero fraction {zero:.4} vs {expected:.4} (tolerance 0.01)"),
    )
}

fn criterion_3() -> Outcome {
    let nu = 2.0;
    let law = k_texture_law(nu).unwrap();
    let mass = law.moment_by_quadrature(0);
    let mean = law.moment_by_quadrature(1);
    // The library CDF must agree with the independent series.
    let cdf_gap = (0..=200)
        .map(|i| i as f64 * 0.05)
        .map(|x| (law.cdf(x) - k_texture_cdf_oracle(nu, x)).abs())
        .fold(0.0, f64::max);

    let cfg = config(nu, SimMode::FiniteExact, 150.0, 103);
    let samples = thin(&grid_tau(&BernsteinModel::finite_builtin(), &cfg), &cfg);
    let d = ks_distance_with_atoms(
        &samples,
        |x| k_texture_cdf_oracle(nu, x),
        |x| {
            if x <= 0.0 {
                0.0
            } else {
                k_texture_cdf_oracle(nu, x)
            }
        },
    );
    Outcome::all(vec![
        Outcome::new(
            d < 0.02,
            format!("KS {d:.4} < 0.02 over {} thinned samples", samples.len()),
        ),
        Outcome::new((mass - 1.0).abs() <= 1e-6, format!("mass {mass:.9}")),
        Outcome::new((mean - 1.0).abs() <= 1e-6, format!("mean {mean:.9}")),
        Outcome::new(cdf_gap < 1e-8, format!("CDF vs series {cdf_gap:.1e}")),
    ])
}

fn criterion_4() -> Outcome {
    let nu = 2.0;
    let cfg = config(nu, SimMode::InfiniteApprox, 150.0, 104);
    let tau = grid_tau(&BernsteinModel::infinite_builtin(), &cfg);
    let var = summarize(&tau, DT, 0.0).unwrap().variance;
    let samples = thin(&tau, &cfg);
    let d = ks_distance(&samples, |x| gamma_cdf_oracle(nu, x));
    let law_gap = (1..=100)
        .map(|i| i as f64 * 0.05)
        .map(|x| (gamma_texture_law(nu).unwrap().cdf(x) - gamma_cdf_oracle(nu, x)).abs())
        .fold(0.0, f64::max);
    Outcome::all(vec![
        Outcome::new(
            d < 0.02,
            format!("KS {d:.4} < 0.02 over {} thinned samples", samples.len()),
        ),
        Outcome::new(
            (var - 0.5).abs() <= 0.05,
            format!("variance {var:.4} within 10% of 0.5"),
        ),
        Outcome::new(law_gap < 1e-12, format!("law CDF vs gamma {law_gap:.1e}")),
    ])
}

fn criterion_5() -> Outcome {
    let nu = 2.0;
    let mut parts = Vec::new();
    for (model, mode, seed, label) in [
        (
            BernsteinModel::finite_builtin(),
            SimMode::FiniteExact,
            105,
            "finite",
        ),
        (
            BernsteinModel::infinite_builtin(),
            SimMode::InfiniteApprox,
            205,
            "infinite",
        ),
    ] {
        let cfg = config(nu, mode, 150.0, seed);
        let tau = grid_tau(&model, &cfg);
        let mean = tau.iter().sum::<f64>() / tau.len() as f64;
        let centered: Vec<f64> = tau.iter().map(|v| v - mean).collect();
        let window = cfg.window;
        let theory = |s: f64| (-model.h2() / nu) * (1.0 - s / window).max(0.0);
        let scale = theory(0.0);
        let lag_steps = |s: f64| (s / DT).round() as usize;
        let mut worst: f64 = 0.0;
        for frac in [0.0, 0.25, 0.5, 0.75] {
            let s = frac * window;
            let gap = (autocovariance(&centered, lag_steps(s)) - theory(s)).abs() / scale;
            worst = worst.max(gap);
        }
        parts.push(Outcome::new(
            worst <= 0.1,
            format!("{label}: worst lag error {:.1}% of lag-0", 100.0 * worst),
        ));
        let far = autocovariance(&centered, lag_steps(1.5 * window)).abs();
        let se = autocov_standard_error(&centered, lag_steps(window));
        parts.push(Outcome::new(
            far < 3.0 * se,
            format!("{label}: |acov(1.5T)| {far:.2e} < 3 SE {:.2e}", 3.0 * se),
        ));
    }
    Outcome::all(parts)
}

const SNAPSHOTS: usize = 1_000_000;

fn criterion_6() -> Outcome {
    let nu = 2.0;
    let finite = {
        let kappa = 9.0;
        let cfg = SimConfig {
            mode: SimMode::DiscreteWindowed,
            ..config(nu, SimMode::DiscreteWindowed, kappa, 106)
        };
        let counts = count_snapshots(
            &BernsteinModel::finite_builtin(),
            &cfg,
            SNAPSHOTS,
            1.25 * cfg.window,
            &mut rng::seeded(106),
        )
        .unwrap();
        let p = 1.0 / (kappa + 1.0);
        let oracle = polya_aeppli_oracle(nu * (1.0 - p), p, 2000);
        let tv = total_variation(&empirical_pmf(counts), from_table(&oracle));
        let floor = tv_noise_floor(&oracle, SNAPSHOTS);
        Outcome::new(
            tv < 0.01,
            format!("Polya-Aeppli TV {tv:.4} < 0.01 (exact-sampler floor {floor:.4})"),
        )
    };
    let infinite = {
        let kappa = 150.0;
        let cfg = config(nu, SimMode::DiscreteWindowed, kappa, 206);
        let counts = count_snapshots(
            &BernsteinModel::infinite_builtin(),
            &cfg,
            SNAPSHOTS,
            1.25 * cfg.window,
            &mut rng::seeded(206),
        )
        .unwrap();
        let oracle = negbin_oracle(nu, nu * kappa, 20_000);
        let tv = total_variation(&empirical_pmf(counts), from_table(&oracle));
        let floor = tv_noise_floor(&oracle, SNAPSHOTS);
        Outcome::new(
            tv < 0.01,
            format!("negative binomial TV {tv:.4} < 0.01 (exact-sampler floor {floor:.4})"),
        )
    };
    Outcome::all(vec![finite, infinite])
}

fn criterion_7() -> Outcome {
    let mut pgf_gap: f64 = 0.0;
    let mut pmf_gap: f64 = 0.0;
    let mut mean_gap: f64 = 0.0;
    for kappa in [1.0, 9.0, 150.0] {
        let finite = MixingLaw::new(&BernsteinModel::finite_builtin(), kappa).unwrap();
        let infinite = MixingLaw::new(&BernsteinModel::infinite_builtin(), kappa).unwrap();
        let p_geo = 1.0 / (kappa + 1.0);
        let p_log = kappa / (1.0 + kappa);
        for n in 1..=50u64 {
            let geometric = p_geo * (1.0 - p_geo).powi(n as i32 - 1);
            let logarithmic = p_log.powi(n as i32) / (n as f64 * (1.0 + kappa).ln());
            pmf_gap = pmf_gap
                .max((finite.pmf(n) - geometric).abs())
                .max((infinite.pmf(n) - logarithmic).abs());
        }
        for (law, h_kappa) in [(&finite, kappa / (kappa + 1.0)), (&infinite, kappa.ln_1p())] {
            let table = law.table();
            for u in [0.25_f64, 0.5, 0.9] {
                let series: f64 = table
                    .pmf
                    .iter()
                    .enumerate()
                    .map(|(n, p)| p * u.powi(n as i32))
                    .sum();
                pgf_gap = pgf_gap.max((series - law.pgf(u).unwrap()).abs());
            }
            let summed: f64 = table
                .pmf
                .iter()
                .enumerate()
                .map(|(n, p)| n as f64 * p)
                .sum();
            let formula = kappa / h_kappa;
            mean_gap = mean_gap
                .max((law.mean_k() - formula).abs() / formula)
                .max((summed - formula).abs() / formula);
        }
    }
    Outcome::all(vec![
        Outcome::new(pgf_gap <= 1e-8, format!("PGF vs PMF series {pgf_gap:.1e}")),
        Outcome::new(pmf_gap <= 1e-12, format!("closed-form PMFs {pmf_gap:.1e}")),
        Outcome::new(mean_gap <= 1e-6, format!("mean_k relative {mean_gap:.1e}")),
    ])
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    let nu: f64 = 1e4;
    for (model, exact) in [
        (
            BernsteinModel::finite_builtin(),
            Box::new(move |z: f64| (-nu * z / (z + nu)).exp()) as Box<dyn Fn(f64) -> f64>,
        ),
        (
            BernsteinModel::infinite_builtin(),
            Box::new(move |z: f64| (1.0 + z / nu).powf(-nu)),
        ),
    ] {
        let d = gaussian_limit_distance(&model, nu, 5.0).unwrap();
        let oracle = (0..=50_000)
            .map(|i| i as f64 * 1e-4)
            .map(|z| (exact(z) - (-z).exp()).abs())
            .fold(0.0, f64::max);
        parts.push(Outcome::new(
            d < 1e-3 && oracle < 1e-3,
            format!("{}: sup {d:.2e} (closed form {oracle:.2e})", model.name()),
        ));
    }

    // Clutter at nu = 1e3 with the texture birth rate held at 0.25.
    let cfg = config(1e3, SimMode::FiniteExact, 150.0, 108);
    let path = simulate(&BernsteinModel::finite_builtin(), &cfg).unwrap();
    let n = grid_len(cfg.duration, cfg.dt);
    let x = gen_speckle(
        &SpeckleSpec::white(1.0, cfg.dt),
        n,
        &mut rng::stream(108, 1),
    )
    .unwrap();
    let clutter = compose(&path, &x, cfg.dt).unwrap();
    let re: Vec<f64> = clutter.z.iter().map(|z| z.re).collect();
    let k = excess_kurtosis(&re);
    parts.push(Outcome::new(
        k.abs() < 0.1,
        format!("excess kurtosis {k:.4} over {} samples", re.len()),
    ));
    Outcome::all(parts)
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    for model in [
        BernsteinModel::finite_builtin(),
        BernsteinModel::infinite_builtin(),
    ] {
        for nu in [0.75, 2.0, 10.0] {
            let g = limit_transform(&model, nu).unwrap();
            let m = lst_moments(&g, 2).unwrap();
            let g0 = g.eval(0.0).unwrap();
            let var_gap = (m[2] - 1.0 - (-model.h2() / nu)).abs();
            parts.push(Outcome::new(
                g0 == 1.0 && (m[1] - 1.0).abs() <= 1e-6 && var_gap <= 1e-4,
                format!(
                    "{} nu={nu}: G(0)={g0}, -G'(0)-1={:.1e}, var gap {var_gap:.1e}",
                    model.name(),
                    m[1] - 1.0
                ),
            ));
        }
    }
    Outcome::all(parts)
}

fn criterion_10() -> Outcome {
    let grid = log_grid(1e-3, 1e3, 61);
    let mut parts = Vec::new();
    for model in [
        BernsteinModel::finite_builtin(),
        BernsteinModel::infinite_builtin(),
    ] {
        let report = check_bernstein(&model, &grid, 4).unwrap();
        parts.push(Outcome::new(
            report.passed(),
            format!("{} accepted", model.name()),
        ));
    }
    for (name, model) in [
        ("z^2", BernsteinModel::from_fn("z^2", |z| z * z)),
        ("z", BernsteinModel::from_fn("z", |z| z)),
    ] {
        let report = check_bernstein(&model, &grid, 4).unwrap();
        let failed: Vec<String> = report.failures().map(|c| c.condition.clone()).collect();
        parts.push(Outcome::new(
            !report.passed(),
            format!("{name} rejected by [{}]", failed.join(", ")),
        ));
    }
    Outcome::all(parts)
}

fn simulate_into(dir: &Path) -> (i32, Vec<(String, Vec<u8>)>) {
    let out = dir.to_str().unwrap();
    let args = [
        "clutter",
        "simulate",
        "--model",
        "finite-k",
        "--gamma",
        "0.25",
        "--T",
        "8",
        "--duration",
        "2e4",
        "--dt",
        "0.1",
        "--seed",
        "7",
        "--events",
        "--speckle",
        "ar1",
        "--out",
        out,
    ];
    let code = cli::run(args, &mut Vec::new());
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    (code, files)
}

fn criterion_11() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (code_a, files_a) = simulate_into(a.path());
    let (code_b, files_b) = simulate_into(b.path());
    let names: Vec<&str> = files_a.iter().map(|f| f.0.as_str()).collect();
    Outcome::new(
        code_a == 0 && code_b == 0 && files_a.len() == 3 && files_a == files_b,
        format!(
            "{} CSVs byte-identical: {}",
            files_a.len(),
            names.join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("finite-activity variance", criterion_1),
        ("zero-atom mass", criterion_2),
        ("K-texture marginal", criterion_3),
        ("gamma marginal", criterion_4),
        ("covariance triangle", criterion_5),
        ("count marginals", criterion_6),
        ("mixing-law consistency", criterion_7),
        ("Gaussian limit", criterion_8),
        ("limit-transform moments", criterion_9),
        ("Bernstein validation", criterion_10),
        ("determinism", criterion_11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let outcomes: Vec<Outcome> = thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| scope.spawn(move || panic::catch_unwind(AssertUnwindSafe(f))))
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join().unwrap() {
                Ok(o) => o,
                Err(e) => {
                    let msg = e
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    Outcome::new(false, format!("panicked: {msg}"))
                }
            })
            .collect()
    });
    let _ = panic::take_hook();

    let mut failed = 0;
    for (i, ((name, _), outcome)) in criteria.iter().zip(&outcomes).enumerate() {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!(
            "acceptance {:>2} {status} {name}: {}",
            i + 1,
            outcome.detail
        );
        failed += usize::from(!outcome.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
