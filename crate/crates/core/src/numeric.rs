//! Finite differences, adaptive quadrature and numerical Laplace inversion.

/// Binomial coefficient as a float; exact for the small orders used here.
fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Step for an order-`n` difference at `z`.
///
/// First derivatives use `max(z, 1) * 1e-3`. Higher orders widen the step
/// toward the roundoff-optimal `eps^(1/(n+4))`, otherwise the `1/step^n`
/// amplification swamps the result.
pub(crate) fn difference_step(n: u32, z: f64) -> f64 {
    let rel = 1e-3_f64.max(f64::EPSILON.powf(1.0 / (f64::from(n) + 4.0)));
    z.abs().max(1.0) * rel
}

fn central(f: &dyn Fn(f64) -> f64, n: u32, z: f64, step: f64) -> f64 {
    let half = f64::from(n) / 2.0;
    let mut acc = 0.0;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(n, k) * f(z + (half - f64::from(k)) * step);
    }
    acc / step.powi(n as i32)
}

fn forward(f: &dyn Fn(f64) -> f64, n: u32, z: f64, step: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..=n {
        let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * binomial(n, k) * f(z + f64::from(k) * step);
    }
    acc / step.powi(n as i32)
}

/// n-th derivative of `f` at `z` for a function defined on `[0, inf)`.
///
/// Central differences with one Richardson step when the stencil stays inside
/// the domain; otherwise forward differences with two Richardson steps.
pub fn nth_derivative(f: &dyn Fn(f64) -> f64, n: u32, z: f64) -> f64 {
    nth_derivative_scaled(f, n, z, 1.0)
}

/// As [`nth_derivative`] with the base step multiplied by `scale`; comparing
/// two scales exposes orders where roundoff dominates.
pub(crate) fn nth_derivative_scaled(f: &dyn Fn(f64) -> f64, n: u32, z: f64, scale: f64) -> f64 {
    if n == 0 {
        return f(z);
    }
    let step = difference_step(n, z) * scale;
    if z - f64::from(n) * step / 2.0 >= 0.0 {
        let coarse = central(f, n, z, step);
        let fine = central(f, n, z, step / 2.0);
        (4.0 * fine - coarse) / 3.0
    } else {
        let d = |s: f64| forward(f, n, z, s);
        let r1 = |s: f64| 2.0 * d(s / 2.0) - d(s);
        (4.0 * r1(step / 2.0) - r1(step)) / 3.0
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gauss_kronrod(f, a, b);
        if err <= tol || depth == 0 || (b - a).abs() < 1e-14 * a.abs().max(1.0) {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, tol / 2.0, depth - 1) + recurse(f, mid, b, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(f, a, b, tol, 40)
}

/// Gaver-Stehfest weights `V_k`, `k = 1..=n` (n even).
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n.is_multiple_of(2) && n > 0);
    let half = n / 2;
    let fact = |m: usize| (1..=m).fold(1.0_f64, |acc, i| acc * i as f64);
    (1..=n)
        .map(|k| {
            let mut sum = 0.0;
            for j in k.div_ceil(2)..=k.min(half) {
                sum += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            let sign = if (k + half).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * sum
        })
        .collect()
}

/// Invert a Laplace transform `transform(s) = int_0^inf e^{-s t} f(t) dt` at `t > 0`.
pub fn stehfest_invert(transform: &dyn Fn(f64) -> f64, weights: &[f64], t: f64) -> f64 {
    let ln2_t = std::f64::consts::LN_2 / t;
    weights
        .iter()
        .enumerate()
        .map(|(i, v)| v * transform((i + 1) as f64 * ln2_t))
        .sum::<f64>()
        * ln2_t
}

/// Least-squares nondecreasing fit (pool adjacent violators).
pub fn isotonic(values: &[f64]) -> Vec<f64> {
    // Blocks of (mean, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        let mut block = (v, 1usize);
        while let Some(&(m, c)) = blocks.last() {
            if m <= block.0 {
                break;
            }
            blocks.pop();
            let n = c + block.1;
            block = ((m * c as f64 + block.0 * block.1 as f64) / n as f64, n);
        }
        blocks.push(block);
    }
    blocks
        .into_iter()
        .flat_map(|(m, c)| std::iter::repeat_n(m, c))
        .collect()
}
