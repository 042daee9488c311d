//! Special functions and a derivative-free optimizer.
//!
//! Everything here is dependency-free and double precision: Lanczos
//! `ln_gamma`, the regularized incomplete gamma (series / continued
//! fraction split) behind chi-square tails and `erfc`, Wichura's
//! rational approximation for the normal quantile, and a Nelder-Mead
//! simplex minimizer used by every model-fitting routine in the crate.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_ITMAX: usize = 600;
const FPMIN: f64 = 1e-300;

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma_p requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(gamma_p_series(a, x))
    } else {
        Ok(1.0 - gamma_q_cont_frac(a, x))
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma_q requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_p_series(a, x))
    } else {
        Ok(gamma_q_cont_frac(a, x))
    }
}

fn gamma_prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma_unchecked(a)).exp()
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_ITMAX {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum * gamma_prefactor(a, x)).clamp(0.0, 1.0)
}

fn gamma_q_cont_frac(a: f64, x: f64) -> f64 {
    // Modified Lentz evaluation of the continued fraction.
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_ITMAX {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (h * gamma_prefactor(a, x)).clamp(0.0, 1.0)
}

/// Upper-tail probability of a chi-square distribution.
pub fn chi_square_sf(x: f64, df: usize) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "chi_square_sf requires x >= 0, got {x}"
        )));
    }
    if df < 1 {
        return Err(Error::InvalidArgument("chi_square_sf requires df >= 1".into()));
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

/// Complementary error function, via the incomplete gamma identity
/// erfc(x) = Q(1/2, x^2) for x >= 0.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        gamma_q(0.5, x * x).expect("valid erfc arguments")
    } else {
        2.0 - gamma_q(0.5, x * x).expect("valid erfc arguments")
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF (Wichura's AS 241 rational approximation).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "normal_quantile requires p in (0,1), got {p}"
        )));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return Ok(q * poly(&CENTRAL_NUM, r) / poly(&CENTRAL_DEN, r));
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        poly(&TAIL_NUM, r) / poly(&TAIL_DEN, r)
    } else {
        r -= 5.0;
        poly(&FAR_TAIL_NUM, r) / poly(&FAR_TAIL_DEN, r)
    };
    Ok(if q < 0.0 { -val } else { val })
}

fn poly(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_854_561,
];
const TAIL_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const TAIL_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const FAR_TAIL_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const FAR_TAIL_DEN: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Ordinary least squares via normal equations with partial pivoting.
///
/// `design` holds one row per observation. Returns coefficient
/// estimates, residuals, and coefficient standard errors (from
/// `sigma2 * inv(X'X)` with `sigma2 = RSS / (rows - cols)`).
pub(crate) fn least_squares(
    design: &[Vec<f64>],
    y: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let rows = design.len();
    if rows == 0 || rows != y.len() {
        return Err(Error::InvalidArgument(
            "least_squares: empty or mismatched inputs".into(),
        ));
    }
    let cols = design[0].len();
    if cols == 0 || rows <= cols {
        return Err(Error::InvalidArgument(format!(
            "least_squares: need more rows ({rows}) than columns ({cols})"
        )));
    }

    // Normal equations X'X and X'y.
    let mut xtx = vec![vec![0.0; cols]; cols];
    let mut xty = vec![0.0; cols];
    for (row, &yi) in design.iter().zip(y) {
        for i in 0..cols {
            xty[i] += row[i] * yi;
            for j in i..cols {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }

    let inv = invert(&xtx).ok_or_else(|| Error::SingularMatrix("least squares".into()))?;
    let beta: Vec<f64> = (0..cols)
        .map(|i| (0..cols).map(|j| inv[i][j] * xty[j]).sum())
        .collect();

    let mut residuals = Vec::with_capacity(rows);
    let mut rss = 0.0;
    for (row, &yi) in design.iter().zip(y) {
        let fitted: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let e = yi - fitted;
        rss += e * e;
        residuals.push(e);
    }
    let sigma2 = rss / (rows - cols) as f64;
    let se: Vec<f64> = (0..cols).map(|i| (sigma2 * inv[i][i]).sqrt()).collect();
    Ok((beta, residuals, se))
}

/// Gauss-Jordan inversion with partial pivoting; None when singular.
fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| aug[i][col].abs().partial_cmp(&aug[j][col].abs()).unwrap())?;
        if aug[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        aug.swap(col, pivot_row);
        let pivot = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = aug[row][col];
            if factor == 0.0 {
                continue;
            }
            let (pivot_row_vals, target) = if row < col {
                let (a, b) = aug.split_at_mut(col);
                (&b[0], &mut a[row])
            } else {
                let (a, b) = aug.split_at_mut(row);
                (&a[col], &mut b[0])
            };
            for (t, p) in target.iter_mut().zip(pivot_row_vals) {
                *t -= factor * p;
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Configuration for [`minimize`].
#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    /// Simplex diameter tolerance (infinity norm around the best vertex).
    pub x_tol: f64,
    /// Objective spread tolerance (worst minus best vertex value).
    pub f_tol: f64,
    pub max_iterations: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            x_tol: 1e-8,
            f_tol: 1e-8,
            max_iterations: 5000,
            initial_step: 0.25,
        }
    }
}

/// Result of a [`minimize`] run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub argmin: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex descent. Returns the best vertex seen; never
/// worse than the start point. Non-finite objective values during the
/// search are treated as +inf and rejected.
pub fn minimize<F>(mut objective: F, start: &[f64], config: &MinimizeConfig) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if start.is_empty() {
        return Err(Error::InvalidArgument("minimize: empty start point".into()));
    }
    let n = start.len();
    let mut eval = |x: &[f64]| -> f64 {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let f0 = eval(start);
    if !f0.is_finite() {
        return Err(Error::OptimizerFailed(
            "objective non-finite at start point".into(),
        ));
    }

    // Initial simplex: start plus one perturbed vertex per axis.
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut fvals: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    fvals.push(f0);
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += config.initial_step.max(1e-12);
        fvals.push(eval(&v));
        simplex.push(v);
    }

    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = fvals[worst] - fvals[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < config.f_tol && diameter < config.x_tol {
            converged = true;
            break;
        }

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; n];
        for (idx, v) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[worst])
            .map(|(c, w)| c + ALPHA * (c - w))
            .collect();
        let f_reflect = eval(&reflect);

        if f_reflect < fvals[best] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + GAMMA * (c - w))
                .collect();
            let f_expand = eval(&expand);
            if f_expand < f_reflect {
                simplex[worst] = expand;
                fvals[worst] = f_expand;
            } else {
                simplex[worst] = reflect;
                fvals[worst] = f_reflect;
            }
        } else if f_reflect < fvals[second_worst] {
            simplex[worst] = reflect;
            fvals[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = if f_reflect < fvals[worst] {
                centroid
                    .iter()
                    .zip(&reflect)
                    .map(|(c, r)| c + RHO * (r - c))
                    .collect()
            } else {
                centroid
                    .iter()
                    .zip(&simplex[worst])
                    .map(|(c, w)| c + RHO * (w - c))
                    .collect()
            };
            let f_contract = eval(&contract);
            if f_contract < fvals[worst].min(f_reflect) {
                simplex[worst] = contract;
                fvals[worst] = f_contract;
            } else {
                // Shrink toward the best vertex.
                let best_point = simplex[best].clone();
                for idx in 0..=n {
                    if idx == best {
                        continue;
                    }
                    for (x, b) in simplex[idx].iter_mut().zip(&best_point) {
                        *x = b + SIGMA * (*x - *b);
                    }
                    fvals[idx] = eval(&simplex[idx]);
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap())
        .unwrap();
    Ok(OptimResult {
        argmin: simplex[best].clone(),
        objective: fvals[best],
        iterations,
        converged,
    })
}
