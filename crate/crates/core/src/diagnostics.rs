//! Stationarity, autocorrelation, and residual-normality tests.
//!
//! The battery used for order identification and residual validation:
//! ACF/PACF correlograms, the Ljung-Box portmanteau test, Jarque-Bera
//! and Anderson-Darling normality tests, the augmented Dickey-Fuller
//! unit-root test, and the KPSS stationarity test. ADF and KPSS p-values
//! come from embedded critical-value tables with linear interpolation
//! and are clamped (and flagged) at the table boundaries rather than
//! extrapolated.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{chi_square_sf, least_squares, normal_cdf};
use crate::series::Series;

pub const INFER_AUTOCORR: &str = "Significant autocorrelation";
pub const INFER_NO_AUTOCORR: &str = "No significant autocorrelation";
pub const INFER_NOT_NORMAL: &str = "Rejects the null hypothesis of normality";
pub const INFER_NORMAL: &str = "Consistent with normality";
pub const INFER_STATIONARY: &str = "Rejects the null hypothesis of non-stationarity";
pub const INFER_UNIT_ROOT: &str = "Fails to reject the null hypothesis of non-stationarity";
pub const INFER_NOT_STATIONARY: &str = "Rejects the null hypothesis of stationarity";
pub const INFER_LEVEL_STATIONARY: &str = "Consistent with stationarity";

/// Outcome of one diagnostic test.
#[derive(Debug, Clone, Serialize)]
pub struct TestResult {
    #[serde(rename = "test")]
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    /// True when the p-value hit a critical-value table boundary (or a
    /// degenerate clamp inside the statistic) and is therefore a bound,
    /// not a point estimate.
    pub p_clamped: bool,
    pub df_or_bandwidth: usize,
    pub alpha: f64,
    #[serde(rename = "reject_at_0.05")]
    pub reject_null: bool,
    pub inference: String,
}

impl TestResult {
    fn build(
        name: &str,
        statistic: f64,
        p_value: f64,
        p_clamped: bool,
        df_or_bandwidth: usize,
        inference_reject: &str,
        inference_keep: &str,
    ) -> Self {
        let alpha = 0.05;
        let reject_null = p_value < alpha;
        TestResult {
            test_name: name.to_string(),
            statistic,
            p_value,
            p_clamped,
            df_or_bandwidth,
            alpha,
            reject_null,
            inference: if reject_null {
                inference_reject.to_string()
            } else {
                inference_keep.to_string()
            },
        }
    }
}

/// ACF or PACF coefficients for lags `1..=max_lag` with the white-noise
/// confidence band `1.96 / sqrt(n)`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelogramResult {
    pub lags: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub band: f64,
    pub n: usize,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Autocorrelations with the divisor-n convention, which keeps the
/// autocovariance sequence positive semi-definite (required by
/// Durbin-Levinson).
pub(crate) fn acf_values(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if max_lag == 0 {
        return Err(Error::InvalidArgument("acf: max_lag must be >= 1".into()));
    }
    if max_lag >= n {
        return Err(Error::SeriesTooShort {
            needed: max_lag + 1,
            actual: n,
        });
    }
    let m = mean(values);
    let denom: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    if denom <= 0.0 {
        return Err(Error::ZeroVariance("acf".into()));
    }
    Ok((1..=max_lag)
        .map(|k| {
            let num: f64 = (k..n).map(|t| (values[t] - m) * (values[t - k] - m)).sum();
            num / denom
        })
        .collect())
}

pub fn acf(series: &Series, max_lag: usize) -> Result<CorrelogramResult> {
    let coefficients = acf_values(series.values(), max_lag)?;
    let n = series.len();
    Ok(CorrelogramResult {
        lags: (1..=max_lag).collect(),
        coefficients,
        band: 1.96 / (n as f64).sqrt(),
        n,
    })
}

/// Partial autocorrelations via the Durbin-Levinson recursion on the
/// ACF sequence.
pub fn pacf(series: &Series, max_lag: usize) -> Result<CorrelogramResult> {
    let r = acf_values(series.values(), max_lag)?;
    let phi_kk = durbin_levinson_pacf(&r)?;
    let n = series.len();
    Ok(CorrelogramResult {
        lags: (1..=max_lag).collect(),
        coefficients: phi_kk,
        band: 1.96 / (n as f64).sqrt(),
        n,
    })
}

fn durbin_levinson_pacf(r: &[f64]) -> Result<Vec<f64>> {
    let max_lag = r.len();
    let mut pacf = Vec::with_capacity(max_lag);
    let mut phi_prev: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let kk = if k == 1 {
            r[0]
        } else {
            let num =
                r[k - 1] - (1..k).map(|j| phi_prev[j - 1] * r[k - 1 - j]).sum::<f64>();
            let den = 1.0 - (1..k).map(|j| phi_prev[j - 1] * r[j - 1]).sum::<f64>();
            if den.abs() < 1e-14 {
                return Err(Error::DegenerateInput(format!(
                    "pacf recursion breakdown at lag {k}"
                )));
            }
            num / den
        };
        if kk.abs() > 1.0 + 1e-9 {
            return Err(Error::DegenerateInput(format!(
                "pacf coefficient {kk} outside [-1, 1] at lag {k}"
            )));
        }
        let mut phi_new = vec![0.0; k];
        for j in 1..k {
            phi_new[j - 1] = phi_prev[j - 1] - kk * phi_prev[k - 1 - j];
        }
        phi_new[k - 1] = kk;
        pacf.push(kk);
        phi_prev = phi_new;
    }
    Ok(pacf)
}

/// Default portmanteau lag: `2s` for seasonal series, `min(10, n/5)`
/// otherwise.
pub fn default_ljung_box_lag(n: usize, seasonal_period: Option<usize>) -> usize {
    match seasonal_period {
        Some(s) if s >= 2 => 2 * s,
        _ => (n / 5).clamp(1, 10),
    }
}

/// Ljung-Box (Box-Ljung) portmanteau test of joint residual
/// autocorrelation up to lag `h`, with `h - fitted_params` degrees of
/// freedom.
pub fn ljung_box(residuals: &Series, h: usize, fitted_params: usize) -> Result<TestResult> {
    let n = residuals.len();
    if h >= n {
        return Err(Error::SeriesTooShort {
            needed: h + 1,
            actual: n,
        });
    }
    if h <= fitted_params {
        return Err(Error::InvalidArgument(format!(
            "ljung_box: h ({h}) must exceed fitted_params ({fitted_params})"
        )));
    }
    let r = acf_values(residuals.values(), h)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * r.iter()
            .enumerate()
            .map(|(i, rk)| rk * rk / (nf - (i + 1) as f64))
            .sum::<f64>();
    let df = h - fitted_params;
    let p = chi_square_sf(q, df)?;
    Ok(TestResult::build(
        "Box-Ljung test",
        q,
        p,
        false,
        df,
        INFER_AUTOCORR,
        INFER_NO_AUTOCORR,
    ))
}

/// Jarque-Bera normality test from sample skewness and kurtosis
/// (central moments with divisor n), chi-square with 2 df.
pub fn jarque_bera(residuals: &Series) -> Result<TestResult> {
    let v = residuals.values();
    let n = v.len();
    if n < 4 {
        return Err(Error::SeriesTooShort {
            needed: 4,
            actual: n,
        });
    }
    let m = mean(v);
    let nf = n as f64;
    let m2: f64 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / nf;
    if m2 <= 0.0 {
        return Err(Error::ZeroVariance("jarque_bera".into()));
    }
    let m3: f64 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / nf;
    let m4: f64 = v.iter().map(|x| (x - m).powi(4)).sum::<f64>() / nf;
    let skew = m3 / m2.powf(1.5);
    let kurt = m4 / (m2 * m2);
    let jb = nf / 6.0 * (skew * skew + (kurt - 3.0).powi(2) / 4.0);
    let p = chi_square_sf(jb, 2)?;
    Ok(TestResult::build(
        "Jarque-Bera test",
        jb,
        p,
        false,
        2,
        INFER_NOT_NORMAL,
        INFER_NORMAL,
    ))
}

/// Anderson-Darling normality test with estimated mean and variance:
/// small-sample corrected statistic and the D'Agostino
/// piecewise-exponential p-value approximation.
pub fn anderson_darling(residuals: &Series) -> Result<TestResult> {
    let v = residuals.values();
    let n = v.len();
    if n < 8 {
        return Err(Error::SeriesTooShort {
            needed: 8,
            actual: n,
        });
    }
    let m = mean(v);
    let var: f64 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var <= 0.0 {
        return Err(Error::ZeroVariance("anderson_darling".into()));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = v.iter().map(|x| (x - m) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut clamped = false;
    let nf = n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let mut zi = z[i];
        let mut zrev = z[n - 1 - i];
        if zi.abs() > 8.0 || zrev.abs() > 8.0 {
            clamped = true;
            zi = zi.clamp(-8.0, 8.0);
            zrev = zrev.clamp(-8.0, 8.0);
        }
        sum += (2 * i + 1) as f64 * (normal_cdf(zi).ln() + (1.0 - normal_cdf(zrev)).ln());
    }
    let a2 = -nf - sum / nf;
    let a2_star = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = d_agostino_p(a2_star).clamp(0.0, 1.0);
    Ok(TestResult::build(
        "Anderson-Darling normality test",
        a2_star,
        p,
        clamped,
        0,
        INFER_NOT_NORMAL,
        INFER_NORMAL,
    ))
}

fn d_agostino_p(a: f64) -> f64 {
    if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a > 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    }
}

/// Deterministic trend handling in the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdfTrend {
    Constant,
    ConstantAndTrend,
}

// Dickey-Fuller tau percentiles, rows for effective sample sizes
// 25, 50, 100, 250, 500 and the asymptotic case; columns for
// probabilities 0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99.
const DF_TABLE_N: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, f64::INFINITY];
const DF_TABLE_P: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];
const DF_TAU_CONSTANT: [[f64; 8]; 6] = [
    [-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72],
    [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66],
    [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
];
const DF_TAU_TREND: [[f64; 8]; 6] = [
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
];

/// Augmented Dickey-Fuller unit-root test. Default lag order is
/// `floor((n - 1)^(1/3))`; the default regression includes constant
/// and trend, reproducing the usual clamped p = 0.01 on strongly
/// stationary inputs.
pub fn adf_test(series: &Series, lag_order: Option<usize>, trend: AdfTrend) -> Result<TestResult> {
    let y = series.values();
    let n = y.len();
    let ell = lag_order.unwrap_or_else(|| ((n as f64 - 1.0).powf(1.0 / 3.0)).floor() as usize);
    if n <= ell + 10 {
        return Err(Error::SeriesTooShort {
            needed: ell + 11,
            actual: n,
        });
    }

    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let n_const = match trend {
        AdfTrend::Constant => 1,
        AdfTrend::ConstantAndTrend => 2,
    };
    let rho_col = n_const; // column index of y_{t-1}

    let mut design = Vec::new();
    let mut target = Vec::new();
    for t in (ell + 1)..n {
        let mut row = Vec::with_capacity(n_const + 1 + ell);
        row.push(1.0);
        if trend == AdfTrend::ConstantAndTrend {
            row.push(t as f64);
        }
        row.push(y[t - 1]);
        for i in 1..=ell {
            row.push(dy[t - 1 - i]);
        }
        design.push(row);
        target.push(dy[t - 1]);
    }
    let rows = design.len();
    let (beta, _residuals, se) = least_squares(&design, &target)
        .map_err(|_| Error::SingularMatrix("adf regression".into()))?;
    let stat = beta[rho_col] / se[rho_col];

    let table = match trend {
        AdfTrend::Constant => &DF_TAU_CONSTANT,
        AdfTrend::ConstantAndTrend => &DF_TAU_TREND,
    };
    let (p, clamped) = df_p_value(stat, rows as f64, table);
    Ok(TestResult::build(
        "Augmented Dickey-Fuller test",
        stat,
        p,
        clamped,
        ell,
        INFER_STATIONARY,
        INFER_UNIT_ROOT,
    ))
}

fn df_p_value(stat: f64, n: f64, table: &[[f64; 8]; 6]) -> (f64, bool) {
    // Interpolate each percentile column over the sample size, then the
    // probability over the statistic. Never extrapolate: clamp + flag.
    let mut taus = [0.0; 8];
    for (j, tau) in taus.iter_mut().enumerate() {
        *tau = interp_over_n(&table_column(table, j), n);
    }
    if stat <= taus[0] {
        return (DF_TABLE_P[0], true);
    }
    if stat >= taus[7] {
        return (DF_TABLE_P[7], true);
    }
    let mut k = 0;
    while stat > taus[k + 1] {
        k += 1;
    }
    let t = (stat - taus[k]) / (taus[k + 1] - taus[k]);
    (DF_TABLE_P[k] + t * (DF_TABLE_P[k + 1] - DF_TABLE_P[k]), false)
}

fn table_column(table: &[[f64; 8]; 6], j: usize) -> [f64; 6] {
    let mut col = [0.0; 6];
    for (i, row) in table.iter().enumerate() {
        col[i] = row[j];
    }
    col
}

fn interp_over_n(ys: &[f64; 6], n: f64) -> f64 {
    if n <= DF_TABLE_N[0] {
        return ys[0];
    }
    // Beyond the last finite table size use the asymptotic row.
    if n >= DF_TABLE_N[4] {
        return ys[5];
    }
    let mut k = 0;
    while n > DF_TABLE_N[k + 1] {
        k += 1;
    }
    let t = (n - DF_TABLE_N[k]) / (DF_TABLE_N[k + 1] - DF_TABLE_N[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

// KPSS level-stationarity critical values (probability, statistic).
const KPSS_TABLE: [(f64, f64); 4] = [(0.10, 0.347), (0.05, 0.463), (0.025, 0.574), (0.01, 0.739)];

/// KPSS test of level stationarity (null: stationary -- note the
/// reversed sense versus ADF). Long-run variance uses the Newey-West
/// estimator with a Bartlett kernel; the default bandwidth is
/// `floor(4 * (n/100)^(1/4))`. The p-value is interpolated within
/// [0.01, 0.10] and clamped at the table edges.
pub fn kpss_test(series: &Series, bandwidth: Option<usize>) -> Result<TestResult> {
    let y = series.values();
    let n = y.len();
    if n < 20 {
        return Err(Error::SeriesTooShort {
            needed: 20,
            actual: n,
        });
    }
    let ell = bandwidth.unwrap_or_else(|| (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize);
    let m = mean(y);
    let e: Vec<f64> = y.iter().map(|v| v - m).collect();

    let nf = n as f64;
    let gamma = |j: usize| -> f64 { (0..n - j).map(|t| e[t] * e[t + j]).sum::<f64>() / nf };
    let mut lrv = gamma(0);
    for j in 1..=ell.min(n - 1) {
        lrv += 2.0 * (1.0 - j as f64 / (ell as f64 + 1.0)) * gamma(j);
    }
    if lrv <= 0.0 {
        return Err(Error::ZeroVariance("kpss long-run variance".into()));
    }

    let mut s = 0.0;
    let mut sum_s2 = 0.0;
    for v in &e {
        s += v;
        sum_s2 += s * s;
    }
    let eta = sum_s2 / (nf * nf * lrv);

    let (p, clamped) = kpss_p_value(eta);
    Ok(TestResult::build(
        "KPSS test",
        eta,
        p,
        clamped,
        ell,
        INFER_NOT_STATIONARY,
        INFER_LEVEL_STATIONARY,
    ))
}

fn kpss_p_value(eta: f64) -> (f64, bool) {
    if eta <= KPSS_TABLE[0].1 {
        return (KPSS_TABLE[0].0, true);
    }
    if eta >= KPSS_TABLE[3].1 {
        return (KPSS_TABLE[3].0, true);
    }
    let mut k = 0;
    while eta > KPSS_TABLE[k + 1].1 {
        k += 1;
    }
    let (p0, c0) = KPSS_TABLE[k];
    let (p1, c1) = KPSS_TABLE[k + 1];
    let t = (eta - c0) / (c1 - c0);
    (p0 + t * (p1 - p0), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp, StandardNormal};

    fn series(values: Vec<f64>) -> Series {
        Series::hourly(
            NaiveDate::from_ymd_opt(2014, 1, 1)
                .unwrap()
                .and_hms_opt(0, 0, 0)
                .unwrap(),
            values,
            "t",
        )
        .unwrap()
    }

    fn white_noise(seed: u64, n: usize) -> Series {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        series((0..n).map(|_| rng.sample(StandardNormal)).collect())
    }

    fn random_walk(seed: u64, n: usize) -> Series {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = 0.0;
        series(
            (0..n)
                .map(|_| {
                    v += rng.sample::<f64, _>(StandardNormal);
                    v
                })
                .collect(),
        )
    }

    // Fixed dataset whose test statistics were frozen from independent
    // reference implementations (statsmodels / scipy).
    const X: [f64; 60] = [
        -1.603837, -0.868202, 0.26197, 0.363801, 1.148025, 3.679914,
        0.819125, 1.538948, -0.628767, 0.092485, -0.318953, 1.282387,
        0.071152, 0.736184, -0.637433, -2.343599, -0.761425, 1.498434,
        1.653195, 0.235751, 0.667796, 1.437852, 2.335983, 0.538179,
        1.325187, 1.464496, 1.176282, 1.060951, 0.311321, -0.06774,
        1.66857, 1.649981, 0.910505, -1.531487, -1.369456, -0.889183,
        -1.366639, -1.688312, 0.287006, 0.410988, -0.955113, -1.398221,
        -0.616571, 1.278864, -0.19309, 2.032258, 1.30203, -0.347884,
        0.89836, 2.582108, 1.94546, 2.446093, 1.791764, 1.71808,
        3.362265, 3.591145, 1.642086, 4.486879, 2.384931, 3.005066,
    ];

    #[test]
    fn acf_hand_computed_examples() {
        let r = acf(&series(vec![1.0, 2.0, 3.0, 4.0, 5.0]), 1).unwrap();
        assert_abs_diff_eq!(r.coefficients[0], 0.4, epsilon = 1e-12);
        let r = acf(&series(vec![1.0, -1.0, 1.0, -1.0]), 1).unwrap();
        assert_abs_diff_eq!(r.coefficients[0], -0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(r.band, 1.96 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn acf_matches_reference() {
        let expect = [
            0.554126354705,
            0.382532883059,
            0.266309863037,
            0.274041069436,
            0.192995626109,
        ];
        let r = acf(&series(X.to_vec()), 5).unwrap();
        for (got, want) in r.coefficients.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(
            acf(&series(vec![5.0; 10]), 2),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            acf(&series(vec![1.0, 2.0, 3.0]), 3),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn acf_scale_and_shift_invariant() {
        let base = white_noise(7, 100);
        let transformed = series(base.values().iter().map(|v| -3.5 * v + 11.0).collect());
        let r1 = acf(&base, 10).unwrap();
        let r2 = acf(&transformed, 10).unwrap();
        for (a, b) in r1.coefficients.iter().zip(&r2.coefficients) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn pacf_lag1_equals_acf_lag1() {
        for seed in 0..5 {
            let s = white_noise(seed, 80);
            let a = acf(&s, 6).unwrap();
            let p = pacf(&s, 6).unwrap();
            assert_abs_diff_eq!(p.coefficients[0], a.coefficients[0], epsilon = 1e-12);
        }
        let s = series(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_abs_diff_eq!(pacf(&s, 1).unwrap().coefficients[0], 0.4, epsilon = 1e-12);
    }

    #[test]
    fn pacf_decaying_exponential_second_lag_small() {
        let mut v = 1.0;
        let values: Vec<f64> = (0..50)
            .map(|_| {
                let out = v;
                v *= 0.8;
                out
            })
            .collect();
        let p = pacf(&series(values), 2).unwrap();
        assert!(p.coefficients[1].abs() < 0.3, "phi22 = {}", p.coefficients[1]);
    }

    #[test]
    fn pacf_white_noise_mostly_within_band() {
        let mut inside = 0;
        let mut total = 0;
        for seed in 0..8 {
            let s = white_noise(100 + seed, 2000);
            let p = pacf(&s, 24).unwrap();
            for c in &p.coefficients {
                total += 1;
                if c.abs() < p.band {
                    inside += 1;
                }
            }
        }
        assert!(
            inside as f64 >= 0.90 * total as f64,
            "only {inside}/{total} inside band"
        );
    }

    #[test]
    fn ljung_box_zero_autocorrelation() {
        // Lag-1 autocorrelation of [0, 1, 0, -1] is exactly zero.
        let r = ljung_box(&series(vec![0.0, 1.0, 0.0, -1.0]), 1, 0).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-12);
        assert!(!r.reject_null);
        assert_eq!(r.inference, INFER_NO_AUTOCORR);
    }

    #[test]
    fn ljung_box_matches_hand_formula() {
        let s = series(X.to_vec());
        let r = acf_values(s.values(), 5).unwrap();
        let n = 60.0;
        let by_hand: f64 = n
            * (n + 2.0)
            * r.iter()
                .enumerate()
                .map(|(i, rk)| rk * rk / (n - (i + 1) as f64))
                .sum::<f64>();
        let lb = ljung_box(&s, 5, 0).unwrap();
        assert_abs_diff_eq!(lb.statistic, by_hand, epsilon = 1e-12);
        // Frozen from statsmodels acorr_ljungbox.
        assert_abs_diff_eq!(lb.statistic, 40.882019768294, epsilon = 1e-8);
        assert_abs_diff_eq!(lb.p_value, 0.0000000991, epsilon = 1e-9);
        assert!(lb.reject_null);
        assert_eq!(lb.inference, INFER_AUTOCORR);
    }

    #[test]
    fn ljung_box_spec_arithmetic_point() {
        // Q for n=100, r1=0.3, h=1: 100 * 102 * 0.09 / 99.
        let q = 100.0 * 102.0 * (0.3f64 * 0.3) / 99.0;
        assert_abs_diff_eq!(q, 9.272727272727273, epsilon = 1e-12);
        let p = chi_square_sf(q, 1).unwrap();
        assert!((p - 0.0023).abs() < 5e-5, "p = {p}");
    }

    #[test]
    fn ljung_box_monotone_in_h() {
        let s = white_noise(3, 200);
        let mut prev = 0.0;
        for h in 1..=20 {
            let q = ljung_box(&s, h, 0).unwrap().statistic;
            assert!(q >= prev - 1e-12, "Q not monotone at h={h}");
            prev = q;
        }
    }

    #[test]
    fn ljung_box_df_guard() {
        let s = white_noise(4, 50);
        assert!(ljung_box(&s, 3, 3).is_err());
        assert!(ljung_box(&s, 3, 5).is_err());
        assert_eq!(ljung_box(&s, 4, 3).unwrap().df_or_bandwidth, 1);
    }

    #[test]
    fn jarque_bera_null_point() {
        // {2, -2, 0, 0, 0, 0} has S = 0 and K = 3 exactly.
        let r = jarque_bera(&series(vec![2.0, -2.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-12);
        assert_eq!(r.inference, INFER_NORMAL);
    }

    #[test]
    fn jarque_bera_alternating_signs() {
        let values: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let r = jarque_bera(&series(values)).unwrap();
        assert_abs_diff_eq!(r.statistic, 100.0 / 6.0, epsilon = 1e-10);
        assert!((r.p_value - 2.4e-4).abs() < 1e-5);
        assert!(r.reject_null);
        assert_eq!(r.inference, INFER_NOT_NORMAL);
    }

    #[test]
    fn jarque_bera_matches_reference_and_oracle() {
        let s = series(X.to_vec());
        let r = jarque_bera(&s).unwrap();
        // Frozen from scipy.stats.jarque_bera.
        assert_abs_diff_eq!(r.statistic, 0.470808843759, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p_value, 0.7902511901, epsilon = 1e-8);

        // Independent direct-moment oracle on random inputs.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let v: Vec<f64> = (0..150).map(|_| rng.gen_range(-4.0..9.0)).collect();
            let m = v.iter().sum::<f64>() / 150.0;
            let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
            for x in &v {
                let d = x - m;
                m2 += d * d;
                m3 += d * d * d;
                m4 += d * d * d * d;
            }
            m2 /= 150.0;
            m3 /= 150.0;
            m4 /= 150.0;
            let expect = 150.0 / 6.0
                * ((m3 / m2.powf(1.5)).powi(2) + (m4 / (m2 * m2) - 3.0).powi(2) / 4.0);
            let got = jarque_bera(&series(v)).unwrap().statistic;
            assert_abs_diff_eq!(got, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn anderson_darling_matches_reference() {
        let r = anderson_darling(&series(X.to_vec())).unwrap();
        // A2* and p frozen from scipy.stats.anderson + the D'Agostino map.
        assert_abs_diff_eq!(r.statistic, 0.244657662365, epsilon = 1e-8);
        assert_abs_diff_eq!(r.p_value, 0.7619707776, epsilon = 1e-7);
        assert!(!r.reject_null);
        assert!(!r.p_clamped);
    }

    #[test]
    fn anderson_darling_degenerate_and_calibration() {
        assert!(matches!(
            anderson_darling(&series(vec![3.0; 20])),
            Err(Error::ZeroVariance(_))
        ));

        let mut normal_rejects = 0;
        let mut exp_rejects = 0;
        let trials = 60;
        for seed in 0..trials {
            let s = white_noise(500 + seed, 200);
            if anderson_darling(&s).unwrap().reject_null {
                normal_rejects += 1;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let exp = Exp::new(1.0).unwrap();
            let e = series((0..200).map(|_| exp.sample(&mut rng)).collect());
            if anderson_darling(&e).unwrap().reject_null {
                exp_rejects += 1;
            }
        }
        // Size ~5% on normal data, near-total power on exponential data.
        assert!(normal_rejects <= trials / 10, "{normal_rejects} rejects");
        assert!(exp_rejects >= trials - 1, "{exp_rejects} rejects");
    }

    #[test]
    fn adf_matches_reference_statistics() {
        let s = series(X.to_vec());
        let ct = adf_test(&s, Some(3), AdfTrend::ConstantAndTrend).unwrap();
        // Frozen from statsmodels adfuller(regression='ct', maxlag=3).
        assert_abs_diff_eq!(ct.statistic, -1.980250902797, epsilon = 1e-8);
        assert!(!ct.reject_null);
        assert_eq!(ct.df_or_bandwidth, 3);

        let c = adf_test(&s, Some(3), AdfTrend::Constant).unwrap();
        assert_abs_diff_eq!(c.statistic, -1.707584603157, epsilon = 1e-8);
    }

    #[test]
    fn adf_strongly_stationary_clamps_to_001() {
        let s = white_noise(11, 500);
        let r = adf_test(&s, None, AdfTrend::ConstantAndTrend).unwrap();
        assert_abs_diff_eq!(r.p_value, 0.01, epsilon = 1e-12);
        assert!(r.p_clamped);
        assert!(r.reject_null);
        assert_eq!(r.inference, INFER_STATIONARY);
    }

    #[test]
    fn adf_calibration_smoke() {
        let trials = 40;
        let mut wn_rejects = 0;
        let mut rw_rejects = 0;
        for seed in 0..trials {
            let wn = white_noise(2000 + seed, 500);
            if adf_test(&wn, None, AdfTrend::ConstantAndTrend)
                .unwrap()
                .reject_null
            {
                wn_rejects += 1;
            }
            let rw = random_walk(3000 + seed, 500);
            if adf_test(&rw, None, AdfTrend::ConstantAndTrend)
                .unwrap()
                .reject_null
            {
                rw_rejects += 1;
            }
        }
        assert!(wn_rejects >= trials - 1, "white noise: {wn_rejects}/{trials}");
        assert!(rw_rejects <= trials / 5, "random walk: {rw_rejects}/{trials}");
    }

    #[test]
    fn adf_too_short() {
        let s = white_noise(1, 12);
        assert!(matches!(
            adf_test(&s, Some(4), AdfTrend::Constant),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn kpss_matches_reference_statistic() {
        let s = series(X.to_vec());
        let r = kpss_test(&s, Some(5)).unwrap();
        // Frozen from statsmodels kpss(regression='c', nlags=5).
        assert_abs_diff_eq!(r.statistic, 0.330212719552, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p_value, 0.10, epsilon = 1e-12);
        assert!(r.p_clamped);
        assert!(!r.reject_null);
        assert_eq!(r.df_or_bandwidth, 5);
    }

    #[test]
    fn kpss_deterministic_ramp_rejects() {
        let s = series((0..500).map(|t| t as f64).collect());
        let r = kpss_test(&s, None).unwrap();
        assert!(r.reject_null);
        assert_eq!(r.inference, INFER_NOT_STATIONARY);
    }

    #[test]
    fn kpss_calibration_smoke() {
        let trials = 40;
        let mut wn_fail_to_reject = 0;
        let mut rw_rejects = 0;
        for seed in 0..trials {
            let wn = white_noise(4000 + seed, 500);
            if !kpss_test(&wn, None).unwrap().reject_null {
                wn_fail_to_reject += 1;
            }
            let rw = random_walk(5000 + seed, 500);
            if kpss_test(&rw, None).unwrap().reject_null {
                rw_rejects += 1;
            }
        }
        assert!(
            wn_fail_to_reject >= trials * 9 / 10,
            "{wn_fail_to_reject}/{trials}"
        );
        assert!(rw_rejects >= trials * 9 / 10, "{rw_rejects}/{trials}");
    }

    #[test]
    fn reject_flag_consistency() {
        for seed in 0..10 {
            let s = white_noise(seed, 120);
            for r in [
                ljung_box(&s, 10, 0).unwrap(),
                jarque_bera(&s).unwrap(),
                anderson_darling(&s).unwrap(),
                adf_test(&s, None, AdfTrend::ConstantAndTrend).unwrap(),
                kpss_test(&s, None).unwrap(),
            ] {
                assert_eq!(r.reject_null, r.p_value < r.alpha, "{}", r.test_name);
                assert!((0.0..=1.0).contains(&r.p_value));
            }
        }
    }

    #[test]
    fn adf_and_kpss_agree_on_stationary_ar1() {
        let mut joint = 0;
        let trials = 30;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
            let mut v = 0.0;
            let values: Vec<f64> = (0..1000)
                .map(|_| {
                    v = 0.5 * v + rng.sample::<f64, _>(StandardNormal);
                    v
                })
                .collect();
            let s = series(values);
            let adf = adf_test(&s, None, AdfTrend::ConstantAndTrend).unwrap();
            let kpss = kpss_test(&s, None).unwrap();
            if adf.reject_null && !kpss.reject_null {
                joint += 1;
            }
        }
        assert!(joint * 10 >= trials * 9, "joint agreement {joint}/{trials}");
    }

    #[test]
    fn default_ljung_box_lag_rules() {
        assert_eq!(default_ljung_box_lag(1000, Some(24)), 48);
        assert_eq!(default_ljung_box_lag(1000, None), 10);
        assert_eq!(default_ljung_box_lag(30, None), 6);
        assert_eq!(default_ljung_box_lag(4, None), 1);
    }

    #[test]
    fn test_result_serializes_contract_keys() {
        let r = ljung_box(&series(X.to_vec()), 5, 0).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "test",
            "statistic",
            "p_value",
            "p_clamped",
            "reject_at_0.05",
            "inference",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
