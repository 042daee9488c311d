//! Seasonal ARIMA: simulation, exact-likelihood estimation, order
//! selection, and interval forecasting.
//!
//! The model (p,d,q)(P,D,Q)_s is fitted by differencing, multiplying the
//! seasonal and non-seasonal polynomials into one expanded ARMA, and
//! maximizing the exact Gaussian likelihood through a Kalman recursion
//! with sigma^2 concentrated out. Stationarity and invertibility are
//! enforced by the parametrization itself (every optimizer iterate is
//! valid), with Hannan-Rissanen regression supplying start values.

mod css;
mod hannan;
mod kalman;
mod params;
mod persist;
mod select;

pub use persist::{model_from_json, model_to_json};
pub use select::{auto_select, Criterion, SearchStrategy, SelectBounds};

use chrono::{Duration, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::{minimize, normal_quantile, MinimizeConfig};
use crate::series::Series;

use kalman::StateSpace;
use params::{expand_ar, expand_ma, integrated_ar, is_stationary, psi_weights, raw_to_coeffs};

/// Model orders (p, d, q)(P, D, Q) with seasonal period `s`
/// (`s = 0` means non-seasonal; `cap_*` are the seasonal orders).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SarimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub cap_p: usize,
    pub cap_d: usize,
    pub cap_q: usize,
    pub s: usize,
}

impl SarimaOrder {
    /// Non-seasonal ARIMA(p, d, q).
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            cap_p: 0,
            cap_d: 0,
            cap_q: 0,
            s: 0,
        }
    }

    /// Full seasonal specification; `s = 0` requires P = D = Q = 0.
    pub fn seasonal(
        p: usize,
        d: usize,
        q: usize,
        cap_p: usize,
        cap_d: usize,
        cap_q: usize,
        s: usize,
    ) -> Result<Self> {
        let order = Self {
            p,
            d,
            q,
            cap_p,
            cap_d,
            cap_q,
            s,
        };
        order.validate()?;
        Ok(order)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 1 {
            return Err(Error::InvalidArgument(
                "seasonal period must be 0 (non-seasonal) or >= 2".into(),
            ));
        }
        if self.s == 0 && (self.cap_p > 0 || self.cap_d > 0 || self.cap_q > 0) {
            return Err(Error::InvalidArgument(
                "seasonal orders require a seasonal period >= 2".into(),
            ));
        }
        Ok(())
    }

    /// Number of estimated ARMA coefficients.
    pub fn num_coeffs(&self) -> usize {
        self.p + self.q + self.cap_p + self.cap_q
    }

    /// Parameter count for AIC/BIC: coefficients + optional mean + sigma^2.
    pub fn k(&self, has_mean: bool) -> usize {
        self.num_coeffs() + usize::from(has_mean) + 1
    }

    pub fn label(&self) -> String {
        if self.s == 0 {
            format!("arima({},{},{})", self.p, self.d, self.q)
        } else {
            format!(
                "sarima({},{},{})({},{},{})[{}]",
                self.p, self.d, self.q, self.cap_p, self.cap_d, self.cap_q, self.s
            )
        }
    }
}

/// Whether `fit` estimates a mean for the differenced series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanPolicy {
    /// Include a mean iff no differencing is applied (d + D = 0).
    #[default]
    Auto,
    On,
    Off,
}

impl MeanPolicy {
    fn include(self, order: &SarimaOrder) -> bool {
        match self {
            MeanPolicy::Auto => order.d + order.cap_d == 0,
            MeanPolicy::On => true,
            MeanPolicy::Off => false,
        }
    }
}

/// A fitted seasonal ARIMA model.
#[derive(Debug, Clone)]
pub struct SarimaFit {
    pub order: SarimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub mean: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_effective: usize,
    /// Standardized one-step Kalman innovations rescaled to the data
    /// scale (`v_t / sqrt(F_t)`), on the differenced grid.
    pub residuals: Series,
    pub converged: bool,
    history: Series,
}

impl SarimaFit {
    /// The training series (kept for forecasting and persistence).
    pub fn history(&self) -> &Series {
        &self.history
    }

    pub fn k(&self) -> usize {
        self.order.k(self.mean.is_some())
    }

    pub fn model_label(&self) -> String {
        self.order.label()
    }
}

/// Multi-level interval forecast on the series grid.
#[derive(Debug, Clone)]
pub struct Forecast {
    pub start: NaiveDateTime,
    pub step: Duration,
    pub horizon: usize,
    pub points: Vec<f64>,
    /// Confidence levels in ascending order.
    pub levels: Vec<f64>,
    /// Per-level lower bounds, indexed `[level][step]`.
    pub lower: Vec<Vec<f64>>,
    /// Per-level upper bounds, indexed `[level][step]`.
    pub upper: Vec<Vec<f64>>,
    /// Per-step forecast standard errors (empty when not applicable).
    pub se: Vec<f64>,
    /// True for comparators whose interval formula is a rough
    /// approximation rather than a model-based standard error.
    pub approximate_intervals: bool,
}

impl Forecast {
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + self.step * i as i32
    }
}

/// AIC and BIC from a log-likelihood, parameter count, and sample size.
pub fn information_criteria(loglik: f64, k: usize, n: usize) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::InvalidArgument(
            "information_criteria requires n >= 1".into(),
        ));
    }
    let aic = -2.0 * loglik + 2.0 * k as f64;
    let bic = -2.0 * loglik + k as f64 * (n as f64).ln();
    Ok((aic, bic))
}

fn validate_coeff_lengths(
    order: &SarimaOrder,
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
) -> Result<()> {
    if ar.len() != order.p
        || ma.len() != order.q
        || seasonal_ar.len() != order.cap_p
        || seasonal_ma.len() != order.cap_q
    {
        return Err(Error::InvalidArgument(
            "coefficient lengths do not match the model order".into(),
        ));
    }
    Ok(())
}

fn check_stationary_invertible(
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
) -> Result<()> {
    let neg = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| -x).collect() };
    if !is_stationary(ar) || !is_stationary(seasonal_ar) {
        return Err(Error::NonStationary("AR polynomial".into()));
    }
    if !is_stationary(&neg(ma)) || !is_stationary(&neg(seasonal_ma)) {
        return Err(Error::NonStationary("MA polynomial".into()));
    }
    Ok(())
}

/// Applies the model's differencing: d regular passes, then D seasonal.
fn apply_differencing(series: &Series, order: &SarimaOrder) -> Result<Series> {
    let mut w = series.difference(1, order.d)?;
    if order.cap_d > 0 {
        w = w.difference(order.s, order.cap_d)?;
    }
    Ok(w)
}

/// Simulates a Gaussian-innovation SARIMA path: the expanded stationary
/// ARMA is drawn with a burn-in, the mean added, and the result
/// integrated d regular and D seasonal times. Deterministic per seed.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    order: &SarimaOrder,
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    mean: f64,
    sigma2: f64,
    n: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Series> {
    order.validate()?;
    validate_coeff_lengths(order, ar, ma, seasonal_ar, seasonal_ma)?;
    check_stationary_invertible(ar, ma, seasonal_ar, seasonal_ma)?;
    if n == 0 {
        return Err(Error::InvalidArgument("simulate requires n >= 1".into()));
    }
    if sigma2 < 0.0 {
        return Err(Error::InvalidArgument("sigma2 must be non-negative".into()));
    }

    let ar_star = expand_ar(ar, seasonal_ar, order.s);
    let ma_star = expand_ma(ma, seasonal_ma, order.s);
    let total = burn_in + n;

    let eps: Vec<f64> = if sigma2 == 0.0 {
        vec![0.0; total]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma2.sqrt())
            .map_err(|e| Error::InvalidArgument(format!("bad sigma2: {e}")))?;
        (0..total).map(|_| normal.sample(&mut rng)).collect()
    };

    let mut w = vec![0.0; total];
    for t in 0..total {
        let mut v = eps[t];
        for (j, th) in ma_star.iter().enumerate() {
            if t > j {
                v += th * eps[t - 1 - j];
            }
        }
        for (i, a) in ar_star.iter().enumerate() {
            if t > i {
                v += a * w[t - 1 - i];
            }
        }
        w[t] = v;
    }
    let mut values: Vec<f64> = w[burn_in..].iter().map(|v| v + mean).collect();

    // Integrate: seasonal sums first, then regular sums.
    for _ in 0..order.cap_d {
        for t in order.s..values.len() {
            values[t] += values[t - order.s];
        }
    }
    for _ in 0..order.d {
        for t in 1..values.len() {
            values[t] += values[t - 1];
        }
    }

    Series::hourly(default_start(), values, "simulated")
}

fn default_start() -> NaiveDateTime {
    chrono::NaiveDate::from_ymd_opt(2014, 1, 1)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

/// Decoded optimizer parameters.
struct DecodedParams {
    ar: Vec<f64>,
    ma: Vec<f64>,
    seasonal_ar: Vec<f64>,
    seasonal_ma: Vec<f64>,
    mean: f64,
}

fn decode_raw(raw: &[f64], order: &SarimaOrder, has_mean: bool) -> DecodedParams {
    let (p, q, cp, cq) = (order.p, order.q, order.cap_p, order.cap_q);
    let ar = raw_to_coeffs(&raw[..p]);
    let ma: Vec<f64> = raw_to_coeffs(&raw[p..p + q]).iter().map(|c| -c).collect();
    let seasonal_ar = raw_to_coeffs(&raw[p + q..p + q + cp]);
    let seasonal_ma: Vec<f64> = raw_to_coeffs(&raw[p + q + cp..p + q + cp + cq])
        .iter()
        .map(|c| -c)
        .collect();
    let mean = if has_mean { raw[p + q + cp + cq] } else { 0.0 };
    DecodedParams {
        ar,
        ma,
        seasonal_ar,
        seasonal_ma,
        mean,
    }
}

/// Differenced data plus the optimizer start, shared by the exact and
/// CSS fitting paths.
struct PreparedFit {
    w: Series,
    include_mean: bool,
    raw_start: Vec<f64>,
}

fn prepare_fit(
    series: &Series,
    order: &SarimaOrder,
    mean_policy: MeanPolicy,
) -> Result<PreparedFit> {
    order.validate()?;
    let w = apply_differencing(series, order)?;
    let n_eff = w.len();

    let state_dim = (order.p + order.s * order.cap_p)
        .max(order.q + order.s * order.cap_q + 1)
        .max(1);
    let needed = (10 * (order.num_coeffs() + 1)).max(state_dim + 2);
    if n_eff < needed {
        return Err(Error::SeriesTooShort {
            needed: needed + order.d + order.s * order.cap_d,
            actual: series.len(),
        });
    }
    let w_values = w.values();
    let first = w_values[0];
    if w_values.iter().all(|v| *v == first) {
        return Err(Error::ZeroVariance("differenced series".into()));
    }

    let include_mean = mean_policy.include(order);
    let w_mean = w_values.iter().sum::<f64>() / n_eff as f64;
    let sv = hannan::start_values(w_values, order);
    let raw_start = hannan::to_raw_start(&sv, include_mean.then_some(w_mean));
    Ok(PreparedFit {
        w,
        include_mean,
        raw_start,
    })
}

/// Fits a seasonal ARIMA by exact maximum likelihood.
pub fn fit(series: &Series, order: &SarimaOrder, mean_policy: MeanPolicy) -> Result<SarimaFit> {
    fit_from_start(
        series,
        order,
        mean_policy,
        &MinimizeConfig::default(),
        None,
    )
}

/// `fit` with explicit optimizer configuration and an optional warm
/// start in the raw parameter space (used by order selection).
pub(crate) fn fit_from_start(
    series: &Series,
    order: &SarimaOrder,
    mean_policy: MeanPolicy,
    nm_config: &MinimizeConfig,
    start_override: Option<Vec<f64>>,
) -> Result<SarimaFit> {
    let prepared = prepare_fit(series, order, mean_policy)?;
    let include_mean = prepared.include_mean;
    let w = &prepared.w;
    let w_values = w.values();

    // Degenerate case: nothing to optimize.
    if order.num_coeffs() == 0 && !include_mean {
        return finalize_fit(series, w, order, &[], &[], &[], &[], None, true);
    }

    let raw_start = start_override.unwrap_or(prepared.raw_start);
    let objective = |raw: &[f64]| -> f64 {
        let dp = decode_raw(raw, order, include_mean);
        let ar_star = expand_ar(&dp.ar, &dp.seasonal_ar, order.s);
        let ma_star = expand_ma(&dp.ma, &dp.seasonal_ma, order.s);
        let ss = StateSpace::new(&ar_star, &ma_star);
        let data: Vec<f64> = w_values.iter().map(|v| v - dp.mean).collect();
        match kalman::concentrated_loglik(&ss, &data) {
            Some((ll, _)) => -ll,
            None => f64::INFINITY,
        }
    };

    let result = minimize(objective, &raw_start, nm_config)
        .map_err(|e| Error::OptimizerFailed(format!("sarima fit: {e}")))?;

    let dp = decode_raw(&result.argmin, order, include_mean);
    finalize_fit(
        series,
        w,
        order,
        &dp.ar,
        &dp.ma,
        &dp.seasonal_ar,
        &dp.seasonal_ma,
        include_mean.then_some(dp.mean),
        result.converged,
    )
}

/// Screening result from the conditional-sum-of-squares likelihood.
pub(crate) struct CssScreen {
    pub loglik: f64,
    pub k: usize,
    /// CSS effective sample size (after the AR burn-in).
    pub n: usize,
    pub raw_argmin: Vec<f64>,
    pub converged: bool,
}

/// Optimizes the CSS likelihood for one candidate order; cheap enough
/// to screen large grids. The returned argmin warm-starts the exact fit.
pub(crate) fn css_screen(
    series: &Series,
    order: &SarimaOrder,
    mean_policy: MeanPolicy,
    nm_config: &MinimizeConfig,
) -> Result<CssScreen> {
    let prepared = prepare_fit(series, order, mean_policy)?;
    let include_mean = prepared.include_mean;
    let w_values = prepared.w.values();
    let burn = order.p + order.s * order.cap_p;
    let n_css = prepared.w.len().saturating_sub(burn);
    let k = order.k(include_mean);

    if order.num_coeffs() == 0 && !include_mean {
        let (ll, _) = css::css_loglik(w_values, &[], &[])
            .ok_or_else(|| Error::OptimizerFailed("css evaluation failed".into()))?;
        return Ok(CssScreen {
            loglik: ll,
            k,
            n: n_css,
            raw_argmin: Vec::new(),
            converged: true,
        });
    }

    let objective = |raw: &[f64]| -> f64 {
        let dp = decode_raw(raw, order, include_mean);
        let ar_star = expand_ar(&dp.ar, &dp.seasonal_ar, order.s);
        let ma_star = expand_ma(&dp.ma, &dp.seasonal_ma, order.s);
        let data: Vec<f64> = w_values.iter().map(|v| v - dp.mean).collect();
        match css::css_loglik(&data, &ar_star, &ma_star) {
            Some((ll, _)) => -ll,
            None => f64::INFINITY,
        }
    };
    let result = minimize(objective, &prepared.raw_start, nm_config)
        .map_err(|e| Error::OptimizerFailed(format!("css screen: {e}")))?;
    Ok(CssScreen {
        loglik: -result.objective,
        k,
        n: n_css,
        raw_argmin: result.argmin,
        converged: result.converged,
    })
}

#[allow(clippy::too_many_arguments)]
fn finalize_fit(
    series: &Series,
    w: &Series,
    order: &SarimaOrder,
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    mean: Option<f64>,
    converged: bool,
) -> Result<SarimaFit> {
    let n_eff = w.len();
    let ar_star = expand_ar(ar, seasonal_ar, order.s);
    let ma_star = expand_ma(ma, seasonal_ma, order.s);
    let ss = StateSpace::new(&ar_star, &ma_star);
    let mu = mean.unwrap_or(0.0);
    let data: Vec<f64> = w.values().iter().map(|v| v - mu).collect();
    let out = kalman::filter(&ss, &data, true)
        .ok_or_else(|| Error::OptimizerFailed("final filter pass diverged".into()))?;

    let nf = n_eff as f64;
    let sigma2 = out.sum_v2_f / nf;
    if !(sigma2 > 0.0) {
        return Err(Error::OptimizerFailed("non-positive innovation variance".into()));
    }
    let loglik = -0.5 * nf * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * nf * sigma2.ln()
        - 0.5 * nf
        - 0.5 * out.sum_ln_f;
    let k = order.k(mean.is_some());
    let (aic, bic) = information_criteria(loglik, k, n_eff)?;

    let residuals = Series::new(w.start(), w.step(), out.scaled_residuals, "residuals")?;
    Ok(SarimaFit {
        order: *order,
        ar: ar.to_vec(),
        ma: ma.to_vec(),
        seasonal_ar: seasonal_ar.to_vec(),
        seasonal_ma: seasonal_ma.to_vec(),
        mean,
        sigma2,
        loglik,
        aic,
        bic,
        n_effective: n_eff,
        residuals,
        converged,
        history: series.clone(),
    })
}

/// Exact Gaussian log-likelihood of a fully specified model on a series
/// (differencing applied per the order; no estimation).
#[allow(clippy::too_many_arguments)]
pub fn exact_loglik(
    order: &SarimaOrder,
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    mean: f64,
    sigma2: f64,
    series: &Series,
) -> Result<f64> {
    order.validate()?;
    validate_coeff_lengths(order, ar, ma, seasonal_ar, seasonal_ma)?;
    check_stationary_invertible(ar, ma, seasonal_ar, seasonal_ma)?;
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be positive".into()));
    }
    let w = apply_differencing(series, order)?;
    let data: Vec<f64> = w.values().iter().map(|v| v - mean).collect();
    let ss = StateSpace::new(
        &expand_ar(ar, seasonal_ar, order.s),
        &expand_ma(ma, seasonal_ma, order.s),
    );
    kalman::loglik_at_sigma2(&ss, &data, sigma2)
        .ok_or_else(|| Error::NonStationary("likelihood evaluation diverged".into()))
}

/// Point forecasts with multi-level prediction intervals.
///
/// Points come from propagating the filtered state of the expanded
/// ARMA forward with future innovations set to zero and re-integrating
/// the differences; standard errors use the psi-weights of the
/// integrated model, `se_h = sigma * sqrt(sum_{j<h} psi_j^2)`.
pub fn forecast(fit: &SarimaFit, h: usize, levels: &[f64]) -> Result<Forecast> {
    if h < 1 {
        return Err(Error::InvalidArgument("forecast horizon must be >= 1".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidArgument("levels must be non-empty".into()));
    }
    let mut levels = levels.to_vec();
    for g in &levels {
        if !(*g > 0.0 && *g < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "confidence level {g} outside (0, 1)"
            )));
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();

    let order = &fit.order;
    let history = &fit.history;

    // Differencing cascade: level 0 is the raw series, then d regular
    // and D seasonal differences. Kept for re-integration.
    let mut cascade: Vec<Vec<f64>> = vec![history.values().to_vec()];
    let mut lags: Vec<usize> = Vec::new();
    for _ in 0..order.d {
        let prev = cascade.last().unwrap();
        cascade.push(prev.windows(2).map(|w| w[1] - w[0]).collect());
        lags.push(1);
    }
    for _ in 0..order.cap_d {
        let prev = cascade.last().unwrap();
        let s = order.s;
        cascade.push((s..prev.len()).map(|t| prev[t] - prev[t - s]).collect());
        lags.push(s);
    }

    let mu = fit.mean.unwrap_or(0.0);
    let ar_star = expand_ar(&fit.ar, &fit.seasonal_ar, order.s);
    let ma_star = expand_ma(&fit.ma, &fit.seasonal_ma, order.s);
    let ss = StateSpace::new(&ar_star, &ma_star);
    let w_data: Vec<f64> = cascade.last().unwrap().iter().map(|v| v - mu).collect();
    let out = kalman::filter(&ss, &w_data, false)
        .ok_or_else(|| Error::NonStationary("filter pass diverged".into()))?;

    let mut state = out.final_state;
    let depth = cascade.len() - 1;
    let mut points = Vec::with_capacity(h);
    for _ in 0..h {
        ss.advance_state(&mut state);
        let mut v = state[0] + mu;
        // Re-integrate from the deepest difference back to the data scale.
        for lvl in (0..depth).rev() {
            let lag = lags[lvl];
            let base = &cascade[lvl];
            v += base[base.len() - lag];
            cascade[lvl].push(v);
        }
        if depth == 0 {
            cascade[0].push(v);
        }
        points.push(*cascade[0].last().unwrap());
    }
    // Remove the appended forecasts from the borrowed history copy: not
    // needed, cascade is local.

    let ar_full = integrated_ar(&ar_star, order.d, order.cap_d, order.s);
    let psi = psi_weights(&ar_full, &ma_star, h);
    let sigma = fit.sigma2.sqrt();
    let mut cum = 0.0;
    let se: Vec<f64> = psi
        .iter()
        .map(|p| {
            cum += p * p;
            sigma * cum.sqrt()
        })
        .collect();

    let mut lower = Vec::with_capacity(levels.len());
    let mut upper = Vec::with_capacity(levels.len());
    for gamma in &levels {
        let z = normal_quantile((1.0 + gamma) / 2.0)?;
        lower.push(points.iter().zip(&se).map(|(p, s)| p - z * s).collect());
        upper.push(points.iter().zip(&se).map(|(p, s)| p + z * s).collect());
    }

    Ok(Forecast {
        start: history.timestamp(history.len()),
        step: history.step(),
        horizon: h,
        points,
        levels,
        lower,
        upper,
        se,
        approximate_intervals: false,
    })
}
