//! Holt-Winters triple exponential smoothing (additive and
//! multiplicative seasonality).
//!
//! Initialization uses the first two periods: the level and trend come
//! from the period means, and the initial seasonal states are the
//! first-period deviations (or ratios) from the implied trend line, so
//! a noiseless trend-plus-seasonal input reproduces itself exactly.
//! When no smoothing weights are given they are chosen by minimizing
//! the one-step squared-error sum over (0,1)^3 through a logit
//! transform. Forecast intervals use the crude `sigma_e * sqrt(h)`
//! scaling and are flagged approximate.

use crate::error::{Error, Result};
use crate::numerics::{minimize, normal_quantile, MinimizeConfig};
use crate::sarima::Forecast;
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwVariant {
    Additive,
    Multiplicative,
}

/// A fitted Holt-Winters model.
#[derive(Debug, Clone)]
pub struct HwModel {
    pub period: usize,
    pub variant: HwVariant,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Final level state.
    pub level: f64,
    /// Final trend state.
    pub trend: f64,
    /// Final seasonal state per absolute phase: entry `j` is the most
    /// recent state for time indices congruent to `j` mod `period`.
    pub seasonal: Vec<f64>,
    pub sse: f64,
    /// One-step in-sample errors (defined from the second period on).
    pub residuals: Series,
    pub n: usize,
    history_end: chrono::NaiveDateTime,
    step: chrono::Duration,
}

struct RecursionOutput {
    level: f64,
    trend: f64,
    seasonal: Vec<f64>,
    sse: f64,
    residuals: Vec<f64>,
}

fn initial_states(
    y: &[f64],
    m: usize,
    variant: HwVariant,
) -> Result<(f64, f64, Vec<f64>)> {
    let mean1: f64 = y[..m].iter().sum::<f64>() / m as f64;
    let mean2: f64 = y[m..2 * m].iter().sum::<f64>() / m as f64;
    let trend = (mean2 - mean1) / m as f64;
    // Level is the trend line evaluated at the end of the first period.
    let level = mean1 + trend * (m as f64 - 1.0) / 2.0;
    let mut seasonal = Vec::with_capacity(m);
    for (i, &v) in y[..m].iter().enumerate() {
        let line = mean1 + (i as f64 - (m as f64 - 1.0) / 2.0) * trend;
        match variant {
            HwVariant::Additive => seasonal.push(v - line),
            HwVariant::Multiplicative => {
                if line <= 0.0 {
                    return Err(Error::DegenerateInput(
                        "multiplicative initialization needs a positive trend line".into(),
                    ));
                }
                seasonal.push(v / line);
            }
        }
    }
    match variant {
        HwVariant::Additive => {
            let avg = seasonal.iter().sum::<f64>() / m as f64;
            for s in &mut seasonal {
                *s -= avg;
            }
        }
        HwVariant::Multiplicative => {
            let avg = seasonal.iter().sum::<f64>() / m as f64;
            if avg <= 0.0 {
                return Err(Error::DegenerateInput(
                    "multiplicative seasonal normalization failed".into(),
                ));
            }
            for s in &mut seasonal {
                *s /= avg;
            }
        }
    }
    Ok((level, trend, seasonal))
}

fn run_recursions(
    y: &[f64],
    m: usize,
    variant: HwVariant,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<RecursionOutput> {
    let (mut level, mut trend, mut seasonal) = initial_states(y, m, variant)?;
    let mut sse = 0.0;
    let mut residuals = Vec::with_capacity(y.len() - m);
    for (t, &obs) in y.iter().enumerate().skip(m) {
        let phase = t % m;
        let s_old = seasonal[phase];
        let base = level + trend;
        let (fitted, new_level, new_season) = match variant {
            HwVariant::Additive => {
                let fitted = base + s_old;
                let new_level = alpha * (obs - s_old) + (1.0 - alpha) * base;
                let new_season = gamma * (obs - base) + (1.0 - gamma) * s_old;
                (fitted, new_level, new_season)
            }
            HwVariant::Multiplicative => {
                if s_old.abs() < 1e-12 || base.abs() < 1e-12 {
                    return Err(Error::DegenerateInput(
                        "multiplicative recursion hit a zero state".into(),
                    ));
                }
                let fitted = base * s_old;
                let new_level = alpha * (obs / s_old) + (1.0 - alpha) * base;
                let new_season = gamma * (obs / base) + (1.0 - gamma) * s_old;
                (fitted, new_level, new_season)
            }
        };
        let e = obs - fitted;
        sse += e * e;
        residuals.push(e);
        let new_trend = beta * (new_level - level) + (1.0 - beta) * trend;
        level = new_level;
        trend = new_trend;
        seasonal[phase] = new_season;
        if !level.is_finite() || !trend.is_finite() || !new_season.is_finite() {
            return Err(Error::DegenerateInput(
                "holt-winters recursion diverged".into(),
            ));
        }
    }
    Ok(RecursionOutput {
        level,
        trend,
        seasonal,
        sse,
        residuals,
    })
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Fits a Holt-Winters model. With `params` the weights are fixed;
/// otherwise (alpha, beta, gamma) minimize the one-step SSE.
pub fn hw_fit(
    series: &Series,
    period: usize,
    variant: HwVariant,
    params: Option<(f64, f64, f64)>,
) -> Result<HwModel> {
    if period < 2 {
        return Err(Error::InvalidArgument("period must be >= 2".into()));
    }
    if series.len() < 2 * period {
        return Err(Error::SeriesTooShort {
            needed: 2 * period,
            actual: series.len(),
        });
    }
    let y = series.values();
    if variant == HwVariant::Multiplicative && y.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidValue(
            "multiplicative holt-winters requires strictly positive values".into(),
        ));
    }

    let (alpha, beta, gamma) = match params {
        Some((a, b, g)) => {
            for (name, v) in [("alpha", a), ("beta", b), ("gamma", g)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "{name} = {v} outside [0, 1]"
                    )));
                }
            }
            (a, b, g)
        }
        None => {
            let start = [logit(0.2), logit(0.1), logit(0.1)];
            let objective = |raw: &[f64]| -> f64 {
                let (a, b, g) = (sigmoid(raw[0]), sigmoid(raw[1]), sigmoid(raw[2]));
                match run_recursions(y, period, variant, a, b, g) {
                    Ok(out) => out.sse,
                    Err(_) => f64::INFINITY,
                }
            };
            let res = minimize(objective, &start, &MinimizeConfig::default())
                .map_err(|e| Error::OptimizerFailed(format!("holt-winters: {e}")))?;
            (
                sigmoid(res.argmin[0]),
                sigmoid(res.argmin[1]),
                sigmoid(res.argmin[2]),
            )
        }
    };

    let out = run_recursions(y, period, variant, alpha, beta, gamma)?;
    let residuals = Series::new(
        series.timestamp(period),
        series.step(),
        out.residuals,
        "hw_residuals",
    )?;
    Ok(HwModel {
        period,
        variant,
        alpha,
        beta,
        gamma,
        level: out.level,
        trend: out.trend,
        seasonal: out.seasonal,
        sse: out.sse,
        residuals,
        n: series.len(),
        history_end: series.end(),
        step: series.step(),
    })
}

/// Forecasts `h` steps ahead. Additive: `level + h*trend +
/// seasonal[(n+h-1) mod period]`; multiplicative replaces the addition
/// of the seasonal state with a product. Intervals are the flagged
/// approximation `point +- z * sigma_e * sqrt(h)`.
pub fn hw_forecast(model: &HwModel, h: usize, levels: &[f64]) -> Result<Forecast> {
    if h < 1 {
        return Err(Error::InvalidArgument("forecast horizon must be >= 1".into()));
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

    let m = model.period;
    let points: Vec<f64> = (1..=h)
        .map(|step| {
            let base = model.level + step as f64 * model.trend;
            let s = model.seasonal[(model.n + step - 1) % m];
            match model.variant {
                HwVariant::Additive => base + s,
                HwVariant::Multiplicative => base * s,
            }
        })
        .collect();

    let n_resid = model.residuals.len() as f64;
    let sigma_e = (model.sse / n_resid).sqrt();
    let se: Vec<f64> = (1..=h).map(|step| sigma_e * (step as f64).sqrt()).collect();

    let mut lower = Vec::with_capacity(levels.len());
    let mut upper = Vec::with_capacity(levels.len());
    for gamma in &levels {
        let z = normal_quantile((1.0 + gamma) / 2.0)?;
        lower.push(points.iter().zip(&se).map(|(p, s)| p - z * s).collect());
        upper.push(points.iter().zip(&se).map(|(p, s)| p + z * s).collect());
    }

    Ok(Forecast {
        start: model.history_end + model.step,
        step: model.step,
        horizon: h,
        points,
        levels,
        lower,
        upper,
        se,
        approximate_intervals: true,
    })
}
