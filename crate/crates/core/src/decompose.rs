//! Classical additive decomposition and periodic mean profiles.
//!
//! Trend comes from a centered moving average (a 2x`period` average
//! when the period is even), the seasonal component from re-centered
//! per-phase means of the detrended values, and the remainder closes
//! the identity `observed = trend + seasonal + remainder` exactly at
//! every interior point. Margins where the centered average is
//! undefined are reported as absent, never extrapolated.

use crate::error::{Error, Result};
use crate::series::Series;

/// Additive decomposition of a series.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub observed: Vec<f64>,
    /// Centered-moving-average trend; `None` in the half-window margins.
    pub trend: Vec<Option<f64>>,
    /// Zero-mean seasonal pattern, repeated over the whole series.
    pub seasonal: Vec<f64>,
    /// `observed - trend - seasonal`; `None` where trend is absent.
    pub remainder: Vec<Option<f64>>,
    pub period: usize,
}

impl Decomposition {
    /// Seasonal strength `max(0, 1 - Var(remainder) / Var(seasonal + remainder))`
    /// over the interior points; used to decide seasonal differencing.
    pub fn seasonal_strength(&self) -> f64 {
        let mut rem = Vec::new();
        let mut seas_rem = Vec::new();
        for (i, r) in self.remainder.iter().enumerate() {
            if let Some(r) = r {
                rem.push(*r);
                seas_rem.push(*r + self.seasonal[i]);
            }
        }
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        let denom = var(&seas_rem);
        if denom <= 0.0 {
            return 0.0;
        }
        (1.0 - var(&rem) / denom).max(0.0)
    }
}

/// Classical additive decomposition with period `>= 2`.
pub fn classical_decompose(series: &Series, period: usize) -> Result<Decomposition> {
    if period < 2 {
        return Err(Error::InvalidArgument(
            "decomposition period must be >= 2".into(),
        ));
    }
    let n = series.len();
    if n < 2 * period {
        return Err(Error::SeriesTooShort {
            needed: 2 * period,
            actual: n,
        });
    }
    let y = series.values();
    let trend = centered_moving_average(y, period);

    // Per-phase means of observed - trend, re-centered to zero mean.
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (i, t) in trend.iter().enumerate() {
        if let Some(t) = t {
            sums[i % period] += y[i] - t;
            counts[i % period] += 1;
        }
    }
    let mut phase_means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let grand = phase_means.iter().sum::<f64>() / period as f64;
    for m in &mut phase_means {
        *m -= grand;
    }

    let seasonal: Vec<f64> = (0..n).map(|i| phase_means[i % period]).collect();
    let remainder: Vec<Option<f64>> = (0..n)
        .map(|i| trend[i].map(|t| y[i] - t - seasonal[i]))
        .collect();

    Ok(Decomposition {
        observed: y.to_vec(),
        trend,
        seasonal,
        remainder,
        period,
    })
}

fn centered_moving_average(y: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = y.len();
    let mut trend = vec![None; n];
    if period % 2 == 0 {
        // 2 x period MA: half weights on the two outermost points.
        let half = period / 2;
        for i in half..n.saturating_sub(half) {
            let mut sum = 0.5 * y[i - half] + 0.5 * y[i + half];
            for j in (i - half + 1)..(i + half) {
                sum += y[j];
            }
            trend[i] = Some(sum / period as f64);
        }
    } else {
        let half = (period - 1) / 2;
        for i in half..n.saturating_sub(half) {
            let sum: f64 = y[(i - half)..=(i + half)].iter().sum();
            trend[i] = Some(sum / period as f64);
        }
    }
    trend
}

/// Per-phase means: element `j` averages all observations at indices
/// congruent to `j` modulo `period`.
pub fn mean_profile(series: &Series, period: usize) -> Result<Vec<f64>> {
    if period < 2 {
        return Err(Error::InvalidArgument("profile period must be >= 2".into()));
    }
    let n = series.len();
    if period > n {
        return Err(Error::SeriesTooShort {
            needed: period,
            actual: n,
        });
    }
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (i, v) in series.values().iter().enumerate() {
        sums[i % period] += v;
        counts[i % period] += 1;
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect())
}
