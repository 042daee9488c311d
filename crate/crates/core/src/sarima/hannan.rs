//! Hannan-Rissanen start values for the likelihood optimizer.
//!
//! Stage one fits a long autoregression (Durbin-Levinson on the sample
//! ACF) to estimate the innovation sequence; stage two regresses the
//! observation on its own lags and the estimated innovation lags at the
//! four polynomial positions. Cross products between seasonal and
//! non-seasonal terms are ignored -- this only needs to be good enough
//! to start Nelder-Mead inside the stationary region.

use crate::diagnostics::acf_values;
use crate::numerics::least_squares;

use super::params::coeffs_to_raw;
use super::SarimaOrder;

pub(crate) struct StartValues {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
}

/// Estimates start values on the differenced (and mean-adjusted) scale.
/// Falls back to zero coefficients whenever a regression step fails.
pub(crate) fn start_values(w: &[f64], order: &SarimaOrder) -> StartValues {
    let zeros = StartValues {
        ar: vec![0.0; order.p],
        ma: vec![0.0; order.q],
        seasonal_ar: vec![0.0; order.cap_p],
        seasonal_ma: vec![0.0; order.cap_q],
    };
    if order.p + order.q + order.cap_p + order.cap_q == 0 {
        return zeros;
    }
    // Center first: the mean is a separate optimizer parameter, and the
    // lag regressions need zero-mean inputs to stay unbiased.
    let mu = w.iter().sum::<f64>() / w.len() as f64;
    let centered: Vec<f64> = w.iter().map(|v| v - mu).collect();
    match regression_estimates(&centered, order) {
        Some(sv) => sv,
        None => zeros,
    }
}

fn regression_estimates(w: &[f64], order: &SarimaOrder) -> Option<StartValues> {
    let n = w.len();
    let s = order.s.max(1);
    let max_ar_lag = order.p.max(order.cap_p * s);
    let max_ma_lag = order.q.max(order.cap_q * s);

    // Innovations from a long AR when MA terms are present.
    let (eps, eps_offset) = if max_ma_lag > 0 {
        let long = long_ar_order(n, max_ar_lag.max(max_ma_lag));
        let r = acf_values(w, long).ok()?;
        let coeffs = pacf_to_durbin_coeffs(&r)?;
        let mut eps = Vec::with_capacity(n - long);
        for t in long..n {
            let pred: f64 = coeffs.iter().enumerate().map(|(i, c)| c * w[t - 1 - i]).sum();
            eps.push(w[t] - pred);
        }
        (eps, long)
    } else {
        (Vec::new(), 0)
    };

    // Row t is usable when every data lag and innovation lag exists.
    let t0 = max_ar_lag.max(if max_ma_lag > 0 { eps_offset + max_ma_lag } else { 0 });
    let n_cols = order.p + order.cap_p + order.q + order.cap_q;
    if t0 >= n || n - t0 <= n_cols + 2 {
        return None;
    }

    let mut design = Vec::with_capacity(n - t0);
    let mut target = Vec::with_capacity(n - t0);
    for t in t0..n {
        let mut row = Vec::with_capacity(n_cols);
        for i in 1..=order.p {
            row.push(w[t - i]);
        }
        for i in 1..=order.cap_p {
            row.push(w[t - i * s]);
        }
        for j in 1..=order.q {
            row.push(eps[t - j - eps_offset]);
        }
        for j in 1..=order.cap_q {
            row.push(eps[t - j * s - eps_offset]);
        }
        design.push(row);
        target.push(w[t]);
    }
    let (beta, _, _) = least_squares(&design, &target).ok()?;

    let mut idx = 0;
    let mut take = |count: usize| -> Vec<f64> {
        let v = beta[idx..idx + count].to_vec();
        idx += count;
        v
    };
    Some(StartValues {
        ar: take(order.p),
        ma: take(order.q),
        seasonal_ar: take(order.cap_p),
        seasonal_ma: take(order.cap_q),
    })
}

fn long_ar_order(n: usize, max_lag: usize) -> usize {
    let cap = (n / 4).max(1);
    (2 * max_lag).clamp(10, 200).min(cap)
}

/// Full AR coefficient vector at the long order via Durbin-Levinson.
fn pacf_to_durbin_coeffs(r: &[f64]) -> Option<Vec<f64>> {
    let mut coeffs: Vec<f64> = Vec::new();
    for k in 1..=r.len() {
        let kk = if k == 1 {
            r[0]
        } else {
            let num = r[k - 1] - (1..k).map(|j| coeffs[j - 1] * r[k - 1 - j]).sum::<f64>();
            let den = 1.0 - (1..k).map(|j| coeffs[j - 1] * r[j - 1]).sum::<f64>();
            if den.abs() < 1e-12 {
                return None;
            }
            num / den
        };
        if !kk.is_finite() {
            return None;
        }
        let prev = coeffs.clone();
        coeffs.push(0.0);
        for i in 0..k - 1 {
            coeffs[i] = prev[i] - kk * prev[k - 2 - i];
        }
        coeffs[k - 1] = kk;
    }
    Some(coeffs)
}

/// Maps estimated coefficients into the unconstrained optimizer space,
/// shrinking toward zero until the polynomial is safely stationary.
pub(crate) fn to_raw_with_shrinkage(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.is_empty() {
        return Vec::new();
    }
    let mut work = coeffs.to_vec();
    for _ in 0..60 {
        if let Some(raw) = coeffs_to_raw(&work) {
            // Extreme start values make tanh saturate; keep them mild.
            if raw.iter().all(|v| v.abs() < 5.0) {
                return raw;
            }
        }
        for v in &mut work {
            *v *= 0.9;
        }
    }
    vec![0.0; coeffs.len()]
}

/// Converts start values into the optimizer's raw parameter layout:
/// `[ar | ma | seasonal_ar | seasonal_ma | mean?]`. The MA sign flip
/// matches the parametrization used when decoding.
pub(crate) fn to_raw_start(sv: &StartValues, mean: Option<f64>) -> Vec<f64> {
    let negate = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| -x).collect() };
    let mut raw = to_raw_with_shrinkage(&sv.ar);
    raw.extend(to_raw_with_shrinkage(&negate(&sv.ma)));
    raw.extend(to_raw_with_shrinkage(&sv.seasonal_ar));
    raw.extend(to_raw_with_shrinkage(&negate(&sv.seasonal_ma)));
    if let Some(m) = mean {
        raw.push(m);
    }
    raw
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar1_data(phi: f64, n: usize) -> Vec<f64> {
        let mut state = 99u64;
        let mut v = 0.0;
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let u = ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0;
                v = phi * v + u;
                v
            })
            .collect()
    }

    #[test]
    fn pure_ar_start_near_truth() {
        let data = ar1_data(0.7, 3000);
        let order = SarimaOrder::new(1, 0, 0);
        let sv = start_values(&data, &order);
        assert!((sv.ar[0] - 0.7).abs() < 0.1, "ar start {}", sv.ar[0]);
    }

    #[test]
    fn zero_order_gives_empty() {
        let data = ar1_data(0.3, 100);
        let sv = start_values(&data, &SarimaOrder::new(0, 0, 0));
        assert!(sv.ar.is_empty() && sv.ma.is_empty());
    }

    #[test]
    fn shrinkage_handles_non_stationary_estimates() {
        let raw = to_raw_with_shrinkage(&[1.4]);
        assert_eq!(raw.len(), 1);
        assert!(raw[0].is_finite());
        let tanh = raw[0].tanh();
        assert!(tanh.abs() < 1.0);
    }

    #[test]
    fn raw_start_layout_length() {
        let sv = StartValues {
            ar: vec![0.5],
            ma: vec![0.2],
            seasonal_ar: vec![0.3],
            seasonal_ma: vec![],
        };
        assert_eq!(to_raw_start(&sv, None).len(), 3);
        assert_eq!(to_raw_start(&sv, Some(1.5)).len(), 4);
    }
}
