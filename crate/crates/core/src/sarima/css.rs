//! Conditional-sum-of-squares likelihood, used only to screen order
//! candidates quickly. The innovation recursion starts after an AR
//! burn-in with unobserved innovations set to zero, so one evaluation
//! is O(n * (p* + q*)) with no state-space machinery. The final model
//! is always refit with the exact Kalman likelihood.

/// Concentrated CSS log-likelihood and innovation variance. `data`
/// must already be differenced and mean-adjusted. Returns `None` when
/// the burn-in leaves too few observations or the recursion degenerates.
pub(crate) fn css_loglik(data: &[f64], ar: &[f64], ma: &[f64]) -> Option<(f64, f64)> {
    let n = data.len();
    let start = ar.len();
    if n <= start + 10 {
        return None;
    }
    let m = (n - start) as f64;
    let mut e = vec![0.0; n];
    let mut sum2 = 0.0;
    for t in start..n {
        let mut v = data[t];
        for (i, a) in ar.iter().enumerate() {
            v -= a * data[t - 1 - i];
        }
        for (j, th) in ma.iter().enumerate() {
            if t >= start + 1 + j {
                v -= th * e[t - 1 - j];
            }
        }
        e[t] = v;
        sum2 += v * v;
    }
    let sigma2 = sum2 / m;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return None;
    }
    let ll = -0.5 * m * ((2.0 * std::f64::consts::PI).ln() + sigma2.ln() + 1.0);
    ll.is_finite().then_some((ll, sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn white_noise_css_is_plain_gaussian() {
        let data = [0.5, -0.3, 1.2, 0.1, -0.8, 0.4, 0.7, -0.2, 0.9, -0.1, 0.3];
        let (ll, sigma2) = css_loglik(&data, &[], &[]).unwrap();
        let n = data.len() as f64;
        let s2 = data.iter().map(|v| v * v).sum::<f64>() / n;
        assert_abs_diff_eq!(sigma2, s2, epsilon = 1e-12);
        let expect = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + s2.ln() + 1.0);
        assert_abs_diff_eq!(ll, expect, epsilon = 1e-10);
    }

    #[test]
    fn ar1_css_matches_conditional_regression() {
        let data = [1.0, 0.8, 0.9, 0.2, -0.4, 0.1, 0.5, 0.3, -0.2, 0.0, 0.6, 0.4];
        let phi = 0.55;
        let (_, sigma2) = css_loglik(&data, &[phi], &[]).unwrap();
        let mut sum2 = 0.0;
        for t in 1..data.len() {
            let e = data[t] - phi * data[t - 1];
            sum2 += e * e;
        }
        assert_abs_diff_eq!(sigma2, sum2 / (data.len() - 1) as f64, epsilon = 1e-12);
    }

    #[test]
    fn too_short_returns_none() {
        assert!(css_loglik(&[1.0; 8], &[0.3], &[]).is_none());
    }
}
