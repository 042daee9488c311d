//! Coefficient parametrization and polynomial algebra.
//!
//! Optimizer parameters live in an unconstrained space: `tanh` maps each
//! raw value to a partial autocorrelation in (-1, 1), and the
//! Durbin-Levinson recursion turns the partial sequence into AR-style
//! coefficients whose polynomial has all roots strictly outside the unit
//! circle. Applying the same map to each of the four polynomials keeps
//! every optimizer iterate stationary and invertible by construction.
//!
//! Coefficient convention: a vector `c` stands for the polynomial
//! `1 - c[0] B - c[1] B^2 - ...` on the AR side and `1 + c[0] B + ...`
//! on the MA side (Box-Jenkins signs).

/// Partial autocorrelations -> AR coefficients (Durbin-Levinson).
pub(crate) fn pacf_to_coeffs(pacf: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &pk) in pacf.iter().enumerate() {
        let prev = a.clone();
        a.push(0.0);
        for i in 0..k {
            a[i] = prev[i] - pk * prev[k - 1 - i];
        }
        a[k] = pk;
    }
    a
}

/// AR coefficients -> partial autocorrelations; `None` when the
/// polynomial is not strictly stationary (some |pacf| >= 1).
pub(crate) fn coeffs_to_pacf(coeffs: &[f64]) -> Option<Vec<f64>> {
    let p = coeffs.len();
    let mut work = coeffs.to_vec();
    let mut pacf = vec![0.0; p];
    for k in (1..=p).rev() {
        let pk = work[k - 1];
        if !(pk.abs() < 1.0) {
            return None;
        }
        pacf[k - 1] = pk;
        let denom = 1.0 - pk * pk;
        let prev = work.clone();
        for i in 0..k - 1 {
            work[i] = (prev[i] + pk * prev[k - 2 - i]) / denom;
        }
        work.truncate(k - 1);
    }
    Some(pacf)
}

/// Unconstrained optimizer values -> stationary coefficients. The
/// partials are kept strictly inside (-1, 1): tanh saturates to 1.0 in
/// floating point, which would put a root exactly on the unit circle.
pub(crate) fn raw_to_coeffs(raw: &[f64]) -> Vec<f64> {
    const PACF_CAP: f64 = 1.0 - 1e-8;
    let pacf: Vec<f64> = raw
        .iter()
        .map(|x| x.tanh().clamp(-PACF_CAP, PACF_CAP))
        .collect();
    pacf_to_coeffs(&pacf)
}

/// Stationary coefficients -> unconstrained optimizer values.
pub(crate) fn coeffs_to_raw(coeffs: &[f64]) -> Option<Vec<f64>> {
    let pacf = coeffs_to_pacf(coeffs)?;
    Some(pacf.iter().map(|p| p.atanh()).collect())
}

/// True when the polynomial `1 - sum c_i B^i` has all roots outside the
/// unit circle.
pub(crate) fn is_stationary(coeffs: &[f64]) -> bool {
    coeffs.is_empty() || coeffs_to_pacf(coeffs).is_some()
}

/// Polynomial `1 - sum c_i B^i` as a dense coefficient vector on B.
fn poly_from_ar(coeffs: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(coeffs.len() + 1);
    p.push(1.0);
    p.extend(coeffs.iter().map(|c| -c));
    p
}

/// Polynomial `1 + sum c_i B^i` as a dense coefficient vector on B.
fn poly_from_ma(coeffs: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(coeffs.len() + 1);
    p.push(1.0);
    p.extend_from_slice(coeffs);
    p
}

/// Spreads a polynomial in B onto B^s.
fn poly_at_seasonal_lag(poly: &[f64], s: usize) -> Vec<f64> {
    let mut out = vec![0.0; (poly.len() - 1) * s + 1];
    for (i, c) in poly.iter().enumerate() {
        out[i * s] = *c;
    }
    out
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Multiplies the non-seasonal and seasonal AR polynomials into a
/// single expanded coefficient vector (AR sign convention).
pub(crate) fn expand_ar(ar: &[f64], seasonal_ar: &[f64], s: usize) -> Vec<f64> {
    let prod = poly_mul(
        &poly_from_ar(ar),
        &poly_at_seasonal_lag(&poly_from_ar(seasonal_ar), s.max(1)),
    );
    prod[1..].iter().map(|c| -c).collect()
}

/// Multiplies the non-seasonal and seasonal MA polynomials into a
/// single expanded coefficient vector (MA sign convention).
pub(crate) fn expand_ma(ma: &[f64], seasonal_ma: &[f64], s: usize) -> Vec<f64> {
    let prod = poly_mul(
        &poly_from_ma(ma),
        &poly_at_seasonal_lag(&poly_from_ma(seasonal_ma), s.max(1)),
    );
    prod[1..].to_vec()
}

/// Full autoregressive polynomial of the integrated model:
/// `phi*(B) (1-B)^d (1-B^s)^D`, returned in the AR sign convention.
pub(crate) fn integrated_ar(expanded_ar: &[f64], d: usize, cap_d: usize, s: usize) -> Vec<f64> {
    let mut poly = poly_from_ar(expanded_ar);
    for _ in 0..d {
        poly = poly_mul(&poly, &[1.0, -1.0]);
    }
    if cap_d > 0 {
        let mut seasonal_diff = vec![0.0; s + 1];
        seasonal_diff[0] = 1.0;
        seasonal_diff[s] = -1.0;
        for _ in 0..cap_d {
            poly = poly_mul(&poly, &seasonal_diff);
        }
    }
    poly[1..].iter().map(|c| -c).collect()
}

/// psi-weights of the (possibly integrated) ARMA model: coefficients of
/// the infinite MA representation, `count` of them starting at psi_0 = 1.
pub(crate) fn psi_weights(ar: &[f64], ma: &[f64], count: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(count);
    psi.push(1.0);
    for j in 1..count {
        let mut v = if j <= ma.len() { ma[j - 1] } else { 0.0 };
        for (i, a) in ar.iter().enumerate() {
            if j > i {
                v += a * psi[j - 1 - i];
            }
        }
        psi.push(v);
    }
    psi
}
