//! Truncated power-series arithmetic on f64 coefficient vectors.

/// Quotient coefficients of num(z)/den(z) through order `order` by the exact
/// recursive extraction q_k = (num_k - Σ_{j=1..k} den_j q_{k-j}) / den_0.
/// Requires `den[0] != 0`. O(order²), no FFT; horizons here are small enough
/// that exactness wins.
pub fn series_divide(num: &[f64], den: &[f64], order: usize) -> Vec<f64> {
    assert!(den[0] != 0.0, "series division needs a unit at order zero");
    let mut q = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = num.get(k).copied().unwrap_or(0.0);
        let j_hi = k.min(den.len() - 1);
        for j in 1..=j_hi {
            acc -= den[j] * q[k - j];
        }
        q.push(acc / den[0]);
    }
    q
}

/// Evaluate Σ c_k z^k by Horner.
pub fn horner(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}
