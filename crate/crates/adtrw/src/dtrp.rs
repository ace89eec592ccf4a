//! State probabilities and state polynomials of the generator process.
//!
//! Φ⁽ⁿ⁾(t) = P(N(t) = n) is the probability of exactly n successes in t
//! trials. The whole table follows from the survival sequence by iterated
//! discrete convolution,
//!
//! ```text
//! Φ⁽⁰⁾ = S,       Φ⁽ⁿ⁾ = Φ⁽ⁿ⁻¹⁾ ⋆ ψ,
//! ```
//!
//! which is the production path everywhere in this crate: positive terms
//! only, numerically stable, horizon-bounded. Generating-function routes
//! exist solely as cross-checks.
//!
//! The state polynomial Λ(a,b,t) = E[a^N(t) b^(t-N(t))] carries the complete
//! law of the simple walk and satisfies the renewal recursion
//!
//! ```text
//! Λ(a,b,t) = b^t Φ⁽⁰⁾(t) + Σ_{r=1..t} a b^(r-1) ψ(r) Λ(a,b,t-r),
//! ```
//!
//! with Λ(a,b,0) = 1. Complex a, b with |a|,|b| <= 1 are supported because
//! the sojourn-time quadrature evaluates Λ on the unit circle.

use crate::density::{survival, WaitingTimeDensity};
use crate::error::{AdtrwError, Result};
use num_complex::Complex64;

/// Triangular table of state probabilities Φ⁽ⁿ⁾(t), 0 <= n <= t <= t_max.
#[derive(Debug, Clone)]
pub struct StateTable {
    t_max: usize,
    /// `rows[t]` has t+1 entries, `rows[t][n]` = Φ⁽ⁿ⁾(t).
    rows: Vec<Vec<f64>>,
}

impl StateTable {
    #[inline]
    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Φ⁽ⁿ⁾(t); zero for n > t.
    #[inline]
    pub fn prob(&self, n: usize, t: usize) -> f64 {
        if n > t {
            0.0
        } else {
            self.rows[t][n]
        }
    }

    /// The distribution of N(t) at fixed t: entries n = 0..=t.
    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.rows[t]
    }
}

/// Discrete convolution of `a` (supported on 0..a.len()) with ψ, evaluated
/// on 0..=t_max. Output index t accumulates Σ_r ψ(r) a(t-r).
fn convolve_psi(a: &[f64], psi: &[f64], t_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; t_max + 1];
    // axpy ordering: contiguous writes over out, contiguous reads over psi.
    for (s, &av) in a.iter().enumerate().take(t_max) {
        if av == 0.0 {
            continue;
        }
        let r_hi = (t_max - s).min(psi.len());
        for r in 1..=r_hi {
            out[s + r] += av * psi[r - 1];
        }
    }
    out
}

/// First `n_max + 1` state-probability rows over t = 0..=t_max:
/// `result[n][t]` = Φ⁽ⁿ⁾(t). O(n_max · t_max²) but O(n_max · t_max) memory.
pub fn state_rows(d: &WaitingTimeDensity, n_max: usize, t_max: usize) -> Result<Vec<Vec<f64>>> {
    d.require_horizon(t_max)?;
    let surv = survival(d);
    let mut rows = Vec::with_capacity(n_max + 1);
    rows.push(surv.values()[..=t_max].to_vec());
    for n in 1..=n_max {
        let next = convolve_psi(&rows[n - 1], d.probs(), t_max);
        rows.push(next);
    }
    Ok(rows)
}

/// Full triangular state table up to t_max. O(t_max³) work; use
/// [`state_rows`] when only small n are needed.
pub fn state_table(d: &WaitingTimeDensity, t_max: usize) -> Result<StateTable> {
    d.require_horizon(t_max)?;
    let surv = survival(d);
    let psi = d.probs();
    let mut prev = surv.values()[..=t_max].to_vec();
    let mut rows: Vec<Vec<f64>> = (0..=t_max).map(|t| vec![0.0; t + 1]).collect();
    for (t, row) in rows.iter_mut().enumerate() {
        row[0] = prev[t];
    }
    for n in 1..=t_max {
        let cur = convolve_psi(&prev, psi, t_max);
        for (row, &v) in rows[n..].iter_mut().zip(&cur[n..]) {
            row[n] = v;
        }
        prev = cur;
    }
    Ok(StateTable { t_max, rows })
}

/// Single state-probability row over n at fixed t: `result[n]` = Φ⁽ⁿ⁾(t).
/// Two-buffer version of [`state_table`]; O(t³) time, O(t) memory.
pub fn state_row_at(d: &WaitingTimeDensity, t: usize) -> Result<Vec<f64>> {
    d.require_horizon(t)?;
    let surv = survival(d);
    let psi = d.probs();
    let mut prev = surv.values()[..=t].to_vec();
    let mut out = Vec::with_capacity(t + 1);
    out.push(prev[t]);
    for _ in 1..=t {
        let cur = convolve_psi(&prev, psi, t);
        out.push(cur[t]);
        prev = cur;
    }
    Ok(out)
}

/// E[N(t)] = Σ_n n Φ⁽ⁿ⁾(t) for each t of the table.
pub fn expected_arrivals(table: &StateTable) -> Vec<f64> {
    (0..=table.t_max())
        .map(|t| {
            table
                .row(t)
                .iter()
                .enumerate()
                .map(|(n, &p)| n as f64 * p)
                .sum()
        })
        .collect()
}

/// `E[N(t)]` for t = 0..=t_max via the renewal-density recursion
/// h = ψ + ψ ⋆ h, E N(t) = Σ_{s<=t} h(s). O(t_max²), no table needed.
pub fn mean_arrivals(d: &WaitingTimeDensity, t_max: usize) -> Result<Vec<f64>> {
    d.require_horizon(t_max)?;
    let psi = d.probs();
    // renewal-density recurrence: h depends on its own earlier values
    #[allow(clippy::needless_range_loop)]
    let h = {
        let mut h = vec![0.0; t_max + 1];
        for t in 1..=t_max {
            let mut acc = psi[t - 1];
            let r_hi = (t - 1).min(psi.len());
            for r in 1..=r_hi {
                acc += psi[r - 1] * h[t - r];
            }
            h[t] = acc;
        }
        h
    };
    let mut out = Vec::with_capacity(t_max + 1);
    let mut cum = 0.0;
    out.push(0.0);
    for &hv in &h[1..] {
        cum += hv;
        out.push(cum);
    }
    Ok(out)
}

/// Expected position of the simple walk, `E[Y_t] = 2 E[N(t)] - t`.
pub fn expected_positions(d: &WaitingTimeDensity, t_max: usize) -> Result<Vec<f64>> {
    Ok(mean_arrivals(d, t_max)?
        .into_iter()
        .enumerate()
        .map(|(t, en)| 2.0 * en - t as f64)
        .collect())
}

fn check_modulus(z: Complex64) -> Result<()> {
    let m = z.norm();
    if m > 1.0 + 1e-12 {
        Err(AdtrwError::ArgumentModulus { modulus: m })
    } else {
        Ok(())
    }
}

/// Λ(a,b,t) for t = 0..=t_max by the renewal recursion. Rejects arguments
/// outside the closed unit disc (the normalization contract is void there).
pub fn lambda_poly(
    d: &WaitingTimeDensity,
    a: Complex64,
    b: Complex64,
    t_max: usize,
) -> Result<Vec<Complex64>> {
    check_modulus(a)?;
    check_modulus(b)?;
    d.require_horizon(t_max)?;
    let surv = survival(d);
    let psi = d.probs();
    let mut lam = Vec::with_capacity(t_max + 1);
    lam.push(Complex64::new(1.0, 0.0));
    // b_pows[r] = b^r, grown incrementally so b = 0 yields exact 0^r.
    let mut b_pows = Vec::with_capacity(t_max + 1);
    b_pows.push(Complex64::new(1.0, 0.0));
    for t in 1..=t_max {
        b_pows.push(b_pows[t - 1] * b);
        let mut acc = b_pows[t] * surv.at(t);
        let r_hi = t.min(psi.len());
        for r in 1..=r_hi {
            acc += a * b_pows[r - 1] * psi[r - 1] * lam[t - r];
        }
        lam.push(acc);
    }
    Ok(lam)
}

/// State polynomial P(v,t) = Λ(v, 1, t) = E[v^N(t)] for t = 0..=t_max.
pub fn state_polynomial(
    d: &WaitingTimeDensity,
    v: Complex64,
    t_max: usize,
) -> Result<Vec<Complex64>> {
    lambda_poly(d, v, Complex64::new(1.0, 0.0), t_max)
}
