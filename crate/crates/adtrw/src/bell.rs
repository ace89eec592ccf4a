//! Ordinary Bell polynomials built from convolution powers.
//!
//! The incomplete ordinary Bell polynomial B_{r,n}(x_1, …, x_{r-n+1}) equals
//! the n-fold convolution power of the sequence x evaluated at r: summing
//! multinomial weights over all partitions of r into n parts. Convolution
//! powers are the production path; the partition sum only exists as a test
//! oracle (partition counts explode).
//!
//! For a waiting-time density ψ the table ties back to the state machinery:
//! B_{r,n} = P(n-th success lands exactly at trial r), and the complete
//! polynomial B_t(…; v) = Σ_n v^n B_{t,n} convolved with the survival
//! sequence reproduces the state polynomial P(v,t).

use crate::density::{survival, WaitingTimeDensity};
use crate::error::{AdtrwError, Result};
use num_complex::Complex64;

/// Triangular table of incomplete ordinary Bell polynomial values
/// B_{r,n} for 0 <= n <= r <= r_max.
#[derive(Debug, Clone)]
pub struct BellTable {
    r_max: usize,
    /// rows[r][n]; rows[r] has r+1 entries.
    rows: Vec<Vec<f64>>,
}

impl BellTable {
    #[inline]
    pub fn r_max(&self) -> usize {
        self.r_max
    }

    /// B_{r,n}; zero for n > r.
    #[inline]
    pub fn value(&self, r: usize, n: usize) -> f64 {
        if n > r {
            0.0
        } else {
            self.rows[r][n]
        }
    }
}

/// Incomplete ordinary Bell table for an arbitrary coefficient sequence
/// (`seq[k]` is x_{k+1}). B_{·,n} = B_{·,n-1} ⋆ x, seeded with
/// B_{r,0} = δ_{r,0}.
pub fn incomplete_bell_from_seq(seq: &[f64], r_max: usize) -> BellTable {
    let mut rows: Vec<Vec<f64>> = (0..=r_max).map(|r| vec![0.0; r + 1]).collect();
    rows[0][0] = 1.0;
    for n in 1..=r_max {
        for r in n..=r_max {
            let mut acc = 0.0;
            let j_hi = (r - n + 1).min(seq.len());
            for j in 1..=j_hi {
                acc += seq[j - 1] * rows[r - j][n - 1];
            }
            rows[r][n] = acc;
        }
    }
    BellTable { r_max, rows }
}

/// Bell table of a waiting-time density: B_{r,n} = [ψ⋆]ⁿ(r).
pub fn incomplete_bell(d: &WaitingTimeDensity, r_max: usize) -> Result<BellTable> {
    d.require_horizon(r_max)?;
    Ok(incomplete_bell_from_seq(d.probs(), r_max))
}

/// Complete ordinary Bell polynomial B_t(…; v) = Σ_{n=1..t} vⁿ B_{t,n},
/// with B_0 = 1.
pub fn complete_bell(table: &BellTable, v: Complex64, t: usize) -> Complex64 {
    if t == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // Horner over n keeps this O(t) without power tables.
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (1..=t).rev() {
        acc = (acc + table.value(t, n)) * v;
    }
    acc
}

/// State polynomial via the Bell route:
/// P(v,t) = Σ_{r=0..t} Φ⁽⁰⁾(t-r) B_r(…; v). Cross-checks `dtrp::lambda_poly`.
pub fn state_poly_via_bell(d: &WaitingTimeDensity, v: Complex64, t: usize) -> Result<Complex64> {
    d.require_horizon(t)?;
    let table = incomplete_bell(d, t)?;
    let surv = survival(d);
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..=t {
        acc += complete_bell(&table, v, r) * surv.at(t - r);
    }
    Ok(acc)
}

/// E[N(t)] = Σ_{r=1..t} B_r(…; 1) for t >= 1, and 0 at t = 0.
pub fn mean_arrivals_via_bell(d: &WaitingTimeDensity, t: usize) -> Result<f64> {
    d.require_horizon(t)?;
    if t == 0 {
        return Ok(0.0);
    }
    let table = incomplete_bell(d, t)?;
    let one = Complex64::new(1.0, 0.0);
    Ok((1..=t).map(|r| complete_bell(&table, one, r).re).sum())
}

/// Largest r for which the factorial rescaling below stays inside f64
/// precision; beyond this 52!-scale ratios start shedding digits.
pub const EXP_BELL_R_CAP: usize = 20;

/// Incomplete *exponential* Bell polynomials from the ordinary table:
/// B^exp_{r,n}(x_1, …) = (r!/n!) · B_{r,n}(x_1/1!, x_2/2!, …).
/// Valid for r <= [`EXP_BELL_R_CAP`].
pub fn exponential_bell(x: &[f64], r_max: usize) -> Result<BellTable> {
    if r_max > EXP_BELL_R_CAP {
        return Err(AdtrwError::Parameter(format!(
            "exponential Bell table capped at r_max={EXP_BELL_R_CAP} (factorial precision), got {r_max}"
        )));
    }
    let mut scaled = Vec::with_capacity(x.len());
    let mut fact = 1.0;
    for (k, &v) in x.iter().enumerate() {
        fact *= (k + 1) as f64;
        scaled.push(v / fact);
    }
    let mut table = incomplete_bell_from_seq(&scaled, r_max);
    let mut facts = vec![1.0];
    for r in 1..=r_max {
        facts.push(facts[r - 1] * r as f64);
    }
    for r in 0..=r_max {
        for n in 0..=r {
            table.rows[r][n] *= facts[r] / facts[n];
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensitySpec;
    use crate::dtrp::lambda_poly;

    fn geometric(p: f64, horizon: usize) -> WaitingTimeDensity {
        WaitingTimeDensity::new(&DensitySpec::Geometric { p }, horizon).unwrap()
    }

    fn sibuya(beta: f64, horizon: usize) -> WaitingTimeDensity {
        WaitingTimeDensity::new(&DensitySpec::Sibuya { beta }, horizon).unwrap()
    }

    #[test]
    fn boundary_rows_and_columns() {
        let d = sibuya(0.5, 12);
        let b = incomplete_bell(&d, 12).unwrap();
        assert_eq!(b.value(0, 0), 1.0);
        for r in 1..=12 {
            assert_eq!(b.value(r, 0), 0.0);
            assert!(
                (b.value(r, 1) - d.psi(r)).abs() < 1e-15,
                "B_{{r,1}} = psi_r"
            );
        }
        // n > r is zero by layout
        assert_eq!(b.value(3, 5), 0.0);
    }

    #[test]
    fn geometric_second_column_example() {
        // B_{3,2} = [ψ⋆]²(3) = ψ(1)ψ(2) + ψ(2)ψ(1) = 2 p²q
        let d = geometric(0.5, 4);
        let b = incomplete_bell(&d, 3).unwrap();
        assert!((b.value(3, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn complete_bell_small_cases() {
        let d = geometric(0.5, 4);
        let b = incomplete_bell(&d, 3).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(complete_bell(&b, one, 0), one);
        let v = Complex64::new(0.3, 0.2);
        assert!((complete_bell(&b, v, 1) - v * 0.5).norm() < 1e-15);
        // t=2, v=1: ψ(2) + ψ(1)² = 0.25 + 0.25
        assert!((complete_bell(&b, one, 2).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn state_poly_matches_lambda_route() {
        for d in [geometric(0.5, 32), sibuya(0.5, 32)] {
            for &(re, im) in &[(0.1, 0.0), (0.0, 0.0), (-0.4, 0.3), (0.6, -0.6)] {
                let v = Complex64::new(re, im);
                let lam = lambda_poly(&d, v, Complex64::new(1.0, 0.0), 32).unwrap();
                for t in [0usize, 1, 4, 17, 32] {
                    let via_bell = state_poly_via_bell(&d, v, t).unwrap();
                    assert!((via_bell - lam[t]).norm() < 1e-12, "t={t} v={v}");
                }
            }
        }
    }

    #[test]
    fn state_poly_at_v_zero_is_survival() {
        let d = geometric(0.5, 8);
        let p = state_poly_via_bell(&d, Complex64::new(0.0, 0.0), 2).unwrap();
        assert!((p.re - 0.25).abs() < 1e-15);
        assert!(p.im.abs() < 1e-15);
    }

    #[test]
    fn mean_arrivals_examples() {
        let d = geometric(0.5, 8);
        assert_eq!(mean_arrivals_via_bell(&d, 0).unwrap(), 0.0);
        assert!((mean_arrivals_via_bell(&d, 4).unwrap() - 2.0).abs() < 1e-12);
        let d = sibuya(0.5, 8);
        assert!((mean_arrivals_via_bell(&d, 2).unwrap() - 0.875).abs() < 1e-12);
    }

    #[test]
    fn generating_function_identity() {
        // Σ_t u^t B_{t,n} = (ψ̄(u))ⁿ up to the geometric truncation tail.
        let d = geometric(0.5, 64);
        let b = incomplete_bell(&d, 64).unwrap();
        for &u in &[0.1f64, 0.3, 0.5] {
            let psi_bar: f64 = d
                .probs()
                .iter()
                .enumerate()
                .map(|(k, &p)| p * u.powi(k as i32 + 1))
                .sum();
            for n in 1..=4usize {
                let series: f64 = (n..=64).map(|t| u.powi(t as i32) * b.value(t, n)).sum();
                let tail_bound = u.powi(65) / (1.0 - u);
                assert!(
                    (series - psi_bar.powi(n as i32)).abs() <= tail_bound + 1e-14,
                    "u={u} n={n}"
                );
            }
        }
    }

    #[test]
    fn exponential_bell_known_values() {
        // With x_k = 1 for all k, B^exp_{r,n} is the Stirling-number-like
        // count of set partitions of r elements into n blocks times n!/..;
        // check against directly-known small values: B^exp_{3,2}(1,1) with
        // x=(1,1,..): partitions of 3 into 2 parts: 1+2 -> multinomial
        // weight r!/(1!2!)·(x1/1!)(x2/2!) scaled by r!/n!… easier: compare
        // with the multinomial definition computed by hand for x=(1,2,3):
        // B^exp_{3,2} = 3 x1 x2 = 6 (classical table).
        let t = exponential_bell(&[1.0, 2.0, 3.0], 3).unwrap();
        assert!((t.value(3, 2) - 6.0).abs() < 1e-12);
        // B^exp_{3,1} = x3 = 3, B^exp_{3,3} = x1³ = 1
        assert!((t.value(3, 1) - 3.0).abs() < 1e-12);
        assert!((t.value(3, 3) - 1.0).abs() < 1e-12);
        assert!(exponential_bell(&[1.0; 30], 25).is_err());
    }
}
