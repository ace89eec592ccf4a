//! Recurrence/transience and bias analytics for the simple walk.
//!
//! Everything here hinges on the expected interarrival time A1 of the
//! generator process. Writing ψ̄(z) = z ḡ(z), the expected sojourn time
//! (EST) on a site over an infinitely long walk is a contour integral of
//! Φ̄⁽⁰⁾(z) zⁿ / (z - ḡ(z)) around the unit circle, and ḡ(z) - z factors as
//! (z-1)(z-r) times a zero-free part. Which of the two real zeros lies
//! inside the unit disc is decided by the sign of 2 - A1, so the integral
//! collapses to residue formulas:
//!
//! * 1 <= A1 < 2 (right-biased): EST = A1/(2-A1) on every site n >= 0.
//! * A1 > 2 (left-biased):       EST = rⁿ Φ̄⁽⁰⁾(r) / (1 - ḡ'(r)), with r the
//!   unique zero of ḡ(z) - z in (0,1).
//! * Sites n < 0 pick up an extra z = 0 residue, computed here as a Taylor
//!   coefficient of Φ̄⁽⁰⁾(z)/(z - ḡ(z)) by truncated series division.
//! * A1 = 2 is the recurrent limit: the EST diverges.
//!
//! The contour is never quadratured for light tails — the residues are
//! exact and the truncated sum [`est_numeric`] is the independent check.
//! Fat-tailed densities (infinite A1) are always transient; they are
//! refused by `est_lt` and routed to the truncated sum or, for the Sibuya
//! family, the dedicated quadrature.

use crate::density::{survival, TailClass, WaitingTimeDensity};
use crate::dtrp::{lambda_poly, mean_arrivals};
use crate::error::{AdtrwError, Result};
use crate::series::{horner, series_divide};
use crate::walk::simple_site_series;
use num_complex::Complex64;

/// |A1 - 2| below this classifies the walk as recurrent. Configurable at the
/// CLI (`--recurrence-tol`); this is the documented default.
pub const DEFAULT_RECURRENCE_TOL: f64 = 1e-9;

/// Highest z = 0 residue derivative order served by [`est_lt`]: sites down
/// to n = -(ORDER_CAP + 1).
pub const DERIVATIVE_ORDER_CAP: usize = 12;

/// A quantity that is either finite or diverges (recurrent limit, fat-tail
/// mean waits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstValue {
    Finite(f64),
    Infinite,
}

impl EstValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            EstValue::Finite(v) => Some(v),
            EstValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, EstValue::Infinite)
    }
}

/// Recurrence verdict of the simple walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Recurrent,
    Transient,
}

fn lt_mean(d: &WaitingTimeDensity) -> Result<f64> {
    match d.tail_class() {
        TailClass::LightTailed => Ok(d.mean_wait().unwrap_or_else(|| {
            d.probs()
                .iter()
                .enumerate()
                .map(|(k, &p)| (k as f64 + 1.0) * p)
                .sum()
        })),
        TailClass::FatTailed { .. } => Err(AdtrwError::RequiresLightTail),
        TailClass::Unknown => Err(AdtrwError::UnknownTailClass),
    }
}

/// Expected interarrival time A1 = Σ t ψ(t); infinite for fat tails.
pub fn mean_wait(d: &WaitingTimeDensity) -> Result<EstValue> {
    match d.tail_class() {
        TailClass::LightTailed => Ok(EstValue::Finite(lt_mean(d)?)),
        TailClass::FatTailed { .. } => Ok(EstValue::Infinite),
        TailClass::Unknown => Err(AdtrwError::UnknownTailClass),
    }
}

/// ḡ(z) = Σ_t ψ(t) z^(t-1).
fn g_at(d: &WaitingTimeDensity, z: f64) -> f64 {
    horner(d.probs(), z)
}

/// ḡ'(z) = Σ_t (t-1) ψ(t) z^(t-2).
fn g_prime_at(d: &WaitingTimeDensity, z: f64) -> f64 {
    d.probs()
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &p)| acc * z + k as f64 * p)
}

/// Φ̄⁽⁰⁾(z) = Σ_t S(t) z^t over the tabulated horizon.
fn phi0_at(d: &WaitingTimeDensity, z: f64) -> f64 {
    horner(survival(d).values(), z)
}

/// The canonical zero of ḡ(z) - z in (0,1), with ḡ'(r).
#[derive(Debug, Clone, Copy)]
pub struct RZero {
    pub r: f64,
    pub g_prime_at_r: f64,
}

/// Bisection for the unique root of ḡ(z) - z on (0, 1), defined for
/// light-tailed densities with A1 > 2. The slope ḡ'(r) < 1 there, which the
/// result carries for the residue denominators.
pub fn find_r_zero(d: &WaitingTimeDensity) -> Result<RZero> {
    let a1 = lt_mean(d)?;
    if a1 <= 2.0 {
        return Err(AdtrwError::NoInteriorZero { a1 });
    }
    let f = |z: f64| g_at(d, z) - z;
    let mut lo = 0.0f64;
    let mut hi = 1.0 - 1e-12;
    let f_lo = f(lo);
    if f_lo == 0.0 {
        // alpha1 = 0 degenerates the zero to the origin
        return Ok(RZero {
            r: 0.0,
            g_prime_at_r: g_prime_at(d, 0.0),
        });
    }
    if f_lo < 0.0 || f(hi) > 0.0 {
        return Err(AdtrwError::Parameter(format!(
            "no sign change for the canonical zero (A1 = {a1}); density may be defective"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    let g_prime_at_r = g_prime_at(d, r);
    debug_assert!(g_prime_at_r < 1.0, "slope at the interior zero must be < 1");
    Ok(RZero { r, g_prime_at_r })
}

/// Taylor coefficient [z^order] of Φ̄⁽⁰⁾(z)/(z - ḡ(z)) at z = 0, the extra
/// residue entering EST formulas on negative sites, by truncated series
/// division in the tabulated coefficients.
fn z0_residue_coeff(d: &WaitingTimeDensity, order: usize) -> Result<f64> {
    if d.alpha1() == 0.0 {
        return Err(AdtrwError::Parameter(
            "negative-site residue needs psi(1) > 0".into(),
        ));
    }
    // den(z) = z - ḡ(z): coefficients -ψ(1), 1-ψ(2), -ψ(3), …
    let mut den = Vec::with_capacity(order + 2);
    den.push(-d.psi(1));
    den.push(1.0 - d.psi(2));
    for k in 2..=order {
        den.push(-d.psi(k + 1));
    }
    let surv = survival(d);
    let q = series_divide(&surv.values()[..=order.min(surv.len() - 1)], &den, order);
    Ok(q[order])
}

/// Expected sojourn time on `site` for a light-tailed generator, by the
/// residue formulas. `Infinite` at the recurrent point |A1 - 2| < tol.
pub fn est_lt(d: &WaitingTimeDensity, site: i64) -> Result<EstValue> {
    est_lt_tol(d, site, DEFAULT_RECURRENCE_TOL)
}

pub fn est_lt_tol(d: &WaitingTimeDensity, site: i64, recurrence_tol: f64) -> Result<EstValue> {
    let a1 = lt_mean(d)?;
    if (a1 - 2.0).abs() < recurrence_tol {
        return Ok(EstValue::Infinite);
    }
    let correction = if site < 0 {
        let order = site.unsigned_abs() as usize - 1;
        if order > DERIVATIVE_ORDER_CAP {
            return Err(AdtrwError::DerivativeOrderCap {
                site,
                order,
                cap: DERIVATIVE_ORDER_CAP,
            });
        }
        z0_residue_coeff(d, order)?
    } else {
        0.0
    };
    let principal = if a1 < 2.0 {
        a1 / (2.0 - a1)
    } else {
        let rz = find_r_zero(d)?;
        rz.r.powi(site as i32) * phi0_at(d, rz.r) / (1.0 - rz.g_prime_at_r)
    };
    // Exact values can be 0 (trivial walk, negative sites); clamp rounding dust.
    Ok(EstValue::Finite((principal + correction).max(0.0)))
}

/// Truncated sojourn sum Σ_{t<=t_max} P_{0,site}(t): monotone in t_max, and
/// the independent check against [`est_lt`] for transient light tails.
pub fn est_numeric(d: &WaitingTimeDensity, site: i64, t_max: usize) -> Result<f64> {
    Ok(simple_site_series(d, site, t_max)?.iter().sum())
}

/// Probability of ever returning to the departure site (F00) and of ever
/// visiting any fixed site n >= 1 (which is 1), valid for `1 <= A1 <= 2`.
pub fn escape_and_return(d: &WaitingTimeDensity) -> Result<(f64, f64)> {
    let a1 = lt_mean(d)?;
    if a1 > 2.0 + DEFAULT_RECURRENCE_TOL {
        return Err(AdtrwError::EscapeOutOfRange { a1 });
    }
    let f00 = (2.0 * (a1 - 1.0) / a1).clamp(0.0, 1.0);
    Ok((f00, 1.0))
}

/// Asymptotic drift `E[Y_t]/t -> (2 - A1)/A1`; fat tails sit at the -1 limit.
pub fn asymptotic_slope(d: &WaitingTimeDensity) -> Result<f64> {
    match d.tail_class() {
        TailClass::LightTailed => {
            let a1 = lt_mean(d)?;
            Ok((2.0 - a1) / a1)
        }
        TailClass::FatTailed { .. } => Ok(-1.0),
        TailClass::Unknown => Err(AdtrwError::UnknownTailClass),
    }
}

/// Recover the waiting-time density whose simple walk has prescribed
/// expected position f(t), t = 1..=T.
///
/// Admissibility: C(t) = (f(t)+t)/2 must be a valid mean arrival count —
/// non-negative, non-decreasing, `C(t) <= t`. The density generating function
/// is ψ̄_f(u) = u c̄(u) / (1 - u + u c̄(u)) where c̄ comes from
/// C̄(u) = u c̄(u)/(1-u)², i.e. c_k is the second difference of C. The
/// coefficients are extracted by power-series division up to T.
pub fn density_from_bias(f_values: &[f64]) -> Result<WaitingTimeDensity> {
    let t_max = f_values.len();
    if t_max == 0 {
        return Err(AdtrwError::Parameter("need at least one f(t) value".into()));
    }
    const ADM_TOL: f64 = 1e-9;
    // C(t) with C(0) = 0
    let mut c_fun = Vec::with_capacity(t_max + 1);
    c_fun.push(0.0);
    for (i, &f) in f_values.iter().enumerate() {
        let t = i + 1;
        let c = (f + t as f64) / 2.0;
        if c < -ADM_TOL {
            return Err(AdtrwError::InadmissibleBias {
                t,
                reason: format!("C(t) = {c} is negative (f below -t)"),
            });
        }
        if c > t as f64 + ADM_TOL {
            return Err(AdtrwError::InadmissibleBias {
                t,
                reason: format!("C(t) = {c} exceeds t (f above +t)"),
            });
        }
        if c + ADM_TOL < c_fun[t - 1] {
            return Err(AdtrwError::InadmissibleBias {
                t,
                reason: format!("C(t) = {c} decreases below C(t-1) = {}", c_fun[t - 1]),
            });
        }
        c_fun.push(c);
    }
    // c_k = C(k+1) - 2C(k) + C(k-1), k = 0..T-1 (second difference, C(-1) := 0)
    let mut c_coeff = Vec::with_capacity(t_max);
    for k in 0..t_max {
        let c_km1 = if k == 0 { 0.0 } else { c_fun[k - 1] };
        c_coeff.push(c_fun[k + 1] - 2.0 * c_fun[k] + c_km1);
    }
    // ψ̄ = N/D with N(u) = u c̄(u), D(u) = 1 - u + u c̄(u)
    let mut num = Vec::with_capacity(t_max + 1);
    num.push(0.0);
    num.extend_from_slice(&c_coeff);
    let mut den = vec![1.0];
    den.push(c_coeff[0] - 1.0);
    den.extend_from_slice(&c_coeff[1..]);
    let psi_full = series_divide(&num, &den, t_max);

    let mut probs = Vec::with_capacity(t_max);
    let mut partial = 0.0;
    for (k, &v) in psi_full.iter().enumerate().skip(1) {
        let mut v = v;
        if v < 0.0 {
            if v < -1e-9 {
                return Err(AdtrwError::NonRealizableBias { t: k, value: v });
            }
            v = 0.0;
        }
        partial += v;
        if partial > 1.0 + 1e-9 {
            return Err(AdtrwError::NonRealizableBias { t: k, value: v });
        }
        probs.push(v.min(1.0));
    }
    WaitingTimeDensity::from_table(probs)
}

/// Fixed probe arguments for the exchange-symmetry half of
/// [`strict_unbiased_check`]: real and complex pairs inside the unit disc.
fn symmetry_probes() -> Vec<(Complex64, Complex64)> {
    vec![
        (Complex64::new(0.3, 0.0), Complex64::new(0.9, 0.0)),
        (Complex64::new(-0.5, 0.0), Complex64::new(0.7, 0.0)),
        (Complex64::new(0.2, 0.6), Complex64::new(0.8, -0.1)),
        (Complex64::new(-0.3, -0.4), Complex64::new(0.1, 0.5)),
        (Complex64::new(0.0, 0.95), Complex64::new(0.95, 0.0)),
    ]
}

/// A walk is strictly unbiased when `E[Y_t]` vanishes at every time (not just
/// asymptotically) and the state polynomial has the exchange symmetry
/// Λ(a,b,t) = Λ(b,a,t). Both are checked to 1e-10 up to t_max.
pub fn strict_unbiased_check(d: &WaitingTimeDensity, t_max: usize) -> Result<bool> {
    const TOL: f64 = 1e-10;
    let en = mean_arrivals(d, t_max)?;
    for (t, &e) in en.iter().enumerate() {
        if (2.0 * e - t as f64).abs() > TOL {
            return Ok(false);
        }
    }
    for (a, b) in symmetry_probes() {
        let fwd = lambda_poly(d, a, b, t_max)?;
        let rev = lambda_poly(d, b, a, t_max)?;
        for t in 0..=t_max {
            if (fwd[t] - rev[t]).norm() > TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// How the reported sojourn value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstMethod {
    /// Residue formulas (exact for light tails).
    ResidueExact,
    /// Truncated sum over the tabulated horizon.
    TruncatedSum,
}

/// Analysis record for a simple walk.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// Expected interarrival time; `None` means infinite (fat tail).
    pub a1: Option<f64>,
    /// Bias measure B = 2 - A1; `None` for fat tails (formally -inf).
    pub bias_b: Option<f64>,
    pub verdict: Verdict,
    pub est_origin: EstValue,
    pub est_method: EstMethod,
    /// 1 - F00, the probability of never returning to the departure site.
    pub escape_prob: f64,
    pub asym_slope: f64,
    /// Canonical zero r in (0,1), present when A1 > 2.
    pub r_zero: Option<f64>,
    /// Probability mass beyond the tabulated horizon (defective inputs).
    pub mass_deficit: f64,
}

/// Full analysis of a density: A1, bias, verdict, sojourn on the origin,
/// escape probability and asymptotic slope. Fat tails get the truncated-sum
/// sojourn over the horizon; light tails the exact residues.
pub fn analyze(d: &WaitingTimeDensity, recurrence_tol: f64) -> Result<RunReport> {
    match d.tail_class() {
        TailClass::LightTailed => {
            let a1 = lt_mean(d)?;
            let recurrent = (a1 - 2.0).abs() < recurrence_tol;
            let est = est_lt_tol(d, 0, recurrence_tol)?;
            let escape_prob = match est {
                EstValue::Infinite => 0.0,
                EstValue::Finite(v) => 1.0 / v,
            };
            let r_zero = if !recurrent && a1 > 2.0 {
                Some(find_r_zero(d)?.r)
            } else {
                None
            };
            Ok(RunReport {
                a1: Some(a1),
                bias_b: Some(2.0 - a1),
                verdict: if recurrent {
                    Verdict::Recurrent
                } else {
                    Verdict::Transient
                },
                est_origin: est,
                est_method: EstMethod::ResidueExact,
                escape_prob,
                asym_slope: (2.0 - a1) / a1,
                r_zero,
                mass_deficit: d.mass_deficit(),
            })
        }
        TailClass::FatTailed { .. } => {
            let est = est_numeric(d, 0, d.horizon())?;
            Ok(RunReport {
                a1: None,
                bias_b: None,
                verdict: Verdict::Transient,
                est_origin: EstValue::Finite(est),
                est_method: EstMethod::TruncatedSum,
                escape_prob: 1.0 / est,
                asym_slope: -1.0,
                r_zero: None,
                mass_deficit: d.mass_deficit(),
            })
        }
        TailClass::Unknown => Err(AdtrwError::UnknownTailClass),
    }
}
