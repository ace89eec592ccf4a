//! Closed forms for the Sibuya-driven simple walk and the weakly singular
//! sojourn-time quadrature.
//!
//! The Sibuya(β) waiting time is the prototypical fat tail: hazard β/k,
//! density ψ(k) = (-1)^(k-1) C(β,k), generating function 1 - (1-u)^β. Its
//! state probabilities, mean arrivals and expected walker position all have
//! Gamma-ratio closed forms, evaluated here with sign-tracked log-gamma.
//!
//! The alternating Gamma-ratio sum for state probabilities cancels
//! catastrophically as t grows, so it is served only up to
//! [`CLOSED_FORM_T_CAP`] and cross-validated against the positive-term
//! convolution route, which is the production path at scale.

use crate::density::{DensitySpec, WaitingTimeDensity};
use crate::dtrp::state_polynomial;
use crate::error::{AdtrwError, Result};
use crate::quad::adaptive_gk;
use crate::special::binom_real;
use crate::walk::simple_site_series;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest t for which the alternating closed-form state sum keeps ~8
/// digits in f64; beyond it callers must use the convolution route.
pub const CLOSED_FORM_T_CAP: usize = 60;

/// Sibuya tail exponent β. β = 1 is the Markovian limit (every trial
/// succeeds); it is accepted by the closed forms but excluded from the
/// sojourn quadrature, where the walk is trivially transient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SibuyaParams {
    pub beta: f64,
}

impl SibuyaParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(AdtrwError::Parameter(format!(
                "sibuya closed forms require beta in (0,1], got {beta}"
            )));
        }
        Ok(SibuyaParams { beta })
    }

    /// Tabulated density for the convolution route (β < 1 only).
    pub fn density(&self, horizon: usize) -> Result<WaitingTimeDensity> {
        WaitingTimeDensity::new(&DensitySpec::Sibuya { beta: self.beta }, horizon)
    }
}

/// State probabilities P(N(t) = n), n = 0..=t, by the alternating
/// binomial sum Σ_ℓ (-1)^ℓ C(n,ℓ) C(t - β(ℓ+1), t). Capped at
/// [`CLOSED_FORM_T_CAP`] for stability.
pub fn sibuya_state_exact(p: SibuyaParams, t: usize) -> Result<Vec<f64>> {
    if t > CLOSED_FORM_T_CAP {
        return Err(AdtrwError::ClosedFormCap {
            cap: CLOSED_FORM_T_CAP,
        });
    }
    let beta = p.beta;
    let mut out = Vec::with_capacity(t + 1);
    for n in 0..=t {
        let mut acc = 0.0;
        let mut c_nl = 1.0; // C(n, l) built incrementally
        for l in 0..=n {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * c_nl * binom_real(t as f64 - beta * (l as f64 + 1.0), t as u64);
            c_nl = c_nl * (n - l) as f64 / (l as f64 + 1.0);
        }
        out.push(acc);
    }
    Ok(out)
}

/// E[N(t)] = C(β + t, t) - 1, exact for all β in (0,1] and t >= 0.
pub fn sibuya_mean_arrivals(p: SibuyaParams, t: usize) -> f64 {
    binom_real(p.beta + t as f64, t as u64) - 1.0
}

/// Expected walker position `E[Y_t] = 2 E[N(t)] - t` (same Gamma-ratio call,
/// so the identity with [`sibuya_mean_arrivals`] is exact by construction).
pub fn sibuya_expected_position(p: SibuyaParams, t: usize) -> f64 {
    2.0 * sibuya_mean_arrivals(p, t) - t as f64
}

/// Return probability to the departure site: 0 for odd t, P(N(t) = t/2)
/// for even t. Closed form, so subject to the same t cap.
pub fn sibuya_return_prob(p: SibuyaParams, t: usize) -> Result<f64> {
    if t % 2 == 1 {
        return Ok(0.0);
    }
    if t == 0 {
        return Ok(1.0);
    }
    Ok(sibuya_state_exact(p, t)?[t / 2])
}

/// Return-probability series P_{0,0}(t), t = 0..=t_max, by the convolution
/// route (stable at any horizon).
pub fn sibuya_return_series(p: SibuyaParams, t_max: usize) -> Result<Vec<f64>> {
    let d = p.density(t_max.max(1))?;
    simple_site_series(&d, 0, t_max)
}

/// Integrand of the sojourn-time integral on the departure site,
/// Re[ e^{iφ} (1-e^{iφ})^{β-1} / (2i sin φ + e^{-iφ}(1-e^{iφ})^β) ].
pub fn est_integrand(beta: f64, phi: f64) -> f64 {
    let e = Complex64::from_polar(1.0, phi);
    let w = Complex64::new(1.0, 0.0) - e;
    let num = e * w.powf(beta - 1.0);
    let den = Complex64::new(0.0, 2.0 * phi.sin()) + w.powf(beta) / e;
    (num / den).re
}

/// Leading singular behavior of the integrand at φ -> 0+.
fn singular_part(beta: f64, phi: f64) -> f64 {
    2.0 * (PI * beta / 2.0).cos() * phi.powf(-beta)
}

/// Expected sojourn time on the departure site of the Sibuya walk,
/// the ε-regularized limit of (1/π) ∫_0^π of [`est_integrand`] at
/// u = e^(-ε). Finite for every β in (0,1): the walk is transient.
///
/// Two pieces beyond plain quadrature:
///
/// * The integrand is weakly singular (φ^{-β}) at zero, so [0, δ]
///   integrates the integrand minus its analytic singular part — whose
///   integral 2 cos(πβ/2) δ^(1-β)/(1-β) is added in closed form — and
///   [δ, π] is handled directly. δ = 0.1 rad.
/// * The 1/(1 - u e^{iφ}) factor develops a boundary layer at φ ~ ε whose
///   real part integrates to π/2 as ε -> 0 (substitute φ = εs: the layer is
///   ∫ ds/(1+s²), independent of β). The pointwise u = 1 integrand does not
///   see it, so the constant 1/2 is added explicitly; the return-sum
///   cross-check in the acceptance suite pins this term.
pub fn sibuya_est_origin(p: SibuyaParams) -> Result<f64> {
    let beta = p.beta;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(AdtrwError::Parameter(format!(
            "sojourn quadrature requires beta in (0,1), got {beta}"
        )));
    }
    const DELTA: f64 = 0.1;
    let regular = adaptive_gk(
        |phi| est_integrand(beta, phi) - singular_part(beta, phi),
        0.0,
        DELTA,
        1e-9,
        20_000,
    );
    let singular_integral = 2.0 * (PI * beta / 2.0).cos() * DELTA.powf(1.0 - beta) / (1.0 - beta);
    let outer = adaptive_gk(|phi| est_integrand(beta, phi), DELTA, PI, 1e-10, 10_000);
    Ok(0.5 + (regular.value + singular_integral + outer.value) / PI)
}

/// One row of figure data: a (β, t, value) triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigRow {
    pub beta: f64,
    pub t: usize,
    pub value: f64,
}

/// State polynomial P(v = 0.1, t) per β — the log-log decay picture.
pub fn fig_state_polynomial(betas: &[f64], t_max: usize) -> Result<Vec<FigRow>> {
    let rows: Result<Vec<Vec<FigRow>>> = betas
        .par_iter()
        .map(|&beta| {
            let p = SibuyaParams::new(beta)?;
            let d = p.density(t_max.max(1))?;
            let series = state_polynomial(&d, Complex64::new(0.1, 0.0), t_max)?;
            Ok(series
                .iter()
                .enumerate()
                .map(|(t, v)| FigRow {
                    beta,
                    t,
                    value: v.re,
                })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Return probability per β at even times (odd rows are identically zero
/// and omitted).
pub fn fig_return_probability(betas: &[f64], t_max: usize) -> Result<Vec<FigRow>> {
    let rows: Result<Vec<Vec<FigRow>>> = betas
        .par_iter()
        .map(|&beta| {
            let p = SibuyaParams::new(beta)?;
            let series = sibuya_return_series(p, t_max)?;
            Ok(series
                .iter()
                .enumerate()
                .filter(|(t, _)| t % 2 == 0)
                .map(|(t, &v)| FigRow { beta, t, value: v })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Expected walker position per β (exact closed form).
pub fn fig_expected_position(betas: &[f64], t_max: usize) -> Result<Vec<FigRow>> {
    let rows: Result<Vec<Vec<FigRow>>> = betas
        .par_iter()
        .map(|&beta| {
            let p = SibuyaParams::new(beta)?;
            Ok((0..=t_max)
                .map(|t| FigRow {
                    beta,
                    t,
                    value: sibuya_expected_position(p, t),
                })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}
