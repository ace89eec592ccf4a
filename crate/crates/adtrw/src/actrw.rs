//! Time-changed walk: fractional-Poisson clock, Mittag-Leffler machinery,
//! and the composed counting process N[M(t)].
//!
//! The walk's trials fire at the arrival instants of an independent
//! continuous-time renewal clock M(t) with Mittag-Leffler interarrival law
//! (parameters μ ∈ (0,1], rate ξ₀; μ = 1 is the Poisson clock). The scalar
//! transition function is the mixture
//!
//! ```text
//! Π(a,b,t) = Σ_m P(M(t)=m) Λ(a,b,m),
//! ```
//!
//! and for a geometric generator it collapses to the closed form
//! E_μ(-ξ₀(1 - qb - pa) t^μ), which the test suite uses as the exact
//! cross-check of the whole chain.
//!
//! Numerical notes. Fractional-Poisson state probabilities are alternating
//! sums; inside the formal envelope ξ₀ t^μ <= 20 they are computed with
//! compensated summation and an explicit roundoff bound, and the
//! computation refuses to return values once that bound exceeds 1e-8
//! (beyond it only Monte Carlo is offered). The Mittag-Leffler function
//! switches from the power series to the spectral integral at a μ-dependent
//! radius chosen so both sides carry ~12 significant digits.

use crate::density::WaitingTimeDensity;
use crate::dtrp::{lambda_poly, state_rows};
use crate::error::{AdtrwError, Result};
use crate::quad::adaptive_gk;
use crate::special::{lgamma, CompensatedSum};
use crate::walk::{JumpDensity, MC_SHARD_SIZE};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Formal stability envelope for the fractional-Poisson state series.
pub const FRAC_POISSON_ENVELOPE: f64 = 20.0;

/// Roundoff bound above which the alternating state series refuses to
/// answer.
pub const STATE_SERIES_ERROR_LIMIT: f64 = 1e-8;

/// Clock parameters of the time change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    /// Tail exponent μ ∈ (0,1]; μ = 1 recovers the Poisson clock.
    pub mu: f64,
    /// Rate constant ξ₀ > 0.
    pub xi0: f64,
}

impl MLParams {
    pub fn new(mu: f64, xi0: f64) -> Result<Self> {
        if mu.is_nan() || mu <= 0.0 || mu > 1.0 {
            return Err(AdtrwError::Parameter(format!(
                "mu must be in (0,1], got {mu}"
            )));
        }
        if xi0.is_nan() || xi0 <= 0.0 {
            return Err(AdtrwError::Parameter(format!(
                "xi0 must be positive, got {xi0}"
            )));
        }
        Ok(MLParams { mu, xi0 })
    }

    /// ξ₀ t^μ, the argument scale of everything downstream.
    fn x(&self, t: f64) -> f64 {
        self.xi0 * t.powf(self.mu)
    }
}

/// Series/integral switch radius for E_μ(-x): the series loses about
/// x^(1/μ) · log10(e) digits to cancellation, so cap that at ~3.5 digits.
fn ml_switch_radius(mu: f64) -> f64 {
    8f64.powf(mu).min(5.0)
}

fn ml_series(mu: f64, z: f64) -> f64 {
    let ln_abs = (-z).ln();
    let mut sum = CompensatedSum::new();
    sum.add(1.0);
    let mut prev = f64::INFINITY;
    let mut below = 0;
    // Γ(μk+1) must outgrow |z|^k before the cutoff; small μ needs many
    // terms, so scale the cap with 1/μ.
    let k_max = ((40.0 / mu).ceil() as usize + 100).min(400_000);
    for k in 1..=k_max {
        let ln_term = k as f64 * ln_abs - lgamma(mu * k as f64 + 1.0);
        let mag = ln_term.exp();
        let term = if k % 2 == 0 { mag } else { -mag };
        sum.add(term);
        if mag < 1e-18 && mag <= prev {
            below += 1;
            if below >= 3 {
                break;
            }
        } else {
            below = 0;
        }
        prev = mag;
    }
    sum.value()
}

/// Spectral-integral branch for E_μ(-x), x > 0, μ ∈ (0,1). After the
/// substitution w = s^μ the completely monotone representation reads
///
/// ```text
/// E_μ(-x) = sin(μπ)/(μπ) ∫_0^∞ e^{-(w x)^{1/μ}} / (w² + 2w cos(μπ) + 1) dw,
/// ```
///
/// a smooth integrand with super-exponential decay.
fn ml_integral(mu: f64, x: f64) -> f64 {
    let cos_mu_pi = (mu * PI).cos();
    let prefactor = (mu * PI).sin() / (mu * PI);
    let inv_mu = 1.0 / mu;
    // e^{-46} under the integral is below f64 noise for these magnitudes
    let w_max = 46f64.powf(mu) / x;
    let r = adaptive_gk(
        |w| (-(w * x).powf(inv_mu)).exp() / (w * w + 2.0 * w * cos_mu_pi + 1.0),
        0.0,
        w_max,
        1e-14,
        40_000,
    );
    prefactor * r.value
}

/// Mittag-Leffler function E_μ(z) on the closed negative real axis,
/// μ ∈ (0,1]. This is the only domain the walk needs: values live in (0,1]
/// and decrease in |z|.
pub fn mittag_leffler(mu: f64, z: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(AdtrwError::Parameter(format!(
            "mu must be in (0,1], got {mu}"
        )));
    }
    if z > 0.0 {
        return Err(AdtrwError::Parameter(format!(
            "mittag_leffler is contracted for z <= 0 only, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if mu == 1.0 {
        return Ok(z.exp());
    }
    if -z <= ml_switch_radius(mu) {
        Ok(ml_series(mu, z))
    } else {
        Ok(ml_integral(mu, -z))
    }
}

/// One fractional-Poisson state probability P(M(t)=m) at argument
/// x = ξ₀ t^μ, by the alternating series
/// Σ_{j>=m} C(j,m) (-1)^(j-m) x^j / Γ(μj + 1).
/// Returns (value, max |term|) for roundoff accounting.
fn frac_poisson_pmf_raw(mu: f64, x: f64, m: usize) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((if m == 0 { 1.0 } else { 0.0 }, 1.0));
    }
    let ln_x = x.ln();
    let lg_m1 = lgamma(m as f64 + 1.0);
    let mut sum = CompensatedSum::new();
    let mut max_mag: f64 = 0.0;
    let mut prev = f64::INFINITY;
    let mut below = 0;
    let mut converged = false;
    let j_max = m + 4000 + (40.0 / mu).ceil() as usize;
    for j in m..=j_max {
        let ln_c = lgamma(j as f64 + 1.0) - lg_m1 - lgamma((j - m) as f64 + 1.0);
        let ln_term = ln_c + j as f64 * ln_x - lgamma(mu * j as f64 + 1.0);
        if ln_term > 300.0 {
            // the peak alone would wipe out all significance
            return Err(AdtrwError::Unstable {
                estimate: f64::INFINITY,
                limit: STATE_SERIES_ERROR_LIMIT,
            });
        }
        let mag = ln_term.exp();
        max_mag = max_mag.max(mag);
        sum.add(if (j - m).is_multiple_of(2) { mag } else { -mag });
        if mag < 1e-18 && mag <= prev {
            below += 1;
            if below >= 3 {
                converged = true;
                break;
            }
        } else {
            below = 0;
        }
        prev = mag;
    }
    if !converged {
        return Err(AdtrwError::Envelope(format!(
            "state series for m={m} did not converge within {j_max} terms (mu={mu}, x={x})"
        )));
    }
    Ok((sum.value(), max_mag))
}

/// Fractional-Poisson state probabilities with diagnostics.
#[derive(Debug, Clone)]
pub struct FracPoissonStates {
    /// P(M(t)=m) for m = 0..=m_max, clamped to `[0,1]`.
    pub probs: Vec<f64>,
    /// 1 - Σ probs: mass sitting above m_max.
    pub deficit: f64,
    /// Negative dust removed by clamping (should be ~roundoff).
    pub clamped_mass: f64,
    /// A posteriori roundoff bound on any single entry.
    pub roundoff_bound: f64,
}

fn envelope_check(clock: MLParams, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(AdtrwError::Parameter(format!("time must be >= 0, got {t}")));
    }
    let x = clock.x(t);
    if x > FRAC_POISSON_ENVELOPE + 1e-9 {
        return Err(AdtrwError::Envelope(format!(
            "xi0 * t^mu = {x:.3} exceeds the series envelope {FRAC_POISSON_ENVELOPE}; reduce t or use Monte Carlo"
        )));
    }
    Ok(x)
}

/// State probabilities P(M(t)=m), m = 0..=m_max, of the fractional-Poisson
/// clock. Refuses arguments whose alternating-series roundoff would exceed
/// [`STATE_SERIES_ERROR_LIMIT`].
pub fn frac_poisson_states(clock: MLParams, t: f64, m_max: usize) -> Result<FracPoissonStates> {
    let x = envelope_check(clock, t)?;
    let mut probs = Vec::with_capacity(m_max + 1);
    let mut clamped_mass = 0.0;
    let mut worst_max_mag: f64 = 0.0;
    for m in 0..=m_max {
        let (v, max_mag) = frac_poisson_pmf_raw(clock.mu, x, m)?;
        worst_max_mag = worst_max_mag.max(max_mag);
        let mut v = v;
        if v < 0.0 {
            clamped_mass += -v;
            v = 0.0;
        }
        probs.push(v.min(1.0));
    }
    // Compensated summation leaves ~1 ulp of the largest term per entry;
    // the lgamma/exp term construction costs a few more.
    let roundoff_bound = worst_max_mag * 8.0 * f64::EPSILON;
    if roundoff_bound > STATE_SERIES_ERROR_LIMIT {
        return Err(AdtrwError::Unstable {
            estimate: roundoff_bound,
            limit: STATE_SERIES_ERROR_LIMIT,
        });
    }
    let total: f64 = probs.iter().sum();
    Ok(FracPoissonStates {
        probs,
        deficit: (1.0 - total).max(0.0),
        clamped_mass,
        roundoff_bound,
    })
}

/// Clock pmf with truncation and roundoff bookkeeping.
struct ClockPmf {
    probs: Vec<f64>,
    /// Bound on the clock mass above the last computed state.
    tail_bound: f64,
    /// Accumulated roundoff bound across all computed entries.
    roundoff: f64,
}

/// Clock pmf extended until the remaining tail is certifiably below
/// `tail_tol`: either the cumulative mass closes to within `tail_tol`, or
/// the entries are past the peak and halving (geometric tail bound 2·pmf).
fn clock_pmf_until(clock: MLParams, t: f64, tail_tol: f64, m_cap: usize) -> Result<ClockPmf> {
    let x = envelope_check(clock, t)?;
    let mut probs = Vec::new();
    let mut cum = 0.0;
    let mut roundoff = 0.0;
    let mut prev_v = f64::INFINITY;
    for m in 0..=m_cap {
        let (raw, max_mag) = frac_poisson_pmf_raw(clock.mu, x, m)?;
        let entry_bound = max_mag * 8.0 * f64::EPSILON;
        if entry_bound > STATE_SERIES_ERROR_LIMIT {
            return Err(AdtrwError::Unstable {
                estimate: entry_bound,
                limit: STATE_SERIES_ERROR_LIMIT,
            });
        }
        roundoff += entry_bound;
        let v = raw.clamp(0.0, 1.0);
        probs.push(v);
        cum += v;
        let open_tail = 1.0 - cum;
        if open_tail < tail_tol || (v < 0.5 * tail_tol && v < 0.5 * prev_v) {
            return Ok(ClockPmf {
                probs,
                tail_bound: open_tail.max(0.0) + 2.0 * v,
                roundoff,
            });
        }
        prev_v = v;
    }
    Err(AdtrwError::Envelope(format!(
        "clock state tail did not close below {tail_tol} within {m_cap} states"
    )))
}

/// Tail tolerance used when truncating mixtures over M(t).
const CLOCK_TAIL_TOL: f64 = 1e-12;

/// State probabilities of the composed process N[M(t)] at one time point.
#[derive(Debug, Clone)]
pub struct ComposedStates {
    pub t: f64,
    /// P(N[M(t)] = n) for n = 0..=n_max.
    pub probs: Vec<f64>,
    /// Clock states actually mixed over.
    pub m_used: usize,
    /// Truncated clock mass plus roundoff: bounds the probs' deficit.
    pub tail_bound: f64,
}

/// P(N[M(t)] = n) = Σ_m P(M(t)=m) Φ⁽ⁿ⁾(m), truncated where the clock tail
/// drops below 1e-12. The generator horizon must cover every mixed m.
pub fn composed_states(
    d: &WaitingTimeDensity,
    clock: MLParams,
    t: f64,
    n_max: usize,
) -> Result<ComposedStates> {
    let clock_pmf = clock_pmf_until(clock, t, CLOCK_TAIL_TOL, 10_000)?;
    let m_used = clock_pmf.probs.len() - 1;
    d.require_horizon(m_used)?;
    let rows = state_rows(d, n_max, m_used)?;
    let probs: Vec<f64> = (0..=n_max)
        .map(|n| {
            clock_pmf
                .probs
                .iter()
                .zip(&rows[n])
                .map(|(pm, phi)| pm * phi)
                .sum()
        })
        .collect();
    Ok(ComposedStates {
        t,
        probs,
        m_used,
        tail_bound: clock_pmf.tail_bound + clock_pmf.roundoff,
    })
}

/// Π(a,b,t) with a truncation bound.
#[derive(Debug, Clone, Copy)]
pub struct PiValue {
    pub value: Complex64,
    /// |truncated part| + clock roundoff (|Λ| <= 1 on the mixed tail).
    pub tail_bound: f64,
}

/// Scalar transition function Π(a,b,t) = Σ_m P(M(t)=m) Λ(a,b,m).
pub fn pi_series(
    d: &WaitingTimeDensity,
    clock: MLParams,
    a: Complex64,
    b: Complex64,
    t: f64,
) -> Result<PiValue> {
    let clock_pmf = clock_pmf_until(clock, t, CLOCK_TAIL_TOL, 10_000)?;
    let m_used = clock_pmf.probs.len() - 1;
    d.require_horizon(m_used)?;
    let lam = lambda_poly(d, a, b, m_used)?;
    let mut value = Complex64::new(0.0, 0.0);
    for (pm, l) in clock_pmf.probs.iter().zip(&lam) {
        value += l * *pm;
    }
    Ok(PiValue {
        value,
        tail_bound: clock_pmf.tail_bound + clock_pmf.roundoff,
    })
}

/// Mittag-Leffler interarrival variate by the two-uniform inverse
/// transform: T = ξ₀^(-1/μ) (-ln U) [sin(μπ)/tan(μπV) - cos(μπ)]^(1/μ).
///
/// This is the exponential mixture E/R with R drawn from the spectral
/// measure of E_μ(-t^μ); the bracket is the inverse CDF of R^μ (whose law
/// is invariant under w -> 1/w, so the sign of the 1/μ exponent is a
/// convention). μ = 1 collapses to Exponential(ξ₀).
pub fn ml_variate<R: Rng>(clock: MLParams, rng: &mut R) -> f64 {
    let u: f64 = rng.random::<f64>().clamp(1e-16, 1.0 - 1e-16);
    let v: f64 = rng.random::<f64>().clamp(1e-16, 1.0 - 1e-16);
    let mu = clock.mu;
    let scale = clock.xi0.powf(-1.0 / mu);
    if mu == 1.0 {
        return -u.ln() * scale;
    }
    let bracket = (mu * PI).sin() / (mu * PI * v).tan() - (mu * PI).cos();
    scale * (-u.ln()) * bracket.powf(1.0 / mu)
}

/// Monte Carlo ensemble of the time-changed walk, observed on a fixed time
/// grid. Integer accumulators throughout: shard merges are exact.
#[derive(Debug, Clone)]
pub struct ActrwEnsemble {
    pub sample_count: u64,
    pub seed: u64,
    pub times: Vec<f64>,
    /// Per grid time: counts of M(t) = m.
    pub clock_hist: Vec<Vec<u64>>,
    /// Per grid time: counts of N[M(t)] = n.
    pub arrivals_hist: Vec<Vec<u64>>,
    /// Per grid time: walker position counts.
    pub position_hist: Vec<BTreeMap<i64, u64>>,
    pub position_sums: Vec<i128>,
    /// Generator draws beyond the tabulated horizon.
    pub truncated_draws: u64,
}

impl ActrwEnsemble {
    fn empty(times: &[f64], seed: u64) -> Self {
        ActrwEnsemble {
            sample_count: 0,
            seed,
            times: times.to_vec(),
            clock_hist: vec![Vec::new(); times.len()],
            arrivals_hist: vec![Vec::new(); times.len()],
            position_hist: vec![BTreeMap::new(); times.len()],
            position_sums: vec![0; times.len()],
            truncated_draws: 0,
        }
    }

    fn bump(hist: &mut Vec<u64>, idx: usize) {
        if hist.len() <= idx {
            hist.resize(idx + 1, 0);
        }
        hist[idx] += 1;
    }

    fn merge(mut self, other: ActrwEnsemble) -> ActrwEnsemble {
        self.sample_count += other.sample_count;
        self.truncated_draws += other.truncated_draws;
        for i in 0..self.times.len() {
            if self.clock_hist[i].len() < other.clock_hist[i].len() {
                self.clock_hist[i].resize(other.clock_hist[i].len(), 0);
            }
            for (j, &c) in other.clock_hist[i].iter().enumerate() {
                self.clock_hist[i][j] += c;
            }
            if self.arrivals_hist[i].len() < other.arrivals_hist[i].len() {
                self.arrivals_hist[i].resize(other.arrivals_hist[i].len(), 0);
            }
            for (j, &c) in other.arrivals_hist[i].iter().enumerate() {
                self.arrivals_hist[i][j] += c;
            }
            for (&site, &c) in &other.position_hist[i] {
                *self.position_hist[i].entry(site).or_insert(0) += c;
            }
            self.position_sums[i] += other.position_sums[i];
        }
        self
    }

    /// Empirical P(M(t)=m) at grid index i.
    pub fn clock_pmf(&self, i: usize) -> Vec<f64> {
        let n = self.sample_count as f64;
        self.clock_hist[i].iter().map(|&c| c as f64 / n).collect()
    }

    /// Empirical E[v^N[M(t)]] at grid index i.
    pub fn arrivals_pgf(&self, i: usize, v: f64) -> f64 {
        let n = self.sample_count as f64;
        self.arrivals_hist[i]
            .iter()
            .enumerate()
            .map(|(k, &c)| v.powi(k as i32) * c as f64)
            .sum::<f64>()
            / n
    }
}

/// Sample the time-changed walk on an ascending observation grid.
pub fn actrw_mc(
    d: &WaitingTimeDensity,
    clock: MLParams,
    wplus: &JumpDensity,
    wminus: &JumpDensity,
    times: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<ActrwEnsemble> {
    if n_samples == 0 {
        return Err(AdtrwError::Parameter("n_samples must be >= 1".into()));
    }
    if times.is_empty() {
        return Err(AdtrwError::Parameter(
            "need at least one observation time".into(),
        ));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times[0] < 0.0 {
        return Err(AdtrwError::Parameter(
            "observation times must be ascending and >= 0".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(d.horizon());
    let mut acc = 0.0;
    for &p in d.probs() {
        acc += p;
        cdf.push(acc);
    }
    let n_shards = n_samples.div_ceil(MC_SHARD_SIZE);
    let result = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let lo = shard * MC_SHARD_SIZE;
            let hi = (lo + MC_SHARD_SIZE).min(n_samples);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(shard + 1);
            let mut acc = ActrwEnsemble::empty(times, seed);
            for _ in lo..hi {
                simulate_actrw(&cdf, clock, wplus, wminus, times, &mut rng, &mut acc);
            }
            acc
        })
        .reduce_with(ActrwEnsemble::merge)
        .expect("at least one shard");
    Ok(result)
}

fn draw_wait<R: Rng>(cdf: &[f64], rng: &mut R, truncated: &mut u64) -> Option<usize> {
    let u: f64 = rng.random();
    let total = *cdf.last().unwrap();
    if u >= total {
        *truncated += 1;
        return None;
    }
    Some(cdf.partition_point(|&c| c <= u) + 1)
}

fn simulate_actrw<R: Rng>(
    cdf: &[f64],
    clock: MLParams,
    wplus: &JumpDensity,
    wminus: &JumpDensity,
    times: &[f64],
    rng: &mut R,
    acc: &mut ActrwEnsemble,
) {
    acc.sample_count += 1;
    let mut pos: i64 = 0;
    let mut arrivals: usize = 0;
    let mut successes: usize = 0;
    let mut next_arrival = ml_variate(clock, rng);
    let mut countdown = draw_wait(cdf, rng, &mut acc.truncated_draws);
    for (i, &t_obs) in times.iter().enumerate() {
        while next_arrival <= t_obs {
            arrivals += 1;
            let success = match countdown.as_mut() {
                Some(c) => {
                    *c -= 1;
                    *c == 0
                }
                None => false,
            };
            if success {
                successes += 1;
                pos += wplus.sample(rng);
                countdown = draw_wait(cdf, rng, &mut acc.truncated_draws);
            } else {
                pos += wminus.sample(rng);
            }
            next_arrival += ml_variate(clock, rng);
        }
        ActrwEnsemble::bump(&mut acc.clock_hist[i], arrivals);
        ActrwEnsemble::bump(&mut acc.arrivals_hist[i], successes);
        *acc.position_hist[i].entry(pos).or_insert(0) += 1;
        acc.position_sums[i] += pos as i128;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensitySpec;
    use crate::special::erfc;

    fn geometric(p: f64, horizon: usize) -> WaitingTimeDensity {
        WaitingTimeDensity::new(&DensitySpec::Geometric { p }, horizon).unwrap()
    }

    #[test]
    fn ml_at_zero_and_guards() {
        assert_eq!(mittag_leffler(0.7, 0.0).unwrap(), 1.0);
        assert!(mittag_leffler(0.7, 0.5).is_err());
        assert!(mittag_leffler(0.0, -1.0).is_err());
        assert!(mittag_leffler(1.5, -1.0).is_err());
    }

    #[test]
    fn ml_mu_one_is_exponential() {
        for z in [-10.0, -5.0, -1.0, -0.01] {
            assert!((mittag_leffler(1.0, z).unwrap() - z.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn ml_half_matches_erfc_identity() {
        // E_{1/2}(-x) = e^(x²) erfc(x)
        for x in [0.3f64, 1.0, 2.0, 4.0, 7.0] {
            let expect = (x * x).exp() * erfc(x);
            let got = mittag_leffler(0.5, -x).unwrap();
            assert!(
                (got - expect).abs() < 1e-10,
                "x={x}: {got} vs {expect} (diff {:.2e})",
                (got - expect).abs()
            );
        }
    }

    #[test]
    fn ml_series_integral_seam() {
        for mu in [0.3, 0.5, 0.7, 0.9, 0.95] {
            let x = ml_switch_radius(mu);
            let s = ml_series(mu, -x);
            let i = ml_integral(mu, x);
            assert!(
                (s - i).abs() < 1e-10,
                "mu={mu} seam x={x}: series {s} vs integral {i}"
            );
        }
    }

    #[test]
    fn ml_small_mu_stays_in_range() {
        // slow-growing Γ(μk+1) needs long series; the cap scales with 1/μ
        for mu in [0.05, 0.02] {
            for z in [-0.5, -1.0, -30.0] {
                let v = mittag_leffler(mu, z).unwrap();
                assert!(v > 0.0 && v < 1.0, "mu={mu} z={z}: {v}");
            }
        }
    }

    #[test]
    fn ml_monotone_in_z() {
        for mu in [0.4, 0.8] {
            let mut prev = 1.0;
            for k in 1..60 {
                let z = -(k as f64) * 0.5;
                let v = mittag_leffler(mu, z).unwrap();
                assert!(v > 0.0 && v < prev, "mu={mu} z={z}");
                prev = v;
            }
        }
    }

    #[test]
    fn frac_poisson_reduces_to_poisson() {
        let clock = MLParams::new(1.0, 1.0).unwrap();
        let states = frac_poisson_states(clock, 2.0, 20).unwrap();
        let mut expect = (-2.0f64).exp();
        for m in 0..=20 {
            assert!(
                (states.probs[m] - expect).abs() < 1e-12,
                "m={m}: {} vs {expect}",
                states.probs[m]
            );
            expect *= 2.0 / (m as f64 + 1.0);
        }
        // true Poisson(2) tail above m=20 is ~6e-15
        assert!(states.deficit < 1e-12, "deficit {}", states.deficit);
        assert!(states.clamped_mass < 1e-12);
    }

    #[test]
    fn frac_poisson_survival_is_ml() {
        // P(M(t)=0) = E_μ(-ξ₀ t^μ)
        for (mu, t) in [(0.8, 1.0), (0.6, 2.0), (0.5, 0.7)] {
            let clock = MLParams::new(mu, 1.0).unwrap();
            let states = frac_poisson_states(clock, t, 0).unwrap();
            let expect = mittag_leffler(mu, -t.powf(mu)).unwrap();
            assert!(
                (states.probs[0] - expect).abs() < 1e-10,
                "mu={mu} t={t}: {} vs {expect}",
                states.probs[0]
            );
        }
    }

    #[test]
    fn frac_poisson_t_zero_is_point_mass() {
        let clock = MLParams::new(0.7, 2.0).unwrap();
        let states = frac_poisson_states(clock, 0.0, 5).unwrap();
        assert_eq!(states.probs[0], 1.0);
        assert!(states.probs[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn envelope_and_stability_guards() {
        let clock = MLParams::new(0.8, 1.0).unwrap();
        // formal envelope
        let err = frac_poisson_states(clock, 100.0, 3).unwrap_err();
        assert!(err.is_envelope(), "{err}");
        // inside the formal envelope but too much cancellation for f64
        let clock = MLParams::new(0.4, 1.0).unwrap();
        let err = frac_poisson_states(clock, 1e3, 3).unwrap_err();
        assert!(err.is_envelope(), "{err}");
    }

    #[test]
    fn composed_states_bernoulli_survival() {
        // Composed survival = ML with rate p ξ₀
        let d = geometric(0.6, 256);
        for (mu, t) in [(0.8, 1.0), (1.0, 2.0)] {
            let clock = MLParams::new(mu, 1.0).unwrap();
            let cs = composed_states(&d, clock, t, 4).unwrap();
            let expect = mittag_leffler(mu, -(0.6 * t.powf(mu))).unwrap();
            assert!(
                (cs.probs[0] - expect).abs() < 1e-8,
                "mu={mu}: {} vs {expect}",
                cs.probs[0]
            );
            assert!(cs.tail_bound < 1e-9, "tail_bound {}", cs.tail_bound);
            let total: f64 = cs.probs.iter().sum();
            assert!(total <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn composed_states_poisson_thinning() {
        // μ = 1: P(N[M(t)]=0) = e^(-p ξ₀ t)
        let d = geometric(0.3, 256);
        let clock = MLParams::new(1.0, 1.5).unwrap();
        let t = 2.0;
        let cs = composed_states(&d, clock, t, 2).unwrap();
        assert!((cs.probs[0] - (-0.3f64 * 1.5 * t).exp()).abs() < 1e-10);
    }

    #[test]
    fn composed_states_t_zero() {
        let d = geometric(0.5, 16);
        let clock = MLParams::new(0.9, 1.0).unwrap();
        let cs = composed_states(&d, clock, 0.0, 3).unwrap();
        assert_eq!(cs.probs[0], 1.0);
    }

    #[test]
    fn pi_series_normalization_and_initial_condition() {
        let d = geometric(0.5, 256);
        let clock = MLParams::new(0.8, 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let pi = pi_series(&d, clock, one, one, 1.5).unwrap();
        assert!((pi.value.re - 1.0).abs() <= pi.tail_bound + 1e-12);
        let pi0 = pi_series(&d, clock, one, one, 0.0).unwrap();
        assert!((pi0.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pi_series_ml_closed_form() {
        // geometric generator: Π(a,b,t) = E_μ(-ξ₀(1 - qb - pa) t^μ)
        let p = 0.6;
        let d = geometric(p, 512);
        for mu in [0.6, 0.8, 1.0] {
            let clock = MLParams::new(mu, 1.0).unwrap();
            for (a, b) in [(0.5, -0.3), (-1.0, 1.0), (0.2, 0.9)] {
                for t in [0.5, 2.0, 5.0] {
                    let pi =
                        pi_series(&d, clock, Complex64::new(a, 0.0), Complex64::new(b, 0.0), t)
                            .unwrap();
                    let lambda = 1.0 - (1.0 - p) * b - p * a;
                    let expect = mittag_leffler(mu, -(lambda * t.powf(mu))).unwrap();
                    assert!(
                        (pi.value.re - expect).abs() < 1e-8 && pi.value.im.abs() < 1e-12,
                        "mu={mu} a={a} b={b} t={t}: {} vs {expect}",
                        pi.value.re
                    );
                }
            }
        }
    }

    #[test]
    fn ml_variate_mu_one_is_exponential() {
        let clock = MLParams::new(1.0, 2.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| ml_variate(clock, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn actrw_mc_deterministic_and_poisson_reduction() {
        let d = geometric(0.5, 512);
        let clock = MLParams::new(1.0, 1.0).unwrap();
        let wp = JumpDensity::unit(crate::walk::Direction::Positive);
        let wm = JumpDensity::unit(crate::walk::Direction::Negative);
        let times = [1.0, 3.0];
        let a = actrw_mc(&d, clock, &wp, &wm, &times, 100_000, 9).unwrap();
        let b = actrw_mc(&d, clock, &wp, &wm, &times, 100_000, 9).unwrap();
        assert_eq!(a.clock_hist, b.clock_hist);
        assert_eq!(a.position_hist, b.position_hist);

        // TVD of empirical M(3) against Poisson(3)
        let pmf = a.clock_pmf(1);
        let mut poisson = (-3.0f64).exp();
        let mut tvd = 0.0;
        for m in 0..pmf.len().max(30) {
            let emp = pmf.get(m).copied().unwrap_or(0.0);
            tvd += (emp - poisson).abs();
            poisson *= 3.0 / (m as f64 + 1.0);
        }
        assert!(0.5 * tvd < 0.01, "tvd {}", 0.5 * tvd);
    }

    #[test]
    fn actrw_mc_position_law_is_clock_mixture() {
        // P(Y(t) = r) = Σ_m P(M(t)=m) P_{0,r}(m)
        use crate::walk::simple_walk_dist;
        let d = geometric(0.6, 256);
        let clock = MLParams::new(0.7, 1.0).unwrap();
        let wp = JumpDensity::unit(crate::walk::Direction::Positive);
        let wm = JumpDensity::unit(crate::walk::Direction::Negative);
        let t = 1.5;
        let e = actrw_mc(&d, clock, &wp, &wm, &[t], 400_000, 23).unwrap();
        let (pmf, _) = {
            let c = clock_pmf_until(clock, t, CLOCK_TAIL_TOL, 10_000).unwrap();
            (c.probs, c.tail_bound)
        };
        let laws: Vec<_> = (0..pmf.len())
            .map(|m| simple_walk_dist(&d, m).unwrap())
            .collect();
        let n = e.sample_count as f64;
        let mut tvd = 0.0;
        for r in -30i64..=30 {
            let exact: f64 = pmf
                .iter()
                .zip(&laws)
                .map(|(pm, law)| pm * law.prob_at(r))
                .sum();
            let emp = e.position_hist[0].get(&r).copied().unwrap_or(0) as f64 / n;
            tvd += (emp - exact).abs();
        }
        assert!(0.5 * tvd < 0.005, "tvd {}", 0.5 * tvd);
    }

    #[test]
    fn actrw_mc_matches_pi_series() {
        let d = geometric(0.5, 512);
        let clock = MLParams::new(0.8, 1.0).unwrap();
        let wp = JumpDensity::unit(crate::walk::Direction::Positive);
        let wm = JumpDensity::unit(crate::walk::Direction::Negative);
        let times = [2.0];
        let e = actrw_mc(&d, clock, &wp, &wm, &times, 400_000, 17).unwrap();
        let v = 0.4;
        let emp = e.arrivals_pgf(0, v);
        let exact = pi_series(
            &d,
            clock,
            Complex64::new(v, 0.0),
            Complex64::new(1.0, 0.0),
            2.0,
        )
        .unwrap();
        assert!(
            (emp - exact.value.re).abs() < 0.005,
            "{emp} vs {}",
            exact.value.re
        );
    }
}
