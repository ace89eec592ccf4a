//! Exact lattice distributions of the walk and the Monte Carlo sampler.
//!
//! The walk makes one jump per time step: positive jumps (drawn from a
//! right-sided jump density) at generator successes, negative jumps (drawn
//! from a left-sided density) at fails. For the simple walk (unit jumps both
//! ways) the position is Y_t = 2 N(t) - t, so the lattice law is a reindexed
//! state-probability row:
//!
//! ```text
//! P_{0,r}(t) = Φ^((r+t)/2)(t)   for r+t even,  0 otherwise.
//! ```
//!
//! Monte Carlo trajectories sample interarrival times by inverse CDF on the
//! tabulated density. Residual tail mass beyond the horizon maps to a
//! sentinel "no further success" outcome, which is exact whenever the
//! simulated span does not exceed the horizon; sentinel draws are counted
//! and reported rather than silently renormalized away.

use crate::density::{survival, WaitingTimeDensity};
use crate::dtrp::state_row_at;
use crate::error::{AdtrwError, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// Jump direction of a one-sided jump density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Positive,
    Negative,
}

/// One-sided discrete jump density: magnitudes r = 1..=R with probabilities
/// 𝒲(r). Zero jumps are excluded by construction.
#[derive(Debug, Clone)]
pub struct JumpDensity {
    direction: Direction,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl JumpDensity {
    pub fn new(direction: Direction, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(AdtrwError::Parameter(
                "jump density needs at least one magnitude".into(),
            ));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(AdtrwError::Parameter(format!(
                    "jump probability W({}) = {p} is negative",
                    i + 1
                )));
            }
            acc += p;
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > 1e-12 {
            return Err(AdtrwError::Parameter(format!(
                "jump probabilities sum to {acc}, expected 1"
            )));
        }
        Ok(JumpDensity {
            direction,
            probs,
            cdf,
        })
    }

    /// Unit jump of the requested sign.
    pub fn unit(direction: Direction) -> Self {
        JumpDensity {
            direction,
            probs: vec![1.0],
            cdf: vec![1.0],
        }
    }

    #[inline]
    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// 𝒲(r) for r = 1..=R.
    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn max_magnitude(&self) -> usize {
        self.probs.len()
    }

    pub fn is_unit(&self) -> bool {
        self.probs.len() == 1
    }

    /// Signed jump as a lattice step.
    fn signed(&self, magnitude: usize) -> i64 {
        match self.direction {
            Direction::Positive => magnitude as i64,
            Direction::Negative => -(magnitude as i64),
        }
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c < u);
        self.signed(idx.min(self.probs.len() - 1) + 1)
    }
}

/// Probability vector over a contiguous lattice window at a fixed time.
#[derive(Debug, Clone)]
pub struct LatticeDistribution {
    pub time: usize,
    /// Lattice index of `probs[0]`.
    pub offset: i64,
    pub probs: Vec<f64>,
}

impl LatticeDistribution {
    pub fn point_mass_at_origin(time: usize) -> Self {
        LatticeDistribution {
            time,
            offset: 0,
            probs: vec![1.0],
        }
    }

    #[inline]
    pub fn prob_at(&self, site: i64) -> f64 {
        let idx = site - self.offset;
        if idx < 0 || idx as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[idx as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.offset + i as i64) as f64 * p)
            .sum()
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let off = self.offset;
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (off + i as i64, p))
    }
}

/// Simple-walk law at time t on the window [-t, t]:
/// P_{0,r}(t) = Φ^((r+t)/2)(t) on matching parity, 0 elsewhere.
pub fn simple_walk_dist(d: &WaitingTimeDensity, t: usize) -> Result<LatticeDistribution> {
    let row = state_row_at(d, t)?;
    let mut probs = vec![0.0; 2 * t + 1];
    for (n, &p) in row.iter().enumerate() {
        probs[2 * n] = p;
    }
    Ok(LatticeDistribution {
        time: t,
        offset: -(t as i64),
        probs,
    })
}

/// The drift-removed walk q(t) = 2 N(t): same row on the window [0, 2t].
/// `simple_walk_dist` is exactly this shifted by -t.
pub fn q_walk_dist(d: &WaitingTimeDensity, t: usize) -> Result<LatticeDistribution> {
    let mut dist = simple_walk_dist(d, t)?;
    dist.offset = 0;
    Ok(dist)
}

/// Return probability to the departure site: Φ^(t/2)(t) for even t, 0 for
/// odd t. For a whole series prefer [`simple_site_series`] at site 0.
pub fn return_probability(d: &WaitingTimeDensity, t: usize) -> Result<f64> {
    if t % 2 == 1 {
        return Ok(0.0);
    }
    if t == 0 {
        return Ok(1.0);
    }
    Ok(state_row_at(d, t)?[t / 2])
}

/// P_{0,site}(t) for t = 0..=t_max of the simple walk, computed along the
/// diagonal n = (t+site)/2 of the state table.
///
/// Rows Φ⁽ⁿ⁾ are swept once over moving windows just wide enough to feed the
/// diagonal, so the whole series costs O((t_max/2)³) flops but only O(t_max)
/// memory; this is what makes horizon-4096 sojourn sums tractable.
pub fn simple_site_series(d: &WaitingTimeDensity, site: i64, t_max: usize) -> Result<Vec<f64>> {
    d.require_horizon(t_max)?;
    let mut out = vec![0.0; t_max + 1];
    if site.unsigned_abs() as usize > t_max {
        return Ok(out);
    }
    let surv = survival(d);
    let psi = d.probs();

    // Output rows: n with t_out(n) = 2n - site in [|site|, t_max].
    let n_max = ((t_max as i64 + site) / 2) as usize;
    let out_time = |n: usize| 2 * n as i64 - site;

    // Window upper ends, propagated backward: row n feeds row n+1 up to
    // u_{n+1} - 1 and must reach its own output time.
    let mut upper = vec![0i64; n_max + 1];
    #[allow(clippy::needless_range_loop)] // backward recurrence on upper itself
    for n in (0..=n_max).rev() {
        let own = out_time(n);
        let feed = if n == n_max {
            i64::MIN
        } else {
            upper[n + 1] - 1
        };
        upper[n] = own.max(feed).min(t_max as i64);
    }

    // Row 0 is the survival sequence.
    let u0 = upper[0].max(0) as usize;
    let mut prev: Vec<f64> = surv.values()[..=u0].to_vec();
    let mut prev_lo = 0usize;
    {
        let t0 = out_time(0);
        if (0..=t_max as i64).contains(&t0) && t0 >= 0 {
            out[t0 as usize] = prev[t0 as usize];
        }
    }
    #[allow(clippy::needless_range_loop)] // n drives window bounds and output times
    for n in 1..=n_max {
        let lo = n;
        let hi = upper[n] as usize;
        let mut cur = vec![0.0; hi + 1];
        for s in prev_lo..prev.len() {
            let av = prev[s];
            if av == 0.0 || s + 1 > hi {
                continue;
            }
            let r_hi = (hi - s).min(psi.len());
            for r in 1..=r_hi {
                cur[s + r] += av * psi[r - 1];
            }
        }
        let t_out = out_time(n);
        if t_out >= lo as i64 && t_out <= hi as i64 {
            out[t_out as usize] = cur[t_out as usize];
        }
        prev = cur;
        prev_lo = lo;
    }
    Ok(out)
}

/// Lattice vector with explicit offset, for jump-density convolutions.
#[derive(Debug, Clone)]
struct LatticeVec {
    offset: i64,
    vals: Vec<f64>,
}

impl LatticeVec {
    fn delta() -> Self {
        LatticeVec {
            offset: 0,
            vals: vec![1.0],
        }
    }

    fn convolve(&self, other: &LatticeVec) -> LatticeVec {
        let mut vals = vec![0.0; self.vals.len() + other.vals.len() - 1];
        for (i, &a) in self.vals.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.vals.iter().enumerate() {
                vals[i + j] += a * b;
            }
        }
        LatticeVec {
            offset: self.offset + other.offset,
            vals,
        }
    }
}

fn jump_lattice(w: &JumpDensity) -> LatticeVec {
    match w.direction() {
        Direction::Positive => LatticeVec {
            offset: 1,
            vals: w.probs().to_vec(),
        },
        Direction::Negative => {
            let mut vals = w.probs().to_vec();
            vals.reverse();
            LatticeVec {
                offset: -(w.probs().len() as i64),
                vals,
            }
        }
    }
}

/// General walk law at time t:
/// P_{0,·}(t) = Σ_n Φ⁽ⁿ⁾(t) · ([𝒲⁺⋆]ⁿ ⋆ [𝒲⁻⋆]^(t-n)),
/// evaluated as lattice convolutions. The requested window must cover the
/// reachable support; the result reduces to [`simple_walk_dist`] when both
/// jump densities are unit point masses.
pub fn general_walk_dist(
    d: &WaitingTimeDensity,
    wplus: &JumpDensity,
    wminus: &JumpDensity,
    t: usize,
    window: (i64, i64),
) -> Result<LatticeDistribution> {
    if wplus.direction() != Direction::Positive || wminus.direction() != Direction::Negative {
        return Err(AdtrwError::Parameter(
            "general_walk_dist needs a positive and a negative jump density, in that order".into(),
        ));
    }
    let need_lo = -((t * wminus.max_magnitude()) as i64);
    let need_hi = (t * wplus.max_magnitude()) as i64;
    let (lo, hi) = window;
    if lo > need_lo || hi < need_hi {
        return Err(AdtrwError::WindowTooSmall {
            lo,
            hi,
            need_lo,
            need_hi,
        });
    }
    let row = state_row_at(d, t)?;
    let wp = jump_lattice(wplus);
    let wm = jump_lattice(wminus);

    let mut neg_powers = Vec::with_capacity(t + 1);
    neg_powers.push(LatticeVec::delta());
    for m in 1..=t {
        let next = neg_powers[m - 1].convolve(&wm);
        neg_powers.push(next);
    }

    let mut probs = vec![0.0; (hi - lo + 1) as usize];
    let mut pos_power = LatticeVec::delta();
    for (n, &weight) in row.iter().enumerate() {
        if n > 0 {
            pos_power = pos_power.convolve(&wp);
        }
        if weight == 0.0 {
            continue;
        }
        let term = pos_power.convolve(&neg_powers[t - n]);
        for (i, &v) in term.vals.iter().enumerate() {
            let site = term.offset + i as i64;
            probs[(site - lo) as usize] += weight * v;
        }
    }
    Ok(LatticeDistribution {
        time: t,
        offset: lo,
        probs,
    })
}

/// Max residual of the simple-walk renewal identity over a distribution
/// series anchored at t = 0:
///
/// ```text
/// P_{0,j}(t) = Φ⁽⁰⁾(t) δ_{0,j+t} + Σ_{r=1..t} ψ(r) P_{0,j+r-2}(t-r)
/// ```
///
/// A correct series yields < 1e-10; a perturbation of size ε shows up as a
/// residual >= ε.
pub fn renewal_residual(d: &WaitingTimeDensity, series: &[LatticeDistribution]) -> Result<f64> {
    let first = series.first().ok_or(AdtrwError::SeriesNotAnchored)?;
    if (first.prob_at(0) - 1.0).abs() > 1e-12 || (first.total() - 1.0).abs() > 1e-12 {
        return Err(AdtrwError::SeriesNotAnchored);
    }
    let surv = survival(d);
    let mut worst: f64 = 0.0;
    for (t, dist) in series.iter().enumerate().skip(1) {
        d.require_horizon(t)?;
        for j in -(t as i64)..=(t as i64) {
            let mut expect = if j + (t as i64) == 0 { surv.at(t) } else { 0.0 };
            for r in 1..=t {
                let p = d.psi(r);
                if p == 0.0 {
                    continue;
                }
                expect += p * series[t - r].prob_at(j + r as i64 - 2);
            }
            worst = worst.max((dist.prob_at(j) - expect).abs());
        }
    }
    Ok(worst)
}

/// Observable counts of a Monte Carlo walk ensemble. All fields are integer
/// accumulators so shard merging is exact and order-independent.
#[derive(Debug, Clone)]
pub struct McEnsemble {
    pub sample_count: u64,
    pub seed: u64,
    pub t_max: usize,
    /// `histograms[t]`: counts over a dense window, `hist_offsets[t]` is the
    /// site of index 0. Each histogram has total mass `sample_count`.
    pub histograms: Vec<Vec<u64>>,
    pub hist_offsets: Vec<i64>,
    /// Sum of positions per time step, for the empirical mean series.
    pub position_sums: Vec<i128>,
    /// `first_return_counts[t]` = walks whose first return to 0 happened at t;
    /// index 0 unused.
    pub first_return_counts: Vec<u64>,
    pub never_returned: u64,
    /// Interarrival draws that fell beyond the tabulated horizon.
    pub truncated_draws: u64,
}

impl McEnsemble {
    fn empty(t_max: usize, seed: u64, wplus: &JumpDensity, wminus: &JumpDensity) -> Self {
        let mut histograms = Vec::with_capacity(t_max + 1);
        let mut hist_offsets = Vec::with_capacity(t_max + 1);
        for t in 0..=t_max {
            let lo = -((t * wminus.max_magnitude()) as i64);
            let hi = (t * wplus.max_magnitude()) as i64;
            histograms.push(vec![0u64; (hi - lo + 1) as usize]);
            hist_offsets.push(lo);
        }
        McEnsemble {
            sample_count: 0,
            seed,
            t_max,
            histograms,
            hist_offsets,
            position_sums: vec![0; t_max + 1],
            first_return_counts: vec![0; t_max + 1],
            never_returned: 0,
            truncated_draws: 0,
        }
    }

    fn merge(mut self, other: McEnsemble) -> McEnsemble {
        self.sample_count += other.sample_count;
        self.never_returned += other.never_returned;
        self.truncated_draws += other.truncated_draws;
        for t in 0..=self.t_max {
            for (a, b) in self.histograms[t].iter_mut().zip(&other.histograms[t]) {
                *a += b;
            }
            self.position_sums[t] += other.position_sums[t];
            self.first_return_counts[t] += other.first_return_counts[t];
        }
        self
    }

    /// Empirical mean position per time step.
    pub fn mean_positions(&self) -> Vec<f64> {
        self.position_sums
            .iter()
            .map(|&s| s as f64 / self.sample_count as f64)
            .collect()
    }

    /// Empirical distribution at time t.
    pub fn empirical(&self, t: usize) -> LatticeDistribution {
        let n = self.sample_count as f64;
        LatticeDistribution {
            time: t,
            offset: self.hist_offsets[t],
            probs: self.histograms[t].iter().map(|&c| c as f64 / n).collect(),
        }
    }

    /// Fraction of walks that returned to the departure site within t_max.
    pub fn return_frequency(&self) -> f64 {
        let returned: u64 = self.first_return_counts.iter().sum();
        returned as f64 / self.sample_count as f64
    }
}

/// Total variation distance between an empirical histogram and an exact law.
pub fn tvd(empirical: &LatticeDistribution, exact: &LatticeDistribution) -> f64 {
    let lo = empirical.offset.min(exact.offset);
    let hi = (empirical.offset + empirical.probs.len() as i64)
        .max(exact.offset + exact.probs.len() as i64);
    let mut acc = 0.0;
    for site in lo..hi {
        acc += (empirical.prob_at(site) - exact.prob_at(site)).abs();
    }
    0.5 * acc
}

/// Shard size for deterministic Monte Carlo parallelism. Each shard owns an
/// RNG stream derived from (seed, shard index) and merging is integer
/// addition, so results are identical regardless of scheduling.
pub const MC_SHARD_SIZE: u64 = 1 << 14;

/// Number of independent RNG shards a sample count splits into.
pub fn shard_count(n_samples: u64) -> u64 {
    n_samples.div_ceil(MC_SHARD_SIZE)
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(shard + 1);
    rng
}

struct PsiSampler {
    cdf: Vec<f64>,
}

enum WaitDraw {
    At(usize),
    BeyondHorizon,
}

impl PsiSampler {
    fn new(d: &WaitingTimeDensity) -> Self {
        let mut cdf = Vec::with_capacity(d.horizon());
        let mut acc = 0.0;
        for &p in d.probs() {
            acc += p;
            cdf.push(acc);
        }
        PsiSampler { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> WaitDraw {
        let u: f64 = rng.random();
        let total = *self.cdf.last().unwrap();
        if u >= total {
            return WaitDraw::BeyondHorizon;
        }
        WaitDraw::At(self.cdf.partition_point(|&c| c <= u) + 1)
    }
}

/// Sample `n_samples` trajectories up to `t_max`, deterministic in `seed`.
///
/// A trajectory draws its next success time from ψ; fails jump negative,
/// successes jump positive. A draw beyond the horizon means no further
/// success within the tabulated range, which is exact for spans <= horizon
/// (the precondition), and is tallied in `truncated_draws`.
pub fn mc_sample(
    d: &WaitingTimeDensity,
    wplus: &JumpDensity,
    wminus: &JumpDensity,
    t_max: usize,
    n_samples: u64,
    seed: u64,
) -> Result<McEnsemble> {
    if n_samples == 0 {
        return Err(AdtrwError::Parameter("n_samples must be >= 1".into()));
    }
    d.require_horizon(t_max)?;
    let sampler = PsiSampler::new(d);
    let n_shards = n_samples.div_ceil(MC_SHARD_SIZE);
    let result = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let lo = shard * MC_SHARD_SIZE;
            let hi = (lo + MC_SHARD_SIZE).min(n_samples);
            let mut rng = shard_rng(seed, shard);
            let mut acc = McEnsemble::empty(t_max, seed, wplus, wminus);
            for _ in lo..hi {
                simulate_walk(&sampler, wplus, wminus, t_max, &mut rng, &mut acc);
            }
            acc
        })
        .reduce_with(McEnsemble::merge)
        .expect("at least one shard");
    Ok(result)
}

fn simulate_walk<R: Rng>(
    sampler: &PsiSampler,
    wplus: &JumpDensity,
    wminus: &JumpDensity,
    t_max: usize,
    rng: &mut R,
    acc: &mut McEnsemble,
) {
    acc.sample_count += 1;
    let mut pos: i64 = 0;
    let mut returned = false;
    acc.histograms[0][(0 - acc.hist_offsets[0]) as usize] += 1;
    let mut countdown = match sampler.sample(rng) {
        WaitDraw::At(k) => Some(k),
        WaitDraw::BeyondHorizon => {
            acc.truncated_draws += 1;
            None
        }
    };
    for t in 1..=t_max {
        let success = match countdown.as_mut() {
            Some(c) => {
                *c -= 1;
                *c == 0
            }
            None => false,
        };
        if success {
            pos += wplus.sample(rng);
            countdown = match sampler.sample(rng) {
                WaitDraw::At(k) => Some(k),
                WaitDraw::BeyondHorizon => {
                    acc.truncated_draws += 1;
                    None
                }
            };
        } else {
            pos += wminus.sample(rng);
        }
        acc.histograms[t][(pos - acc.hist_offsets[t]) as usize] += 1;
        acc.position_sums[t] += pos as i128;
        if !returned && pos == 0 {
            acc.first_return_counts[t] += 1;
            returned = true;
        }
    }
    if !returned {
        acc.never_returned += 1;
    }
}

/// First-return statistics of the simple walk, simulated per arrival rather
/// than per step (the walk only touches the origin at even times t = 2k with
/// S_k <= 2k < S_(k+1), where S_k is the k-th success time).
#[derive(Debug, Clone, Default)]
pub struct FirstReturnStats {
    pub sample_count: u64,
    pub returned: u64,
    pub no_return: u64,
    pub truncated_draws: u64,
    /// Sum of first-return times of returned walks.
    pub return_time_sum: u128,
}

impl FirstReturnStats {
    fn merge(mut self, o: FirstReturnStats) -> FirstReturnStats {
        self.sample_count += o.sample_count;
        self.returned += o.returned;
        self.no_return += o.no_return;
        self.truncated_draws += o.truncated_draws;
        self.return_time_sum += o.return_time_sum;
        self
    }

    pub fn frequency(&self) -> f64 {
        self.returned as f64 / self.sample_count as f64
    }
}

/// Empirical first-return frequency for the simple walk within `t_max`.
pub fn mc_first_return(
    d: &WaitingTimeDensity,
    t_max: usize,
    n_samples: u64,
    seed: u64,
) -> Result<FirstReturnStats> {
    if n_samples == 0 {
        return Err(AdtrwError::Parameter("n_samples must be >= 1".into()));
    }
    d.require_horizon(t_max)?;
    let sampler = PsiSampler::new(d);
    let n_shards = n_samples.div_ceil(MC_SHARD_SIZE);
    let stats = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let lo = shard * MC_SHARD_SIZE;
            let hi = (lo + MC_SHARD_SIZE).min(n_samples);
            let mut rng = shard_rng(seed, shard);
            let mut acc = FirstReturnStats::default();
            for _ in lo..hi {
                acc.sample_count += 1;
                match first_return_time(&sampler, t_max, &mut rng, &mut acc.truncated_draws) {
                    Some(t) => {
                        acc.returned += 1;
                        acc.return_time_sum += t as u128;
                    }
                    None => acc.no_return += 1,
                }
            }
            acc
        })
        .reduce_with(FirstReturnStats::merge)
        .expect("at least one shard");
    Ok(stats)
}

fn first_return_time<R: Rng>(
    sampler: &PsiSampler,
    t_max: usize,
    rng: &mut R,
    truncated: &mut u64,
) -> Option<usize> {
    let mut s: usize = 0; // S_k
    let mut k: usize = 0;
    loop {
        let tau = match sampler.sample(rng) {
            WaitDraw::At(v) => v,
            WaitDraw::BeyondHorizon => {
                *truncated += 1;
                // S_(k+1) = infinity: the walk descends forever after S_k.
                return if k >= 1 && s <= 2 * k && 2 * k <= t_max {
                    Some(2 * k)
                } else {
                    None
                };
            }
        };
        let s_next = s + tau;
        if k >= 1 && s <= 2 * k && 2 * k < s_next && 2 * k <= t_max {
            return Some(2 * k);
        }
        if s_next > t_max {
            // Any later candidate 2k' <= t_max would need S_k' <= 2k', but
            // arrivals are already past the horizon.
            return None;
        }
        s = s_next;
        k += 1;
    }
}
