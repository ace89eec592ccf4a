//! Discrete waiting-time densities for the generator process.
//!
//! A generator process is a discrete-time renewal process whose IID
//! interarrival times ("trials until the next success") follow a density
//! ψ(t) supported on t = 1, 2, … . Everything downstream — state tables,
//! lattice walks, recurrence analytics — is driven by a tabulated prefix
//! ψ(1..T) of that density.
//!
//! Densities are stored truncated at a horizon T with the truncated tail
//! mass kept as an explicit `mass_deficit`; operations that need times up to
//! `t_max` require `t_max <= T`, so no silent tail extrapolation happens.

use crate::error::{AdtrwError, Result};
use crate::special::binom_real;
use std::path::{Path, PathBuf};

/// Validation tolerance for probability mass bookkeeping. Sums of positive
/// terms in f64 stay well inside this for any horizon we tabulate.
pub const MASS_TOL: f64 = 1e-12;

/// Tail classification of a waiting-time density.
///
/// Light-tailed (LT): geometric-or-faster decay, finite mean wait A1.
/// Fat-tailed (FT): power-law tail with index `mu` in (0,1), infinite A1;
/// `a_mu` is the amplitude of the `(1-u)^mu` branch point of the generating
/// function at u = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    LightTailed,
    FatTailed { mu: f64, a_mu: f64 },
    Unknown,
}

/// Built-in and user-supplied density families.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    /// ψ(t) = p (1-p)^(t-1): Bernoulli trials with success probability p.
    Geometric { p: f64 },
    /// ψ(t) = (-1)^(t-1) C(β, t): fat-tailed, hazard β/t.
    Sibuya { beta: f64 },
    /// ψ(t) = e^(-λ) λ^(t-1) / (t-1)!: Poisson shifted to support t >= 1.
    ShiftedPoisson { lambda: f64 },
    /// ψ(t) = δ_{t,1}: every trial succeeds.
    Trivial,
    /// Explicit table for t = 1, 2, …
    Tabulated(Vec<f64>),
    /// Table read from a file, one probability per line for t = 1, 2, …
    File(PathBuf),
}

impl DensitySpec {
    /// Parse the density spec grammar used by the CLI and config files:
    /// `geometric:p=<real>`, `sibuya:beta=<real>`, `poisson:lambda=<real>`,
    /// `trivial`, `file:<path>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "trivial" {
            return Ok(DensitySpec::Trivial);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(DensitySpec::File(PathBuf::from(path)));
        }
        let (family, arg) = s
            .split_once(':')
            .ok_or_else(|| AdtrwError::Parameter(format!("unrecognized density spec `{s}`")))?;
        let parse_named = |name: &str| -> Result<f64> {
            let (key, val) = arg.split_once('=').ok_or_else(|| {
                AdtrwError::Parameter(format!("expected `{family}:{name}=<real>`, got `{s}`"))
            })?;
            if key != name {
                return Err(AdtrwError::Parameter(format!(
                    "expected parameter `{name}` for `{family}`, got `{key}`"
                )));
            }
            val.parse::<f64>()
                .map_err(|_| AdtrwError::Parameter(format!("cannot parse `{val}` as a real")))
        };
        match family {
            "geometric" => Ok(DensitySpec::Geometric {
                p: parse_named("p")?,
            }),
            "sibuya" => Ok(DensitySpec::Sibuya {
                beta: parse_named("beta")?,
            }),
            "poisson" => Ok(DensitySpec::ShiftedPoisson {
                lambda: parse_named("lambda")?,
            }),
            other => Err(AdtrwError::Parameter(format!(
                "unknown density family `{other}`"
            ))),
        }
    }

    fn load_file(path: &Path) -> Result<Vec<f64>> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AdtrwError::Parameter(format!("cannot read density file {}: {e}", path.display()))
        })?;
        let mut probs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| {
                AdtrwError::Parameter(format!(
                    "{}:{}: cannot parse `{line}` as a real",
                    path.display(),
                    lineno + 1
                ))
            })?;
            probs.push(v);
        }
        Ok(probs)
    }
}

/// Tabulated waiting-time density ψ(1..T) plus tail metadata.
#[derive(Debug, Clone)]
pub struct WaitingTimeDensity {
    /// ψ(t) for t = 1..=T; `probs[k]` holds ψ(k+1). ψ(0) is not stored:
    /// the minimum waiting time between successes is one trial.
    probs: Vec<f64>,
    tail_class: TailClass,
    /// Expected interarrival time A1 = Σ t ψ(t), analytic for built-ins,
    /// `None` when infinite (fat tails) or not known (tabulated input).
    mean_wait: Option<f64>,
    /// ψ(1), the probability of success at the first trial.
    alpha1: f64,
    /// 1 - Σ ψ(t): probability mass beyond the tabulated horizon.
    mass_deficit: f64,
}

impl WaitingTimeDensity {
    /// Tabulate a density up to `horizon`. Built-in families get their tail
    /// class and mean wait set analytically; tabulated input is `Unknown`
    /// until the caller asserts a class.
    pub fn new(spec: &DensitySpec, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(AdtrwError::Parameter("horizon must be >= 1".into()));
        }
        let (probs, tail_class, mean_wait) = match spec {
            DensitySpec::Geometric { p } => {
                let p = *p;
                if p.is_nan() || p <= 0.0 || p > 1.0 {
                    return Err(AdtrwError::Parameter(format!(
                        "geometric requires p in (0,1], got {p}"
                    )));
                }
                let q = 1.0 - p;
                let mut probs = Vec::with_capacity(horizon);
                let mut mass = p;
                for _ in 0..horizon {
                    probs.push(mass);
                    mass *= q;
                }
                (probs, TailClass::LightTailed, Some(1.0 / p))
            }
            DensitySpec::Sibuya { beta } => {
                let beta = *beta;
                if beta.is_nan() || beta <= 0.0 || beta >= 1.0 {
                    return Err(AdtrwError::Parameter(format!(
                        "sibuya requires beta in (0,1), got {beta}"
                    )));
                }
                // psi(1) = beta, psi(k+1) = psi(k) (k - beta) / (k + 1):
                // the positive-product form of (-1)^(k-1) C(beta, k).
                let mut probs = Vec::with_capacity(horizon);
                let mut mass = beta;
                for k in 1..=horizon {
                    probs.push(mass);
                    mass *= (k as f64 - beta) / (k as f64 + 1.0);
                }
                (
                    probs,
                    TailClass::FatTailed {
                        mu: beta,
                        a_mu: 1.0,
                    },
                    None,
                )
            }
            DensitySpec::ShiftedPoisson { lambda } => {
                let lambda = *lambda;
                if lambda.is_nan() || lambda < 0.0 {
                    return Err(AdtrwError::Parameter(format!(
                        "poisson requires lambda >= 0, got {lambda}"
                    )));
                }
                let mut probs = Vec::with_capacity(horizon);
                let mut mass = (-lambda).exp();
                for t in 1..=horizon {
                    probs.push(mass);
                    mass *= lambda / t as f64;
                }
                (probs, TailClass::LightTailed, Some(1.0 + lambda))
            }
            DensitySpec::Trivial => {
                let mut probs = vec![0.0; horizon];
                probs[0] = 1.0;
                (probs, TailClass::LightTailed, Some(1.0))
            }
            DensitySpec::Tabulated(list) => {
                let mut probs = list.clone();
                probs.truncate(horizon);
                probs.resize(horizon, 0.0);
                (probs, TailClass::Unknown, None)
            }
            DensitySpec::File(path) => {
                let mut probs = DensitySpec::load_file(path)?;
                probs.truncate(horizon);
                probs.resize(horizon, 0.0);
                (probs, TailClass::Unknown, None)
            }
        };

        let mut partial = 0.0;
        for (k, &p) in probs.iter().enumerate() {
            if p < 0.0 {
                return Err(AdtrwError::BadTabulatedDensity {
                    t: k + 1,
                    reason: format!("negative entry {p}"),
                });
            }
            partial += p;
            if partial > 1.0 + MASS_TOL {
                return Err(AdtrwError::BadTabulatedDensity {
                    t: k + 1,
                    reason: format!("partial sum {partial} exceeds 1"),
                });
            }
        }
        let alpha1 = probs[0];
        Ok(WaitingTimeDensity {
            probs,
            tail_class,
            mean_wait,
            alpha1,
            mass_deficit: (1.0 - partial).max(0.0),
        })
    }

    /// Construct directly from an explicit table (horizon = table length).
    pub fn from_table(probs: Vec<f64>) -> Result<Self> {
        let horizon = probs.len();
        Self::new(&DensitySpec::Tabulated(probs), horizon)
    }

    /// ψ(t); zero outside 1..=T.
    #[inline]
    pub fn psi(&self, t: usize) -> f64 {
        if t >= 1 && t <= self.probs.len() {
            self.probs[t - 1]
        } else {
            0.0
        }
    }

    /// The tabulated values ψ(1), ψ(2), …, ψ(T) in order.
    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn horizon(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn tail_class(&self) -> TailClass {
        self.tail_class
    }

    /// A1 when known finite.
    #[inline]
    pub fn mean_wait(&self) -> Option<f64> {
        self.mean_wait
    }

    #[inline]
    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    #[inline]
    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }

    /// Caller-asserted tail class for tabulated densities (recurrence
    /// analytics refuse `Unknown` otherwise). Asserting `LightTailed`
    /// computes A1 from the table.
    pub fn with_tail_class(mut self, class: TailClass) -> Self {
        self.tail_class = class;
        self.mean_wait = match class {
            TailClass::LightTailed => Some(
                self.probs
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (k as f64 + 1.0) * p)
                    .sum(),
            ),
            _ => None,
        };
        self
    }

    /// Check that a requested time range is tabulated.
    pub fn require_horizon(&self, t_max: usize) -> Result<()> {
        if t_max > self.horizon() {
            Err(AdtrwError::BeyondHorizon {
                t_max,
                horizon: self.horizon(),
            })
        } else {
            Ok(())
        }
    }
}

/// Survival probabilities S(t) = P(no success in t trials), t = 0..=T.
#[derive(Debug, Clone)]
pub struct SurvivalSequence {
    values: Vec<f64>,
}

impl SurvivalSequence {
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// S(0) = 1, S(t) = S(t-1) - ψ(t). Positive-term bookkeeping; values a few
/// ulp below zero (truncation dust) are clamped to 0.
pub fn survival(d: &WaitingTimeDensity) -> SurvivalSequence {
    let mut values = Vec::with_capacity(d.horizon() + 1);
    let mut s = 1.0;
    values.push(s);
    for &p in d.probs() {
        s -= p;
        if s < 0.0 {
            s = 0.0;
        }
        values.push(s);
    }
    SurvivalSequence { values }
}

/// Exact Sibuya survival S_β(k) = (-1)^k C(β-1, k), used as a test oracle
/// and for tail metadata.
pub fn sibuya_survival_exact(beta: f64, k: u64) -> f64 {
    if k.is_multiple_of(2) {
        binom_real(beta - 1.0, k)
    } else {
        -binom_real(beta - 1.0, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_table_and_mean() {
        let d = WaitingTimeDensity::new(&DensitySpec::Geometric { p: 0.5 }, 3).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.25, 0.125]);
        assert_eq!(d.mean_wait(), Some(2.0));
        assert_eq!(d.tail_class(), TailClass::LightTailed);
        assert_eq!(d.alpha1(), 0.5);
    }

    #[test]
    fn trivial_table() {
        let d = WaitingTimeDensity::new(&DensitySpec::Trivial, 2).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0]);
        assert_eq!(d.mean_wait(), Some(1.0));
        assert_eq!(d.mass_deficit(), 0.0);
    }

    #[test]
    fn sibuya_table_matches_binomial_form() {
        let d = WaitingTimeDensity::new(&DensitySpec::Sibuya { beta: 0.5 }, 3).unwrap();
        let expect = [0.5, 0.125, 0.0625];
        for (a, b) in d.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        // against the alternating binomial directly
        for k in 1..=3u64 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let direct = sign * binom_real(0.5, k);
            assert!((d.psi(k as usize) - direct).abs() < 1e-15);
        }
        assert!(matches!(d.tail_class(), TailClass::FatTailed { .. }));
        assert_eq!(d.mean_wait(), None);
    }

    #[test]
    fn shifted_poisson_table() {
        let lam: f64 = 1.5;
        let d = WaitingTimeDensity::new(&DensitySpec::ShiftedPoisson { lambda: lam }, 4).unwrap();
        assert!((d.psi(1) - (-lam).exp()).abs() < 1e-15);
        assert!((d.psi(3) - (-lam).exp() * lam * lam / 2.0).abs() < 1e-15);
        assert_eq!(d.mean_wait(), Some(2.5));
    }

    #[test]
    fn survival_geometric_is_q_power() {
        let d = WaitingTimeDensity::new(&DensitySpec::Geometric { p: 0.5 }, 8).unwrap();
        let s = survival(&d);
        for t in 0..=8 {
            assert!((s.at(t) - 0.5f64.powi(t as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn survival_sibuya_matches_exact() {
        let d = WaitingTimeDensity::new(&DensitySpec::Sibuya { beta: 0.5 }, 16).unwrap();
        let s = survival(&d);
        assert!((s.at(2) - 0.375).abs() < 1e-15);
        for t in 0..=16 {
            assert!((s.at(t) - sibuya_survival_exact(0.5, t as u64)).abs() < 1e-13);
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(WaitingTimeDensity::from_table(vec![0.5, -0.1]).is_err());
        assert!(WaitingTimeDensity::from_table(vec![0.9, 0.2]).is_err());
        let d = WaitingTimeDensity::from_table(vec![0.5, 0.25]).unwrap();
        assert_eq!(d.tail_class(), TailClass::Unknown);
        assert!((d.mass_deficit() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parameter_rejection() {
        assert!(WaitingTimeDensity::new(&DensitySpec::Geometric { p: 0.0 }, 4).is_err());
        assert!(WaitingTimeDensity::new(&DensitySpec::Geometric { p: 1.5 }, 4).is_err());
        assert!(WaitingTimeDensity::new(&DensitySpec::Sibuya { beta: 1.0 }, 4).is_err());
        assert!(WaitingTimeDensity::new(&DensitySpec::ShiftedPoisson { lambda: -1.0 }, 4).is_err());
        assert!(WaitingTimeDensity::new(&DensitySpec::Trivial, 0).is_err());
    }

    #[test]
    fn spec_grammar() {
        assert_eq!(
            DensitySpec::parse("geometric:p=0.6").unwrap(),
            DensitySpec::Geometric { p: 0.6 }
        );
        assert_eq!(
            DensitySpec::parse("sibuya:beta=0.5").unwrap(),
            DensitySpec::Sibuya { beta: 0.5 }
        );
        assert_eq!(
            DensitySpec::parse("poisson:lambda=1.5").unwrap(),
            DensitySpec::ShiftedPoisson { lambda: 1.5 }
        );
        assert_eq!(DensitySpec::parse("trivial").unwrap(), DensitySpec::Trivial);
        assert!(matches!(
            DensitySpec::parse("file:/tmp/x.txt").unwrap(),
            DensitySpec::File(_)
        ));
        assert!(DensitySpec::parse("cauchy:g=1").is_err());
        assert!(DensitySpec::parse("geometric:q=0.6").is_err());
    }
}
