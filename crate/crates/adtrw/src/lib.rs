//! Asymmetric discrete-time random walks driven by renewal trial processes.
//!
//! A "generator process" — a discrete-time renewal counting process N(t)
//! with waiting-time density ψ — decides the direction of every jump of a
//! lattice walk: successes jump right, fails jump left. This crate builds
//! the full analytic and stochastic toolkit around that construction:
//!
//! * [`density`]: waiting-time densities (geometric, Sibuya, shifted
//!   Poisson, trivial, tabulated), survival sequences, tail classes.
//! * [`dtrp`]: state probabilities Φ⁽ⁿ⁾(t) by stable convolution recursions
//!   and the state polynomial Λ(a,b,t) with its renewal equation.
//! * [`bell`]: incomplete/complete ordinary Bell polynomials as convolution
//!   powers, cross-linked to the state polynomial.
//! * [`walk`]: exact lattice laws of simple and general jump walks, plus
//!   deterministic sharded Monte Carlo.
//! * [`recurrence`]: expected sojourn times by residue formulas, the
//!   canonical zero r(A1), escape probabilities, asymptotic bias, and
//!   prescribed-bias inversion.
//! * [`sibuya`]: closed forms of the fat-tailed Sibuya walk and the weakly
//!   singular sojourn quadrature.
//! * [`actrw`]: the continuous-time change by a fractional-Poisson clock,
//!   Mittag-Leffler evaluation, and the composed process.
//! * [`verify`]: the acceptance suite binding it all together.

pub mod actrw;
pub mod bell;
pub mod density;
pub mod dtrp;
pub mod error;
pub mod quad;
pub mod recurrence;
pub mod series;
pub mod sibuya;
pub mod special;
pub mod verify;
pub mod walk;

pub use density::{survival, DensitySpec, SurvivalSequence, TailClass, WaitingTimeDensity};
pub use error::{AdtrwError, Result};
