use thiserror::Error;

/// Error type shared by all library operations.
///
/// `Validation`-class errors (bad parameters, contract violations) are kept
/// separate from `Envelope`-class errors (requests that are well-formed but
/// outside the numerical stability envelope) so callers can distinguish
/// "you asked wrong" from "this cannot be computed reliably in f64".
#[derive(Debug, Clone, Error)]
pub enum AdtrwError {
    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("tabulated density invalid at t={t}: {reason}")]
    BadTabulatedDensity { t: usize, reason: String },

    #[error("t_max={t_max} exceeds the density horizon T={horizon}")]
    BeyondHorizon { t_max: usize, horizon: usize },

    #[error("state-polynomial argument has modulus {modulus} > 1; normalization contract void")]
    ArgumentModulus { modulus: f64 },

    #[error("tail class is unknown; assert LightTailed or FatTailed before recurrence analytics")]
    UnknownTailClass,

    #[error("operation requires a light-tailed density")]
    RequiresLightTail,

    #[error("no interior zero: requires mean wait A1 > 2 (got A1 = {a1})")]
    NoInteriorZero { a1: f64 },

    #[error("site {site} needs derivative order {order}, above the cap {cap}")]
    DerivativeOrderCap { site: i64, order: usize, cap: usize },

    #[error("escape-probability formula holds for 1 <= A1 <= 2 only (got A1 = {a1})")]
    EscapeOutOfRange { a1: f64 },

    #[error("prescribed bias is inadmissible at t={t}: {reason}")]
    InadmissibleBias { t: usize, reason: String },

    #[error("prescribed bias is not realizable: psi({t}) = {value} is negative")]
    NonRealizableBias { t: usize, value: f64 },

    #[error("lattice window [{lo}, {hi}] too small; support requires [{need_lo}, {need_hi}]")]
    WindowTooSmall {
        lo: i64,
        hi: i64,
        need_lo: i64,
        need_hi: i64,
    },

    #[error("distribution series must start with a point mass at the origin")]
    SeriesNotAnchored,

    #[error("closed form unstable beyond t={cap}; use the convolution route")]
    ClosedFormCap { cap: usize },

    #[error("argument outside the stability envelope: {0}")]
    Envelope(String),

    #[error("alternating series lost too much precision: estimated error {estimate:.2e} (limit {limit:.2e}); reduce xi0*t^mu or use Monte Carlo")]
    Unstable { estimate: f64, limit: f64 },
}

impl AdtrwError {
    /// True for errors that mean "numerically outside the supported envelope"
    /// rather than an invalid request. The CLI maps these to exit code 2.
    pub fn is_envelope(&self) -> bool {
        matches!(self, AdtrwError::Envelope(_) | AdtrwError::Unstable { .. })
    }
}

pub type Result<T> = std::result::Result<T, AdtrwError>;
