use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: must be {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error(
        "quadrature did not converge{context}: error estimate {error:.3e} > tolerance \
         {tolerance:.3e} after {panels} panels"
    )]
    QuadratureDidNotConverge {
        error: f64,
        tolerance: f64,
        panels: usize,
        context: String,
    },

    #[error(
        "incident energy sits exactly on the channel-{m_bar} threshold; the kernel diverges \
         logarithmically there"
    )]
    ThresholdSingularity { m_bar: usize },

    #[error("linear system is singular (pivot magnitude {pivot:.3e})")]
    SingularSystem { pivot: f64 },

    #[error("solution residual {residual:.3e} exceeds {bound:.3e}; system too ill-conditioned")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("requested truncation {requested} exceeds the kernel's n_max {available}")]
    TruncationMismatch { requested: usize, available: usize },

    #[error(
        "kernel was built for total energy {kernel_energy} but the solve requests {requested}"
    )]
    EnergyMismatch { kernel_energy: f64, requested: f64 },

    #[error("channel {n} is closed; it has no outgoing frequency")]
    ClosedChannel { n: usize },

    #[error("peak finding needs at least 3 samples, got {got}")]
    TooFewSamples { got: usize },

    #[error("invalid sweep request: {0}")]
    InvalidSweep(String),
}
