use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("searcher id {id} outside 1..={k}")]
    InvalidSearcherId { id: u32, k: u32 },

    #[error("x_max = {x_max} is below the support bound {required} for t = {t}")]
    BelowSupport { x_max: u64, required: u64, t: u64 },

    #[error("tail bound {tail_bound:e} still above target {target:e} after step cap {step_cap}")]
    StepCapReached {
        step_cap: u64,
        tail_bound: f64,
        target: f64,
    },

    #[error("series diverges: delta * k = {delta_k} must exceed 1")]
    Diverges { delta_k: f64 },

    #[error("root bracket [{lo}, {hi}] does not change sign")]
    Bracketing { lo: f64, hi: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("{count} of {trials} trials hit the step cap; refusing to report a mean")]
    NonDiscovery { count: u64, trials: u64 },

    #[error("perturbation outside the sublinear-drift family: {0}")]
    Perturbation(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
