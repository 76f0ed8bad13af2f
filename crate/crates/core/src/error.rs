use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("operator is not a contraction (norm {norm})")]
    NotAContraction { norm: f64 },
    #[error("no Douglas factorization, residual {residual:e}")]
    NoFactorization { residual: f64 },
    #[error("right-hand side is not in the range of the defect operator, residual {residual:e}")]
    NotSolvable { residual: f64 },
    #[error("operator is not co-isometric, defect {defect:e}")]
    NotCoisometric { defect: f64 },
    #[error("operator is not isometric, defect {defect:e}")]
    NotIsometric { defect: f64 },
    #[error("system is not observable, unobservable subspace has dimension {kernel_dim}")]
    NotObservable { kernel_dim: usize },
    #[error("resolvent I - lambda Z is numerically singular")]
    ResolventSingular,
    #[error("I - Psi11 V is numerically singular")]
    FractionSingular,
    #[error("feedback operator I - Z2 Z1 is numerically singular")]
    FeedbackSingular,
    #[error("parameter is not in the open unit ball, norm {norm}")]
    NotOpenBall { norm: f64 },
    #[error("inconsistent data, residual {residual:e}")]
    InconsistentData { residual: f64 },
    #[error("feedthrough into the first output block is nonzero, norm {norm:e}")]
    FeedthroughNonzero { norm: f64 },
    #[error("kernel extraction failed, first output row block is not co-isometric (defect {defect:e})")]
    KernelExtraction { defect: f64 },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
