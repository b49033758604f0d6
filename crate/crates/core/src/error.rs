use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("transition matrices do not commute: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotCommuting { defect: f64, tol: f64 },

    #[error("alphabets differ ({left:?} vs {right:?}); enable padding to fill missing symbols with zero matrices")]
    AlphabetMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("matrix is singular or ill-conditioned (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error(
        "enumerating {count} multisets exceeds the budget of {budget}; use a smaller max_size"
    )]
    EnumerationBudget { count: u128, budget: u128 },

    #[error("diagonalization failed after {retries} retries (smallest eigenvalue gap {gap:.3e})")]
    DiagonalizationFailed { retries: usize, gap: f64 },

    #[error("no common eigenvector within tolerance (residual {residual:.3e}); inputs are too far from commuting")]
    NoCommonEigenvector { residual: f64 },

    #[error("Schur decomposition did not converge")]
    NoConvergence,

    #[error("spectrum is not closed under conjugation; unmatched entries {0:?}")]
    UnpairedSpectrum(Vec<Complex64>),

    #[error("loss is not finite at epoch {epoch}, {} (learning rate {lr:e})", match batch {
        Some(b) => format!("batch {b}"),
        None => "after the epoch".to_string(),
    })]
    NonFiniteLoss {
        epoch: usize,
        /// `None` when the loss blew up while scoring the monitored split.
        batch: Option<usize>,
        lr: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
