use std::fmt;

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, unreadable config or data, IO errors. Exit code 1.
    Usage(anyhow::Error),
    /// Non-finite loss, ill-conditioned matrices, failed decompositions. Exit code 2.
    Numeric(anyhow::Error),
    /// A theory check ran and found violations. Exit code 3.
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Violation(_) => 3,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Numeric(e) => write!(f, "{e:#}"),
            Failure::Violation(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl From<msa_core::Error> for Failure {
    fn from(e: msa_core::Error) -> Self {
        use msa_core::Error as E;
        match e {
            E::NonFinite(_)
            | E::NonFiniteLoss { .. }
            | E::IllConditioned { .. }
            | E::DiagonalizationFailed { .. }
            | E::NoCommonEigenvector { .. }
            | E::NoConvergence
            | E::UnpairedSpectrum(_) => Failure::Numeric(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.into())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

/// Attaches a path or other context to an IO-style failure.
pub trait Context<T> {
    fn context(self, what: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<Failure>> Context<T> for Result<T, E> {
    fn context(self, what: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| match e.into() {
            Failure::Usage(inner) => Failure::Usage(inner.context(what.to_string())),
            Failure::Numeric(inner) => Failure::Numeric(inner.context(what.to_string())),
            v => v,
        })
    }
}
