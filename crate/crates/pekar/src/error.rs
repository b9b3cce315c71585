use pekar_core::Error;

/// Failures of a CLI invocation, each tied to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{code}: {message}")]
    Compute { code: &'static str, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute { .. } | CliError::Io(_) => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Compute { code, .. } => code,
            CliError::Io(_) => "io",
        }
    }

    pub fn compute(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Compute {
            code,
            message: message.into(),
        }
    }
}

/// Machine-readable name of a core failure.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::InvalidGrid(_) => "invalid_grid",
        Error::GridMismatch => "grid_mismatch",
        Error::NonFinite(_) => "non_finite",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::NonPositiveShot(_) => "non_positive_shot",
        Error::NoZeroFound { .. } => "no_zero_found",
        Error::BracketFailure { .. } => "bracket_failure",
        Error::NonMonotoneShooting { .. } => "non_monotone_shooting",
        Error::ScfStagnation { .. } => "scf_stagnation",
        Error::Unconverged { .. } => "unconverged",
        Error::TooManyEigenpairs { .. } => "too_many_eigenpairs",
        Error::EigenNotConverged { .. } => "eigen_not_converged",
        Error::Singular => "singular",
        Error::NeedsDirichlet => "needs_dirichlet",
        Error::DegenerateOverlap(_) => "degenerate_overlap",
        Error::NegativeGap { .. } => "negative_gap",
        Error::MachinePrecisionFloor => "machine_precision_floor",
        Error::TooFewRows { .. } => "too_few_rows",
        Error::NonMonotoneRows => "non_monotone_rows",
        Error::SupportViolation => "support_violation",
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::compute(error_code(&e), e.to_string())
    }
}
