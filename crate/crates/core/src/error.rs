use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Every variant belongs to one [`ExitClass`], which the CLI turns into its
/// process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("invalid parameters: {0}")]
    Validation(String),

    #[error("{what} is outside the first Brillouin zone (|k| = {k:e}, limit {limit:e})")]
    OutsideZone { what: &'static str, k: f64, limit: f64 },

    #[error("singular expression: {0}")]
    Singular(&'static str),

    #[error("overdamped regime (D = {damping:e} > 2|C_k| = {threshold:e}): variance sum has no real value")]
    Overdamped { damping: f64, threshold: f64 },

    #[error("imaginary residue {residue:e} exceeds tolerance relative to real part {real:e}")]
    ImaginaryResidue { residue: f64, real: f64 },

    #[error("ODE step controller failed at t = {t:e}: {reason}")]
    StepControl { t: f64, reason: &'static str },

    #[error("minimizer did not converge after {iterations} iterations (max force {max_force:e})")]
    NoConvergence { iterations: usize, max_force: f64 },

    #[error("molecules coincide or change order at index {0}")]
    Ordering(usize),

    #[error("Hessian has negative eigenvalue {value:e} (largest {largest:e}); configuration is not a minimum")]
    NotAMinimum { value: f64, largest: f64 },

    #[error("truncated basis too small: tail probability {tail_mass:e} with cutoff {n_max}")]
    CutoffLimited { tail_mass: f64, n_max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of failures, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Parse,
    Validation,
    Numerical,
    CutoffLimited,
    Io,
}

impl ExitClass {
    /// 0 is success and 2 is reserved for command-line usage errors.
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Parse => 3,
            ExitClass::Validation => 4,
            ExitClass::Numerical => 5,
            ExitClass::CutoffLimited => 6,
            ExitClass::Io => 7,
        }
    }
}

impl Error {
    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Parse { .. } | Error::UnknownKey(_) => ExitClass::Parse,
            Error::Validation(_) | Error::OutsideZone { .. } => ExitClass::Validation,
            Error::Singular(_)
            | Error::Overdamped { .. }
            | Error::ImaginaryResidue { .. }
            | Error::StepControl { .. }
            | Error::NoConvergence { .. }
            | Error::Ordering(_)
            | Error::NotAMinimum { .. } => ExitClass::Numerical,
            Error::CutoffLimited { .. } => ExitClass::CutoffLimited,
            Error::Io(_) => ExitClass::Io,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
