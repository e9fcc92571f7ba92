use thiserror::Error;

/// Failures surfaced by the reduction and spectral pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NchoError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("pencil determinant vanishes identically")]
    DegeneratePencil,
    #[error("pole of order > 1 at {location}: {detail}")]
    SimplePoleViolation { location: String, detail: String },
    #[error("pencil has a root on the unit circle at {0}")]
    PoleOnUnitCircle(String),
    #[error("positivity condition fails: {0}")]
    Positivity(String),
    #[error("fewer than three distinct pencil roots ({0})")]
    NotGeneric(usize),
    #[error("problem is not in standard form: {0}")]
    NotStdForm(String),
    #[error("wrong branch: {0}")]
    WrongBranch(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("continuation failed: {0}")]
    Continuation(String),
    #[error("refinement failed: {0}")]
    Refinement(String),
    #[error("{lambda} is not an eigenvalue (nearest {nearest}, distance {distance:.3e})")]
    NotAnEigenvalue {
        lambda: f64,
        nearest: f64,
        distance: f64,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl NchoError {
    /// Whether the failure comes from a numerical solver rather than bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            NchoError::Convergence(_)
                | NchoError::Continuation(_)
                | NchoError::Refinement(_)
                | NchoError::NotAnEigenvalue { .. }
                | NchoError::SimplePoleViolation { .. }
                | NchoError::DegeneratePencil
                | NchoError::PoleOnUnitCircle(_)
                | NchoError::NotGeneric(_)
                | NchoError::Positivity(_)
        )
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            NchoError::Dimension(_) => "dimension",
            NchoError::Contract(_) => "contract_violation",
            NchoError::DegenerateInput(_) => "degenerate_input",
            NchoError::DegeneratePencil => "degenerate_pencil",
            NchoError::SimplePoleViolation { .. } => "simple_pole_violation",
            NchoError::PoleOnUnitCircle(_) => "pole_on_unit_circle",
            NchoError::Positivity(_) => "positivity",
            NchoError::NotGeneric(_) => "not_generic",
            NchoError::NotStdForm(_) => "not_std_form",
            NchoError::WrongBranch(_) => "wrong_branch",
            NchoError::Convergence(_) => "convergence",
            NchoError::Continuation(_) => "continuation",
            NchoError::Refinement(_) => "refinement",
            NchoError::NotAnEigenvalue { .. } => "not_an_eigenvalue",
            NchoError::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, NchoError>;
