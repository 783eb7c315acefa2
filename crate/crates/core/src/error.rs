use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),

    #[error("not a Killing field: residual {residual:.3e} exceeds {tol:.1e}")]
    NotKilling { residual: f64, tol: f64 },

    #[error("theorem violation (null/nonnull signals disagree): {0}")]
    TheoremViolation(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("degenerate Legendre transform: W_eta_eta = {0:.3e}")]
    DegenerateLegendre(f64),

    #[error("degenerate Sigma data: {0}")]
    DegenerateSigma(String),

    #[error("degenerate V: {0}")]
    DegenerateV(String),

    #[error("complex leak: imaginary residue {0:.3e} on a real slice")]
    ComplexLeak(f64),

    #[error("Lorentzian slice requires U = 0 and alpha = 0: {0}")]
    LorentzianObstruction(String),

    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Short stable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "Parse",
            Error::UnboundParameter(_) => "UnboundParameter",
            Error::SingularPoint(_) => "SingularPoint",
            Error::DegenerateMetric(_) => "DegenerateMetric",
            Error::BranchAmbiguity(_) => "BranchAmbiguity",
            Error::NotKilling { .. } => "NotKilling",
            Error::TheoremViolation(_) => "TheoremViolation",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DegenerateLegendre(_) => "DegenerateLegendre",
            Error::DegenerateSigma(_) => "DegenerateSigma",
            Error::DegenerateV(_) => "DegenerateV",
            Error::ComplexLeak(_) => "ComplexLeak",
            Error::LorentzianObstruction(_) => "LorentzianObstruction",
            Error::ConstraintViolation(_) => "ConstraintViolation",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::Invalid(_) => "Invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
