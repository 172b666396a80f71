use thiserror::Error;

/// Every failure the library can report. Variants carry enough context to
/// build the structured error objects the CLI emits.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("diagram is not planar: V - E + F = {euler}, expected {expected}")]
    NonPlanar { euler: i64, expected: i64 },
    #[error("segment {0} is missing an endpoint or is used more than twice")]
    DanglingSegment(String),
    #[error("bad surgery label: {0}")]
    BadLabel(String),
    #[error("unknown component {0}")]
    UnknownComponent(usize),
    #[error("unknown segment {0}")]
    UnknownSegment(usize),
    #[error("illegal rewrite site: {0}")]
    IllegalSite(String),
    #[error("braiding is degenerate{}", match crossing { Some(c) => format!(" at crossing {c}"), None => String::new() })]
    DegenerateBraiding { crossing: Option<usize> },
    #[error("inconsistent pinch at crossing {crossing}: relation residuals {residuals:?}")]
    InconsistentPinch { crossing: usize, residuals: [f64; 4] },
    #[error("no solution found ({starts} starts, best residual {best:e})")]
    NoSolutionFound { starts: usize, best: f64 },
    #[error("Jacobian rank deficiency persists (rank {rank} of {unknowns}); add pins")]
    GaugeDeficient { rank: usize, unknowns: usize },
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),
    #[error("modulus mismatch between values")]
    ModulusMismatch,
    #[error("region holonomy is inconsistent around region {region} (defect {defect:e})")]
    InconsistentRegionHolonomy { region: usize, defect: f64 },
    #[error("longitude mismatch on component {component}: |exp(2 pi i s(l)) - l| = {defect:e}")]
    LongitudeMismatch { component: usize, defect: f64 },
    #[error("incompatible target on component {component}: {detail}")]
    IncompatibleTarget { component: usize, detail: String },
    #[error("crossing {0} is pinched")]
    PinchedCrossing(usize),
    #[error("filling condition fails on component {component}: |m^p l^q - 1| = {defect:e}")]
    FillingIncompatible { component: usize, defect: f64 },
    #[error("component {component} is not parabolic (m = {m_re} + {m_im}i)")]
    NotParabolic { component: usize, m_re: f64, m_im: f64 },
    #[error("missing boundary target for component {0}")]
    MissingTarget(usize),
    #[error("continued fraction is undefined (division by zero)")]
    CFUndefined,
    #[error("no continued fraction found for the gluing matrix")]
    NoCFFound,
    #[error("{0} and {1} are not coprime")]
    NotCoprime(i64, i64),
    #[error("exposed b-variables differ: {0}")]
    BVariableMismatch(String),
    #[error("invalid gluing matrix: {0}")]
    InvalidMatrix(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonPlanar { .. } => "NonPlanar",
            Error::DanglingSegment(_) => "DanglingSegment",
            Error::BadLabel(_) => "BadLabel",
            Error::UnknownComponent(_) => "UnknownComponent",
            Error::UnknownSegment(_) => "UnknownSegment",
            Error::IllegalSite(_) => "IllegalSite",
            Error::DegenerateBraiding { .. } => "DegenerateBraiding",
            Error::InconsistentPinch { .. } => "InconsistentPinch",
            Error::NoSolutionFound { .. } => "NoSolutionFound",
            Error::GaugeDeficient { .. } => "GaugeDeficient",
            Error::DegenerateShape(_) => "DegenerateShape",
            Error::ModulusMismatch => "ModulusMismatch",
            Error::InconsistentRegionHolonomy { .. } => "InconsistentRegionHolonomy",
            Error::LongitudeMismatch { .. } => "LongitudeMismatch",
            Error::IncompatibleTarget { .. } => "IncompatibleTarget",
            Error::PinchedCrossing(_) => "PinchedCrossing",
            Error::FillingIncompatible { .. } => "FillingIncompatible",
            Error::NotParabolic { .. } => "NotParabolic",
            Error::MissingTarget(_) => "MissingTarget",
            Error::CFUndefined => "CFUndefined",
            Error::NoCFFound => "NoCFFound",
            Error::NotCoprime(..) => "NotCoprime",
            Error::BVariableMismatch(_) => "BVariableMismatch",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::Parse(_) => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
