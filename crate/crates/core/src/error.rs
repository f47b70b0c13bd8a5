use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime in 2..=97")]
    BadPrime(u64),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("index {0} exceeds the supported bound")]
    IndexBound(usize),
    #[error("colength table too short: need entries up to {need}, have {have}")]
    TableTooShort { need: usize, have: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("sequence is not coherent: {0}")]
    NotCoherent(String),
    #[error("block recombination failed: {0}")]
    Recombination(String),
    #[error("ambiguous match: {0}")]
    AmbiguousMatch(String),
    #[error("no closure within depth budget: {0}")]
    NoClosure(String),
    #[error("singular linear system")]
    Singular,
    #[error("pole of order greater than one at the multiplicity point")]
    HigherOrderPole,
    #[error("no recurrence of order at most {0} found")]
    NoRecurrence(usize),
    #[error("shape rejected: {0}")]
    ShapeRejected(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable variant name for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BadPrime(_) => "BadPrime",
            Error::Syntax { .. } => "Syntax",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::Mismatch(_) => "Mismatch",
            Error::SizeLimit(_) => "SizeLimit",
            Error::IndexBound(_) => "IndexBound",
            Error::TableTooShort { .. } => "TableTooShort",
            Error::Invalid(_) => "Invalid",
            Error::NotCoherent(_) => "NotCoherent",
            Error::Recombination(_) => "Recombination",
            Error::AmbiguousMatch(_) => "AmbiguousMatch",
            Error::NoClosure(_) => "NoClosure",
            Error::Singular => "Singular",
            Error::HigherOrderPole => "HigherOrderPole",
            Error::NoRecurrence(_) => "NoRecurrence",
            Error::ShapeRejected(_) => "ShapeRejected",
            Error::Parse(_) => "Parse",
        }
    }
}
