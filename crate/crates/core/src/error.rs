use thiserror::Error;

use crate::format::ParseError;
use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the in-process API.
///
/// Every variant maps onto a stable upper-case code (see [`Error::code`]) which the
/// CLI prints and the HTTP layer returns in its error bodies.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid identifier `{0}`")]
    InvalidId(String),
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("`{0}` is not an option argument")]
    NotAnOption(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("duplicate relation {0} -> {1}")]
    DuplicateRelation(String, String),
    #[error("self-referencing relation on `{0}`")]
    SelfLoop(String),
    #[error("base score {0} outside [0, 1]")]
    BadScore(f64),
    #[error("user `{user}` has two signs for option `{option}`")]
    ConflictingSign { user: String, option: String },
    #[error("argument `{0}` declares an owner inconsistent with its kind")]
    BadOwner(String),
    #[error("framework has no active arguments")]
    EmptyFramework,
    #[error("framework is structurally invalid: {0}")]
    InvalidStructure(ValidationReport),
    #[error("edit would create a cycle through `{0}`")]
    WouldCreateCycle(String),
    #[error("option `{0}` cannot be edited this way")]
    OptionEditForbidden(String),
    #[error("frameworks do not differ by the expected edit: {0}")]
    ShapeMismatch(String),
    #[error("no candidate options")]
    EmptyCandidates,
    #[error("branch {0} has no eligible option")]
    NoEligibleOption(String),
    #[error("interactive tie-breaking exceeded {0} rounds")]
    MaxRoundsExceeded(u32),
    #[error("no tie to break")]
    NoTie,
    #[error("{0} toggles exceed the exhaustive limit of {1}")]
    TooManyToggles(usize, usize),
    #[error("{0} relations exceed the exact attribution limit of {1}")]
    TooManyRelations(usize, usize),
    #[error("unknown corpus `{0}`")]
    UnknownCorpus(String),
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
    #[error("document failed to parse with {} error(s)", .0.len())]
    InvalidAf(Vec<ParseError>),
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("index {0} out of range")]
    OutOfRange(i64),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidId(_) => "INVALID_ID",
            Error::UnknownArgument(_) => "UNKNOWN_ARGUMENT",
            Error::UnknownUser(_) => "UNKNOWN_USER",
            Error::NotAnOption(_) => "NOT_AN_OPTION",
            Error::DuplicateId(_) => "DUPLICATE_ID",
            Error::DuplicateRelation(..) => "DUPLICATE_RELATION",
            Error::SelfLoop(_) => "CYCLE",
            Error::BadScore(_) => "BAD_SCORE",
            Error::ConflictingSign { .. } => "CONFLICTING_SIGN",
            Error::BadOwner(_) => "BAD_OWNER",
            Error::EmptyFramework => "EMPTY_FRAMEWORK",
            Error::InvalidStructure(_) => "INVALID_STRUCTURE",
            Error::WouldCreateCycle(_) => "WOULD_CREATE_CYCLE",
            Error::OptionEditForbidden(_) => "OPTION_EDIT_FORBIDDEN",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::EmptyCandidates => "EMPTY_CANDIDATES",
            Error::NoEligibleOption(_) => "NO_ELIGIBLE_OPTION",
            Error::MaxRoundsExceeded(_) => "MAX_ROUNDS_EXCEEDED",
            Error::NoTie => "NO_TIE",
            Error::TooManyToggles(..) => "TOO_MANY_TOGGLES",
            Error::TooManyRelations(..) => "TOO_MANY_RELATIONS",
            Error::UnknownCorpus(_) => "UNKNOWN_CORPUS",
            Error::InvalidCorpus(_) => "INVALID_CORPUS",
            Error::InvalidAf(_) => "INVALID_AF",
            Error::Forbidden(_) => "FORBIDDEN",
            Error::OutOfRange(_) => "OUT_OF_RANGE",
            Error::UnknownSession(_) => "UNKNOWN_SESSION",
            Error::BadRequest(_) => "BAD_REQUEST",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
