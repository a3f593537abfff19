use thiserror::Error;

use crate::violation::ViolationCode;

/// Failures of the model, tree and generator operations.
///
/// Schema and tree well-formedness problems are *not* reported here; those
/// are data (see [`crate::Violation`]). This type covers lookups and
/// precondition failures of individual operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("`{0}` is a value type and has no identification")]
    UndefinedIdentification(String),
    #[error("value type `{0}` has no domain size")]
    MissingDomainSize(String),
    #[error("`{0}` is not a relationship type")]
    NotARelationship(String),
    #[error("pattern generation for `{0}` would not terminate: every involved size is infinite")]
    NonTerminatingCall(String),
    #[error("index {index} out of range for `{subject}` (bound {bound})")]
    Range {
        subject: String,
        index: u64,
        bound: u64,
    },
    #[error("population size of `{0}` overflows")]
    SizeOverflow(String),
    #[error("no conceptual weight given for type `{0}`")]
    MissingWeight(String),
    #[error("identification of `{0}` is cyclic")]
    CyclicIdentification(String),
    /// A tree edit that would break one of the tree axioms.
    #[error("{code}: {message}")]
    TreeEdit { code: ViolationCode, message: String },
}

impl Error {
    pub(crate) fn tree(code: ViolationCode, message: impl Into<String>) -> Self {
        Error::TreeEdit {
            code,
            message: message.into(),
        }
    }

    /// The stable violation code behind a rejected tree edit, if any.
    pub fn violation_code(&self) -> Option<ViolationCode> {
        match self {
            Error::TreeEdit { code, .. } => Some(*code),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
