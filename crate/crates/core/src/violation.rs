//! Well-formedness findings for schemas and grid trees.

use std::fmt;

use serde::Serialize;

/// Stable, machine-readable violation codes.
///
/// The string form (see [`ViolationCode::as_str`]) is part of the public
/// surface: it appears in CLI output, parser diagnostics and HTTP payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationCode {
    // schema
    MissingRefScheme,
    UnexpectedRefScheme,
    RefSchemeRoles,
    RefSchemePairs,
    SuperTypeWithoutSubtyping,
    MissingDomainSize,
    DomSizeMonotonicity,
    SubtypeOfRelationship,
    SubtypeKindMismatch,
    InterPredicateUniquenessUnsupported,
    NonSingletonTotality,
    EmptyConstraint,
    ValueExamplesExceedDomain,
    DuplicateValueExample,
    CyclicIdentification,
    // tree
    EdgeWellFormedness,
    SingleParent,
    UniqueRoot,
    UnknownNode,
    MissingObj,
    LinkReuse,
    OrderNotInjective,
    OrderUndefined,
    IdfConformity,
    NonCyclicIdentification,
    IdentificationIntermixed,
    SharedIdentificationNode,
    DetachedIdentificationRoot,
    MissingSimpleIdentification,
    // tree edits
    NotAGridNode,
    AlreadyExploded,
    NotExploded,
    NotExplodable,
    SimpleIdentificationMandatory,
}

impl ViolationCode {
    pub const fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            MissingRefScheme => "MissingRefScheme",
            UnexpectedRefScheme => "UnexpectedRefScheme",
            RefSchemeRoles => "RefSchemeRoles",
            RefSchemePairs => "RefSchemePairs",
            SuperTypeWithoutSubtyping => "SuperTypeWithoutSubtyping",
            MissingDomainSize => "MissingDomainSize",
            DomSizeMonotonicity => "DomSizeMonotonicity",
            SubtypeOfRelationship => "SubtypeOfRelationship",
            SubtypeKindMismatch => "SubtypeKindMismatch",
            InterPredicateUniquenessUnsupported => "InterPredicateUniquenessUnsupported",
            NonSingletonTotality => "NonSingletonTotality",
            EmptyConstraint => "EmptyConstraint",
            ValueExamplesExceedDomain => "ValueExamplesExceedDomain",
            DuplicateValueExample => "DuplicateValueExample",
            CyclicIdentification => "CyclicIdentification",
            EdgeWellFormedness => "EdgeWellFormedness",
            SingleParent => "SingleParent",
            UniqueRoot => "UniqueRoot",
            UnknownNode => "UnknownNode",
            MissingObj => "MissingObj",
            LinkReuse => "LinkReuse",
            OrderNotInjective => "OrderNotInjective",
            OrderUndefined => "OrderUndefined",
            IdfConformity => "IdfConformity",
            NonCyclicIdentification => "NonCyclicIdentification",
            IdentificationIntermixed => "IdentificationIntermixed",
            SharedIdentificationNode => "SharedIdentificationNode",
            DetachedIdentificationRoot => "DetachedIdentificationRoot",
            MissingSimpleIdentification => "MissingSimpleIdentification",
            NotAGridNode => "NotAGridNode",
            AlreadyExploded => "AlreadyExploded",
            NotExploded => "NotExploded",
            NotExplodable => "NotExplodable",
            SimpleIdentificationMandatory => "SimpleIdentificationMandatory",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed well-formedness check, naming the offending ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Names of the types, roles or nodes involved, most relevant first.
    pub subjects: Vec<String>,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, subjects: Vec<String>, message: impl Into<String>) -> Self {
        Violation {
            code,
            subjects,
            message: message.into(),
        }
    }

    pub fn codes(violations: &[Violation]) -> Vec<ViolationCode> {
        violations.iter().map(|v| v.code).collect()
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}
