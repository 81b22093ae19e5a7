//! Text format for tensors, graphs and compound expressions.
//!
//! ```text
//! tensor A [2, 2] = [1, 2, 3, 4]
//! tensor E = eps(3)
//! graph tr {
//!   vertex a: A
//!   edge loop(a.1, a.2)
//! }
//! let twice = 2 * tr
//! ```
//!
//! Slots are 1-based and slot 1 is the ciliation dot. Values are exact
//! rationals written as integers, `p/q` or decimals; `#` starts a comment.

pub mod ast;
mod elaborate;
pub mod lexer;
mod parser;
mod serialize;

use std::fmt;

use thiserror::Error;

pub use ast::{DslDocument, Span};
pub use elaborate::{elaborate, GraphInfo, Model};
pub use serialize::serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Lexical,
    Syntax,
    Semantic,
    /// A semantic error that breaks NFG well-formedness (ports, slots,
    /// alphabets, interfaces).
    Validation,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorClass::Lexical => "lexical",
            ErrorClass::Syntax => "syntax",
            ErrorClass::Semantic => "semantic",
            ErrorClass::Validation => "validation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    Tensor,
    Graph,
    Vertex,
    Edge,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Tensor => "tensor",
            NameKind::Graph => "graph",
            NameKind::Vertex => "vertex",
            NameKind::Edge => "edge",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("number `{0}` is out of range")]
    NumberOverflow(String),
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("`{0}` is a reserved word")]
    ReservedWord(String),
    #[error("undefined {kind} `{name}`")]
    UndefinedName { kind: NameKind, name: String },
    #[error("duplicate {kind} `{name}`")]
    DuplicateName { kind: NameKind, name: String },
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("axis sizes must be positive")]
    ZeroDimension,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid builtin {0}")]
    BadBuiltin(String),
    #[error("slot out of range: {port} (vertex has degree {degree})")]
    SlotOutOfRange { port: String, degree: usize },
    #[error("alphabet mismatch at {port}: edge alphabet {alphabet}, axis size {axis}")]
    AlphabetMismatch { port: String, alphabet: usize, axis: usize },
    #[error("port {0} is already used")]
    PortReuse(String),
    #[error("port {0} is not covered by any edge")]
    UncoveredPort(String),
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

impl DslErrorKind {
    pub fn class(&self) -> ErrorClass {
        use DslErrorKind::*;
        match self {
            UnexpectedChar(_) | NumberOverflow(_) => ErrorClass::Lexical,
            Expected { .. } | ReservedWord(_) => ErrorClass::Syntax,
            UndefinedName { .. } | DuplicateName { .. } | ValueCount { .. } | ZeroDimension | ZeroDenominator
            | BadBuiltin(_) => ErrorClass::Semantic,
            SlotOutOfRange { .. }
            | AlphabetMismatch { .. }
            | PortReuse(_)
            | UncoveredPort(_)
            | InterfaceMismatch(_)
            | InvalidGraph(_) => ErrorClass::Validation,
        }
    }
}

/// A diagnostic with the offending source span.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {class} error: {kind}", class = kind.class())]
pub struct DslError {
    pub kind: DslErrorKind,
    pub span: Span,
}

impl DslError {
    pub fn new(kind: DslErrorKind, span: Span) -> Self {
        DslError { kind, span }
    }

    pub fn class(&self) -> ErrorClass {
        self.kind.class()
    }
}

/// Syntax only: tokens to document, no name resolution.
pub fn parse_syntax(source: &str) -> Result<DslDocument, DslError> {
    let tokens = lexer::tokenize(source)?;
    parser::Parser::new(tokens).document()
}

/// Parses and elaborates, so every semantic error is reported with its span.
pub fn parse(source: &str) -> Result<DslDocument, DslError> {
    let doc = parse_syntax(source)?;
    elaborate(&doc)?;
    Ok(doc)
}

/// Parses and builds the tensors, graphs and compounds of a document.
pub fn load(source: &str) -> Result<Model, DslError> {
    elaborate(&parse_syntax(source)?)
}
