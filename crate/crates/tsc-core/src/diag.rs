//! Source spans, parse diagnostics, and shared error types.

use std::fmt;
use thiserror::Error;

/// Location of a token in a source file; line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: &str, line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            file: file.to_string(),
            line: line.max(1),
            column: column.max(1),
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.severity, self.message)
    }
}

/// Violation of a precondition or model-level invariant.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{message}")]
pub struct DomainError {
    pub message: String,
}

impl DomainError {
    pub fn new(message: impl Into<String>) -> Self {
        DomainError {
            message: message.into(),
        }
    }
}

/// A constraint the selected encoding cannot express.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("unsupported constraint: {message}")]
pub struct UnsupportedConstraint {
    pub message: String,
}

impl UnsupportedConstraint {
    pub fn new(message: impl Into<String>) -> Self {
        UnsupportedConstraint {
            message: message.into(),
        }
    }
}
