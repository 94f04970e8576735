//! A small language for writing chart parametrisations `p: U ⊂ ℝ^d → M_D(ℝ)` as text.
//!
//! ```text
//! chart so2_angle {
//!     params: a in [0, 2*pi];
//!     group: so(2);
//!     matrix: [[cos(a), -sin(a)], [sin(a), cos(a)]];
//! }
//! ```
//!
//! Sections may appear in any order, the trailing `;` before `}` is optional,
//! and the `chart name { ... }` wrapper may be omitted for anonymous charts.

mod ast;
mod chart;
mod lexer;
mod parser;

pub use ast::{BinOp, ChartAst, ChartGroup, Expr, Func, ParamDecl};
pub use chart::{BuiltinChart, Chart, DEFAULT_STEP};
pub(crate) use chart::quaternion_of;
pub use parser::{parse_chart, parse_expr};

use std::fmt;

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    BadNumber(String),
    Syntax { expected: String, found: String },
    UnknownIdentifier(String),
    UnknownFunction(String),
    DuplicateParameter(String),
    DuplicateSection(String),
    MissingSection(&'static str),
    RaggedMatrix { row: usize, expected: usize, found: usize },
    NotSquare { rows: usize, cols: usize },
    BoundOrder { param: String, lower: f64, upper: f64 },
    UnknownGroup(String),
    GroupShape { group: String, detail: String },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        Self { pos, kind }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            UnexpectedChar(c) => write!(f, "lexical error: unexpected character {c:?}"),
            BadNumber(s) => write!(f, "lexical error: malformed number `{s}`"),
            Syntax { expected, found } => {
                write!(f, "syntax error: expected {expected}, found {found}")
            }
            UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            UnknownFunction(s) => write!(f, "unknown function `{s}`"),
            DuplicateParameter(s) => write!(f, "parameter `{s}` declared twice"),
            DuplicateSection(s) => write!(f, "section `{s}` given twice"),
            MissingSection(s) => write!(f, "missing `{s}` section"),
            RaggedMatrix {
                row,
                expected,
                found,
            } => write!(
                f,
                "ragged matrix: row {row} has {found} entries, expected {expected}"
            ),
            NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}×{cols}")
            }
            BoundOrder {
                param,
                lower,
                upper,
            } => write!(
                f,
                "bounds of `{param}` must satisfy lower < upper, got [{lower}, {upper}]"
            ),
            UnknownGroup(s) => write!(f, "unknown group tag `{s}`"),
            GroupShape { group, detail } => write!(f, "chart does not fit group {group}: {detail}"),
        }
    }
}
