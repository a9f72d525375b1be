//! MiniLang: a small Java-like imperative language with `int`, `bool`,
//! `int[]` and `void`, enough to express the sort benchmarks.

mod ast;
mod check;
mod edit;
mod lexer;
mod parser;
pub mod render;

use std::fmt;

use thiserror::Error;

pub use ast::{AstNode, BinOp, Category, NodeId, NodeKind, Operator, Param, Program, Span, StepOp, Tree, Type, UnOp};
pub use check::{is_compilable, static_check, StaticViolation, ViolationReason, BUILTINS};
pub use edit::{delete_statement, enumerate_nodes, replace_node, Deletion};
pub use parser::parse;
pub use render::{render, render_inline};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(span: Span, message: String) -> Self {
        SyntaxError { line: span.line, column: span.column, message }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {0} is not a deletable statement")]
    NotAStatement(NodeId),
    #[error("cannot put a {found:?} in the {expected:?} slot of node {target}")]
    CategoryMismatch { target: NodeId, expected: Category, found: Category },
}
