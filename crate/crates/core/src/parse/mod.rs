//! Concrete ASCII syntax: expressions, model files and their `Checks` block.

mod lexer;
mod model;
mod parser;

use std::fmt;

use thiserror::Error;

pub use model::{
    parse_model, CheckItem, Checks, DeclarationError, Definition, ImplicitDecl, ModelError, ModelFile, Sampling,
};
pub use parser::{Parser, SymbolTable};

use crate::syntax::{Formula, Program, Term};

/// A parse failure at a source position, with the set of tokens that would
/// have been accepted there.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl SyntaxError {
    pub(crate) fn new(line: usize, column: usize, message: &str, expected: Vec<String>) -> Self {
        SyntaxError { line, column, message: message.to_string(), expected }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Term,
    Formula,
    Program,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Term(Term),
    Formula(Formula),
    Program(Program),
}

/// Parses a standalone expression of the given category. Builtin function
/// names resolve to the builtin symbols; other names without annotation
/// become uninterpreted symbols.
pub fn parse_expression(text: &str, category: Category) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(text, SymbolTable::default())?;
    let e = match category {
        Category::Term => Expr::Term(p.term()?),
        Category::Formula => Expr::Formula(p.formula()?),
        Category::Program => Expr::Program(p.program()?),
    };
    p.finish()?;
    Ok(e)
}

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    match parse_expression(text, Category::Term)? {
        Expr::Term(t) => Ok(t),
        _ => unreachable!(),
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    match parse_expression(text, Category::Formula)? {
        Expr::Formula(f) => Ok(f),
        _ => unreachable!(),
    }
}

pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    match parse_expression(text, Category::Program)? {
        Expr::Program(a) => Ok(a),
        _ => unreachable!(),
    }
}
