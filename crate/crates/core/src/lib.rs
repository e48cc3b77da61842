//! Team semantics for imperfect-information logics (IF*, DF and their
//! first-order fragments) over finite structures, with generalized
//! quantifiers in three flavours: Mostowski quantifiers under the
//! supplementing-function clause, the bounded clause, and higher-order
//! team quantifiers over meaning sets.
//!
//! The crate also implements a rewrite calculus (renaming, regularization,
//! quantifier extraction, slash elimination, swapping, prenex normal form,
//! primality reduction) and a brute-force equivalence oracle that checks
//! every claimed equivalence over all small structures and teams.

pub mod files;
pub mod model;
pub mod parser;
pub mod quantifiers;
pub mod rewrite;
pub mod semantics;
pub mod syntax;
pub mod verify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("model error: {0}")]
    Model(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("rewrite rule inapplicable: {0}")]
    Rewrite(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
