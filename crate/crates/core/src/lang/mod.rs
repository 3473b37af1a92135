//! The rule language: claims and computations over architecture models.
//!
//! A library moves through three stages. [`parse::parse_library`] turns
//! source text into an untyped surface tree. [`check::typecheck`] resolves
//! types, enforces stratification (claims never appear inside computations
//! or under negation), and classifies every `and`/`or`/`=>` as either a
//! formula connective or part of a computation expression. The result is a
//! [`typed::TypedLibrary`] ready for proof search and evaluation.

pub mod ast;
pub mod check;
pub mod directives;
pub mod parse;
pub mod ty;
pub mod typed;

pub use ast::Library;
pub use check::{typecheck, TypeError};
pub use directives::{attach_prove_directives, DirectiveError, ProveGoal};
pub use parse::parse_library;
pub use ty::Type;
pub use typed::TypedLibrary;
