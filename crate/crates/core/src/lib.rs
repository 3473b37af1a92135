//! Assurance case engine over architecture models.
//!
//! The pipeline: parse an architecture model ([`model`]) and one or more
//! rule libraries (`lang`), typecheck, then run proof search (`logic`) for
//! every `prove` directive. Rule bodies mix logical connectives over claims
//! with a computation sublanguage evaluated by `eval`. Successful and failed
//! searches both yield trees that `case` turns into assurance cases for
//! text, JSON, or DOT output. `stdlib` is the bundled rule library every run
//! loads first.

pub mod case;
pub mod eval;
pub mod lang;
pub mod lexer;
pub mod logic;
pub mod model;
pub mod span;
pub mod stdlib;
