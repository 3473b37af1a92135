//! Surface syntax tree for rule libraries.
//!
//! The parser cannot tell a claim application from a function call (both are
//! `IDENT(args)` and a claim may be defined in a later file), so rule bodies
//! and expressions share one term type. The typechecker classifies terms
//! into formulas and computation expressions once every declaration is
//! known.

use crate::lexer::ParseError;
use crate::span::Span;
use indexmap::IndexMap;

#[derive(Debug, Clone, PartialEq)]
pub enum SType {
    Bool,
    Int,
    Real,
    String,
    /// A model type by name: a kind, `component`, `connection`, `feature`.
    Named(String, Span),
    Set(Box<SType>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: SType,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Implies,
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "=>",
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Quantifier or comprehension domain: `(x : thread)` ranges over a model
/// type, `(x in e)` over the elements of a set-valued expression.
#[derive(Debug, Clone, PartialEq)]
pub enum SDomain {
    Type(SType),
    Set(Box<STerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum STerm {
    Lit(Lit, Span),
    Var(String, Span),
    Call(String, Vec<STerm>, Span),
    Not(Box<STerm>, Span),
    Neg(Box<STerm>, Span),
    Binop(BinOp, Box<STerm>, Box<STerm>, Span),
    Forall(String, SDomain, Box<STerm>, Span),
    Exists(String, SDomain, Box<STerm>, Span),
    Let(String, SType, Box<STerm>, Box<STerm>, Span),
    If(Box<STerm>, Box<STerm>, Box<STerm>, Span),
    SetLit(Vec<STerm>, Span),
    Comprehension {
        head: Box<STerm>,
        var: String,
        domain: SDomain,
        cond: Option<Box<STerm>>,
        span: Span,
    },
}

impl STerm {
    pub fn span(&self) -> Span {
        match self {
            STerm::Lit(_, s)
            | STerm::Var(_, s)
            | STerm::Call(_, _, s)
            | STerm::Not(_, s)
            | STerm::Neg(_, s)
            | STerm::Binop(_, _, _, s)
            | STerm::Forall(_, _, _, s)
            | STerm::Exists(_, _, _, s)
            | STerm::Let(_, _, _, _, s)
            | STerm::If(_, _, _, s)
            | STerm::SetLit(_, s)
            | STerm::Comprehension { span: s, .. } => *s,
        }
    }
}

/// One segment of a claim's description text.
#[derive(Debug, Clone, PartialEq)]
pub enum SSegment {
    Text(String),
    Expr(STerm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SClause {
    pub name: String,
    pub params: Vec<Param>,
    pub description: Vec<SSegment>,
    pub body: STerm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SFunction {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: SType,
    pub body: STerm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SConstant {
    pub name: String,
    pub ty: SType,
    pub value: STerm,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SExternal {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: SType,
    pub command: String,
    pub span: Span,
}

/// A parsed rule library. Clause order is declaration order and is the
/// order backchaining tries alternatives in; merging libraries appends, so
/// load order across files is significant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Library {
    pub clauses: Vec<SClause>,
    pub functions: IndexMap<String, SFunction>,
    pub constants: IndexMap<String, SConstant>,
    pub externals: IndexMap<String, SExternal>,
}

impl Library {
    /// Category of a defined name, for collision diagnostics.
    fn category_of(&self, name: &str) -> Option<&'static str> {
        if self.clauses.iter().any(|c| c.name == name) {
            Some("claim")
        } else if self.functions.contains_key(name) {
            Some("function")
        } else if self.constants.contains_key(name) {
            Some("constant")
        } else if self.externals.contains_key(name) {
            Some("external")
        } else {
            None
        }
    }

    /// A name may be reused only for further clauses of the same claim.
    pub(crate) fn check_fresh(
        &self,
        name: &str,
        adding: &'static str,
        span: Span,
    ) -> Result<(), ParseError> {
        match self.category_of(name) {
            None => Ok(()),
            Some("claim") if adding == "claim" => Ok(()),
            Some(existing) => Err(ParseError::new(
                span,
                format!("`{name}` is already defined as a {existing}"),
            )),
        }
    }

    /// Append `other`'s declarations after this library's, preserving both
    /// declaration orders.
    pub fn merge(mut self, other: Library) -> Result<Library, ParseError> {
        for clause in other.clauses {
            self.check_fresh(&clause.name, "claim", clause.span)?;
            self.clauses.push(clause);
        }
        for (name, f) in other.functions {
            self.check_fresh(&name, "function", f.span)?;
            self.functions.insert(name, f);
        }
        for (name, c) in other.constants {
            self.check_fresh(&name, "constant", c.span)?;
            self.constants.insert(name, c);
        }
        for (name, e) in other.externals {
            self.check_fresh(&name, "external", e.span)?;
            self.externals.insert(name, e);
        }
        Ok(self)
    }
}
