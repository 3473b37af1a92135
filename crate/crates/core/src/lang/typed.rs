//! Typed intermediate representation produced by the checker.
//!
//! Rule bodies become [`Formula`] trees whose leaves are claim applications
//! and boolean computation expressions; everything below the formula level
//! is an [`Expr`]. The split is what enforces stratification: `Expr` has no
//! constructor that could hold a claim.

use super::ast::BinOp;
use super::ty::Type;
use crate::eval::value::Value;
use crate::lexer::quote;
use crate::model::{render_real, InstanceFilter};
use crate::span::Span;
use indexmap::IndexMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub ty: Type,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Lit(Value),
    Var(String),
    ConstRef(String),
    CallFun(String, Vec<Expr>),
    CallExternal(String, Vec<Expr>),
    Builtin(Builtin, Vec<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binop(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    SetLit(Vec<Expr>),
    Comprehension {
        head: Box<Expr>,
        var: String,
        domain: Domain,
        cond: Option<Box<Expr>>,
    },
}

/// Enumeration source for quantifiers and comprehensions.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Model elements of a kind, in document order.
    Instances(InstanceFilter),
    /// Elements of a set-valued expression, in its iteration order.
    SetExpr(Box<Expr>),
}

impl Domain {
    pub fn render(&self) -> String {
        match self {
            Domain::Instances(InstanceFilter::AnyComponent) => "component".to_string(),
            Domain::Instances(InstanceFilter::Kind(k)) => k.as_str().to_string(),
            Domain::Instances(InstanceFilter::Connection) => "connection".to_string(),
            Domain::SetExpr(e) => format!("in {}", e.render()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Parent,
    Source,
    Destination,
    Name,
    Property,
    HasProperty,
    Member,
    Union,
    Sum,
    Size,
    IsEmpty,
    Debug,
}

impl Builtin {
    pub const ALL: [Builtin; 12] = [
        Builtin::Parent,
        Builtin::Source,
        Builtin::Destination,
        Builtin::Name,
        Builtin::Property,
        Builtin::HasProperty,
        Builtin::Member,
        Builtin::Union,
        Builtin::Sum,
        Builtin::Size,
        Builtin::IsEmpty,
        Builtin::Debug,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Parent => "parent",
            Builtin::Source => "source",
            Builtin::Destination => "destination",
            Builtin::Name => "name",
            Builtin::Property => "property",
            Builtin::HasProperty => "has_property",
            Builtin::Member => "member",
            Builtin::Union => "union",
            Builtin::Sum => "sum",
            Builtin::Size => "size",
            Builtin::IsEmpty => "is_empty",
            Builtin::Debug => "debug",
        }
    }

    pub fn lookup(name: &str) -> Option<Builtin> {
        Self::ALL.iter().copied().find(|b| b.name() == name)
    }
}

impl Expr {
    /// Source-like rendering for proof nodes and diagnostics. Operands are
    /// parenthesized rather than re-deriving precedence.
    pub fn render(&self) -> String {
        match &self.kind {
            ExprKind::Lit(v) => match v {
                Value::Bool(b) => b.to_string(),
                Value::Int(i) => i.to_string(),
                Value::Real(r) => render_real(*r),
                Value::Str(s) => quote(s),
                other => format!("<{}>", other.type_name()),
            },
            ExprKind::Var(x) | ExprKind::ConstRef(x) => x.clone(),
            ExprKind::CallFun(f, args) | ExprKind::CallExternal(f, args) => {
                format!("{f}({})", render_args(args))
            }
            ExprKind::Builtin(b, args) => format!("{}({})", b.name(), render_args(args)),
            ExprKind::Not(e) => format!("not {}", e.render_atom()),
            ExprKind::Neg(e) => format!("-{}", e.render_atom()),
            ExprKind::Binop(op, l, r) => {
                format!("{} {} {}", l.render_atom(), op.symbol(), r.render_atom())
            }
            ExprKind::If(c, t, e) => format!(
                "if {} then {} else {}",
                c.render(),
                t.render(),
                e.render()
            ),
            ExprKind::SetLit(items) => format!("{{{}}}", render_args(items)),
            ExprKind::Comprehension {
                head,
                var,
                domain,
                cond,
            } => {
                let domain = match domain {
                    Domain::SetExpr(_) => format!("({var} {})", domain.render()),
                    Domain::Instances(_) => format!("({var} : {})", domain.render()),
                };
                match cond {
                    Some(c) => format!("{{{} for {domain} if {}}}", head.render(), c.render()),
                    None => format!("{{{} for {domain}}}", head.render()),
                }
            }
        }
    }

    fn render_atom(&self) -> String {
        match &self.kind {
            ExprKind::Binop(..) | ExprKind::If(..) | ExprKind::Not(..) => {
                format!("({})", self.render())
            }
            _ => self.render(),
        }
    }
}

fn render_args(args: &[Expr]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.render()).collect();
    parts.join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    pub kind: FormulaKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FormulaKind {
    ClaimApp {
        name: String,
        args: Vec<Expr>,
    },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Antecedent is a boolean computation, never a claim.
    Implies(Expr, Box<Formula>),
    Forall {
        var: String,
        elem_ty: Type,
        domain: Domain,
        body: Box<Formula>,
    },
    Exists {
        var: String,
        elem_ty: Type,
        domain: Domain,
        body: Box<Formula>,
    },
    Let {
        var: String,
        ty: Type,
        value: Expr,
        body: Box<Formula>,
    },
    /// `⟨e⟩`: proven exactly when the expression evaluates to true.
    Eval(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Text(String),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub claim: String,
    pub params: Vec<(String, Type)>,
    pub description: Vec<Segment>,
    pub body: Formula,
    pub span: Span,
}

/// Shared signature of all clauses for one claim name.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimSig {
    pub params: Vec<Type>,
    /// Indices into [`TypedLibrary::clauses`], in declaration order.
    pub clauses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub ret: Type,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub name: String,
    pub ty: Type,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct External {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub ret: Type,
    pub command: String,
}

/// A checked library: every expression typed, stratification verified,
/// clause alternatives grouped by claim.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypedLibrary {
    pub clauses: Vec<Clause>,
    pub claims: IndexMap<String, ClaimSig>,
    pub functions: IndexMap<String, Function>,
    pub constants: IndexMap<String, Constant>,
    pub externals: IndexMap<String, External>,
}

impl TypedLibrary {
    pub fn claim(&self, name: &str) -> Option<&ClaimSig> {
        self.claims.get(name)
    }
}
