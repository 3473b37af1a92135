//! Static types of the rule language.

use crate::model::ComponentKind;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Bool,
    Int,
    Real,
    String,
    /// A component reference; `None` is the supertype covering every kind.
    Component(Option<ComponentKind>),
    Connection,
    Feature,
    Set(Box<Type>),
    /// Dynamic type of `property` results; checked at evaluation time.
    Any,
    /// Element type of the empty set literal; assignable to everything.
    Empty,
}

impl Type {
    /// Surface name of a model type, if `name` denotes one.
    pub fn model_type(name: &str) -> Option<Type> {
        match name {
            "component" => Some(Type::Component(None)),
            "connection" => Some(Type::Connection),
            "feature" => Some(Type::Feature),
            _ => ComponentKind::from_str(name).map(|k| Type::Component(Some(k))),
        }
    }

    /// May a value of type `self` flow into a slot of type `target`?
    /// Component kinds widen to `component`; set element types are
    /// covariant; `any` is permitted in both directions and re-checked at
    /// run time.
    pub fn assignable_to(&self, target: &Type) -> bool {
        match (self, target) {
            (Type::Any, _) | (_, Type::Any) => true,
            (Type::Empty, _) => true,
            (Type::Component(_), Type::Component(None)) => true,
            (Type::Set(a), Type::Set(b)) => a.assignable_to(b),
            (a, b) => a == b,
        }
    }

    /// Least common type of two branches (`if`, `or`-joined set elements,
    /// `union`), or None when they are unrelated.
    pub fn join(&self, other: &Type) -> Option<Type> {
        if self == other {
            return Some(self.clone());
        }
        match (self, other) {
            (Type::Any, _) | (_, Type::Any) => Some(Type::Any),
            (Type::Empty, t) | (t, Type::Empty) => Some(t.clone()),
            (Type::Component(_), Type::Component(_)) => Some(Type::Component(None)),
            (Type::Set(a), Type::Set(b)) => Some(Type::Set(Box::new(a.join(b)?))),
            _ => None,
        }
    }

    /// Types that may appear inside claim text: scalars and model
    /// references. Sets are excluded.
    pub fn displayable(&self) -> bool {
        !matches!(self, Type::Set(_) | Type::Empty)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Int | Type::Real | Type::Any)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => f.write_str("bool"),
            Type::Int => f.write_str("int"),
            Type::Real => f.write_str("real"),
            Type::String => f.write_str("string"),
            Type::Component(None) => f.write_str("component"),
            Type::Component(Some(k)) => f.write_str(k.as_str()),
            Type::Connection => f.write_str("connection"),
            Type::Feature => f.write_str("feature"),
            Type::Set(t) => write!(f, "set<{t}>"),
            Type::Any => f.write_str("any"),
            Type::Empty => f.write_str("empty"),
        }
    }
}
