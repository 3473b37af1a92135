//! Runtime values of the computation sublanguage.

use crate::lang::ty::Type;
use crate::model::{render_real, ComponentId, ConnectionId, FeatureId, ModelInstance};
use std::hash::{Hash, Hasher};

/// A value produced by evaluation. Equality is structural; reals compare by
/// exact bit pattern; sets compare without regard to order.
#[derive(Debug, Clone)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
    Component(ComponentId),
    Connection(ConnectionId),
    Feature(FeatureId),
    Set(SetValue),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Real(_) => "real",
            Value::Str(_) => "string",
            Value::Component(_) => "component",
            Value::Connection(_) => "connection",
            Value::Feature(_) => "feature",
            Value::Set(_) => "set",
        }
    }

    /// Human-readable form: model references print as qualified paths,
    /// strings print without quotes, reals always carry a decimal point.
    pub fn display(&self, model: &ModelInstance) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Int(v) => v.to_string(),
            Value::Real(v) => render_real(*v),
            Value::Str(s) => s.clone(),
            Value::Component(id) => model.qualified_name(*id),
            Value::Connection(id) => model.connection_qualified_name(*id),
            Value::Feature(id) => model.feature_qualified_name(*id),
            Value::Set(s) => {
                let items: Vec<String> = s.iter().map(|v| v.display(model)).collect();
                format!("{{{}}}", items.join(", "))
            }
        }
    }

    pub fn is_model_ref(&self) -> bool {
        matches!(
            self,
            Value::Component(_) | Value::Connection(_) | Value::Feature(_)
        )
    }

    /// The most precise static type describing this value. Components carry
    /// their kind; set element types are joined across the members.
    pub fn runtime_type(&self, model: &ModelInstance) -> Type {
        match self {
            Value::Bool(_) => Type::Bool,
            Value::Int(_) => Type::Int,
            Value::Real(_) => Type::Real,
            Value::Str(_) => Type::String,
            Value::Component(id) => Type::Component(Some(model.component(*id).kind)),
            Value::Connection(_) => Type::Connection,
            Value::Feature(_) => Type::Feature,
            Value::Set(s) => {
                let mut elem = Type::Empty;
                for v in s.iter() {
                    elem = match elem.join(&v.runtime_type(model)) {
                        Some(t) => t,
                        None => return Type::Set(Box::new(Type::Any)),
                    };
                }
                Type::Set(Box::new(elem))
            }
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Component(a), Value::Component(b)) => a == b,
            (Value::Connection(a), Value::Connection(b)) => a == b,
            (Value::Feature(a), Value::Feature(b)) => a == b,
            (Value::Set(a), Value::Set(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Bool(b) => b.hash(state),
            Value::Int(v) => v.hash(state),
            Value::Real(v) => v.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
            Value::Component(id) => id.hash(state),
            Value::Connection(id) => id.hash(state),
            Value::Feature(id) => id.hash(state),
            Value::Set(s) => s.hash(state),
        }
    }
}

/// A finite, duplicate-free collection preserving insertion order for
/// iteration while ignoring order for equality and hashing.
#[derive(Debug, Clone, Default)]
pub struct SetValue {
    items: Vec<Value>,
}

impl SetValue {
    pub fn new() -> Self {
        SetValue::default()
    }

    pub fn insert(&mut self, v: Value) {
        if !self.items.contains(&v) {
            self.items.push(v);
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.items.contains(v)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Value> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl FromIterator<Value> for SetValue {
    fn from_iter<T: IntoIterator<Item = Value>>(iter: T) -> Self {
        let mut s = SetValue::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl PartialEq for SetValue {
    fn eq(&self, other: &SetValue) -> bool {
        self.items.len() == other.items.len()
            && self.items.iter().all(|v| other.items.contains(v))
    }
}

impl Eq for SetValue {}

impl Hash for SetValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Order-insensitive: combine per-element hashes commutatively.
        let mut acc: u64 = 0;
        for v in &self.items {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            v.hash(&mut h);
            acc = acc.wrapping_add(h.finish());
        }
        acc.hash(state);
        self.items.len().hash(state);
    }
}
