//! Evaluation of computation expressions against a model instance.
//!
//! Evaluation is strict and deterministic except for `and`/`or`, which
//! short-circuit left to right, and external commands, whose results come
//! from outside the engine. Anything that goes wrong here is an
//! [`EvalError`]: a diagnostic that aborts the enclosing proof, never a
//! silent claim failure. A computation that crashes must not masquerade as
//! absent evidence.

pub mod external;
pub mod value;

pub use value::{SetValue, Value};

use crate::lang::ast::BinOp;
use crate::lang::ty::Type;
use crate::lang::typed::{Builtin, Domain, Expr, ExprKind, Function, TypedLibrary};
use crate::model::{ElementRef, ModelInstance, PropertyValue};
use crate::span::Span;
use indexmap::IndexMap;
use std::cell::{Cell, RefCell};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{span}: {message}")]
pub struct EvalError {
    pub span: Span,
    pub message: String,
}

fn err(span: Span, message: impl Into<String>) -> EvalError {
    EvalError {
        span,
        message: message.into(),
    }
}

/// Call-depth ceiling for user-defined functions and constants. The
/// computation sublanguage can recurse without bound, so runaway recursion
/// must surface as a diagnostic instead of a stack overflow. The ceiling is
/// sized to stay comfortably inside a 2 MiB thread stack in debug builds.
const RECURSION_LIMIT: u32 = 192;

/// Lexically scoped variable bindings. Shadowing happens by pushing a new
/// binding and popping it when the binder's scope ends.
#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: Vec<(String, Value)>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn bind(&mut self, name: String, v: Value) {
        self.vars.push((name, v));
    }

    pub fn unbind(&mut self) {
        self.vars.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
    }
}

/// Shared, immutable context for one checking run: the model, the library,
/// the external-command timeout, and a sink for `debug` output.
pub struct EvalCtx<'a> {
    pub model: &'a ModelInstance,
    pub lib: &'a TypedLibrary,
    timeout_secs: Option<u64>,
    debug: RefCell<Vec<String>>,
    depth: Cell<u32>,
}

impl<'a> EvalCtx<'a> {
    pub fn new(model: &'a ModelInstance, lib: &'a TypedLibrary) -> Self {
        EvalCtx::with_timeout(model, lib, None)
    }

    /// `timeout_secs` overrides the external-command timeout; `None` falls
    /// back to `RESOLUTE_EXTERNAL_TIMEOUT_SECS` or the 30 s default.
    pub fn with_timeout(
        model: &'a ModelInstance,
        lib: &'a TypedLibrary,
        timeout_secs: Option<u64>,
    ) -> Self {
        EvalCtx {
            model,
            lib,
            timeout_secs,
            debug: RefCell::new(Vec::new()),
            depth: Cell::new(0),
        }
    }

    /// Drain the `label = value` lines recorded by `debug` calls so far.
    pub fn take_debug_lines(&self) -> Vec<String> {
        std::mem::take(&mut self.debug.borrow_mut())
    }

    fn enter(&self, span: Span, name: &str) -> Result<(), EvalError> {
        if self.depth.get() >= RECURSION_LIMIT {
            return Err(err(
                span,
                format!("recursion limit ({RECURSION_LIMIT}) exceeded in `{name}`"),
            ));
        }
        self.depth.set(self.depth.get() + 1);
        Ok(())
    }

    fn leave(&self) {
        self.depth.set(self.depth.get() - 1);
    }
}

/// Evaluate a ground, typechecked expression to a value.
pub fn evaluate(e: &Expr, env: &mut Env, ctx: &EvalCtx) -> Result<Value, EvalError> {
    let span = e.span;
    match &e.kind {
        ExprKind::Lit(v) => Ok(v.clone()),
        ExprKind::Var(name) => env
            .lookup(name)
            .cloned()
            .ok_or_else(|| err(span, format!("unbound variable `{name}`"))),
        ExprKind::ConstRef(name) => {
            let c = &ctx.lib.constants[name];
            ctx.enter(span, name)?;
            let result = evaluate(&c.value, &mut Env::new(), ctx);
            ctx.leave();
            let v = result?;
            conform(v, &c.ty, ctx, span, &format!("constant `{name}`"))
        }
        ExprKind::CallFun(name, args) => {
            let f = &ctx.lib.functions[name];
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(evaluate(a, env, ctx)?);
            }
            apply_function(f, vals, ctx, span)
        }
        ExprKind::CallExternal(name, args) => {
            let ext = &ctx.lib.externals[name];
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(evaluate(a, env, ctx)?);
            }
            let timeout = external::effective_timeout(ctx.timeout_secs);
            external::run_external(&ext.command, &vals, &ext.ret, ctx.model, timeout)
                .map_err(|m| err(span, m))
        }
        ExprKind::Builtin(b, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(evaluate(a, env, ctx)?);
            }
            eval_builtin(*b, vals, args, span, ctx)
        }
        ExprKind::Not(inner) => {
            let v = evaluate(inner, env, ctx)?;
            Ok(Value::Bool(!as_bool(v, inner.span, "`not`")?))
        }
        ExprKind::Neg(inner) => match evaluate(inner, env, ctx)? {
            Value::Int(i) => i
                .checked_neg()
                .map(Value::Int)
                .ok_or_else(|| err(span, "integer overflow in negation")),
            Value::Real(r) => Ok(Value::Real(-r)),
            other => Err(err(
                inner.span,
                format!("cannot negate `{}`", other.type_name()),
            )),
        },
        ExprKind::Binop(op, a, b) => eval_binop(*op, a, b, env, ctx, span),
        ExprKind::If(c, t, f) => {
            let cond = evaluate(c, env, ctx)?;
            if as_bool(cond, c.span, "the condition of `if`")? {
                evaluate(t, env, ctx)
            } else {
                evaluate(f, env, ctx)
            }
        }
        ExprKind::SetLit(items) => {
            let mut out = SetValue::new();
            for item in items {
                out.insert(evaluate(item, env, ctx)?);
            }
            Ok(Value::Set(out))
        }
        ExprKind::Comprehension {
            head,
            var,
            domain,
            cond,
        } => {
            let items = enumerate_domain(domain, env, ctx)?;
            let mut out = SetValue::new();
            for item in items {
                env.bind(var.clone(), item);
                let result = (|| {
                    let keep = match cond {
                        Some(c) => {
                            let v = evaluate(c, env, ctx)?;
                            as_bool(v, c.span, "a comprehension filter")?
                        }
                        None => true,
                    };
                    if keep {
                        out.insert(evaluate(head, env, ctx)?);
                    }
                    Ok(())
                })();
                env.unbind();
                result?;
            }
            Ok(Value::Set(out))
        }
    }
}

/// Call a user-defined function by name. The arguments must already be
/// ground values conforming to the declared parameter types.
pub fn call_function(
    name: &str,
    args: Vec<Value>,
    ctx: &EvalCtx,
) -> Result<Value, EvalError> {
    let f = ctx
        .lib
        .functions
        .get(name)
        .ok_or_else(|| err(Span::synthetic(), format!("unknown function `{name}`")))?;
    apply_function(f, args, ctx, Span::synthetic())
}

fn apply_function(
    f: &Function,
    args: Vec<Value>,
    ctx: &EvalCtx,
    span: Span,
) -> Result<Value, EvalError> {
    if args.len() != f.params.len() {
        return Err(err(
            span,
            format!(
                "`{}` expects {} argument(s), got {}",
                f.name,
                f.params.len(),
                args.len()
            ),
        ));
    }
    let mut env = Env::new();
    for ((p, _), v) in f.params.iter().zip(args) {
        env.bind(p.clone(), v);
    }
    ctx.enter(span, &f.name)?;
    let result = evaluate(&f.body, &mut env, ctx);
    ctx.leave();
    let v = result?;
    conform(v, &f.ret, ctx, span, &format!("function `{}`", f.name))
}

/// Values reaching a declared type through `Any` are checked at runtime so
/// that evaluation never hands back a value whose tag contradicts the
/// static type.
fn conform(
    v: Value,
    ty: &Type,
    ctx: &EvalCtx,
    span: Span,
    what: &str,
) -> Result<Value, EvalError> {
    if v.runtime_type(ctx.model).assignable_to(ty) {
        Ok(v)
    } else {
        Err(err(
            span,
            format!(
                "{what} returned `{}`, expected `{ty}`",
                v.runtime_type(ctx.model)
            ),
        ))
    }
}

/// List the values a quantifier or comprehension ranges over: model
/// instances in document order, or a set's members in insertion order.
pub fn enumerate_domain(
    domain: &Domain,
    env: &mut Env,
    ctx: &EvalCtx,
) -> Result<Vec<Value>, EvalError> {
    match domain {
        Domain::Instances(filter) => Ok(ctx
            .model
            .instances_of(*filter)
            .into_iter()
            .map(|r| match r {
                ElementRef::Component(id) => Value::Component(id),
                ElementRef::Connection(id) => Value::Connection(id),
                ElementRef::Feature(id) => Value::Feature(id),
            })
            .collect()),
        Domain::SetExpr(e) => match evaluate(e, env, ctx)? {
            Value::Set(s) => Ok(s.iter().cloned().collect()),
            other => Err(err(
                e.span,
                format!("`in` expects a set, got `{}`", other.type_name()),
            )),
        },
    }
}

fn as_bool(v: Value, span: Span, what: &str) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(err(
            span,
            format!("{what} expects bool, got `{}`", other.type_name()),
        )),
    }
}

fn as_set(v: Value, span: Span, what: &str) -> Result<SetValue, EvalError> {
    match v {
        Value::Set(s) => Ok(s),
        other => Err(err(
            span,
            format!("{what} expects a set, got `{}`", other.type_name()),
        )),
    }
}

fn eval_binop(
    op: BinOp,
    a: &Expr,
    b: &Expr,
    env: &mut Env,
    ctx: &EvalCtx,
    span: Span,
) -> Result<Value, EvalError> {
    match op {
        BinOp::And => {
            let l = evaluate(a, env, ctx)?;
            if !as_bool(l, a.span, "`and`")? {
                return Ok(Value::Bool(false));
            }
            let r = evaluate(b, env, ctx)?;
            Ok(Value::Bool(as_bool(r, b.span, "`and`")?))
        }
        BinOp::Or => {
            let l = evaluate(a, env, ctx)?;
            if as_bool(l, a.span, "`or`")? {
                return Ok(Value::Bool(true));
            }
            let r = evaluate(b, env, ctx)?;
            Ok(Value::Bool(as_bool(r, b.span, "`or`")?))
        }
        BinOp::Implies => Err(err(span, "`=>` cannot be evaluated as a computation")),
        _ => {
            let l = evaluate(a, env, ctx)?;
            let r = evaluate(b, env, ctx)?;
            match op {
                BinOp::Eq => Ok(Value::Bool(l == r)),
                BinOp::Ne => Ok(Value::Bool(l != r)),
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => order(op, l, r, span),
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                    arithmetic(op, l, r, span)
                }
                BinOp::And | BinOp::Or | BinOp::Implies => unreachable!("handled above"),
            }
        }
    }
}

fn order(op: BinOp, l: Value, r: Value, span: Span) -> Result<Value, EvalError> {
    let b = match (&l, &r) {
        (Value::Int(a), Value::Int(b)) => match op {
            BinOp::Lt => a < b,
            BinOp::Le => a <= b,
            BinOp::Gt => a > b,
            _ => a >= b,
        },
        (Value::Real(a), Value::Real(b)) => match op {
            BinOp::Lt => a < b,
            BinOp::Le => a <= b,
            BinOp::Gt => a > b,
            _ => a >= b,
        },
        _ => {
            return Err(err(
                span,
                format!(
                    "cannot order `{}` and `{}` with `{}`",
                    l.type_name(),
                    r.type_name(),
                    op.symbol()
                ),
            ))
        }
    };
    Ok(Value::Bool(b))
}

fn arithmetic(op: BinOp, l: Value, r: Value, span: Span) -> Result<Value, EvalError> {
    match (&l, &r) {
        (Value::Int(a), Value::Int(b)) => {
            if op == BinOp::Div && *b == 0 {
                return Err(err(span, "division by zero"));
            }
            let result = match op {
                BinOp::Add => a.checked_add(*b),
                BinOp::Sub => a.checked_sub(*b),
                BinOp::Mul => a.checked_mul(*b),
                _ => a.checked_div(*b),
            };
            result.map(Value::Int).ok_or_else(|| {
                err(span, format!("integer overflow in `{}`", op.symbol()))
            })
        }
        (Value::Real(a), Value::Real(b)) => {
            if op == BinOp::Div && *b == 0.0 {
                return Err(err(span, "division by zero"));
            }
            Ok(Value::Real(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                _ => a / b,
            }))
        }
        _ => Err(err(
            span,
            format!(
                "cannot apply `{}` to `{}` and `{}`",
                op.symbol(),
                l.type_name(),
                r.type_name()
            ),
        )),
    }
}

fn properties_of<'m>(
    v: &Value,
    model: &'m ModelInstance,
    span: Span,
    what: &str,
) -> Result<(&'m IndexMap<String, PropertyValue>, String), EvalError> {
    match v {
        Value::Component(id) => Ok((
            &model.component(*id).properties,
            model.qualified_name(*id),
        )),
        Value::Connection(id) => Ok((
            &model.connection(*id).properties,
            model.connection_qualified_name(*id),
        )),
        other => Err(err(
            span,
            format!(
                "{what} expects a component or connection, got `{}`",
                other.type_name()
            ),
        )),
    }
}

fn property_value(pv: &PropertyValue) -> Value {
    match pv {
        PropertyValue::Str(s) => Value::Str(s.clone()),
        PropertyValue::Int(i) => Value::Int(*i),
        PropertyValue::Real(r) => Value::Real(*r),
        PropertyValue::Bool(b) => Value::Bool(*b),
        PropertyValue::Ref(id) => Value::Component(*id),
        PropertyValue::List(items) => Value::Set(items.iter().map(property_value).collect()),
    }
}

fn eval_builtin(
    b: Builtin,
    mut vals: Vec<Value>,
    args: &[Expr],
    span: Span,
    ctx: &EvalCtx,
) -> Result<Value, EvalError> {
    let model = ctx.model;
    match b {
        Builtin::Parent => match &vals[0] {
            Value::Component(id) => match model.component(*id).parent {
                Some(p) => Ok(Value::Component(p)),
                None => Err(err(
                    span,
                    format!(
                        "the root component `{}` has no parent",
                        model.component(*id).name
                    ),
                )),
            },
            Value::Feature(id) => Ok(Value::Component(model.feature(*id).owner)),
            other => Err(err(
                args[0].span,
                format!(
                    "`parent` expects a component or feature, got `{}`",
                    other.type_name()
                ),
            )),
        },
        Builtin::Source | Builtin::Destination => match &vals[0] {
            Value::Connection(id) => {
                let conn = model.connection(*id);
                Ok(Value::Feature(if b == Builtin::Source {
                    conn.source
                } else {
                    conn.destination
                }))
            }
            other => Err(err(
                args[0].span,
                format!(
                    "`{}` expects a connection, got `{}`",
                    b.name(),
                    other.type_name()
                ),
            )),
        },
        Builtin::Name => match &vals[0] {
            Value::Component(id) => Ok(Value::Str(model.component(*id).name.clone())),
            Value::Connection(id) => Ok(Value::Str(model.connection(*id).name.clone())),
            Value::Feature(id) => Ok(Value::Str(model.feature(*id).name.clone())),
            other => Err(err(
                args[0].span,
                format!("`name` expects a model reference, got `{}`", other.type_name()),
            )),
        },
        Builtin::Property | Builtin::HasProperty => {
            let key = match &vals[1] {
                Value::Str(s) => s.clone(),
                other => {
                    return Err(err(
                        args[1].span,
                        format!(
                            "`{}` expects a property name string, got `{}`",
                            b.name(),
                            other.type_name()
                        ),
                    ))
                }
            };
            let (props, path) = properties_of(&vals[0], model, args[0].span, b.name())?;
            if b == Builtin::HasProperty {
                Ok(Value::Bool(props.contains_key(&key)))
            } else {
                props.get(&key).map(property_value).ok_or_else(|| {
                    err(
                        span,
                        format!(
                            "`{path}` has no property `{key}`; use has_property first"
                        ),
                    )
                })
            }
        }
        Builtin::Member => {
            let set = as_set(vals.pop().unwrap(), args[1].span, "`member`")?;
            Ok(Value::Bool(set.contains(&vals[0])))
        }
        Builtin::Union => {
            let right = as_set(vals.pop().unwrap(), args[1].span, "`union`")?;
            let mut left = as_set(vals.pop().unwrap(), args[0].span, "`union`")?;
            for v in right.iter() {
                left.insert(v.clone());
            }
            Ok(Value::Set(left))
        }
        Builtin::Sum => {
            let set = as_set(vals.pop().unwrap(), args[0].span, "`sum`")?;
            let mut ints: Option<i64> = None;
            let mut reals: Option<f64> = None;
            for v in set.iter() {
                match v {
                    Value::Int(i) if reals.is_none() => {
                        let acc = ints.unwrap_or(0).checked_add(*i).ok_or_else(|| {
                            err(span, "integer overflow in `sum`")
                        })?;
                        ints = Some(acc);
                    }
                    Value::Real(r) if ints.is_none() => {
                        reals = Some(reals.unwrap_or(0.0) + r);
                    }
                    Value::Int(_) | Value::Real(_) => {
                        return Err(err(span, "`sum` over a set mixing int and real"))
                    }
                    other => {
                        return Err(err(
                            span,
                            format!(
                                "`sum` expects a set of int or real, found a `{}` element",
                                other.type_name()
                            ),
                        ))
                    }
                }
            }
            match (ints, reals) {
                (Some(i), _) => Ok(Value::Int(i)),
                (_, Some(r)) => Ok(Value::Real(r)),
                (None, None) => Ok(Value::Int(0)),
            }
        }
        Builtin::Size => {
            let set = as_set(vals.pop().unwrap(), args[0].span, "`size`")?;
            Ok(Value::Int(set.len() as i64))
        }
        Builtin::IsEmpty => {
            let set = as_set(vals.pop().unwrap(), args[0].span, "`is_empty`")?;
            Ok(Value::Bool(set.is_empty()))
        }
        Builtin::Debug => {
            let v = vals.pop().unwrap();
            let label = match &vals[0] {
                Value::Str(s) => s.clone(),
                other => {
                    return Err(err(
                        args[0].span,
                        format!(
                            "`debug` expects a label string, got `{}`",
                            other.type_name()
                        ),
                    ))
                }
            };
            ctx.debug
                .borrow_mut()
                .push(format!("{label} = {}", v.display(model)));
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_library, typecheck};
    use crate::model::parse_model;
    use proptest::prelude::*;

    fn setup(model_src: &str, lib_src: &str) -> (ModelInstance, TypedLibrary) {
        let model = parse_model(model_src).unwrap();
        let lib = typecheck(&parse_library(lib_src).unwrap()).unwrap();
        (model, lib)
    }

    fn component(model: &ModelInstance, path: &str) -> Value {
        let root = model.qualified_name(model.root);
        for r in model.instances_of(crate::model::InstanceFilter::AnyComponent) {
            if let ElementRef::Component(id) = r {
                if model.qualified_name(id) == format!("{root}.{path}") || path == root {
                    return Value::Component(id);
                }
            }
        }
        panic!("no component {path}");
    }

    #[test]
    fn sum_over_the_empty_set_is_int_zero() {
        let (model, lib) = setup("system S { }", "f() : int = sum({})");
        let ctx = EvalCtx::new(&model, &lib);
        assert_eq!(call_function("f", vec![], &ctx).unwrap(), Value::Int(0));
    }

    #[test]
    fn memory_bound_membership_holds() {
        let (model, lib) = setup(
            "system Sys {
               process P {
                 property Deployment_Properties::Actual_Memory_Binding = [ref RAM]
               }
               memory RAM { }
             }",
            "memory_bound(logical : component, physical : component) : bool =
               has_property(logical, Deployment_Properties::Actual_Memory_Binding) and
               member(physical, property(logical, Deployment_Properties::Actual_Memory_Binding))",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let p = component(&model, "P");
        let ram = component(&model, "RAM");
        assert_eq!(
            call_function("memory_bound", vec![p.clone(), ram], &ctx).unwrap(),
            Value::Bool(true)
        );
        let sys = component(&model, "Sys");
        assert_eq!(
            call_function("memory_bound", vec![p.clone(), sys], &ctx).unwrap(),
            Value::Bool(false)
        );
        // Swapped arguments: P has the property but Sys does not, so the
        // conjunction must fail on the first conjunct without reaching
        // `property`.
        let p2 = p.clone();
        assert_eq!(
            call_function("memory_bound", vec![component(&model, "Sys"), p2], &ctx).unwrap(),
            Value::Bool(false)
        );
    }

    #[test]
    fn message_delay_sums_only_bound_threads() {
        let (model, lib) = setup(
            "system Sys {
               process P {
                 thread A {
                   property Delay = 2
                   property Binding = [ref P]
                 }
                 thread B {
                   property Delay = 3
                   property Binding = [ref P]
                 }
               }
               process Q {
                 thread C {
                   property Delay = 99
                 }
               }
             }",
            r#"
thread_message_delay(t : thread) : int = property(t, "Delay")
bound(logical : component, physical : component) : bool =
  has_property(logical, "Binding") and
  member(physical, property(logical, "Binding"))
message_delay(p : process) : int =
  sum({thread_message_delay(t) for (t : thread) if bound(t, p)})
"#,
        );
        let ctx = EvalCtx::new(&model, &lib);
        let p = component(&model, "P");
        assert_eq!(
            call_function("message_delay", vec![p], &ctx).unwrap(),
            Value::Int(5)
        );
        let q = component(&model, "Q");
        assert_eq!(
            call_function("message_delay", vec![q], &ctx).unwrap(),
            Value::Int(0)
        );
    }

    #[test]
    fn and_or_short_circuit_skips_the_debug_probe() {
        let (model, lib) = setup(
            "system S { }",
            r#"right(x : bool) : bool = debug("probe", x)
               f(x : bool) : bool = x or right(true)
               g(x : bool) : bool = x and right(true)"#,
        );
        let ctx = EvalCtx::new(&model, &lib);
        assert_eq!(
            call_function("f", vec![Value::Bool(true)], &ctx).unwrap(),
            Value::Bool(true)
        );
        assert_eq!(
            call_function("g", vec![Value::Bool(false)], &ctx).unwrap(),
            Value::Bool(false)
        );
        assert!(ctx.take_debug_lines().is_empty());
        assert_eq!(
            call_function("f", vec![Value::Bool(false)], &ctx).unwrap(),
            Value::Bool(true)
        );
        assert_eq!(ctx.take_debug_lines(), ["probe = true"]);
    }

    #[test]
    fn union_with_the_empty_set_is_identity() {
        let (model, lib) = setup(
            "system S { }",
            "u(s : set<int>) : set<int> = union(s, {})",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let s: SetValue = [Value::Int(4), Value::Int(7)].into_iter().collect();
        assert_eq!(
            call_function("u", vec![Value::Set(s.clone())], &ctx).unwrap(),
            Value::Set(s)
        );
    }

    #[test]
    fn missing_property_suggests_has_property() {
        let (model, lib) = setup(
            "system S { }",
            "f(c : component) : int = property(c, \"Delay\")",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let e = call_function("f", vec![component(&model, "S")], &ctx).unwrap_err();
        assert!(e.message.contains("use has_property first"), "{}", e.message);
        assert!(e.message.contains("`S` has no property `Delay`"), "{}", e.message);
    }

    #[test]
    fn parent_of_destination_lands_on_the_receiving_thread() {
        let (model, lib) = setup(
            "system Sys {
               thread T { in port p }
               thread S { out port q }
               connection c : S.q -> T.p
             }",
            "who(c : connection) : component = parent(destination(c))
             back(c : connection) : component = parent(source(c))",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let conn = Value::Connection(crate::model::ConnectionId(0));
        assert_eq!(
            call_function("who", vec![conn.clone()], &ctx).unwrap(),
            component(&model, "T")
        );
        assert_eq!(
            call_function("back", vec![conn], &ctx).unwrap(),
            component(&model, "S")
        );
    }

    #[test]
    fn parent_of_the_root_is_an_error() {
        let (model, lib) = setup(
            "system S { }",
            "up(c : component) : component = parent(c)",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let e = call_function("up", vec![component(&model, "S")], &ctx).unwrap_err();
        assert!(e.message.contains("has no parent"));
    }

    #[test]
    fn division_by_zero_and_overflow_are_diagnostics() {
        let (model, lib) = setup(
            "system S { }",
            "d(x : int) : int = x / 0
             o(x : int) : int = x + 1",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let e = call_function("d", vec![Value::Int(1)], &ctx).unwrap_err();
        assert!(e.message.contains("division by zero"));
        let e = call_function("o", vec![Value::Int(i64::MAX)], &ctx).unwrap_err();
        assert!(e.message.contains("integer overflow"));
    }

    #[test]
    fn runaway_recursion_is_a_diagnostic_not_a_crash() {
        let (model, lib) = setup(
            "system S { }",
            "spin(x : int) : int = spin(x + 1)",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let e = call_function("spin", vec![Value::Int(0)], &ctx).unwrap_err();
        assert!(e.message.contains("recursion limit"));
    }

    #[test]
    fn any_values_are_checked_against_declared_types() {
        let (model, lib) = setup(
            "system S { property OS = \"seL4\" }",
            "f(c : component) : int = property(c, \"OS\")",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let e = call_function("f", vec![component(&model, "S")], &ctx).unwrap_err();
        assert!(e.message.contains("expected `int`"), "{}", e.message);
    }

    #[test]
    fn external_round_trip_and_final_line() {
        let (model, lib) = setup(
            "system S { }",
            r#"external truthy() : bool = "echo true"
               external last(x : int) : int = "echo noise; echo 42""#,
        );
        let t = &lib.externals["truthy"];
        let timeout = external::effective_timeout(Some(10));
        assert_eq!(
            external::run_external(&t.command, &[], &t.ret, &model, timeout).unwrap(),
            Value::Bool(true)
        );
        let l = &lib.externals["last"];
        assert_eq!(
            external::run_external(&l.command, &[Value::Int(1)], &l.ret, &model, timeout)
                .unwrap(),
            Value::Int(42)
        );
    }

    #[test]
    fn external_stdin_is_one_json_line() {
        let dir = tempfile::tempdir().unwrap();
        let capture = dir.path().join("stdin.txt");
        let (model, _) = setup(
            "system Sys { process Proc { thread T { } } }",
            "f() : bool = true",
        );
        let command = format!("cat > {}; echo true", capture.display());
        let t = component_id(&model, "Sys.Proc.T");
        let got = external::run_external(
            &command,
            &[Value::Component(t), Value::Int(5)],
            &Type::Bool,
            &model,
            external::effective_timeout(Some(10)),
        )
        .unwrap();
        assert_eq!(got, Value::Bool(true));
        let written = std::fs::read_to_string(&capture).unwrap();
        assert_eq!(written, "[\"Sys.Proc.T\",5]\n");
    }

    fn component_id(model: &ModelInstance, path: &str) -> crate::model::ComponentId {
        for r in model.instances_of(crate::model::InstanceFilter::AnyComponent) {
            if let ElementRef::Component(id) = r {
                if model.qualified_name(id) == path {
                    return id;
                }
            }
        }
        panic!("no component {path}");
    }

    #[test]
    fn failing_external_reports_command_and_status() {
        let (model, _) = setup("system S { }", "f() : bool = true");
        let e = external::run_external(
            "exit 3",
            &[],
            &Type::Bool,
            &model,
            external::effective_timeout(Some(10)),
        )
        .unwrap_err();
        assert!(e.contains("`exit 3`"), "{e}");
        assert!(e.contains("status 3"), "{e}");
    }

    #[test]
    fn unparseable_external_output_is_an_error() {
        let (model, _) = setup("system S { }", "f() : bool = true");
        let e = external::run_external(
            "echo maybe",
            &[],
            &Type::Bool,
            &model,
            external::effective_timeout(Some(10)),
        )
        .unwrap_err();
        assert!(e.contains("`maybe`"), "{e}");
    }

    #[test]
    fn slow_external_times_out() {
        let (model, _) = setup("system S { }", "f() : bool = true");
        let e = external::run_external(
            "sleep 5; echo true",
            &[],
            &Type::Bool,
            &model,
            std::time::Duration::from_millis(200),
        )
        .unwrap_err();
        assert!(e.contains("timed out"), "{e}");
    }

    #[test]
    fn let_scoped_shadowing_resolves_innermost() {
        let mut env = Env::new();
        env.bind("x".into(), Value::Int(1));
        env.bind("x".into(), Value::Int(2));
        assert_eq!(env.lookup("x"), Some(&Value::Int(2)));
        env.unbind();
        assert_eq!(env.lookup("x"), Some(&Value::Int(1)));
    }

    proptest! {
        #[test]
        fn member_distributes_over_union(
            a in proptest::collection::vec(0i64..12, 0..8),
            b in proptest::collection::vec(0i64..12, 0..8),
            x in 0i64..12,
        ) {
            let (model, lib) = setup(
                "system S { }",
                "u(a : set<int>, b : set<int>) : set<int> = union(a, b)
                 m(x : int, s : set<int>) : bool = member(x, s)
                 n(s : set<int>) : int = size(s)",
            );
            let ctx = EvalCtx::new(&model, &lib);
            let sa: SetValue = a.iter().map(|v| Value::Int(*v)).collect();
            let sb: SetValue = b.iter().map(|v| Value::Int(*v)).collect();
            let u = call_function(
                "u",
                vec![Value::Set(sa.clone()), Value::Set(sb.clone())],
                &ctx,
            )
            .unwrap();
            let in_union = call_function("m", vec![Value::Int(x), u.clone()], &ctx).unwrap();
            let in_a = call_function("m", vec![Value::Int(x), Value::Set(sa.clone())], &ctx)
                .unwrap();
            let in_b = call_function("m", vec![Value::Int(x), Value::Set(sb.clone())], &ctx)
                .unwrap();
            let expected = matches!(in_a, Value::Bool(true)) || matches!(in_b, Value::Bool(true));
            prop_assert_eq!(in_union, Value::Bool(expected));

            let nu = call_function("n", vec![u], &ctx).unwrap();
            let na = call_function("n", vec![Value::Set(sa)], &ctx).unwrap();
            let nb = call_function("n", vec![Value::Set(sb)], &ctx).unwrap();
            match (nu, na, nb) {
                (Value::Int(u), Value::Int(a), Value::Int(b)) => prop_assert!(u <= a + b),
                _ => prop_assert!(false),
            }
        }
    }

    #[test]
    fn timeout_env_var_is_honored() {
        // Set and restore around the assertion; tests in this module do not
        // otherwise read the variable concurrently.
        std::env::set_var(external::TIMEOUT_ENV_VAR, "7");
        let t = external::effective_timeout(None);
        std::env::remove_var(external::TIMEOUT_ENV_VAR);
        assert_eq!(t, std::time::Duration::from_secs(7));
        assert_eq!(
            external::effective_timeout(None),
            std::time::Duration::from_secs(external::DEFAULT_TIMEOUT_SECS)
        );
        assert_eq!(
            external::effective_timeout(Some(3)),
            std::time::Duration::from_secs(3)
        );
    }

    #[test]
    fn comprehension_over_set_keeps_insertion_order_semantics() {
        let (model, lib) = setup(
            "system S { }",
            "doubles(s : set<int>) : set<int> = {x * 2 for (x in s)}",
        );
        let ctx = EvalCtx::new(&model, &lib);
        let s: SetValue = [Value::Int(3), Value::Int(1)].into_iter().collect();
        let got = call_function("doubles", vec![Value::Set(s)], &ctx).unwrap();
        match got {
            Value::Set(out) => {
                let items: Vec<&Value> = out.iter().collect();
                assert_eq!(items, [&Value::Int(6), &Value::Int(2)]);
            }
            other => panic!("expected a set, got {other:?}"),
        }
    }

}
