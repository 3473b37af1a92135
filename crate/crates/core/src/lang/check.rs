//! Typechecking, stratification enforcement, and classification of rule
//! bodies into formulas and computation expressions.
//!
//! Classification happens here rather than in the parser because only the
//! complete declaration set tells a claim application apart from a function
//! call. `and`/`or` become formula connectives exactly when one operand
//! contains formula-only material (a claim, quantifier, `let`, or `=>`);
//! otherwise the whole operator stays a single computation atom, keeping
//! left-to-right short-circuit behavior for guard idioms like
//! `has_property(p, K) and property(p, K) = v`.

use super::ast::{self, BinOp, Lit, Param, SClause, SDomain, SSegment, STerm, SType};
use super::ty::Type;
use super::typed::*;
use crate::eval::value::Value;
use crate::model::InstanceFilter;
use crate::span::Span;
use indexmap::IndexMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{span}: {message}")]
pub struct TypeError {
    pub span: Span,
    pub message: String,
}

impl TypeError {
    fn new(span: Span, message: impl Into<String>) -> Self {
        TypeError {
            span,
            message: message.into(),
        }
    }
}

pub fn typecheck(lib: &ast::Library) -> Result<TypedLibrary, Vec<TypeError>> {
    let mut errors = Vec::new();

    let mut claims: IndexMap<String, Vec<Type>> = IndexMap::new();
    let mut skip_clause = vec![false; lib.clauses.len()];
    for (i, clause) in lib.clauses.iter().enumerate() {
        if let Some(b) = reject_builtin_shadow(&clause.name, clause.span) {
            errors.push(b);
            skip_clause[i] = true;
            continue;
        }
        match param_types(&clause.params) {
            Ok(tys) => match claims.get(&clause.name) {
                Some(existing) if *existing != tys => {
                    errors.push(TypeError::new(
                        clause.span,
                        format!(
                            "rule for `{}` disagrees with the earlier rule's parameter types",
                            clause.name
                        ),
                    ));
                    skip_clause[i] = true;
                }
                Some(_) => {}
                None => {
                    claims.insert(clause.name.clone(), tys);
                }
            },
            Err(e) => {
                errors.push(e);
                skip_clause[i] = true;
            }
        }
    }

    let mut functions: IndexMap<String, (Vec<Type>, Type)> = IndexMap::new();
    for f in lib.functions.values() {
        if let Some(b) = reject_builtin_shadow(&f.name, f.span) {
            errors.push(b);
            continue;
        }
        match (param_types(&f.params), resolve_stype(&f.ret, f.span)) {
            (Ok(tys), Ok(ret)) => {
                functions.insert(f.name.clone(), (tys, ret));
            }
            (a, b) => {
                errors.extend(a.err());
                errors.extend(b.err());
            }
        }
    }

    let mut constants: IndexMap<String, Type> = IndexMap::new();
    for c in lib.constants.values() {
        if let Some(b) = reject_builtin_shadow(&c.name, c.span) {
            errors.push(b);
            continue;
        }
        match resolve_stype(&c.ty, c.span) {
            Ok(ty) => {
                constants.insert(c.name.clone(), ty);
            }
            Err(e) => errors.push(e),
        }
    }

    let mut externals: IndexMap<String, (Vec<Type>, Type)> = IndexMap::new();
    for e in lib.externals.values() {
        if let Some(b) = reject_builtin_shadow(&e.name, e.span) {
            errors.push(b);
            continue;
        }
        match (param_types(&e.params), resolve_stype(&e.ret, e.span)) {
            (Ok(tys), Ok(ret)) => {
                if !matches!(ret, Type::Bool | Type::Int | Type::Real | Type::String) {
                    errors.push(TypeError::new(
                        e.span,
                        format!("external `{}` must return bool, int, real, or string", e.name),
                    ));
                } else {
                    externals.insert(e.name.clone(), (tys, ret));
                }
            }
            (a, b) => {
                errors.extend(a.err());
                errors.extend(b.err());
            }
        }
    }

    let ck = Checker {
        claims: &claims,
        functions: &functions,
        constants: &constants,
        externals: &externals,
    };

    let mut out = TypedLibrary::default();

    for f in lib.functions.values() {
        let Some((ptys, ret)) = functions.get(&f.name) else {
            continue;
        };
        let mut env = Scope::default();
        let params = bind_params(&f.params, ptys, &mut env);
        match ck.check_expr(&f.body, &mut env) {
            Ok(body) if body.ty.assignable_to(ret) => {
                out.functions.insert(
                    f.name.clone(),
                    Function {
                        name: f.name.clone(),
                        params,
                        ret: ret.clone(),
                        body,
                    },
                );
            }
            Ok(body) => errors.push(TypeError::new(
                f.span,
                format!(
                    "body of `{}` has type `{}`, expected `{}`",
                    f.name, body.ty, ret
                ),
            )),
            Err(e) => errors.push(e),
        }
    }

    for c in lib.constants.values() {
        let Some(ty) = constants.get(&c.name) else {
            continue;
        };
        let mut env = Scope::default();
        match ck.check_expr(&c.value, &mut env) {
            Ok(value) if value.ty.assignable_to(ty) => {
                out.constants.insert(
                    c.name.clone(),
                    Constant {
                        name: c.name.clone(),
                        ty: ty.clone(),
                        value,
                    },
                );
            }
            Ok(value) => errors.push(TypeError::new(
                c.span,
                format!(
                    "constant `{}` has type `{}`, expected `{}`",
                    c.name, value.ty, ty
                ),
            )),
            Err(e) => errors.push(e),
        }
    }

    for e in lib.externals.values() {
        let Some((ptys, ret)) = externals.get(&e.name) else {
            continue;
        };
        let mut env = Scope::default();
        let params = bind_params(&e.params, ptys, &mut env);
        out.externals.insert(
            e.name.clone(),
            External {
                name: e.name.clone(),
                params,
                ret: ret.clone(),
                command: e.command.clone(),
            },
        );
    }

    for (i, clause) in lib.clauses.iter().enumerate() {
        if skip_clause[i] {
            continue;
        }
        let ptys = claims[&clause.name].clone();
        match ck.check_clause(clause, &ptys) {
            Ok(typed) => {
                let index = out.clauses.len();
                out.clauses.push(typed);
                out.claims
                    .entry(clause.name.clone())
                    .or_insert_with(|| ClaimSig {
                        params: ptys,
                        clauses: Vec::new(),
                    })
                    .clauses
                    .push(index);
            }
            Err(e) => errors.push(e),
        }
    }

    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

fn reject_builtin_shadow(name: &str, span: Span) -> Option<TypeError> {
    Builtin::lookup(name).map(|_| {
        TypeError::new(
            span,
            format!("`{name}` is a builtin function and cannot be redefined"),
        )
    })
}

fn resolve_stype(sty: &SType, fallback: Span) -> Result<Type, TypeError> {
    match sty {
        SType::Bool => Ok(Type::Bool),
        SType::Int => Ok(Type::Int),
        SType::Real => Ok(Type::Real),
        SType::String => Ok(Type::String),
        SType::Set(elem) => Ok(Type::Set(Box::new(resolve_stype(elem, fallback)?))),
        SType::Named(name, span) => Type::model_type(name)
            .ok_or_else(|| TypeError::new(*span, format!("unknown type `{name}`"))),
    }
}

fn param_types(params: &[Param]) -> Result<Vec<Type>, TypeError> {
    params
        .iter()
        .map(|p| resolve_stype(&p.ty, p.span))
        .collect()
}

fn bind_params(params: &[Param], tys: &[Type], env: &mut Scope) -> Vec<(String, Type)> {
    params
        .iter()
        .zip(tys)
        .map(|(p, ty)| {
            env.push(p.name.clone(), ty.clone());
            (p.name.clone(), ty.clone())
        })
        .collect()
}

#[derive(Default)]
struct Scope {
    vars: Vec<(String, Type)>,
}

impl Scope {
    fn push(&mut self, name: String, ty: Type) {
        self.vars.push((name, ty));
    }

    fn pop(&mut self) {
        self.vars.pop();
    }

    fn lookup(&self, name: &str) -> Option<&Type> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

struct Checker<'a> {
    claims: &'a IndexMap<String, Vec<Type>>,
    functions: &'a IndexMap<String, (Vec<Type>, Type)>,
    constants: &'a IndexMap<String, Type>,
    externals: &'a IndexMap<String, (Vec<Type>, Type)>,
}

impl Checker<'_> {
    fn check_clause(&self, clause: &SClause, ptys: &[Type]) -> Result<Clause, TypeError> {
        let mut env = Scope::default();
        let params = bind_params(&clause.params, ptys, &mut env);
        let mut description = Vec::new();
        for seg in &clause.description {
            match seg {
                SSegment::Text(t) => description.push(Segment::Text(t.clone())),
                SSegment::Expr(t) => {
                    let e = self.check_expr(t, &mut env)?;
                    if !e.ty.displayable() {
                        return Err(TypeError::new(
                            t.span(),
                            format!("claim text cannot display a value of type `{}`", e.ty),
                        ));
                    }
                    description.push(Segment::Expr(e));
                }
            }
        }
        let body = self.check_formula(&clause.body, &mut env)?;
        for p in &clause.params {
            if !p.name.starts_with('_')
                && !term_uses_var(&clause.body, &p.name)
                && !clause.description.iter().any(|s| match s {
                    SSegment::Expr(t) => term_uses_var(t, &p.name),
                    SSegment::Text(_) => false,
                })
            {
                return Err(TypeError::new(
                    p.span,
                    format!(
                        "parameter `{}` of `{}` is unused; prefix it with `_` to ignore it",
                        p.name, clause.name
                    ),
                ));
            }
        }
        Ok(Clause {
            claim: clause.name.clone(),
            params,
            description,
            body,
            span: clause.span,
        })
    }

    fn check_formula(&self, t: &STerm, env: &mut Scope) -> Result<Formula, TypeError> {
        let span = t.span();
        let kind = match t {
            STerm::Binop(BinOp::And | BinOp::Or, a, b, _)
                if self.is_formula_material(a) || self.is_formula_material(b) =>
            {
                let l = Box::new(self.check_formula(a, env)?);
                let r = Box::new(self.check_formula(b, env)?);
                if matches!(t, STerm::Binop(BinOp::And, ..)) {
                    FormulaKind::And(l, r)
                } else {
                    FormulaKind::Or(l, r)
                }
            }
            STerm::Binop(BinOp::Implies, a, b, _) => {
                if self.is_formula_material(a) {
                    return Err(TypeError::new(
                        a.span(),
                        "the antecedent of `=>` must be a computation expression; \
                         claims cannot appear here",
                    ));
                }
                let antecedent = self.check_bool_expr(a, env, "the antecedent of `=>`")?;
                let consequent = Box::new(self.check_formula(b, env)?);
                FormulaKind::Implies(antecedent, consequent)
            }
            STerm::Forall(var, domain, body, _) | STerm::Exists(var, domain, body, _) => {
                let (domain, elem_ty) = self.check_domain(domain, env, span)?;
                env.push(var.clone(), elem_ty.clone());
                let body = self.check_formula(body, env);
                env.pop();
                let body = Box::new(body?);
                if matches!(t, STerm::Forall(..)) {
                    FormulaKind::Forall {
                        var: var.clone(),
                        elem_ty,
                        domain,
                        body,
                    }
                } else {
                    FormulaKind::Exists {
                        var: var.clone(),
                        elem_ty,
                        domain,
                        body,
                    }
                }
            }
            STerm::Let(var, sty, value, body, _) => {
                let ty = resolve_stype(sty, span)?;
                let value = self.check_expr(value, env)?;
                if !value.ty.assignable_to(&ty) {
                    return Err(TypeError::new(
                        value.span,
                        format!("`let {var}` binds a `{}`, expected `{}`", value.ty, ty),
                    ));
                }
                env.push(var.clone(), ty.clone());
                let body = self.check_formula(body, env);
                env.pop();
                FormulaKind::Let {
                    var: var.clone(),
                    ty,
                    value,
                    body: Box::new(body?),
                }
            }
            STerm::Call(name, args, _) if self.claims.contains_key(name) => {
                let ptys = &self.claims[name];
                if args.len() != ptys.len() {
                    return Err(TypeError::new(
                        span,
                        format!(
                            "claim `{name}` expects {} argument(s), got {}",
                            ptys.len(),
                            args.len()
                        ),
                    ));
                }
                let mut checked = Vec::new();
                for (i, (arg, pty)) in args.iter().zip(ptys).enumerate() {
                    let e = self.check_expr(arg, env)?;
                    if !e.ty.assignable_to(pty) {
                        return Err(TypeError::new(
                            e.span,
                            format!(
                                "argument {} of claim `{name}` has type `{}`, expected `{pty}`",
                                i + 1,
                                e.ty
                            ),
                        ));
                    }
                    checked.push(e);
                }
                FormulaKind::ClaimApp {
                    name: name.clone(),
                    args: checked,
                }
            }
            STerm::Not(inner, _) if self.first_claim_in(inner).is_some() => {
                let name = self.first_claim_in(inner).unwrap();
                return Err(TypeError::new(
                    span,
                    format!("claim `{name}` used under negation"),
                ));
            }
            _ => FormulaKind::Eval(self.check_bool_expr(t, env, "a rule body atom")?),
        };
        Ok(Formula { kind, span })
    }

    /// Does the term contain anything that can only live at the formula
    /// level? Such operands force `and`/`or` to become connectives.
    fn is_formula_material(&self, t: &STerm) -> bool {
        match t {
            STerm::Forall(..) | STerm::Exists(..) | STerm::Let(..) => true,
            STerm::Binop(BinOp::Implies, ..) => true,
            STerm::Call(name, args, _) => {
                self.claims.contains_key(name) || args.iter().any(|a| self.is_formula_material(a))
            }
            STerm::Binop(_, a, b, _) => {
                self.is_formula_material(a) || self.is_formula_material(b)
            }
            STerm::Not(x, _) | STerm::Neg(x, _) => self.is_formula_material(x),
            STerm::If(c, a, b, _) => {
                self.is_formula_material(c)
                    || self.is_formula_material(a)
                    || self.is_formula_material(b)
            }
            STerm::SetLit(items, _) => items.iter().any(|i| self.is_formula_material(i)),
            STerm::Comprehension {
                head, domain, cond, ..
            } => {
                self.is_formula_material(head)
                    || matches!(domain, SDomain::Set(e) if self.is_formula_material(e))
                    || matches!(cond, Some(c) if self.is_formula_material(c))
            }
            STerm::Lit(..) | STerm::Var(..) => false,
        }
    }

    fn first_claim_in(&self, t: &STerm) -> Option<String> {
        match t {
            STerm::Call(name, args, _) => {
                if self.claims.contains_key(name) {
                    Some(name.clone())
                } else {
                    args.iter().find_map(|a| self.first_claim_in(a))
                }
            }
            STerm::Not(x, _) | STerm::Neg(x, _) => self.first_claim_in(x),
            STerm::Binop(_, a, b, _) => {
                self.first_claim_in(a).or_else(|| self.first_claim_in(b))
            }
            STerm::Forall(_, d, body, _) | STerm::Exists(_, d, body, _) => {
                match d {
                    SDomain::Set(e) => self.first_claim_in(e),
                    SDomain::Type(_) => None,
                }
                .or_else(|| self.first_claim_in(body))
            }
            STerm::Let(_, _, v, body, _) => {
                self.first_claim_in(v).or_else(|| self.first_claim_in(body))
            }
            STerm::If(c, a, b, _) => self
                .first_claim_in(c)
                .or_else(|| self.first_claim_in(a))
                .or_else(|| self.first_claim_in(b)),
            STerm::SetLit(items, _) => items.iter().find_map(|i| self.first_claim_in(i)),
            STerm::Comprehension {
                head, domain, cond, ..
            } => self
                .first_claim_in(head)
                .or_else(|| match domain {
                    SDomain::Set(e) => self.first_claim_in(e),
                    SDomain::Type(_) => None,
                })
                .or_else(|| cond.as_ref().and_then(|c| self.first_claim_in(c))),
            STerm::Lit(..) | STerm::Var(..) => None,
        }
    }

    fn check_domain(
        &self,
        domain: &SDomain,
        env: &mut Scope,
        span: Span,
    ) -> Result<(Domain, Type), TypeError> {
        match domain {
            SDomain::Type(sty) => {
                let ty = resolve_stype(sty, span)?;
                let filter = match &ty {
                    Type::Component(None) => InstanceFilter::AnyComponent,
                    Type::Component(Some(k)) => InstanceFilter::Kind(*k),
                    Type::Connection => InstanceFilter::Connection,
                    other => {
                        return Err(TypeError::new(
                            span,
                            format!(
                                "cannot enumerate `{other}`; quantification ranges over \
                                 model types or sets"
                            ),
                        ))
                    }
                };
                Ok((Domain::Instances(filter), ty))
            }
            SDomain::Set(term) => {
                let e = self.check_expr(term, env)?;
                let elem = match &e.ty {
                    Type::Set(elem) => (**elem).clone(),
                    Type::Any => Type::Any,
                    other => {
                        return Err(TypeError::new(
                            e.span,
                            format!("`in` expects a set, got `{other}`"),
                        ))
                    }
                };
                Ok((Domain::SetExpr(Box::new(e)), elem))
            }
        }
    }

    fn check_bool_expr(
        &self,
        t: &STerm,
        env: &mut Scope,
        what: &str,
    ) -> Result<Expr, TypeError> {
        let e = self.check_expr(t, env)?;
        if matches!(e.ty, Type::Bool | Type::Any) {
            Ok(e)
        } else {
            Err(TypeError::new(
                e.span,
                format!("{what} must be bool, got `{}`", e.ty),
            ))
        }
    }

    fn check_expr(&self, t: &STerm, env: &mut Scope) -> Result<Expr, TypeError> {
        let span = t.span();
        let (kind, ty) = match t {
            STerm::Lit(lit, _) => {
                let (v, ty) = match lit {
                    Lit::Bool(b) => (Value::Bool(*b), Type::Bool),
                    Lit::Int(i) => (Value::Int(*i), Type::Int),
                    Lit::Real(r) => (Value::Real(*r), Type::Real),
                    Lit::Str(s) => (Value::Str(s.clone()), Type::String),
                };
                (ExprKind::Lit(v), ty)
            }
            STerm::Var(name, _) => {
                if let Some(ty) = env.lookup(name) {
                    (ExprKind::Var(name.clone()), ty.clone())
                } else if let Some(ty) = self.constants.get(name) {
                    (ExprKind::ConstRef(name.clone()), ty.clone())
                } else if self.functions.contains_key(name) {
                    return Err(TypeError::new(
                        span,
                        format!("`{name}` is a function; call it as `{name}(...)`"),
                    ));
                } else {
                    return Err(TypeError::new(span, format!("unknown variable `{name}`")));
                }
            }
            STerm::Call(name, args, _) => return self.check_call(name, args, env, span),
            STerm::Not(inner, _) => {
                let e = self.check_bool_expr(inner, env, "`not`")?;
                (ExprKind::Not(Box::new(e)), Type::Bool)
            }
            STerm::Neg(inner, _) => {
                let e = self.check_expr(inner, env)?;
                let ty = match e.ty {
                    Type::Int => Type::Int,
                    Type::Real => Type::Real,
                    Type::Any => Type::Any,
                    ref other => {
                        return Err(TypeError::new(
                            e.span,
                            format!("cannot negate `{other}`"),
                        ))
                    }
                };
                (ExprKind::Neg(Box::new(e)), ty)
            }
            STerm::Binop(op, a, b, opspan) => {
                return self.check_binop(*op, a, b, env, *opspan)
            }
            STerm::If(c, a, b, _) => {
                let c = self.check_bool_expr(c, env, "the condition of `if`")?;
                let a = self.check_expr(a, env)?;
                let b = self.check_expr(b, env)?;
                let ty = a.ty.join(&b.ty).ok_or_else(|| {
                    TypeError::new(
                        span,
                        format!(
                            "the branches of `if` have incompatible types `{}` and `{}`",
                            a.ty, b.ty
                        ),
                    )
                })?;
                (
                    ExprKind::If(Box::new(c), Box::new(a), Box::new(b)),
                    ty,
                )
            }
            STerm::SetLit(items, _) => {
                let mut checked = Vec::new();
                let mut elem = Type::Empty;
                for item in items {
                    let e = self.check_expr(item, env)?;
                    elem = elem.join(&e.ty).ok_or_else(|| {
                        TypeError::new(
                            e.span,
                            format!("set literal mixes `{elem}` and `{}` elements", e.ty),
                        )
                    })?;
                    checked.push(e);
                }
                (ExprKind::SetLit(checked), Type::Set(Box::new(elem)))
            }
            STerm::Comprehension {
                head,
                var,
                domain,
                cond,
                ..
            } => {
                let (domain, elem_ty) = self.check_domain(domain, env, span)?;
                env.push(var.clone(), elem_ty);
                let result = (|| {
                    let head = self.check_expr(head, env)?;
                    let cond = match cond {
                        Some(c) => Some(Box::new(self.check_bool_expr(
                            c,
                            env,
                            "a comprehension filter",
                        )?)),
                        None => None,
                    };
                    Ok((head, cond))
                })();
                env.pop();
                let (head, cond) = result?;
                let ty = Type::Set(Box::new(head.ty.clone()));
                (
                    ExprKind::Comprehension {
                        head: Box::new(head),
                        var: var.clone(),
                        domain,
                        cond,
                    },
                    ty,
                )
            }
            STerm::Forall(..) | STerm::Exists(..) => {
                return Err(TypeError::new(
                    span,
                    "quantifiers can only appear in rule bodies, not in computations",
                ))
            }
            STerm::Let(..) => {
                return Err(TypeError::new(
                    span,
                    "`let` can only appear in rule bodies, not in computations",
                ))
            }
        };
        Ok(Expr { kind, ty, span })
    }

    fn check_call(
        &self,
        name: &str,
        args: &[STerm],
        env: &mut Scope,
        span: Span,
    ) -> Result<Expr, TypeError> {
        if self.claims.contains_key(name) {
            return Err(TypeError::new(
                span,
                format!("claim `{name}` used inside a computation"),
            ));
        }
        let mut checked = Vec::new();
        for a in args {
            checked.push(self.check_expr(a, env)?);
        }
        if let Some(b) = Builtin::lookup(name) {
            return self.check_builtin(b, checked, span);
        }
        let (ptys, ret, kind): (&[Type], &Type, fn(String, Vec<Expr>) -> ExprKind) =
            if let Some((ptys, ret)) = self.functions.get(name) {
                (ptys, ret, |n, a| ExprKind::CallFun(n, a))
            } else if let Some((ptys, ret)) = self.externals.get(name) {
                (ptys, ret, |n, a| ExprKind::CallExternal(n, a))
            } else {
                return Err(TypeError::new(span, format!("unknown function `{name}`")));
            };
        if checked.len() != ptys.len() {
            return Err(TypeError::new(
                span,
                format!(
                    "`{name}` expects {} argument(s), got {}",
                    ptys.len(),
                    checked.len()
                ),
            ));
        }
        for (i, (arg, pty)) in checked.iter().zip(ptys).enumerate() {
            if !arg.ty.assignable_to(pty) {
                return Err(TypeError::new(
                    arg.span,
                    format!(
                        "argument {} of `{name}` has type `{}`, expected `{pty}`",
                        i + 1,
                        arg.ty
                    ),
                ));
            }
        }
        Ok(Expr {
            kind: kind(name.to_string(), checked),
            ty: ret.clone(),
            span,
        })
    }

    fn check_builtin(
        &self,
        b: Builtin,
        args: Vec<Expr>,
        span: Span,
    ) -> Result<Expr, TypeError> {
        let arity = match b {
            Builtin::Parent
            | Builtin::Source
            | Builtin::Destination
            | Builtin::Name
            | Builtin::Sum
            | Builtin::Size
            | Builtin::IsEmpty => 1,
            _ => 2,
        };
        if args.len() != arity {
            return Err(TypeError::new(
                span,
                format!("`{}` expects {arity} argument(s), got {}", b.name(), args.len()),
            ));
        }
        let bad = |i: usize, expected: &str| -> TypeError {
            TypeError::new(
                args[i].span,
                format!(
                    "`{}` expects {expected}, got `{}`",
                    b.name(),
                    args[i].ty
                ),
            )
        };
        let ty = match b {
            Builtin::Parent => match args[0].ty {
                Type::Component(_) | Type::Feature | Type::Any => Type::Component(None),
                Type::Connection => {
                    return Err(TypeError::new(
                        args[0].span,
                        "a connection has no parent; `parent` expects a component or feature",
                    ))
                }
                _ => return Err(bad(0, "a component or feature")),
            },
            Builtin::Source | Builtin::Destination => match args[0].ty {
                Type::Connection | Type::Any => Type::Feature,
                _ => return Err(bad(0, "a connection")),
            },
            Builtin::Name => match args[0].ty {
                Type::Component(_) | Type::Connection | Type::Feature | Type::Any => Type::String,
                _ => return Err(bad(0, "a model reference")),
            },
            Builtin::Property | Builtin::HasProperty => {
                match args[0].ty {
                    Type::Component(_) | Type::Connection | Type::Any => {}
                    _ => return Err(bad(0, "a component or connection")),
                }
                match args[1].ty {
                    Type::String | Type::Any => {}
                    _ => return Err(bad(1, "a property name string")),
                }
                if b == Builtin::Property {
                    Type::Any
                } else {
                    Type::Bool
                }
            }
            Builtin::Member => {
                match &args[1].ty {
                    Type::Set(elem) => {
                        let v = &args[0].ty;
                        if !v.assignable_to(elem) && !elem.assignable_to(v) {
                            return Err(TypeError::new(
                                span,
                                format!(
                                    "membership test between `{v}` and `{}`",
                                    args[1].ty
                                ),
                            ));
                        }
                    }
                    Type::Any => {}
                    _ => return Err(bad(1, "a set")),
                }
                Type::Bool
            }
            Builtin::Union => {
                let joined = match (&args[0].ty, &args[1].ty) {
                    (Type::Set(a), Type::Set(b)) => a.join(b).ok_or_else(|| {
                        TypeError::new(
                            span,
                            format!("union of `{}` and `{}`", args[0].ty, args[1].ty),
                        )
                    })?,
                    (Type::Any, Type::Set(_) | Type::Any) => Type::Any,
                    (Type::Set(_), Type::Any) => Type::Any,
                    _ => {
                        let i = if matches!(args[0].ty, Type::Set(_) | Type::Any) {
                            1
                        } else {
                            0
                        };
                        return Err(bad(i, "a set"));
                    }
                };
                Type::Set(Box::new(joined))
            }
            Builtin::Sum => match &args[0].ty {
                Type::Set(elem) => match **elem {
                    Type::Int | Type::Empty => Type::Int,
                    Type::Real => Type::Real,
                    Type::Any => Type::Any,
                    _ => return Err(bad(0, "a set of int or real")),
                },
                Type::Any => Type::Any,
                _ => return Err(bad(0, "a set of int or real")),
            },
            Builtin::Size => match args[0].ty {
                Type::Set(_) | Type::Any => Type::Int,
                _ => return Err(bad(0, "a set")),
            },
            Builtin::IsEmpty => match args[0].ty {
                Type::Set(_) | Type::Any => Type::Bool,
                _ => return Err(bad(0, "a set")),
            },
            Builtin::Debug => {
                match args[0].ty {
                    Type::String | Type::Any => {}
                    _ => return Err(bad(0, "a label string")),
                }
                args[1].ty.clone()
            }
        };
        Ok(Expr {
            kind: ExprKind::Builtin(b, args),
            ty,
            span,
        })
    }

    fn check_binop(
        &self,
        op: BinOp,
        a: &STerm,
        b: &STerm,
        env: &mut Scope,
        span: Span,
    ) -> Result<Expr, TypeError> {
        if op == BinOp::Implies {
            return Err(TypeError::new(
                span,
                "`=>` can only appear in rule bodies, not in computations",
            ));
        }
        let l = self.check_expr(a, env)?;
        let r = self.check_expr(b, env)?;
        let ty = match op {
            BinOp::And | BinOp::Or => {
                for side in [&l, &r] {
                    if !matches!(side.ty, Type::Bool | Type::Any) {
                        return Err(TypeError::new(
                            side.span,
                            format!("`{}` expects bool operands, got `{}`", op.symbol(), side.ty),
                        ));
                    }
                }
                Type::Bool
            }
            BinOp::Eq | BinOp::Ne => {
                if l.ty.join(&r.ty).is_none() {
                    return Err(TypeError::new(
                        span,
                        format!("cannot compare `{}` with `{}`", l.ty, r.ty),
                    ));
                }
                Type::Bool
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let ok = matches!(
                    (&l.ty, &r.ty),
                    (Type::Int, Type::Int)
                        | (Type::Real, Type::Real)
                        | (Type::Any, Type::Int | Type::Real | Type::Any)
                        | (Type::Int | Type::Real, Type::Any)
                );
                if !ok {
                    return Err(TypeError::new(
                        span,
                        format!(
                            "cannot order `{}` and `{}` with `{}`",
                            l.ty,
                            r.ty,
                            op.symbol()
                        ),
                    ));
                }
                Type::Bool
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => match (&l.ty, &r.ty) {
                (Type::Int, Type::Int) => Type::Int,
                (Type::Real, Type::Real) => Type::Real,
                (Type::Any, Type::Int | Type::Real | Type::Any)
                | (Type::Int | Type::Real, Type::Any) => Type::Any,
                _ => {
                    return Err(TypeError::new(
                        span,
                        format!(
                            "cannot apply `{}` to `{}` and `{}`",
                            op.symbol(),
                            l.ty,
                            r.ty
                        ),
                    ))
                }
            },
            BinOp::Implies => unreachable!("handled above"),
        };
        Ok(Expr {
            kind: ExprKind::Binop(op, Box::new(l), Box::new(r)),
            ty,
            span,
        })
    }
}

fn term_uses_var(t: &STerm, name: &str) -> bool {
    match t {
        STerm::Var(v, _) => v == name,
        STerm::Lit(..) => false,
        STerm::Call(_, args, _) => args.iter().any(|a| term_uses_var(a, name)),
        STerm::Not(x, _) | STerm::Neg(x, _) => term_uses_var(x, name),
        STerm::Binop(_, a, b, _) => term_uses_var(a, name) || term_uses_var(b, name),
        STerm::Forall(_, d, body, _) | STerm::Exists(_, d, body, _) => {
            matches!(d, SDomain::Set(e) if term_uses_var(e, name)) || term_uses_var(body, name)
        }
        STerm::Let(_, _, v, body, _) => term_uses_var(v, name) || term_uses_var(body, name),
        STerm::If(c, a, b, _) => {
            term_uses_var(c, name) || term_uses_var(a, name) || term_uses_var(b, name)
        }
        STerm::SetLit(items, _) => items.iter().any(|i| term_uses_var(i, name)),
        STerm::Comprehension {
            head, domain, cond, ..
        } => {
            term_uses_var(head, name)
                || matches!(domain, SDomain::Set(e) if term_uses_var(e, name))
                || matches!(cond, Some(c) if term_uses_var(c, name))
        }
    }
}
