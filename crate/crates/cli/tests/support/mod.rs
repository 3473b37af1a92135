//! Helpers for the acceptance suite: a seeded random model and library
//! generator, and a bottom-up fixed-point oracle that shares only the
//! expression evaluator with the proof engine it checks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use resolute_core::eval::{enumerate_domain, evaluate, Env, EvalCtx, Value};
use resolute_core::lang::typed::{Formula, FormulaKind, TypedLibrary};
use resolute_core::model::{ElementRef, InstanceFilter, ModelInstance};
use std::collections::HashMap;

pub struct Generated {
    pub model_src: String,
    pub library_src: String,
}

const KINDS: [&str; 4] = ["process", "thread", "memory", "device"];

/// A random model plus a random non-recursive library: at most 6 components,
/// 5 clauses, and quantifier depth 2; claims only call later declarations,
/// so a single bottom-up pass computes the least fixed point.
pub fn generate(seed: u64) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Generated {
        model_src: gen_model(&mut rng),
        library_src: gen_library(&mut rng),
    }
}

fn gen_model(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=5);
    let mut src = String::from("system S {\n");
    for i in 0..n {
        let kind = KINDS[rng.gen_range(0..KINDS.len())];
        src.push_str(&format!("  {kind} C{i} {{\n"));
        if rng.gen_bool(0.6) {
            src.push_str(&format!("    property Flag = {}\n", rng.gen_bool(0.5)));
        }
        if rng.gen_bool(0.5) {
            src.push_str(&format!("    property W = {}\n", rng.gen_range(0..10)));
        }
        src.push_str("  }\n");
    }
    src.push_str("}\n");
    src
}

fn gen_library(rng: &mut ChaCha8Rng) -> String {
    let claims = rng.gen_range(1..=4usize);
    let mut extra = 5 - claims;
    let mut decls = Vec::new();
    for i in 0..claims {
        let mut alternatives = 1;
        if extra > 0 && rng.gen_bool(0.4) {
            alternatives += 1;
            extra -= 1;
        }
        let callable: Vec<String> = (i + 1..claims).map(|j| format!("p{j}")).collect();
        for _ in 0..alternatives {
            let mut fresh = 0;
            let vars = vec!["c".to_string()];
            let body = gen_formula(rng, 2, &vars, &callable, &mut fresh);
            decls.push(format!(
                "p{i}(c : component) <=\n  ** \"p{i} holds for \" c **\n  {body}\n"
            ));
        }
    }
    decls.join("\n")
}

fn gen_formula(
    rng: &mut ChaCha8Rng,
    depth: u32,
    vars: &[String],
    callable: &[String],
    fresh: &mut u32,
) -> String {
    let roll = if depth == 0 {
        rng.gen_range(0..2)
    } else {
        rng.gen_range(0..7)
    };
    match roll {
        0 | 1 => gen_leaf(rng, vars, callable),
        2 => format!(
            "({} and {})",
            gen_formula(rng, depth - 1, vars, callable, fresh),
            gen_formula(rng, depth - 1, vars, callable, fresh)
        ),
        3 => format!(
            "({} or {})",
            gen_formula(rng, depth - 1, vars, callable, fresh),
            gen_formula(rng, depth - 1, vars, callable, fresh)
        ),
        4 => format!(
            "({} => {})",
            gen_atom(rng, vars),
            gen_formula(rng, depth - 1, vars, callable, fresh)
        ),
        _ => {
            let v = format!("v{fresh}");
            *fresh += 1;
            let kind = KINDS[rng.gen_range(0..KINDS.len())];
            let word = if rng.gen_bool(0.5) { "forall" } else { "exists" };
            let mut inner: Vec<String> = vars.to_vec();
            inner.push(v.clone());
            format!(
                "({word} ({v} : {kind}). {})",
                gen_formula(rng, depth - 1, &inner, callable, fresh)
            )
        }
    }
}

fn gen_leaf(rng: &mut ChaCha8Rng, vars: &[String], callable: &[String]) -> String {
    if !callable.is_empty() && rng.gen_bool(0.4) {
        format!(
            "{}({})",
            callable.choose(rng).unwrap(),
            vars.choose(rng).unwrap()
        )
    } else {
        gen_atom(rng, vars)
    }
}

fn gen_atom(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let v = vars.choose(rng).unwrap();
    match rng.gen_range(0..6) {
        0 => "true".to_string(),
        1 => "false".to_string(),
        2 => format!("has_property({v}, \"Flag\")"),
        3 => format!("(has_property({v}, \"Flag\") and property({v}, \"Flag\") = true)"),
        4 => format!("(name({v}) = \"C{}\")", rng.gen_range(0..5)),
        _ => format!(
            "(has_property({v}, \"W\") and property({v}, \"W\") > {})",
            rng.gen_range(0..9)
        ),
    }
}

pub fn all_components(model: &ModelInstance) -> Vec<Value> {
    model
        .instances_of(InstanceFilter::AnyComponent)
        .into_iter()
        .map(|r| match r {
            ElementRef::Component(id) => Value::Component(id),
            other => panic!("component filter returned {other:?}"),
        })
        .collect()
}

/// Truth of every (claim, component) instance, computed bottom-up: since
/// generated claims only call later declarations, one reverse pass over the
/// declaration order is the least fixed point.
pub fn oracle_table(
    model: &ModelInstance,
    lib: &TypedLibrary,
) -> HashMap<(String, Value), bool> {
    let ctx = EvalCtx::new(model, lib);
    let mut table = HashMap::new();
    let names: Vec<String> = lib.claims.keys().cloned().collect();
    for name in names.iter().rev() {
        let sig = &lib.claims[name.as_str()];
        for comp in all_components(model) {
            let mut holds = false;
            for &ci in &sig.clauses {
                let clause = &lib.clauses[ci];
                let mut env = Env::new();
                env.bind(clause.params[0].0.clone(), comp.clone());
                if truth(&clause.body, &mut env, &ctx, &table) {
                    holds = true;
                    break;
                }
            }
            table.insert((name.clone(), comp), holds);
        }
    }
    table
}

fn truth(
    f: &Formula,
    env: &mut Env,
    ctx: &EvalCtx,
    table: &HashMap<(String, Value), bool>,
) -> bool {
    match &f.kind {
        FormulaKind::ClaimApp { name, args } => {
            let arg = evaluate(&args[0], env, ctx).expect("generated claim args are total");
            table[&(name.clone(), arg)]
        }
        FormulaKind::And(l, r) => truth(l, env, ctx, table) && truth(r, env, ctx, table),
        FormulaKind::Or(l, r) => truth(l, env, ctx, table) || truth(r, env, ctx, table),
        FormulaKind::Implies(ante, cons) => {
            !expect_bool(ante, env, ctx) || truth(cons, env, ctx, table)
        }
        FormulaKind::Forall { var, domain, body, .. } => {
            let items = enumerate_domain(domain, env, ctx).expect("generated domains are total");
            let mut all = true;
            for item in items {
                env.bind(var.clone(), item);
                all &= truth(body, env, ctx, table);
                env.unbind();
            }
            all
        }
        FormulaKind::Exists { var, domain, body, .. } => {
            let items = enumerate_domain(domain, env, ctx).expect("generated domains are total");
            let mut any = false;
            for item in items {
                env.bind(var.clone(), item);
                any |= truth(body, env, ctx, table);
                env.unbind();
            }
            any
        }
        FormulaKind::Let { var, value, body, .. } => {
            let v = evaluate(value, env, ctx).expect("generated let values are total");
            env.bind(var.clone(), v);
            let r = truth(body, env, ctx, table);
            env.unbind();
            r
        }
        FormulaKind::Eval(e) => expect_bool(e, env, ctx),
    }
}

fn expect_bool(
    e: &resolute_core::lang::typed::Expr,
    env: &mut Env,
    ctx: &EvalCtx,
) -> bool {
    match evaluate(e, env, ctx).expect("generated expressions are total") {
        Value::Bool(b) => b,
        other => panic!("expected bool, got {other:?}"),
    }
}
