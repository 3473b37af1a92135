//! Independent local validation of proof trees.
//!
//! A replayed tree is walked in lockstep with the rule bodies it claims to
//! be a proof of: every recorded expression text must match the rule, every
//! recorded value must re-evaluate to itself, every domain must re-enumerate
//! to the recorded instances, and every recorded status must agree with the
//! children. This is deliberately redundant with the prover: it is the
//! test oracle that keeps the prover honest.

use super::{ClaimOutcome, OrOutcome, ProofContext, ProofKind, ProofNode, Status};
use crate::eval::{enumerate_domain, evaluate, Env, Value};
use crate::lang::typed::{Expr, Formula, FormulaKind};

/// Where and why a tree failed validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayFault {
    pub path: String,
    pub reason: String,
}

/// True iff the tree is locally valid. The root must be a claim node, as
/// produced for a prove directive.
pub fn replay_check(node: &ProofNode, ctx: &ProofContext) -> bool {
    replay_report(node, ctx).is_ok()
}

/// Like [`replay_check`], but pinpointing the first invalid node.
pub fn replay_report(node: &ProofNode, ctx: &ProofContext) -> Result<(), ReplayFault> {
    let path = match &node.kind {
        ProofKind::Claim { name, args, .. } => ctx.instance_display(name, args),
        _ => {
            return Err(ReplayFault {
                path: "(root)".to_string(),
                reason: "the root of a replayable tree must be a claim".to_string(),
            })
        }
    };
    replay_claim(node, ctx, &path)
}

fn fault(path: &str, reason: impl Into<String>) -> ReplayFault {
    ReplayFault {
        path: path.to_string(),
        reason: reason.into(),
    }
}

fn replay_claim(node: &ProofNode, ctx: &ProofContext, path: &str) -> Result<(), ReplayFault> {
    // Trees nest one claim level per dataflow hop; grow the stack just as
    // the prover does.
    stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || replay_claim_inner(node, ctx, path))
}

fn replay_claim_inner(node: &ProofNode, ctx: &ProofContext, path: &str) -> Result<(), ReplayFault> {
    let ProofKind::Claim {
        name,
        args,
        outcome,
    } = &node.kind
    else {
        return Err(fault(path, "expected a claim node"));
    };
    let lib = ctx.eval.lib;
    let Some(sig) = lib.claim(name) else {
        return Err(fault(path, format!("unknown claim `{name}`")));
    };
    if args.len() != sig.params.len() {
        return Err(fault(path, "argument count differs from the claim's parameters"));
    }
    match outcome {
        ClaimOutcome::Proven { clause, body } => {
            if node.status != Status::Proven {
                return Err(fault(path, "proven outcome recorded with failed status"));
            }
            if !sig.clauses.contains(clause) {
                return Err(fault(
                    path,
                    format!("chosen clause {clause} does not belong to `{name}`"),
                ));
            }
            if body.status != Status::Proven {
                return Err(fault(path, "proven claim with a failed body"));
            }
            let c = &lib.clauses[*clause];
            let mut env = Env::new();
            for ((p, _), v) in c.params.iter().zip(args) {
                env.bind(p.clone(), v.clone());
            }
            replay_formula(
                &c.body,
                body,
                &mut env,
                ctx,
                &format!("{path}/clause[{clause}]"),
            )
        }
        ClaimOutcome::Failed { attempts } => {
            if node.status != Status::Failed {
                return Err(fault(path, "failed outcome recorded with proven status"));
            }
            let attempted: Vec<usize> = attempts.iter().map(|(i, _)| *i).collect();
            if attempted != sig.clauses {
                return Err(fault(
                    path,
                    "the attempts do not cover the claim's clauses in order",
                ));
            }
            for (ci, attempt) in attempts {
                if attempt.status != Status::Failed {
                    return Err(fault(
                        path,
                        format!("clause {ci} attempt is recorded as proven in a failed claim"),
                    ));
                }
                let c = &lib.clauses[*ci];
                let mut env = Env::new();
                for ((p, _), v) in c.params.iter().zip(args) {
                    env.bind(p.clone(), v.clone());
                }
                replay_formula(
                    &c.body,
                    attempt,
                    &mut env,
                    ctx,
                    &format!("{path}/clause[{ci}]"),
                )?;
            }
            Ok(())
        }
        ClaimOutcome::Cycle => {
            if node.status != Status::Failed {
                return Err(fault(path, "a cycle assumption must be failed"));
            }
            Ok(())
        }
    }
}

fn replay_formula(
    f: &Formula,
    node: &ProofNode,
    env: &mut Env,
    ctx: &ProofContext,
    path: &str,
) -> Result<(), ReplayFault> {
    match (&f.kind, &node.kind) {
        (
            FormulaKind::ClaimApp { name, args },
            ProofKind::Claim {
                name: recorded,
                args: recorded_args,
                ..
            },
        ) => {
            if name != recorded {
                return Err(fault(
                    path,
                    format!("rule calls `{name}` but the node claims `{recorded}`"),
                ));
            }
            let vals = eval_all(args, env, ctx, path)?;
            if &vals != recorded_args {
                return Err(fault(
                    path,
                    "claim arguments do not re-evaluate to the recorded values",
                ));
            }
            replay_claim(node, ctx, path)
        }
        (FormulaKind::And(l, r), ProofKind::And(ln, rn)) => {
            replay_formula(l, ln, env, ctx, &format!("{path}/and.left"))?;
            replay_formula(r, rn, env, ctx, &format!("{path}/and.right"))?;
            let expect = Status::of(
                ln.status == Status::Proven && rn.status == Status::Proven,
            );
            coherent(node.status, expect, path)
        }
        (FormulaKind::Or(l, r), ProofKind::Or(outcome)) => match outcome {
            OrOutcome::Chosen { branch, child } => {
                let (sub, side) = match branch {
                    0 => (l, "left"),
                    1 => (r, "right"),
                    _ => return Err(fault(path, "disjunction branch out of range")),
                };
                replay_formula(sub, child, env, ctx, &format!("{path}/or.{side}"))?;
                if child.status != Status::Proven {
                    return Err(fault(path, "chosen disjunct is not proven"));
                }
                coherent(node.status, Status::Proven, path)
            }
            OrOutcome::BothFailed(ln, rn) => {
                replay_formula(l, ln, env, ctx, &format!("{path}/or.left"))?;
                replay_formula(r, rn, env, ctx, &format!("{path}/or.right"))?;
                if ln.status == Status::Proven || rn.status == Status::Proven {
                    return Err(fault(path, "a failed disjunction holds a proven branch"));
                }
                coherent(node.status, Status::Failed, path)
            }
        },
        (
            FormulaKind::Implies(ante, cons),
            ProofKind::Implies {
                antecedent,
                holds,
                consequent,
            },
        ) => {
            if *antecedent != ante.render() {
                return Err(fault(path, "antecedent text differs from the rule"));
            }
            let b = eval_bool(ante, env, ctx, path)?;
            if b != *holds {
                return Err(fault(path, "antecedent re-evaluates differently"));
            }
            match (holds, consequent) {
                (false, None) => coherent(node.status, Status::Proven, path),
                (true, Some(child)) => {
                    replay_formula(cons, child, env, ctx, &format!("{path}/=>"))?;
                    coherent(node.status, child.status, path)
                }
                _ => Err(fault(path, "implication child disagrees with the antecedent")),
            }
        }
        (
            FormulaKind::Forall {
                var, domain, body, ..
            },
            ProofKind::Forall {
                var: recorded,
                instances,
            },
        ) => {
            if var != recorded {
                return Err(fault(path, "quantified variable differs from the rule"));
            }
            let items = enumerate_domain(domain, env, &ctx.eval)
                .map_err(|e| fault(path, e.to_string()))?;
            if items.len() != instances.len()
                || items.iter().zip(instances).any(|(a, (b, _))| a != b)
            {
                return Err(fault(path, "domain enumeration differs from the record"));
            }
            let mut all = true;
            for (i, (item, child)) in instances.iter().enumerate() {
                env.bind(var.clone(), item.clone());
                let r = replay_formula(body, child, env, ctx, &format!("{path}/forall[{i}]"));
                env.unbind();
                r?;
                all &= child.status == Status::Proven;
            }
            coherent(node.status, Status::of(all), path)
        }
        (
            FormulaKind::Exists {
                var, domain, body, ..
            },
            ProofKind::Exists {
                var: recorded,
                instances,
            },
        ) => {
            if var != recorded {
                return Err(fault(path, "quantified variable differs from the rule"));
            }
            let items = enumerate_domain(domain, env, &ctx.eval)
                .map_err(|e| fault(path, e.to_string()))?;
            if node.status == Status::Proven {
                let [(witness, child)] = instances.as_slice() else {
                    return Err(fault(path, "a proven witness must be a single instance"));
                };
                if !items.contains(witness) {
                    return Err(fault(path, "the witness is not in the domain"));
                }
                if child.status != Status::Proven {
                    return Err(fault(path, "the witness's proof is not proven"));
                }
                env.bind(var.clone(), witness.clone());
                let r = replay_formula(body, child, env, ctx, &format!("{path}/exists[0]"));
                env.unbind();
                r
            } else {
                if items.len() != instances.len()
                    || items.iter().zip(instances).any(|(a, (b, _))| a != b)
                {
                    return Err(fault(path, "domain enumeration differs from the record"));
                }
                for (i, (item, child)) in instances.iter().enumerate() {
                    if child.status == Status::Proven {
                        return Err(fault(path, "a failed quantifier holds a proven instance"));
                    }
                    env.bind(var.clone(), item.clone());
                    let r =
                        replay_formula(body, child, env, ctx, &format!("{path}/exists[{i}]"));
                    env.unbind();
                    r?;
                }
                Ok(())
            }
        }
        (
            FormulaKind::Let {
                var, value, body, ..
            },
            _,
        ) => {
            let v = evaluate(value, env, &ctx.eval).map_err(|e| fault(path, e.to_string()))?;
            env.bind(var.clone(), v);
            let r = replay_formula(body, node, env, ctx, path);
            env.unbind();
            r
        }
        (FormulaKind::Eval(e), ProofKind::Eval { expr, value }) => {
            if *expr != e.render() {
                return Err(fault(path, "expression text differs from the rule"));
            }
            let b = eval_bool(e, env, ctx, path)?;
            if b != *value {
                return Err(fault(path, "expression re-evaluates differently"));
            }
            coherent(node.status, Status::of(b), path)
        }
        _ => Err(fault(path, "node shape does not match the rule body")),
    }
}

fn coherent(recorded: Status, expect: Status, path: &str) -> Result<(), ReplayFault> {
    if recorded == expect {
        Ok(())
    } else {
        Err(fault(path, "recorded status contradicts the children"))
    }
}

fn eval_all(
    args: &[Expr],
    env: &mut Env,
    ctx: &ProofContext,
    path: &str,
) -> Result<Vec<Value>, ReplayFault> {
    args.iter()
        .map(|a| evaluate(a, env, &ctx.eval).map_err(|e| fault(path, e.to_string())))
        .collect()
}

fn eval_bool(
    e: &Expr,
    env: &mut Env,
    ctx: &ProofContext,
    path: &str,
) -> Result<bool, ReplayFault> {
    match evaluate(e, env, &ctx.eval).map_err(|e| fault(path, e.to_string()))? {
        Value::Bool(b) => Ok(b),
        other => Err(fault(
            path,
            format!("expected bool, re-evaluated to `{}`", other.type_name()),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{prove_claim_instance, ProofContext};
    use super::*;
    use crate::lang::{parse_library, typecheck, TypedLibrary};
    use crate::model::{parse_model, ComponentId, ModelInstance};

    fn setup(model_src: &str, lib_src: &str) -> (ModelInstance, TypedLibrary) {
        let model = parse_model(model_src).unwrap();
        let lib = typecheck(&parse_library(lib_src).unwrap()).unwrap();
        (model, lib)
    }

    const MODEL: &str = "system Sys {
      thread T1 { property Delay = 2 }
      thread T2 { property Delay = 3 }
      thread T3 { }
    }";

    const RULES: &str = r#"
quick(t : thread) <=
  ** "Thread " t " responds quickly" **
  has_property(t, "Delay") and property(t, "Delay") < 5

all_quick() <=
  ** "Every thread responds quickly" **
  forall (t : thread). quick(t)

some_quick() <=
  ** "Some thread responds quickly" **
  exists (t : thread). quick(t)

named_or_quick(t : thread) <=
  ** "Thread " t " is known" **
  let n : string = name(t);
  (n = "T3") or quick(t)
"#;

    fn prove_pair(claim: &str, args: Vec<Value>) -> (ProofNode, ModelInstance, TypedLibrary) {
        let (model, lib) = setup(MODEL, RULES);
        let node = {
            let mut ctx = ProofContext::new(&model, &lib);
            prove_claim_instance(claim, args, &mut ctx).unwrap()
        };
        (node, model, lib)
    }

    #[test]
    fn replay_accepts_proven_trees() {
        for (claim, args) in [
            ("some_quick", vec![]),
            ("quick", vec![Value::Component(ComponentId(1))]),
            ("named_or_quick", vec![Value::Component(ComponentId(3))]),
        ] {
            let (node, model, lib) = prove_pair(claim, args);
            assert_eq!(node.status, Status::Proven);
            let ctx = ProofContext::new(&model, &lib);
            assert_eq!(replay_report(&node, &ctx), Ok(()));
        }
    }

    #[test]
    fn replay_confirms_failed_trees() {
        for (claim, args) in [
            ("all_quick", vec![]),
            ("quick", vec![Value::Component(ComponentId(3))]),
        ] {
            let (node, model, lib) = prove_pair(claim, args);
            assert_eq!(node.status, Status::Failed);
            let ctx = ProofContext::new(&model, &lib);
            assert_eq!(replay_report(&node, &ctx), Ok(()));
        }
    }

    fn first_eval_mut(node: &mut ProofNode) -> Option<&mut ProofNode> {
        if matches!(node.kind, ProofKind::Eval { .. }) {
            return Some(node);
        }
        match &mut node.kind {
            ProofKind::Claim { outcome, .. } => match outcome {
                ClaimOutcome::Proven { body, .. } => first_eval_mut(body),
                ClaimOutcome::Failed { attempts } => {
                    attempts.iter_mut().find_map(|(_, n)| first_eval_mut(n))
                }
                ClaimOutcome::Cycle => None,
            },
            ProofKind::And(l, r) => first_eval_mut(l).or_else(|| first_eval_mut(r)),
            ProofKind::Or(OrOutcome::Chosen { child, .. }) => first_eval_mut(child),
            ProofKind::Or(OrOutcome::BothFailed(l, r)) => {
                first_eval_mut(l).or_else(|| first_eval_mut(r))
            }
            ProofKind::Implies { consequent, .. } => {
                consequent.as_mut().and_then(|c| first_eval_mut(c))
            }
            ProofKind::Forall { instances, .. } | ProofKind::Exists { instances, .. } => {
                instances.iter_mut().find_map(|(_, n)| first_eval_mut(n))
            }
            ProofKind::Eval { .. } => unreachable!("handled above"),
        }
    }

    #[test]
    fn replay_rejects_a_mutated_expression() {
        let (mut node, model, lib) = prove_pair("quick", vec![Value::Component(ComponentId(1))]);
        let leaf = first_eval_mut(&mut node).unwrap();
        if let ProofKind::Eval { expr, .. } = &mut leaf.kind {
            *expr = format!("not ({expr})");
        }
        let ctx = ProofContext::new(&model, &lib);
        let f = replay_report(&node, &ctx).unwrap_err();
        assert!(f.reason.contains("expression text differs"), "{f:?}");
        assert!(f.path.contains("quick(Sys.T1)"), "{f:?}");
        assert!(!replay_check(&node, &ctx));
    }

    #[test]
    fn replay_rejects_a_flipped_leaf_value() {
        let (mut node, model, lib) = prove_pair("quick", vec![Value::Component(ComponentId(1))]);
        let leaf = first_eval_mut(&mut node).unwrap();
        if let ProofKind::Eval { value, .. } = &mut leaf.kind {
            *value = false;
        }
        let ctx = ProofContext::new(&model, &lib);
        let f = replay_report(&node, &ctx).unwrap_err();
        assert!(f.reason.contains("re-evaluates differently"), "{f:?}");
    }

    #[test]
    fn replay_rejects_a_forged_root_status() {
        let (mut node, model, lib) = prove_pair("quick", vec![Value::Component(ComponentId(3))]);
        node.status = Status::Proven;
        let ctx = ProofContext::new(&model, &lib);
        let f = replay_report(&node, &ctx).unwrap_err();
        assert!(f.reason.contains("failed outcome recorded with proven status"), "{f:?}");
    }

    #[test]
    fn replay_rejects_swapped_quantifier_instances() {
        let (mut node, model, lib) = prove_pair("all_quick", vec![]);
        fn swap_forall(node: &mut ProofNode) -> bool {
            match &mut node.kind {
                ProofKind::Forall { instances, .. } if instances.len() >= 2 => {
                    instances.swap(0, 1);
                    true
                }
                ProofKind::Claim { outcome, .. } => match outcome {
                    ClaimOutcome::Proven { body, .. } => swap_forall(body),
                    ClaimOutcome::Failed { attempts } => {
                        attempts.iter_mut().any(|(_, n)| swap_forall(n))
                    }
                    ClaimOutcome::Cycle => false,
                },
                _ => false,
            }
        }
        assert!(swap_forall(&mut node));
        let ctx = ProofContext::new(&model, &lib);
        let f = replay_report(&node, &ctx).unwrap_err();
        assert!(f.reason.contains("domain enumeration differs"), "{f:?}");
    }
}
