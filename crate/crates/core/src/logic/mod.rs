//! Proof search over rule libraries: the sequent judgment Γ ⊢ G, where Γ is
//! the clause base and G a ground formula.
//!
//! Connectives decompose on the right: a conjunction proves both sides, a
//! disjunction takes the first side that proves, an implication evaluates
//! its computation antecedent (a false antecedent proves the goal outright),
//! and quantifiers enumerate their finite domain in document order. A claim
//! application backchains over that claim's clauses in declaration order.
//!
//! Claim results are tabled per ground instance, with in-progress instances
//! failing on re-entry, so recursive rules over cyclic models terminate and
//! the proven set is the least fixed point of the clause base. A failure
//! derived from assuming an in-progress instance unprovable is provisional:
//! it is returned to the caller but not tabled, because the instance it
//! leaned on may later prove. Proven results are always tabled; so are
//! failures that leaned on nothing outside themselves.

pub mod replay;

use crate::eval::{enumerate_domain, evaluate, Env, EvalCtx, EvalError, Value};
use crate::lang::typed::{Formula, FormulaKind, TypedLibrary};
use crate::lang::ProveGoal;
use crate::model::ModelInstance;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proven,
    Failed,
}

impl Status {
    fn of(proven: bool) -> Status {
        if proven {
            Status::Proven
        } else {
            Status::Failed
        }
    }
}

/// One step of a proof or attempt tree. Failed nodes keep enough of the
/// search to show why: a failed conjunction records both sides, a failed
/// disjunction both attempts, a failed quantifier every instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofNode {
    pub status: Status,
    pub kind: ProofKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProofKind {
    Claim {
        name: String,
        args: Vec<Value>,
        outcome: ClaimOutcome,
    },
    And(Box<ProofNode>, Box<ProofNode>),
    Or(OrOutcome),
    Implies {
        antecedent: String,
        holds: bool,
        consequent: Option<Box<ProofNode>>,
    },
    Forall {
        var: String,
        instances: Vec<(Value, ProofNode)>,
    },
    Exists {
        var: String,
        instances: Vec<(Value, ProofNode)>,
    },
    Eval {
        expr: String,
        value: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClaimOutcome {
    /// The first clause whose body proved, by index into the library's
    /// clause list, with the body's proof.
    Proven { clause: usize, body: Box<ProofNode> },
    /// Every clause was attempted and failed; all attempts are kept.
    Failed { attempts: Vec<(usize, ProofNode)> },
    /// The instance was already under investigation on this search path, so
    /// this branch fails rather than spiral.
    Cycle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrOutcome {
    /// The branch that proved (0 for left, 1 for right); the other side is
    /// not part of the proof.
    Chosen { branch: usize, child: Box<ProofNode> },
    BothFailed(Box<ProofNode>, Box<ProofNode>),
}

/// A ground goal: a formula plus bindings for its free variables.
#[derive(Debug, Clone)]
pub struct Goal {
    pub formula: Formula,
    pub env: Env,
}

/// An evaluation error surfaced during search, annotated with the innermost
/// claim instance being proven when it struck. It aborts the whole search:
/// a crashing computation is a diagnostic, not a failed claim.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofError {
    pub error: EvalError,
    pub claim: Option<String>,
}

impl fmt::Display for ProofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.claim {
            Some(c) => write!(f, "{} (while proving {c})", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl std::error::Error for ProofError {}

impl From<EvalError> for ProofError {
    fn from(error: EvalError) -> Self {
        ProofError { error, claim: None }
    }
}

type ClaimInstance = (String, Vec<Value>);

enum MemoEntry {
    InProgress,
    Proven(ProofNode),
    Failed(ProofNode),
}

/// Search state for one run: the immutable model and library (shared with
/// evaluation) and the claim-instance table. The table persists across
/// goals, so results are reused between prove directives.
pub struct ProofContext<'a> {
    pub eval: EvalCtx<'a>,
    memo: HashMap<ClaimInstance, MemoEntry>,
}

impl<'a> ProofContext<'a> {
    pub fn new(model: &'a ModelInstance, lib: &'a TypedLibrary) -> Self {
        ProofContext {
            eval: EvalCtx::new(model, lib),
            memo: HashMap::new(),
        }
    }

    pub fn with_timeout(
        model: &'a ModelInstance,
        lib: &'a TypedLibrary,
        timeout_secs: Option<u64>,
    ) -> Self {
        ProofContext {
            eval: EvalCtx::with_timeout(model, lib, timeout_secs),
            memo: HashMap::new(),
        }
    }

    fn instance_display(&self, name: &str, args: &[Value]) -> String {
        let args: Vec<String> = args.iter().map(|v| v.display(self.eval.model)).collect();
        format!("{name}({})", args.join(", "))
    }
}

/// Prove a ground formula goal.
pub fn prove(goal: &Goal, ctx: &mut ProofContext) -> Result<ProofNode, ProofError> {
    let mut env = goal.env.clone();
    let mut taint = HashSet::new();
    prove_formula(&goal.formula, &mut env, ctx, &mut taint)
}

/// Prove a ground claim instance, as stated by a prove directive.
pub fn prove_claim_instance(
    name: &str,
    args: Vec<Value>,
    ctx: &mut ProofContext,
) -> Result<ProofNode, ProofError> {
    let mut taint = HashSet::new();
    prove_claim(name, args, ctx, &mut taint)
}

/// Convenience entry matching a grounded directive.
pub fn prove_goal(goal: &ProveGoal, ctx: &mut ProofContext) -> Result<ProofNode, ProofError> {
    prove_claim_instance(&goal.claim, goal.args.clone(), ctx)
}

fn prove_claim(
    name: &str,
    args: Vec<Value>,
    ctx: &mut ProofContext,
    taint: &mut HashSet<ClaimInstance>,
) -> Result<ProofNode, ProofError> {
    let inst: ClaimInstance = (name.to_string(), args.clone());
    match ctx.memo.get(&inst) {
        Some(MemoEntry::Proven(n) | MemoEntry::Failed(n)) => return Ok(n.clone()),
        Some(MemoEntry::InProgress) => {
            taint.insert(inst);
            return Ok(ProofNode {
                status: Status::Failed,
                kind: ProofKind::Claim {
                    name: name.to_string(),
                    args,
                    outcome: ClaimOutcome::Cycle,
                },
            });
        }
        None => {}
    }
    ctx.memo.insert(inst.clone(), MemoEntry::InProgress);

    // Claim chains can nest as deep as the model is large (a proof walking a
    // 35-hop dataflow chain recurses 35 claims deep), so grow the stack here
    // instead of imposing a depth limit the logic does not need.
    stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || {
        prove_claim_clauses(name, args, inst, ctx, taint)
    })
}

fn prove_claim_clauses(
    name: &str,
    args: Vec<Value>,
    inst: ClaimInstance,
    ctx: &mut ProofContext,
    taint: &mut HashSet<ClaimInstance>,
) -> Result<ProofNode, ProofError> {
    let lib = ctx.eval.lib;
    let sig = lib
        .claim(name)
        .unwrap_or_else(|| panic!("goal references unknown claim `{name}`"));

    let mut attempts = Vec::new();
    let mut my_taint = HashSet::new();
    let mut proven: Option<(usize, ProofNode)> = None;
    for &ci in &sig.clauses {
        let clause = &lib.clauses[ci];
        let mut env = Env::new();
        for ((p, _), v) in clause.params.iter().zip(&args) {
            env.bind(p.clone(), v.clone());
        }
        let mut attempt_taint = HashSet::new();
        let result = prove_formula(&clause.body, &mut env, ctx, &mut attempt_taint);
        let node = match result {
            Ok(node) => node,
            Err(mut e) => {
                ctx.memo.remove(&inst);
                if e.claim.is_none() {
                    e.claim = Some(ctx.instance_display(name, &args));
                }
                return Err(e);
            }
        };
        if node.status == Status::Proven {
            proven = Some((ci, node));
            break;
        }
        my_taint.extend(attempt_taint);
        attempts.push((ci, node));
    }

    let node = match proven {
        Some((clause, body)) => ProofNode {
            status: Status::Proven,
            kind: ProofKind::Claim {
                name: name.to_string(),
                args,
                outcome: ClaimOutcome::Proven {
                    clause,
                    body: Box::new(body),
                },
            },
        },
        None => ProofNode {
            status: Status::Failed,
            kind: ProofKind::Claim {
                name: name.to_string(),
                args,
                outcome: ClaimOutcome::Failed { attempts },
            },
        },
    };

    match node.status {
        Status::Proven => {
            ctx.memo.insert(inst, MemoEntry::Proven(node.clone()));
        }
        Status::Failed => {
            my_taint.remove(&inst);
            if my_taint.is_empty() {
                ctx.memo.insert(inst, MemoEntry::Failed(node.clone()));
            } else {
                // Provisional: leaned on an instance still in progress.
                ctx.memo.remove(&inst);
                taint.extend(my_taint);
            }
        }
    }
    Ok(node)
}

fn prove_formula(
    f: &Formula,
    env: &mut Env,
    ctx: &mut ProofContext,
    taint: &mut HashSet<ClaimInstance>,
) -> Result<ProofNode, ProofError> {
    match &f.kind {
        FormulaKind::ClaimApp { name, args } => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(evaluate(a, env, &ctx.eval)?);
            }
            let sig = ctx.eval.lib.claim(name).expect("typechecked claim");
            let model = ctx.eval.model;
            for (i, (v, pty)) in vals.iter().zip(&sig.params).enumerate() {
                let got = v.runtime_type(model);
                if !got.assignable_to(pty) {
                    return Err(EvalError {
                        span: args[i].span,
                        message: format!(
                            "argument {} of claim `{name}` is a `{got}`, expected `{pty}`",
                            i + 1
                        ),
                    }
                    .into());
                }
            }
            prove_claim(name, vals, ctx, taint)
        }
        FormulaKind::And(l, r) => {
            let ln = prove_formula(l, env, ctx, taint)?;
            let rn = prove_formula(r, env, ctx, taint)?;
            Ok(ProofNode {
                status: Status::of(
                    ln.status == Status::Proven && rn.status == Status::Proven,
                ),
                kind: ProofKind::And(Box::new(ln), Box::new(rn)),
            })
        }
        FormulaKind::Or(l, r) => {
            let ln = prove_formula(l, env, ctx, taint)?;
            if ln.status == Status::Proven {
                return Ok(ProofNode {
                    status: Status::Proven,
                    kind: ProofKind::Or(OrOutcome::Chosen {
                        branch: 0,
                        child: Box::new(ln),
                    }),
                });
            }
            let rn = prove_formula(r, env, ctx, taint)?;
            if rn.status == Status::Proven {
                return Ok(ProofNode {
                    status: Status::Proven,
                    kind: ProofKind::Or(OrOutcome::Chosen {
                        branch: 1,
                        child: Box::new(rn),
                    }),
                });
            }
            Ok(ProofNode {
                status: Status::Failed,
                kind: ProofKind::Or(OrOutcome::BothFailed(Box::new(ln), Box::new(rn))),
            })
        }
        FormulaKind::Implies(ante, consequent) => {
            let v = evaluate(ante, env, &ctx.eval)?;
            let holds = expect_bool(v, ante.span, "the antecedent of `=>`")?;
            if !holds {
                return Ok(ProofNode {
                    status: Status::Proven,
                    kind: ProofKind::Implies {
                        antecedent: ante.render(),
                        holds,
                        consequent: None,
                    },
                });
            }
            let child = prove_formula(consequent, env, ctx, taint)?;
            Ok(ProofNode {
                status: child.status,
                kind: ProofKind::Implies {
                    antecedent: ante.render(),
                    holds,
                    consequent: Some(Box::new(child)),
                },
            })
        }
        FormulaKind::Forall {
            var, domain, body, ..
        } => {
            let items = enumerate_domain(domain, env, &ctx.eval)?;
            let mut instances = Vec::with_capacity(items.len());
            let mut all = true;
            for item in items {
                env.bind(var.clone(), item.clone());
                let result = prove_formula(body, env, ctx, taint);
                env.unbind();
                let node = result?;
                all &= node.status == Status::Proven;
                instances.push((item, node));
            }
            Ok(ProofNode {
                status: Status::of(all),
                kind: ProofKind::Forall {
                    var: var.clone(),
                    instances,
                },
            })
        }
        FormulaKind::Exists {
            var, domain, body, ..
        } => {
            let items = enumerate_domain(domain, env, &ctx.eval)?;
            let mut failed = Vec::new();
            for item in items {
                env.bind(var.clone(), item.clone());
                let result = prove_formula(body, env, ctx, taint);
                env.unbind();
                let node = result?;
                if node.status == Status::Proven {
                    return Ok(ProofNode {
                        status: Status::Proven,
                        kind: ProofKind::Exists {
                            var: var.clone(),
                            instances: vec![(item, node)],
                        },
                    });
                }
                failed.push((item, node));
            }
            Ok(ProofNode {
                status: Status::Failed,
                kind: ProofKind::Exists {
                    var: var.clone(),
                    instances: failed,
                },
            })
        }
        FormulaKind::Let {
            var, value, body, ..
        } => {
            // Transparent in the proof: the binding feeds the body's nodes.
            let v = evaluate(value, env, &ctx.eval)?;
            env.bind(var.clone(), v);
            let result = prove_formula(body, env, ctx, taint);
            env.unbind();
            result
        }
        FormulaKind::Eval(e) => {
            let v = evaluate(e, env, &ctx.eval)?;
            let value = expect_bool(v, e.span, "a rule body atom")?;
            Ok(ProofNode {
                status: Status::of(value),
                kind: ProofKind::Eval {
                    expr: e.render(),
                    value,
                },
            })
        }
    }
}

fn expect_bool(
    v: Value,
    span: crate::span::Span,
    what: &str,
) -> Result<bool, ProofError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError {
            span,
            message: format!("{what} evaluated to `{}`, expected bool", other.type_name()),
        }
        .into()),
    }
}
