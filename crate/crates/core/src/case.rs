//! Assurance cases: claim-level views of proof trees.
//!
//! A proof tree records every connective and evaluated atom the prover
//! visited. An assurance case collapses that detail down to the claims,
//! instantiates each clause's description with the argument values, and
//! renders the result as indented text, JSON, or Graphviz DOT.

use crate::eval::{evaluate, Env, EvalCtx, Value};
use crate::lang::typed::Segment;
use crate::lang::ProveGoal;
use crate::logic::{ClaimOutcome, ProofKind, ProofNode, Status};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// One claim instance in an assurance case. `children` are the claims the
/// proof reached from this one without passing through another claim.
///
/// Field order here fixes the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssuranceNode {
    /// The clause description with embedded expressions evaluated.
    pub text: String,
    /// Claim name.
    pub predicate: String,
    /// Displayed argument values, in application order.
    pub args: Vec<String>,
    pub status: Status,
    /// Qualified paths of the model elements appearing in `args`.
    pub refs: Vec<String>,
    pub children: Vec<AssuranceNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssuranceCase {
    /// The goal as written: `claim(args) in Component.Path`.
    pub goal: String,
    pub verdict: Status,
    pub root: AssuranceNode,
}

impl AssuranceNode {
    pub fn count(&self) -> usize {
        1 + self.children.iter().map(AssuranceNode::count).sum::<usize>()
    }
}

/// Collapse a proof tree rooted at a claim into an assurance case.
///
/// Panics if the proof root is not a claim node; roots produced by
/// [`crate::logic::prove_goal`] always are.
pub fn build_case(proof: &ProofNode, goal: &ProveGoal, ctx: &EvalCtx) -> AssuranceCase {
    let root = match &proof.kind {
        ProofKind::Claim { name, args, outcome } => {
            claim_node(proof.status, name, args, outcome, ctx)
        }
        _ => panic!("assurance case root must be a claim"),
    };
    AssuranceCase {
        goal: format!("{} in {}", goal.text, ctx.model.qualified_name(goal.component)),
        verdict: proof.status,
        root,
    }
}

fn claim_node(
    status: Status,
    name: &str,
    args: &[Value],
    outcome: &ClaimOutcome,
    ctx: &EvalCtx,
) -> AssuranceNode {
    // One level of recursion per claim depth; deep dataflow proofs need the
    // same stack headroom as the prover that produced them.
    stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || {
        claim_node_inner(status, name, args, outcome, ctx)
    })
}

fn claim_node_inner(
    status: Status,
    name: &str,
    args: &[Value],
    outcome: &ClaimOutcome,
    ctx: &EvalCtx,
) -> AssuranceNode {
    // A proven claim speaks through the clause that proved it; a failed or
    // cyclic one through its first clause, which names the intent even when
    // no alternative held.
    let sig = ctx.lib.claim(name).expect("proof mentions an undeclared claim");
    let clause_idx = match outcome {
        ClaimOutcome::Proven { clause, .. } => *clause,
        ClaimOutcome::Failed { attempts } => {
            attempts.first().map(|(i, _)| *i).unwrap_or(sig.clauses[0])
        }
        ClaimOutcome::Cycle => sig.clauses[0],
    };
    let clause = &ctx.lib.clauses[clause_idx];

    let mut env = Env::new();
    for ((param, _), arg) in clause.params.iter().zip(args) {
        env.bind(param.clone(), arg.clone());
    }
    let mut text = String::new();
    for seg in &clause.description {
        match seg {
            Segment::Text(t) => text.push_str(t),
            Segment::Expr(e) => match evaluate(e, &mut env, ctx) {
                Ok(v) => text.push_str(&v.display(ctx.model)),
                Err(err) => {
                    let _ = write!(text, "<error: {}>", err.message);
                }
            },
        }
    }

    let mut children = Vec::new();
    match outcome {
        ClaimOutcome::Proven { body, .. } => collect_children(body, ctx, &mut children),
        ClaimOutcome::Failed { attempts } => {
            for (_, attempt) in attempts {
                collect_children(attempt, ctx, &mut children);
            }
        }
        ClaimOutcome::Cycle => {}
    }

    let mut refs = Vec::new();
    for arg in args {
        collect_refs(arg, ctx, &mut refs);
    }

    AssuranceNode {
        text,
        predicate: name.to_string(),
        args: args.iter().map(|a| a.display(ctx.model)).collect(),
        status,
        refs,
        children,
    }
}

/// Walk connectives below a claim, emitting a case node per claim reached.
/// Evaluation leaves vanish; everything else is traversed in proof order.
fn collect_children(node: &ProofNode, ctx: &EvalCtx, out: &mut Vec<AssuranceNode>) {
    match &node.kind {
        ProofKind::Claim { name, args, outcome } => {
            out.push(claim_node(node.status, name, args, outcome, ctx));
        }
        ProofKind::And(l, r) => {
            collect_children(l, ctx, out);
            collect_children(r, ctx, out);
        }
        ProofKind::Or(or) => match or {
            crate::logic::OrOutcome::Chosen { child, .. } => collect_children(child, ctx, out),
            crate::logic::OrOutcome::BothFailed(l, r) => {
                collect_children(l, ctx, out);
                collect_children(r, ctx, out);
            }
        },
        ProofKind::Implies { consequent, .. } => {
            if let Some(c) = consequent {
                collect_children(c, ctx, out);
            }
        }
        ProofKind::Forall { instances, .. } | ProofKind::Exists { instances, .. } => {
            for (_, inst) in instances {
                collect_children(inst, ctx, out);
            }
        }
        ProofKind::Eval { .. } => {}
    }
}

fn collect_refs(v: &Value, ctx: &EvalCtx, out: &mut Vec<String>) {
    match v {
        Value::Set(items) => {
            for item in items.iter() {
                collect_refs(item, ctx, out);
            }
        }
        _ if v.is_model_ref() => push_unique(out, v.display(ctx.model)),
        _ => {}
    }
}

fn push_unique(out: &mut Vec<String>, path: String) {
    if !out.contains(&path) {
        out.push(path);
    }
}

/// Indented text: a header line, then one line per claim, two spaces of
/// indent per level, `+ ` for proven claims and `! ` for failed ones.
pub fn render_text(case: &AssuranceCase) -> String {
    let mut out = String::new();
    let verdict = match case.verdict {
        Status::Proven => "PROVEN",
        Status::Failed => "FAILED",
    };
    let _ = writeln!(out, "{}: {}", verdict, case.goal);
    render_text_node(&case.root, 0, &mut out);
    out
}

fn render_text_node(node: &AssuranceNode, depth: usize, out: &mut String) {
    let mark = match node.status {
        Status::Proven => "+ ",
        Status::Failed => "! ",
    };
    let _ = writeln!(out, "{}{}{}", "  ".repeat(depth), mark, node.text);
    for child in &node.children {
        render_text_node(child, depth + 1, out);
    }
}

/// Compact JSON. Serde field order fixes the key order, so output for a
/// given case is byte-deterministic.
pub fn render_json(case: &AssuranceCase) -> String {
    serde_json::to_string(case).expect("assurance cases always serialize")
}

/// A whole run's cases as one compact JSON array.
pub fn render_json_array(cases: &[AssuranceCase]) -> String {
    serde_json::to_string(cases).expect("assurance cases always serialize")
}

/// Graphviz DOT: one node per claim labeled with its text, an edge from each
/// claim to its children, failed claims drawn dashed. Node ids encode the
/// path from the root, so output is stable across runs.
pub fn render_dot(case: &AssuranceCase) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(&case.goal));
    let _ = writeln!(out, "  node [shape=box];");
    dot_nodes(&case.root, "n0", &mut out);
    dot_edges(&case.root, "n0", &mut out);
    out.push_str("}\n");
    out
}

fn dot_nodes(node: &AssuranceNode, id: &str, out: &mut String) {
    let style = match node.status {
        Status::Proven => "",
        Status::Failed => ", style=dashed",
    };
    let _ = writeln!(out, "  {} [label=\"{}\"{}];", id, dot_escape(&node.text), style);
    for (i, child) in node.children.iter().enumerate() {
        dot_nodes(child, &format!("{}_{}", id, i), out);
    }
}

fn dot_edges(node: &AssuranceNode, id: &str, out: &mut String) {
    for (i, child) in node.children.iter().enumerate() {
        let child_id = format!("{}_{}", id, i);
        let _ = writeln!(out, "  {} -> {};", id, child_id);
        dot_edges(child, &child_id, out);
    }
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}
