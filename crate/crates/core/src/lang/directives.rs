//! Binding `prove` directives from a model to claims in a library.
//!
//! Directive arguments are written in the model's namespace: paths resolve
//! against the component whose `resolute { ... }` block contains the
//! directive, exactly like connection endpoints do. The result is a ground
//! goal, ready for proof search.

use super::typed::TypedLibrary;
use crate::eval::Value;
use crate::model::{ComponentId, ElementRef, ModelInstance, ProveArg};
use crate::span::Span;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{span}: {message}")]
pub struct DirectiveError {
    pub span: Span,
    pub message: String,
}

/// A ground obligation: prove `claim(args)` in the context of `component`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProveGoal {
    /// Index into `model.prove_directives`, preserving document order.
    pub directive_index: usize,
    /// The component whose annex block stated the directive.
    pub component: ComponentId,
    pub claim: String,
    pub args: Vec<Value>,
    /// The application as written in the model, e.g. `safe(MC)`.
    pub text: String,
}

pub fn attach_prove_directives(
    lib: &TypedLibrary,
    model: &ModelInstance,
) -> Result<Vec<ProveGoal>, DirectiveError> {
    let mut goals = Vec::new();
    for (directive_index, d) in model.prove_directives.iter().enumerate() {
        let err = |message: String| DirectiveError {
            span: d.span,
            message,
        };
        let Some(sig) = lib.claim(&d.claim) else {
            return Err(err(format!("prove directive names unknown claim `{}`", d.claim)));
        };
        if d.args.len() != sig.params.len() {
            return Err(err(format!(
                "claim `{}` expects {} argument(s), got {}",
                d.claim,
                sig.params.len(),
                d.args.len()
            )));
        }
        let mut args = Vec::new();
        for (i, (arg, pty)) in d.args.iter().zip(&sig.params).enumerate() {
            let value = match arg {
                ProveArg::Path(path) => {
                    let resolved = model
                        .resolve_reference(d.component, path)
                        .map_err(|e| err(e.to_string()))?;
                    match resolved {
                        ElementRef::Component(id) => Value::Component(id),
                        ElementRef::Connection(id) => Value::Connection(id),
                        ElementRef::Feature(id) => Value::Feature(id),
                    }
                }
                ProveArg::Str(s) => Value::Str(s.clone()),
                ProveArg::Int(v) => Value::Int(*v),
                ProveArg::Real(v) => Value::Real(*v),
                ProveArg::Bool(b) => Value::Bool(*b),
            };
            let got = value.runtime_type(model);
            if !got.assignable_to(pty) {
                return Err(err(format!(
                    "argument {} of `{}` is a `{got}`, but the claim expects `{pty}`",
                    i + 1,
                    d.claim
                )));
            }
            args.push(value);
        }
        goals.push(ProveGoal {
            directive_index,
            component: d.component,
            claim: d.claim.clone(),
            args,
            text: d.application_text(),
        });
    }
    Ok(goals)
}
