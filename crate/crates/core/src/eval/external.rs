//! Invocation of external analysis commands.
//!
//! The wire protocol: the argument list is written to the child's standard
//! input as a single line holding a flat JSON array, with model references
//! serialized as their qualified path strings. The child's final standard
//! output line is parsed as a value of the declared return type. Every call
//! spawns the command afresh; results are never cached.

use super::value::Value;
use crate::lang::ty::Type;
use crate::model::ModelInstance;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

pub const DEFAULT_TIMEOUT_SECS: u64 = 30;
pub const TIMEOUT_ENV_VAR: &str = "RESOLUTE_EXTERNAL_TIMEOUT_SECS";

/// The timeout to apply: an explicit setting wins, then the
/// `RESOLUTE_EXTERNAL_TIMEOUT_SECS` environment variable, then the default.
pub fn effective_timeout(explicit: Option<u64>) -> Duration {
    let secs = explicit
        .or_else(|| {
            std::env::var(TIMEOUT_ENV_VAR)
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_TIMEOUT_SECS);
    Duration::from_secs(secs)
}

pub fn run_external(
    command: &str,
    args: &[Value],
    ret: &Type,
    model: &ModelInstance,
    timeout: Duration,
) -> Result<Value, String> {
    let mut line = serde_json::to_string(
        &args
            .iter()
            .map(|v| arg_json(v, model))
            .collect::<Result<Vec<_>, _>>()?,
    )
    .map_err(|e| format!("cannot serialize arguments for `{command}`: {e}"))?;
    line.push('\n');

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("cannot spawn `{command}`: {e}"))?;

    // The child is free to ignore its input, so a broken pipe here is fine.
    let _ = child.stdin.take().unwrap().write_all(line.as_bytes());

    let mut stdout = child.stdout.take().unwrap();
    let reader = std::thread::spawn(move || {
        let mut out = String::new();
        let _ = stdout.read_to_string(&mut out);
        out
    });

    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(format!(
                        "`{command}` timed out after {} s",
                        timeout.as_secs()
                    ));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(format!("cannot wait for `{command}`: {e}")),
        }
    };
    let output = reader.join().unwrap_or_default();

    if !status.success() {
        return Err(match status.code() {
            Some(code) => format!("`{command}` exited with status {code}"),
            None => format!("`{command}` was terminated by a signal"),
        });
    }

    let Some(last) = output.lines().last() else {
        return Err(format!("`{command}` produced no output"));
    };
    parse_result(last, ret)
        .ok_or_else(|| format!("`{command}` printed `{last}`, which is not a {ret} value"))
}

fn parse_result(line: &str, ret: &Type) -> Option<Value> {
    match ret {
        Type::Bool => match line.trim() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        Type::Int => line.trim().parse().ok().map(Value::Int),
        Type::Real => line.trim().parse().ok().map(Value::Real),
        Type::String => Some(Value::Str(line.to_string())),
        _ => None,
    }
}

fn arg_json(v: &Value, model: &ModelInstance) -> Result<serde_json::Value, String> {
    Ok(match v {
        Value::Bool(b) => serde_json::Value::from(*b),
        Value::Int(i) => serde_json::Value::from(*i),
        Value::Real(r) => {
            if !r.is_finite() {
                return Err("cannot pass a non-finite real to an external command".into());
            }
            serde_json::Value::from(*r)
        }
        Value::Str(s) => serde_json::Value::from(s.as_str()),
        Value::Component(_) | Value::Connection(_) | Value::Feature(_) => {
            serde_json::Value::from(v.display(model))
        }
        Value::Set(s) => serde_json::Value::Array(
            s.iter()
                .map(|item| arg_json(item, model))
                .collect::<Result<_, _>>()?,
        ),
    })
}
