//! Command-line driver: load model and libraries, prove every directive,
//! render assurance cases, map verdicts to the exit code.
//!
//! Rule libraries share one namespace, so all sources (standard library
//! first, then user libraries in order) are concatenated and checked as one
//! unit. A line map translates positions in the merged text back to
//! `file:line:column` for diagnostics.

use resolute_core::case::{build_case, render_dot, render_json_array, render_text, AssuranceCase};
use resolute_core::lang::{attach_prove_directives, parse_library, typecheck};
use resolute_core::logic::{prove_goal, ProofContext, Status};
use resolute_core::model::parse_model;
use resolute_core::stdlib::stdlib_source;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_PROVEN: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model_path: PathBuf,
    /// Loaded after the standard library, in order; order fixes clause order.
    pub library_paths: Vec<PathBuf>,
    pub format: Format,
    /// `None` writes to the `out` stream passed to [`run`].
    pub output: Option<PathBuf>,
    /// Stop proving after the first failed case.
    pub fail_fast: bool,
    /// Seconds before an external computation is killed; `None` defers to
    /// `RESOLUTE_EXTERNAL_TIMEOUT_SECS` or the built-in default.
    pub external_timeout: Option<u64>,
}

/// Maps lines of the merged library text back to their source files.
struct SourceMap {
    /// `(first merged line, display name)` per file, ascending.
    files: Vec<(u32, String)>,
    text: String,
    next_line: u32,
}

impl SourceMap {
    fn new() -> Self {
        SourceMap {
            files: Vec::new(),
            text: String::new(),
            next_line: 1,
        }
    }

    fn push(&mut self, name: &str, source: &str) {
        self.files.push((self.next_line, name.to_string()));
        self.text.push_str(source);
        if !source.ends_with('\n') {
            self.text.push('\n');
        }
        let lines = source.matches('\n').count() as u32
            + if source.ends_with('\n') { 0 } else { 1 };
        self.next_line += lines;
    }

    fn locate(&self, line: u32) -> (&str, u32) {
        let idx = self
            .files
            .iter()
            .rposition(|(start, _)| *start <= line)
            .unwrap_or(0);
        let (start, name) = &self.files[idx];
        (name, line - start + 1)
    }
}

/// Run one check: returns 0 when every case is proven, 1 when any failed,
/// 2 when the inputs could not be loaded, checked, or evaluated.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let model_name = config.model_path.display().to_string();
    let model_src = match fs::read_to_string(&config.model_path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{model_name}: {e}");
            return EXIT_ERROR;
        }
    };
    let model = match parse_model(&model_src) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "{model_name}:{}:{}: {}", e.line, e.col, e.message);
            return EXIT_ERROR;
        }
    };

    let mut map = SourceMap::new();
    map.push("<stdlib>", stdlib_source());
    for path in &config.library_paths {
        let name = path.display().to_string();
        match fs::read_to_string(path) {
            Ok(src) => map.push(&name, &src),
            Err(e) => {
                let _ = writeln!(err, "{name}: {e}");
                return EXIT_ERROR;
            }
        }
    }

    let ast = match parse_library(&map.text) {
        Ok(a) => a,
        Err(e) => {
            let (file, line) = map.locate(e.line);
            let _ = writeln!(err, "{file}:{line}:{}: {}", e.col, e.message);
            return EXIT_ERROR;
        }
    };
    let lib = match typecheck(&ast) {
        Ok(l) => l,
        Err(errors) => {
            for e in errors {
                let (file, line) = map.locate(e.span.line);
                let _ = writeln!(err, "{file}:{line}:{}: {}", e.span.col, e.message);
            }
            return EXIT_ERROR;
        }
    };

    let goals = match attach_prove_directives(&lib, &model) {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(
                err,
                "{model_name}:{}:{}: {}",
                e.span.line, e.span.col, e.message
            );
            return EXIT_ERROR;
        }
    };

    let mut ctx = ProofContext::with_timeout(&model, &lib, config.external_timeout);
    let mut cases: Vec<AssuranceCase> = Vec::new();
    let mut any_failed = false;
    for goal in &goals {
        let proved = prove_goal(goal, &mut ctx);
        for line in ctx.eval.take_debug_lines() {
            let _ = writeln!(err, "{line}");
        }
        let proof = match proved {
            Ok(p) => p,
            Err(e) => {
                let (file, line) = map.locate(e.error.span.line);
                let _ = write!(err, "{file}:{line}:{}: {}", e.error.span.col, e.error.message);
                let _ = match &e.claim {
                    Some(claim) => writeln!(err, " (while proving {claim})"),
                    None => writeln!(err),
                };
                return EXIT_ERROR;
            }
        };
        let case = build_case(&proof, goal, &ctx.eval);
        let failed = case.verdict == Status::Failed;
        cases.push(case);
        if failed {
            any_failed = true;
            if config.fail_fast {
                break;
            }
        }
    }

    let rendered = render_cases(&cases, config.format);
    if let Err(e) = emit(&rendered, config.output.as_deref(), out) {
        let _ = writeln!(err, "{e}");
        return EXIT_ERROR;
    }
    if any_failed {
        EXIT_FAILED
    } else {
        EXIT_PROVEN
    }
}

fn render_cases(cases: &[AssuranceCase], format: Format) -> String {
    match format {
        Format::Text => {
            let rendered: Vec<String> = cases.iter().map(render_text).collect();
            rendered.join("\n")
        }
        Format::Json => {
            let mut s = render_json_array(cases);
            s.push('\n');
            s
        }
        Format::Dot => {
            let rendered: Vec<String> = cases.iter().map(render_dot).collect();
            rendered.join("\n")
        }
    }
}

fn emit(rendered: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, rendered)
            .map_err(|e| format!("{}: {e}", path.display())),
        None => out
            .write_all(rendered.as_bytes())
            .map_err(|e| format!("writing output: {e}")),
    }
}
