//! Subprocess boundary to an optional external MILP/conic engine.
//!
//! The core stays dependency-free: a solver is described by a command template
//! in a small JSON config, models travel out as exchange files and solutions
//! come back as plain `name value` text, one variable per line. Every returned
//! assignment is re-validated against the model before anything downstream
//! trusts it.
//!
//! Adapter config document:
//!
//! ```json
//! {
//!   "command": ["/usr/bin/mysolver", "{input}", "--out", "{output}", "--tl", "{timelimit}"],
//!   "solution_format": "name-value",
//!   "env_passthrough": ["GRB_LICENSE_FILE"]
//! }
//! ```
//!
//! `{input}`, `{output}` and `{timelimit}` are substituted per invocation; the
//! child runs in a fresh temporary directory, so concurrent invocations never
//! collide. Exceeding the time limit kills the child.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::AdapterError;
use crate::formulations::{Assignment, FormulationModel};
use crate::Result;

/// External solver description, loaded from JSON.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AdapterConfig {
    /// Command and arguments; `{input}`, `{output}`, `{timelimit}` expand per run.
    pub command: Vec<String>,
    /// Tag of the expected solution text format; only "name-value" is known.
    #[serde(default = "default_format")]
    pub solution_format: String,
    /// Environment variables forwarded to the child (everything else is kept
    /// from the parent as-is).
    #[serde(default)]
    pub env_passthrough: Vec<String>,
}

fn default_format() -> String {
    "name-value".to_string()
}

impl AdapterConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: AdapterConfig =
            serde_json::from_str(text).map_err(|e| AdapterError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.command.is_empty() {
            return Err(AdapterError::Config("empty command template".into()).into());
        }
        if self.solution_format != "name-value" {
            return Err(AdapterError::Config(format!(
                "unknown solution format {:?}",
                self.solution_format
            ))
            .into());
        }
        Ok(())
    }
}

/// Write `model_text` into a fresh temp dir, run the adapter command on it,
/// and return the produced solution file contents.
///
/// The child is killed once `time_limit_secs` elapses.
pub fn invoke(
    config: &AdapterConfig,
    model_text: &str,
    model_file_name: &str,
    time_limit_secs: f64,
) -> Result<String> {
    config.validate()?;
    let dir = tempfile::tempdir()?;
    let input = dir.path().join(model_file_name);
    let output = dir.path().join("solution.txt");
    std::fs::write(&input, model_text)?;

    let expand = |arg: &str| {
        arg.replace("{input}", &input.display().to_string())
            .replace("{output}", &output.display().to_string())
            .replace("{timelimit}", &format!("{time_limit_secs}"))
    };
    let program = expand(&config.command[0]);
    let args: Vec<String> = config.command[1..].iter().map(|a| expand(a)).collect();

    let mut cmd = Command::new(&program);
    cmd.args(&args)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().map_err(|source| AdapterError::Spawn {
        command: program.clone(),
        source,
    })?;

    let deadline = Instant::now() + Duration::from_secs_f64(time_limit_secs);
    let status = loop {
        match child.try_wait()? {
            Some(status) => break status,
            None => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(AdapterError::Timeout {
                        limit_secs: time_limit_secs,
                    }
                    .into());
                }
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    };

    if !status.success() {
        let mut stderr = String::new();
        if let Some(mut pipe) = child.stderr.take() {
            let _ = pipe.read_to_string(&mut stderr);
        }
        return Err(AdapterError::ChildFailed {
            status: status.to_string(),
            stderr: stderr.chars().take(500).collect(),
        }
        .into());
    }
    if !output.exists() {
        return Err(AdapterError::MissingOutput {
            path: output.display().to_string(),
        }
        .into());
    }
    Ok(std::fs::read_to_string(&output)?)
}

/// A parsed assignment plus the variable names the solver reported that the
/// model does not know (ignored with a warning at the call site).
#[derive(Debug, Clone)]
pub struct ParsedSolution {
    pub assignment: Assignment,
    pub ignored: Vec<String>,
}

/// Parse `name value` solution text into a dense assignment over the model.
///
/// Unknown names are collected, missing binaries default to 0 and missing
/// continuous variables to their lower bound. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_solution(text: &str, model: &FormulationModel) -> Result<ParsedSolution> {
    let mut pairs: Vec<(&str, f64)> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(name), Some(value), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(AdapterError::BadSolutionLine {
                line_no: line_no + 1,
                line: line.to_string(),
            }
            .into());
        };
        let value: f64 = value.parse().map_err(|_| AdapterError::BadSolutionLine {
            line_no: line_no + 1,
            line: line.to_string(),
        })?;
        pairs.push((name, value));
    }
    let (assignment, ignored) = Assignment::from_pairs_with_defaults(model, pairs);
    Ok(ParsedSolution { assignment, ignored })
}

/// Render an assignment in the `name value` exchange format.
pub fn serialize_assignment(model: &FormulationModel, assignment: &Assignment) -> String {
    let mut out = String::new();
    for (var, value) in model.variables.iter().zip(assignment.values()) {
        out.push_str(&format!("{} {}\n", var.name, value));
    }
    out
}

/// Solve a formulation with the external adapter and re-validate the result.
///
/// Returns the validated assignment and its objective value.
pub fn solve_model(
    config: &AdapterConfig,
    model: &FormulationModel,
    model_text: &str,
    file_name: &str,
    time_limit_secs: f64,
    residual_tol: f64,
) -> Result<(Assignment, f64)> {
    let raw = invoke(config, model_text, file_name, time_limit_secs)?;
    let parsed = parse_solution(&raw, model)?;
    let report = crate::formulations::check_feasibility(model, &parsed.assignment);
    if report.max_violation() > residual_tol {
        return Err(AdapterError::Rejected(format!(
            "assignment violates the model by {:.3e} (tolerance {residual_tol:.1e})",
            report.max_violation()
        ))
        .into());
    }
    Ok((parsed.assignment, report.objective_value))
}
