//! Solver seam: anything that can turn a [`Model`] into a [`MilpSolution`].
//!
//! [`BuiltinBackend`] is the branch-and-bound in this crate.
//! [`ExternalCommandBackend`] writes the model as an LP file, runs a
//! command line in which `{lp}` and `{sol}` are replaced by the model and
//! solution paths, and reads back a plain `name value` solution listing
//! (the format written by HiGHS `--solution_file` and CBC `solu`; header and
//! comment lines whose first token is not a column name are skipped).

use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use crate::bnb::{solve_milp_with, IncumbentHeuristic, MilpSolution, MilpStatus, SolveOptions};
use crate::error::{MilpError, Result};
use crate::lp_format::write_lp;
use crate::model::Model;

pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &str;

    fn solve(
        &self,
        model: &Model,
        opts: &SolveOptions,
        heuristic: Option<&dyn IncumbentHeuristic>,
        start: Option<&[f64]>,
    ) -> Result<MilpSolution>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinBackend;

impl MilpBackend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn solve(
        &self,
        model: &Model,
        opts: &SolveOptions,
        heuristic: Option<&dyn IncumbentHeuristic>,
        start: Option<&[f64]>,
    ) -> Result<MilpSolution> {
        solve_milp_with(model, opts, heuristic, start)
    }
}

#[derive(Debug, Clone)]
pub struct ExternalCommandBackend {
    pub program: String,
    pub args: Vec<String>,
    pub workdir: PathBuf,
}

static RUN_COUNTER: AtomicU64 = AtomicU64::new(0);

impl ExternalCommandBackend {
    /// Parses a whitespace-separated command template such as
    /// `highs --model_file {lp} --solution_file {sol}`.
    pub fn from_template(template: &str, workdir: impl Into<PathBuf>) -> Result<Self> {
        let mut parts = template.split_whitespace().map(str::to_owned);
        let program = parts
            .next()
            .ok_or_else(|| MilpError::External("empty command template".into()))?;
        Ok(ExternalCommandBackend {
            program,
            args: parts.collect(),
            workdir: workdir.into(),
        })
    }
}

/// Reads `name value` pairs for the model's columns from a solution listing.
pub(crate) fn parse_solution_listing(model: &Model, text: &str) -> Result<Vec<f64>> {
    let index: std::collections::HashMap<&str, usize> = model
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| (v.name.as_str(), j))
        .collect();
    let mut x = vec![0.0; model.num_vars()];
    let mut seen = 0usize;
    for line in text.lines() {
        let mut tok = line.split_whitespace();
        let (Some(name), Some(value)) = (tok.next(), tok.next()) else {
            continue;
        };
        if let (Some(&j), Ok(v)) = (index.get(name), value.parse::<f64>()) {
            x[j] = v;
            seen += 1;
        }
    }
    if seen == 0 && model.num_vars() > 0 {
        return Err(MilpError::External(
            "solution file lists no model columns".into(),
        ));
    }
    Ok(x)
}

impl MilpBackend for ExternalCommandBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(
        &self,
        model: &Model,
        opts: &SolveOptions,
        _heuristic: Option<&dyn IncumbentHeuristic>,
        _start: Option<&[f64]>,
    ) -> Result<MilpSolution> {
        let started = Instant::now();
        let run = RUN_COUNTER.fetch_add(1, Ordering::Relaxed);
        let stem = format!("model-{}-{run}", std::process::id());
        let lp_path = self.workdir.join(format!("{stem}.lp"));
        let sol_path = self.workdir.join(format!("{stem}.sol"));
        let io = |e: std::io::Error| MilpError::External(e.to_string());
        std::fs::create_dir_all(&self.workdir).map_err(io)?;
        std::fs::write(&lp_path, write_lp(model)).map_err(io)?;
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| {
                a.replace("{lp}", &lp_path.to_string_lossy())
                    .replace("{sol}", &sol_path.to_string_lossy())
            })
            .collect();
        let status = Command::new(&self.program)
            .args(&args)
            .status()
            .map_err(io)?;
        if !status.success() {
            return Err(MilpError::External(format!(
                "{} exited with {status}",
                self.program
            )));
        }
        let text = std::fs::read_to_string(&sol_path).map_err(io)?;
        let _ = std::fs::remove_file(&lp_path);
        let _ = std::fs::remove_file(&sol_path);
        let x = parse_solution_listing(model, &text)?;
        if model.max_violation(&x) > 1e-6 || !model.is_integral(&x, opts.integrality_tol) {
            return Err(MilpError::External(
                "external solution violates the model".into(),
            ));
        }
        let objective = model.objective_value(&x);
        Ok(MilpSolution {
            // the external engine's own optimality claim is taken at face value
            status: MilpStatus::Optimal,
            x,
            objective,
            bound: objective,
            nodes: 0,
            lp_iterations: 0,
            elapsed: started.elapsed(),
            trace: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sense;

    #[test]
    fn parses_listing_with_headers() {
        let mut m = Model::new("t");
        m.add_binary("x_1_1", 1.0);
        m.add_binary("x_2_1", 1.0);
        m.add_constraint("r", vec![(0, 1.0), (1, 1.0)], Sense::Ge, 1.0);
        let text = "Model status\nOptimal\n# Columns 2\nx_1_1 1\nx_2_1 0\n# Rows 1\nr 1\n";
        assert_eq!(parse_solution_listing(&m, text).unwrap(), vec![1.0, 0.0]);
        assert!(parse_solution_listing(&m, "nothing here\n").is_err());
    }

    #[test]
    fn template_parsing() {
        let b = ExternalCommandBackend::from_template("highs --model_file {lp}", "/tmp").unwrap();
        assert_eq!(b.program, "highs");
        assert_eq!(b.args, vec!["--model_file", "{lp}"]);
        assert!(ExternalCommandBackend::from_template("  ", "/tmp").is_err());
    }
}
