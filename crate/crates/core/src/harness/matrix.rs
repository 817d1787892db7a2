use std::path::{Path, PathBuf};

use super::config::Experiment;
use super::manifest::RunManifest;
use super::plot::render_convergence_plot;
use super::report::{ComparisonReport, ReportRow};
use super::trace_csv::{read_trace_csv, trace_to_string, without_elapsed, write_trace_csv};
use crate::error::{Error, Result};
use crate::optimizer::{run, RunOutcome, TraceRecord};
use crate::problems::ProblemSpec;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PLOT_FILE: &str = "convergence.svg";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub label: String,
    pub manifest_path: PathBuf,
    pub trace_path: PathBuf,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone)]
pub struct MatrixResult {
    pub report: ComparisonReport,
    pub runs: Vec<RunArtifact>,
    /// Plot of every run in the matrix.
    pub plot_path: PathBuf,
    pub report_path: PathBuf,
}

fn starting_point(problem: &ProblemSpec, x0: &Option<Vec<f64>>) -> Vec<f64> {
    x0.clone().unwrap_or_else(|| problem.initial_point())
}

/// Runs every configuration in turn and persists, under `output.dir`:
/// one `<run_id>/` directory per run holding the manifest, trace and a
/// single-run plot, plus a combined plot and the report.
pub fn run_matrix(exp: &Experiment) -> Result<MatrixResult> {
    if exp.runs.is_empty() {
        return Err(Error::InvalidArgument("no runs configured".into()));
    }
    let obj = exp.problem.build()?;
    let out = &exp.output.dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let mut runs = Vec::with_capacity(exp.runs.len());
    let mut rows = Vec::with_capacity(exp.runs.len());
    let mut labeled = Vec::with_capacity(exp.runs.len());
    for cfg in &exp.runs {
        let manifest = RunManifest::new(&exp.problem, cfg);
        let dir = out.join(&manifest.run_id);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let manifest_path = dir.join(MANIFEST_FILE);
        manifest.save(&manifest_path)?;

        let outcome = run(obj.as_ref(), &starting_point(&exp.problem, &cfg.x0), cfg)?;
        let trace_path = RunManifest::resolve(&manifest_path, &manifest.trace_path);
        write_trace_csv(&outcome.trace, &trace_path)?;
        let single = vec![(manifest.label.clone(), outcome.trace.clone())];
        if !outcome.trace.is_empty() {
            render_convergence_plot(
                &single,
                &RunManifest::resolve(&manifest_path, &manifest.plot_path),
                exp.output.log_scale,
            )?;
        }

        rows.push(ReportRow::from_trace(&manifest.label, &outcome.trace, outcome.aborted.clone()));
        labeled.extend(single);
        runs.push(RunArtifact { label: manifest.label, manifest_path, trace_path, outcome });
    }

    let plot_path = out.join(PLOT_FILE);
    render_convergence_plot(&labeled, &plot_path, exp.output.log_scale)?;
    let report = ComparisonReport::new(rows)?;
    let report_path = out.join(REPORT_FILE);
    std::fs::write(&report_path, report.to_string()).map_err(|e| Error::io(&report_path, e))?;
    Ok(MatrixResult { report, runs, plot_path, report_path })
}

#[derive(Debug, Clone)]
pub struct ReplayResult {
    pub manifest: RunManifest,
    pub outcome: RunOutcome,
    /// True when the new trace equals the persisted one outside the
    /// elapsed column.
    pub matches: bool,
    /// First differing line (1-based, header is line 1).
    pub first_mismatch: Option<usize>,
}

/// Re-executes the run described by a manifest and compares traces.
pub fn replay(manifest_path: &Path) -> Result<ReplayResult> {
    let manifest = RunManifest::load(manifest_path)?;
    let obj = manifest.problem.build()?;
    let outcome = run(obj.as_ref(), &starting_point(&manifest.problem, &manifest.run.x0), &manifest.run)?;
    let trace_path = RunManifest::resolve(manifest_path, &manifest.trace_path);
    let stored = std::fs::read_to_string(&trace_path).map_err(|e| Error::io(&trace_path, e))?;
    let (old, new) = (without_elapsed(&stored), without_elapsed(&trace_to_string(&outcome.trace)));
    let first_mismatch = if old == new {
        None
    } else {
        let (a, b): (Vec<&str>, Vec<&str>) = (old.lines().collect(), new.lines().collect());
        Some((0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i)).unwrap_or(0) + 1)
    };
    Ok(ReplayResult { manifest, outcome, matches: first_mismatch.is_none(), first_mismatch })
}

/// Reads traces for plotting or reporting. A trace sitting next to a
/// manifest takes its label from it; otherwise the path is the label.
pub fn load_labeled_traces(paths: &[PathBuf]) -> Result<Vec<(String, Vec<TraceRecord>)>> {
    paths
        .iter()
        .map(|p| {
            let sibling = p.with_file_name(MANIFEST_FILE);
            let label = if sibling.is_file() {
                RunManifest::load(&sibling)?.label
            } else {
                p.display().to_string()
            };
            Ok((label, read_trace_csv(p)?))
        })
        .collect()
}
