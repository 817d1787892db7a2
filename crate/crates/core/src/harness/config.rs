//! Flat `key = value` experiment files.
//!
//! ```text
//! # comments run to end of line
//! problem.kind = indefinite_quadratic
//! run.algorithms = lnnc, sgd_constant
//! sgd.alpha = 0.1, 0.01
//! ```
//!
//! `run.algorithms` lists the algorithms to run. `sgd.alpha` and `sgd.alpha0`
//! accept lists; `sgd_constant` and `sgd_diminishing` expand to one run per
//! listed value. Every other key takes a single value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::directions::StepRule;
use crate::error::{Error, Result};
use crate::hvp::HvpMode;
use crate::optimizer::{Algorithm, HessianBatch, RunConfig, Schedule};
use crate::problems::{ProblemKind, ProblemSpec};

pub const DEFAULT_OUTPUT_DIR: &str = "lnsd-out";

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub log_scale: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { dir: PathBuf::from(DEFAULT_OUTPUT_DIR), log_scale: false }
    }
}

/// A problem and the runs to perform on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub problem: ProblemSpec,
    pub runs: Vec<RunConfig>,
    pub output: OutputSettings,
}

const KEYS: &[&str] = &[
    "problem.kind",
    "problem.dim",
    "problem.components",
    "problem.seed",
    "problem.eigenvalues",
    "problem.layers",
    "problem.data_dim",
    "problem.samples",
    "problem.likelihood_floor",
    "problem.separation",
    "problem.init_scale",
    "problem.hidden",
    "problem.inputs",
    "problem.teacher_scale",
    "run.algorithms",
    "run.k_max",
    "run.q",
    "run.schedule",
    "run.seed",
    "run.step_rule",
    "run.hessian",
    "run.g_tol",
    "run.full_grad_tol",
    "run.log_every",
    "run.x0",
    "linesearch.eta",
    "linesearch.rho",
    "linesearch.alpha0",
    "linesearch.max_backtracks",
    "hvp.mode",
    "hvp.eps0",
    "hvp.central",
    "lanczos.breakdown_tol",
    "lanczos.pinv_tol",
    "direction.tau_nc",
    "direction.tau_desc",
    "sgd.alpha",
    "sgd.alpha0",
    "sgd.k0",
    "output.dir",
    "output.log_scale",
];

/// Keys known to the parser, in canonical order.
pub fn known_keys() -> &'static [&'static str] {
    KEYS
}

struct Entry {
    line: usize,
    value: String,
}

/// Parses `--key=value` (or `key=value`) override arguments.
pub fn parse_overrides<S: AsRef<str>>(args: &[S]) -> Result<Vec<(String, String)>> {
    args.iter()
        .map(|a| {
            let a = a.as_ref();
            let body = a.strip_prefix("--").unwrap_or(a);
            match body.split_once('=') {
                Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
                None => Err(Error::Config {
                    line: 0,
                    key: body.to_string(),
                    message: "override must look like --key=value".into(),
                }),
            }
        })
        .collect()
}

pub fn parse_config_file(path: &Path, overrides: &[(String, String)]) -> Result<Experiment> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, overrides)
}

/// Parses config text, then applies overrides (reported as line 0).
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<Experiment> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                key: content.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let key = k.trim().to_string();
        check_known(line, &key)?;
        if let Some(prev) = entries.get(&key) {
            return Err(Error::Config {
                line,
                key,
                message: format!("duplicate key, first set on line {}", prev.line),
            });
        }
        entries.insert(key, Entry { line, value: v.trim().to_string() });
    }
    for (k, v) in overrides {
        check_known(0, k)?;
        entries.insert(k.clone(), Entry { line: 0, value: v.clone() });
    }
    resolve(&entries)
}

fn check_known(line: usize, key: &str) -> Result<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(Error::Config { line, key: key.to_string(), message: "unknown key".into() })
    }
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, Entry>,
}

impl Reader<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        Error::Config { line, key: key.to_string(), message: message.into() }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| self.err(key, format!("`{v}`: {e}"))),
        }
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None | Some("") | Some("none") => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e: T::Err| self.err(key, format!("`{v}`: {e}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.raw(key) else { return Ok(None) };
        if v.is_empty() {
            return Ok(Some(Vec::new()));
        }
        v.split(',')
            .map(|item| {
                let item = item.trim();
                item.parse().map_err(|e: T::Err| self.err(key, format!("`{item}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    fn keyword<T>(&self, key: &str, default: T, options: &[(&str, T)]) -> Result<T>
    where
        T: Copy,
    {
        let Some(v) = self.raw(key) else { return Ok(default) };
        options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            self.err(key, format!("`{v}` is not one of {}", names.join(", ")))
        })
    }
}

fn resolve(entries: &BTreeMap<String, Entry>) -> Result<Experiment> {
    let r = Reader { entries };
    let d = ProblemSpec::default();
    let kind: ProblemKind = r.get("problem.kind", d.kind)?;
    let problem = ProblemSpec {
        kind,
        dim: r.get("problem.dim", d.dim)?,
        components: r.get("problem.components", d.components)?,
        seed: r.get("problem.seed", d.seed)?,
        eigenvalues: r.list("problem.eigenvalues")?.unwrap_or(d.eigenvalues),
        layers: r.list("problem.layers")?.unwrap_or(d.layers),
        data_dim: r.get("problem.data_dim", d.data_dim)?,
        samples: r.get("problem.samples", d.samples)?,
        likelihood_floor: r.get("problem.likelihood_floor", d.likelihood_floor)?,
        separation: r.get("problem.separation", d.separation)?,
        init_scale: r.get("problem.init_scale", d.init_scale)?,
        hidden: r.list("problem.hidden")?.unwrap_or(d.hidden),
        inputs: r.get("problem.inputs", d.inputs)?,
        teacher_scale: r.get("problem.teacher_scale", d.teacher_scale)?,
    };
    if problem.components == 0 {
        return Err(r.err("problem.components", "must be positive"));
    }

    let dr = RunConfig::default();
    let mut base = RunConfig {
        k_max: r.get("run.k_max", dr.k_max)?,
        q: r.get("run.q", dr.q)?,
        schedule: r.keyword(
            "run.schedule",
            dr.schedule,
            &[("round_robin", Schedule::RoundRobin), ("random", Schedule::Random)],
        )?,
        seed: r.get("run.seed", dr.seed)?,
        step_rule: r.get::<StepRule>("run.step_rule", dr.step_rule)?,
        hessian: r.keyword(
            "run.hessian",
            dr.hessian,
            &[("mini_batch", HessianBatch::MiniBatch), ("full_batch", HessianBatch::FullBatch)],
        )?,
        g_tol: r.get("run.g_tol", dr.g_tol)?,
        full_grad_tol: r.opt("run.full_grad_tol")?,
        log_every: r.opt("run.log_every")?,
        x0: r.list("run.x0")?,
        hvp_mode: r.get::<HvpMode>("hvp.mode", dr.hvp_mode)?,
        breakdown_tol: r.get("lanczos.breakdown_tol", dr.breakdown_tol)?,
        pinv_tol: r.get("lanczos.pinv_tol", dr.pinv_tol)?,
        tau_nc: r.get("direction.tau_nc", dr.tau_nc)?,
        tau_desc: r.get("direction.tau_desc", dr.tau_desc)?,
        ..dr
    };
    base.line_search.eta = r.get("linesearch.eta", base.line_search.eta)?;
    base.line_search.rho = r.get("linesearch.rho", base.line_search.rho)?;
    base.line_search.alpha0 = r.get("linesearch.alpha0", base.line_search.alpha0)?;
    base.line_search.max_backtracks =
        r.get("linesearch.max_backtracks", base.line_search.max_backtracks)?;
    base.fd.eps0 = r.get("hvp.eps0", base.fd.eps0)?;
    base.fd.central = r.get("hvp.central", base.fd.central)?;
    if let Some(x0) = &base.x0 {
        if x0.len() != problem.param_dim() {
            return Err(r.err(
                "run.x0",
                format!("has {} entries but the problem has {} parameters", x0.len(), problem.param_dim()),
            ));
        }
    }

    let names: Vec<String> = r.list("run.algorithms")?.unwrap_or_else(|| vec!["lnnc".to_string()]);
    if names.is_empty() {
        return Err(r.err("run.algorithms", "must name at least one algorithm"));
    }
    let alphas: Vec<f64> = r.list("sgd.alpha")?.unwrap_or_else(|| vec![0.01]);
    let alpha0s: Vec<f64> = r.list("sgd.alpha0")?.unwrap_or_else(|| vec![0.1]);
    let k0: f64 = r.get("sgd.k0", 100.0)?;

    let mut runs = Vec::new();
    for name in &names {
        let algorithms: Vec<Algorithm> = match name.as_str() {
            "lnnc" => vec![Algorithm::Lnnc],
            "sgd_constant" => alphas.iter().map(|&alpha| Algorithm::SgdConstant { alpha }).collect(),
            "sgd_diminishing" => {
                alpha0s.iter().map(|&alpha0| Algorithm::SgdDiminishing { alpha0, k0 }).collect()
            }
            "sgd_linesearch" => vec![Algorithm::SgdLinesearch],
            other => return Err(r.err("run.algorithms", format!("unknown algorithm `{other}`"))),
        };
        for algorithm in algorithms {
            let cfg = RunConfig { algorithm, ..base.clone() };
            cfg.validate().map_err(|e| r.err(key_for(&e, &cfg), e.to_string()))?;
            runs.push(cfg);
        }
    }
    for (i, a) in runs.iter().enumerate() {
        if runs[..i].iter().any(|b| b.label() == a.label()) {
            return Err(r.err("run.algorithms", format!("run `{}` listed twice", a.label())));
        }
    }

    let output = OutputSettings {
        dir: r.raw("output.dir").map_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR), PathBuf::from),
        log_scale: r.get("output.log_scale", false)?,
    };
    Ok(Experiment { problem, runs, output })
}

/// Best-effort mapping from a validation message to the key responsible.
fn key_for(e: &Error, cfg: &RunConfig) -> &'static str {
    let msg = e.to_string();
    let table = [
        ("k_max", "run.k_max"),
        ("q must", "run.q"),
        ("eta", "linesearch.eta"),
        ("rho", "linesearch.rho"),
        ("alpha0 must", "linesearch.alpha0"),
        ("max_backtracks", "linesearch.max_backtracks"),
        ("eps0", "hvp.eps0"),
        ("breakdown_tol", "lanczos.breakdown_tol"),
        ("pinv_tol", "lanczos.pinv_tol"),
        ("tau_nc", "direction.tau_nc"),
        ("tau_desc", "direction.tau_desc"),
        ("g_tol", "run.g_tol"),
        ("full_grad_tol", "run.full_grad_tol"),
        ("log_every", "run.log_every"),
    ];
    if let Some((_, key)) = table.iter().find(|(needle, _)| msg.contains(needle)) {
        return key;
    }
    match cfg.algorithm {
        Algorithm::SgdConstant { .. } => "sgd.alpha",
        Algorithm::SgdDiminishing { .. } => "sgd.alpha0",
        _ => "run.algorithms",
    }
}

fn join<T: std::fmt::Debug>(items: &[T]) -> String {
    items.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

/// Shortest round-trip form, with exponents for extreme magnitudes.
fn num(v: f64) -> String {
    format!("{v:?}")
}

impl Experiment {
    /// Fully resolved settings in config syntax. Parsing the result yields
    /// an equal experiment.
    pub fn render(&self) -> String {
        let p = &self.problem;
        let first = self.runs.first().cloned().unwrap_or_default();
        let mut names: Vec<&str> = Vec::new();
        let mut alphas = Vec::new();
        let mut alpha0s = Vec::new();
        let mut k0 = 100.0;
        for run in &self.runs {
            if !names.contains(&run.algorithm.name()) {
                names.push(run.algorithm.name());
            }
            match run.algorithm {
                Algorithm::SgdConstant { alpha } => alphas.push(alpha),
                Algorithm::SgdDiminishing { alpha0, k0: k } => {
                    alpha0s.push(alpha0);
                    k0 = k;
                }
                _ => {}
            }
        }
        let schedule = match first.schedule {
            Schedule::RoundRobin => "round_robin",
            Schedule::Random => "random",
        };
        let hessian = match first.hessian {
            HessianBatch::MiniBatch => "mini_batch",
            HessianBatch::FullBatch => "full_batch",
        };
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".to_string());

        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("problem.kind", p.kind.to_string());
        kv("problem.dim", p.dim.to_string());
        kv("problem.components", p.components.to_string());
        kv("problem.seed", p.seed.to_string());
        kv("problem.eigenvalues", join(&p.eigenvalues));
        kv("problem.layers", join(&p.layers));
        kv("problem.data_dim", p.data_dim.to_string());
        kv("problem.samples", p.samples.to_string());
        kv("problem.likelihood_floor", num(p.likelihood_floor));
        kv("problem.separation", num(p.separation));
        kv("problem.init_scale", num(p.init_scale));
        kv("problem.hidden", join(&p.hidden));
        kv("problem.inputs", p.inputs.to_string());
        kv("problem.teacher_scale", num(p.teacher_scale));
        kv("run.algorithms", names.join(", "));
        kv("run.k_max", first.k_max.to_string());
        kv("run.q", first.q.to_string());
        kv("run.schedule", schedule.to_string());
        kv("run.seed", first.seed.to_string());
        kv("run.step_rule", first.step_rule.to_string());
        kv("run.hessian", hessian.to_string());
        kv("run.g_tol", num(first.g_tol));
        kv("run.full_grad_tol", opt(first.full_grad_tol.map(num)));
        kv("run.log_every", opt(first.log_every.map(|v| v.to_string())));
        if let Some(x0) = &first.x0 {
            kv("run.x0", join(x0));
        }
        kv("linesearch.eta", num(first.line_search.eta));
        kv("linesearch.rho", num(first.line_search.rho));
        kv("linesearch.alpha0", num(first.line_search.alpha0));
        kv("linesearch.max_backtracks", first.line_search.max_backtracks.to_string());
        kv("hvp.mode", first.hvp_mode.to_string());
        kv("hvp.eps0", num(first.fd.eps0));
        kv("hvp.central", first.fd.central.to_string());
        kv("lanczos.breakdown_tol", num(first.breakdown_tol));
        kv("lanczos.pinv_tol", num(first.pinv_tol));
        kv("direction.tau_nc", num(first.tau_nc));
        kv("direction.tau_desc", num(first.tau_desc));
        if !alphas.is_empty() {
            kv("sgd.alpha", join(&alphas));
        }
        if !alpha0s.is_empty() {
            kv("sgd.alpha0", join(&alpha0s));
            kv("sgd.k0", num(k0));
        }
        kv("output.dir", self.output.dir.display().to_string());
        kv("output.log_scale", self.output.log_scale.to_string());
        s
    }
}
