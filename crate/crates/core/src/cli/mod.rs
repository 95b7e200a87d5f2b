//! Spec loading, command dispatch and JSON/CSV reporting for the `monolab` binary.

mod report;
mod spec;

use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

use crate::deformation::{
    check_isomonodromic, check_projectively_isomonodromic, integrate_schlesinger, invariant_profile, scalar_twist,
    twist_samples, DeformationSample, InvariantProfile, SchlesingerTrajectory, Verdict,
};
use crate::expr::ParseError;
use crate::fuchsian::{default_base_point, local_exponent_check, monodromy_tuple, FuchsianSystem};
use crate::halphen::{lax_system, Prop0Config};
use crate::numcore::Complex;
use crate::pathint::ToleranceSpec;

pub use report::{complex_json, matrix_json, profile_csv, profile_json, verdict_json, CONVENTIONS};
pub use spec::{load_spec, parse_spec, Mode, RunSettings, SpecFile};

/// Gate applied by `dhv-demo` to the scalar residuals and scalar mismatches.
pub const PROP0_GATE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("spec is not valid TOML: {0}")]
    Toml(String),
    #[error("[{block}] {what} \"{source_text}\": {error}")]
    Expression { block: String, what: String, source_text: String, error: ParseError },
    #[error("[{block}] {message}")]
    Validation { block: String, message: String },
    #[error("command `{command}` needs a spec file (--spec)")]
    MissingSpec { command: &'static str },
    #[error("command `{command}` does not apply to a {mode} spec")]
    ModeMismatch { command: &'static str, mode: &'static str },
    #[error("{stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Stage { stage, message: e.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Monodromy,
    CheckIso,
    CheckProjiso,
    Schlesinger,
    DhvDemo,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Monodromy => "monodromy",
            Command::CheckIso => "check-iso",
            Command::CheckProjiso => "check-projiso",
            Command::Schlesinger => "schlesinger",
            Command::DhvDemo => "dhv-demo",
        }
    }
}

/// Command-line overrides layered on top of the spec's `[run]` block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub samples: Option<usize>,
    /// Relative integrator tolerance.
    pub tol: Option<f64>,
    pub csv: Option<PathBuf>,
    /// Recorded in the report; no computation here is randomized.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Refuted,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Refuted => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub status: Status,
    /// Profile rendered as CSV, when the command produced one.
    pub csv: Option<String>,
    /// Where the CSV should go (override, else the spec's `[run] csv`).
    pub csv_path: Option<PathBuf>,
}

impl Outcome {
    /// Writes the CSV, if both a profile and a destination exist.
    pub fn write_csv(&self) -> Result<(), CliError> {
        if let (Some(text), Some(path)) = (&self.csv, &self.csv_path) {
            std::fs::write(path, text).map_err(|e| CliError::Output { path: path.clone(), message: e.to_string() })?;
        }
        Ok(())
    }
}

struct Context<'a> {
    command: Command,
    spec: Option<&'a SpecFile>,
    settings: RunSettings,
    seed: Option<u64>,
}

impl Context<'_> {
    fn tol(&self) -> &ToleranceSpec {
        &self.settings.tolerance
    }

    fn mode_mismatch(&self) -> CliError {
        CliError::ModeMismatch { command: self.command.name(), mode: self.spec.map_or("default", |s| s.mode.name()) }
    }

    fn envelope(&self, base_point: Complex, results: Value, diagnostics: Value, status: Status) -> Value {
        json!({
            "metadata": {
                "command": self.command.name(),
                "spec_sha256": self.spec.map(|s| s.hash.clone()),
                "mode": self.spec.map_or("halphen", |s| s.mode.name()),
                "version": env!("CARGO_PKG_VERSION"),
                "timestamp": report::timestamp(),
                "seed": self.seed,
                "base_point": complex_json(base_point),
                "tolerance": { "rel": self.settings.tolerance.rel, "abs": self.settings.tolerance.abs },
                "threshold": self.settings.threshold,
                "conventions": report::conventions_json(),
            },
            "status": match status { Status::Success => "ok", Status::Refuted => "refuted" },
            "results": results,
            "diagnostics": diagnostics,
        })
    }
}

/// Runs `command` against `spec` (or the built-in Halphen defaults for `dhv-demo`).
pub fn run(spec: Option<&SpecFile>, command: Command, overrides: &Overrides) -> Result<Outcome, CliError> {
    let mut settings = spec.map(|s| s.run.clone()).unwrap_or_default();
    if let Some(n) = overrides.samples {
        if n < 2 {
            return Err(CliError::Validation { block: "run".into(), message: "--samples must be at least 2".into() });
        }
        settings.samples = Some(n);
    }
    if let Some(r) = overrides.tol {
        settings.tolerance.rel = r;
        settings.tolerance.validate().map_err(|e| CliError::Validation { block: "run".into(), message: e.to_string() })?;
    }
    let csv_path = overrides.csv.clone().or_else(|| settings.csv.clone());
    let ctx = Context { command, spec, settings, seed: overrides.seed };
    if spec.is_none() && command != Command::DhvDemo {
        return Err(CliError::MissingSpec { command: command.name() });
    }
    let (report, status, profile) = match command {
        Command::Monodromy => run_monodromy(&ctx)?,
        Command::CheckIso | Command::CheckProjiso => run_check(&ctx)?,
        Command::Schlesinger => run_schlesinger(&ctx)?,
        Command::DhvDemo => run_dhv(&ctx)?,
    };
    Ok(Outcome { report, status, csv: profile.as_ref().map(profile_csv), csv_path })
}

type RunResult = Result<(Value, Status, Option<InvariantProfile>), CliError>;

fn initial_system(ctx: &Context) -> Result<(f64, FuchsianSystem), CliError> {
    let spec = ctx.spec.expect("checked");
    match &spec.mode {
        Mode::Family(f) | Mode::Schlesinger { family: f, .. } => {
            let t0 = f.interval().0;
            let fam = match &spec.twist {
                Some(tw) => scalar_twist(f, tw).map_err(stage("twist"))?,
                None => f.clone(),
            };
            Ok((t0, fam.instantiate(t0).map_err(stage("instantiate"))?))
        }
        Mode::Halphen(cfg) => Ok((cfg.grid[0], lax_system(&cfg.s0, &cfg.lax).map_err(stage("lax system"))?)),
    }
}

fn run_monodromy(ctx: &Context) -> RunResult {
    let (t0, sys) = initial_system(ctx)?;
    let x0 = match ctx.settings.base_point {
        Some(p) => p,
        None => default_base_point(&[&sys]).map_err(stage("base point"))?.point,
    };
    let tuple = monodromy_tuple(&sys, Some(x0), ctx.tol()).map_err(stage("monodromy"))?;
    let entries: Vec<Value> = tuple
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let check = local_exponent_check(&sys, &tuple, i).map_err(stage("exponent check"))?;
            Ok(json!({
                "pole": i + 1,
                "position": complex_json(sys.poles()[i]),
                "residue": matrix_json(&sys.residues()[i]),
                "matrix": matrix_json(&e.matrix),
                "exponent": e.exponent.as_ref().map(matrix_json),
                "exponent_check": report::exponent_check_json(&check),
                "det": complex_json(e.matrix.det()),
                "trace": complex_json(e.matrix.trace()),
            }))
        })
        .collect::<Result<_, CliError>>()?;
    let results = json!({
        "parameter": t0,
        "regular_at_infinity": sys.at_infinity_regular(),
        "monodromy": entries,
    });
    let diagnostics = json!({
        "steps": tuple.entries.iter().map(|e| e.steps).collect::<Vec<_>>(),
        "error_estimates": tuple.entries.iter().map(|e| e.error_estimate).collect::<Vec<_>>(),
    });
    Ok((ctx.envelope(x0, results, diagnostics, Status::Success), Status::Success, None))
}

fn schlesinger_samples(
    family: &crate::deformation::ParameterizedFamily,
    velocities: &[Complex],
    samples: usize,
    tol: &ToleranceSpec,
) -> Result<(Vec<DeformationSample>, f64), CliError> {
    let (t0, t1) = family.interval();
    let initial = family.instantiate(t0).map_err(stage("instantiate"))?;
    let traj = SchlesingerTrajectory::new(initial, velocities.to_vec()).map_err(stage("schlesinger setup"))?;
    let traj = integrate_schlesinger(traj, t1 - t0, samples, tol).map_err(stage("schlesinger integration"))?;
    let shifted = traj.samples().iter().map(|s| DeformationSample { t: t0 + s.t, system: s.system.clone() }).collect();
    Ok((shifted, traj.max_sum_drift()))
}

fn halphen_config(ctx: &Context, cfg: &Prop0Config) -> Prop0Config {
    let mut cfg = cfg.clone();
    if let Some(n) = ctx.settings.samples {
        let (a, b) = (cfg.grid[0], cfg.grid[cfg.grid.len() - 1]);
        cfg.grid = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
    }
    cfg
}

fn run_check(ctx: &Context) -> RunResult {
    let spec = ctx.spec.expect("checked");
    let samples = ctx.settings.family_samples();
    let mut diagnostics = json!({});
    let profile = match &spec.mode {
        Mode::Family(f) => {
            let fam = match &spec.twist {
                Some(tw) => scalar_twist(f, tw).map_err(stage("twist"))?,
                None => f.clone(),
            };
            let sampled = fam.sample(samples).map_err(stage("instantiate"))?;
            invariant_profile(&sampled, ctx.settings.base_point, ctx.tol()).map_err(stage("invariant profile"))?
        }
        Mode::Schlesinger { family, velocities } => {
            let (mut sampled, drift) = schlesinger_samples(family, velocities, samples, ctx.tol())?;
            if let Some(tw) = &spec.twist {
                sampled = twist_samples(&sampled, tw, family.parameter()).map_err(stage("twist"))?;
            }
            diagnostics["residue_sum_drift"] = json!(drift);
            invariant_profile(&sampled, ctx.settings.base_point, ctx.tol()).map_err(stage("invariant profile"))?
        }
        Mode::Halphen(cfg) => {
            let rep = halphen_config(ctx, cfg).run(ctx.settings.base_point, ctx.tol()).map_err(stage("verify_prop0"))?;
            rep.profile.ok_or_else(|| CliError::Stage { stage: "invariant profile", message: "too few samples".into() })?
        }
    };
    let verdict = if ctx.command == Command::CheckIso {
        check_isomonodromic(&profile, ctx.settings.threshold)
    } else {
        check_projectively_isomonodromic(&profile, ctx.settings.threshold)
    };
    let status = status_of(&[&verdict]);
    diagnostics["total_error_estimate"] = json!(profile.total_error_estimate());
    let results = json!({
        "verdict": verdict_json(&verdict),
        "profile": profile_json(&profile),
    });
    Ok((ctx.envelope(profile.base_point, results, diagnostics, status), status, Some(profile)))
}

fn status_of(verdicts: &[&Verdict]) -> Status {
    if verdicts.iter().any(|v| v.is_refuted()) {
        Status::Refuted
    } else {
        Status::Success
    }
}

fn run_schlesinger(ctx: &Context) -> RunResult {
    let spec = ctx.spec.expect("checked");
    let Mode::Schlesinger { family, velocities } = &spec.mode else { return Err(ctx.mode_mismatch()) };
    let (sampled, drift) = schlesinger_samples(family, velocities, ctx.settings.family_samples(), ctx.tol())?;
    let profile =
        invariant_profile(&sampled, ctx.settings.base_point, ctx.tol()).map_err(stage("invariant profile"))?;
    let iso = check_isomonodromic(&profile, ctx.settings.threshold);
    let proj = check_projectively_isomonodromic(&profile, ctx.settings.threshold);
    let status = status_of(&[&iso, &proj]);
    let trajectory: Vec<Value> = sampled
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "poles": s.system.poles().iter().map(|&p| complex_json(p)).collect::<Vec<_>>(),
                "residues": s.system.residues().iter().map(matrix_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let results = json!({
        "velocities": velocities.iter().map(|&v| complex_json(v)).collect::<Vec<_>>(),
        "trajectory": trajectory,
        "isomonodromic": verdict_json(&iso),
        "projectively_isomonodromic": verdict_json(&proj),
        "profile": profile_json(&profile),
    });
    let diagnostics = json!({
        "residue_sum_drift": drift,
        "total_error_estimate": profile.total_error_estimate(),
    });
    Ok((ctx.envelope(profile.base_point, results, diagnostics, status), status, Some(profile)))
}

fn run_dhv(ctx: &Context) -> RunResult {
    let cfg = match ctx.spec.map(|s| &s.mode) {
        None => Prop0Config::default(),
        Some(Mode::Halphen(cfg)) => cfg.clone(),
        Some(_) => return Err(ctx.mode_mismatch()),
    };
    let cfg = halphen_config(ctx, &cfg);
    let rep = cfg.run(ctx.settings.base_point, ctx.tol()).map_err(stage("verify_prop0"))?;
    let proj = rep.profile.as_ref().map(|p| check_projectively_isomonodromic(p, ctx.settings.threshold));
    let gate_ok = rep.max_scalar_residual <= PROP0_GATE
        && rep.max_mismatch <= PROP0_GATE
        && rep.max_twist_mismatch <= PROP0_GATE;
    let mut status = if gate_ok { Status::Success } else { Status::Refuted };
    if proj.as_ref().is_some_and(Verdict::is_refuted) {
        status = Status::Refuted;
    }
    let results = json!({
        "configuration": report::prop0_config_json(&cfg),
        "prop0": report::prop0_json(&rep),
        "gate": { "threshold": PROP0_GATE, "passed": gate_ok },
        "projectively_isomonodromic": proj.as_ref().map(verdict_json),
    });
    let diagnostics = json!({
        "steps": rep.samples.iter().map(|s| s.monodromy.entries.iter().map(|e| e.steps).sum::<usize>()).collect::<Vec<_>>(),
        "error_estimates": rep.samples.iter().map(|s| s.monodromy.total_error_estimate()).collect::<Vec<_>>(),
    });
    let profile = rep.profile.clone();
    Ok((ctx.envelope(rep.base_point, results, diagnostics, status), status, profile))
}

/// Serializes a report with stable key order and a trailing newline.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("json values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> SpecFile {
        parse_spec(text).unwrap()
    }

    #[test]
    fn zero_residue_gives_identity() {
        let s = spec("[system]\ndimension = 2\n[[pole]]\nposition = \"0\"\nresidue = [[\"0\",\"0\"],[\"0\",\"0\"]]\n");
        let out = run(Some(&s), Command::Monodromy, &Overrides::default()).unwrap();
        assert_eq!(out.status, Status::Success);
        let m = &out.report["results"]["monodromy"][0]["matrix"];
        assert_eq!(m[0][0], json!([1.0, 0.0]));
        assert_eq!(m[0][1], json!([0.0, 0.0]));
    }

    #[test]
    fn diag_family_refuted_with_trace_witness() {
        let s = spec(
            "[system]\ndimension = 2\ninterval = [0.0, 0.4]\n[[pole]]\nposition = \"0\"\nresidue = [[\"t\",\"0\"],[\"0\",\"-t\"]]\n[run]\nsamples = 5\n",
        );
        let out = run(Some(&s), Command::CheckIso, &Overrides::default()).unwrap();
        assert_eq!(out.status, Status::Refuted);
        assert_eq!(out.report["results"]["verdict"]["witness"]["quantity"], json!("trace(M_1)"));
        assert!(out.csv.unwrap().starts_with("t,det(M_1).re,det(M_1).im,trace(M_1).re"));
    }

    #[test]
    fn mode_and_spec_checks() {
        let s = spec("[system]\ndimension = 1\n[[pole]]\nposition = 0\nresidue = [[0.5]]\n");
        assert!(matches!(run(Some(&s), Command::Schlesinger, &Overrides::default()), Err(CliError::ModeMismatch { .. })));
        assert!(matches!(run(Some(&s), Command::DhvDemo, &Overrides::default()), Err(CliError::ModeMismatch { .. })));
        assert!(matches!(run(None, Command::Monodromy, &Overrides::default()), Err(CliError::MissingSpec { .. })));
    }

    #[test]
    fn deterministic_modulo_timestamp() {
        let s = spec("[system]\ndimension = 1\n[[pole]]\nposition = 0\nresidue = [[0.25]]\n[[pole]]\nposition = 1\nresidue = [[-0.25]]\n");
        let mut a = run(Some(&s), Command::Monodromy, &Overrides::default()).unwrap().report;
        let mut b = run(Some(&s), Command::Monodromy, &Overrides::default()).unwrap().report;
        a["metadata"]["timestamp"] = Value::Null;
        b["metadata"]["timestamp"] = Value::Null;
        assert_eq!(render(&a), render(&b));
    }
}
