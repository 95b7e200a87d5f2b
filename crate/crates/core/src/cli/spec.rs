//! SpecFile: TOML description of a family, a Schlesinger run, or a Halphen run.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::deformation::{ParameterizedFamily, TwistSpec, DEFAULT_SAMPLES, DEFAULT_THRESHOLD};
use crate::expr::{parse, EvalContext, Expression};
use crate::halphen::{HIIState, HalphenParams, LaxParams, Prop0Config};
use crate::numcore::{Complex, ComplexMatrix};
use crate::pathint::ToleranceSpec;

use super::CliError;

/// An expression given either as a string or as a bare TOML number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ExprValue {
    Text(String),
    Number(f64),
}

impl ExprValue {
    fn parse(&self, block: &str, what: &str) -> Result<Expression, CliError> {
        match self {
            ExprValue::Number(v) if !v.is_finite() => {
                Err(invalid(block, format!("{what}: non-finite number {v}")))
            }
            ExprValue::Number(v) => Ok(Expression::number(*v)),
            ExprValue::Text(s) => parse(s).map_err(|e| CliError::Expression {
                block: block.to_string(),
                what: what.to_string(),
                source_text: s.clone(),
                error: e,
            }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    dimension: usize,
    #[serde(default = "default_parameter")]
    parameter: String,
    interval: Option<[f64; 2]>,
}

fn default_parameter() -> String {
    "t".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPole {
    position: ExprValue,
    residue: Vec<Vec<ExprValue>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTwist {
    b: Vec<ExprValue>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchlesinger {
    velocities: Vec<ExprValue>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHalphen {
    s0: Option<Vec<ExprValue>>,
    b: Option<ExprValue>,
    #[serde(rename = "S")]
    s: Option<Vec<Vec<ExprValue>>>,
    lambda: Option<Vec<ExprValue>>,
    mu: Option<ExprValue>,
    interval: Option<[f64; 2]>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    samples: Option<usize>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    base_point: Option<ExprValue>,
    threshold: Option<f64>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    system: Option<RawSystem>,
    #[serde(default)]
    pole: Vec<RawPole>,
    twist: Option<RawTwist>,
    schlesinger: Option<RawSchlesinger>,
    halphen: Option<RawHalphen>,
    #[serde(default)]
    run: RawRun,
}

/// What the spec describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Family(ParameterizedFamily),
    /// Initial system is the family at the interval start; poles move with constant velocities.
    Schlesinger { family: ParameterizedFamily, velocities: Vec<Complex> },
    Halphen(Prop0Config),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Family(_) => "family",
            Mode::Schlesinger { .. } => "schlesinger",
            Mode::Halphen(_) => "halphen",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Explicit sample count; commands fall back to their own defaults.
    pub samples: Option<usize>,
    pub tolerance: ToleranceSpec,
    pub base_point: Option<Complex>,
    pub threshold: f64,
    pub csv: Option<PathBuf>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { samples: None, tolerance: ToleranceSpec::default(), base_point: None, threshold: DEFAULT_THRESHOLD, csv: None }
    }
}

impl RunSettings {
    pub fn family_samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub mode: Mode,
    pub twist: Option<TwistSpec>,
    pub run: RunSettings,
    /// Hex SHA-256 of the source text.
    pub hash: String,
}

fn invalid(block: &str, message: impl Into<String>) -> CliError {
    CliError::Validation { block: block.to_string(), message: message.into() }
}

fn constant(e: &Expression, block: &str, what: &str, ctx: &EvalContext) -> Result<Complex, CliError> {
    e.eval(ctx).map_err(|err| invalid(block, format!("{what}: {err}")))
}

fn constant_matrix(
    rows: &[Vec<ExprValue>],
    n: usize,
    block: &str,
    name: &str,
) -> Result<ComplexMatrix, CliError> {
    check_shape(rows, n, block, name)?;
    let ctx = EvalContext::new();
    let mut vals = Vec::with_capacity(n * n);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let what = format!("{name} entry ({}, {})", r + 1, c + 1);
            vals.push(constant(&v.parse(block, &what)?, block, &what, &ctx)?);
        }
    }
    Ok(ComplexMatrix::from_flat(n, &vals).expect("shape checked"))
}

fn check_shape(rows: &[Vec<ExprValue>], n: usize, block: &str, name: &str) -> Result<(), CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let found: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(invalid(block, format!("{name} must be {n}x{n}, got {} rows of lengths {found:?}", rows.len())));
    }
    Ok(())
}

fn parse_family(raw: &RawSpec) -> Result<ParameterizedFamily, CliError> {
    let sys = raw.system.as_ref().ok_or_else(|| invalid("system", "missing [system] block"))?;
    if raw.pole.is_empty() {
        return Err(invalid("pole", "at least one [[pole]] block is required"));
    }
    let n = sys.dimension;
    if n == 0 || n > crate::numcore::MAX_DIM {
        return Err(invalid("system", format!("dimension {n} outside 1..={}", crate::numcore::MAX_DIM)));
    }
    let interval = match sys.interval {
        Some([a, b]) if a.is_finite() && b.is_finite() && a <= b => (a, b),
        Some(iv) => return Err(invalid("system", format!("interval {iv:?} must be finite with start <= end"))),
        None => (0.0, 1.0),
    };
    let mut poles = Vec::new();
    let mut residues = Vec::new();
    for (i, p) in raw.pole.iter().enumerate() {
        let block = format!("pole {}", i + 1);
        poles.push(p.position.parse(&block, "position")?);
        check_shape(&p.residue, n, &block, "residue")?;
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in p.residue.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                entries.push(v.parse(&block, &format!("residue entry ({}, {})", r + 1, c + 1))?);
            }
        }
        residues.push(entries);
    }
    let fam = ParameterizedFamily::new(n, &sys.parameter, interval, poles, residues)
        .map_err(|e| invalid("system", e.to_string()))?;
    // surface unknown names now rather than at run time
    for (i, e) in fam.pole_expressions().iter().chain(fam.residue_expressions().iter().flatten()).enumerate() {
        if let Some(v) = e.variables().into_iter().find(|v| v != &sys.parameter) {
            let block = if i < fam.pole_count() { format!("pole {}", i + 1) } else { "pole".to_string() };
            return Err(invalid(&block, format!("unknown variable `{v}` (only `{}` is bound)", sys.parameter)));
        }
    }
    Ok(fam)
}

fn three(vals: &[ExprValue], block: &str, name: &str) -> Result<[Complex; 3], CliError> {
    if vals.len() != 3 {
        return Err(invalid(block, format!("{name} needs exactly 3 entries, got {}", vals.len())));
    }
    let ctx = EvalContext::new();
    let mut out = [Complex::new(0.0, 0.0); 3];
    for (k, v) in vals.iter().enumerate() {
        let what = format!("{name}[{}]", k + 1);
        out[k] = constant(&v.parse(block, &what)?, block, &what, &ctx)?;
    }
    Ok(out)
}

fn parse_halphen(h: &RawHalphen) -> Result<Prop0Config, CliError> {
    let block = "halphen";
    let ctx = EvalContext::new();
    let mut cfg = Prop0Config::default();
    if let Some(s0) = &h.s0 {
        cfg.s0 = HIIState::new(three(s0, block, "s0")?).map_err(|e| invalid(block, e.to_string()))?;
    }
    if let Some(b) = &h.b {
        let b = constant(&b.parse(block, "b")?, block, "b", &ctx)?;
        cfg.halphen = HalphenParams::from_b(b).map_err(|e| invalid(block, e.to_string()))?;
    }
    let s = match &h.s {
        Some(rows) => constant_matrix(rows, 2, block, "S")?,
        None => cfg.lax.s.clone(),
    };
    let lambda = match &h.lambda {
        Some(l) => three(l, block, "lambda")?,
        None => cfg.lax.lambda,
    };
    let mu = match &h.mu {
        Some(m) => constant(&m.parse(block, "mu")?, block, "mu", &ctx)?,
        None => cfg.lax.mu,
    };
    cfg.lax = LaxParams::new(s, lambda, mu).map_err(|e| invalid(block, e.to_string()))?;
    let (t0, t1) = match h.interval {
        Some([a, b]) if a.is_finite() && b.is_finite() && a < b => (a, b),
        Some(iv) => return Err(invalid(block, format!("interval {iv:?} must be finite with start < end"))),
        None => (0.0, 0.1),
    };
    let points = h.points.unwrap_or(9);
    if points < 2 {
        return Err(invalid(block, "points must be at least 2"));
    }
    cfg.grid = (0..points).map(|k| t0 + (t1 - t0) * k as f64 / (points - 1) as f64).collect();
    Ok(cfg)
}

fn parse_run(r: &RawRun) -> Result<RunSettings, CliError> {
    let mut out = RunSettings::default();
    if let Some(s) = r.samples {
        if s < 2 {
            return Err(invalid("run", "samples must be at least 2"));
        }
        out.samples = Some(s);
    }
    if let Some(v) = r.rel_tol {
        out.tolerance.rel = v;
    }
    if let Some(v) = r.abs_tol {
        out.tolerance.abs = v;
    }
    out.tolerance.validate().map_err(|e| invalid("run", e.to_string()))?;
    if let Some(bp) = &r.base_point {
        let e = bp.parse("run", "base_point")?;
        out.base_point = Some(constant(&e, "run", "base_point", &EvalContext::new())?);
    }
    if let Some(th) = r.threshold {
        if !(th > 0.0 && th.is_finite()) {
            return Err(invalid("run", format!("threshold must be positive, got {th}")));
        }
        out.threshold = th;
    }
    out.csv = r.csv.clone();
    Ok(out)
}

/// Parses and validates spec text.
pub fn parse_spec(text: &str) -> Result<SpecFile, CliError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| CliError::Toml(e.to_string()))?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    let mode = match (&raw.schlesinger, &raw.halphen) {
        (Some(_), Some(_)) => {
            return Err(invalid("schlesinger", "[schlesinger] and [halphen] select different modes; give only one"))
        }
        (None, Some(h)) => {
            if raw.system.is_some() || !raw.pole.is_empty() {
                return Err(invalid("halphen", "[halphen] runs do not take [system] or [[pole]] blocks"));
            }
            Mode::Halphen(parse_halphen(h)?)
        }
        (Some(s), None) => {
            let family = parse_family(&raw)?;
            if s.velocities.len() != family.pole_count() {
                return Err(invalid(
                    "schlesinger",
                    format!("{} velocities for {} poles", s.velocities.len(), family.pole_count()),
                ));
            }
            let ctx = EvalContext::new();
            let velocities = s
                .velocities
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let what = format!("velocity {}", i + 1);
                    constant(&v.parse("schlesinger", &what)?, "schlesinger", &what, &ctx)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Mode::Schlesinger { family, velocities }
        }
        (None, None) => Mode::Family(parse_family(&raw)?),
    };
    let twist = match &raw.twist {
        None => None,
        Some(t) => {
            if matches!(mode, Mode::Halphen(_)) {
                return Err(invalid("twist", "[twist] does not apply to [halphen] runs"));
            }
            let b = t
                .b
                .iter()
                .enumerate()
                .map(|(i, v)| v.parse("twist", &format!("b[{}]", i + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            let m = match &mode {
                Mode::Family(f) | Mode::Schlesinger { family: f, .. } => f.pole_count(),
                Mode::Halphen(_) => unreachable!(),
            };
            if b.len() != m {
                return Err(invalid("twist", format!("{} scalars for {m} poles", b.len())));
            }
            Some(TwistSpec::new(b))
        }
    };
    let run = parse_run(&raw.run)?;
    Ok(SpecFile { mode, twist, run, hash })
}

pub fn load_spec(path: &Path) -> Result<SpecFile, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_spec(&text)
}
