use crate::expr::{BinaryOp, EvalContext, Expression};
use crate::fuchsian::FuchsianSystem;
use crate::numcore::{Complex, ComplexMatrix, MAX_DIM};

use super::{DeformationError, DeformationSample};

/// Slack allowed when checking that a parameter value lies in the interval.
const INTERVAL_SLACK: f64 = 1e-12;

/// Expression-defined family t ↦ (x_i(t), A_i(t)) over a real interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedFamily {
    dim: usize,
    parameter: String,
    interval: (f64, f64),
    constants: EvalContext,
    poles: Vec<Expression>,
    /// Row-major n×n entries per pole.
    residues: Vec<Vec<Expression>>,
}

impl ParameterizedFamily {
    pub fn new(
        dim: usize,
        parameter: &str,
        interval: (f64, f64),
        poles: Vec<Expression>,
        residues: Vec<Vec<Expression>>,
    ) -> Result<Self, DeformationError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(DeformationError::Invalid(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if poles.is_empty() {
            return Err(DeformationError::Invalid("family needs at least one pole".into()));
        }
        if poles.len() != residues.len() {
            return Err(DeformationError::Invalid(format!(
                "{} pole expressions but {} residue blocks",
                poles.len(),
                residues.len()
            )));
        }
        for (i, r) in residues.iter().enumerate() {
            if r.len() != dim * dim {
                return Err(DeformationError::Invalid(format!(
                    "residue {} has {} entries, expected {}",
                    i + 1,
                    r.len(),
                    dim * dim
                )));
            }
        }
        if !(interval.0.is_finite() && interval.1.is_finite() && interval.0 <= interval.1) {
            return Err(DeformationError::Invalid(format!("bad parameter interval {interval:?}")));
        }
        Ok(Self { dim, parameter: parameter.to_string(), interval, constants: EvalContext::new(), poles, residues })
    }

    /// Extra named constants visible to every expression.
    pub fn with_constants(mut self, constants: EvalContext) -> Self {
        self.constants = constants;
        self
    }

    /// Family whose members are all `sys`, written with literal expressions.
    pub fn constant(sys: &FuchsianSystem, parameter: &str, interval: (f64, f64)) -> Result<Self, DeformationError> {
        let lit = |z: Complex| {
            Expression::binary(
                BinaryOp::Add,
                Expression::number(z.re),
                Expression::binary(BinaryOp::Mul, Expression::number(z.im), Expression::ImaginaryUnit),
            )
        };
        let poles = sys.poles().iter().map(|&p| lit(p)).collect();
        let residues = sys.residues().iter().map(|r| r.as_slice().iter().map(|&z| lit(z)).collect()).collect();
        Self::new(sys.dim(), parameter, interval, poles, residues)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parameter(&self) -> &str {
        &self.parameter
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn pole_expressions(&self) -> &[Expression] {
        &self.poles
    }

    pub fn residue_expressions(&self) -> &[Vec<Expression>] {
        &self.residues
    }

    fn context(&self, t: f64) -> EvalContext {
        let mut ctx = self.constants.clone();
        ctx.bind(&self.parameter, t);
        ctx
    }

    /// Concrete system at parameter value `t`.
    pub fn instantiate(&self, t: f64) -> Result<FuchsianSystem, DeformationError> {
        let (lo, hi) = self.interval;
        if !(t >= lo - INTERVAL_SLACK && t <= hi + INTERVAL_SLACK) {
            return Err(DeformationError::ParameterOutOfRange { t, lo, hi });
        }
        let ctx = self.context(t);
        let eval = |e: &Expression, what: String| {
            e.eval(&ctx).map_err(|source| DeformationError::Eval { what, t, source })
        };
        let poles = self
            .poles
            .iter()
            .enumerate()
            .map(|(i, e)| eval(e, format!("position of pole {}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut residues = Vec::with_capacity(self.residues.len());
        for (i, entries) in self.residues.iter().enumerate() {
            let vals = entries
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    eval(e, format!("residue {} entry ({}, {})", i + 1, k / self.dim + 1, k % self.dim + 1))
                })
                .collect::<Result<Vec<_>, _>>()?;
            residues.push(ComplexMatrix::from_flat(self.dim, &vals)?);
        }
        FuchsianSystem::new(poles, residues).map_err(|source| DeformationError::System { t, source })
    }

    /// `samples` equally spaced parameter values covering the interval.
    pub fn grid(&self, samples: usize) -> Vec<f64> {
        equally_spaced(self.interval.0, self.interval.1, samples)
    }

    pub fn sample(&self, samples: usize) -> Result<Vec<DeformationSample>, DeformationError> {
        self.grid(samples)
            .into_iter()
            .map(|t| Ok(DeformationSample { t, system: self.instantiate(t)? }))
            .collect()
    }
}

pub(crate) fn equally_spaced(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => vec![],
        1 => vec![lo],
        n => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Scalar functions b_i(t), one per pole, added to the residue diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistSpec {
    pub b: Vec<Expression>,
}

impl TwistSpec {
    pub fn new(b: Vec<Expression>) -> Self {
        Self { b }
    }

    /// Predicted monodromy factor c_i(t) = e^{2πi·b_i(t)}.
    pub fn factor(&self, pole: usize, ctx: &EvalContext) -> Result<Complex, DeformationError> {
        let b = self.b[pole]
            .eval(ctx)
            .map_err(|source| DeformationError::Eval { what: format!("twist b_{}", pole + 1), t: f64::NAN, source })?;
        Ok((Complex::new(0.0, 2.0 * std::f64::consts::PI) * b).exp())
    }
}

/// Family with A_i(t) replaced by A_i(t) + b_i(t)·I.
pub fn scalar_twist(fam: &ParameterizedFamily, tw: &TwistSpec) -> Result<ParameterizedFamily, DeformationError> {
    if tw.b.len() != fam.pole_count() {
        return Err(DeformationError::Invalid(format!(
            "twist has {} scalars for {} poles",
            tw.b.len(),
            fam.pole_count()
        )));
    }
    let n = fam.dim;
    let mut out = fam.clone();
    for (entries, b) in out.residues.iter_mut().zip(&tw.b) {
        if *b == Expression::Number(0.0) {
            continue;
        }
        for k in 0..n {
            let e = &mut entries[k * n + k];
            *e = Expression::binary(BinaryOp::Add, e.clone(), b.clone());
        }
    }
    Ok(out)
}

/// Applies a twist to already-sampled systems, evaluating b_i at each sample's t.
pub fn twist_samples(
    samples: &[DeformationSample],
    tw: &TwistSpec,
    parameter: &str,
) -> Result<Vec<DeformationSample>, DeformationError> {
    samples
        .iter()
        .map(|s| {
            let m = s.system.pole_count();
            if tw.b.len() != m {
                return Err(DeformationError::Invalid(format!("twist has {} scalars for {m} poles", tw.b.len())));
            }
            let ctx = EvalContext::new().with(parameter, s.t);
            let n = s.system.dim();
            let residues = s
                .system
                .residues()
                .iter()
                .zip(&tw.b)
                .enumerate()
                .map(|(i, (a, b))| {
                    let bv = b.eval(&ctx).map_err(|source| DeformationError::Eval {
                        what: format!("twist b_{}", i + 1),
                        t: s.t,
                        source,
                    })?;
                    Ok(a + &ComplexMatrix::scalar(n, bv))
                })
                .collect::<Result<Vec<_>, DeformationError>>()?;
            let system = FuchsianSystem::new(s.system.poles().to_vec(), residues)
                .map_err(|source| DeformationError::System { t: s.t, source })?;
            Ok(DeformationSample { t: s.t, system })
        })
        .collect()
}
