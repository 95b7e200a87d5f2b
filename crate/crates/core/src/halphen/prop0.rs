use std::f64::consts::PI;

use rayon::prelude::*;

use crate::deformation::InvariantProfile;
use crate::fuchsian::{default_base_point, monodromy_tuple, MonodromyTuple};
use crate::numcore::{Complex, ComplexMatrix};
use crate::pathint::{integrate_flow, ToleranceSpec};

use super::flows::{alpha_residues, b_scalars, hii_rhs, HIIState, HalphenParams};
use super::lax::{lax_system, LaxParams};
use super::HalphenError;

/// Inputs for the scalar-evolution check, with the desk-scale defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop0Config {
    pub s0: HIIState,
    pub halphen: HalphenParams,
    pub lax: LaxParams,
    pub grid: Vec<f64>,
}

impl Default for Prop0Config {
    fn default() -> Self {
        Self {
            s0: HIIState::from_real([-1.0, 0.0, 1.0]).expect("distinct"),
            halphen: HalphenParams::from_b(Complex::new(-0.125, 0.0)).expect("valid"),
            lax: LaxParams::default(),
            grid: (0..9).map(|k| 0.1 * k as f64 / 8.0).collect(),
        }
    }
}

/// Which exponent sign made the extracted scalars agree with exp(∓2πiμ∫α_i).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    /// M_i(t)·G_i⁻¹ ≈ exp(−2πiμ∫α_i) for counterclockwise loops.
    Direct,
    /// M_i(t)·G_i⁻¹ ≈ exp(+2πiμ∫α_i).
    Inverse,
}

impl SignConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignConvention::Direct => "direct",
            SignConvention::Inverse => "inverse",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop0Sample {
    pub t: f64,
    pub state: HIIState,
    pub monodromy: MonodromyTuple,
    /// ∫_{t0}^{t} α_i dt along the H-II trajectory.
    pub alpha_integral: [Complex; 3],
    /// exp(−2πiμ∫α_i).
    pub predicted: [Complex; 3],
    /// exp(2πi(b_i(t) − b_i(t0))).
    pub twist_scalar: [Complex; 3],
    /// trace(M_i·G_i⁻¹)/2.
    pub extracted: [Complex; 3],
    /// ‖M_iG_i⁻¹ − extracted·I‖_∞ / ‖M_iG_i⁻¹‖_∞.
    pub scalar_residual: [f64; 3],
    /// |extracted − predicted| under the matched sign convention.
    pub mismatch: [f64; 3],
    /// |extracted − twist_scalar|.
    pub twist_mismatch: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop0Report {
    pub base_point: Complex,
    /// G_i = M_i(t0).
    pub reference: Vec<ComplexMatrix>,
    pub samples: Vec<Prop0Sample>,
    pub sign: SignConvention,
    pub max_direct_mismatch: f64,
    pub max_inverse_mismatch: f64,
    pub max_scalar_residual: f64,
    pub max_mismatch: f64,
    pub max_twist_mismatch: f64,
    /// Invariant profile of the sampled tuples (present when there are ≥ 2 samples).
    pub profile: Option<InvariantProfile>,
}

/// Integrates H-II together with ∫α_i, builds the Lax system at each grid time,
/// and compares M_i(t)·M_i(t0)⁻¹ against the predicted scalar factors.
pub fn verify_prop0(
    s0: &HIIState,
    p_h: &HalphenParams,
    p_l: &LaxParams,
    t_grid: &[f64],
    x0: Option<Complex>,
    tol: &ToleranceSpec,
) -> Result<Prop0Report, HalphenError> {
    p_h.validate()?;
    p_l.validate()?;
    if t_grid.is_empty() {
        return Err(HalphenError::Grid("empty".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || !t_grid.iter().all(|t| t.is_finite()) {
        return Err(HalphenError::Grid("times must be finite and strictly increasing".into()));
    }

    // state: x_1, x_2, x_3, ∫α_1, ∫α_2, ∫α_3
    let rhs = |_t: f64, y: &[Complex]| -> Result<Vec<Complex>, HalphenError> {
        let s = HIIState::new([y[0], y[1], y[2]])?;
        let mut d = hii_rhs(&s, p_h).to_vec();
        d.extend(alpha_residues(&s));
        Ok(d)
    };
    let zero = Complex::new(0.0, 0.0);
    let mut y: Vec<Complex> = s0.x().iter().copied().chain([zero; 3]).collect();
    let mut knots = Vec::with_capacity(t_grid.len());
    for (k, &t) in t_grid.iter().enumerate() {
        if k > 0 {
            y = integrate_flow(rhs, t_grid[k - 1], t, &y, tol)?.value;
        }
        knots.push((HIIState::new([y[0], y[1], y[2]])?, [y[3], y[4], y[5]]));
    }

    let systems = knots.iter().map(|(s, _)| lax_system(s, p_l)).collect::<Result<Vec<_>, _>>()?;
    let x0 = match x0 {
        Some(p) => p,
        None => default_base_point(&systems.iter().collect::<Vec<_>>())?.point,
    };
    let tuples = systems
        .par_iter()
        .map(|s| monodromy_tuple(s, Some(x0), tol))
        .collect::<Result<Vec<_>, _>>()?;

    let reference: Vec<ComplexMatrix> = tuples[0].matrices().into_iter().cloned().collect();
    let g_inv = reference.iter().map(ComplexMatrix::inverse).collect::<Result<Vec<_>, _>>()?;
    let b0 = b_scalars(&knots[0].0, p_l.mu);
    let two_pi_i = Complex::new(0.0, 2.0 * PI);

    let mut samples = Vec::with_capacity(knots.len());
    let (mut direct, mut inverse) = (0.0f64, 0.0f64);
    let mut inverse_mismatch = Vec::with_capacity(knots.len());
    for ((&t, (state, integral)), tuple) in t_grid.iter().zip(&knots).zip(&tuples) {
        let b = b_scalars(state, p_l.mu);
        let mut predicted = [zero; 3];
        let mut twist_scalar = [zero; 3];
        let mut extracted = [zero; 3];
        let mut scalar_residual = [0.0; 3];
        let mut mismatch = [0.0; 3];
        let mut inv = [0.0; 3];
        let mut twist_mismatch = [0.0; 3];
        for i in 0..3 {
            let r = &tuple.entries[i].matrix * &g_inv[i];
            let check = r.is_scalar(0.0);
            predicted[i] = (-two_pi_i * p_l.mu * integral[i]).exp();
            twist_scalar[i] = (two_pi_i * (b[i] - b0[i])).exp();
            extracted[i] = check.value;
            scalar_residual[i] = check.residual;
            mismatch[i] = (check.value - predicted[i]).norm();
            inv[i] = (check.value - predicted[i].inv()).norm();
            twist_mismatch[i] = (check.value - twist_scalar[i]).norm();
            direct = direct.max(mismatch[i]);
            inverse = inverse.max(inv[i]);
        }
        inverse_mismatch.push(inv);
        samples.push(Prop0Sample {
            t,
            state: *state,
            monodromy: tuple.clone(),
            alpha_integral: *integral,
            predicted,
            twist_scalar,
            extracted,
            scalar_residual,
            mismatch,
            twist_mismatch,
        });
    }
    let sign = if direct <= inverse { SignConvention::Direct } else { SignConvention::Inverse };
    if sign == SignConvention::Inverse {
        for (s, inv) in samples.iter_mut().zip(&inverse_mismatch) {
            s.mismatch = *inv;
        }
    }
    let fold = |f: &dyn Fn(&Prop0Sample) -> [f64; 3]| samples.iter().flat_map(f).fold(0.0f64, f64::max);
    let max_scalar_residual = fold(&|s| s.scalar_residual);
    let max_mismatch = fold(&|s| s.mismatch);
    let max_twist_mismatch = fold(&|s| s.twist_mismatch);
    let profile = if tuples.len() >= 2 {
        Some(InvariantProfile::from_tuples(t_grid.to_vec(), tuples).map_err(|e| HalphenError::Grid(e.to_string()))?)
    } else {
        None
    };
    Ok(Prop0Report {
        base_point: x0,
        reference,
        samples,
        sign,
        max_direct_mismatch: direct,
        max_inverse_mismatch: inverse,
        max_scalar_residual,
        max_mismatch,
        max_twist_mismatch,
        profile,
    })
}

impl Prop0Config {
    pub fn run(&self, x0: Option<Complex>, tol: &ToleranceSpec) -> Result<Prop0Report, HalphenError> {
        verify_prop0(&self.s0, &self.halphen, &self.lax, &self.grid, x0, tol)
    }
}
