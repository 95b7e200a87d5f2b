//! Fuchsian systems dY/dx = Σ A_i/(x − x_i)·Y and their monodromy by
//! analytic continuation along elementary loops.
//!
//! Conventions: loops run counterclockwise; the monodromy M of a loop γ is
//! defined by Y^γ = Y·M, so with Y(x0) = I the continued value at x0 is M.
//! Generators are listed in pole order; no product relation between them is
//! implied.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::numcore::{eigenvalues, exp_two_pi_i, mat_log_principal, Complex, ComplexMatrix, NumError};
use crate::pathint::{integrate_linear, IntegrationError, Path, PathError, PathSegment, ToleranceSpec};

/// Minimum separation between distinct poles.
pub const MIN_POLE_SEPARATION: f64 = 1e-10;
/// Coefficient evaluation refuses points this close to a pole.
pub const EVAL_CLEARANCE: f64 = 1e-12;
/// ‖ΣA_i‖_∞ at or below this counts as regular at infinity.
pub const INFINITY_REGULARITY_TOL: f64 = 1e-12;
/// Loop radii never go below this.
pub const MIN_LOOP_RADIUS: f64 = 1e-6;
/// Guard distance around non-target poles, as a fraction of the loop radius.
pub const GUARD_FRACTION: f64 = 0.1;
/// Rotation applied to the default base point while searching for clear rays.
pub const BASE_POINT_ROTATION_DEG: f64 = 17.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuchsianError {
    #[error("system needs at least one pole")]
    NoPoles,
    #[error("{poles} poles but {residues} residue matrices")]
    ResidueCountMismatch { poles: usize, residues: usize },
    #[error("residue {index} has dimension {found}, expected {expected}")]
    ResidueDimension { index: usize, expected: usize, found: usize },
    #[error("pole {index} is not finite")]
    NonFinitePole { index: usize },
    #[error("poles {i} and {j} are only {separation:e} apart")]
    PolesTooClose { i: usize, j: usize, separation: f64 },
    #[error("evaluation point {x} is within {EVAL_CLEARANCE:e} of pole {pole}")]
    NearPole { x: Complex, pole: usize },
    #[error("pole index {0} out of range")]
    PoleIndex(usize),
    #[error("base point {0} coincides with or lies inside the loop about pole {1}")]
    BasePointInsideLoop(Complex, usize),
    #[error("loop about pole {target} passes within {distance:e} of pole {other} (guard {guard:e})")]
    ClearanceViolation { target: usize, other: usize, distance: f64, guard: f64 },
    #[error("no base point with clear loops to every pole was found")]
    NoLoopGeometry,
    #[error("loop is not closed")]
    OpenLoop,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// Poles x_1..x_m with residue matrices A_1..A_m.
#[derive(Debug, Clone, PartialEq)]
pub struct FuchsianSystem {
    dim: usize,
    poles: Vec<Complex>,
    residues: Vec<ComplexMatrix>,
}

impl FuchsianSystem {
    pub fn new(poles: Vec<Complex>, residues: Vec<ComplexMatrix>) -> Result<Self, FuchsianError> {
        if poles.is_empty() {
            return Err(FuchsianError::NoPoles);
        }
        if poles.len() != residues.len() {
            return Err(FuchsianError::ResidueCountMismatch { poles: poles.len(), residues: residues.len() });
        }
        let dim = residues[0].dim();
        for (index, r) in residues.iter().enumerate() {
            if r.dim() != dim {
                return Err(FuchsianError::ResidueDimension { index, expected: dim, found: r.dim() });
            }
            r.ensure_finite()?;
        }
        for (index, p) in poles.iter().enumerate() {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(FuchsianError::NonFinitePole { index });
            }
        }
        for i in 0..poles.len() {
            for j in (i + 1)..poles.len() {
                let separation = (poles[i] - poles[j]).norm();
                if separation <= MIN_POLE_SEPARATION {
                    return Err(FuchsianError::PolesTooClose { i, j, separation });
                }
            }
        }
        Ok(Self { dim, poles, residues })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn poles(&self) -> &[Complex] {
        &self.poles
    }

    pub fn residues(&self) -> &[ComplexMatrix] {
        &self.residues
    }

    pub fn pole_count(&self) -> usize {
        self.poles.len()
    }

    pub fn residue_sum(&self) -> ComplexMatrix {
        self.residues.iter().fold(ComplexMatrix::zeros(self.dim), |acc, r| &acc + r)
    }

    /// True iff ΣA_i vanishes, i.e. ∞ is not a singular point.
    pub fn at_infinity_regular(&self) -> bool {
        self.residue_sum().norm_inf() <= INFINITY_REGULARITY_TOL
    }

    /// Σ A_i/(x − x_i).
    pub fn eval_coefficient(&self, x: Complex) -> Result<ComplexMatrix, FuchsianError> {
        let mut out = ComplexMatrix::zeros(self.dim);
        for (pole, (p, a)) in self.poles.iter().zip(&self.residues).enumerate() {
            let d = x - p;
            if d.norm() <= EVAL_CLEARANCE {
                return Err(FuchsianError::NearPole { x, pole });
            }
            out = &out + &a.scale(Complex::new(1.0, 0.0) / d);
        }
        Ok(out)
    }

    /// Default loop radius about pole `index`: half the distance to the nearest
    /// other pole or the base point, floored at [`MIN_LOOP_RADIUS`].
    pub fn default_radius(&self, index: usize, base_point: Complex) -> f64 {
        let p = self.poles[index];
        let nearest = self
            .poles
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != index)
            .map(|(_, q)| (q - p).norm())
            .chain(std::iter::once((base_point - p).norm()))
            .fold(f64::INFINITY, f64::min);
        (0.5 * nearest).max(MIN_LOOP_RADIUS)
    }

    pub fn loop_spec(&self, index: usize, base_point: Complex) -> LoopSpec {
        LoopSpec { base_point, pole: index, radius: self.default_radius(index, base_point) }
    }
}

/// Elementary loop about one pole from a base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec {
    pub base_point: Complex,
    pub pole: usize,
    pub radius: f64,
}

/// Line to the nearest circle point, one counterclockwise turn, line back.
pub fn make_loop(sys: &FuchsianSystem, spec: &LoopSpec) -> Result<Path, FuchsianError> {
    let p = *sys.poles().get(spec.pole).ok_or(FuchsianError::PoleIndex(spec.pole))?;
    let r = spec.radius;
    if !(r > 0.0 && r.is_finite()) {
        return Err(PathError::BadRadius(r).into());
    }
    let offset = spec.base_point - p;
    if offset.norm() <= r * (1.0 + GUARD_FRACTION) {
        return Err(FuchsianError::BasePointInsideLoop(spec.base_point, spec.pole));
    }
    let phi = offset.arg();
    let on_circle = p + Complex::from_polar(r, phi);
    let inbound = PathSegment::line(spec.base_point, on_circle)?;
    let circle = PathSegment::circle(p, r, phi)?;
    let outbound = inbound.reversed();
    let guard = GUARD_FRACTION * r;
    for (other, q) in sys.poles().iter().enumerate() {
        if other == spec.pole {
            continue;
        }
        let d_circle = ((q - p).norm() - r).abs();
        let inside = (q - p).norm() < r;
        let d_line = inbound.distance_to(*q);
        let distance = d_circle.min(d_line);
        if inside || distance < guard {
            return Err(FuchsianError::ClearanceViolation { target: spec.pole, other, distance, guard });
        }
    }
    Ok(Path::new(vec![inbound, circle, outbound])?)
}

/// Circle about the centroid of the poles enclosing all of them.
pub fn enclosing_loop(sys: &FuchsianSystem) -> Result<Path, FuchsianError> {
    let centroid = sys.poles().iter().sum::<Complex>() / sys.pole_count() as f64;
    let spread = sys.poles().iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    let radius = (2.0 * spread).max(1.0);
    Ok(Path::new(vec![PathSegment::circle(centroid, radius, 0.0)?])?)
}

/// Chosen base point and how many 17° rotations it took to reach it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePoint {
    pub point: Complex,
    pub rotations: usize,
}

fn rays_are_clear(sys: &FuchsianSystem, x0: Complex, strict: bool) -> bool {
    (0..sys.pole_count()).all(|i| {
        let spec = sys.loop_spec(i, x0);
        let Ok(path) = make_loop(sys, &spec) else { return false };
        if !strict {
            return true;
        }
        // keep each connecting line outside every other pole's own loop
        let inbound = path.segments()[0];
        (0..sys.pole_count())
            .filter(|&j| j != i)
            .all(|j| inbound.distance_to(sys.poles()[j]) >= sys.default_radius(j, x0))
    })
}

/// Base point on the ray |x0| = 2(1 + max |x_i|), starting on the positive
/// real axis and rotating in 17° steps until every loop (for every system
/// given) has clear connecting lines.
pub fn default_base_point(systems: &[&FuchsianSystem]) -> Result<BasePoint, FuchsianError> {
    let max_abs = systems
        .iter()
        .flat_map(|s| s.poles().iter())
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    let modulus = 2.0 * (1.0 + max_abs);
    let turns = (360.0 / BASE_POINT_ROTATION_DEG).ceil() as usize;
    for strict in [true, false] {
        for k in 0..turns {
            let angle = (k as f64 * BASE_POINT_ROTATION_DEG).to_radians();
            let x0 = Complex::from_polar(modulus, angle);
            if systems.iter().all(|s| rays_are_clear(s, x0, strict)) {
                return Ok(BasePoint { point: x0, rotations: k });
            }
        }
    }
    Err(FuchsianError::NoLoopGeometry)
}

/// Monodromy about one loop, with L = (1/2πi)·log M when the principal log exists.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyMatrix {
    pub matrix: ComplexMatrix,
    pub exponent: Option<ComplexMatrix>,
    pub pole: Option<usize>,
    pub base_point: Complex,
    pub steps: usize,
    pub error_estimate: f64,
}

impl MonodromyMatrix {
    /// Distance ‖exp(2πi·L) − M‖_∞ when the exponent is present.
    pub fn exponent_residual(&self) -> Option<f64> {
        let l = self.exponent.as_ref()?;
        let back = exp_two_pi_i(l).ok()?;
        Some((&back - &self.matrix).norm_inf())
    }
}

/// Monodromy along a closed `path` starting at the frame Y(x0) = `frame`;
/// returns frame⁻¹·Y_end so that Y^γ = Y·M.
pub fn monodromy_in_frame(
    sys: &FuchsianSystem,
    path: &Path,
    frame: &ComplexMatrix,
    tol: &ToleranceSpec,
) -> Result<MonodromyMatrix, FuchsianError> {
    if !path.is_closed() {
        return Err(FuchsianError::OpenLoop);
    }
    let r = integrate_linear(|x| sys.eval_coefficient(x), path, frame, tol)?;
    let matrix = frame.solve(&r.value)?;
    let exponent = mat_log_principal(&matrix)
        .ok()
        .map(|l| l.scale(Complex::new(0.0, -1.0 / (2.0 * PI))));
    Ok(MonodromyMatrix {
        matrix,
        exponent,
        pole: None,
        base_point: path.start(),
        steps: r.steps_accepted + r.steps_rejected,
        error_estimate: r.error_estimate,
    })
}

pub fn monodromy(sys: &FuchsianSystem, path: &Path, tol: &ToleranceSpec) -> Result<MonodromyMatrix, FuchsianError> {
    monodromy_in_frame(sys, path, &ComplexMatrix::identity(sys.dim()), tol)
}

/// Monodromy about the pole named in `spec`.
pub fn monodromy_about(sys: &FuchsianSystem, spec: &LoopSpec, tol: &ToleranceSpec) -> Result<MonodromyMatrix, FuchsianError> {
    let path = make_loop(sys, spec)?;
    let mut m = monodromy(sys, &path, tol)?;
    m.pole = Some(spec.pole);
    Ok(m)
}

/// Monodromy matrices for every pole, all continued from a shared base point.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyTuple {
    pub base_point: Complex,
    pub entries: Vec<MonodromyMatrix>,
}

impl MonodromyTuple {
    pub fn matrices(&self) -> Vec<&ComplexMatrix> {
        self.entries.iter().map(|e| &e.matrix).collect()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].matrix.dim()
    }

    pub fn total_error_estimate(&self) -> f64 {
        self.entries.iter().map(|e| e.error_estimate).sum()
    }
}

pub fn monodromy_tuple_in_frame(
    sys: &FuchsianSystem,
    x0: Complex,
    frame: &ComplexMatrix,
    tol: &ToleranceSpec,
) -> Result<MonodromyTuple, FuchsianError> {
    let entries = (0..sys.pole_count())
        .into_par_iter()
        .map(|i| {
            let spec = sys.loop_spec(i, x0);
            let path = make_loop(sys, &spec)?;
            let mut m = monodromy_in_frame(sys, &path, frame, tol)?;
            m.pole = Some(i);
            Ok(m)
        })
        .collect::<Result<Vec<_>, FuchsianError>>()?;
    Ok(MonodromyTuple { base_point: x0, entries })
}

/// Tuple at `x0`, or at the default base point when `x0` is `None`.
pub fn monodromy_tuple(
    sys: &FuchsianSystem,
    x0: Option<Complex>,
    tol: &ToleranceSpec,
) -> Result<MonodromyTuple, FuchsianError> {
    let x0 = match x0 {
        Some(p) => p,
        None => default_base_point(&[sys])?.point,
    };
    monodromy_tuple_in_frame(sys, x0, &ComplexMatrix::identity(sys.dim()), tol)
}

/// Outcome of comparing local exponents with residue eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentCheck {
    Deviation(f64),
    NotApplicable(String),
}

/// Two eigenvalues closer than this to a nonzero integer apart count as resonant.
const RESONANCE_TOL: f64 = 1e-8;

fn integer_distance(z: Complex) -> f64 {
    (z - Complex::new(z.re.round(), 0.0)).norm()
}

/// Max over residue eigenvalues a of min over exponent eigenvalues l of the
/// distance from l − a to the nearest integer.
pub fn local_exponent_check(
    sys: &FuchsianSystem,
    tuple: &MonodromyTuple,
    index: usize,
) -> Result<ExponentCheck, FuchsianError> {
    let residue = sys.residues().get(index).ok_or(FuchsianError::PoleIndex(index))?;
    let entry = tuple.entries.get(index).ok_or(FuchsianError::PoleIndex(index))?;
    let res_spec = eigenvalues(residue)?;
    let vals = res_spec.values();
    for a in 0..vals.len() {
        for b in 0..vals.len() {
            let d = vals[a] - vals[b];
            if a != b && d.re.round() != 0.0 && integer_distance(d) < RESONANCE_TOL {
                return Ok(ExponentCheck::NotApplicable(format!(
                    "resonant residue: eigenvalues {} and {} differ by an integer",
                    vals[a], vals[b]
                )));
            }
        }
    }
    let Some(l) = entry.exponent.as_ref() else {
        return Ok(ExponentCheck::NotApplicable("monodromy eigenvalue on the log branch cut".into()));
    };
    let exp_spec = eigenvalues(l)?;
    let dev = vals
        .iter()
        .map(|a| exp_spec.values().iter().map(|l| integer_distance(l - a)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(ExponentCheck::Deviation(dev))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn diag(a: f64, b: f64) -> ComplexMatrix {
        ComplexMatrix::diag(&[c(a, 0.0), c(b, 0.0)]).unwrap()
    }

    #[test]
    fn eval_single_pole() {
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0)], vec![diag(1.0, -1.0)]).unwrap();
        let v = sys.eval_coefficient(c(2.0, 0.0)).unwrap();
        assert!((&v - &diag(0.5, -0.5)).max_abs() < 1e-16);
        assert!(matches!(sys.eval_coefficient(c(1e-13, 0.0)), Err(FuchsianError::NearPole { pole: 0, .. })));
    }

    #[test]
    fn eval_opposite_residues() {
        let a1 = ComplexMatrix::from_real_rows(&[&[0.3, 1.0], &[-0.2, 0.5]]).unwrap();
        let sys = FuchsianSystem::new(vec![c(-1.0, 0.0), c(1.0, 0.0)], vec![a1.clone(), -&a1]).unwrap();
        assert!(sys.at_infinity_regular());
        let v = sys.eval_coefficient(c(0.0, 0.0)).unwrap();
        assert!((&v - &a1.scale_real(2.0)).max_abs() < 1e-15);
        // Laurent decay O(1/x²) when ΣA_i = 0
        let far = sys.eval_coefficient(c(1e6, 0.0)).unwrap();
        assert!(far.max_abs() < 10.0 / 1e12);
    }

    #[test]
    fn construction_errors() {
        let a = diag(1.0, 0.0);
        assert_eq!(FuchsianSystem::new(vec![], vec![]).unwrap_err(), FuchsianError::NoPoles);
        assert!(matches!(
            FuchsianSystem::new(vec![c(0.0, 0.0), c(0.0, 0.0)], vec![a.clone(), a.clone()]),
            Err(FuchsianError::PolesTooClose { .. })
        ));
        assert!(matches!(
            FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![a.clone()]),
            Err(FuchsianError::ResidueCountMismatch { .. })
        ));
        assert!(matches!(
            FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![a, ComplexMatrix::identity(3)]),
            Err(FuchsianError::ResidueDimension { index: 1, .. })
        ));
    }

    #[test]
    fn loop_geometry() {
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0)], vec![diag(0.0, 0.0)]).unwrap();
        let path = make_loop(&sys, &LoopSpec { base_point: c(10.0, 0.0), pole: 0, radius: 1.0 }).unwrap();
        assert!((path.start() - c(10.0, 0.0)).norm() < 1e-15);
        assert!(path.is_closed());
        assert_eq!(path.winding_number(c(0.0, 0.0)), 1);
        assert_eq!(path.winding_number(c(5.0, 0.0)), 0);
    }

    #[test]
    fn loop_clearance_is_enforced() {
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0), c(2.0, 0.0)], vec![diag(0.1, 0.0), diag(-0.1, 0.0)]).unwrap();
        // the connecting line from 4 to pole 0 runs straight through pole 1
        let err = make_loop(&sys, &LoopSpec { base_point: c(4.0, 0.0), pole: 0, radius: 0.5 }).unwrap_err();
        assert!(matches!(err, FuchsianError::ClearanceViolation { target: 0, other: 1, .. }));
        let err = make_loop(&sys, &LoopSpec { base_point: c(0.0, 4.0), pole: 0, radius: 2.5 }).unwrap_err();
        assert!(matches!(err, FuchsianError::ClearanceViolation { .. }));
        let bp = default_base_point(&[&sys]).unwrap();
        assert!(bp.rotations > 0);
        assert!((bp.point.norm() - 2.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_monodromy() {
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0)], vec![n]).unwrap();
        let path = Path::new(vec![PathSegment::circle(c(0.0, 0.0), 1.0, 0.0).unwrap()]).unwrap();
        let m = monodromy(&sys, &path, &ToleranceSpec::default()).unwrap();
        let expect = ComplexMatrix::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 2.0 * PI)], vec![c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        assert!((&m.matrix - &expect).max_abs() < 1e-8);
        assert!(m.exponent_residual().unwrap() < 1e-8);
    }

    #[test]
    fn loop_without_pole_is_trivial() {
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0)], vec![diag(0.3, -0.3)]).unwrap();
        let path = Path::new(vec![PathSegment::circle(c(5.0, 0.0), 1.0, 0.0).unwrap()]).unwrap();
        let m = monodromy(&sys, &path, &ToleranceSpec::default()).unwrap();
        assert!((&m.matrix - &ComplexMatrix::identity(2)).max_abs() < 1e-10);
    }

    #[test]
    fn zero_residue_tuple_is_identity() {
        let sys = FuchsianSystem::new(vec![c(0.5, 0.0)], vec![ComplexMatrix::zeros(2)]).unwrap();
        let t = monodromy_tuple(&sys, None, &ToleranceSpec::default()).unwrap();
        assert_eq!(t.entries.len(), 1);
        assert!((&t.entries[0].matrix - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
        assert_eq!(local_exponent_check(&sys, &t, 0).unwrap(), ExponentCheck::Deviation(0.0));
    }

    #[test]
    fn resonant_residue_is_not_applicable() {
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0)], vec![diag(0.5, -0.5)]).unwrap();
        let t = monodromy_tuple(&sys, None, &ToleranceSpec::default()).unwrap();
        assert!(matches!(local_exponent_check(&sys, &t, 0).unwrap(), ExponentCheck::NotApplicable(_)));
    }
}
