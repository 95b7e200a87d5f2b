use crate::fuchsian::FuchsianSystem;
use crate::numcore::{Complex, ComplexMatrix};

use super::flows::{b_scalars, HIIState, PARAM_TOL};
use super::HalphenError;

/// Constant data of the Lax x-equation: traceless S with zero diagonal, Σλ_i = 0, μ ≠ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxParams {
    pub s: ComplexMatrix,
    pub lambda: [Complex; 3],
    pub mu: Complex,
}

impl LaxParams {
    pub fn new(s: ComplexMatrix, lambda: [Complex; 3], mu: Complex) -> Result<Self, HalphenError> {
        let p = Self { s, lambda, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), HalphenError> {
        if self.s.dim() != 2 {
            return Err(HalphenError::InvalidParams(format!("S must be 2x2, got {0}x{0}", self.s.dim())));
        }
        if !self.s.is_finite() || !self.mu.is_finite() || !self.lambda.iter().all(|l| l.is_finite()) {
            return Err(HalphenError::NonFinite);
        }
        if self.s[(0, 0)] != Complex::new(0.0, 0.0) || self.s[(1, 1)] != Complex::new(0.0, 0.0) {
            return Err(HalphenError::InvalidParams("S must have zero diagonal".into()));
        }
        let sum: Complex = self.lambda.iter().sum();
        if sum.norm() > PARAM_TOL {
            return Err(HalphenError::InvalidParams(format!("lambda must sum to 0, got {sum}")));
        }
        if self.mu == Complex::new(0.0, 0.0) {
            return Err(HalphenError::InvalidParams("mu must be nonzero".into()));
        }
        Ok(())
    }
}

impl Default for LaxParams {
    fn default() -> Self {
        let r = |v: f64| Complex::new(v, 0.0);
        Self {
            s: ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2"),
            lambda: [r(0.25), r(0.25), r(-0.5)],
            mu: r(0.25),
        }
    }
}

/// (μ/P(x))·I + Σ λ_i·S/(x − x_i) with P(x) = Π(x − x_i).
pub fn lax_coefficient(x: Complex, s: &HIIState, p: &LaxParams) -> Result<ComplexMatrix, HalphenError> {
    let xs = s.x();
    let mut p_val = Complex::new(1.0, 0.0);
    let mut weight = Complex::new(0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let d = x - xi;
        if d == Complex::new(0.0, 0.0) {
            return Err(HalphenError::AtPole { x, pole: i + 1 });
        }
        p_val *= d;
        weight += p.lambda[i] / d;
    }
    Ok(&ComplexMatrix::scalar(2, p.mu / p_val) + &p.s.scale(weight))
}

/// The Lax x-equation as a Fuchsian system: poles x_i, residues λ_i·S + b_i·I.
pub fn lax_system(s: &HIIState, p: &LaxParams) -> Result<FuchsianSystem, HalphenError> {
    let b = b_scalars(s, p.mu);
    let residues = (0..3).map(|i| &p.s.scale(p.lambda[i]) + &ComplexMatrix::scalar(2, b[i])).collect();
    Ok(FuchsianSystem::new(s.x().to_vec(), residues)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn hand_value() {
        let p = LaxParams::new(LaxParams::default().s, [c(1.0), c(1.0), c(-2.0)], c(1.0)).unwrap();
        let s = HIIState::from_real([-1.0, 0.0, 1.0]).unwrap();
        let a = lax_coefficient(c(2.0), &s, &p).unwrap();
        let expect = &ComplexMatrix::scalar(2, c(1.0 / 6.0)) - &p.s.scale_real(7.0 / 6.0);
        assert!((&a - &expect).max_abs() < 1e-15);
        assert!(matches!(lax_coefficient(c(0.0), &s, &p), Err(HalphenError::AtPole { pole: 2, .. })));
    }

    #[test]
    fn mu_part_only_is_scalar() {
        let p = LaxParams::new(LaxParams::default().s, [c(0.0); 3], c(0.7)).unwrap();
        let s = HIIState::from_real([-1.0, 0.3, 1.0]).unwrap();
        for x in [c(2.0), Complex::new(0.1, 0.5)] {
            assert!(lax_coefficient(x, &s, &p).unwrap().is_scalar(1e-15).is_scalar);
        }
    }

    #[test]
    fn residues_match_coefficient() {
        let p = LaxParams::default();
        let s = HIIState::new([c(-1.0), Complex::new(0.1, 0.2), c(1.3)]).unwrap();
        let sys = lax_system(&s, &p).unwrap();
        for i in 0..3 {
            let eps = 1e-7;
            let x = s.x()[i] + c(eps);
            let near = lax_coefficient(x, &s, &p).unwrap().scale(c(eps));
            assert!((&near - &sys.residues()[i]).max_abs() < 1e-5);
        }
        for x in [c(3.0), Complex::new(-0.4, 1.1)] {
            let a = lax_coefficient(x, &s, &p).unwrap();
            assert!((&a - &sys.eval_coefficient(x).unwrap()).max_abs() < 1e-13);
        }
    }

    #[test]
    fn parameter_validation() {
        let d = LaxParams::default();
        assert!(LaxParams::new(ComplexMatrix::identity(2), d.lambda, d.mu).is_err());
        assert!(LaxParams::new(d.s.clone(), [c(1.0), c(0.0), c(0.0)], d.mu).is_err());
        assert!(LaxParams::new(d.s, d.lambda, c(0.0)).is_err());
    }
}
