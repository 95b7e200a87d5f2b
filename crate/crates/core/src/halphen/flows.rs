use crate::numcore::Complex;
use crate::pathint::{integrate_flow, ToleranceSpec};

use super::HalphenError;

/// Minimum pairwise distance between the x_i.
pub const HII_SEPARATION_GUARD: f64 = 1e-8;
/// Tolerance on the constraints a+b = c+b = −1/4.
pub const PARAM_TOL: f64 = 1e-12;

fn finite(z: &Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DHVState {
    pub w1: Complex,
    pub w2: Complex,
    pub w3: Complex,
    pub phi: Complex,
    pub theta: Complex,
}

impl DHVState {
    pub fn new(w1: Complex, w2: Complex, w3: Complex, phi: Complex, theta: Complex) -> Result<Self, HalphenError> {
        let s = Self { w1, w2, w3, phi, theta };
        if s.to_array().iter().all(finite) {
            Ok(s)
        } else {
            Err(HalphenError::NonFinite)
        }
    }

    pub fn to_array(&self) -> [Complex; 5] {
        [self.w1, self.w2, self.w3, self.phi, self.theta]
    }

    pub fn from_slice(v: &[Complex]) -> Result<Self, HalphenError> {
        match v {
            [a, b, c, d, e] => Self::new(*a, *b, *c, *d, *e),
            _ => Err(HalphenError::InvalidParams(format!("DH-V state needs 5 components, got {}", v.len()))),
        }
    }
}

/// Right-hand side of the Darboux–Halphen V system.
pub fn dhv_rhs(s: &DHVState) -> DHVState {
    let DHVState { w1, w2, w3, phi, theta } = *s;
    DHVState {
        w1: w2 * w3 - w1 * (w2 + w3) + phi * phi,
        w2: w3 * w1 - w2 * (w3 + w1) + theta * theta,
        w3: w1 * w2 - w3 * (w1 + w2) - theta * phi,
        phi: w1 * (theta - phi) - w3 * (theta + phi),
        theta: -w2 * (theta - phi) - w3 * (theta + phi),
    }
}

pub fn integrate_dhv(s0: &DHVState, t0: f64, t1: f64, tol: &ToleranceSpec) -> Result<DHVState, HalphenError> {
    let r = integrate_flow(
        |_t, y: &[Complex]| DHVState::from_slice(y).map(|s| dhv_rhs(&s).to_array().to_vec()),
        t0,
        t1,
        &s0.to_array(),
        tol,
    )?;
    DHVState::from_slice(&r.value)
}

/// Constants of the quadratic Q with a + b = c + b = −1/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalphenParams {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
}

impl HalphenParams {
    pub fn new(a: Complex, b: Complex, c: Complex) -> Result<Self, HalphenError> {
        let p = Self { a, b, c };
        p.validate()?;
        Ok(p)
    }

    /// a = c = −1/4 − b.
    pub fn from_b(b: Complex) -> Result<Self, HalphenError> {
        let a = Complex::new(-0.25, 0.0) - b;
        Self::new(a, b, a)
    }

    pub fn validate(&self) -> Result<(), HalphenError> {
        if ![self.a, self.b, self.c].iter().all(finite) {
            return Err(HalphenError::NonFinite);
        }
        let q = Complex::new(-0.25, 0.0);
        let e1 = (self.a + self.b - q).norm();
        let e2 = (self.c + self.b - q).norm();
        if e1 > PARAM_TOL || e2 > PARAM_TOL {
            return Err(HalphenError::InvalidParams(format!(
                "need a+b = c+b = -1/4, got a+b = {}, c+b = {}",
                self.a + self.b,
                self.c + self.b
            )));
        }
        Ok(())
    }
}

/// Pole positions (x_1, x_2, x_3) of the Halphen II system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HIIState {
    x: [Complex; 3],
}

impl HIIState {
    pub fn new(x: [Complex; 3]) -> Result<Self, HalphenError> {
        if !x.iter().all(finite) {
            return Err(HalphenError::NonFinite);
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let separation = (x[i] - x[j]).norm();
            if separation <= HII_SEPARATION_GUARD {
                return Err(HalphenError::Collision { i: i + 1, j: j + 1, separation });
            }
        }
        Ok(Self { x })
    }

    pub fn from_real(x: [f64; 3]) -> Result<Self, HalphenError> {
        Self::new(x.map(|v| Complex::new(v, 0.0)))
    }

    pub fn x(&self) -> [Complex; 3] {
        self.x
    }

    pub fn sigma(&self) -> Complex {
        self.x.iter().sum()
    }

    /// Π_{j≠i}(x_i − x_j).
    pub fn cross_product(&self, i: usize) -> Complex {
        (0..3).filter(|&j| j != i).map(|j| self.x[i] - self.x[j]).product()
    }
}

/// Q(x) = x² + a(x_1−x_2)² + b(x_2−x_3)² + c(x_3−x_1)².
pub fn halphen_q(x: Complex, s: &HIIState, p: &HalphenParams) -> Complex {
    let [x1, x2, x3] = s.x;
    x * x + p.a * (x1 - x2).powu(2) + p.b * (x2 - x3).powu(2) + p.c * (x3 - x1).powu(2)
}

/// x_i' = Q(x_i).
pub fn hii_rhs(s: &HIIState, p: &HalphenParams) -> [Complex; 3] {
    s.x.map(|xi| halphen_q(xi, s, p))
}

/// α_i = (x_i + σ)/Π_{j≠i}(x_i − x_j), the residues of (x + σ)/P(x).
pub fn alpha_residues(s: &HIIState) -> [Complex; 3] {
    let sigma = s.sigma();
    [0, 1, 2].map(|i| (s.x[i] + sigma) / s.cross_product(i))
}

/// b_i = μ/Π_{j≠i}(x_i − x_j), the residues of μ/P(x).
pub fn b_scalars(s: &HIIState, mu: Complex) -> [Complex; 3] {
    [0, 1, 2].map(|i| mu / s.cross_product(i))
}

/// H-II states at each grid time, integrated sequentially from `s0` at `grid[0]`.
pub fn hii_trajectory(
    s0: &HIIState,
    p: &HalphenParams,
    grid: &[f64],
    tol: &ToleranceSpec,
) -> Result<Vec<HIIState>, HalphenError> {
    p.validate()?;
    let mut out = Vec::with_capacity(grid.len());
    let mut cur = *s0;
    for (k, &t) in grid.iter().enumerate() {
        if k > 0 {
            let r = integrate_flow(
                |_t, y: &[Complex]| HIIState::new([y[0], y[1], y[2]]).map(|s| hii_rhs(&s, p).to_vec()),
                grid[k - 1],
                t,
                &cur.x,
                tol,
            )?;
            cur = HIIState::new([r.value[0], r.value[1], r.value[2]])?;
        }
        out.push(cur);
    }
    Ok(out)
}
