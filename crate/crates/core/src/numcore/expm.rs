//! Matrix exponential (scaling and squaring with a degree-13 Padé
//! approximant) and principal matrix logarithm (inverse scaling and
//! squaring with Denman–Beavers square roots and an atanh series).

use std::f64::consts::PI;

use super::eigen::eigenvalues;
use super::matrix::{Complex, ComplexMatrix};
use super::NumError;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound under which the degree-13 approximant is accurate to unit roundoff.
const THETA13: f64 = 5.371920351148152;

/// Squarings beyond this are treated as overflow of the input norm.
const MAX_SQUARINGS: u32 = 1100;

pub fn mat_exp(m: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    m.ensure_finite()?;
    let n = m.dim();
    if n == 1 {
        let v = m[(0, 0)].exp();
        return ComplexMatrix::from_flat(1, &[v]).map_err(|_| NumError::Overflow);
    }
    let norm = m.norm_one();
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as u32 } else { 0 };
    if squarings > MAX_SQUARINGS {
        return Err(NumError::Overflow);
    }
    let a = m.scale_real(0.5f64.powi(squarings as i32));
    let eye = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = |k: usize| PADE13[k];

    let w1 = &(&a6.scale_real(b(13)) + &a4.scale_real(b(11))) + &a2.scale_real(b(9));
    let w2 = &(&(&(&(&a6 * &w1) + &a6.scale_real(b(7))) + &a4.scale_real(b(5))) + &a2.scale_real(b(3)))
        + &eye.scale_real(b(1));
    let u = &a * &w2;
    let z1 = &(&a6.scale_real(b(12)) + &a4.scale_real(b(10))) + &a2.scale_real(b(8));
    let v = &(&(&(&(&a6 * &z1) + &a6.scale_real(b(6))) + &a4.scale_real(b(4))) + &a2.scale_real(b(2)))
        + &eye.scale_real(b(0));

    let mut r = (&v - &u).solve(&(&v + &u)).map_err(|_| NumError::Overflow)?;
    for _ in 0..squarings {
        r = &r * &r;
        if !r.is_finite() {
            return Err(NumError::Overflow);
        }
    }
    if !r.is_finite() {
        return Err(NumError::Overflow);
    }
    Ok(r)
}

/// Principal square root by the Denman–Beavers iteration.
fn sqrtm_db(m: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    let mut y = m.clone();
    let mut z = ComplexMatrix::identity(m.dim());
    let mut prev_change = f64::INFINITY;
    for _ in 0..100 {
        let yi = y.inverse()?;
        let zi = z.inverse()?;
        let y_next = (&y + &zi).scale_real(0.5);
        let z_next = (&z + &yi).scale_real(0.5);
        let change = (&y_next - &y).norm_one();
        y = y_next;
        z = z_next;
        let scale = y.norm_one();
        // stop at convergence, or once rounding noise stops the decrease
        if change <= 1e-15 * scale || (change <= 1e-12 * scale && change >= prev_change) {
            return Ok(y);
        }
        prev_change = change;
    }
    Err(NumError::NoConvergence { iterations: 100 })
}

/// Principal logarithm; rejects eigenvalues on the closed negative real axis or at 0.
pub fn mat_log_principal(m: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    m.ensure_finite()?;
    let n = m.dim();
    let norm = m.norm_inf();
    let spec = eigenvalues(m)?;
    for &lam in spec.values() {
        if lam.norm() <= 1e-14 * norm.max(f64::MIN_POSITIVE) || lam.norm() == 0.0 {
            return Err(NumError::Singular { det_abs: m.det().norm() });
        }
        if lam.arg().abs() >= PI - 1e-10 {
            return Err(NumError::BranchCut { eigenvalue: lam });
        }
    }
    if n == 1 {
        return ComplexMatrix::from_flat(1, &[m[(0, 0)].ln()]);
    }
    let eye = ComplexMatrix::identity(n);
    let mut x = m.clone();
    let mut roots = 0u32;
    while (&x - &eye).norm_one() > 0.25 {
        if roots >= 60 {
            return Err(NumError::NoConvergence { iterations: roots as usize });
        }
        x = sqrtm_db(&x)?;
        roots += 1;
    }
    // log X = 2·atanh(Z), Z = (X − I)(X + I)⁻¹
    let z = &(&x - &eye) * &(&x + &eye).inverse()?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..60 {
        term = &term * &z2;
        let contrib = term.scale_real(1.0 / (2 * k + 1) as f64);
        sum = &sum + &contrib;
        if contrib.norm_one() <= 1e-18 * sum.norm_one().max(1e-300) {
            break;
        }
    }
    Ok(sum.scale_real(2.0 * 2f64.powi(roots as i32)))
}

/// exp(2πi·L) helper used for monodromy exponents.
pub fn exp_two_pi_i(l: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    mat_exp(&l.scale(Complex::new(0.0, 2.0 * PI)))
}
