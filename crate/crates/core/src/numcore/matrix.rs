use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use super::NumError;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Largest matrix dimension accepted by the dense kernels.
pub const MAX_DIM: usize = 16;

/// Below this |det| a matrix is treated as singular.
pub const SINGULARITY_FLOOR: f64 = 1e-300;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Small dense square complex matrix, stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

/// Outcome of a scalar-matrix test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarCheck {
    pub is_scalar: bool,
    /// trace / n
    pub value: Complex,
    /// ‖m − value·I‖_∞ / ‖m‖_∞ (0 for the zero matrix)
    pub residual: f64,
}

fn check_dim(n: usize) -> Result<(), NumError> {
    if n == 0 || n > MAX_DIM {
        Err(NumError::InvalidDimension(n))
    } else {
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "matrix dimension {n} out of range");
        Self { dim: n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ONE)
    }

    pub fn scalar(n: usize, c: Complex) -> Self {
        let mut m = Self::zeros(n);
        for k in 0..n {
            m[(k, k)] = c;
        }
        m
    }

    pub fn diag(values: &[Complex]) -> Result<Self, NumError> {
        check_dim(values.len())?;
        Self::check_finite_slice(values)?;
        let mut m = Self::zeros(values.len());
        for (k, v) in values.iter().enumerate() {
            m[(k, k)] = *v;
        }
        Ok(m)
    }

    /// Builds a matrix from rows; every row must have length equal to the row count.
    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self, NumError> {
        let n = rows.len();
        check_dim(n)?;
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(NumError::NotSquare { rows: n, cols: row.len() });
            }
            data.extend(row);
        }
        Self::check_finite_slice(&data)?;
        Ok(Self { dim: n, data })
    }

    /// Convenience constructor from real and imaginary parts given as `[re, im]` rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, NumError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut m = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Rebuilds a matrix from a flat row-major slice of length n².
    pub fn from_flat(n: usize, flat: &[Complex]) -> Result<Self, NumError> {
        check_dim(n)?;
        if flat.len() != n * n {
            return Err(NumError::NotSquare { rows: n, cols: flat.len() / n.max(1) });
        }
        Self::check_finite_slice(flat)?;
        Ok(Self { dim: n, data: flat.to_vec() })
    }

    fn check_finite_slice(values: &[Complex]) -> Result<(), NumError> {
        if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(NumError::NonFinite)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        Self::check_finite_slice(&self.data).is_ok()
    }

    pub fn ensure_finite(&self) -> Result<(), NumError> {
        Self::check_finite_slice(&self.data)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal entry magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut best = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if r != c {
                    best = best.max(self[(r, c)].norm());
                }
            }
        }
        best
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex::new(c, 0.0))
    }

    /// Matrix product with a dimension check.
    pub fn mat_mul(&self, other: &Self) -> Result<Self, NumError> {
        if self.dim != other.dim {
            return Err(NumError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NumError> {
        if self.dim != other.dim {
            return Err(NumError::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NumError> {
        self.try_add(&-other)
    }

    /// Additive commutator a·b − b·a.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Group commutator a·b·a⁻¹·b⁻¹.
    pub fn group_commutator(&self, other: &Self) -> Result<Self, NumError> {
        let ai = self.inverse()?;
        let bi = other.inverse()?;
        Ok(&(&(self * other) * &ai) * &bi)
    }

    /// PLU factorization; returns (packed LU, permutation, sign).
    fn lu(&self) -> (Vec<Complex>, Vec<usize>, f64) {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap_or(k);
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            if pivot == ZERO {
                continue;
            }
            for r in (k + 1)..n {
                let f = a[r * n + k] / pivot;
                a[r * n + k] = f;
                if f != ZERO {
                    for c in (k + 1)..n {
                        let u = a[k * n + c];
                        a[r * n + c] -= f * u;
                    }
                }
            }
        }
        (a, perm, sign)
    }

    pub fn det(&self) -> Complex {
        let n = self.dim;
        let (lu, _, sign) = self.lu();
        (0..n).fold(Complex::new(sign, 0.0), |acc, k| acc * lu[k * n + k])
    }

    /// Solves self·X = rhs.
    pub fn solve(&self, rhs: &Self) -> Result<Self, NumError> {
        if self.dim != rhs.dim {
            return Err(NumError::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        let n = self.dim;
        let (lu, perm, sign) = self.lu();
        let det = (0..n).fold(Complex::new(sign, 0.0), |acc, k| acc * lu[k * n + k]);
        if det.norm() < SINGULARITY_FLOOR || (0..n).any(|k| lu[k * n + k] == ZERO) {
            return Err(NumError::Singular { det_abs: det.norm() });
        }
        let mut x = vec![ZERO; n * n];
        for col in 0..n {
            // forward substitution on the permuted right-hand side
            let mut y = vec![ZERO; n];
            for r in 0..n {
                let mut s = rhs.data[perm[r] * n + col];
                for k in 0..r {
                    s -= lu[r * n + k] * y[k];
                }
                y[r] = s;
            }
            for r in (0..n).rev() {
                let mut s = y[r];
                for k in (r + 1)..n {
                    s -= lu[r * n + k] * x[k * n + col];
                }
                x[r * n + col] = s / lu[r * n + r];
            }
        }
        Ok(Self { dim: n, data: x })
    }

    pub fn inverse(&self) -> Result<Self, NumError> {
        self.solve(&Self::identity(self.dim))
    }

    /// Scalar-matrix test against c = trace/n with tolerance relative to ‖m‖_∞.
    pub fn is_scalar(&self, tol: f64) -> ScalarCheck {
        let c = self.trace() / self.dim as f64;
        let dev = (self - &Self::scalar(self.dim, c)).norm_inf();
        let norm = self.norm_inf();
        let residual = if norm == 0.0 { 0.0 } else { dev / norm };
        ScalarCheck { is_scalar: dev <= tol * norm, value: c, residual }
    }

    /// Integer power by repeated squaring (negative powers via the inverse).
    pub fn powi(&self, k: i32) -> Result<Self, NumError> {
        let mut base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.dim + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks(self.dim) {
            let cells: Vec<String> = row.iter().map(|z| format!("{z:.6}")).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

// Operator forms panic on dimension mismatch; use the `try_*`/`mat_mul`
// methods where the dimensions are not already known to agree.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.mat_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl Mul<Complex> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix dimensions must agree")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix dimensions must agree")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|z| -z).collect() }
    }
}
