//! Eigenvalues of small dense complex matrices.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! complex QR with Wilkinson shifts and deflation. Only eigenvalues are
//! produced; the Schur vectors are never accumulated.

use super::matrix::{Complex, ComplexMatrix, ZERO};
use super::NumError;

/// Iteration budget per eigenvalue.
const ITERS_PER_EIGENVALUE: usize = 60;

/// Multiset of eigenvalues, sorted lexicographically by (re, im).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex>,
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex>) -> Self {
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Self { values }
    }

    /// Keeps the given order; used after matching against a previous sample.
    pub fn from_ordered(values: Vec<Complex>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reorders `self` so each entry sits next to its nearest partner in
    /// `reference` (greedy matching, closest pairs first).
    pub fn matched_to(&self, reference: &Spectrum) -> Spectrum {
        let n = self.values.len();
        assert_eq!(n, reference.values.len(), "spectra of different sizes");
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
        for (i, r) in reference.values.iter().enumerate() {
            for (j, v) in self.values.iter().enumerate() {
                pairs.push(((r - v).norm(), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = vec![None; n];
        let mut used = vec![false; n];
        for (_, i, j) in pairs {
            if out[i].is_none() && !used[j] {
                out[i] = Some(self.values[j]);
                used[j] = true;
            }
        }
        Spectrum::from_ordered(out.into_iter().map(|v| v.expect("complete matching")).collect())
    }

    /// Largest distance between matched eigenvalues of two multisets.
    pub fn distance(&self, other: &Spectrum) -> f64 {
        let m = other.matched_to(self);
        self.values
            .iter()
            .zip(m.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn householder_hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.dim();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm: f64 = ((k + 1)..n).map(|r| h[(r, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex::new(1.0, 0.0) } else { x0 / x0.norm() };
        // v = x + phase·‖x‖·e1
        let mut v: Vec<Complex> = ((k + 1)..n).map(|r| h[(r, k)]).collect();
        v[0] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H ← (I − 2vv*/v*v) H
        for c in 0..n {
            let s: Complex = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, c)]).sum();
            let f = s * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, c)] -= vi * f;
            }
        }
        // H ← H (I − 2vv*/v*v)
        for r in 0..n {
            let s: Complex = v.iter().enumerate().map(|(i, vi)| h[(r, k + 1 + i)] * vi).sum();
            let f = s * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                h[(r, k + 1 + i)] -= f * vi.conj();
            }
        }
        for r in (k + 2)..n {
            h[(r, k)] = ZERO;
        }
    }
    h
}

fn eig2x2(a: Complex, b: Complex, c: Complex, d: Complex) -> (Complex, Complex) {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    // recompute the smaller-magnitude root from the product for accuracy
    let det = a * d - b * c;
    if l1.norm() >= l2.norm() {
        if l1.norm() > 0.0 { (l1, det / l1) } else { (l1, l2) }
    } else if l2.norm() > 0.0 {
        (det / l2, l2)
    } else {
        (l1, l2)
    }
}

/// Givens rotation (c real, s complex) with G·[a; b] = [r; 0].
fn givens(a: Complex, b: Complex) -> (f64, Complex) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, Complex::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let x1 = h[(k, j)];
            let x2 = h[(k + 1, j)];
            h[(k, j)] = x1 * c + s * x2;
            h[(k + 1, j)] = -s.conj() * x1 + x2 * c;
        }
        rots.push((c, s));
    }
    for (idx, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + idx;
        for i in lo..=(k + 2).min(hi) {
            let x1 = h[(i, k)];
            let x2 = h[(i, k + 1)];
            h[(i, k)] = x1 * c + x2 * s.conj();
            h[(i, k + 1)] = -x1 * s + x2 * c;
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Eigenvalues with multiplicity.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Spectrum, NumError> {
    m.ensure_finite()?;
    let n = m.dim();
    if n == 1 {
        return Ok(Spectrum::new(vec![m[(0, 0)]]));
    }
    let mut h = householder_hessenberg(m);
    let scale = h.max_abs();
    if scale == 0.0 {
        return Ok(Spectrum::new(vec![ZERO; n]));
    }
    let eps = f64::EPSILON;
    let mut out = Vec::with_capacity(n);
    let mut hi = n as isize - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = ITERS_PER_EIGENVALUE * n;
    while hi >= 0 {
        let hiu = hi as usize;
        if hiu == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        // locate the start of the active unreduced block
        let mut lo = hiu;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let diag = if diag == 0.0 { scale } else { diag };
            if sub <= eps * diag {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hiu {
            out.push(h[(hiu, hiu)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo + 1 == hiu {
            let (l1, l2) = eig2x2(h[(lo, lo)], h[(lo, hiu)], h[(hiu, lo)], h[(hiu, hiu)]);
            out.push(l1);
            out.push(l2);
            hi -= 2;
            iter = 0;
            continue;
        }
        total += 1;
        iter += 1;
        if total > cap {
            return Err(NumError::NoConvergence { iterations: total });
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift to break cycles
            h[(hiu, hiu)] + Complex::new(h[(hiu, hiu - 1)].norm() * 0.75, h[(hiu - 1, hiu - 2)].norm())
        } else {
            let (l1, l2) = eig2x2(
                h[(hiu - 1, hiu - 1)],
                h[(hiu - 1, hiu)],
                h[(hiu, hiu - 1)],
                h[(hiu, hiu)],
            );
            let d = h[(hiu, hiu)];
            if (l1 - d).norm() <= (l2 - d).norm() { l1 } else { l2 }
        };
        qr_step(&mut h, lo, hiu, shift);
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumError::NoConvergence { iterations: total });
    }
    Ok(Spectrum::new(out))
}
