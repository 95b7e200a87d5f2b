use std::fmt;

use rayon::prelude::*;

use crate::fuchsian::{default_base_point, monodromy_tuple, MonodromyTuple};
use crate::numcore::{eigenvalues, Complex, ComplexMatrix, Spectrum};
use crate::pathint::ToleranceSpec;

use super::{DeformationError, DeformationSample};

pub const DEFAULT_SAMPLES: usize = 17;
pub const DEFAULT_THRESHOLD: f64 = 1e-5;

pub const EPISTEMIC_NOTE: &str = "necessary-condition test: 'refuted' disproves the property up to numerical error; \
'consistent-at-tolerance' means the tested invariants were constant at this threshold and is not a proof of conjugacy";

/// One tracked monodromy invariant. Indices are zero-based; names print one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Det(usize),
    Trace(usize),
    PairTrace(usize, usize),
    /// k-th eigenvalue of M_i·M_j·M_i⁻¹·M_j⁻¹, tracked continuously in t.
    CommutatorEigenvalue { i: usize, j: usize, k: usize },
    /// trace(M_i)ⁿ/det(M_i).
    ProjectiveTrace(usize),
    /// trace(M_iM_j)ⁿ/det(M_iM_j).
    ProjectivePairTrace(usize, usize),
}

impl Quantity {
    /// Unchanged under simultaneous conjugation of the tuple.
    pub fn is_conjugation_invariant(&self) -> bool {
        matches!(self, Quantity::Det(_) | Quantity::Trace(_) | Quantity::PairTrace(..) | Quantity::CommutatorEigenvalue { .. })
    }

    /// Unchanged under conjugation and under M_i ↦ c_i·M_i.
    pub fn is_scalar_invariant(&self) -> bool {
        matches!(
            self,
            Quantity::CommutatorEigenvalue { .. } | Quantity::ProjectiveTrace(_) | Quantity::ProjectivePairTrace(..)
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Quantity::Det(i) => write!(f, "det(M_{})", i + 1),
            Quantity::Trace(i) => write!(f, "trace(M_{})", i + 1),
            Quantity::PairTrace(i, j) => write!(f, "trace(M_{}M_{})", i + 1, j + 1),
            Quantity::CommutatorEigenvalue { i, j, k } => write!(f, "eig(K_{}{})[{}]", i + 1, j + 1, k + 1),
            Quantity::ProjectiveTrace(i) => write!(f, "trace(M_{})^n/det(M_{})", i + 1, i + 1),
            Quantity::ProjectivePairTrace(i, j) => {
                write!(f, "trace(M_{a}M_{b})^n/det(M_{a}M_{b})", a = i + 1, b = j + 1)
            }
        }
    }
}

/// Invariant values per sample, all tuples taken at one shared base point.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantProfile {
    pub parameters: Vec<f64>,
    pub quantities: Vec<Quantity>,
    /// rows[k][q] = value of quantities[q] at parameters[k].
    pub rows: Vec<Vec<Complex>>,
    pub base_point: Complex,
    pub tuples: Vec<MonodromyTuple>,
}

fn pow_n(z: Complex, n: usize) -> Complex {
    z.powu(n as u32)
}

struct RawRow {
    scalars: Vec<Complex>,
    spectra: Vec<Spectrum>,
}

fn raw_row(ms: &[&ComplexMatrix]) -> Result<RawRow, DeformationError> {
    let m = ms.len();
    let n = ms[0].dim();
    let mut scalars = Vec::new();
    for mi in ms {
        scalars.push(mi.det());
        scalars.push(mi.trace());
    }
    let mut spectra = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let prod = ms[i] * ms[j];
            scalars.push(prod.trace());
            scalars.push(pow_n(prod.trace(), n) / prod.det());
            spectra.push(eigenvalues(&ms[i].group_commutator(ms[j])?)?);
        }
    }
    for mi in ms {
        scalars.push(pow_n(mi.trace(), n) / mi.det());
    }
    Ok(RawRow { scalars, spectra })
}

fn layout(m: usize, n: usize) -> Vec<Quantity> {
    let mut q = Vec::new();
    for i in 0..m {
        q.push(Quantity::Det(i));
        q.push(Quantity::Trace(i));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            q.push(Quantity::PairTrace(i, j));
            q.push(Quantity::ProjectivePairTrace(i, j));
        }
    }
    for i in 0..m {
        q.push(Quantity::ProjectiveTrace(i));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..n {
                q.push(Quantity::CommutatorEigenvalue { i, j, k });
            }
        }
    }
    q
}

impl InvariantProfile {
    /// Builds the profile from precomputed tuples (same pole count and dimension throughout).
    pub fn from_tuples(parameters: Vec<f64>, tuples: Vec<MonodromyTuple>) -> Result<Self, DeformationError> {
        if parameters.len() != tuples.len() {
            return Err(DeformationError::Invalid(format!(
                "{} parameters for {} tuples",
                parameters.len(),
                tuples.len()
            )));
        }
        if tuples.len() < 2 {
            return Err(DeformationError::TooFewSamples(tuples.len()));
        }
        let m = tuples[0].entries.len();
        let n = tuples[0].dim();
        if tuples.iter().any(|t| t.entries.len() != m || t.dim() != n) {
            return Err(DeformationError::Invalid("tuples differ in pole count or dimension".into()));
        }
        let raw = tuples
            .par_iter()
            .map(|t| raw_row(&t.matrices()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::with_capacity(raw.len());
        let mut prev: Option<Vec<Spectrum>> = None;
        for r in raw {
            let spectra = match &prev {
                Some(p) => r.spectra.iter().zip(p).map(|(s, ps)| s.matched_to(ps)).collect(),
                None => r.spectra,
            };
            let mut row = r.scalars;
            row.extend(spectra.iter().flat_map(|s| s.values().iter().copied()));
            rows.push(row);
            prev = Some(spectra);
        }
        Ok(Self { parameters, quantities: layout(m, n), rows, base_point: tuples[0].base_point, tuples })
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    /// |q_k − q_0| / max(1, |q_0|).
    pub fn deviation(&self, k: usize, q: usize) -> f64 {
        let q0 = self.rows[0][q];
        (self.rows[k][q] - q0).norm() / q0.norm().max(1.0)
    }

    pub fn column(&self, quantity: Quantity) -> Option<Vec<Complex>> {
        let q = self.quantities.iter().position(|&x| x == quantity)?;
        Some(self.rows.iter().map(|r| r[q]).collect())
    }

    pub fn total_error_estimate(&self) -> f64 {
        self.tuples.iter().map(MonodromyTuple::total_error_estimate).sum()
    }
}

/// Profile of sampled systems. When `x0` is `None` one base point is chosen for all samples.
pub fn invariant_profile(
    samples: &[DeformationSample],
    x0: Option<Complex>,
    tol: &ToleranceSpec,
) -> Result<InvariantProfile, DeformationError> {
    if samples.len() < 2 {
        return Err(DeformationError::TooFewSamples(samples.len()));
    }
    let x0 = match x0 {
        Some(p) => p,
        None => {
            let systems: Vec<_> = samples.iter().map(|s| &s.system).collect();
            default_base_point(&systems)
                .map_err(|source| DeformationError::Monodromy { t: samples[0].t, source })?
                .point
        }
    };
    let tuples = samples
        .par_iter()
        .map(|s| monodromy_tuple(&s.system, Some(x0), tol).map_err(|source| DeformationError::Monodromy { t: s.t, source }))
        .collect::<Result<Vec<_>, _>>()?;
    InvariantProfile::from_tuples(samples.iter().map(|s| s.t).collect(), tuples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    ConsistentAtTolerance,
    Refuted,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::ConsistentAtTolerance => "consistent-at-tolerance",
            VerdictKind::Refuted => "refuted",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub quantity: Quantity,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub max_deviation: f64,
    /// Quantity and sample attaining the maximum; `None` if nothing was compared.
    pub witness: Option<Witness>,
    pub threshold: f64,
    pub note: &'static str,
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        self.kind == VerdictKind::Refuted
    }
}

fn verdict(profile: &InvariantProfile, threshold: f64, select: impl Fn(&Quantity) -> bool) -> Verdict {
    let mut max = 0.0f64;
    let mut witness = None;
    for (q, quantity) in profile.quantities.iter().enumerate() {
        if !select(quantity) {
            continue;
        }
        for k in 1..profile.len() {
            let d = profile.deviation(k, q);
            if d > max || (witness.is_none() && d >= max) || d.is_nan() {
                max = if d.is_nan() { f64::INFINITY } else { d };
                witness = Some(Witness { quantity: *quantity, t: profile.parameters[k] });
            }
        }
    }
    let kind = if max > threshold { VerdictKind::Refuted } else { VerdictKind::ConsistentAtTolerance };
    Verdict { kind, max_deviation: max, witness, threshold, note: EPISTEMIC_NOTE }
}

/// Compares traces, determinants, pair traces and commutator spectra against the first sample.
pub fn check_isomonodromic(profile: &InvariantProfile, threshold: f64) -> Verdict {
    verdict(profile, threshold, Quantity::is_conjugation_invariant)
}

/// Compares only quantities invariant under rescaling each M_i.
pub fn check_projectively_isomonodromic(profile: &InvariantProfile, threshold: f64) -> Verdict {
    verdict(profile, threshold, Quantity::is_scalar_invariant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{scalar_twist, ParameterizedFamily, TwistSpec};
    use crate::expr::parse;
    use crate::fuchsian::{FuchsianSystem, MonodromyMatrix};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn tol() -> ToleranceSpec {
        ToleranceSpec::new(1e-11, 1e-13)
    }

    fn tuple_of(ms: Vec<ComplexMatrix>) -> MonodromyTuple {
        MonodromyTuple {
            base_point: c(0.0, 0.0),
            entries: ms
                .into_iter()
                .map(|matrix| MonodromyMatrix {
                    matrix,
                    exponent: None,
                    pole: None,
                    base_point: c(0.0, 0.0),
                    steps: 0,
                    error_estimate: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn names() {
        assert_eq!(Quantity::Trace(0).to_string(), "trace(M_1)");
        assert_eq!(Quantity::PairTrace(0, 2).to_string(), "trace(M_1M_3)");
        assert_eq!(Quantity::CommutatorEigenvalue { i: 0, j: 1, k: 1 }.to_string(), "eig(K_12)[2]");
    }

    #[test]
    fn scalar_rescaling_moves_only_non_projective_quantities() {
        let m1 = ComplexMatrix::from_rows(vec![vec![c(1.0, 0.2), c(0.5, 0.0)], vec![c(0.1, 0.0), c(0.8, -0.3)]]).unwrap();
        let m2 = ComplexMatrix::from_rows(vec![vec![c(0.9, 0.0), c(0.0, 0.4)], vec![c(-0.2, 0.1), c(1.1, 0.0)]]).unwrap();
        let k = c(0.3, 1.7);
        let p = InvariantProfile::from_tuples(
            vec![0.0, 1.0],
            vec![tuple_of(vec![m1.clone(), m2.clone()]), tuple_of(vec![m1.scale(k), m2])],
        )
        .unwrap();
        for (q, quantity) in p.quantities.iter().enumerate() {
            let d = p.deviation(1, q);
            if quantity.is_scalar_invariant() {
                assert!(d < 1e-9, "{quantity}: {d}");
            }
        }
        assert!(check_isomonodromic(&p, 1e-5).is_refuted());
        assert!(!check_projectively_isomonodromic(&p, 1e-5).is_refuted());
    }

    #[test]
    fn too_few_samples() {
        let t = tuple_of(vec![ComplexMatrix::identity(2)]);
        assert!(matches!(InvariantProfile::from_tuples(vec![0.0], vec![t]), Err(DeformationError::TooFewSamples(1))));
    }

    fn diag_family() -> ParameterizedFamily {
        let p = |s: &str| parse(s).unwrap();
        ParameterizedFamily::new(2, "t", (0.0, 0.4), vec![p("0")], vec![vec![p("t"), p("0"), p("0"), p("-t")]]).unwrap()
    }

    #[test]
    fn diagonal_family_refuted_by_trace() {
        let fam = diag_family();
        let prof = invariant_profile(&fam.sample(5).unwrap(), None, &tol()).unwrap();
        let dets = prof.column(Quantity::Det(0)).unwrap();
        let traces = prof.column(Quantity::Trace(0)).unwrap();
        for (k, t) in prof.parameters.iter().enumerate() {
            assert!((dets[k] - c(1.0, 0.0)).norm() < 1e-8);
            assert!((traces[k] - c(2.0 * (2.0 * PI * t).cos(), 0.0)).norm() < 1e-8);
        }
        let v = check_isomonodromic(&prof, DEFAULT_THRESHOLD);
        assert_eq!(v.kind, VerdictKind::Refuted);
        assert!(matches!(v.witness.unwrap().quantity, Quantity::Trace(0) | Quantity::ProjectiveTrace(0)));
    }

    #[test]
    fn constant_family_is_consistent() {
        let a1 = ComplexMatrix::from_real_rows(&[&[0.1, 0.3], &[0.2, -0.2]]).unwrap();
        let a2 = ComplexMatrix::from_real_rows(&[&[0.25, 0.0], &[0.1, 0.05]]).unwrap();
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![a1, a2]).unwrap();
        let fam = ParameterizedFamily::constant(&sys, "t", (0.0, 1.0)).unwrap();
        let prof = invariant_profile(&fam.sample(3).unwrap(), None, &tol()).unwrap();
        for row in &prof.rows {
            for (a, b) in row.iter().zip(&prof.rows[0]) {
                assert!((a - b).norm() < 1e-8);
            }
        }
        assert!(!check_isomonodromic(&prof, DEFAULT_THRESHOLD).is_refuted());
        assert!(!check_projectively_isomonodromic(&prof, DEFAULT_THRESHOLD).is_refuted());
    }

    #[test]
    fn twisted_single_pole_det() {
        let p = |s: &str| parse(s).unwrap();
        let fam = ParameterizedFamily::new(2, "t", (0.0, 0.5), vec![p("0")], vec![vec![p("1/5"), p("0"), p("0"), p("-1/5")]])
            .unwrap();
        let tw = scalar_twist(&fam, &TwistSpec::new(vec![p("t")])).unwrap();
        let base = invariant_profile(&fam.sample(3).unwrap(), None, &tol()).unwrap();
        let twisted = invariant_profile(&tw.sample(3).unwrap(), None, &tol()).unwrap();
        let d0 = base.column(Quantity::Det(0)).unwrap();
        let d1 = twisted.column(Quantity::Det(0)).unwrap();
        for (k, t) in base.parameters.iter().enumerate() {
            let expect = d0[k] * Complex::from_polar(1.0, 4.0 * PI * t);
            assert!((d1[k] - expect).norm() < 1e-8);
        }
    }
}
