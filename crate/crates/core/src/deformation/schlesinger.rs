use crate::fuchsian::FuchsianSystem;
use crate::numcore::{Complex, ComplexMatrix};
use crate::pathint::{integrate_flow, ToleranceSpec};

use super::family::equally_spaced;
use super::{DeformationError, DeformationSample};

/// Minimum pole separation allowed anywhere along a trajectory.
pub const COLLISION_GUARD: f64 = 1e-6;

/// dA_i/dt = −Σ_{j≠i} [A_i, A_j]·(v_i − v_j)/(a_i − a_j).
pub fn schlesinger_rhs(
    positions: &[Complex],
    velocities: &[Complex],
    residues: &[ComplexMatrix],
) -> Result<Vec<ComplexMatrix>, DeformationError> {
    let m = positions.len();
    if velocities.len() != m || residues.len() != m {
        return Err(DeformationError::Invalid(format!(
            "{} positions, {} velocities, {} residues",
            m,
            velocities.len(),
            residues.len()
        )));
    }
    let n = residues.first().map_or(0, ComplexMatrix::dim);
    let mut out = vec![ComplexMatrix::zeros(n); m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = positions[i] - positions[j];
            if d.norm() == 0.0 {
                return Err(DeformationError::PositionCollision { i: i + 1, j: j + 1 });
            }
            let w = (velocities[i] - velocities[j]) / d;
            if w.norm() == 0.0 {
                continue;
            }
            // the (j, i) term has the same weight and the opposite bracket
            let br = residues[i].commutator(&residues[j]).scale(w);
            out[i] = &out[i] - &br;
            out[j] = &out[j] + &br;
        }
    }
    Ok(out)
}

/// Straight-line pole motion a_i(t) = a_i(0) + t·v_i with residues following the Schlesinger flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SchlesingerTrajectory {
    initial: FuchsianSystem,
    velocities: Vec<Complex>,
    samples: Vec<DeformationSample>,
    max_sum_drift: f64,
}

impl SchlesingerTrajectory {
    pub fn new(initial: FuchsianSystem, velocities: Vec<Complex>) -> Result<Self, DeformationError> {
        if velocities.len() != initial.pole_count() {
            return Err(DeformationError::Invalid(format!(
                "{} velocities for {} poles",
                velocities.len(),
                initial.pole_count()
            )));
        }
        if velocities.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(DeformationError::Invalid("velocities must be finite".into()));
        }
        Ok(Self { initial, velocities, samples: Vec::new(), max_sum_drift: 0.0 })
    }

    pub fn initial(&self) -> &FuchsianSystem {
        &self.initial
    }

    pub fn velocities(&self) -> &[Complex] {
        &self.velocities
    }

    pub fn positions_at(&self, t: f64) -> Vec<Complex> {
        self.initial.poles().iter().zip(&self.velocities).map(|(a, v)| a + v * t).collect()
    }

    /// Sampled systems along the integrated flow; empty before integration.
    pub fn samples(&self) -> &[DeformationSample] {
        &self.samples
    }

    /// Largest ‖ΣA_i(t) − ΣA_i(0)‖_∞ over the samples.
    pub fn max_sum_drift(&self) -> f64 {
        self.max_sum_drift
    }

    /// Earliest t in [0, t1] at which two poles come closer than the guard.
    pub fn first_collision(&self, t1: f64) -> Option<(usize, usize, f64)> {
        let a = self.initial.poles();
        let mut worst: Option<(usize, usize, f64)> = None;
        let g2 = COLLISION_GUARD * COLLISION_GUARD;
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                let da = a[i] - a[j];
                let dv = self.velocities[i] - self.velocities[j];
                // |da + t·dv|² = qa·t² + qb·t + qc
                let qa = dv.norm_sqr();
                let qb = 2.0 * (da * dv.conj()).re;
                let qc = da.norm_sqr();
                let hit = if qc < g2 {
                    Some(0.0)
                } else if qa == 0.0 {
                    None
                } else {
                    let disc = qb * qb - 4.0 * qa * (qc - g2);
                    if disc < 0.0 {
                        None
                    } else {
                        let t = (-qb - disc.sqrt()) / (2.0 * qa);
                        (t >= 0.0 && t <= t1).then_some(t)
                    }
                };
                if let Some(t) = hit {
                    if worst.map_or(true, |w| t < w.2) {
                        worst = Some((i + 1, j + 1, t));
                    }
                }
            }
        }
        worst
    }
}

/// Integrates the flow on [0, t1], recording `samples` equally spaced systems.
pub fn integrate_schlesinger(
    traj: SchlesingerTrajectory,
    t1: f64,
    samples: usize,
    tol: &ToleranceSpec,
) -> Result<SchlesingerTrajectory, DeformationError> {
    if !(t1.is_finite() && t1 >= 0.0) {
        return Err(DeformationError::Invalid(format!("end parameter must be finite and nonnegative, got {t1}")));
    }
    if samples < 2 {
        return Err(DeformationError::TooFewSamples(samples));
    }
    if let Some((i, j, t)) = traj.first_collision(t1) {
        return Err(DeformationError::CollisionAhead { i, j, t, guard: COLLISION_GUARD });
    }
    let n = traj.initial.dim();
    let m = traj.initial.pole_count();
    let block = n * n;
    let rhs = |t: f64, s: &[Complex]| -> Result<Vec<Complex>, DeformationError> {
        let residues =
            (0..m).map(|i| ComplexMatrix::from_flat(n, &s[i * block..(i + 1) * block])).collect::<Result<Vec<_>, _>>()?;
        let d = schlesinger_rhs(&traj.positions_at(t), &traj.velocities, &residues)?;
        Ok(d.iter().flat_map(|x| x.as_slice().iter().copied()).collect())
    };
    let sum0 = traj.initial.residue_sum();
    let mut state: Vec<Complex> = traj.initial.residues().iter().flat_map(|r| r.as_slice().iter().copied()).collect();
    let grid = equally_spaced(0.0, t1, samples);
    let mut out = Vec::with_capacity(samples);
    let mut drift = 0.0f64;
    let mut prev = 0.0;
    for &t in &grid {
        if t > prev {
            state = integrate_flow(rhs, prev, t, &state, tol)?.value;
        }
        prev = t;
        let residues = (0..m)
            .map(|i| ComplexMatrix::from_flat(n, &state[i * block..(i + 1) * block]))
            .collect::<Result<Vec<_>, _>>()?;
        let system = FuchsianSystem::new(traj.positions_at(t), residues)
            .map_err(|source| DeformationError::System { t, source })?;
        drift = drift.max((&system.residue_sum() - &sum0).norm_inf());
        out.push(DeformationSample { t, system });
    }
    Ok(SchlesingerTrajectory { samples: out, max_sum_drift: drift, ..traj })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn m(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn hand_bracket() {
        let a1 = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let a2 = m(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let d = schlesinger_rhs(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)], &[a1, a2]).unwrap();
        assert!((&d[0] - &m(&[&[1.0, 0.0], &[0.0, -1.0]])).max_abs() < 1e-15);
        assert!((&d[1] + &d[0]).max_abs() < 1e-15);
    }

    #[test]
    fn commuting_and_opposite_residues_are_stationary() {
        let a1 = m(&[&[0.3, 0.0], &[0.0, -0.1]]);
        let a2 = m(&[&[0.2, 0.0], &[0.0, 0.5]]);
        let p = [c(0.0, 0.0), c(1.0, 0.0)];
        let v = [c(0.5, 0.2), c(-1.0, 0.0)];
        for d in schlesinger_rhs(&p, &v, &[a1.clone(), a2]).unwrap() {
            assert_eq!(d.max_abs(), 0.0);
        }
        let b = m(&[&[0.1, 0.4], &[0.2, -0.1]]);
        for d in schlesinger_rhs(&p, &v, &[b.clone(), -&b]).unwrap() {
            assert_eq!(d.max_abs(), 0.0);
        }
        assert!(matches!(
            schlesinger_rhs(&[p[0], p[0]], &v, &[a1.clone(), a1]),
            Err(DeformationError::PositionCollision { i: 1, j: 2 })
        ));
    }

    fn fixture() -> SchlesingerTrajectory {
        let a1 = ComplexMatrix::from_rows(vec![vec![c(0.1, 0.0), c(0.2, 0.0)], vec![c(0.05, 0.0), c(-0.1, 0.0)]])
            .unwrap();
        let a2 = ComplexMatrix::from_rows(vec![vec![c(-0.15, 0.0), c(0.0, 0.1)], vec![c(0.3, 0.0), c(0.12, 0.0)]])
            .unwrap();
        let a3 = &(-&a1) - &a2;
        let sys = FuchsianSystem::new(vec![c(-1.0, 0.0), c(0.0, 0.5), c(1.0, 0.0)], vec![a1, a2, a3]).unwrap();
        SchlesingerTrajectory::new(sys, vec![c(0.0, 0.0), c(0.3, -0.2), c(0.0, 0.0)]).unwrap()
    }

    #[test]
    fn conservation_and_finite_difference() {
        let tol = ToleranceSpec::new(1e-11, 1e-13);
        let traj = integrate_schlesinger(fixture(), 1.0, 5, &tol).unwrap();
        assert_eq!(traj.samples().len(), 5);
        assert!(traj.max_sum_drift() <= 1e-9, "{}", traj.max_sum_drift());

        let h = 1e-5;
        let base = integrate_schlesinger(fixture(), 0.5, 2, &tol).unwrap();
        let ahead = integrate_schlesinger(fixture(), 0.5 + h, 2, &tol).unwrap();
        let s0 = &base.samples()[1].system;
        let s1 = &ahead.samples()[1].system;
        let d = schlesinger_rhs(&base.positions_at(0.5), base.velocities(), s0.residues()).unwrap();
        for i in 0..3 {
            let fd = (&s1.residues()[i] - &s0.residues()[i]).scale_real(1.0 / h);
            assert!((&fd - &d[i]).max_abs() < 1e-3, "pole {i}");
        }
    }

    #[test]
    fn commuting_start_is_constant() {
        let a1 = m(&[&[0.3, 0.0], &[0.0, -0.1]]);
        let a2 = m(&[&[0.2, 0.0], &[0.0, 0.5]]);
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![a1, a2]).unwrap();
        let traj = SchlesingerTrajectory::new(sys.clone(), vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let out = integrate_schlesinger(traj, 1.0, 3, &ToleranceSpec::default()).unwrap();
        for s in out.samples() {
            for (r, r0) in s.system.residues().iter().zip(sys.residues()) {
                assert_eq!(r, r0);
            }
        }
    }

    #[test]
    fn collision_guard_reports_earliest_time() {
        let a = m(&[&[0.1]]);
        let sys = FuchsianSystem::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![a.clone(), a]).unwrap();
        let traj = SchlesingerTrajectory::new(sys, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        match integrate_schlesinger(traj.clone(), 2.0, 3, &ToleranceSpec::default()) {
            Err(DeformationError::CollisionAhead { i: 1, j: 2, t, .. }) => assert!((t - (1.0 - 1e-6)).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert!(traj.first_collision(0.5).is_none());
    }
}
