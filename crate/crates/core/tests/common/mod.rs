#![allow(dead_code)]

use monolab::deformation::SchlesingerTrajectory;
use monolab::fuchsian::FuchsianSystem;
use monolab::{Complex, ComplexMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(r: &mut impl Rng, scale: f64) -> Complex {
    c(r.random_range(-scale..scale), r.random_range(-scale..scale))
}

pub fn random_matrix(r: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| random_complex(r, scale))
}

/// Random matrix with condition number kept moderate: I + small perturbation.
pub fn well_conditioned(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    &ComplexMatrix::identity(n) + &random_matrix(r, n, 0.4 / n as f64)
}

/// Points in the disk of radius `radius` with pairwise distance ≥ `sep`.
pub fn separated_points(r: &mut impl Rng, m: usize, radius: f64, sep: f64) -> Vec<Complex> {
    let mut pts: Vec<Complex> = Vec::new();
    while pts.len() < m {
        let z = random_complex(r, radius);
        if z.norm() <= radius && pts.iter().all(|p| (p - z).norm() >= sep) {
            pts.push(z);
        }
    }
    pts
}

/// 2×2, 3 poles, residues summing to zero.
pub fn random_regular_system(r: &mut impl Rng) -> FuchsianSystem {
    let poles = separated_points(r, 3, 1.0, 0.4);
    let a1 = random_matrix(r, 2, 0.4);
    let a2 = random_matrix(r, 2, 0.4);
    let a3 = &(-&a1) - &a2;
    FuchsianSystem::new(poles, vec![a1, a2, a3]).unwrap()
}

/// Non-commuting three-pole system with two moving poles.
pub fn schlesinger_fixture() -> SchlesingerTrajectory {
    let a1 = ComplexMatrix::from_rows(vec![vec![c(0.1, 0.0), c(0.2, 0.0)], vec![c(0.05, 0.0), c(-0.1, 0.0)]]).unwrap();
    let a2 = ComplexMatrix::from_rows(vec![vec![c(-0.15, 0.0), c(0.0, 0.1)], vec![c(0.3, 0.0), c(0.12, 0.0)]]).unwrap();
    let a3 = ComplexMatrix::from_rows(vec![vec![c(0.07, 0.0), c(-0.1, 0.0)], vec![c(0.0, 0.2), c(0.02, 0.0)]]).unwrap();
    let sys = FuchsianSystem::new(vec![c(-1.0, 0.0), c(0.0, 0.5), c(1.0, 0.0)], vec![a1, a2, a3]).unwrap();
    SchlesingerTrajectory::new(sys, vec![c(0.0, 0.0), c(0.3, -0.2), c(0.0, 0.1)]).unwrap()
}

/// Classical RK4 with fixed step for y' = f(t, y), used as a brute-force oracle.
pub fn rk4<F>(mut f: F, t0: f64, t1: f64, y0: Vec<Complex>, h: f64) -> Vec<Complex>
where
    F: FnMut(f64, &[Complex]) -> Vec<Complex>,
{
    let n = ((t1 - t0).abs() / h).ceil() as usize;
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    let mut t = t0;
    let axpy = |y: &[Complex], k: &[Complex], s: f64| -> Vec<Complex> { y.iter().zip(k).map(|(a, b)| a + b * s).collect() };
    for _ in 0..n {
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        t += h;
    }
    y
}
