//! Seeded random sampling of matrices, states and unitaries.
//!
//! Every randomized routine in the crate draws from [`SeededRng`], created
//! fresh from an explicit `u64` seed so results are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

/// Name of the generator algorithm, recorded in reports.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal(rng: &mut SeededRng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex normal entries.
pub fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(rng: &mut SeededRng, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n, n).into_nalgebra();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(q)
}

/// The first `cols` columns of a random `rows × rows` unitary.
pub fn random_isometry(rng: &mut SeededRng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    random_unitary(rng, rows).submatrix(0, 0, rows, cols)
}

/// Uniformly random unit vector.
pub fn random_state_vector(rng: &mut SeededRng, d: usize) -> ComplexMatrix {
    let v = random_matrix(rng, d, 1);
    let n = v.frobenius_norm();
    v.scale(1.0 / n)
}

/// Random full-rank density matrix `GG†/Tr(GG†)`.
pub fn random_density(rng: &mut SeededRng, d: usize) -> ComplexMatrix {
    random_density_of_rank(rng, d, d)
}

pub fn random_density_of_rank(rng: &mut SeededRng, d: usize, rank: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d, rank);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    m.hermitian_part().scale(1.0 / t)
}

/// Random probability vector (normalized exponentials).
pub fn random_distribution(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_from_seed(1);
        for n in 1..6 {
            let u = random_unitary(&mut rng, n);
            assert!((&u.adjoint() * &u).distance(&ComplexMatrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let a = random_matrix(&mut rng_from_seed(42), 3, 3);
        let b = random_matrix(&mut rng_from_seed(42), 3, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut rng = rng_from_seed(2);
        let rho = random_density_of_rank(&mut rng, 4, 2);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
    }
}
