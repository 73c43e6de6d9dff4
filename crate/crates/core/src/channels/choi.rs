use serde::Serialize;

use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{eigh, is_positive, kron, partial_trace, ComplexMatrix, Subsystem, Tolerances};

/// Relative eigenvalue cutoff when reading Kraus operators off a Choi
/// matrix.
pub const KRAUS_CUTOFF: f64 = 1e-12;

/// `X = Σᵢⱼ ℰ(|i⟩⟨j|) ⊗ |i⟩⟨j|` on `C^{d_B} ⊗ C^{d_A}` (output factor
/// first, unnormalized).
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    dim_out: usize,
    dim_in: usize,
}

impl ChoiMatrix {
    /// `dims = (d_B, d_A)`.
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize)) -> Result<Self> {
        let (dim_out, dim_in) = dims;
        let n = dim_out * dim_in;
        if n == 0 || matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "Choi matrix {:?} does not match dims ({dim_out}, {dim_in})",
                matrix.shape()
            )));
        }
        Ok(Self {
            matrix,
            dim_out,
            dim_in,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `(d_B, d_A)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.dim_out, self.dim_in)
    }

    /// `ℰ(ρ) = Tr_A[X (1 ⊗ ρᵀ)]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::Dimension(format!(
                "channel input is {}, operand is {:?}",
                self.dim_in,
                rho.shape()
            )));
        }
        let y = &self.matrix * &kron(&ComplexMatrix::identity(self.dim_out), &rho.transpose());
        partial_trace(&y, (self.dim_out, self.dim_in), Subsystem::A)
    }
}

/// Choi matrix of an arbitrary linear map given as a function.
pub fn choi_from_map(
    dim_in: usize,
    dim_out: usize,
    map: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> Result<ChoiMatrix> {
    let mut x = ComplexMatrix::zeros(dim_out * dim_in, dim_out * dim_in);
    for i in 0..dim_in {
        for j in 0..dim_in {
            let unit = ComplexMatrix::unit(dim_in, i, j);
            let image = map(&unit);
            if image.shape() != (dim_out, dim_out) {
                return Err(Error::Dimension(format!("map output is {:?}", image.shape())));
            }
            x = x + kron(&image, &unit);
        }
    }
    ChoiMatrix::new(x, (dim_out, dim_in))
}

pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let (da, db) = (ch.dim_in(), ch.dim_out());
    let n = da * db;
    // X = Σ |vₖ⟩⟨vₖ| with vₖ[b·d_A + a] = Eₖ[b, a].
    let x = ch.kraus().iter().fold(ComplexMatrix::zeros(n, n), |acc, e| {
        let v = ComplexMatrix::from_fn(n, 1, |r, _| e.get(r / da, r % da));
        acc + ComplexMatrix::dyad(&v, &v)
    });
    ChoiMatrix {
        matrix: x,
        dim_out: db,
        dim_in: da,
    }
}

/// Kraus operators `Eₖ[b, a] = √αₖ ψₖ[b·d_A + a]` from the eigenpairs of a
/// positive Choi matrix, dropping eigenvalues below `1e-12·λ_max`.
pub fn choi_to_kraus(x: &ChoiMatrix, tol: &Tolerances) -> Result<KrausChannel> {
    let pos = is_positive(&x.matrix, tol)?;
    if !pos.positive {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: pos.min_eigenvalue,
        });
    }
    let (db, da) = x.dims();
    let eig = eigh(&x.matrix);
    let max = eig.values.iter().copied().fold(0.0, f64::max);
    let mut kraus: Vec<ComplexMatrix> = Vec::new();
    for (k, alpha) in eig.values.iter().enumerate().rev() {
        if max == 0.0 || *alpha < KRAUS_CUTOFF * max {
            continue;
        }
        let s = alpha.sqrt();
        kraus.push(ComplexMatrix::from_fn(db, da, |b, a| eig.vectors.get(b * da + a, k) * s));
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(db, da));
    }
    KrausChannel::new(da, db, kraus)
}

/// Complete positivity, trace preservation and unitality with their
/// certificates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelCheck {
    pub cp: bool,
    pub tp: bool,
    pub unital: bool,
    pub min_choi_eigenvalue: f64,
    pub hermiticity_residual: f64,
    /// `‖Tr_B X − 1_A‖_F`, i.e. `‖Σ Eᵢ†Eᵢ − 1‖_F`.
    pub tp_residual: f64,
    /// `‖Tr_A X − 1_B‖_F`, i.e. `‖ℰ(1) − 1‖_F`.
    pub unital_residual: f64,
}

/// Checks a map given by its Choi matrix. Complete positivity is
/// positivity of `X`.
pub fn check_choi(x: &ChoiMatrix, tol: &Tolerances) -> Result<ChannelCheck> {
    let (db, da) = x.dims();
    let pos = is_positive(&x.matrix, tol)?;
    let tp_residual = partial_trace(&x.matrix, (db, da), Subsystem::B)?.distance(&ComplexMatrix::identity(da));
    let unital_residual = partial_trace(&x.matrix, (db, da), Subsystem::A)?.distance(&ComplexMatrix::identity(db));
    Ok(ChannelCheck {
        cp: pos.positive,
        tp: tp_residual < super::TP_EPS,
        unital: unital_residual < super::TP_EPS,
        min_choi_eigenvalue: pos.min_eigenvalue,
        hermiticity_residual: pos.hermiticity_residual,
        tp_residual,
        unital_residual,
    })
}

pub fn check_kraus(ch: &KrausChannel, tol: &Tolerances) -> Result<ChannelCheck> {
    check_choi(&kraus_to_choi(ch), tol)
}

/// Transposes one factor of an operator on `C^{d_A} ⊗ C^{d_B}`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: (usize, usize), subsystem: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if n == 0 || rho.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "operator {:?} does not match dims ({da}, {db})",
            rho.shape()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        match subsystem {
            Subsystem::A => rho.get(k * db + j, i * db + l),
            Subsystem::B => rho.get(i * db + l, k * db + j),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::kraus::apply;
    use crate::quantum::maximally_entangled;
    use crate::random::{random_density, random_unitary, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_choi() {
        let x = kraus_to_choi(&KrausChannel::identity(2));
        // Σ |ii⟩⟨jj|
        let omega = maximally_entangled(2).unwrap().scale(2f64.sqrt());
        assert!(x.matrix().distance(&ComplexMatrix::dyad(&omega, &omega)) < 1e-15);
        assert!((x.matrix().trace().re - 2.0).abs() < 1e-15);
        let k = choi_to_kraus(&x, &tol()).unwrap();
        assert_eq!(k.kraus().len(), 1);
        let e = &k.kraus()[0];
        // Proportional to the identity, up to a phase.
        let phase = e.get(0, 0);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(e.distance(&ComplexMatrix::identity(2).scale_complex(phase)) < 1e-12);
    }

    #[test]
    fn dephasing_choi() {
        let x = kraus_to_choi(&KrausChannel::dephasing(2));
        assert!(x.matrix().distance(&ComplexMatrix::diag(&[1.0, 0.0, 0.0, 1.0])) < 1e-15);
        let k = choi_to_kraus(&x, &tol()).unwrap();
        assert_eq!(k.kraus().len(), 2);
        // Each Kraus operator is a phase times a rank-one projector.
        for e in k.kraus() {
            let p = &e.adjoint() * e;
            assert!((&p * &p).distance(&p) < 1e-12);
            assert!((p.trace().re - 1.0).abs() < 1e-12);
            assert!(e.commutator(&p).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_choi() {
        let x = kraus_to_choi(&KrausChannel::completely_depolarizing(3));
        assert!(x.matrix().distance(&ComplexMatrix::identity(9).scale(1.0 / 3.0)) < 1e-14);
    }

    #[test]
    fn choi_from_map_agrees_with_kraus() {
        let mut rng = rng_from_seed(81);
        let ch = KrausChannel::random(&mut rng, 2, 3, 2).unwrap();
        let x = choi_from_map(2, 3, |m| apply(&ch, m).unwrap()).unwrap();
        assert!(x.matrix().distance(kraus_to_choi(&ch).matrix()) < 1e-13);
    }

    #[test]
    fn round_trip_action() {
        let mut rng = rng_from_seed(82);
        for _ in 0..10 {
            let ch = KrausChannel::random(&mut rng, 3, 2, 3).unwrap();
            let x = kraus_to_choi(&ch);
            let back = choi_to_kraus(&x, &tol()).unwrap();
            assert!(kraus_to_choi(&back).matrix().distance(x.matrix()) < 1e-9);
            let rho = random_density(&mut rng, 3);
            let expected = apply(&ch, &rho).unwrap();
            assert!(apply(&back, &rho).unwrap().distance(&expected) < 1e-9);
            assert!(x.apply(&rho).unwrap().distance(&expected) < 1e-12);
        }
    }

    #[test]
    fn transpose_map_is_not_cp() {
        let x = choi_from_map(2, 2, ComplexMatrix::transpose).unwrap();
        let c = check_choi(&x, &tol()).unwrap();
        assert!(!c.cp);
        assert!((c.min_choi_eigenvalue + 1.0).abs() < 1e-12);
        assert!(c.tp && c.unital);
        assert!(matches!(choi_to_kraus(&x, &tol()), Err(Error::NotCompletelyPositive { .. })));
    }

    #[test]
    fn unitary_passes_all_checks() {
        let mut rng = rng_from_seed(83);
        let ch = KrausChannel::unitary(random_unitary(&mut rng, 3)).unwrap();
        let c = check_kraus(&ch, &tol()).unwrap();
        assert!(c.cp && c.tp && c.unital);
    }

    #[test]
    fn reset_is_not_unital() {
        let ch = KrausChannel::replacement(2, &ComplexMatrix::diag(&[1.0, 0.0])).unwrap();
        let c = check_kraus(&ch, &tol()).unwrap();
        assert!(c.cp && c.tp && !c.unital);
    }

    #[test]
    fn zero_map_has_zero_kraus() {
        let x = ChoiMatrix::new(ComplexMatrix::zeros(4, 4), (2, 2)).unwrap();
        let k = choi_to_kraus(&x, &tol()).unwrap();
        assert_eq!(k.kraus().len(), 1);
        assert_eq!(k.kraus()[0], ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn partial_transpose_of_maximally_entangled() {
        let omega = maximally_entangled(2).unwrap();
        let pt = partial_transpose(&ComplexMatrix::dyad(&omega, &omega), (2, 2), Subsystem::A).unwrap();
        let min = eigh(&pt).values[0];
        assert!((min + 0.5).abs() < 1e-12);
        // (T ⊗ id)(|Ω⟩⟨Ω|) = SWAP/2.
        let swap = ComplexMatrix::real(&[
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]);
        assert!(pt.distance(&swap.scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = rng_from_seed(84);
        let (r, s) = (random_density(&mut rng, 2), random_density(&mut rng, 3));
        let pt = partial_transpose(&kron(&r, &s), (2, 3), Subsystem::A).unwrap();
        assert!(pt.distance(&kron(&r.transpose(), &s)) < 1e-15);
        let pt_b = partial_transpose(&kron(&r, &s), (2, 3), Subsystem::B).unwrap();
        assert!(pt_b.distance(&kron(&r, &s.transpose())) < 1e-15);
        assert!(is_positive(&pt, &tol()).unwrap().positive);
        let twice = partial_transpose(&pt, (2, 3), Subsystem::A).unwrap();
        assert_eq!(twice, kron(&r, &s));
        assert!(partial_transpose(&pt, (2, 2), Subsystem::A).is_err());
    }
}
