//! States, effects, ensembles, entropies and the Bloch ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    complete_to_unitary, eigh, hs_inner_unchecked, is_positive, kron, pauli, ComplexMatrix, Tolerances, C64, ONE,
};

/// Allowed deviation of a trace or probability sum from one.
pub const NORMALIZATION_EPS: f64 = 1e-9;
/// Threshold on `‖ρ² − ρ‖_F` for a state to count as pure.
pub const PURITY_EPS: f64 = 1e-8;

/// A positive matrix of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!("state must be square, got {:?}", matrix.shape())));
        }
        let pos = is_positive(&matrix, tol)?;
        if !pos.positive {
            return Err(Error::InvalidState(format!(
                "not positive (min eigenvalue {:.3e}, hermiticity residual {:.3e})",
                pos.min_eigenvalue, pos.hermiticity_residual
            )));
        }
        let t = matrix.trace();
        if (t - ONE).norm() > NORMALIZATION_EPS {
            return Err(Error::InvalidState(format!("trace {t} is not 1")));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Wraps a matrix that is a state by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &ComplexMatrix) -> Result<Self> {
        check_unit_vector(psi).map_err(Error::InvalidState)?;
        Ok(Self::new_unchecked(ComplexMatrix::dyad(psi, psi)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Eigenvalues, ascending, with roundoff negatives clipped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        eigh(&self.matrix).values.into_iter().map(|v| v.max(0.0)).collect()
    }
}

/// An operator `0 ≤ E ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!("effect must be square, got {:?}", matrix.shape())));
        }
        let lower = is_positive(&matrix, tol)?;
        if !lower.positive {
            return Err(Error::InvalidEffect(format!(
                "E is not positive (min eigenvalue {:.3e})",
                lower.min_eigenvalue
            )));
        }
        let upper = is_positive(&(&ComplexMatrix::identity(matrix.rows()) - &matrix), tol)?;
        if !upper.positive {
            return Err(Error::InvalidEffect(format!(
                "1 - E is not positive (min eigenvalue {:.3e})",
                upper.min_eigenvalue
            )));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `1 − E`, the negation of the proposition.
    pub fn complement(&self) -> Effect {
        Effect {
            matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix,
        }
    }
}

fn check_unit_vector(psi: &ComplexMatrix) -> std::result::Result<(), String> {
    if psi.cols() != 1 || psi.rows() == 0 {
        return Err(format!("expected a column vector, got {:?}", psi.shape()));
    }
    let n = psi.frobenius_norm();
    if (n - 1.0).abs() > NORMALIZATION_EPS {
        return Err(format!("vector norm {n} is not 1"));
    }
    Ok(())
}

pub(crate) fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
        return Err(Error::InvalidDistribution(format!("entry {x}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > NORMALIZATION_EPS {
        return Err(Error::InvalidDistribution(format!("sums to {s}")));
    }
    Ok(())
}

/// Probabilities `pᵢ` attached to unit vectors `ψᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    items: Vec<(f64, ComplexMatrix)>,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let Some(dim) = items.first().map(|(_, v)| v.rows()) else {
            return Err(Error::InvalidEnsemble("no items".into()));
        };
        for (k, (_, psi)) in items.iter().enumerate() {
            check_unit_vector(psi).map_err(|e| Error::InvalidEnsemble(format!("item {k}: {e}")))?;
            if psi.rows() != dim {
                return Err(Error::InvalidEnsemble(format!("item {k} has dimension {} not {dim}", psi.rows())));
            }
        }
        let weights: Vec<f64> = items.iter().map(|(p, _)| *p).collect();
        check_distribution(&weights).map_err(|e| Error::InvalidEnsemble(e.to_string()))?;
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(f64, ComplexMatrix)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.items[0].1.rows()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.items.iter().map(|(p, _)| *p).collect()
    }
}

/// A point `r` of the closed unit ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub r: [f64; 3],
}

impl BlochVector {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let v = Self { r };
        let norm = v.norm();
        if !norm.is_finite() || norm > 1.0 + NORMALIZATION_EPS {
            return Err(Error::InvalidBloch { norm });
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// `ρ = Σᵢ pᵢ|ψᵢ⟩⟨ψᵢ|`.
pub fn density_from_ensemble(e: &Ensemble) -> DensityMatrix {
    let d = e.dim();
    let rho = e
        .items
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, (p, psi)| acc + ComplexMatrix::dyad(psi, psi).scale(*p));
    DensityMatrix::new_unchecked(rho)
}

/// `Tr(ρA)`.
pub fn expectation(rho: &DensityMatrix, a: &ComplexMatrix) -> Result<C64> {
    if a.shape() != rho.matrix.shape() {
        return Err(Error::Dimension(format!(
            "state is {:?} but operator is {:?}",
            rho.matrix.shape(),
            a.shape()
        )));
    }
    // Tr(ρA) = ⟨ρ, A⟩ because ρ is Hermitian.
    Ok(hs_inner_unchecked(&rho.matrix, a))
}

fn entropy_of(values: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = values
        .into_iter()
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy `−Tr(ρ ln ρ)` in nats.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.spectrum())
}

/// Shannon entropy `−Σ pᵢ ln pᵢ` in nats.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    Ok(entropy_of(p.iter().copied()))
}

pub fn is_pure(rho: &DensityMatrix) -> bool {
    let m = &rho.matrix;
    (m * m).distance(m) < PURITY_EPS
}

/// `|ψ⟩ = Σᵢ √pᵢ |i⟩⊗|i⟩` over an eigenbasis of `ρ`; both reduced states
/// of `|ψ⟩⟨ψ|` equal `ρ`.
pub fn purify(rho: &DensityMatrix) -> ComplexMatrix {
    let d = rho.dim();
    let eig = eigh(&rho.matrix);
    let mut psi = ComplexMatrix::zeros(d * d, 1);
    for (k, p) in eig.values.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        let v = eig.vectors.column_at(k);
        psi = psi + kron(&v, &v).scale(p.sqrt());
    }
    let n = psi.frobenius_norm();
    psi.scale(1.0 / n)
}

/// `ρ = ½(1 + r₁σ₁ + r₂σ₂ + r₃σ₃)`.
pub fn bloch_to_density(r: &BlochVector) -> DensityMatrix {
    let m = (1..4).fold(pauli(0), |acc, k| acc + pauli(k).scale(r.r[k - 1]));
    DensityMatrix::new_unchecked(m.scale(0.5))
}

/// `rₖ = Tr(ρσₖ)` for a qubit state.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::Dimension(format!("Bloch vectors need d = 2, got {}", rho.dim())));
    }
    let r = [1, 2, 3].map(|k| hs_inner_unchecked(&rho.matrix, &pauli(k)).re);
    BlochVector::new(r)
}

/// `|Ω⟩ = n^{-1/2} Σᵢ |i⟩⊗|i⟩`.
pub fn maximally_entangled(n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Dimension("maximally entangled state needs n >= 1".into()));
    }
    let mut v = ComplexMatrix::zeros(n * n, 1);
    let a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    for i in 0..n {
        v.set(i * n + i, 0, a);
    }
    Ok(v)
}

/// `1/n`.
pub fn maximally_mixed(n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::Dimension("maximally mixed state needs n >= 1".into()));
    }
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::identity(n).scale(1.0 / n as f64)))
}

/// `|⟨a|b⟩| = ‖a‖‖b‖` within `eps`, i.e. equal up to a global phase (and
/// scale).
pub fn equal_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
    a.shape() == b.shape() && (hs_inner_unchecked(a, b).norm() - a.frobenius_norm() * b.frobenius_norm()).abs() <= eps
}

/// Unitary `u` with `√pᵢ|ψᵢ⟩ = Σⱼ uᵢⱼ √qⱼ|φⱼ⟩` for two ensembles of the same
/// density matrix.
///
/// Both ensembles are expressed in the eigen-ensemble of `ρ` through
/// matrices `A`, `B` with orthonormal columns; then `u = Ã B̃†` where the
/// tildes denote completion to unitaries. The shorter ensemble is padded
/// with zero-probability items so that `u` is square.
pub fn ensemble_equivalence_unitary(e1: &Ensemble, e2: &Ensemble, tol: &Tolerances) -> Result<ComplexMatrix> {
    if e1.dim() != e2.dim() {
        return Err(Error::Dimension(format!("ensembles on dims {} and {}", e1.dim(), e2.dim())));
    }
    let rho1 = density_from_ensemble(e1);
    let rho2 = density_from_ensemble(e2);
    let residual = rho1.matrix.distance(&rho2.matrix);
    if residual > 1e-8 {
        return Err(Error::NoEquivalence { residual });
    }
    let n = e1.len().max(e2.len());
    let eig = eigh(&(&rho1.matrix + &rho2.matrix).scale(0.5));
    let max = eig.values.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > tol.eps_rank * max.max(1.0))
        .collect();

    // Column k of the coefficient matrix: √pᵢ⟨k|ψᵢ⟩/√λₖ.
    let coefficients = |e: &Ensemble| {
        let mut a = ComplexMatrix::zeros(n, support.len());
        for (i, (p, psi)) in e.items.iter().enumerate() {
            for (col, &k) in support.iter().enumerate() {
                let ev = eig.vectors.column_at(k);
                let amp = hs_inner_unchecked(&ev, psi);
                a.set(i, col, amp * (p.max(0.0) / eig.values[k]).sqrt());
            }
        }
        complete_to_unitary(&orthonormal_polar(&a))
    };
    let a = coefficients(e1);
    let b = coefficients(e2);
    Ok(&a * &b.adjoint())
}

/// Closest matrix with orthonormal columns, `A(A†A)^{-1/2}`; removes the
/// roundoff left by dividing through small eigenvalues.
fn orthonormal_polar(a: &ComplexMatrix) -> ComplexMatrix {
    if a.cols() == 0 {
        return a.clone();
    }
    let svd = a.as_nalgebra().clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    ComplexMatrix::from_nalgebra(u * vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, Subsystem, ZERO};
    use crate::random::{random_density, random_distribution, random_hermitian, random_state_vector, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ket(bits: &[f64]) -> ComplexMatrix {
        let v: Vec<C64> = bits.iter().map(|x| C64::new(*x, 0.0)).collect();
        ComplexMatrix::column(&v)
    }

    #[test]
    fn state_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[0.5, 0.5]), &tol()).is_ok());
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[0.6, 0.5]), &tol()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[1.5, -0.5]), &tol()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::zeros(2, 3), &tol()).is_err());
    }

    #[test]
    fn ensemble_of_one_basis_vector() {
        let e = Ensemble::new(vec![(1.0, ket(&[1.0, 0.0]))]).unwrap();
        let rho = density_from_ensemble(&e);
        assert!(rho.matrix().distance(&ComplexMatrix::diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn orthogonal_ensemble_attains_mixing_entropy() {
        let mut rng = crate::random::rng_from_seed(5);
        let u = crate::random::random_unitary(&mut rng, 3);
        let p = [0.5, 0.3, 0.2];
        let e = Ensemble::new((0..3).map(|k| (p[k], u.column_at(k))).collect()).unwrap();
        let s = entropy(&density_from_ensemble(&e));
        assert!((shannon_entropy(&p).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn even_mixture_is_maximally_mixed() {
        let e = Ensemble::new(vec![(0.5, ket(&[1.0, 0.0])), (0.5, ket(&[0.0, 1.0]))]).unwrap();
        assert!(density_from_ensemble(&e).matrix().distance(maximally_mixed(2).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::new(vec![]).is_err());
        assert!(Ensemble::new(vec![(0.5, ket(&[1.0, 0.0]))]).is_err());
        assert!(Ensemble::new(vec![(1.0, ket(&[1.0, 1.0]))]).is_err());
        assert!(Ensemble::new(vec![(0.5, ket(&[1.0, 0.0])), (0.5, ket(&[1.0, 0.0, 0.0]))]).is_err());
        assert!(Ensemble::new(vec![(1.5, ket(&[1.0, 0.0])), (-0.5, ket(&[0.0, 1.0]))]).is_err());
    }

    #[test]
    fn ensemble_expectations_match_weighted_sum() {
        let mut rng = rng_from_seed(30);
        let p = random_distribution(&mut rng, 5);
        let items: Vec<_> = p.iter().map(|&w| (w, random_state_vector(&mut rng, 3))).collect();
        let e = Ensemble::new(items).unwrap();
        let rho = density_from_ensemble(&e);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 3);
            let direct: C64 = e
                .items()
                .iter()
                .map(|(w, psi)| (&(&psi.adjoint() * &a) * psi).get(0, 0) * *w)
                .sum();
            assert!((expectation(&rho, &a).unwrap() - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn expectation_examples() {
        let mixed = maximally_mixed(2).unwrap();
        assert!(expectation(&mixed, &pauli(3)).unwrap().norm() < 1e-15);
        let mut rng = rng_from_seed(31);
        let rho = DensityMatrix::new(random_density(&mut rng, 3), &tol()).unwrap();
        assert!((expectation(&rho, &ComplexMatrix::identity(3)).unwrap() - ONE).norm() < 1e-12);
        let zero = DensityMatrix::pure(&ket(&[1.0, 0.0])).unwrap();
        assert_eq!(expectation(&zero, &ComplexMatrix::diag(&[0.0, 1.0])).unwrap(), ZERO);
        assert!(expectation(&zero, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::pure(&ket(&[0.6, 0.8])).unwrap();
        assert!(entropy(&pure).abs() < 1e-12);
        for n in 1..6 {
            let s = entropy(&maximally_mixed(n).unwrap());
            assert!((s - (n as f64).ln()).abs() < 1e-12);
        }
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[0.75, 0.25]), &tol()).unwrap();
        let expected = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert!((entropy(&rho) - expected).abs() < 1e-14);
        assert!((shannon_entropy(&[0.75, 0.25]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.25; 4]).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!(shannon_entropy(&[0.5, 0.4]).is_err());
        assert!(shannon_entropy(&[1.2, -0.2]).is_err());
    }

    #[test]
    fn purity_examples() {
        assert!(is_pure(&DensityMatrix::pure(&ket(&[1.0, 0.0])).unwrap()));
        assert!(!is_pure(&maximally_mixed(2).unwrap()));
    }

    #[test]
    fn purification_of_basis_state() {
        let rho = DensityMatrix::pure(&ket(&[1.0, 0.0])).unwrap();
        let psi = purify(&rho);
        assert!(equal_up_to_phase(&psi, &ket(&[1.0, 0.0, 0.0, 0.0]), 1e-14));
    }

    #[test]
    fn purification_of_maximally_mixed_is_maximally_entangled() {
        let psi = purify(&maximally_mixed(3).unwrap());
        let dyad = ComplexMatrix::dyad(&psi, &psi);
        let third = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        assert!(partial_trace(&dyad, (3, 3), Subsystem::A).unwrap().distance(&third) < 1e-12);
        assert!(partial_trace(&dyad, (3, 3), Subsystem::B).unwrap().distance(&third) < 1e-12);
    }

    #[test]
    fn bloch_examples() {
        let centre = bloch_to_density(&BlochVector::new([0.0, 0.0, 0.0]).unwrap());
        assert!(centre.matrix().distance(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        let north = bloch_to_density(&BlochVector::new([0.0, 0.0, 1.0]).unwrap());
        assert!(north.matrix().distance(&ComplexMatrix::diag(&[1.0, 0.0])) < 1e-15);
        assert!(BlochVector::new([1.0, 1.0, 0.0]).is_err());
        assert!(density_to_bloch(&maximally_mixed(3).unwrap()).is_err());
    }

    #[test]
    fn bloch_determinant() {
        let mut rng = rng_from_seed(33);
        for _ in 0..50 {
            let v = random_state_vector(&mut rng, 3);
            let scale = rand::Rng::random::<f64>(&mut rng);
            let r = [0, 1, 2].map(|k| v.get(k, 0).re * scale);
            let norm2: f64 = r.iter().map(|x| x * x).sum();
            let r = BlochVector::new(r.map(|x| x / norm2.sqrt().max(1.0))).unwrap();
            let m = bloch_to_density(&r).into_matrix();
            let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
            assert!((det.re - 0.25 * (1.0 - r.norm().powi(2))).abs() < 1e-12);
            assert!(det.im.abs() < 1e-12);
        }
    }

    #[test]
    fn standard_states() {
        assert!(maximally_mixed(2).unwrap().matrix().distance(&ComplexMatrix::diag(&[0.5, 0.5])) < 1e-16);
        for n in 2..=6 {
            let omega = maximally_entangled(n).unwrap();
            assert!((omega.frobenius_norm() - 1.0).abs() < 1e-14);
            let red = partial_trace(&ComplexMatrix::dyad(&omega, &omega), (n, n), Subsystem::B).unwrap();
            assert!(red.distance(maximally_mixed(n).unwrap().matrix()) < 1e-14);
        }
        assert!(maximally_entangled(0).is_err());
        assert!(maximally_mixed(0).is_err());
    }

    #[test]
    fn equivalence_of_identical_ensembles() {
        let mut rng = rng_from_seed(34);
        let p = random_distribution(&mut rng, 3);
        let e = Ensemble::new(p.iter().map(|&w| (w, random_state_vector(&mut rng, 2))).collect()).unwrap();
        let u = ensemble_equivalence_unitary(&e, &e, &tol()).unwrap();
        assert!(u.distance(&ComplexMatrix::identity(3)) < 1e-8);
    }

    #[test]
    fn equivalence_basis_vs_hadamard() {
        let s = 1.0 / 2f64.sqrt();
        let e1 = Ensemble::new(vec![(0.5, ket(&[1.0, 0.0])), (0.5, ket(&[0.0, 1.0]))]).unwrap();
        let e2 = Ensemble::new(vec![(0.5, ket(&[s, s])), (0.5, ket(&[s, -s]))]).unwrap();
        let u = ensemble_equivalence_unitary(&e1, &e2, &tol()).unwrap();
        // Solving |0⟩ = u₀₀|+⟩ + u₀₁|−⟩, |1⟩ = u₁₀|+⟩ + u₁₁|−⟩ by hand gives
        // the Hadamard matrix.
        let h = ComplexMatrix::real(&[[s, s], [s, -s]]);
        assert!(u.distance(&h) < 1e-12);
    }

    #[test]
    fn equivalence_rejects_different_states() {
        let e1 = Ensemble::new(vec![(1.0, ket(&[1.0, 0.0]))]).unwrap();
        let e2 = Ensemble::new(vec![(1.0, ket(&[0.0, 1.0]))]).unwrap();
        assert!(matches!(
            ensemble_equivalence_unitary(&e1, &e2, &tol()),
            Err(Error::NoEquivalence { .. })
        ));
    }
}
