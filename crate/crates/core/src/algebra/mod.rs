//! *-subalgebras of `M_d`: closure from generators, unit, center, block
//! structure and canonical hybrid states.

mod hybrid;
mod structure;

use nalgebra::{DMatrix, DVector};

pub use hybrid::{canonical_state, functional_to_matrix, HybridState};
pub use structure::{
    central_projections, factor_decomposition, structure_decomposition, AlgebraStructure, Block, FactorDecomposition,
    OFF_PATTERN_EPS,
};

use crate::error::{Error, Result};
use crate::linalg::{hs_inner_unchecked, null_space, range_projector, ComplexMatrix, Tolerances, C64, ONE};

/// Orthonormal family of vectorized matrices, grown by Gram–Schmidt.
struct Span {
    rows: usize,
    cols: usize,
    vecs: Vec<DVector<C64>>,
}

impl Span {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            vecs: Vec::new(),
        }
    }

    fn vectorize(m: &ComplexMatrix) -> DVector<C64> {
        DVector::from_column_slice(m.as_nalgebra().as_slice())
    }

    fn residual(&self, x: &ComplexMatrix) -> DVector<C64> {
        let mut r = Self::vectorize(x);
        for _ in 0..2 {
            for q in &self.vecs {
                let c = q.dotc(&r);
                r.axpy(-c, q, ONE);
            }
        }
        r
    }

    /// Adds the component of `x` outside the span if its norm exceeds
    /// `threshold`.
    fn push(&mut self, x: &ComplexMatrix, threshold: f64) -> bool {
        let r = self.residual(x);
        let n = r.norm();
        if n > threshold {
            self.vecs.push(r / C64::new(n, 0.0));
            true
        } else {
            false
        }
    }

    fn matrix(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_nalgebra(DMatrix::from_column_slice(self.rows, self.cols, self.vecs[k].as_slice()))
    }

    fn into_matrices(self) -> Vec<ComplexMatrix> {
        (0..self.vecs.len()).map(|k| self.matrix(k)).collect()
    }
}

/// A *-subalgebra of `M_d`, stored as a Hilbert–Schmidt-orthonormal basis
/// together with its unit.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    unit: ComplexMatrix,
    /// Adjoint-closed set generating the algebra; commuting with it is
    /// equivalent to commuting with the whole algebra.
    generators: Vec<ComplexMatrix>,
}

fn check_square_family(mats: &[ComplexMatrix]) -> Result<Option<usize>> {
    let Some(first) = mats.first() else {
        return Ok(None);
    };
    let d = first.rows();
    for m in mats {
        if m.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "generators must be square of common size {d}, got {:?}",
                m.shape()
            )));
        }
        if !m.is_finite() {
            return Err(Error::Format("generator has non-finite entries".into()));
        }
    }
    Ok(Some(d))
}

/// Smallest *-subalgebra of `M_d` containing the generators.
///
/// Starting from the span of the generators and their adjoints, every new
/// basis element is multiplied on the left by each generator until the span
/// stops growing. Words of length `k+1` are generator multiples of words of
/// length `k`, so this reaches the full closure; each round adds at least
/// one dimension, hence at most `d²` rounds.
pub fn generate_algebra(generators: &[ComplexMatrix], tol: &Tolerances) -> Result<MatrixAlgebra> {
    generate_in_dim(generators, None, tol)
}

/// Like [`generate_algebra`] with an explicit ambient dimension, which also
/// covers an empty generator list (the zero algebra).
pub fn generate_algebra_in(d: usize, generators: &[ComplexMatrix], tol: &Tolerances) -> Result<MatrixAlgebra> {
    generate_in_dim(generators, Some(d), tol)
}

fn generate_in_dim(generators: &[ComplexMatrix], dim: Option<usize>, tol: &Tolerances) -> Result<MatrixAlgebra> {
    tol.validate()?;
    let d = match (check_square_family(generators)?, dim) {
        (Some(g), Some(d)) if g != d => {
            return Err(Error::Dimension(format!("generators are {g}x{g}, expected {d}x{d}")));
        }
        (Some(g), _) => g,
        (None, Some(d)) => d,
        (None, None) => return Err(Error::Dimension("no generators and no ambient dimension".into())),
    };

    let mut gens: Vec<ComplexMatrix> = Vec::new();
    for g in generators {
        let n = g.frobenius_norm();
        if n > 0.0 {
            let g = g.scale(1.0 / n);
            gens.push(g.adjoint());
            gens.push(g);
        }
    }

    let mut span = Span::new(d, d);
    for g in &gens {
        span.push(g, tol.eps_rank);
    }
    let mut frontier = 0..span.vecs.len();
    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > d * d + 1 {
            return Err(Error::ClosureDiverged { rounds: rounds - 1 });
        }
        let start = span.vecs.len();
        for k in frontier {
            let b = span.matrix(k);
            for g in &gens {
                span.push(&(g * &b), tol.eps_rank);
            }
        }
        frontier = start..span.vecs.len();
    }

    let basis = span.into_matrices();
    let unit = unit_of(d, &basis, tol)?;
    Ok(MatrixAlgebra {
        ambient_dim: d,
        basis,
        unit,
        generators: gens,
    })
}

/// Range projector of `Σᵢ BᵢBᵢ†` over a spanning set.
fn unit_of(d: usize, spanning: &[ComplexMatrix], tol: &Tolerances) -> Result<ComplexMatrix> {
    let t = spanning
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, b| acc + b * &b.adjoint());
    range_projector(&t.hermitian_part(), tol)
}

impl MatrixAlgebra {
    /// Algebra spanned by `mats`, which must already be closed under
    /// products and adjoints (e.g. a compression `PAP` of an algebra by a
    /// central projection). Closure is not re-checked; see
    /// [`MatrixAlgebra::closure_residual`].
    pub fn from_span(d: usize, mats: &[ComplexMatrix], tol: &Tolerances) -> Result<Self> {
        if let Some(g) = check_square_family(mats)? {
            if g != d {
                return Err(Error::Dimension(format!("elements are {g}x{g}, expected {d}x{d}")));
            }
        }
        let scale = mats.iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
        let mut span = Span::new(d, d);
        for m in mats {
            span.push(m, tol.eps_rank * scale);
        }
        let basis = span.into_matrices();
        let unit = unit_of(d, &basis, tol)?;
        Ok(Self {
            ambient_dim: d,
            generators: basis.clone(),
            basis,
            unit,
        })
    }

    /// The full matrix algebra `M_d`.
    pub fn full(d: usize) -> Self {
        let basis: Vec<ComplexMatrix> = (0..d * d).map(|k| ComplexMatrix::unit(d, k % d, k / d)).collect();
        Self {
            ambient_dim: d,
            generators: basis.clone(),
            basis,
            unit: ComplexMatrix::identity(d),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension as a complex vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn unit(&self) -> &ComplexMatrix {
        &self.unit
    }

    /// Hilbert–Schmidt orthogonal projection onto the algebra.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis.iter().fold(ComplexMatrix::zeros(x.rows(), x.cols()), |acc, b| {
            let c = hs_inner_unchecked(b, x);
            acc + b.scale_complex(c)
        })
    }

    /// `‖x − Π(x)‖_F`: distance from `x` to the algebra.
    pub fn distance_to(&self, x: &ComplexMatrix) -> f64 {
        x.distance(&self.project(x))
    }

    pub fn contains(&self, x: &ComplexMatrix, eps: f64) -> bool {
        x.shape() == (self.ambient_dim, self.ambient_dim) && self.distance_to(x) <= eps * x.frobenius_norm().max(1.0)
    }

    /// Largest distance from the algebra of an adjoint or a pairwise product
    /// of basis elements. Quadratic in the dimension.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in &self.basis {
            worst = worst.max(self.distance_to(&a.adjoint()));
            for b in &self.basis {
                worst = worst.max(self.distance_to(&(a * b)));
            }
        }
        worst
    }

    /// Largest `‖1_A B − B‖`, `‖B 1_A − B‖` over the basis.
    pub fn unit_residual(&self) -> f64 {
        self.basis.iter().fold(0.0, |w, b| {
            w.max((&self.unit * b).distance(b)).max((b * &self.unit).distance(b))
        })
    }

    /// Whether all basis elements commute pairwise.
    pub fn is_commutative(&self, eps: f64) -> bool {
        self.basis
            .iter()
            .enumerate()
            .all(|(i, a)| self.basis[i + 1..].iter().all(|b| a.commutator(b).frobenius_norm() <= eps))
    }
}

/// The unit `1_A` of the algebra.
pub fn algebra_unit(a: &MatrixAlgebra) -> ComplexMatrix {
    a.unit.clone()
}

/// Elements of the algebra commuting with all of it.
///
/// Writing `X = Σₖ cₖBₖ`, the conditions `[X, G] = 0` over an adjoint-closed
/// generating set `G` are linear in `c`; the center is their null space,
/// found from the singular values of the stacked commutator map.
pub fn center(a: &MatrixAlgebra, tol: &Tolerances) -> Result<MatrixAlgebra> {
    let d = a.ambient_dim;
    let k = a.dim();
    if k == 0 {
        return Ok(a.clone());
    }
    let gens = &a.generators;
    let block = d * d;
    let mut m = DMatrix::<C64>::zeros(gens.len() * block, k);
    for (col, b) in a.basis.iter().enumerate() {
        for (gi, g) in gens.iter().enumerate() {
            let c = b.commutator(g);
            m.view_mut((gi * block, col), (block, 1))
                .copy_from_slice(c.as_nalgebra().as_slice());
        }
    }
    let m = ComplexMatrix::from_nalgebra(m);
    let smax = m.operator_norm();
    let coefficients = null_space(&m, tol.eps_rank * smax.max(1.0));
    let basis: Vec<ComplexMatrix> = (0..coefficients.cols())
        .map(|j| {
            a.basis.iter().enumerate().fold(ComplexMatrix::zeros(d, d), |acc, (i, b)| {
                acc + b.scale_complex(coefficients.get(i, j))
            })
        })
        .collect();
    Ok(MatrixAlgebra {
        ambient_dim: d,
        generators: basis.clone(),
        basis,
        unit: a.unit.clone(),
    })
}

/// Generators of `V (⊕ᵢ 1_{mᵢ} ⊗ M_{nᵢ} ⊕ 0_{d₀}) V†` for a random unitary
/// `V`, which is returned alongside. Two random elements per block
/// generate the whole algebra with probability one.
pub fn random_block_generators(
    rng: &mut crate::random::SeededRng,
    blocks: &[Block],
    d0: usize,
) -> Result<(Vec<ComplexMatrix>, ComplexMatrix)> {
    use crate::linalg::{direct_sum, kron};
    use crate::random::{random_matrix, random_unitary};

    if blocks.iter().any(|b| b.m == 0 || b.n == 0) {
        return Err(Error::Dimension("blocks must have m, n >= 1".into()));
    }
    let d = blocks.iter().map(|b| b.m * b.n).sum::<usize>() + d0;
    if d == 0 {
        return Err(Error::Dimension("empty algebra".into()));
    }
    let v = random_unitary(rng, d);
    let mut gens = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut parts: Vec<ComplexMatrix> = blocks
            .iter()
            .map(|b| kron(&ComplexMatrix::identity(b.m), &random_matrix(rng, b.n, b.n)))
            .collect();
        if d0 > 0 {
            parts.push(ComplexMatrix::zeros(d0, d0));
        }
        gens.push(v.conjugate(&direct_sum(&parts)?));
    }
    Ok((gens, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli};
    use crate::random::{random_matrix, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Oracle: repeatedly multiply everything by everything and take the
    /// numerical rank of the vectorized family.
    fn brute_force_dim(gens: &[ComplexMatrix]) -> usize {
        let mut family: Vec<ComplexMatrix> = gens.iter().flat_map(|g| [g.clone(), g.adjoint()]).collect();
        for _ in 0..3 {
            let mut next = family.clone();
            for a in &family {
                for b in &family {
                    next.push(a * b);
                }
            }
            family = crate::linalg::orthonormalize_span(&next, &tol()).unwrap();
        }
        family.len()
    }

    #[test]
    fn sigma_z_generates_diagonals() {
        let a = generate_algebra(&[pauli(3)], &tol()).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.contains(&ComplexMatrix::diag(&[1.0, 0.0]), 1e-10));
        assert!(a.contains(&ComplexMatrix::diag(&[0.0, 1.0]), 1e-10));
        assert!(!a.contains(&pauli(1), 1e-10));
    }

    #[test]
    fn sigma_x_and_z_generate_m2() {
        let a = generate_algebra(&[pauli(1), pauli(3)], &tol()).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(brute_force_dim(&[pauli(1), pauli(3)]), 4);
        assert!(a.unit().distance(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn identity_generates_scalars() {
        let a = generate_algebra(&[ComplexMatrix::identity(3)], &tol()).unwrap();
        assert_eq!(a.dim(), 1);
        assert!(a.unit().distance(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn empty_generators_give_zero_algebra() {
        let a = generate_algebra_in(3, &[], &tol()).unwrap();
        assert_eq!(a.dim(), 0);
        assert!(a.unit().frobenius_norm() < 1e-15);
        assert!(generate_algebra(&[], &tol()).is_err());
    }

    #[test]
    fn rejects_mixed_sizes() {
        let r = generate_algebra(&[ComplexMatrix::identity(2), ComplexMatrix::identity(3)], &tol());
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn random_generators_match_brute_force() {
        let mut rng = rng_from_seed(40);
        for d in 2..4 {
            let g = vec![random_matrix(&mut rng, d, d)];
            let a = generate_algebra(&g, &tol()).unwrap();
            assert_eq!(a.dim(), brute_force_dim(&g));
            assert!(a.closure_residual() < 1e-8);
        }
    }

    #[test]
    fn unit_of_full_algebra() {
        let a = MatrixAlgebra::full(3);
        assert!(algebra_unit(&a).distance(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn unit_of_corner_block() {
        let gens: Vec<_> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(i, j)| ComplexMatrix::unit(3, i, j))
            .collect();
        let a = generate_algebra(&gens, &tol()).unwrap();
        assert_eq!(a.dim(), 4);
        assert!(a.unit().distance(&ComplexMatrix::diag(&[1.0, 1.0, 0.0])) < 1e-12);
        assert!(a.unit_residual() < 1e-12);
    }

    #[test]
    fn unit_of_single_projector() {
        let p = ComplexMatrix::diag(&[1.0, 0.0]);
        let a = generate_algebra(std::slice::from_ref(&p), &tol()).unwrap();
        assert!(a.unit().distance(&p) < 1e-12);
    }

    #[test]
    fn center_examples() {
        let full = MatrixAlgebra::full(3);
        assert_eq!(center(&full, &tol()).unwrap().dim(), 1);

        let diag = generate_algebra(&[ComplexMatrix::diag(&[1.0, 2.0, 3.0])], &tol()).unwrap();
        assert_eq!(center(&diag, &tol()).unwrap().dim(), 3);

        let gens = [kron(&ComplexMatrix::identity(2), &pauli(1)), kron(&ComplexMatrix::identity(2), &pauli(3))];
        let factor = generate_algebra(&gens, &tol()).unwrap();
        assert_eq!(factor.dim(), 4);
        let z = center(&factor, &tol()).unwrap();
        assert_eq!(z.dim(), 1);
        assert!(z.contains(&ComplexMatrix::identity(4), 1e-10));
    }

    #[test]
    fn center_elements_commute() {
        let mut rng = rng_from_seed(41);
        let x = random_matrix(&mut rng, 2, 2);
        let y = random_matrix(&mut rng, 1, 1);
        let g = crate::linalg::direct_sum(&[x, y, ComplexMatrix::zeros(1, 1)]).unwrap();
        let a = generate_algebra(&[g], &tol()).unwrap();
        assert_eq!(a.dim(), 5);
        let z = center(&a, &tol()).unwrap();
        assert_eq!(z.dim(), 2);
        for c in z.basis() {
            for b in a.basis() {
                assert!(c.commutator(b).frobenius_norm() < 1e-10);
            }
        }
    }
}
