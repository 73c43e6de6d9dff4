use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{center, MatrixAlgebra, Span};
use crate::error::{Error, Result};
use crate::linalg::{
    direct_sum, kron, partial_trace, projector_basis, spectral_decomposition, ComplexMatrix, Subsystem, Tolerances,
};
use crate::random::{complex_normal, rng_from_seed, SeededRng};

/// Relative tolerance on the off-pattern part of `U B U†`.
pub const OFF_PATTERN_EPS: f64 = 1e-8;

const MAX_RETRIES: usize = 8;

/// One summand `1_m ⊗ M_n` of the block structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub m: usize,
    pub n: usize,
}

/// `U A U† = ⊕ᵢ (1_{mᵢ} ⊗ M_{nᵢ}) ⊕ 0_{d₀}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraStructure {
    pub u: ComplexMatrix,
    pub blocks: Vec<Block>,
    pub d0: usize,
    /// Largest relative off-pattern norm over the algebra's basis.
    pub residual: f64,
}

impl AlgebraStructure {
    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    /// Starting row of each block in the structure basis.
    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |o, b| {
                let start = *o;
                *o += b.m * b.n;
                Some(start)
            })
            .collect()
    }

    pub fn signature(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.m, b.n)).collect()
    }

    /// The factors `Aᵢ` of `x` (partial traces over the multiplicity,
    /// divided by `mᵢ`); exact for elements of the algebra.
    pub fn block_parts(&self, x: &ComplexMatrix) -> Vec<ComplexMatrix> {
        let c = &(&self.u * x) * &self.u.adjoint();
        self.blocks
            .iter()
            .zip(self.offsets())
            .map(|(b, o)| {
                let size = b.m * b.n;
                let cb = c.submatrix(o, o, size, size);
                partial_trace(&cb, (b.m, b.n), Subsystem::B)
                    .expect("block size is m*n")
                    .scale(1.0 / b.m as f64)
            })
            .collect()
    }

    /// `U† (⊕ᵢ 1_{mᵢ} ⊗ Aᵢ ⊕ 0) U`.
    pub fn embed(&self, parts: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        if parts.len() != self.blocks.len() {
            return Err(Error::Dimension(format!(
                "{} block parts for {} blocks",
                parts.len(),
                self.blocks.len()
            )));
        }
        let mut summands = Vec::with_capacity(parts.len() + 1);
        for (p, b) in parts.iter().zip(&self.blocks) {
            if p.shape() != (b.n, b.n) {
                return Err(Error::Dimension(format!("block part {:?} for n = {}", p.shape(), b.n)));
            }
            summands.push(kron(&ComplexMatrix::identity(b.m), p));
        }
        summands.push(ComplexMatrix::zeros(self.d0, self.d0));
        let inner = direct_sum(&summands)?;
        Ok(&(&self.u.adjoint() * &inner) * &self.u)
    }

    /// Embeds a single part in block `i`, zero elsewhere.
    pub fn embed_single(&self, i: usize, part: &ComplexMatrix) -> Result<ComplexMatrix> {
        let parts: Vec<ComplexMatrix> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| if k == i { part.clone() } else { ComplexMatrix::zeros(b.n, b.n) })
            .collect();
        self.embed(&parts)
    }

    /// `‖U B U† − pattern(U B U†)‖_F / ‖B‖_F`, where the pattern keeps
    /// `1_m ⊗ Tr_m(·)/m` on each block and zero elsewhere.
    pub fn off_pattern(&self, b: &ComplexMatrix) -> f64 {
        let norm = b.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let parts = self.block_parts(b);
        let c = &(&self.u * b) * &self.u.adjoint();
        let mut pattern = ComplexMatrix::zeros(self.dim(), self.dim());
        for ((blk, o), p) in self.blocks.iter().zip(self.offsets()).zip(&parts) {
            pattern.set_block(o, o, &kron(&ComplexMatrix::identity(blk.m), p));
        }
        c.distance(&pattern) / norm
    }
}

/// Block data for a factor: `u (rows m·n, cols d)` maps the ambient space
/// onto the support of the unit with `u A u† = 1_m ⊗ M_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorDecomposition {
    pub m: usize,
    pub n: usize,
    pub u: ComplexMatrix,
}

fn random_element(rng: &mut SeededRng, basis: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    basis
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, b| acc + b.scale_complex(complex_normal(rng)))
}

/// Minimal central projections `P₁..P_N`, `Σ Pᵢ = 1_A`.
///
/// A random Hermitian central element has `N` distinct eigenvalues on the
/// support with probability one; its spectral projectors (restricted to the
/// support) are the minimal projections. Unlucky samples are redrawn.
pub fn central_projections(a: &MatrixAlgebra, seed: u64, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let z = center(a, tol)?;
    let count = z.dim();
    if count == 0 {
        return Ok(Vec::new());
    }
    let d = a.ambient_dim();
    let mut rng = rng_from_seed(seed);
    for _ in 0..=MAX_RETRIES {
        let h = random_element(&mut rng, z.basis(), d).hermitian_part();
        let sd = spectral_decomposition(&h, tol)?;
        let ps: Vec<ComplexMatrix> = sd
            .projectors
            .iter()
            .map(|p| (p * a.unit()).hermitian_part())
            .filter(|p| p.trace().re > 0.5)
            .collect();
        if ps.len() == count {
            return Ok(ps);
        }
    }
    Err(Error::DegenerateSample {
        seed,
        attempts: MAX_RETRIES + 1,
        what: format!("no central element with {count} distinct eigenvalues"),
    })
}

/// Orthonormal basis of `S† A S` for an isometry `S` onto an invariant
/// subspace.
fn compress(basis: &[ComplexMatrix], s: &ComplexMatrix, tol: &Tolerances) -> Vec<ComplexMatrix> {
    let r = s.cols();
    let sa = s.adjoint();
    let mut span = Span::new(r, r);
    let mats: Vec<ComplexMatrix> = basis.iter().map(|b| &(&sa * b) * s).collect();
    let scale = mats.iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
    for m in &mats {
        span.push(m, tol.eps_rank * scale.max(1.0));
    }
    span.into_matrices()
}

fn signature_of(dim: usize, r: usize) -> Result<Block> {
    let n = (dim as f64).sqrt().round() as usize;
    if n == 0 || n * n != dim {
        return Err(Error::NotAFactor(format!("dimension {dim} is not a perfect square")));
    }
    if !r.is_multiple_of(n) {
        return Err(Error::NotAFactor(format!("support dimension {r} is not a multiple of {n}")));
    }
    Ok(Block { m: r / n, n })
}

/// Closest unitary (polar factor).
fn nearest_unitary(w: &ComplexMatrix) -> ComplexMatrix {
    let svd = w.as_nalgebra().clone().svd(true, true);
    ComplexMatrix::from_nalgebra(svd.u.unwrap() * svd.v_t.unwrap())
}

/// Unitary `W` on `C^r` with `W A W† = 1_m ⊗ M_n` for a factor `A` whose
/// unit is the identity of `C^r`.
///
/// Follows the construction through matrix units: a random Hermitian
/// element gives a maximal family of `n` orthogonal projectors `Pⱼ` of rank
/// `m`; `F₁ⱼ = P₁XPⱼ` for a random `X` satisfies `F₁ⱼ†F₁ⱼ = αⱼPⱼ` and
/// carries an orthonormal basis `e_k` of `P₁` to `f⁽ʲ⁾_k = F₁ⱼ†e_k/√αⱼ`. In
/// the basis ordered `(k, j) ↦ k·n + j` the algebra acts as `1_m ⊗ M_n`.
fn factor_in_support(basis: &[ComplexMatrix], r: usize, seed: u64, tol: &Tolerances) -> Result<(Block, ComplexMatrix)> {
    let block = signature_of(basis.len(), r)?;
    let Block { m, n } = block;
    if m == 1 || n == 1 {
        // M_r itself or the scalars 1_r: already in the target form.
        return Ok((block, ComplexMatrix::identity(r)));
    }
    let mut rng = rng_from_seed(seed);

    let mut projectors = None;
    let mut last_ranks = Vec::new();
    for _ in 0..=MAX_RETRIES {
        let h = random_element(&mut rng, basis, r).hermitian_part();
        let sd = spectral_decomposition(&h, tol)?;
        let ranks = sd.ranks();
        if ranks.len() == n && ranks.iter().all(|&k| k == m) {
            projectors = Some(sd.projectors);
            break;
        }
        last_ranks = ranks;
    }
    let Some(projectors) = projectors else {
        return Err(Error::NotAFactor(format!(
            "eigenprojector ranks {last_ranks:?} instead of {n} x {m} (seed {seed})"
        )));
    };

    let e = projector_basis(&projectors[0]);
    for _ in 0..=MAX_RETRIES {
        let x = random_element(&mut rng, basis, r);
        let p1x = &projectors[0] * &x;
        let f: Vec<ComplexMatrix> = projectors[1..].iter().map(|p| &p1x * p).collect();
        let alpha: Vec<f64> = f.iter().map(|fj| fj.frobenius_norm().powi(2) / m as f64).collect();
        let amax = alpha.iter().copied().fold(0.0, f64::max);
        if amax == 0.0 || alpha.iter().any(|&a| a < 1e-6 * amax) {
            continue;
        }
        let mut w = ComplexMatrix::zeros(r, r);
        for k in 0..m {
            let ek = e.column_at(k);
            w.set_block(k * n, 0, &ek.adjoint());
            for (j, (fj, aj)) in f.iter().zip(&alpha).enumerate() {
                let fk = (&fj.adjoint() * &ek).scale(1.0 / aj.sqrt());
                w.set_block(k * n + j + 1, 0, &fk.adjoint());
            }
        }
        return Ok((block, nearest_unitary(&w)));
    }
    Err(Error::DegenerateSample {
        seed,
        attempts: MAX_RETRIES + 1,
        what: "intertwiners between minimal projections vanished".into(),
    })
}

/// Decomposes a factor: `u A u† = 1_m ⊗ M_n` on the support of its unit.
pub fn factor_decomposition(a: &MatrixAlgebra, seed: u64, tol: &Tolerances) -> Result<FactorDecomposition> {
    let s = projector_basis(a.unit());
    if s.cols() == 0 {
        return Err(Error::NotAFactor("the zero algebra".into()));
    }
    let compressed = compress(a.basis(), &s, tol);
    let (block, w) = factor_in_support(&compressed, s.cols(), seed, tol)?;
    Ok(FactorDecomposition {
        m: block.m,
        n: block.n,
        u: &w * &s.adjoint(),
    })
}

/// Seed for the `i`-th factor, independent of processing order.
fn block_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Lexicographic comparison of projector entries, larger first, entries
/// within 1e-9 treated as equal.
fn content_order(a: &ComplexMatrix, b: &ComplexMatrix) -> Ordering {
    for (x, y) in a.entries().zip(b.entries()) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            if (u - v).abs() > 1e-9 {
                return v.total_cmp(&u);
            }
        }
    }
    Ordering::Equal
}

struct PendingBlock {
    projector: ComplexMatrix,
    support: ComplexMatrix,
    basis: Vec<ComplexMatrix>,
    block: Block,
}

/// Finds `U` and the signature `{(mᵢ, nᵢ)}, d₀` with
/// `U A U† = ⊕ᵢ (1_{mᵢ} ⊗ M_{nᵢ}) ⊕ 0_{d₀}`.
///
/// Central projections split the algebra into factors, each factor is put
/// into `1_m ⊗ M_n` form, and the kernel of the unit forms the trailing
/// zero block. Blocks are ordered by `n` then `m` (descending), ties broken
/// by the entries of the central projection.
pub fn structure_decomposition(a: &MatrixAlgebra, seed: u64, tol: &Tolerances) -> Result<AlgebraStructure> {
    let d = a.ambient_dim();
    let central = central_projections(a, seed, tol)?;
    let mut pending = Vec::with_capacity(central.len());
    for q in central {
        let support = projector_basis(&q);
        let basis = compress(a.basis(), &support, tol);
        let block = signature_of(basis.len(), support.cols())?;
        pending.push(PendingBlock {
            projector: q,
            support,
            basis,
            block,
        });
    }
    pending.sort_by(|x, y| {
        y.block
            .n
            .cmp(&x.block.n)
            .then(y.block.m.cmp(&x.block.m))
            .then_with(|| content_order(&x.projector, &y.projector))
    });

    let kernel = projector_basis(&(&ComplexMatrix::identity(d) - a.unit()).hermitian_part());
    let mut u = ComplexMatrix::zeros(d, d);
    let mut row = 0;
    let mut blocks = Vec::with_capacity(pending.len());
    for (i, p) in pending.iter().enumerate() {
        let (block, w) = factor_in_support(&p.basis, p.support.cols(), block_seed(seed, i), tol)?;
        debug_assert_eq!(block, p.block);
        u.set_block(row, 0, &(&w * &p.support.adjoint()));
        row += p.support.cols();
        blocks.push(block);
    }
    let d0 = kernel.cols();
    if row + d0 != d {
        return Err(Error::Dimension(format!(
            "blocks cover {row} dimensions and the kernel {d0}, ambient is {d}"
        )));
    }
    u.set_block(row, 0, &kernel.adjoint());

    let mut st = AlgebraStructure {
        u,
        blocks,
        d0,
        residual: 0.0,
    };
    st.residual = a.basis().iter().map(|b| st.off_pattern(b)).fold(0.0, f64::max);
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generate_algebra;
    use crate::linalg::pauli;
    use crate::random::{random_matrix, random_unitary};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn commutative_algebra_has_dim_many_minimal_projections() {
        // Diagonal algebras with repeated entries, hidden behind a unitary.
        let mut rng = crate::random::rng_from_seed(8);
        for (diag, dim) in [(vec![1.0, 1.0, 2.0, 0.0], 2), (vec![1.0, 2.0, 3.0, 3.0, 0.0], 3), (vec![5.0; 3], 1)] {
            let v = random_unitary(&mut rng, diag.len());
            let a = generate_algebra(&[v.conjugate(&ComplexMatrix::diag(&diag))], &tol()).unwrap();
            assert!(a.is_commutative(1e-10));
            assert_eq!(a.dim(), dim);
            let ps = central_projections(&a, 0, &tol()).unwrap();
            assert_eq!(ps.len(), a.dim());
            let st = structure_decomposition(&a, 0, &tol()).unwrap();
            assert!(st.blocks.iter().all(|b| b.n == 1));
        }
    }

    #[test]
    fn diagonal_projections() {
        let a = generate_algebra(&[ComplexMatrix::diag(&[1.0, 2.0, 3.0])], &tol()).unwrap();
        let ps = central_projections(&a, 0, &tol()).unwrap();
        assert_eq!(ps.len(), 3);
        let mut found = [false; 3];
        for p in &ps {
            for (k, f) in found.iter_mut().enumerate() {
                let mut e = [0.0; 3];
                e[k] = 1.0;
                if p.distance(&ComplexMatrix::diag(&e)) < 1e-10 {
                    *f = true;
                }
            }
        }
        assert_eq!(found, [true; 3]);
    }

    #[test]
    fn factor_has_one_projection() {
        let a = MatrixAlgebra::full(3);
        let ps = central_projections(&a, 5, &tol()).unwrap();
        assert_eq!(ps.len(), 1);
        assert!(ps[0].distance(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn full_algebra_factor() {
        let f = factor_decomposition(&MatrixAlgebra::full(3), 0, &tol()).unwrap();
        assert_eq!((f.m, f.n), (1, 3));
        assert!(f.u.distance(&ComplexMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn multiplicity_two_factor() {
        let i2 = ComplexMatrix::identity(2);
        let a = generate_algebra(&[kron(&i2, &pauli(1)), kron(&i2, &pauli(3))], &tol()).unwrap();
        let f = factor_decomposition(&a, 3, &tol()).unwrap();
        assert_eq!((f.m, f.n), (2, 2));
        // The algebra is already in the target form; the recovered basis
        // change may differ from the identity only by a gauge V ⊗ W.
        for b in a.basis() {
            let c = &(&f.u * b) * &f.u.adjoint();
            let reduced = partial_trace(&c, (2, 2), Subsystem::B).unwrap().scale(0.5);
            assert!(c.distance(&kron(&i2, &reduced)) < 1e-10);
        }
    }

    #[test]
    fn non_factor_is_rejected() {
        let a = generate_algebra(&[ComplexMatrix::diag(&[1.0, 2.0])], &tol()).unwrap();
        assert!(matches!(factor_decomposition(&a, 0, &tol()), Err(Error::NotAFactor(_))));
    }

    #[test]
    fn diagonal_structure_is_trivial() {
        let a = generate_algebra(&[ComplexMatrix::diag(&[3.0, 1.0, 2.0])], &tol()).unwrap();
        let st = structure_decomposition(&a, 0, &tol()).unwrap();
        assert_eq!(st.signature(), vec![(1, 1); 3]);
        assert_eq!(st.d0, 0);
        assert!(st.u.distance(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(st.residual < 1e-12);
    }

    #[test]
    fn hidden_unitary_two_blocks() {
        let mut rng = rng_from_seed(50);
        // (m, n) = (1, 2) plus (2, 1) plus a zero: d = 2 + 2 + 1.
        let gens: Vec<ComplexMatrix> = (0..2)
            .map(|_| {
                let x = random_matrix(&mut rng, 2, 2);
                let y = random_matrix(&mut rng, 1, 1);
                direct_sum(&[x, kron(&ComplexMatrix::identity(2), &y), ComplexMatrix::zeros(1, 1)]).unwrap()
            })
            .collect();
        let v = random_unitary(&mut rng, 5);
        let hidden: Vec<_> = gens.iter().map(|g| v.conjugate(g)).collect();
        let a = generate_algebra(&hidden, &tol()).unwrap();
        assert_eq!(a.dim(), 5);
        let st = structure_decomposition(&a, 1, &tol()).unwrap();
        assert_eq!(st.signature(), vec![(1, 2), (2, 1)]);
        assert_eq!(st.d0, 1);
        assert!(st.residual < OFF_PATTERN_EPS);
        assert!((&st.u.adjoint() * &st.u).distance(&ComplexMatrix::identity(5)) < 1e-9);
    }

    #[test]
    fn classical_quantum_blocks() {
        // L(Ω) ⊗ B(C²) with |Ω| = 3.
        let mut gens = Vec::new();
        for x in 0..3 {
            let mut e = [0.0; 3];
            e[x] = 1.0;
            for k in [1, 3] {
                gens.push(kron(&ComplexMatrix::diag(&e), &pauli(k)));
            }
        }
        let a = generate_algebra(&gens, &tol()).unwrap();
        let st = structure_decomposition(&a, 0, &tol()).unwrap();
        assert_eq!(st.signature(), vec![(1, 2); 3]);
        assert!(st.u.distance(&ComplexMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn structure_is_deterministic() {
        let mut rng = rng_from_seed(51);
        let g = [random_matrix(&mut rng, 2, 2), ComplexMatrix::identity(2)];
        let g: Vec<_> = g.iter().map(|x| kron(&ComplexMatrix::identity(2), x)).collect();
        let a = generate_algebra(&g, &tol()).unwrap();
        let s1 = structure_decomposition(&a, 9, &tol()).unwrap();
        let s2 = structure_decomposition(&a, 9, &tol()).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn zero_algebra_is_all_kernel() {
        let a = crate::algebra::generate_algebra_in(2, &[], &tol()).unwrap();
        let st = structure_decomposition(&a, 0, &tol()).unwrap();
        assert!(st.blocks.is_empty());
        assert_eq!(st.d0, 2);
    }

    #[test]
    fn embed_inverts_block_parts() {
        let a = generate_algebra(&[ComplexMatrix::diag(&[1.0, 2.0, 0.0])], &tol()).unwrap();
        let st = structure_decomposition(&a, 0, &tol()).unwrap();
        let x = ComplexMatrix::diag(&[4.0, -1.0, 0.0]);
        let back = st.embed(&st.block_parts(&x)).unwrap();
        assert!(back.distance(&x) < 1e-12);
        assert!(st.embed(&[]).is_err());
    }
}
