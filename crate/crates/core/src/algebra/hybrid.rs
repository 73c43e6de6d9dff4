use super::{structure_decomposition, AlgebraStructure, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{eigh, ComplexMatrix, Tolerances, C64};
use crate::quantum::DensityMatrix;

/// A state on `⊕ᵢ 1_{mᵢ} ⊗ M_{nᵢ}` in canonical form
/// `⊕ᵢ pᵢ (1/mᵢ) ⊗ ρᵢ`: a classical distribution `pᵢ` over quantum states
/// `ρᵢ`.
#[derive(Clone, Debug)]
pub struct HybridState {
    pub probs: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub structure: AlgebraStructure,
}

impl HybridState {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.structure.blocks.iter().map(|b| b.m).collect()
    }

    /// The canonical density matrix in ambient coordinates.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let parts: Vec<ComplexMatrix> = self
            .probs
            .iter()
            .zip(&self.states)
            .zip(&self.structure.blocks)
            .map(|((p, rho), b)| rho.matrix().scale(p / b.m as f64))
            .collect();
        self.structure
            .embed(&parts)
            .expect("one part of size n per block")
    }
}

/// Matrix `R` with `Tr(R Bₖ) = f(Bₖ)` for every basis element of the
/// algebra, given the values `f(Bₖ)`.
///
/// `R = Σₖ f(Bₖ) Bₖ†`; on matrix units this is the dyad construction
/// `Σᵢⱼ f(|i⟩⟨j|) |j⟩⟨i|`.
pub fn functional_to_matrix(a: &MatrixAlgebra, values: &[C64]) -> Result<ComplexMatrix> {
    if values.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "{} functional values for an algebra of dimension {}",
            values.len(),
            a.dim()
        )));
    }
    let d = a.ambient_dim();
    Ok(a.basis()
        .iter()
        .zip(values)
        .fold(ComplexMatrix::zeros(d, d), |acc, (b, v)| acc + b.adjoint().scale_complex(*v)))
}

/// Canonical hybrid form of the functional `B ↦ Tr(RB)` on the algebra.
///
/// In the structure basis, `R` is pinched by the central projections and
/// each block is traced over its multiplicity factor; the traces give `pᵢ`
/// and the normalized remainders `ρᵢ`. Blocks with `pᵢ = 0` get the
/// maximally mixed state, which any choice reproduces.
pub fn canonical_state(a: &MatrixAlgebra, r: &ComplexMatrix, seed: u64, tol: &Tolerances) -> Result<HybridState> {
    let d = a.ambient_dim();
    if r.shape() != (d, d) {
        return Err(Error::Dimension(format!("R is {:?}, algebra acts on {d}", r.shape())));
    }
    let structure = structure_decomposition(a, seed, tol)?;
    let reduced: Vec<ComplexMatrix> = structure
        .block_parts(r)
        .into_iter()
        .zip(&structure.blocks)
        .map(|(part, b)| part.scale(b.m as f64))
        .collect();

    let mut probs = Vec::with_capacity(reduced.len());
    for (i, rho) in reduced.iter().enumerate() {
        let residual = rho.hermiticity_residual();
        if residual > tol.eps_herm {
            return Err(Error::NotHermitian { residual });
        }
        let eig = eigh(rho);
        let min = eig.values.first().copied().unwrap_or(0.0);
        let scale = eig.values.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        if min < -tol.eps_pos * scale {
            let v = eig.vectors.column_at(0);
            let effect = structure.embed_single(i, &ComplexMatrix::dyad(&v, &v))?;
            return Err(Error::NotPositiveFunctional { value: min, effect });
        }
        probs.push(rho.trace().re.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { value: total });
    }

    let states = reduced
        .iter()
        .zip(&probs)
        .zip(&structure.blocks)
        .map(|((rho, p), b)| {
            if *p > tol.eps_pos {
                DensityMatrix::new_unchecked(rho.scale(1.0 / rho.trace().re))
            } else {
                DensityMatrix::new_unchecked(ComplexMatrix::identity(b.n).scale(1.0 / b.n as f64))
            }
        })
        .collect();
    Ok(HybridState {
        probs,
        states,
        structure,
    })
}
