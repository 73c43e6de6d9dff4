use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::matrix::{hs_inner_unchecked, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Numerical slack used by every tolerance-aware decision.
///
/// `eps_pos` and `eps_cluster` are relative to `max(1, ‖A‖)`; `eps_rank` is
/// relative to the largest singular value (or input norm) involved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_herm: f64,
    pub eps_pos: f64,
    pub eps_rank: f64,
    pub eps_cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_herm: 1e-10,
            eps_pos: 1e-10,
            eps_rank: 1e-10,
            eps_cluster: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_herm, self.eps_pos, self.eps_rank, self.eps_cluster];
        if all.iter().all(|e| e.is_finite() && *e > 0.0) {
            Ok(())
        } else {
            Err(Error::Format(format!("tolerances must be strictly positive: {self:?}")))
        }
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition of the Hermitian part of `a`, sorted ascending.
pub fn eigh(a: &ComplexMatrix) -> Eigh {
    let n = a.rows();
    let h = a.hermitian_part().into_nalgebra();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh {
        values,
        vectors: ComplexMatrix::from_nalgebra(vectors),
    }
}

fn spectral_scale(values: &[f64]) -> f64 {
    values.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

/// Outcome of a positivity test together with its certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Positivity {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub hermiticity_residual: f64,
}

/// Checks `A ≥ 0`: Hermitian within `eps_herm` and smallest eigenvalue at
/// least `−eps_pos·max(1, ‖A‖)`.
pub fn is_positive(a: &ComplexMatrix, tol: &Tolerances) -> Result<Positivity> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("positivity of a {}x{} matrix", a.rows(), a.cols())));
    }
    let hermiticity_residual = a.hermiticity_residual();
    let values = eigh(a).values;
    let min_eigenvalue = values.first().copied().unwrap_or(0.0);
    let positive = hermiticity_residual <= tol.eps_herm
        && min_eigenvalue >= -tol.eps_pos * spectral_scale(&values);
    Ok(Positivity {
        positive,
        min_eigenvalue,
        hermiticity_residual,
    })
}

/// `A = Σᵢ aᵢ Pᵢ` with distinct eigenvalues `aᵢ` (ascending) and orthogonal
/// spectral projectors `Pᵢ`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
    /// Largest distance between two raw eigenvalues merged into one cluster.
    pub cluster_spread: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors
            .iter()
            .map(|p| p.trace().re.round() as usize)
            .collect()
    }

    /// `Σᵢ aᵢ Pᵢ`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.projectors.first().map_or(0, ComplexMatrix::rows);
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(ComplexMatrix::zeros(n, n), |acc, (a, p)| acc + p.scale(*a))
    }

    /// Applies a real function to the spectrum: `Σᵢ f(aᵢ) Pᵢ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.projectors.first().map_or(0, ComplexMatrix::rows);
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(ComplexMatrix::zeros(n, n), |acc, (a, p)| acc + p.scale(f(*a)))
    }
}

/// Groups of consecutive (sorted) eigenvalue indices separated by more than
/// `gap`. Merging is transitive.
fn cluster_indices(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > gap {
            if k > start {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

fn projector_from_columns(vectors: &ComplexMatrix, cols: std::ops::Range<usize>) -> ComplexMatrix {
    let v = vectors.submatrix(0, cols.start, vectors.rows(), cols.len());
    (&v * &v.adjoint()).hermitian_part()
}

pub fn spectral_decomposition(a: &ComplexMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("spectral decomposition of a {}x{} matrix", a.rows(), a.cols())));
    }
    let residual = a.hermiticity_residual();
    if residual > tol.eps_herm {
        return Err(Error::NotHermitian { residual });
    }
    let eig = eigh(a);
    let gap = tol.eps_cluster * spectral_scale(&eig.values);
    let mut sd = SpectralDecomposition {
        eigenvalues: Vec::new(),
        projectors: Vec::new(),
        cluster_spread: Vec::new(),
    };
    for range in cluster_indices(&eig.values, gap) {
        let members = &eig.values[range.clone()];
        sd.eigenvalues.push(members.iter().sum::<f64>() / members.len() as f64);
        sd.cluster_spread.push(members[members.len() - 1] - members[0]);
        sd.projectors.push(projector_from_columns(&eig.vectors, range));
    }
    Ok(sd)
}

/// Spectral projectors of the nonzero eigenvalues of `A`, built from the
/// polynomial formula `Pⱼ = Πᵢ≠ⱼ (A − aᵢ1_A)/(aⱼ − aᵢ)`.
///
/// `1_A` is the range projector of `A`. The result is ordered like the
/// nonzero eigenvalues of [`spectral_decomposition`] (ascending) and is
/// returned alongside them.
pub fn lagrange_projectors(a: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<(f64, ComplexMatrix)>> {
    let sd = spectral_decomposition(a, tol)?;
    let scale = spectral_scale(&sd.eigenvalues);
    let gap = tol.eps_cluster * scale;
    if let Some(spread) = sd.cluster_spread.iter().copied().find(|s| *s > gap) {
        // Transitive merging chained several eigenvalues that are not
        // degenerate within tolerance; the distinct values are ill defined.
        return Err(Error::IllConditioned { gap: spread });
    }
    let nonzero: Vec<usize> = (0..sd.len()).filter(|&i| sd.eigenvalues[i].abs() > gap).collect();
    let n = a.rows();
    let unit = nonzero
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, &i| acc + &sd.projectors[i]);
    let h = a.hermitian_part();

    let mut out = Vec::with_capacity(nonzero.len());
    for &j in &nonzero {
        let aj = sd.eigenvalues[j];
        let mut others: Vec<f64> = nonzero
            .iter()
            .filter(|&&i| i != j)
            .map(|&i| sd.eigenvalues[i])
            .collect();
        others.sort_by(|x, y| (aj - x).abs().total_cmp(&(aj - y).abs()));
        if let Some(closest) = others.first() {
            if (aj - closest).abs() <= gap {
                return Err(Error::IllConditioned { gap: (aj - closest).abs() });
            }
        }
        let mut p = unit.clone();
        for ai in others {
            let factor = (&h - &unit.scale(ai)).scale(1.0 / (aj - ai));
            p = &p * &factor;
        }
        out.push((aj, p));
    }
    Ok(out)
}

/// Range projector `A⁰` of a Hermitian matrix.
pub fn range_projector(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let sd = spectral_decomposition(a, tol)?;
    let gap = tol.eps_cluster * spectral_scale(&sd.eigenvalues);
    let n = a.rows();
    Ok(sd
        .eigenvalues
        .iter()
        .zip(&sd.projectors)
        .filter(|(v, _)| v.abs() > gap)
        .fold(ComplexMatrix::zeros(n, n), |acc, (_, p)| acc + p))
}

/// Positive square root with the same eigenvectors as `a`.
pub fn matrix_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tol = Tolerances::default();
    let pos = is_positive(a, &tol)?;
    if !pos.positive {
        return Err(Error::NotPositive {
            min_eigenvalue: pos.min_eigenvalue,
        });
    }
    let eig = eigh(a);
    let n = a.rows();
    let d = ComplexMatrix::diag(&eig.values.iter().map(|v| v.max(0.0).sqrt()).collect::<Vec<_>>());
    debug_assert_eq!(d.rows(), n);
    Ok((&eig.vectors * &d * eig.vectors.adjoint()).hermitian_part())
}

/// Hilbert–Schmidt-orthonormal basis of the span of `mats`.
///
/// Modified Gram–Schmidt with one re-orthogonalization pass; an input joins
/// the basis when its residual exceeds `eps_rank` times the largest input
/// norm.
pub fn orthonormalize_span(mats: &[ComplexMatrix], tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, mats, tol)?;
    Ok(basis)
}

/// Extends an existing orthonormal family with the parts of `mats` outside
/// its span. Returns how many elements were added.
pub fn extend_orthonormal(basis: &mut Vec<ComplexMatrix>, mats: &[ComplexMatrix], tol: &Tolerances) -> Result<usize> {
    let Some(shape) = basis.first().or(mats.first()).map(ComplexMatrix::shape) else {
        return Ok(0);
    };
    if let Some(m) = mats.iter().find(|m| m.shape() != shape) {
        return Err(Error::Dimension(format!("span of {:?} and {:?} matrices", shape, m.shape())));
    }
    let scale = mats.iter().map(ComplexMatrix::frobenius_norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0);
    }
    let before = basis.len();
    for m in mats {
        let mut r = m.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = hs_inner_unchecked(b, &r);
                r = &r - &b.scale_complex(c);
            }
        }
        let norm = r.frobenius_norm();
        if norm > tol.eps_rank * scale {
            basis.push(r.scale(1.0 / norm));
        }
    }
    Ok(basis.len() - before)
}

/// Number of singular values at least `eps_rank` times the largest.
pub fn numerical_rank(a: &ComplexMatrix, tol: &Tolerances) -> usize {
    let sv = a.as_nalgebra().clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s >= tol.eps_rank * max).count()
}

/// Orthonormal basis (columns) of the range of a projector.
///
/// Column-pivoted Gram–Schmidt over the projector's columns, ties broken by
/// the lowest index. For a projector onto coordinate vectors this returns
/// exactly those coordinate vectors.
pub fn projector_basis(p: &ComplexMatrix) -> ComplexMatrix {
    let n = p.rows();
    let rank = p.trace().re.round().max(0.0) as usize;
    let mut cols: Vec<ComplexMatrix> = (0..n).map(|j| p.column_at(j)).collect();
    let mut chosen: Vec<ComplexMatrix> = Vec::with_capacity(rank);
    for _ in 0..rank {
        let (best, _) = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.frobenius_norm()))
            .fold((usize::MAX, -1.0), |acc, (j, nrm)| if nrm > acc.1 + 1e-12 { (j, nrm) } else { acc });
        let mut q = cols[best].clone();
        for b in &chosen {
            let c = hs_inner_unchecked(b, &q);
            q = &q - &b.scale_complex(c);
        }
        let nq = q.frobenius_norm();
        let q = q.scale(1.0 / nq);
        for c in cols.iter_mut() {
            let coef = hs_inner_unchecked(&q, c);
            *c = &*c - &q.scale_complex(coef);
        }
        chosen.push(q);
    }
    let mut out = ComplexMatrix::zeros(n, rank);
    for (k, q) in chosen.iter().enumerate() {
        out.set_block(0, k, q);
    }
    out
}

/// Extends orthonormal columns to a square unitary by appending the
/// orthogonal complement.
pub fn complete_to_unitary(cols: &ComplexMatrix) -> ComplexMatrix {
    let (n, r) = cols.shape();
    let complement = &ComplexMatrix::identity(n) - &(cols * &cols.adjoint());
    let extra = projector_basis(&complement.hermitian_part());
    let mut u = ComplexMatrix::zeros(n, n);
    u.set_block(0, 0, cols);
    u.set_block(0, r, &extra);
    u
}

/// Moore–Penrose pseudo-inverse with singular values below
/// `eps_rank·σ_max` treated as zero.
pub fn pseudo_inverse(a: &ComplexMatrix, tol: &Tolerances) -> ComplexMatrix {
    let (r, c) = a.shape();
    let svd = a.as_nalgebra().clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut out = DMatrix::<C64>::zeros(c, r);
    for (k, s) in svd.singular_values.iter().enumerate() {
        if max > 0.0 && *s >= tol.eps_rank * max {
            let uk = u.column(k);
            let vk = vt.row(k).adjoint();
            out += (vk * uk.adjoint()) * C64::new(1.0 / s, 0.0);
        }
    }
    ComplexMatrix::from_nalgebra(out)
}

/// Orthonormal basis (columns) of `{x : Mx ≈ 0}`: right singular vectors
/// whose singular value is at most `threshold`.
pub fn null_space(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let (rows, n) = m.shape();
    let padded = if rows < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.set_block(0, 0, m);
        p
    } else {
        m.clone()
    };
    let svd = padded.into_nalgebra().svd(false, true);
    let vt = svd.v_t.unwrap();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= threshold)
        .collect();
    let mut out = ComplexMatrix::zeros(n, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        for i in 0..n {
            out.set(i, col, vt[(k, i)].conj());
        }
    }
    out
}

/// Frobenius norm of the residual of `x` after projection onto the span of
/// an orthonormal family.
pub fn span_residual(basis: &[ComplexMatrix], x: &ComplexMatrix) -> f64 {
    let mut r = x.clone();
    for b in basis {
        let c = hs_inner_unchecked(b, &r);
        r = &r - &b.scale_complex(c);
    }
    r.frobenius_norm()
}
