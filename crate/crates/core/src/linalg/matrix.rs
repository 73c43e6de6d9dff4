use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix.
///
/// Operators, states, effects, Kraus operators and isometries are all
/// carried by this type. Column vectors are matrices with one column.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

/// Which tensor factor of a bipartite space `A ⊗ B` an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, data),
        })
    }

    /// Builds a matrix from a list of rows, all of the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, &flat)
    }

    /// Real matrix from rows; convenient for literals.
    pub fn real<const N: usize>(rows: &[[f64; N]]) -> Self {
        Self::from_fn(rows.len(), N, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    pub fn diag_complex(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn column(entries: &[C64]) -> Self {
        Self {
            inner: DMatrix::from_column_slice(entries.len(), 1, entries),
        }
    }

    pub fn basis_vector(n: usize, k: usize) -> Self {
        Self::from_fn(n, 1, |i, _| if i == k { ONE } else { ZERO })
    }

    /// The matrix unit `|i⟩⟨j|` in dimension `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, ONE);
        m
    }

    /// Outer product `|a⟩⟨b|` of two column vectors.
    pub fn dyad(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        a * &b.adjoint()
    }

    pub fn from_nalgebra(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.inner[(i, j)] = value;
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn column_at(&self, j: usize) -> ComplexMatrix {
        self.submatrix(0, j, self.rows(), 1)
    }

    pub fn submatrix(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> ComplexMatrix {
        Self {
            inner: self.inner.view((row, col), (nrows, ncols)).into_owned(),
        }
    }

    pub fn set_block(&mut self, row: usize, col: usize, block: &ComplexMatrix) {
        self.inner
            .view_mut((row, col), block.shape())
            .copy_from(&block.inner);
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn trace(&self) -> C64 {
        let n = self.rows().min(self.cols());
        (0..n).map(|i| self.inner[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.inner.is_empty() {
            return 0.0;
        }
        self.inner
            .clone()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: f64) -> ComplexMatrix {
        Self {
            inner: self.inner.map(|z| z * s),
        }
    }

    pub fn scale_complex(&self, s: C64) -> ComplexMatrix {
        Self {
            inner: self.inner.map(|z| z * s),
        }
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        (self + &self.adjoint()).scale(0.5)
    }

    /// `‖A − A†‖_F / max(1, ‖A‖_F)`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self - &self.adjoint()).frobenius_norm() / self.frobenius_norm().max(1.0)
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        self.hermiticity_residual() <= eps
    }

    /// Frobenius distance `‖A − B‖_F`.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        &(self * other) - &(other * self)
    }

    /// `x ↦ A x A†`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &(self * x) * &self.adjoint()
    }

    pub fn entries(&self) -> impl Iterator<Item = &C64> {
        self.inner.iter()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { inner: &self.inner $op &rhs.inner }
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                &self $op &rhs
            }
        }
        impl $trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                &self $op rhs
            }
        }
        impl $trait<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix {
            inner: -&self.inner,
        }
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        -&self
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    }
}

/// Block-diagonal matrix `B₁ ⊕ B₂ ⊕ …`.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if let Some(b) = blocks.iter().find(|b| !b.is_square()) {
        return Err(Error::Dimension(format!(
            "direct sum block is {}x{}, expected square",
            b.rows(),
            b.cols()
        )));
    }
    let n = blocks.iter().map(ComplexMatrix::rows).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut offset = 0;
    for b in blocks {
        out.set_block(offset, offset, b);
        offset += b.rows();
    }
    Ok(out)
}

/// Hilbert–Schmidt inner product `⟨A, B⟩ = Tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "inner product of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(hs_inner_unchecked(a, b))
}

pub(crate) fn hs_inner_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.inner
        .iter()
        .zip(b.inner.iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Partial trace of an operator on `A ⊗ B`, keeping the subsystem `keep`.
///
/// `Tr_B(Z) = Σⱼ (1 ⊗ ⟨j|) Z (1 ⊗ |j⟩)`, and symmetrically for `Tr_A`.
pub fn partial_trace(z: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !z.is_square() || z.rows() != da * db {
        return Err(Error::Dimension(format!(
            "partial trace with dims ({da}, {db}) of a {}x{} matrix",
            z.rows(),
            z.cols()
        )));
    }
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| z.get(i * db + j, k * db + j)).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| z.get(i * db + j, i * db + l)).sum()
        }),
    };
    Ok(out)
}

/// The Pauli matrices `σ₀ … σ₃`.
pub fn pauli(k: usize) -> ComplexMatrix {
    let m = |a: C64, b: C64, c: C64, d: C64| ComplexMatrix::from_row_major(2, 2, &[a, b, c, d]).unwrap();
    match k {
        0 => ComplexMatrix::identity(2),
        1 => m(ZERO, ONE, ONE, ZERO),
        2 => m(ZERO, -I, I, ZERO),
        3 => m(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {k} out of range"),
    }
}
