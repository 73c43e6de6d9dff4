use super::choi::{choi_to_kraus, kraus_to_choi};
use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, pseudo_inverse, ComplexMatrix, Subsystem, Tolerances};

/// Allowed disagreement of two channels on an operator basis before no
/// intertwiner is attempted.
pub const SAME_CHANNEL_EPS: f64 = 1e-8;

/// `V : C^{d_A} → C^{d_B} ⊗ C^{d_E}` with rows indexed `b·d_E + e`.
#[derive(Clone, Debug, PartialEq)]
pub struct StinespringIsometry {
    v: ComplexMatrix,
    dim_out: usize,
    dim_env: usize,
}

impl StinespringIsometry {
    pub fn new(v: ComplexMatrix, dim_out: usize, dim_env: usize) -> Result<Self> {
        if dim_out == 0 || dim_env == 0 || v.cols() == 0 || v.rows() != dim_out * dim_env {
            return Err(Error::Dimension(format!(
                "V is {:?}, expected {} rows (d_B = {dim_out}, d_E = {dim_env})",
                v.shape(),
                dim_out * dim_env
            )));
        }
        Ok(Self { v, dim_out, dim_env })
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn dim_in(&self) -> usize {
        self.v.cols()
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    /// `‖V†V − 1‖_F`; zero iff the dilated map is trace preserving.
    pub fn isometry_residual(&self) -> f64 {
        (&self.v.adjoint() * &self.v).distance(&ComplexMatrix::identity(self.dim_in()))
    }

    /// `Tr_E(VρV†)`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in(), self.dim_in()) {
            return Err(Error::Dimension(format!(
                "dilation input is {}, operand is {:?}",
                self.dim_in(),
                rho.shape()
            )));
        }
        partial_trace(&self.v.conjugate(rho), (self.dim_out, self.dim_env), Subsystem::A)
    }

    /// `V†(X ⊗ 1)V`.
    pub fn adjoint_apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::Dimension(format!(
                "dilation output is {}, operand is {:?}",
                self.dim_out,
                x.shape()
            )));
        }
        let lifted = kron(x, &ComplexMatrix::identity(self.dim_env));
        Ok(&(&self.v.adjoint() * &lifted) * &self.v)
    }

    /// Kraus operators `Eᵢ = (1 ⊗ ⟨i|)V`.
    pub fn to_kraus(&self) -> KrausChannel {
        let (db, de, da) = (self.dim_out, self.dim_env, self.dim_in());
        let kraus = (0..de)
            .map(|i| ComplexMatrix::from_fn(db, da, |b, a| self.v.get(b * de + i, a)))
            .collect();
        KrausChannel::new(da, db, kraus).expect("blocks have shape d_B x d_A")
    }
}

/// `V = Σᵢ Eᵢ ⊗ |i⟩_E` over a minimal Kraus family, so `d_E` is the Kraus
/// rank. Dependent Kraus operators are first replaced by the Choi
/// eigen-decomposition.
pub fn stinespring_dilate(ch: &KrausChannel, tol: &Tolerances) -> Result<StinespringIsometry> {
    let minimal = if ch.is_minimal(tol) {
        ch.clone()
    } else {
        choi_to_kraus(&kraus_to_choi(ch), tol)?
    };
    let (da, db, de) = (minimal.dim_in(), minimal.dim_out(), minimal.kraus().len());
    let v = ComplexMatrix::from_fn(db * de, da, |r, a| minimal.kraus()[r % de].get(r / de, a));
    StinespringIsometry::new(v, db, de)
}

/// A map `W : H_{E₁} → H_{E₂}` with `V₂ = (1 ⊗ W)V₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Intertwiner {
    pub w: ComplexMatrix,
    /// `‖(1 ⊗ W)V₁ − V₂‖_F`.
    pub residual: f64,
    /// `‖(W†W)² − W†W‖_F`.
    pub partial_isometry_residual: f64,
}

/// Relates two dilations of the same channel.
///
/// `W̃` is the least-squares solution of `W̃ (Xₐ⊗1)V₁|b⟩ = (Xₐ⊗1)V₂|b⟩`
/// over matrix units `Xₐ` and basis vectors `|b⟩`, vanishing off the span
/// of the left-hand vectors. It commutes with `B(H_B) ⊗ 1`, so it equals
/// `1 ⊗ W` and `W = Tr_B(W̃)/d_B`.
pub fn dilation_intertwiner(
    v1: &StinespringIsometry,
    v2: &StinespringIsometry,
    tol: &Tolerances,
) -> Result<Intertwiner> {
    if v1.dim_in() != v2.dim_in() || v1.dim_out() != v2.dim_out() {
        return Err(Error::Dimension("dilations of maps with different dimensions".into()));
    }
    let (da, db) = (v1.dim_in(), v1.dim_out());
    let mut worst: f64 = 0.0;
    for i in 0..db {
        for j in 0..db {
            let x = ComplexMatrix::unit(db, i, j);
            worst = worst.max(v1.adjoint_apply(&x)?.distance(&v2.adjoint_apply(&x)?));
        }
    }
    if worst > SAME_CHANNEL_EPS {
        return Err(Error::NoIntertwiner { residual: worst });
    }

    let (e1, e2) = (v1.dim_env(), v2.dim_env());
    let n = db * db * da;
    let mut lhs = ComplexMatrix::zeros(db * e1, n);
    let mut rhs = ComplexMatrix::zeros(db * e2, n);
    let mut col = 0;
    for i in 0..db {
        for j in 0..db {
            let x = ComplexMatrix::unit(db, i, j);
            let a1 = &kron(&x, &ComplexMatrix::identity(e1)) * v1.v();
            let a2 = &kron(&x, &ComplexMatrix::identity(e2)) * v2.v();
            for b in 0..da {
                lhs.set_block(0, col, &a1.column_at(b));
                rhs.set_block(0, col, &a2.column_at(b));
                col += 1;
            }
        }
    }
    let w_big = &rhs * &pseudo_inverse(&lhs, tol);
    let w = ComplexMatrix::from_fn(e2, e1, |k, l| {
        (0..db).map(|b| w_big.get(b * e2 + k, b * e1 + l)).sum::<crate::linalg::C64>() / db as f64
    });

    let lifted = kron(&ComplexMatrix::identity(db), &w);
    let residual = (&lifted * v1.v()).distance(v2.v());
    let wtw = &w.adjoint() * &w;
    let partial_isometry_residual = (&wtw * &wtw).distance(&wtw);
    Ok(Intertwiner {
        w,
        residual,
        partial_isometry_residual,
    })
}
