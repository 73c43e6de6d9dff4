use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, numerical_rank, projector_basis, ComplexMatrix, Tolerances};
use crate::random::{random_isometry, SeededRng};

/// Threshold on `‖Σ Eᵢ†Eᵢ − 1‖_F` for the trace-preserving flag.
pub const TP_EPS: f64 = 1e-8;

/// A CP map `ρ ↦ Σᵢ Eᵢ ρ Eᵢ†` from `M_{d_A}` to `M_{d_B}`.
///
/// Trace preservation is reported, not enforced, so general CP maps are
/// representable.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Dimension("channel dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::Dimension("at least one Kraus operator is required".into()));
        }
        for (i, e) in kraus.iter().enumerate() {
            if e.shape() != (dim_out, dim_in) {
                return Err(Error::Dimension(format!(
                    "Kraus operator {i} is {:?}, expected ({dim_out}, {dim_in})",
                    e.shape()
                )));
            }
            if !e.is_finite() {
                return Err(Error::Format(format!("Kraus operator {i} has non-finite entries")));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    /// Single Kraus operator `U`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let (r, c) = u.shape();
        Self::new(c, r, vec![u])
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![ComplexMatrix::identity(d)],
        }
    }

    /// Dephasing in the computational basis, Kraus operators `|i⟩⟨i|`.
    pub fn dephasing(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect(),
        }
    }

    /// `ρ ↦ Σᵢ Tr(ρPᵢ)|i⟩⟨i|` for orthogonal projectors `Pᵢ`, with Kraus
    /// operators `|i⟩⟨v|` over an orthonormal basis `v` of each `Pᵢ`.
    pub fn measure_prepare(projectors: &[ComplexMatrix]) -> Result<Self> {
        let Some(d) = projectors.first().map(ComplexMatrix::rows) else {
            return Err(Error::Dimension("no projectors".into()));
        };
        let n = projectors.len();
        let mut kraus = Vec::new();
        for (i, p) in projectors.iter().enumerate() {
            if p.shape() != (d, d) {
                return Err(Error::Dimension(format!("projector {i} is {:?}", p.shape())));
            }
            let basis = projector_basis(&p.hermitian_part());
            for k in 0..basis.cols() {
                kraus.push(ComplexMatrix::dyad(&ComplexMatrix::basis_vector(n, i), &basis.column_at(k)));
            }
        }
        Self::new(d, n, kraus)
    }

    /// `ρ ↦ Tr(ρ) σ`.
    pub fn replacement(d_in: usize, sigma: &ComplexMatrix) -> Result<Self> {
        let eig = eigh(sigma);
        let d_out = sigma.rows();
        let mut kraus = Vec::new();
        for (k, lambda) in eig.values.iter().enumerate() {
            if *lambda <= 0.0 {
                continue;
            }
            let v = eig.vectors.column_at(k).scale(lambda.sqrt());
            for j in 0..d_in {
                kraus.push(ComplexMatrix::dyad(&v, &ComplexMatrix::basis_vector(d_in, j)));
            }
        }
        Self::new(d_in, d_out, kraus)
    }

    /// `ρ ↦ Tr(ρ) 1/d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let kraus = (0..d * d).map(|k| ComplexMatrix::unit(d, k / d, k % d).scale(s)).collect();
        Self {
            dim_in: d,
            dim_out: d,
            kraus,
        }
    }

    /// Random CPTP map: the Kraus operators are the blocks of a random
    /// isometry `C^{d_A} → C^{d_B} ⊗ C^r`.
    pub fn random(rng: &mut SeededRng, dim_in: usize, dim_out: usize, rank: usize) -> Result<Self> {
        if dim_out * rank < dim_in {
            return Err(Error::Dimension(format!(
                "no isometry from {dim_in} into {dim_out} x {rank}"
            )));
        }
        let v = random_isometry(rng, dim_out * rank, dim_in);
        let kraus = (0..rank)
            .map(|i| ComplexMatrix::from_fn(dim_out, dim_in, |b, a| v.get(b * rank + i, a)))
            .collect();
        Self::new(dim_in, dim_out, kraus)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `‖Σ Eᵢ†Eᵢ − 1‖_F`.
    pub fn tp_residual(&self) -> f64 {
        let s = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, e| acc + &e.adjoint() * e);
        s.distance(&ComplexMatrix::identity(self.dim_in))
    }

    /// `‖Σ EᵢEᵢ† − 1‖_F`.
    pub fn unital_residual(&self) -> f64 {
        let s = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_out, self.dim_out), |acc, e| acc + e * &e.adjoint());
        s.distance(&ComplexMatrix::identity(self.dim_out))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.tp_residual() < TP_EPS
    }

    /// Whether the Kraus operators are linearly independent (minimal).
    pub fn is_minimal(&self, tol: &Tolerances) -> bool {
        let n = self.dim_in * self.dim_out;
        let stacked = ComplexMatrix::from_fn(n, self.kraus.len(), |r, c| {
            self.kraus[c].get(r / self.dim_in, r % self.dim_in)
        });
        numerical_rank(&stacked, tol) == self.kraus.len()
    }
}

/// `ℰ(ρ) = Σᵢ Eᵢ ρ Eᵢ†`.
pub fn apply(ch: &KrausChannel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.shape() != (ch.dim_in, ch.dim_in) {
        return Err(Error::Dimension(format!(
            "channel input is {}, operand is {:?}",
            ch.dim_in,
            rho.shape()
        )));
    }
    Ok(ch
        .kraus
        .iter()
        .fold(ComplexMatrix::zeros(ch.dim_out, ch.dim_out), |acc, e| acc + e.conjugate(rho)))
}

/// Heisenberg picture `ℰ†(X) = Σᵢ Eᵢ† X Eᵢ`.
pub fn adjoint_apply(ch: &KrausChannel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if x.shape() != (ch.dim_out, ch.dim_out) {
        return Err(Error::Dimension(format!(
            "channel output is {}, operand is {:?}",
            ch.dim_out,
            x.shape()
        )));
    }
    Ok(ch
        .kraus
        .iter()
        .fold(ComplexMatrix::zeros(ch.dim_in, ch.dim_in), |acc, e| acc + &(&e.adjoint() * x) * e))
}

/// How [`combine`] joins channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    /// `ℰ_n ∘ … ∘ ℰ₁`: the first channel in the list acts first.
    Compose,
    /// `ℰ₁ ⊗ ℰ₂ ⊗ …`.
    Tensor,
    /// `Σₖ pₖ ℰₖ`.
    Mix,
}

/// `outer ∘ inner` with Kraus operators `{FⱼEᵢ}`.
pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
    if inner.dim_out != outer.dim_in {
        return Err(Error::Dimension(format!(
            "cannot feed output {} into input {}",
            inner.dim_out, outer.dim_in
        )));
    }
    let kraus = outer
        .kraus
        .iter()
        .flat_map(|f| inner.kraus.iter().map(move |e| f * e))
        .collect();
    KrausChannel::new(inner.dim_in, outer.dim_out, kraus)
}

/// `ℰ ⊗ ℱ` with Kraus operators `{Eᵢ ⊗ Fⱼ}`.
pub fn tensor(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    KrausChannel {
        dim_in: a.dim_in * b.dim_in,
        dim_out: a.dim_out * b.dim_out,
        kraus: a
            .kraus
            .iter()
            .flat_map(|e| b.kraus.iter().map(move |f| kron(e, f)))
            .collect(),
    }
}

/// Convex combination with Kraus operators `{√pₖ K_{kj}}`.
pub fn mix(channels: &[KrausChannel], weights: &[f64]) -> Result<KrausChannel> {
    if channels.len() != weights.len() || channels.is_empty() {
        return Err(Error::InvalidDistribution(format!(
            "{} weights for {} channels",
            weights.len(),
            channels.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("mixing weights {weights:?}")));
    }
    let (din, dout) = (channels[0].dim_in, channels[0].dim_out);
    let mut kraus = Vec::new();
    for (ch, w) in channels.iter().zip(weights) {
        if (ch.dim_in, ch.dim_out) != (din, dout) {
            return Err(Error::Dimension("mixed channels must share dimensions".into()));
        }
        if *w > 0.0 {
            kraus.extend(ch.kraus.iter().map(|e| e.scale(w.sqrt())));
        }
    }
    KrausChannel::new(din, dout, kraus)
}

/// Joins `channels` according to `mode`; `weights` is required for
/// [`Combine::Mix`] and ignored otherwise.
pub fn combine(mode: Combine, channels: &[KrausChannel], weights: Option<&[f64]>) -> Result<KrausChannel> {
    let Some(first) = channels.first() else {
        return Err(Error::Dimension("no channels to combine".into()));
    };
    match mode {
        Combine::Compose => channels[1..].iter().try_fold(first.clone(), |acc, ch| compose(ch, &acc)),
        Combine::Tensor => Ok(channels[1..].iter().fold(first.clone(), |acc, ch| tensor(&acc, ch))),
        Combine::Mix => mix(
            channels,
            weights.ok_or_else(|| Error::InvalidDistribution("mixing needs weights".into()))?,
        ),
    }
}
