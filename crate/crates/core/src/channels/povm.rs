use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::classical::StochasticMatrix;
use super::kraus::{adjoint_apply, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{is_positive, spectral_decomposition, ComplexMatrix, Tolerances};
use crate::quantum::{DensityMatrix, Effect, NORMALIZATION_EPS};
use crate::random::rng_from_seed;

/// Threshold on `‖Σ Aᵢ − 1‖_F`.
pub const COMPLETENESS_EPS: f64 = 1e-8;
/// Threshold on `‖E² − E‖_F` for an effect to count as a projector.
pub const SHARP_EPS: f64 = 1e-8;
/// Negative probabilities down to this value are clipped to zero.
pub const PROBABILITY_CLIP: f64 = 1e-12;

/// Labeled effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    outcomes: Vec<String>,
    effects: Vec<Effect>,
}

impl Povm {
    pub fn new(outcomes: Vec<String>, effects: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        if effects.is_empty() || outcomes.len() != effects.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        let d = effects[0].rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (label, e) in outcomes.iter().zip(&effects) {
            if e.shape() != (d, d) {
                return Err(Error::InvalidPovm(format!("effect {label:?} is {:?}, expected {d}x{d}", e.shape())));
            }
            let pos = is_positive(e, tol).map_err(|err| Error::InvalidPovm(format!("effect {label:?}: {err}")))?;
            if !pos.positive {
                return Err(Error::InvalidPovm(format!(
                    "effect {label:?} has eigenvalue {:.3e}",
                    pos.min_eigenvalue
                )));
            }
            sum = sum + e;
        }
        let residual = sum.distance(&ComplexMatrix::identity(d));
        if residual > COMPLETENESS_EPS {
            return Err(Error::InvalidPovm(format!("effects sum to the identity only within {residual:.3e}")));
        }
        // Positivity and completeness give 0 ≤ Aᵢ ≤ 1.
        let effects = effects.into_iter().map(Effect::new_unchecked).collect();
        Ok(Self { outcomes, effects })
    }

    /// Projectors `|i⟩⟨i|` labeled `"0"`, `"1"`, ….
    pub fn computational_basis(d: usize) -> Self {
        Self {
            outcomes: (0..d).map(|i| i.to_string()).collect(),
            effects: (0..d).map(|i| Effect::new_unchecked(ComplexMatrix::unit(d, i, i))).collect(),
        }
    }

    /// `{E, 1 − E}` labeled `"true"`, `"false"`.
    pub fn from_effect(e: &Effect) -> Self {
        Self {
            outcomes: vec!["true".into(), "false".into()],
            effects: vec![e.clone(), e.complement()],
        }
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        self.effects
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, e| acc + e.matrix())
            .distance(&ComplexMatrix::identity(d))
    }
}

/// Born rule `pᵢ = Tr(Aᵢρ)`.
pub fn measure(rho: &DensityMatrix, m: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != m.dim() {
        return Err(Error::Dimension(format!("state is {}-dimensional, POVM is {}", rho.dim(), m.dim())));
    }
    let mut p = Vec::with_capacity(m.len());
    for (label, e) in m.outcomes.iter().zip(&m.effects) {
        let x = crate::linalg::hs_inner_unchecked(e.matrix(), rho.matrix()).re;
        if x < -PROBABILITY_CLIP {
            return Err(Error::InvalidDistribution(format!("outcome {label:?} has probability {x:.3e}")));
        }
        p.push(x.max(0.0));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > NORMALIZATION_EPS {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {s}")));
    }
    Ok(p.into_iter().map(|x| x / s).collect())
}

/// Counts of `n` independent outcomes drawn from [`measure`], with a
/// generator seeded from `seed` alone.
pub fn sample_outcomes(rho: &DensityMatrix, m: &Povm, n: u64, seed: u64) -> Result<Vec<u64>> {
    let p = measure(rho, m)?;
    let mut counts = vec![0u64; p.len()];
    let dist = WeightedIndex::new(&p).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rng = rng_from_seed(seed);
    for _ in 0..n {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts)
}

fn eigenvalue_label(a: f64) -> String {
    let r = (a * 1e12).round() / 1e12;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// Spectral projectors of `a` labeled by their eigenvalues, in descending
/// order.
pub fn observable_from_hermitian(a: &ComplexMatrix, tol: &Tolerances) -> Result<Povm> {
    let sd = spectral_decomposition(a, tol)?;
    let (outcomes, effects) = sd
        .eigenvalues
        .iter()
        .zip(sd.projectors)
        .rev()
        .map(|(v, p)| (eigenvalue_label(*v), Effect::new_unchecked(p)))
        .unzip();
    Ok(Povm { outcomes, effects })
}

/// `E_β = Σ_α π_{βα} A_α`, labeled `"0"`, `"1"`, ….
pub fn coarse_grain(m: &Povm, pi: &StochasticMatrix) -> Result<Povm> {
    if pi.cols() != m.len() {
        return Err(Error::Dimension(format!(
            "stochastic matrix has {} inputs, POVM has {} outcomes",
            pi.cols(),
            m.len()
        )));
    }
    let d = m.dim();
    let effects = (0..pi.rows())
        .map(|b| {
            let e = m
                .effects
                .iter()
                .enumerate()
                .fold(ComplexMatrix::zeros(d, d), |acc, (a, e)| acc + e.matrix().scale(pi.entry(b, a)));
            Effect::new_unchecked(e)
        })
        .collect();
    Ok(Povm {
        outcomes: (0..pi.rows()).map(|b| b.to_string()).collect(),
        effects,
    })
}

/// Whether every effect is a projector.
pub fn is_sharp(m: &Povm) -> bool {
    m.effects.iter().all(|e| {
        let x = e.matrix();
        (x * x).distance(x) < SHARP_EPS
    })
}

/// `ℰ†(X)`, the effect measured on the input when `X` is measured on the
/// output.
pub fn accessible_effect(ch: &KrausChannel, x: &Effect, tol: &Tolerances) -> Result<Effect> {
    Effect::new(adjoint_apply(ch, x.matrix())?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::random::{random_density, random_hermitian, random_unitary, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn state(m: ComplexMatrix) -> DensityMatrix {
        DensityMatrix::new(m, &tol()).unwrap()
    }

    fn effect(m: ComplexMatrix) -> Effect {
        Effect::new(m, &tol()).unwrap()
    }

    #[test]
    fn basis_measurement_reads_diagonal() {
        let mut rng = rng_from_seed(100);
        let rho = state(random_density(&mut rng, 3));
        let p = measure(&rho, &Povm::computational_basis(3)).unwrap();
        for (k, x) in p.iter().enumerate() {
            assert!((x - rho.matrix().get(k, k).re).abs() < 1e-14);
        }
    }

    #[test]
    fn effect_observable() {
        let mut rng = rng_from_seed(101);
        let rho = state(random_density(&mut rng, 2));
        let e = effect(ComplexMatrix::real(&[[0.6, 0.2], [0.2, 0.3]]));
        let p = measure(&rho, &Povm::from_effect(&e)).unwrap();
        let t = (e.matrix() * rho.matrix()).trace().re;
        assert!((p[0] - t).abs() < 1e-14 && (p[1] - (1.0 - t)).abs() < 1e-14);
    }

    #[test]
    fn sharp_observable_probabilities() {
        let mut rng = rng_from_seed(102);
        let a = random_hermitian(&mut rng, 3);
        let rho = state(random_density(&mut rng, 3));
        let m = observable_from_hermitian(&a, &tol()).unwrap();
        let p = measure(&rho, &m).unwrap();
        for (e, x) in m.effects().iter().zip(&p) {
            assert!(((e.matrix() * rho.matrix()).trace().re - x).abs() < 1e-12);
        }
        assert!(m.completeness_residual() < 1e-10);
        assert!(is_sharp(&m));
    }

    #[test]
    fn sigma_z_observable() {
        let m = observable_from_hermitian(&pauli(3), &tol()).unwrap();
        assert_eq!(m.outcomes(), ["1", "-1"]);
        assert!(m.effects()[0].matrix().distance(&ComplexMatrix::diag(&[1.0, 0.0])) < 1e-14);
        assert!(m.effects()[1].matrix().distance(&ComplexMatrix::diag(&[0.0, 1.0])) < 1e-14);
    }

    #[test]
    fn degenerate_observable_ranks() {
        let mut rng = rng_from_seed(103);
        let u = random_unitary(&mut rng, 4);
        let a = u.conjugate(&ComplexMatrix::diag(&[2.0, 2.0, 2.0, -1.0]));
        let m = observable_from_hermitian(&a, &tol()).unwrap();
        assert_eq!(m.len(), 2);
        let ranks: Vec<f64> = m.effects().iter().map(|e| e.matrix().trace().re).collect();
        assert!((ranks[0] - 3.0).abs() < 1e-10 && (ranks[1] - 1.0).abs() < 1e-10);
        // Sharp effects are mutually orthogonal.
        assert!((m.effects()[0].matrix() * m.effects()[1].matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn invalid_povms() {
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(Povm::new(vec!["a".into()], vec![half.clone()], &tol()).is_err());
        let neg = ComplexMatrix::diag(&[1.5, 1.0]);
        let comp = ComplexMatrix::diag(&[-0.5, 0.0]);
        assert!(Povm::new(vec!["a".into(), "b".into()], vec![neg, comp], &tol()).is_err());
        assert!(Povm::new(vec!["a".into()], vec![half.clone(), half], &tol()).is_err());
    }

    #[test]
    fn sampling() {
        let rho = state(ComplexMatrix::identity(2).scale(0.5));
        let trivial = Povm::new(vec!["all".into()], vec![ComplexMatrix::identity(2)], &tol()).unwrap();
        assert_eq!(sample_outcomes(&rho, &trivial, 1000, 3).unwrap(), vec![1000]);
        let n = 100_000;
        let counts = sample_outcomes(&rho, &Povm::computational_basis(2), n, 0).unwrap();
        let sigma = (n as f64 * 0.25).sqrt();
        for c in &counts {
            assert!((*c as f64 - n as f64 / 2.0).abs() < 5.0 * sigma);
        }
        assert_eq!(counts, sample_outcomes(&rho, &Povm::computational_basis(2), n, 0).unwrap());
    }

    #[test]
    fn coarse_graining() {
        let m = Povm::computational_basis(2);
        let same = coarse_grain(&m, &StochasticMatrix::identity(2)).unwrap();
        assert_eq!(same.effects(), m.effects());
        let merged = coarse_grain(&m, &StochasticMatrix::merge_all(2)).unwrap();
        assert_eq!(merged.len(), 1);
        assert!(merged.effects()[0].matrix().distance(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(coarse_grain(&m, &StochasticMatrix::identity(3)).is_err());
    }

    #[test]
    fn noisy_povm_is_not_sharp() {
        let p = 0.1;
        let m = Povm::computational_basis(2);
        let noisy = coarse_grain(&m, &StochasticMatrix::binary_symmetric(p).unwrap()).unwrap();
        let expected = ComplexMatrix::diag(&[1.0 - p, p]);
        assert!(noisy.effects()[0].matrix().distance(&expected) < 1e-15);
        assert!(!is_sharp(&noisy));
        let halves = Povm::new(
            vec!["a".into(), "b".into()],
            vec![ComplexMatrix::identity(2).scale(0.5), ComplexMatrix::identity(2).scale(0.5)],
            &tol(),
        )
        .unwrap();
        assert!(!is_sharp(&halves));
        assert!(is_sharp(&m));
    }

    #[test]
    fn dephasing_accessible_effects_commute() {
        let mut rng = rng_from_seed(104);
        let ch = KrausChannel::dephasing(3);
        let x = effect(random_density(&mut rng, 3));
        let y = effect(random_density(&mut rng, 3));
        let ax = accessible_effect(&ch, &x, &tol()).unwrap();
        let ay = accessible_effect(&ch, &y, &tol()).unwrap();
        assert!(ax.matrix().commutator(ay.matrix()).frobenius_norm() < 1e-12);
        let diag: Vec<f64> = (0..3).map(|i| x.matrix().get(i, i).re).collect();
        assert!(ax.matrix().distance(&ComplexMatrix::diag(&diag)) < 1e-14);
    }

    #[test]
    fn unitary_accessible_effect_keeps_spectrum() {
        let mut rng = rng_from_seed(105);
        let u = random_unitary(&mut rng, 3);
        let x = effect(random_density(&mut rng, 3));
        let ax = accessible_effect(&KrausChannel::unitary(u).unwrap(), &x, &tol()).unwrap();
        let (a, b) = (crate::linalg::eigh(x.matrix()).values, crate::linalg::eigh(ax.matrix()).values);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        let same = accessible_effect(&KrausChannel::identity(3), &x, &tol()).unwrap();
        assert!(same.matrix().distance(x.matrix()) < 1e-15);
    }
}
