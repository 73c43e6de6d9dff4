use crate::error::{Error, Result};

/// Allowed deviation of a column sum from one.
pub const STOCHASTIC_EPS: f64 = 1e-9;

/// Column-stochastic matrix `π_{βα}`: column `α` is the output distribution
/// for input `α`.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    pi: Vec<Vec<f64>>,
}

impl StochasticMatrix {
    pub fn new(pi: Vec<Vec<f64>>) -> Result<Self> {
        let cols = pi.first().map_or(0, Vec::len);
        if pi.is_empty() || cols == 0 || pi.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidStochastic("rows must be non-empty and of equal length".into()));
        }
        for (b, row) in pi.iter().enumerate() {
            for (a, v) in row.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::InvalidStochastic(format!("entry ({b}, {a}) = {v}")));
                }
            }
        }
        for a in 0..cols {
            let s: f64 = pi.iter().map(|r| r[a]).sum();
            if (s - 1.0).abs() > STOCHASTIC_EPS {
                return Err(Error::InvalidStochastic(format!("column {a} sums to {s}")));
            }
        }
        Ok(Self { pi })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            pi: (0..n).map(|b| (0..n).map(|a| f64::from(u8::from(a == b))).collect()).collect(),
        }
    }

    /// Every input goes to a single output.
    pub fn merge_all(n: usize) -> Self {
        Self { pi: vec![vec![1.0; n]] }
    }

    /// Flips a bit with probability `p`.
    pub fn binary_symmetric(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Number of output symbols.
    pub fn rows(&self) -> usize {
        self.pi.len()
    }

    /// Number of input symbols.
    pub fn cols(&self) -> usize {
        self.pi[0].len()
    }

    pub fn entry(&self, beta: usize, alpha: usize) -> f64 {
        self.pi[beta][alpha]
    }

    pub fn rows_ref(&self) -> &[Vec<f64>] {
        &self.pi
    }

    /// `self ∘ first`, i.e. the matrix product `self · first`.
    pub fn after(&self, first: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.cols() != first.rows() {
            return Err(Error::Dimension(format!(
                "cannot feed {} outputs into {} inputs",
                first.rows(),
                self.cols()
            )));
        }
        let pi = (0..self.rows())
            .map(|g| {
                (0..first.cols())
                    .map(|a| (0..self.cols()).map(|b| self.pi[g][b] * first.pi[b][a]).sum())
                    .collect()
            })
            .collect();
        Ok(Self { pi })
    }
}

/// `q_β = Σ_α π_{βα} p_α`, renormalized against roundoff.
pub fn classical_apply(pi: &StochasticMatrix, p: &[f64]) -> Result<Vec<f64>> {
    if p.len() != pi.cols() {
        return Err(Error::Dimension(format!(
            "distribution of length {} for {} inputs",
            p.len(),
            pi.cols()
        )));
    }
    crate::quantum::check_distribution(p)?;
    let q: Vec<f64> = pi.pi.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum()).collect();
    let s: f64 = q.iter().sum();
    Ok(q.into_iter().map(|x| x / s).collect())
}
