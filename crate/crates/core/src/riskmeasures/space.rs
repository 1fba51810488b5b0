use crate::error::{Error, Result};

/// Tolerance on `Σ p_i = 1` and on `E_P[dQ/dP] = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Finitely many states with strictly positive probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbSpace {
    probs: Vec<f64>,
}

impl FiniteProbSpace {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilitySpace("no states".into()));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidProbabilitySpace(format!(
                "probability of state {i} must be positive, got {p}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidProbabilitySpace(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProbabilitySpace("no states".into()));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `E_P[v]`.
    pub fn expect(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.len());
        self.probs.iter().zip(v).map(|(p, x)| p * x).sum()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: n,
            });
        }
        Ok(())
    }
}

/// A strictly positive value per state.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRandomVariable {
    values: Vec<f64>,
}

impl PositiveRandomVariable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidRandomVariable("no states".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidRandomVariable(format!(
                "value in state {i} must be positive and finite, got {v}"
            )));
        }
        Ok(Self { values })
    }

    pub fn constant(c: f64, n: usize) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// `exp(z)` componentwise; fails if a component over- or underflows.
    pub fn from_logs(z: &[f64]) -> Result<Self> {
        Self::new(z.iter().map(|v| v.exp()).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ln_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.ln()).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A probability measure `Q << P` given by its density `dQ/dP`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMeasure {
    density: Vec<f64>,
}

impl ScenarioMeasure {
    pub fn new(density: Vec<f64>, p: &FiniteProbSpace) -> Result<Self> {
        if density.len() != p.len() {
            return Err(Error::InvalidScenario(format!(
                "density has {} entries for {} states",
                density.len(),
                p.len()
            )));
        }
        if let Some(d) = density.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "density must be finite and nonnegative, got {d}"
            )));
        }
        let mass = p.expect(&density);
        if (mass - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidScenario(format!("E_P[dQ/dP] = {mass}, not 1")));
        }
        Ok(Self { density })
    }

    /// The measure `Q = P`.
    pub fn base(p: &FiniteProbSpace) -> Self {
        Self {
            density: vec![1.0; p.len()],
        }
    }

    /// Point mass on state `i`.
    pub fn dirac(i: usize, p: &FiniteProbSpace) -> Result<Self> {
        if i >= p.len() {
            return Err(Error::InvalidScenario(format!(
                "state {i} out of range for {} states",
                p.len()
            )));
        }
        let mut density = vec![0.0; p.len()];
        density[i] = 1.0 / p.probs()[i];
        Ok(Self { density })
    }

    /// Measure with probabilities `q` (must sum to 1).
    pub fn from_probs(q: &[f64], p: &FiniteProbSpace) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::InvalidScenario(format!(
                "{} probabilities for {} states",
                q.len(),
                p.len()
            )));
        }
        let density = q.iter().zip(p.probs()).map(|(q, p)| q / p).collect();
        Self::new(density, p)
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// `q_i = p_i · dQ/dP(i)`.
    pub fn probs(&self, p: &FiniteProbSpace) -> Vec<f64> {
        self.density.iter().zip(p.probs()).map(|(d, p)| d * p).collect()
    }

    /// Relative entropy `H(Q, P) = E_P[(dQ/dP) ln(dQ/dP)]`.
    pub fn relative_entropy(&self, p: &FiniteProbSpace) -> f64 {
        self.density
            .iter()
            .zip(p.probs())
            .map(|(&d, &pi)| if d > 0.0 { pi * d * d.ln() } else { 0.0 })
            .sum()
    }
}
