use super::space::{FiniteProbSpace, PositiveRandomVariable};
use crate::error::{invalid_param, Error, Result};

pub const ORLICZ_TOL: f64 = 1e-12;
pub const ORLICZ_MAX_ITER: usize = 200;

/// Piecewise-linear `Φ` through `(x, Φ(x))` knots. A repeated abscissa
/// encodes a jump; evaluation takes left limits, so `Φ` is left-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczTable {
    knots: Vec<(f64, f64)>,
}

impl OrliczTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidOrlicz(m));
        if knots.len() < 2 {
            return bad("table needs at least two knots".into());
        }
        if knots
            .iter()
            .any(|(x, v)| !(*x > 0.0) || !x.is_finite() || !v.is_finite())
        {
            return bad("knots need positive finite abscissae and finite values".into());
        }
        for w in knots.windows(2) {
            if w[1].0 < w[0].0 {
                return bad("abscissae must be nondecreasing".into());
            }
            if w[1].1 < w[0].1 {
                return bad(format!("Φ decreases between x = {} and x = {}", w[0].0, w[1].0));
            }
        }
        if knots.windows(3).any(|w| w[0].0 == w[2].0) {
            return bad("an abscissa may appear at most twice".into());
        }
        let t = Self { knots };
        let one = t
            .eval(1.0)
            .map_err(|_| Error::InvalidOrlicz("table must cover x = 1".into()))?;
        if (one - 1.0).abs() > 1e-12 {
            return bad(format!("Φ(1) must be 1, got {one}"));
        }
        Ok(t)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn range(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    /// Left-continuous evaluation; outside the table is an error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::OrliczTableRange { x, lo, hi });
        }
        let k = self.knots.partition_point(|(xk, _)| *xk < x);
        if k == 0 {
            return Ok(self.knots[0].1);
        }
        let (x0, v0) = self.knots[k - 1];
        let (x1, v1) = self.knots[k];
        if x == x1 {
            return Ok(v1);
        }
        Ok(v0 + (v1 - v0) * (x - x0) / (x1 - x0))
    }
}

/// Young-type function with `Φ(1) = 1`, nondecreasing, unbounded above.
#[derive(Debug, Clone, PartialEq)]
pub enum OrliczSpec {
    /// `x^p`, `p > 0`.
    Power {
        p: f64,
    },
    /// `1 + ln x`.
    LogAffine,
    /// `e^{x - 1}`.
    Exponential,
    Table(OrliczTable),
}

impl OrliczSpec {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(invalid_param("p", format!("must be positive, got {p}")));
        }
        Ok(OrliczSpec::Power { p })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            OrliczSpec::Power { p } => Self::power(*p).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        Ok(match self {
            OrliczSpec::Power { p } => x.powf(*p),
            OrliczSpec::LogAffine => 1.0 + x.ln(),
            OrliczSpec::Exponential => (x - 1.0).exp(),
            OrliczSpec::Table(t) => t.eval(x)?,
        })
    }

    /// `E_P[Φ(X / k)]`.
    fn mean_phi(&self, xs: &[f64], p: &FiniteProbSpace, k: f64) -> Result<f64> {
        if let OrliczSpec::LogAffine = self {
            // 1 + E[ln X] - ln k, without forming the ratios.
            let m: f64 = xs.iter().zip(p.probs()).map(|(x, q)| q * x.ln()).sum();
            return Ok(1.0 + m - k.ln());
        }
        let mut acc = 0.0;
        for (x, q) in xs.iter().zip(p.probs()) {
            acc += q * self.phi(x / k)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczPremium {
    pub value: f64,
    pub iterations: usize,
}

/// `H_Φ(X) = inf{k > 0 : E[Φ(X/k)] <= 1}` by bisection on `[min X, max X]`
/// to relative width `tol`.
pub fn orlicz_premium(x: &PositiveRandomVariable, p: &FiniteProbSpace, phi: &OrliczSpec, tol: f64) -> Result<f64> {
    orlicz_premium_detailed(x, p, phi, tol).map(|r| r.value)
}

pub fn orlicz_premium_detailed(
    x: &PositiveRandomVariable,
    p: &FiniteProbSpace,
    phi: &OrliczSpec,
    tol: f64,
) -> Result<OrliczPremium> {
    p.check_len(x.len())?;
    phi.validate()?;
    if !(tol > 0.0) {
        return Err(invalid_param("tol", format!("must be positive, got {tol}")));
    }
    premium_on_slice(x.values(), p, phi, tol)
}

pub(crate) fn premium_on_slice(xs: &[f64], p: &FiniteProbSpace, phi: &OrliczSpec, tol: f64) -> Result<OrliczPremium> {
    let holds = |k: f64| phi.mean_phi(xs, p, k).map(|m| m <= 1.0);
    let mut hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut iterations = 0;
    // Φ flat to the right of 1 can make the constraint hold below min X.
    while holds(lo)? {
        if lo == hi && !matches!(phi, OrliczSpec::Table(_)) {
            // Strictly increasing at 1: a constant X has premium X.
            return Ok(OrliczPremium { value: lo, iterations });
        }
        hi = lo;
        lo *= 0.5;
        iterations += 1;
        if iterations >= ORLICZ_MAX_ITER {
            return Ok(OrliczPremium { value: hi, iterations });
        }
    }
    while hi - lo > tol * hi && iterations < ORLICZ_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(OrliczPremium { value: hi, iterations })
}
