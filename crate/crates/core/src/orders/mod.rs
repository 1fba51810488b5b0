//! Usual, convex, increasing convex and GA-convex stochastic orders on
//! finite discrete distributions.
//!
//! Every decision is exact up to float slack: CDFs are piecewise constant
//! and stop-loss transforms piecewise linear between atoms, so checking the
//! union of both atom sets is complete.

mod consistency;
pub mod generate;

use std::cmp::Ordering;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Zero};

use crate::error::{Error, Result};
use crate::riskmeasures::PROB_SUM_TOL;

pub use consistency::{
    common_embedding, consistency_test, ConsistencyReport, Embedding, CONSISTENCY_TOL, MAX_EMBEDDING_STATES,
};

pub type Rational = Ratio<u64>;

/// Relative distance under which two atoms are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Stop-loss slack, multiplied by `max(1, max |atom|)`.
pub const STOP_LOSS_SLACK: f64 = 1e-12;
/// Relative tolerance on equal means, floored at an absolute `1e-9`.
pub const MEAN_TOL: f64 = 1e-9;
/// CDF differences at or below this are treated as zero.
pub const CDF_TOL: f64 = 1e-12;

/// A probability read from text: exact when given as a fraction or a plain
/// decimal, otherwise a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probability {
    Exact(Rational),
    Float(f64),
}

impl Probability {
    pub fn to_f64(self) -> f64 {
        match self {
            Probability::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Probability::Float(v) => v,
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let den = 10u64.checked_pow(frac.len() as u32)?;
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = int.checked_mul(den)?.checked_add(frac)?;
    Some(Rational::new(num, den))
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
            let d: u64 = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
            if d == 0 {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            return Ok(Probability::Exact(Rational::new(n, d)));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Probability::Exact(r));
        }
        s.parse::<f64>()
            .map(Probability::Float)
            .map_err(|_| Error::Parse(format!("`{s}` is not a probability")))
    }
}

/// Finitely supported distribution with strictly increasing atoms.
///
/// When every probability is known exactly the rational values are kept;
/// they are needed to embed distributions in a common equiprobable space.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

fn same_atom(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs())
}

impl DiscreteDistribution {
    /// Sorts the atoms and merges (near-)duplicates. Probabilities must be
    /// positive and sum to 1 within `1e-12`.
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        Self::build(atoms, probs, None)
    }

    /// As [`DiscreteDistribution::new`], with exact probabilities summing
    /// to exactly 1.
    pub fn from_rational(atoms: Vec<f64>, probs: Vec<Rational>) -> Result<Self> {
        let sum = probs
            .iter()
            .try_fold(Rational::zero(), |acc, p| acc.checked_add(p))
            .ok_or_else(|| Error::InvalidDistribution("rational overflow".into()))?;
        if sum != Rational::one() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}, not 1")));
        }
        let floats = probs.iter().map(|r| Probability::Exact(*r).to_f64()).collect();
        Self::build(atoms, floats, Some(probs))
    }

    /// Mixed exact/float probabilities; exact only if every entry is.
    pub fn from_probabilities(atoms: Vec<f64>, probs: &[Probability]) -> Result<Self> {
        let exact: Option<Vec<Rational>> = probs
            .iter()
            .map(|p| match p {
                Probability::Exact(r) => Some(*r),
                Probability::Float(_) => None,
            })
            .collect();
        match exact {
            Some(r) => Self::from_rational(atoms, r),
            None => Self::new(atoms, probs.iter().map(|p| p.to_f64()).collect()),
        }
    }

    pub fn equiprobable(atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let p = Rational::new(1, atoms.len() as u64);
        let n = atoms.len();
        Self::from_rational(atoms, vec![p; n])
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::from_rational(vec![x], vec![Rational::one()])
    }

    fn build(atoms: Vec<f64>, probs: Vec<f64>, exact: Option<Vec<Rational>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if atoms.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                got: probs.len(),
            });
        }
        if let Some(x) = atoms.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidDistribution(format!("atom {x} is not finite")));
        }
        if let Some(p) = probs.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("probability {p} is not positive")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}, not 1")));
        }

        let mut idx: Vec<usize> = (0..atoms.len()).collect();
        idx.sort_by(|&a, &b| atoms[a].total_cmp(&atoms[b]));
        let mut out_atoms: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut out_probs: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut out_exact: Option<Vec<Rational>> = exact.as_ref().map(|_| Vec::new());
        for i in idx {
            let merge = out_atoms.last().is_some_and(|&a| same_atom(a, atoms[i]));
            if merge {
                *out_probs.last_mut().unwrap() += probs[i];
            } else {
                out_atoms.push(atoms[i]);
                out_probs.push(probs[i]);
            }
            if let (Some(out), Some(ex)) = (out_exact.as_mut(), exact.as_ref()) {
                if merge {
                    let last = out.last_mut().unwrap();
                    *last = last
                        .checked_add(&ex[i])
                        .ok_or_else(|| Error::InvalidDistribution("rational overflow".into()))?;
                } else {
                    out.push(ex[i]);
                }
            }
        }
        if let Some(ex) = &out_exact {
            out_probs = ex.iter().map(|r| Probability::Exact(*r).to_f64()).collect();
        }
        Ok(Self {
            atoms: out_atoms,
            probs: out_probs,
            exact: out_exact,
        })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn exact_probs(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().zip(&self.probs).map(|(x, p)| p * f(*x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    /// Right-continuous CDF `P(X <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= t);
        if k == self.len() {
            1.0
        } else {
            self.probs[..k].iter().sum()
        }
    }

    /// `P(X > t)`, summed directly rather than as `1 - F(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= t);
        self.probs[k..].iter().sum()
    }

    /// `E[(X - t)+]`.
    pub fn stop_loss(&self, t: f64) -> f64 {
        self.expect(|x| (x - t).max(0.0))
    }

    /// `E[(t - X)+]`.
    pub fn lower_stop_loss(&self, t: f64) -> f64 {
        self.expect(|x| (t - x).max(0.0))
    }

    fn require_positive(&self) -> Result<()> {
        if self.min() > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidDistribution(format!(
                "GA orders need positive atoms, found {}",
                self.min()
            )))
        }
    }

    /// Distribution of `ln X`.
    pub fn log(&self) -> Result<Self> {
        self.require_positive()?;
        Ok(Self {
            atoms: self.atoms.iter().map(|x| x.ln()).collect(),
            probs: self.probs.clone(),
            exact: self.exact.clone(),
        })
    }

    /// `exp E[ln X]`.
    pub fn geometric_mean(&self) -> Result<f64> {
        self.require_positive()?;
        Ok(self.expect(f64::ln).exp())
    }
}

/// `E[(X - t)+]`, a finite sum.
pub fn stop_loss(f: &DiscreteDistribution, t: f64) -> f64 {
    f.stop_loss(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    St,
    Cx,
    Icx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaOrder {
    GaCx,
    GaIcx,
}

impl GaOrder {
    fn linear(self) -> Order {
        match self {
            GaOrder::GaCx => Order::Cx,
            GaOrder::GaIcx => Order::Icx,
        }
    }
}

/// Test function whose expectation separates a violating pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `1{x > t}`
    Survival,
    /// `(x - t)+`
    UpperHinge,
    /// `(t - x)+`
    LowerHinge,
}

impl TestFunction {
    pub fn eval(self, x: f64, t: f64) -> f64 {
        match self {
            TestFunction::Survival => f64::from(u8::from(x > t)),
            TestFunction::UpperHinge => (x - t).max(0.0),
            TestFunction::LowerHinge => (t - x).max(0.0),
        }
    }
}

/// `E[test(X; t)] = lhs > rhs = E[test(Y; t)]`. For GA orders `t` and the
/// test function live on the log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub test: TestFunction,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// All knots checked without violation.
    Knots(Vec<f64>),
    Violation(Violation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderVerdict {
    pub holds: bool,
    pub witness: Witness,
}

impl OrderVerdict {
    fn pass(knots: Vec<f64>) -> Self {
        Self {
            holds: true,
            witness: Witness::Knots(knots),
        }
    }

    fn fail(v: Violation) -> Self {
        Self {
            holds: false,
            witness: Witness::Violation(v),
        }
    }

    pub fn violation(&self) -> Option<&Violation> {
        match &self.witness {
            Witness::Violation(v) => Some(v),
            Witness::Knots(_) => None,
        }
    }
}

fn knots(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Vec<f64> {
    let mut k: Vec<f64> = f.atoms.iter().chain(&g.atoms).copied().collect();
    k.sort_by(f64::total_cmp);
    k.dedup();
    k
}

fn atom_scale(f: &DiscreteDistribution, g: &DiscreteDistribution) -> f64 {
    f.atoms.iter().chain(&g.atoms).fold(1.0f64, |m, x| m.max(x.abs()))
}

fn means_equal(mf: f64, mg: f64) -> bool {
    (mf - mg).abs() <= MEAN_TOL * mf.abs().max(mg.abs()).max(1.0)
}

fn first_stop_loss_violation(
    f: &DiscreteDistribution,
    g: &DiscreteDistribution,
    ks: &[f64],
    slack: f64,
) -> Option<Violation> {
    ks.iter().find_map(|&t| {
        let (lhs, rhs) = (f.stop_loss(t), g.stop_loss(t));
        (lhs > rhs + slack).then_some(Violation {
            t,
            test: TestFunction::UpperHinge,
            lhs,
            rhs,
        })
    })
}

/// Decides `F <= G` in the usual (`St`), convex (`Cx`) or increasing convex
/// (`Icx`) order.
pub fn order_leq(f: &DiscreteDistribution, g: &DiscreteDistribution, mode: Order) -> OrderVerdict {
    let ks = knots(f, g);
    let slack = STOP_LOSS_SLACK * atom_scale(f, g);
    match mode {
        Order::St => {
            for &t in &ks {
                let (lhs, rhs) = (f.survival(t), g.survival(t));
                if lhs > rhs + CDF_TOL {
                    return OrderVerdict::fail(Violation {
                        t,
                        test: TestFunction::Survival,
                        lhs,
                        rhs,
                    });
                }
            }
        }
        Order::Icx => {
            if let Some(v) = first_stop_loss_violation(f, g, &ks, slack) {
                return OrderVerdict::fail(v);
            }
        }
        Order::Cx => {
            let (mf, mg) = (f.mean(), g.mean());
            if !means_equal(mf, mg) {
                // A larger mean shows below every atom, a smaller one above.
                let v = if mf > mg {
                    let t = ks[0];
                    Violation {
                        t,
                        test: TestFunction::UpperHinge,
                        lhs: f.stop_loss(t),
                        rhs: g.stop_loss(t),
                    }
                } else {
                    let t = ks[ks.len() - 1];
                    Violation {
                        t,
                        test: TestFunction::LowerHinge,
                        lhs: f.lower_stop_loss(t),
                        rhs: g.lower_stop_loss(t),
                    }
                };
                return OrderVerdict::fail(v);
            }
            // Means accepted as equal; their residual difference is absorbed
            // so that the lowest knot does not contradict that decision.
            let slack = slack + (mf - mg).abs();
            if let Some(v) = first_stop_loss_violation(f, g, &ks, slack) {
                return OrderVerdict::fail(v);
            }
        }
    }
    OrderVerdict::pass(ks)
}

/// `F <= G` in the GA-convex or increasing GA-convex order, decided on the
/// log-transformed distributions.
pub fn ga_order_leq(f: &DiscreteDistribution, g: &DiscreteDistribution, mode: GaOrder) -> Result<OrderVerdict> {
    Ok(order_leq(&f.log()?, &g.log()?, mode.linear()))
}

/// Geometric means equal within the same tolerance the GA-convex order
/// applies to the means of the logs.
pub fn geometric_means_equal(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<bool> {
    Ok(means_equal(f.log()?.mean(), g.log()?.mean()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignChanges {
    pub count: usize,
    /// Sign sequence with zeros dropped and repeats collapsed.
    pub signs: Vec<Sign>,
}

/// Sign changes of `G(t) - F(t)` over the atoms of both distributions.
/// Differences within [`CDF_TOL`] count as zero.
pub fn sign_change_count(f: &DiscreteDistribution, g: &DiscreteDistribution) -> SignChanges {
    let mut signs = Vec::new();
    for t in knots(f, g) {
        // G - F = S_F - S_G, computed from survivals for precision on the right
        let d = f.survival(t) - g.survival(t);
        let s = match d.partial_cmp(&0.0) {
            Some(Ordering::Greater) if d > CDF_TOL => Sign::Plus,
            Some(Ordering::Less) if d < -CDF_TOL => Sign::Minus,
            _ => continue,
        };
        if signs.last() != Some(&s) {
            signs.push(s);
        }
    }
    SignChanges {
        count: signs.len().saturating_sub(1),
        signs,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleCrossing {
    /// Equal geometric means and one `[+, -]` crossing of `G - F`.
    pub applicable: bool,
    /// Whether the criterion implies `F <=GA-cx G` (exactly when applicable).
    pub implied: bool,
    /// The full GA-convex test, always run.
    pub verdict: OrderVerdict,
}

/// Single-crossing sufficient criterion for the GA-convex order, reported
/// next to the direct test.
pub fn single_crossing_ga_cx(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<SingleCrossing> {
    let verdict = ga_order_leq(f, g, GaOrder::GaCx)?;
    let sc = sign_change_count(f, g);
    let applicable = geometric_means_equal(f, g)? && sc.signs == [Sign::Plus, Sign::Minus];
    Ok(SingleCrossing {
        applicable,
        implied: applicable,
        verdict,
    })
}

/// Law of `X Z` for independent `X ~ F`, `Z ~ z`.
pub fn independent_product(f: &DiscreteDistribution, z: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    f.require_positive()?;
    z.require_positive()?;
    let mut atoms = Vec::with_capacity(f.len() * z.len());
    let mut probs = Vec::with_capacity(f.len() * z.len());
    for (x, p) in f.atoms.iter().zip(&f.probs) {
        for (y, q) in z.atoms.iter().zip(&z.probs) {
            atoms.push(x * y);
            probs.push(p * q);
        }
    }
    let exact = match (&f.exact, &z.exact) {
        (Some(a), Some(b)) => a
            .iter()
            .flat_map(|p| b.iter().map(move |q| p.checked_mul(q)))
            .collect::<Option<Vec<_>>>(),
        _ => None,
    };
    match exact {
        Some(r) => DiscreteDistribution::from_rational(atoms, r),
        None => {
            // renormalize float rounding in the products
            let s: f64 = probs.iter().sum();
            DiscreteDistribution::new(atoms, probs.iter().map(|p| p / s).collect())
        }
    }
}
