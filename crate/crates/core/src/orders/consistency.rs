//! Consistency of law-invariant risk measures with the GA-convex orders.

use num_integer::Integer;

use super::{ga_order_leq, DiscreteDistribution, GaOrder};
use crate::error::{Error, Result};
use crate::extreal::ExtendedPositive;
use crate::riskmeasures::{log_risk, FiniteProbSpace, PositiveRandomVariable, RiskMeasureSpec};

pub const MAX_EMBEDDING_STATES: u64 = 10080;
/// Slack on `ln rho(F) <= ln rho(G)`.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Comonotone realisation of two laws on `{1..states}` with uniform weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub space: FiniteProbSpace,
    pub x: PositiveRandomVariable,
    pub y: PositiveRandomVariable,
}

impl Embedding {
    pub fn states(&self) -> usize {
        self.space.len()
    }
}

fn denominators(d: &DiscreteDistribution, which: &str) -> Result<Vec<u64>> {
    d.exact_probs()
        .map(|r| r.iter().map(|p| *p.denom()).collect())
        .ok_or_else(|| Error::NotEmbeddable(format!("{which} has non-rational probabilities")))
}

fn realise(d: &DiscreteDistribution, n: u64) -> Result<PositiveRandomVariable> {
    let mut v = Vec::with_capacity(n as usize);
    for (x, p) in d.atoms().iter().zip(d.exact_probs().expect("checked")) {
        let copies = p.numer() * (n / p.denom());
        v.extend(std::iter::repeat_n(*x, copies as usize));
    }
    PositiveRandomVariable::new(v)
}

/// Embeds `F` and `G` on the equiprobable space whose size is the least
/// common multiple of all probability denominators.
pub fn common_embedding(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Result<Embedding> {
    let mut n = 1u64;
    for d in denominators(f, "F")?.into_iter().chain(denominators(g, "G")?) {
        n = n.lcm(&d);
        if n > MAX_EMBEDDING_STATES {
            return Err(Error::NotEmbeddable(format!(
                "common denominator exceeds {MAX_EMBEDDING_STATES}"
            )));
        }
    }
    Ok(Embedding {
        space: FiniteProbSpace::uniform(n as usize)?,
        x: realise(f, n)?,
        y: realise(g, n)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub ordered: bool,
    pub rho_f: ExtendedPositive,
    pub rho_g: ExtendedPositive,
    /// False only if the pair is ordered and `rho_f > rho_g` beyond slack.
    pub consistent: bool,
    pub states: usize,
}

/// Checks `F <= G` in `mode` and, when ordered, that `rho(F) <= rho(G)`.
///
/// The measure must be law-invariant; it is the caller's job to use a
/// GG-convex one (and a monotone one for `GaIcx`).
pub fn consistency_test(
    spec: &RiskMeasureSpec,
    f: &DiscreteDistribution,
    g: &DiscreteDistribution,
    mode: GaOrder,
) -> Result<ConsistencyReport> {
    if !spec.is_law_invariant_kind() {
        return Err(Error::InvalidParameter {
            name: "spec",
            reason: "consistency needs a law-invariant risk measure".into(),
        });
    }
    let ordered = ga_order_leq(f, g, mode)?.holds;
    let e = common_embedding(f, g)?;
    spec.validate(&e.space)?;
    let lf = log_risk(spec, &e.x.ln_values(), &e.space)?;
    let lg = log_risk(spec, &e.y.ln_values(), &e.space)?;
    let consistent = !ordered || lf <= lg + CONSISTENCY_TOL * lg.abs().max(1.0);
    Ok(ConsistencyReport {
        ordered,
        rho_f: ExtendedPositive::from_ln(lf),
        rho_g: ExtendedPositive::from_ln(lg),
        consistent,
        states: e.states(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::Rational;
    use super::*;
    use crate::riskmeasures::{OrliczSpec, RiskMeasureSpec};

    fn eq(atoms: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::equiprobable(atoms.to_vec()).unwrap()
    }

    #[test]
    fn embedding_uses_lcm() {
        let f = DiscreteDistribution::from_rational(vec![1.0, 2.0], vec![Rational::new(1, 3), Rational::new(2, 3)])
            .unwrap();
        let g = DiscreteDistribution::from_rational(vec![1.0, 5.0], vec![Rational::new(1, 4), Rational::new(3, 4)])
            .unwrap();
        let e = common_embedding(&f, &g).unwrap();
        assert_eq!(e.states(), 12);
        assert_eq!(e.x.values().iter().filter(|v| **v == 1.0).count(), 4);
        assert_eq!(e.y.values().iter().filter(|v| **v == 1.0).count(), 3);
    }

    #[test]
    fn embedding_limits() {
        let f = DiscreteDistribution::from_rational(
            vec![1.0, 2.0],
            vec![Rational::new(1, 10007), Rational::new(10006, 10007)],
        )
        .unwrap();
        let g = eq(&[1.0, 2.0]);
        assert!(matches!(common_embedding(&f, &g), Err(Error::NotEmbeddable(_))));
        let h = DiscreteDistribution::new(vec![1.0, 2.0], vec![0.3, 0.7]).unwrap();
        assert!(matches!(common_embedding(&h, &g), Err(Error::NotEmbeddable(_))));
        // decimals are exact
        let d = DiscreteDistribution::from_rational(vec![1.0, 2.0], vec![Rational::new(3, 10), Rational::new(7, 10)])
            .unwrap();
        assert_eq!(common_embedding(&d, &g).unwrap().states(), 10);
    }

    #[test]
    fn geometric_mean_is_equal_on_ga_cx_pairs() {
        let f = DiscreteDistribution::point_mass(1.0).unwrap();
        let g = eq(&[0.5, 2.0]);
        let r = consistency_test(&RiskMeasureSpec::GeometricMean, &f, &g, GaOrder::GaCx).unwrap();
        assert!(r.ordered && r.consistent);
        assert!((r.rho_f.to_f64() - 1.0).abs() < 1e-12);
        assert!((r.rho_g.to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_norm_example() {
        let f = DiscreteDistribution::point_mass(1.0).unwrap();
        let g = eq(&[0.5, 2.0]);
        let r = consistency_test(&RiskMeasureSpec::PNorm { p: 0.5 }, &f, &g, GaOrder::GaCx).unwrap();
        // ((sqrt(1/2) + sqrt 2) / 2)^2
        let expected = ((0.5f64.sqrt() + 2f64.sqrt()) / 2.0).powi(2);
        assert!((r.rho_f.to_f64() - 1.0).abs() < 1e-12);
        assert!((r.rho_g.to_f64() - expected).abs() < 1e-12);
        assert!(r.ordered && r.consistent);
    }

    #[test]
    fn unordered_pairs_are_vacuously_consistent() {
        let f = eq(&[0.5, 2.0]);
        let g = DiscreteDistribution::point_mass(1.0).unwrap();
        let spec = RiskMeasureSpec::Orlicz(OrliczSpec::power(2.0).unwrap());
        let r = consistency_test(&spec, &f, &g, GaOrder::GaCx).unwrap();
        assert!(!r.ordered && r.consistent);
        assert!(r.rho_f.to_f64() > r.rho_g.to_f64());
    }

    #[test]
    fn rejects_scenario_measures() {
        let f = eq(&[1.0, 2.0]);
        let p = FiniteProbSpace::uniform(2).unwrap();
        let spec = RiskMeasureSpec::WorstCaseGeometric {
            scenarios: vec![crate::riskmeasures::ScenarioMeasure::base(&p)],
        };
        assert!(consistency_test(&spec, &f, &f, GaOrder::GaCx).is_err());
    }
}
