use super::orlicz::{premium_on_slice, OrliczSpec, ORLICZ_TOL};
use super::space::{FiniteProbSpace, PositiveRandomVariable, ScenarioMeasure};
use crate::error::{invalid_param, Error, Result};
use crate::extreal::ExtendedPositive;

/// `G[X] = exp(E[ln X])`.
pub fn geometric_mean(x: &PositiveRandomVariable, p: &FiniteProbSpace) -> Result<f64> {
    p.check_len(x.len())?;
    Ok(p.expect(&x.ln_values()).exp())
}

/// `G_Q[X] = exp(E_Q[ln X])`.
pub fn geometric_mean_under(x: &PositiveRandomVariable, p: &FiniteProbSpace, q: &ScenarioMeasure) -> Result<f64> {
    p.check_len(x.len())?;
    p.check_len(q.density().len())?;
    Ok(scenario_mean(&x.ln_values(), p, q).exp())
}

fn scenario_mean(z: &[f64], p: &FiniteProbSpace, q: &ScenarioMeasure) -> f64 {
    z.iter()
        .zip(p.probs())
        .zip(q.density())
        .filter(|(_, d)| **d > 0.0)
        .map(|((z, p), d)| p * d * z)
        .sum()
}

/// `ln E_P[e^{p z}] / p`, computed without overflow and accurately for
/// small `p`.
fn ln_power_mean(z: &[f64], prob: &FiniteProbSpace, p: f64) -> f64 {
    let scaled: Vec<f64> = z.iter().map(|v| p * v).collect();
    let big = scaled.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if big < 1.0 {
        let s: f64 = scaled.iter().zip(prob.probs()).map(|(v, q)| q * v.exp_m1()).sum();
        s.ln_1p() / p
    } else {
        let m = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = scaled.iter().zip(prob.probs()).map(|(v, q)| q * (v - m).exp()).sum();
        (m + s.ln()) / p
    }
}

/// `(E_P[X^p])^{1/p}`.
pub fn p_norm(x: &PositiveRandomVariable, prob: &FiniteProbSpace, p: f64) -> Result<f64> {
    prob.check_len(x.len())?;
    check_p(p)?;
    Ok(ln_power_mean(&x.ln_values(), prob, p).exp())
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid_param("p", format!("must be positive, got {p}")));
    }
    Ok(())
}

fn check_level(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(invalid_param("lambda", format!("must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// Average of the lower quantile function over `(λ, 1]`; the maximum for
/// `λ = 1`.
pub fn avar(x: &[f64], p: &FiniteProbSpace, lambda: f64) -> Result<f64> {
    p.check_len(x.len())?;
    check_level(lambda)?;
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidRandomVariable(format!("non-finite value {v}")));
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    if lambda == 1.0 {
        return Ok(x[order[order.len() - 1]]);
    }
    let mut cdf = 0.0;
    let mut acc = 0.0;
    for &i in &order {
        let next = cdf + p.probs()[i];
        // length of (cdf, next] ∩ (λ, 1]
        let w = (next.min(1.0) - cdf.max(lambda)).max(0.0);
        acc += w * x[i];
        cdf = next;
    }
    // Rounding can leave the last cell a hair short of 1.
    let covered = (cdf.min(1.0) - lambda).max(0.0);
    if covered < 1.0 - lambda {
        acc += (1.0 - lambda - covered) * x[order[order.len() - 1]];
    }
    Ok(acc / (1.0 - lambda))
}

/// Convex monetary risk functionals `ρ̃` on log-returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonetaryRisk {
    Expectation,
    /// `ln E[e^{γ Z}] / γ`, `γ > 0`.
    Entropic {
        gamma: f64,
    },
    Avar {
        lambda: f64,
    },
    EssSup,
}

impl MonetaryRisk {
    fn validate(&self) -> Result<()> {
        match *self {
            MonetaryRisk::Entropic { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(invalid_param("gamma", format!("must be positive, got {gamma}")))
            }
            MonetaryRisk::Avar { lambda } => check_level(lambda),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, z: &[f64], p: &FiniteProbSpace) -> Result<f64> {
        p.check_len(z.len())?;
        self.validate()?;
        Ok(match *self {
            MonetaryRisk::Expectation => p.expect(z),
            MonetaryRisk::Entropic { gamma } => ln_power_mean(z, p, gamma),
            MonetaryRisk::Avar { lambda } => avar(z, p, lambda)?,
            MonetaryRisk::EssSup => z.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RiskMeasureSpec {
    GeometricMean,
    PNorm {
        p: f64,
    },
    Orlicz(OrliczSpec),
    /// `max_Q G_Q[X]` over a finite scenario set.
    WorstCaseGeometric {
        scenarios: Vec<ScenarioMeasure>,
    },
    /// `max_Q α(Q) G_Q[X]`, weights in `[0, 1]`.
    PenalizedGeometric {
        scenarios: Vec<ScenarioMeasure>,
        weights: Vec<f64>,
    },
    /// `exp(AV@R_λ(ln X))`.
    ExpAvarLog {
        lambda: f64,
    },
    /// `exp(ρ̃(ln X))`.
    ExpMonetaryLog(MonetaryRisk),
}

impl RiskMeasureSpec {
    pub fn validate(&self, p: &FiniteProbSpace) -> Result<()> {
        match self {
            RiskMeasureSpec::GeometricMean => Ok(()),
            RiskMeasureSpec::PNorm { p } => check_p(*p),
            RiskMeasureSpec::Orlicz(phi) => phi.validate(),
            RiskMeasureSpec::WorstCaseGeometric { scenarios } => check_scenarios(scenarios, p),
            RiskMeasureSpec::PenalizedGeometric { scenarios, weights } => {
                check_scenarios(scenarios, p)?;
                if weights.len() != scenarios.len() {
                    return Err(Error::DimensionMismatch {
                        expected: scenarios.len(),
                        got: weights.len(),
                    });
                }
                if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
                    return Err(invalid_param("alpha", "penalty weights must lie in [0, 1]"));
                }
                if weights.iter().all(|w| *w == 0.0) {
                    return Err(invalid_param("alpha", "at least one penalty weight must be positive"));
                }
                Ok(())
            }
            RiskMeasureSpec::ExpAvarLog { lambda } => check_level(*lambda),
            RiskMeasureSpec::ExpMonetaryLog(m) => m.validate(),
        }
    }

    /// True for the kinds whose value depends only on the law of `X`.
    pub fn is_law_invariant_kind(&self) -> bool {
        !matches!(
            self,
            RiskMeasureSpec::WorstCaseGeometric { .. } | RiskMeasureSpec::PenalizedGeometric { .. }
        )
    }
}

fn check_scenarios(s: &[ScenarioMeasure], p: &FiniteProbSpace) -> Result<()> {
    if s.is_empty() {
        return Err(Error::InvalidScenario("scenario set is empty".into()));
    }
    for q in s {
        p.check_len(q.density().len())?;
    }
    Ok(())
}

/// `ρ̃(z) = ln ρ(e^z)`, evaluated directly on log-values so that huge or
/// tiny returns do not overflow.
pub fn log_risk(spec: &RiskMeasureSpec, z: &[f64], p: &FiniteProbSpace) -> Result<f64> {
    p.check_len(z.len())?;
    spec.validate(p)?;
    Ok(match spec {
        RiskMeasureSpec::GeometricMean => p.expect(z),
        RiskMeasureSpec::PNorm { p: q } => ln_power_mean(z, p, *q),
        RiskMeasureSpec::Orlicz(phi) => {
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let xs: Vec<f64> = z.iter().map(|v| (v - m).max(-700.0).exp()).collect();
            m + premium_on_slice(&xs, p, phi, ORLICZ_TOL)?.value.ln()
        }
        RiskMeasureSpec::WorstCaseGeometric { scenarios } => scenarios
            .iter()
            .map(|q| scenario_mean(z, p, q))
            .fold(f64::NEG_INFINITY, f64::max),
        RiskMeasureSpec::PenalizedGeometric { scenarios, weights } => scenarios
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(q, w)| w.ln() + scenario_mean(z, p, q))
            .fold(f64::NEG_INFINITY, f64::max),
        RiskMeasureSpec::ExpAvarLog { lambda } => avar(z, p, *lambda)?,
        RiskMeasureSpec::ExpMonetaryLog(m) => m.eval(z, p)?,
    })
}

pub fn evaluate(spec: &RiskMeasureSpec, x: &PositiveRandomVariable, p: &FiniteProbSpace) -> Result<ExtendedPositive> {
    if let RiskMeasureSpec::Orlicz(phi) = spec {
        // Direct evaluation avoids the rescaling round trip.
        p.check_len(x.len())?;
        phi.validate()?;
        let v = premium_on_slice(x.values(), p, phi, ORLICZ_TOL)?.value;
        return ExtendedPositive::new(v);
    }
    Ok(ExtendedPositive::from_ln(log_risk(spec, &x.ln_values(), p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> PositiveRandomVariable {
        PositiveRandomVariable::new(v.to_vec()).unwrap()
    }

    #[test]
    fn geometric_means() {
        let p2 = FiniteProbSpace::uniform(2).unwrap();
        assert!((geometric_mean(&rv(&[1.0, 4.0]), &p2).unwrap() - 2.0).abs() < 1e-15);
        let p3 = FiniteProbSpace::uniform(3).unwrap();
        assert!((geometric_mean(&rv(&[2.0, 8.0, 32.0]), &p3).unwrap() - 8.0).abs() < 1e-14);
        assert!((geometric_mean(&rv(&[7.0; 3]), &p3).unwrap() - 7.0).abs() < 1e-14);
        assert!(geometric_mean(&rv(&[1.0]), &p3).is_err());

        let x = rv(&[1.0, 4.0]);
        let q = ScenarioMeasure::new(vec![0.5, 1.5], &p2).unwrap();
        assert!((geometric_mean_under(&x, &p2, &q).unwrap() - 2f64.powf(1.5)).abs() < 1e-14);
        let d = ScenarioMeasure::dirac(1, &p2).unwrap();
        assert!((geometric_mean_under(&x, &p2, &d).unwrap() - 4.0).abs() < 1e-14);
        let b = ScenarioMeasure::base(&p2);
        assert_eq!(
            geometric_mean_under(&x, &p2, &b).unwrap(),
            geometric_mean(&x, &p2).unwrap()
        );
    }

    #[test]
    fn p_norms() {
        let p2 = FiniteProbSpace::uniform(2).unwrap();
        let x = rv(&[1.0, 4.0]);
        assert!((p_norm(&x, &p2, 1.0).unwrap() - 2.5).abs() < 1e-14);
        assert!((p_norm(&x, &p2, 0.5).unwrap() - 2.25).abs() < 1e-14);
        assert!(p_norm(&x, &p2, 0.0).is_err());
        assert!(p_norm(&x, &p2, -1.0).is_err());
        let x = rv(&[0.3, 2.2, 5.0, 0.9]);
        let p4 = FiniteProbSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = geometric_mean(&x, &p4).unwrap();
        assert!((p_norm(&x, &p4, 1e-6).unwrap() - g).abs() < 1e-4);
        // large p stays finite
        let big = rv(&[1e200, 1e100]);
        assert!(p_norm(&big, &p2, 4.0).unwrap().is_finite());
    }

    #[test]
    fn avar_examples() {
        let p4 = FiniteProbSpace::uniform(4).unwrap();
        let x = [3.0, 1.0, 4.0, 2.0];
        assert!((avar(&x, &p4, 0.0).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(avar(&x, &p4, 1.0).unwrap(), 4.0);
        assert!((avar(&x, &p4, 0.5).unwrap() - 3.5).abs() < 1e-14);
        assert!((avar(&x, &p4, 0.6).unwrap() - ((0.15 * 3.0 + 0.25 * 4.0) / 0.4)).abs() < 1e-14);
        assert!(avar(&x, &p4, 1.5).is_err());
        assert!(avar(&x, &p4, -0.1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let p = FiniteProbSpace::new(vec![0.2, 0.5, 0.3]).unwrap();
        let x = rv(&[0.5, 3.0, 1.2]);
        let g = geometric_mean(&x, &p).unwrap();
        let spec = RiskMeasureSpec::PenalizedGeometric {
            scenarios: vec![ScenarioMeasure::base(&p)],
            weights: vec![1.0],
        };
        assert!((evaluate(&spec, &x, &p).unwrap().to_f64() - g).abs() < 1e-14);
        let spec = RiskMeasureSpec::WorstCaseGeometric {
            scenarios: vec![ScenarioMeasure::base(&p), ScenarioMeasure::dirac(1, &p).unwrap()],
        };
        assert!((evaluate(&spec, &x, &p).unwrap().to_f64() - 3.0).abs() < 1e-14);
        let spec = RiskMeasureSpec::ExpAvarLog { lambda: 0.0 };
        assert!((evaluate(&spec, &x, &p).unwrap().to_f64() - g).abs() < 1e-14);

        let empty = RiskMeasureSpec::WorstCaseGeometric { scenarios: vec![] };
        assert!(evaluate(&empty, &x, &p).is_err());
        let bad = RiskMeasureSpec::PenalizedGeometric {
            scenarios: vec![ScenarioMeasure::base(&p)],
            weights: vec![1.5],
        };
        assert!(evaluate(&bad, &x, &p).is_err());
    }

    #[test]
    fn monetary_reductions() {
        let p = FiniteProbSpace::new(vec![0.25, 0.25, 0.5]).unwrap();
        let x = rv(&[0.5, 3.0, 1.2]);
        let pn = p_norm(&x, &p, 2.0).unwrap();
        let ent = evaluate(
            &RiskMeasureSpec::ExpMonetaryLog(MonetaryRisk::Entropic { gamma: 2.0 }),
            &x,
            &p,
        )
        .unwrap();
        assert!((ent.to_f64() - pn).abs() < 1e-13 * pn);
        let sup = evaluate(&RiskMeasureSpec::ExpMonetaryLog(MonetaryRisk::EssSup), &x, &p).unwrap();
        assert!((sup.to_f64() - 3.0).abs() < 1e-14);
        let av = evaluate(
            &RiskMeasureSpec::ExpMonetaryLog(MonetaryRisk::Avar { lambda: 0.5 }),
            &x,
            &p,
        )
        .unwrap();
        let direct = evaluate(&RiskMeasureSpec::ExpAvarLog { lambda: 0.5 }, &x, &p).unwrap();
        assert_eq!(av, direct);
    }

    #[test]
    fn orlicz_log_risk_matches_direct() {
        let p = FiniteProbSpace::new(vec![0.25, 0.25, 0.5]).unwrap();
        let x = rv(&[0.5, 3.0, 1.2]);
        let spec = RiskMeasureSpec::Orlicz(OrliczSpec::Exponential);
        let direct = evaluate(&spec, &x, &p).unwrap().to_f64();
        let via_logs = log_risk(&spec, &x.ln_values(), &p).unwrap().exp();
        assert!((direct - via_logs).abs() < 1e-11 * direct);
    }
}
