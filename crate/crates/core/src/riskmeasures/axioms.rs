//! Randomized falsification of return-risk-measure axioms and convexity
//! notions. A flag is either refuted with a concrete counterexample or
//! reported unrefuted after the stated number of trials; nothing here
//! proves a property.

use rand::seq::SliceRandom;
use rand::Rng;

use super::measures::{log_risk, RiskMeasureSpec};
use super::space::{FiniteProbSpace, PositiveRandomVariable};
use crate::error::Result;
use crate::random::{random_lognormal, trial_rng, TrialRng};

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    /// The side that should have been smaller, and the bound it broke.
    pub lhs: f64,
    pub rhs: f64,
    pub trial: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Flag {
    Unrefuted { trials: usize },
    Refuted(Box<Counterexample>),
}

impl Flag {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Flag::Refuted(_))
    }
    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Flag::Refuted(c) => Some(c),
            Flag::Unrefuted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub monotone: Flag,
    pub positively_homogeneous: Flag,
    pub normalized: Flag,
    pub gg_convex: Flag,
    pub ga_convex: Flag,
    pub aa_convex: Flag,
    pub ag_convex: Flag,
    pub law_invariant: Flag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomConfig {
    pub trials: usize,
    pub seed: u64,
    /// Relative slack on every inequality.
    pub slack: f64,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 1,
            slack: 1e-9,
        }
    }
}

struct Tracker {
    trials: usize,
    first: Option<Counterexample>,
}

impl Tracker {
    fn new(trials: usize) -> Self {
        Self { trials, first: None }
    }

    /// Records a violation of `lhs <= rhs` (relative slack) on the log scale.
    fn check_ln(&mut self, lhs: f64, rhs: f64, slack: f64, ce: impl FnOnce() -> Counterexample) {
        if self.first.is_some() {
            return;
        }
        if lhs > rhs + slack * lhs.abs().max(rhs.abs()).max(1.0) {
            let mut c = ce();
            c.lhs = lhs.exp();
            c.rhs = rhs.exp();
            self.first = Some(c);
        }
    }

    /// Records a violation of `lhs <= rhs` on the linear scale.
    fn check(&mut self, lhs: f64, rhs: f64, slack: f64, ce: impl FnOnce() -> Counterexample) {
        if self.first.is_some() {
            return;
        }
        if lhs > rhs + slack * lhs.abs().max(rhs.abs()) {
            let mut c = ce();
            c.lhs = lhs;
            c.rhs = rhs;
            self.first = Some(c);
        }
    }

    fn finish(self) -> Flag {
        match self.first {
            Some(c) => Flag::Refuted(Box::new(c)),
            None => Flag::Unrefuted { trials: self.trials },
        }
    }
}

fn ce(trial: usize, x: &[f64], y: Option<&[f64]>, lambda: Option<f64>) -> Counterexample {
    Counterexample {
        x: x.to_vec(),
        y: y.map(|v| v.to_vec()),
        lambda,
        lhs: f64::NAN,
        rhs: f64::NAN,
        trial,
    }
}

fn ln_sum_exp2(a: f64, wa: f64, b: f64, wb: f64) -> f64 {
    // ln(wa e^a + wb e^b)
    let m = a.max(b);
    m + (wa * (a - m).exp() + wb * (b - m).exp()).ln()
}

/// Permutation of states that preserves `P`: a shuffle within each class
/// of equal probabilities.
fn measure_preserving_permutation(rng: &mut TrialRng, p: &FiniteProbSpace) -> Vec<usize> {
    let n = p.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (i..n).filter(|&j| p.probs()[j] == p.probs()[i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        let mut shuffled = class.clone();
        shuffled.shuffle(rng);
        for (a, b) in class.iter().zip(&shuffled) {
            perm[*a] = *b;
        }
    }
    perm
}

/// Draws `X`, `Y`, `λ`, scalings, increments and a measure-preserving
/// permutation per trial and tests every flag on them.
pub fn axiom_check(spec: &RiskMeasureSpec, p: &FiniteProbSpace, config: &AxiomConfig) -> Result<AxiomReport> {
    spec.validate(p)?;
    let n = p.len();
    let s = config.slack;
    let rho = |z: &[f64]| log_risk(spec, z, p);

    let mut mono = Tracker::new(config.trials);
    let mut ph = Tracker::new(config.trials);
    let mut norm = Tracker::new(config.trials);
    let mut gg = Tracker::new(config.trials);
    let mut ga = Tracker::new(config.trials);
    let mut aa = Tracker::new(config.trials);
    let mut ag = Tracker::new(config.trials);
    let mut law = Tracker::new(config.trials);

    for trial in 0..config.trials {
        let mut rng = trial_rng(config.seed, trial as u64);
        let zx = random_lognormal(&mut rng, n).ln_values();
        let zy = random_lognormal(&mut rng, n).ln_values();
        let lambda: f64 = rng.random_range(0.05..0.95);
        let (rx, ry) = (rho(&zx)?, rho(&zy)?);
        let xv: Vec<f64> = zx.iter().map(|v| v.exp()).collect();
        let yv: Vec<f64> = zy.iter().map(|v| v.exp()).collect();
        let c = || ce(trial, &xv, Some(&yv), Some(lambda));

        // geometric and arithmetic mixtures, in logs
        let zg: Vec<f64> = zx
            .iter()
            .zip(&zy)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let za: Vec<f64> = zx
            .iter()
            .zip(&zy)
            .map(|(a, b)| ln_sum_exp2(*a, lambda, *b, 1.0 - lambda))
            .collect();
        let (rg, ra) = (rho(&zg)?, rho(&za)?);
        let geo_bound = lambda * rx + (1.0 - lambda) * ry;
        let arith_bound = ln_sum_exp2(rx, lambda, ry, 1.0 - lambda);

        gg.check_ln(rg, geo_bound, s, c);
        ga.check_ln(rg, arith_bound, s, c);
        aa.check_ln(ra, arith_bound, s, c);
        ag.check_ln(ra, geo_bound, s, c);

        // GA on the normalized pair X/ρ(X), Y/ρ(Y), which is what makes
        // PH + GA imply GG trial by trial.
        let zgn: Vec<f64> = zg.iter().map(|v| v - geo_bound).collect();
        ga.check_ln(rho(&zgn)?, 0.0, s, c);

        // Monotonicity: random increments, and the pointwise AM-GM pair
        // (which makes AG + monotone imply GG trial by trial).
        let zinc: Vec<f64> = zx
            .iter()
            .map(|v| {
                if rng.random_bool(0.5) {
                    v + rng.random_range(0.0..1.0)
                } else {
                    *v
                }
            })
            .collect();
        mono.check_ln(rx, rho(&zinc)?, s, || {
            let inc: Vec<f64> = zinc.iter().map(|v| v.exp()).collect();
            ce(trial, &xv, Some(&inc), None)
        });
        mono.check_ln(rg, ra, s, c);

        // Positive homogeneity, including the scaling used above.
        let lc: f64 = rng.random_range(-3.0..3.0);
        let zc: Vec<f64> = zx.iter().map(|v| v + lc).collect();
        let rc = rho(&zc)?;
        let ph_ce = || ce(trial, &xv, None, Some(lc.exp()));
        ph.check_ln(rc, rx + lc, s, ph_ce);
        ph.check_ln(rx + lc, rc, s, ph_ce);
        let rgn = rho(&zgn)?;
        ph.check_ln(rg, rgn + geo_bound, s, c);
        ph.check_ln(rgn + geo_bound, rg, s, c);

        // Normalization on the constant 1.
        if trial == 0 {
            let r1 = rho(&vec![0.0; n])?.exp();
            norm.check(r1, 1.0, s, || ce(trial, &vec![1.0; n], None, None));
            norm.check(1.0, r1, s, || ce(trial, &vec![1.0; n], None, None));
        }

        // Law invariance under a P-preserving relabelling.
        let perm = measure_preserving_permutation(&mut rng, p);
        let zp: Vec<f64> = perm.iter().map(|&j| zx[j]).collect();
        let rp = rho(&zp)?;
        let law_ce = || {
            let pv: Vec<f64> = zp.iter().map(|v| v.exp()).collect();
            ce(trial, &xv, Some(&pv), None)
        };
        law.check_ln(rp, rx, s, law_ce);
        law.check_ln(rx, rp, s, law_ce);
    }

    Ok(AxiomReport {
        monotone: mono.finish(),
        positively_homogeneous: ph.finish(),
        normalized: norm.finish(),
        gg_convex: gg.finish(),
        ga_convex: ga.finish(),
        aa_convex: aa.finish(),
        ag_convex: ag.finish(),
        law_invariant: law.finish(),
    })
}

/// Outcome of [`gg_convexity_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `ln ρ(X^λ Y^{1-λ}) - [λ ln ρ(X) + (1-λ) ln ρ(Y)]` seen.
    pub worst_excess: f64,
    pub first_violation: Option<Counterexample>,
}

/// GG-convexity inequality on fresh random instances: each trial draws a
/// space (`n ∈ [2, 16]`), builds the measure with `make_spec`, and tests one
/// `(X, Y, λ)` triple with absolute slack `slack` on the log scale.
pub fn gg_convexity_suite(
    make_spec: &dyn Fn(&mut TrialRng, &FiniteProbSpace) -> RiskMeasureSpec,
    trials: usize,
    seed: u64,
    slack: f64,
) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        trials,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        first_violation: None,
    };
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial as u64);
        let (p, x) = crate::random::random_instance(&mut rng);
        let y = random_lognormal(&mut rng, p.len());
        let lambda: f64 = rng.random_range(0.05..0.95);
        let spec = make_spec(&mut rng, &p);
        let (zx, zy) = (x.ln_values(), y.ln_values());
        let zg: Vec<f64> = zx
            .iter()
            .zip(&zy)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let lhs = log_risk(&spec, &zg, &p)?;
        let rhs = lambda * log_risk(&spec, &zx, &p)? + (1.0 - lambda) * log_risk(&spec, &zy, &p)?;
        let excess = lhs - rhs;
        report.worst_excess = report.worst_excess.max(excess);
        if excess > slack {
            report.violations += 1;
            if report.first_violation.is_none() {
                report.first_violation = Some(Counterexample {
                    x: x.values().to_vec(),
                    y: Some(y.values().to_vec()),
                    lambda: Some(lambda),
                    lhs: lhs.exp(),
                    rhs: rhs.exp(),
                    trial,
                });
            }
        }
    }
    Ok(report)
}

/// Convenience: `ρ(X)` on the linear scale for a counterexample replay.
pub fn replay(spec: &RiskMeasureSpec, x: &[f64], p: &FiniteProbSpace) -> Result<f64> {
    let x = PositiveRandomVariable::new(x.to_vec())?;
    Ok(log_risk(spec, &x.ln_values(), p)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riskmeasures::{OrliczSpec, ScenarioMeasure};

    fn cfg() -> AxiomConfig {
        AxiomConfig {
            trials: 300,
            seed: 5,
            slack: 1e-9,
        }
    }

    fn unrefuted(f: &Flag) -> bool {
        !f.is_refuted()
    }

    #[test]
    fn geometric_mean_pattern() {
        let p = FiniteProbSpace::uniform(4).unwrap();
        let r = axiom_check(&RiskMeasureSpec::GeometricMean, &p, &cfg()).unwrap();
        assert!(unrefuted(&r.monotone) && unrefuted(&r.positively_homogeneous));
        assert!(unrefuted(&r.normalized) && unrefuted(&r.gg_convex));
        assert!(unrefuted(&r.law_invariant));
        let c = r.aa_convex.counterexample().expect("AA-convexity refuted");
        assert!(c.lhs > c.rhs);
    }

    #[test]
    fn half_norm_pattern() {
        let p = FiniteProbSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let r = axiom_check(&RiskMeasureSpec::PNorm { p: 0.5 }, &p, &cfg()).unwrap();
        assert!(unrefuted(&r.monotone) && unrefuted(&r.positively_homogeneous));
        assert!(unrefuted(&r.normalized) && unrefuted(&r.gg_convex));
        assert!(r.aa_convex.is_refuted());
    }

    #[test]
    fn orlicz_square_is_aa_and_gg_convex() {
        let p = FiniteProbSpace::uniform(3).unwrap();
        let spec = RiskMeasureSpec::Orlicz(OrliczSpec::power(2.0).unwrap());
        let r = axiom_check(&spec, &p, &AxiomConfig { trials: 100, ..cfg() }).unwrap();
        assert!(unrefuted(&r.aa_convex) && unrefuted(&r.gg_convex));
    }

    #[test]
    fn scenario_sets_break_law_invariance() {
        let p = FiniteProbSpace::uniform(3).unwrap();
        let spec = RiskMeasureSpec::WorstCaseGeometric {
            scenarios: vec![ScenarioMeasure::dirac(0, &p).unwrap()],
        };
        let r = axiom_check(&spec, &p, &cfg()).unwrap();
        assert!(r.law_invariant.is_refuted());
        assert!(unrefuted(&r.gg_convex));
    }

    #[test]
    fn permutations_preserve_probabilities() {
        let p = FiniteProbSpace::new(vec![0.25, 0.125, 0.25, 0.125, 0.25]).unwrap();
        for t in 0..50 {
            let mut rng = trial_rng(3, t);
            let perm = measure_preserving_permutation(&mut rng, &p);
            for (i, &j) in perm.iter().enumerate() {
                assert_eq!(p.probs()[i], p.probs()[j]);
            }
            let mut sorted = perm.clone();
            sorted.sort();
            assert_eq!(sorted, (0..5).collect::<Vec<_>>());
        }
    }

    #[test]
    fn suite_on_geometric_mean_is_clean() {
        let r = gg_convexity_suite(&|_, _| RiskMeasureSpec::GeometricMean, 200, 9, 1e-12).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_excess <= 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn specs() -> Vec<RiskMeasureSpec> {
            vec![
                RiskMeasureSpec::GeometricMean,
                RiskMeasureSpec::PNorm { p: 0.5 },
                RiskMeasureSpec::PNorm { p: 3.0 },
                RiskMeasureSpec::ExpAvarLog { lambda: 0.5 },
                RiskMeasureSpec::Orlicz(OrliczSpec::LogAffine),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(12))]
            #[test]
            fn implication_chain(seed in any::<u64>(), which in 0usize..5, n in 2usize..6) {
                let p = FiniteProbSpace::uniform(n).unwrap();
                let r = axiom_check(&specs()[which], &p, &AxiomConfig { trials: 60, seed, slack: 1e-9 }).unwrap();
                if !r.ag_convex.is_refuted() && !r.monotone.is_refuted() {
                    prop_assert!(!r.gg_convex.is_refuted());
                }
                if !r.positively_homogeneous.is_refuted() && !r.ga_convex.is_refuted() {
                    prop_assert!(!r.gg_convex.is_refuted());
                }
            }

            #[test]
            fn ga_convex_orlicz_is_gg_convex(seed in any::<u64>(), pp in 0.2f64..4.0) {
                let p = FiniteProbSpace::uniform(3).unwrap();
                for phi in [OrliczSpec::power(pp).unwrap(), OrliczSpec::LogAffine] {
                    let r = axiom_check(&RiskMeasureSpec::Orlicz(phi), &p, &AxiomConfig { trials: 20, seed, slack: 1e-9 }).unwrap();
                    prop_assert!(!r.gg_convex.is_refuted());
                }
            }
        }
    }
}
