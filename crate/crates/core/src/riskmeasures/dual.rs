use rand::Rng;

use super::measures::{log_risk, p_norm, RiskMeasureSpec};
use super::space::{FiniteProbSpace, PositiveRandomVariable};
use crate::error::{invalid_param, Result};
use crate::extreal::ExtendedPositive;
use crate::random::{standard_normal, trial_rng};

/// Objective level beyond which a ray is declared divergent.
pub const DIVERGENCE_LEVEL: f64 = 1e12;
const DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ConjugateCertificate {
    /// Exact value from a closed form.
    ClosedForm,
    /// Best point found; the value is `exp` of the objective there, hence a
    /// lower bound of the true sup.
    Maximizer { z: Vec<f64>, objective: f64 },
    /// The objective exceeded [`DIVERGENCE_LEVEL`] at `radius · direction`.
    DivergentRay {
        direction: Vec<f64>,
        radius: f64,
        objective: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoConjugate {
    pub value: ExtendedPositive,
    pub certificate: ConjugateCertificate,
}

/// Settings of the numerical maximization behind [`rho_gg_conjugate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateSearch {
    pub starts: usize,
    pub seed: u64,
    /// Extra starting points in log-space (e.g. `ln X` candidates).
    pub hints: Vec<Vec<f64>>,
    pub max_evals_per_start: usize,
    /// Skip the closed forms (used to cross-check them).
    pub numeric_only: bool,
}

impl Default for ConjugateSearch {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0x6a09_e667,
            hints: Vec::new(),
            max_evals_per_start: 20_000,
            numeric_only: false,
        }
    }
}

/// `ρ⋄(Y) = sup_X exp(E[ln Y ln X]) / ρ(X)`, computed as `exp ∘ ρ̃* ∘ ln`.
pub fn rho_gg_conjugate(
    spec: &RiskMeasureSpec,
    y: &PositiveRandomVariable,
    p: &FiniteProbSpace,
) -> Result<RhoConjugate> {
    rho_gg_conjugate_with(spec, y, p, &ConjugateSearch::default())
}

pub fn rho_gg_conjugate_with(
    spec: &RiskMeasureSpec,
    y: &PositiveRandomVariable,
    p: &FiniteProbSpace,
    search: &ConjugateSearch,
) -> Result<RhoConjugate> {
    p.check_len(y.len())?;
    spec.validate(p)?;
    let w = y.ln_values();
    if !search.numeric_only {
        if let Some(r) = closed_form(spec, &w, p) {
            return Ok(r);
        }
    }
    numeric_conjugate(spec, &w, p, search)
}

fn closed_form(spec: &RiskMeasureSpec, w: &[f64], p: &FiniteProbSpace) -> Option<RhoConjugate> {
    let value = match spec {
        // ρ̃ = E is linear: ρ̃* is the indicator of {ln Y ≡ 1}.
        RiskMeasureSpec::GeometricMean => {
            if w.iter().all(|v| (v - 1.0).abs() <= DENSITY_TOL) {
                ExtendedPositive::ONE
            } else {
                ExtendedPositive::Infinity
            }
        }
        // ρ̃ is entropic with γ = p: ρ̃*(W) = H(W P, P) / p on densities.
        RiskMeasureSpec::PNorm { p: q } => {
            let mass = p.expect(w);
            if w.iter().any(|v| *v < -DENSITY_TOL) || (mass - 1.0).abs() > DENSITY_TOL {
                ExtendedPositive::Infinity
            } else {
                let h: f64 = w
                    .iter()
                    .zip(p.probs())
                    .filter(|(d, _)| **d > 0.0)
                    .map(|(d, pi)| pi * d * d.ln())
                    .sum();
                ExtendedPositive::from_ln(h / q)
            }
        }
        _ => return None,
    };
    Some(RhoConjugate {
        value,
        certificate: ConjugateCertificate::ClosedForm,
    })
}

fn numeric_conjugate(
    spec: &RiskMeasureSpec,
    w: &[f64],
    p: &FiniteProbSpace,
    search: &ConjugateSearch,
) -> Result<RhoConjugate> {
    let n = w.len();
    let objective = |z: &[f64]| -> Result<f64> {
        let lin: f64 = z.iter().zip(w).zip(p.probs()).map(|((z, w), q)| q * z * w).sum();
        let v = lin - log_risk(spec, z, p)?;
        Ok(if v.is_nan() { f64::NEG_INFINITY } else { v })
    };

    let mut rays: Vec<Vec<f64>> = vec![vec![1.0; n], vec![-1.0; n]];
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            rays.push(d);
        }
    }
    for d in &rays {
        for k in 1..=7 {
            let r = 100f64.powi(k);
            let z: Vec<f64> = d.iter().map(|v| r * v).collect();
            let f = objective(&z)?;
            if f > DIVERGENCE_LEVEL {
                return Ok(RhoConjugate {
                    value: ExtendedPositive::Infinity,
                    certificate: ConjugateCertificate::DivergentRay {
                        direction: d.clone(),
                        radius: r,
                        objective: f,
                    },
                });
            }
        }
    }

    let mut starts: Vec<Vec<f64>> = search.hints.iter().filter(|h| h.len() == n).cloned().collect();
    starts.push(vec![0.0; n]);
    let mut rng = trial_rng(search.seed, 0);
    let bases = starts.clone();
    while starts.len() < search.starts.max(1) {
        let base = &bases[rng.random_range(0..bases.len())];
        let scale = standard_normal(&mut rng).exp();
        starts.push(base.iter().map(|b| b + scale * standard_normal(&mut rng)).collect());
    }

    let mut best_z = starts[0].clone();
    let mut best_f = f64::NEG_INFINITY;
    for z0 in starts {
        let (z, f) = compass_search(&objective, z0, search.max_evals_per_start)?;
        if f > best_f {
            best_f = f;
            best_z = z;
        }
    }
    Ok(RhoConjugate {
        value: ExtendedPositive::from_ln(best_f),
        certificate: ConjugateCertificate::Maximizer {
            z: best_z,
            objective: best_f,
        },
    })
}

/// Coordinate pattern search with step doubling on success and halving on
/// failure, down to a relative step of 1e-10.
fn compass_search(
    objective: &dyn Fn(&[f64]) -> Result<f64>,
    mut z: Vec<f64>,
    max_evals: usize,
) -> Result<(Vec<f64>, f64)> {
    let mut f = objective(&z)?;
    let mut evals = 1;
    let mut step = 1.0;
    while evals < max_evals {
        let mut improved = false;
        'coords: for i in 0..z.len() {
            for s in [step, -step] {
                let old = z[i];
                z[i] = old + s;
                let fz = objective(&z)?;
                evals += 1;
                if fz > f {
                    f = fz;
                    improved = true;
                    break 'coords;
                }
                z[i] = old;
            }
        }
        if improved {
            step = (step * 2.0).min(1e8);
        } else {
            step *= 0.5;
            let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if step < 1e-10 * scale {
                break;
            }
        }
    }
    Ok((z, f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualRepresentation {
    /// `max_Y exp(E[ln Y ln X]) / ρ⋄(Y)` over the family.
    pub value: f64,
    pub best_index: usize,
    pub best: PositiveRandomVariable,
    /// `ρ(X) - value`; nonnegative up to rounding.
    pub gap: f64,
    /// `Y >= 1` in every state.
    pub monotone_marker: bool,
    /// `E[ln Y] = 1`.
    pub homogeneity_marker: bool,
}

pub fn dual_representation_eval(
    spec: &RiskMeasureSpec,
    x: &PositiveRandomVariable,
    p: &FiniteProbSpace,
    family: &[PositiveRandomVariable],
) -> Result<DualRepresentation> {
    dual_representation_eval_with(spec, x, p, family, &ConjugateSearch::default())
}

/// Like [`dual_representation_eval`]; `ln X` is always added to the search
/// hints, which makes each computed `ρ⋄(Y)` large enough that the dual
/// value cannot exceed `ρ(X)`.
pub fn dual_representation_eval_with(
    spec: &RiskMeasureSpec,
    x: &PositiveRandomVariable,
    p: &FiniteProbSpace,
    family: &[PositiveRandomVariable],
    search: &ConjugateSearch,
) -> Result<DualRepresentation> {
    if family.is_empty() {
        return Err(invalid_param("dual_family", "must contain at least one element"));
    }
    p.check_len(x.len())?;
    let lx = x.ln_values();
    let mut search = search.clone();
    search.hints.push(lx.clone());
    let rho = log_risk(spec, &lx, p)?;

    let mut best = (f64::NEG_INFINITY, 0usize);
    for (k, y) in family.iter().enumerate() {
        let conj = rho_gg_conjugate_with(spec, y, p, &search)?;
        let w = y.ln_values();
        let pairing: f64 = w.iter().zip(&lx).zip(p.probs()).map(|((a, b), q)| q * a * b).sum();
        let term = pairing - conj.value.ln();
        if term > best.0 || k == 0 {
            best = (term, k);
        }
    }
    let y = family[best.1].clone();
    let wy = y.ln_values();
    let value = best.0.exp();
    Ok(DualRepresentation {
        value,
        best_index: best.1,
        gap: rho.exp() - value,
        monotone_marker: y.values().iter().all(|v| *v >= 1.0),
        homogeneity_marker: (p.expect(&wy) - 1.0).abs() <= 1e-9,
        best: y,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyDual {
    pub value: f64,
    /// `dQ*/dP = X^p / E[X^p]`.
    pub density: Vec<f64>,
    /// `H(Q*, P)`.
    pub entropy: f64,
}

/// `sup_Q exp(E_Q[ln X] - H(Q, P)/p)` in closed form.
pub fn entropy_dual_pnorm(x: &PositiveRandomVariable, prob: &FiniteProbSpace, p: f64) -> Result<EntropyDual> {
    prob.check_len(x.len())?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(invalid_param("p", format!("must be positive, got {p}")));
    }
    let lx = x.ln_values();
    let a: Vec<f64> = lx.iter().map(|v| p * v).collect();
    let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + a
        .iter()
        .zip(prob.probs())
        .map(|(v, q)| q * (v - m).exp())
        .sum::<f64>()
        .ln();
    let log_density: Vec<f64> = a.iter().map(|v| v - lse).collect();
    let density: Vec<f64> = log_density.iter().map(|v| v.exp()).collect();
    let q: Vec<f64> = density.iter().zip(prob.probs()).map(|(d, pi)| d * pi).collect();
    let entropy: f64 = q.iter().zip(&log_density).map(|(qi, l)| qi * l).sum();
    let eq_log: f64 = q.iter().zip(&lx).map(|(qi, l)| qi * l).sum();
    Ok(EntropyDual {
        value: (eq_log - entropy / p).exp(),
        density,
        entropy,
    })
}

/// `exp(E_Q[ln X] - H(Q, P)/p)` for probabilities `q`.
pub fn entropy_dual_objective(x: &PositiveRandomVariable, prob: &FiniteProbSpace, p: f64, q: &[f64]) -> f64 {
    let lx = x.ln_values();
    let mut acc = 0.0;
    for ((qi, pi), l) in q.iter().zip(prob.probs()).zip(&lx) {
        if *qi > 0.0 {
            acc += qi * l - qi * (qi / pi).ln() / p;
        }
    }
    acc.exp()
}

/// Convenience check: the closed-form value equals `||X||_p`.
pub fn entropy_duality_gap(x: &PositiveRandomVariable, prob: &FiniteProbSpace, p: f64) -> Result<f64> {
    Ok((entropy_dual_pnorm(x, prob, p)?.value - p_norm(x, prob, p)?).abs())
}
