//! Seeded instance generators shared by the property suites.
//!
//! Every trial gets its own ChaCha8 stream derived from `(seed, trial)`,
//! so results do not depend on how trials are scheduled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::riskmeasures::{FiniteProbSpace, PositiveRandomVariable, ScenarioMeasure};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Point of the probability simplex, uniformly distributed.
pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.max(1e-12)
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// Uniform or random-simplex probabilities on `n` states, half the time each.
pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteProbSpace {
    if rng.random_bool(0.5) {
        FiniteProbSpace::uniform(n).expect("n >= 1")
    } else {
        FiniteProbSpace::new(random_simplex(rng, n)).expect("normalized simplex point")
    }
}

pub fn random_size(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// Values `exp(N(0, 1))`.
pub fn random_lognormal(rng: &mut impl Rng, n: usize) -> PositiveRandomVariable {
    let v = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z.exp()
        })
        .collect();
    PositiveRandomVariable::new(v).expect("exp of a normal is positive")
}

/// Random `Q << P` with uniformly distributed probabilities.
pub fn random_scenario(rng: &mut impl Rng, p: &FiniteProbSpace) -> ScenarioMeasure {
    let q = random_simplex(rng, p.len());
    ScenarioMeasure::from_probs(&q, p).expect("simplex point")
}

/// Space with `n ∈ [2, 16]` states and a log-normal variable on it.
pub fn random_instance(rng: &mut impl Rng) -> (FiniteProbSpace, PositiveRandomVariable) {
    let n = random_size(rng, 2, 16);
    let p = random_space(rng, n);
    let x = random_lognormal(rng, n);
    (p, x)
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| trial_rng(7, 3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = trial_rng(7, 3).random();
        let y: u64 = trial_rng(7, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn instances_are_valid() {
        for t in 0..200 {
            let mut rng = trial_rng(11, t);
            let (p, x) = random_instance(&mut rng);
            assert!((2..=16).contains(&p.len()));
            assert_eq!(p.len(), x.len());
            let q = random_scenario(&mut rng, &p);
            assert!((p.expect(q.density()) - 1.0).abs() < 1e-12);
        }
    }
}
