//! Seeded generators of ordered distribution pairs with exact rational
//! probabilities, so every pair can be embedded for consistency checks.

use rand::seq::index::sample;
use rand::Rng;

use super::{independent_product, DiscreteDistribution, Rational};
use crate::random::standard_normal;

/// Log-normal atoms with random rational probabilities `k_i / N`,
/// `N <= 24`, on `n` atoms drawn from `[1, max_atoms]`.
pub fn random_distribution(rng: &mut impl Rng, max_atoms: usize) -> DiscreteDistribution {
    let n = rng.random_range(1..=max_atoms.max(1));
    let total = rng.random_range(n.max(2)..=24.max(n)) as u64;
    // n - 1 distinct cut points in 1..total
    let mut cuts: Vec<u64> = sample(rng, total as usize - 1, n - 1)
        .into_iter()
        .map(|c| c as u64 + 1)
        .collect();
    cuts.sort_unstable();
    let mut probs = Vec::with_capacity(n);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        probs.push(Rational::new(c - prev, total));
        prev = c;
    }
    let atoms = (0..n).map(|_| standard_normal(rng).exp()).collect();
    DiscreteDistribution::from_rational(atoms, probs).expect("valid construction")
}

fn with_atoms(d: &DiscreteDistribution, atoms: Vec<f64>) -> DiscreteDistribution {
    let probs = d.exact_probs().expect("generated laws are exact").to_vec();
    DiscreteDistribution::from_rational(atoms, probs).expect("positive atoms")
}

/// `(F, G)` with `G` obtained by scaling each atom of `F` up by a factor
/// `>= 1`, so `F <=st G`.
pub fn random_st_pair(rng: &mut impl Rng, max_atoms: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    let f = random_distribution(rng, max_atoms);
    let up = f
        .atoms()
        .iter()
        .map(|x| {
            if rng.random_bool(0.3) {
                *x
            } else {
                x * rng.random_range(0.0..1.5f64).exp()
            }
        })
        .collect();
    let g = with_atoms(&f, up);
    (f, g)
}

/// Zero-log-mean multiplier on up to `max_atoms` equiprobable atoms.
pub fn random_unit_multiplier(rng: &mut impl Rng, max_atoms: usize) -> DiscreteDistribution {
    let m = rng.random_range(1..=max_atoms.max(1));
    let mut z: Vec<f64> = (0..m).map(|_| 0.7 * standard_normal(rng)).collect();
    let mean = z.iter().sum::<f64>() / m as f64;
    z.iter_mut().for_each(|v| *v -= mean);
    DiscreteDistribution::equiprobable(z.into_iter().map(f64::exp).collect()).expect("positive atoms")
}

/// `(X, X Z)` with `Z` independent of `X` and `G(Z) = 1`: ordered in the
/// GA-convex order.
pub fn random_product_pair(rng: &mut impl Rng, max_atoms: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    let f = random_distribution(rng, max_atoms);
    let z = random_unit_multiplier(rng, 4);
    let g = independent_product(&f, &z).expect("positive atoms");
    (f, g)
}

/// A GA-convex pair followed by a pointwise increase: ordered in the
/// increasing GA-convex order.
pub fn random_ga_icx_pair(rng: &mut impl Rng, max_atoms: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    let (f, g) = random_product_pair(rng, max_atoms);
    let shift = rng.random_range(0.0..0.5f64);
    let up = g
        .atoms()
        .iter()
        .map(|y| {
            if rng.random_bool(0.5) {
                y * (shift * rng.random_range(0.0..1.0f64)).exp()
            } else {
                *y
            }
        })
        .collect();
    let g = with_atoms(&g, up);
    (f, g)
}

/// Equal-geometric-mean pairs for the single-crossing criterion: half the
/// time a uniform log-spread about the common log-mean (one crossing),
/// otherwise per-atom spreads re-centred on that mean (any number of
/// crossings).
pub fn random_crossing_pair(rng: &mut impl Rng, max_atoms: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    let f = random_distribution(rng, max_atoms.max(2));
    let logs: Vec<f64> = f.atoms().iter().map(|x| x.ln()).collect();
    let m = f.expect(f64::ln);
    let mut spread: Vec<f64> = if rng.random_bool(0.5) {
        let s = rng.random_range(1.0..3.0);
        logs.iter().map(|l| m + s * (l - m)).collect()
    } else {
        logs.iter()
            .map(|l| m + rng.random_range(0.2..3.0) * (l - m) + 0.3 * standard_normal(rng))
            .collect()
    };
    let shift = f.probs().iter().zip(&spread).map(|(p, l)| p * l).sum::<f64>() - m;
    spread.iter_mut().for_each(|l| *l -= shift);
    let g = with_atoms(&f, spread.into_iter().map(f64::exp).collect());
    (f, g)
}

/// Independent pair, usually unordered.
pub fn random_pair(rng: &mut impl Rng, max_atoms: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    (random_distribution(rng, max_atoms), random_distribution(rng, max_atoms))
}

#[cfg(test)]
mod tests {
    use super::super::{ga_order_leq, order_leq, GaOrder, Order};
    use super::*;
    use crate::random::trial_rng;

    #[test]
    fn generated_pairs_are_ordered() {
        for t in 0..200 {
            let mut rng = trial_rng(5, t);
            let (f, g) = random_st_pair(&mut rng, 8);
            assert!(order_leq(&f, &g, Order::St).holds);
            let (f, g) = random_product_pair(&mut rng, 8);
            assert!(ga_order_leq(&f, &g, GaOrder::GaCx).unwrap().holds);
            let (f, g) = random_ga_icx_pair(&mut rng, 8);
            assert!(ga_order_leq(&f, &g, GaOrder::GaIcx).unwrap().holds);
            let d = random_distribution(&mut rng, 8);
            assert!(d.exact_probs().is_some() && d.len() <= 8);
        }
    }
}
