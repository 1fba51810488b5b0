//! Slow, obviously-correct reference implementations used to cross-check
//! the fast paths. Public so that integration tests and the acceptance
//! runner can use them.

use crate::error::{Error, Result};
use crate::extreal::{ExtendedPositive, ProductMode};
use crate::gridfn::{ConvexRep, GridFunction, Tails, UniformGrid};

/// `g*(s) = max_i s t_i - g_i` by a double loop.
pub fn fenchel_brute(g: &ConvexRep, dual: &UniformGrid) -> Result<ConvexRep> {
    let ts = g.grid.points();
    if g.values.iter().all(|v| *v == f64::INFINITY) {
        return Err(Error::Improper);
    }
    let values = dual
        .points()
        .iter()
        .map(|s| {
            ts.iter()
                .zip(&g.values)
                .filter(|(_, v)| **v < f64::INFINITY)
                .map(|(t, v)| {
                    if *v == f64::NEG_INFINITY {
                        f64::INFINITY
                    } else {
                        s * t - v
                    }
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    ConvexRep::new(*dual, values, Tails::TRUNCATE)
}

/// Greatest convex minorant of finite samples `(ts, gs)`, evaluated at the
/// sample points, by minimizing over all chords.
pub fn lower_convex_envelope(ts: &[f64], gs: &[f64]) -> Vec<f64> {
    let n = ts.len();
    (0..n)
        .map(|i| {
            let mut best = gs[i];
            for a in 0..=i {
                for b in i..n {
                    if a == b {
                        continue;
                    }
                    let w = (ts[i] - ts[a]) / (ts[b] - ts[a]);
                    best = best.min(gs[a] + w * (gs[b] - gs[a]));
                }
            }
            best
        })
        .collect()
}

/// Multiplicative inf-convolution evaluated on the linear scale with
/// [`ExtendedPositive`] products, returned as log-values on the sum grid.
pub fn mult_inf_convolution_direct(f: &GridFunction, g: &GridFunction) -> Vec<f64> {
    let (fv, gv) = (f.values(), g.values());
    let mut out = vec![ExtendedPositive::Infinity; fv.len() + gv.len() - 1];
    for (i, a) in fv.iter().enumerate() {
        for (j, b) in gv.iter().enumerate() {
            let p = a.mul(*b, ProductMode::Convex);
            if p < out[i + j] {
                out[i + j] = p;
            }
        }
    }
    out.into_iter().map(|v| v.ln()).collect()
}

/// Random piecewise-linear convex `g` (a max of 1 to 4 affine pieces,
/// nondecreasing when `increasing`) with breakpoints in `[lo, hi]`.
pub fn random_convex_pl(rng: &mut impl rand::Rng, lo: f64, hi: f64, increasing: bool) -> Vec<(f64, f64)> {
    let k = rng.random_range(1..=4);
    (0..k)
        .map(|_| {
            let mut a: f64 = crate::random::standard_normal(rng);
            if increasing {
                a = a.abs();
            }
            // pass through a random point of the range
            let u = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let c = crate::random::standard_normal(rng);
            (a, c - a * u)
        })
        .collect()
}

pub fn eval_convex_pl(pieces: &[(f64, f64)], u: f64) -> f64 {
    pieces.iter().map(|(a, b)| a * u + b).fold(f64::NEG_INFINITY, f64::max)
}

/// `E[g(ln X)]` by direct summation over the atoms.
pub fn expect_ga_test(d: &crate::orders::DiscreteDistribution, g: &dyn Fn(f64) -> f64) -> f64 {
    d.atoms().iter().zip(d.probs()).map(|(x, p)| p * g(x.ln())).sum()
}

/// Searches `samples` random GA-convex test functions `g ∘ ln` (plus
/// single hinges) for one with `E[f(X)] > E[f(Y)] + slack`; returns the
/// largest excess found, if any.
pub fn ga_order_brute(
    f: &crate::orders::DiscreteDistribution,
    g: &crate::orders::DiscreteDistribution,
    increasing: bool,
    rng: &mut impl rand::Rng,
    samples: usize,
    slack: f64,
) -> Option<f64> {
    let lo = f.min().min(g.min()).ln();
    let hi = f.max().max(g.max()).ln();
    let mut worst: Option<f64> = None;
    for s in 0..samples {
        let pieces = if s % 2 == 0 {
            random_convex_pl(rng, lo, hi, increasing)
        } else {
            // a single hinge, the extreme rays of the cone
            let t = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            if !increasing && rng.random_bool(0.5) {
                vec![(-1.0, t), (0.0, 0.0)]
            } else {
                vec![(1.0, -t), (0.0, 0.0)]
            }
        };
        let h = |u: f64| eval_convex_pl(&pieces, u);
        let excess = expect_ga_test(f, &h) - expect_ga_test(g, &h);
        let scale = expect_ga_test(f, &|u| h(u).abs())
            .max(expect_ga_test(g, &|u| h(u).abs()))
            .max(1.0);
        if excess > slack * scale {
            worst = Some(worst.map_or(excess, |w: f64| w.max(excess)));
        }
    }
    worst
}
