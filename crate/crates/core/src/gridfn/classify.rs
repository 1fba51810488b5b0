//! Discrete convexity tests in the four coordinate pairs.
//!
//! All tests work on adjacent triples, which is complete for discrete
//! convexity (slopes nondecreasing) on any sorted set of abscissae.

use super::GridFunction;
use crate::error::{Error, Result};
use crate::extreal::ExtendedPositive;
use crate::riskmeasures::{FiniteProbSpace, PositiveRandomVariable};

/// Relative slack applied to every midpoint comparison.
pub const MIDPOINT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityCheck {
    Holds,
    /// The triple `(i, (i + j) / 2, j)` violates the inequality.
    Violated {
        i: usize,
        j: usize,
    },
}

impl ConvexityCheck {
    pub fn holds(&self) -> bool {
        matches!(self, ConvexityCheck::Holds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvexityFlags {
    pub aa: bool,
    pub ag: bool,
    pub ga: bool,
    pub gg: bool,
    pub nondecreasing: bool,
}

/// First center index `m` whose triple violates convexity of `ys`, using
/// the convex product conventions for extended values:
/// a `+inf` endpoint imposes nothing, a `-inf` endpoint forces `-inf`.
/// `weight(m)` is the relative position of the center between its
/// neighbours.
fn first_violation(ys: &[f64], weight: impl Fn(usize) -> f64) -> Option<usize> {
    (1..ys.len().saturating_sub(1)).find(|&m| {
        let (l, c, r) = (ys[m - 1], ys[m], ys[m + 1]);
        if l == f64::INFINITY || r == f64::INFINITY {
            return false;
        }
        if l == f64::NEG_INFINITY || r == f64::NEG_INFINITY {
            return c != f64::NEG_INFINITY;
        }
        if c == f64::NEG_INFINITY {
            return false;
        }
        if c == f64::INFINITY {
            return true;
        }
        let w = weight(m);
        let interp = l + w * (r - l);
        let slack = MIDPOINT_SLACK * l.abs().max(c.abs()).max(r.abs());
        c > interp + slack
    })
}

fn verdict(v: Option<usize>) -> ConvexityCheck {
    match v {
        None => ConvexityCheck::Holds,
        Some(m) => ConvexityCheck::Violated { i: m - 1, j: m + 1 },
    }
}

/// Discrete GG-convexity: convexity of the log-values over the uniform grid
/// of log-abscissae.
pub fn check_gg_convex(f: &GridFunction) -> ConvexityCheck {
    verdict(first_violation(f.log_values(), |_| 0.5))
}

/// Discrete GG-concavity, with the concave convention `0 · inf = 0`.
pub fn check_gg_concave(f: &GridFunction) -> ConvexityCheck {
    let neg: Vec<f64> = f.log_values().iter().map(|l| -l).collect();
    verdict(first_violation(&neg, |_| 0.5))
}

/// Relative position of `x_m` between `x_{m-1}` and `x_{m+1}` for
/// `x = e^t`, computed without forming `e^t`.
fn linear_weight(ts: &[f64], m: usize) -> f64 {
    let (a, b) = (ts[m] - ts[m + 1], ts[m - 1] - ts[m + 1]);
    (a.exp() - b.exp()) / -b.exp_m1()
}

/// Linear-scale values, rescaled by a common factor if they would overflow.
fn linear_values(logs: &[f64]) -> Vec<f64> {
    let top = logs
        .iter()
        .cloned()
        .filter(|l| l.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if top > 700.0 { top } else { 0.0 };
    logs.iter().map(|&l| (l - shift).exp()).collect()
}

fn nondecreasing(logs: &[f64]) -> bool {
    logs.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        if b == f64::INFINITY || a == f64::NEG_INFINITY {
            true
        } else if a == f64::INFINITY || b == f64::NEG_INFINITY {
            false
        } else {
            b >= a - MIDPOINT_SLACK * a.abs().max(b.abs())
        }
    })
}

/// AA: `(x, f)`; AG: `(x, ln f)`; GA: `(ln x, f)`; GG: `(ln x, ln f)`.
pub fn classify_convexities(f: &GridFunction) -> ConvexityFlags {
    let logs = f.log_values();
    let lin = linear_values(logs);
    let ts: Vec<f64> = (0..f.len()).map(|i| f.grid().t(i)).collect();
    let w = |m: usize| linear_weight(&ts, m);
    ConvexityFlags {
        aa: first_violation(&lin, w).is_none(),
        ag: first_violation(logs, w).is_none(),
        ga: first_violation(&lin, |_| 0.5).is_none(),
        gg: first_violation(logs, |_| 0.5).is_none(),
        nondecreasing: nondecreasing(logs),
    }
}

/// `x {f''(x) f(x) - f'(x)^2} + f(x) f'(x)`, which is nonnegative
/// wherever a twice differentiable positive `f` is GG-convex.
pub fn second_order_expression(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    d2f: &dyn Fn(f64) -> f64,
    x: f64,
) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("must be positive and finite, got {x}"),
        });
    }
    let (v, d1, d2) = (f(x), df(x), d2f(x));
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter {
            name: "f(x)",
            reason: format!("must be positive and finite, got {v}"),
        });
    }
    Ok(x * (d2 * v - d1 * d1) + v * d1)
}

/// Second-order GG-convexity test at `x`, with relative tolerance
/// [`MIDPOINT_SLACK`] on the magnitude of the terms.
pub fn second_order_gg_test(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    d2f: &dyn Fn(f64) -> f64,
    x: f64,
) -> Result<bool> {
    let expr = second_order_expression(f, df, d2f, x)?;
    let (v, d1, d2) = (f(x), df(x), d2f(x));
    let scale = x * ((d2 * v).abs() + d1 * d1) + (v * d1).abs();
    Ok(expr >= -MIDPOINT_SLACK * scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenCheck {
    /// `f(G[X])`
    pub lhs: ExtendedPositive,
    /// `G[f(X)]`
    pub rhs: ExtendedPositive,
    pub holds: bool,
}

/// Geometric Jensen inequality `f(G[X]) <= G[f(X)]`.
pub fn gg_jensen_check(f: &GridFunction, x: &PositiveRandomVariable, p: &FiniteProbSpace) -> Result<JensenCheck> {
    if x.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: x.len(),
        });
    }
    let log_g: f64 = p.probs().iter().zip(x.values()).map(|(pi, xi)| pi * xi.ln()).sum();
    let lhs = f.eval_ln_at(log_g);
    let mut any_inf = false;
    let mut any_zero = false;
    let mut acc = 0.0;
    for (pi, xi) in p.probs().iter().zip(x.values()) {
        let l = f.eval_ln(*xi);
        if l == f64::INFINITY {
            any_inf = true;
        } else if l == f64::NEG_INFINITY {
            any_zero = true;
        } else {
            acc += pi * l;
        }
    }
    let rhs = if any_inf {
        f64::INFINITY
    } else if any_zero {
        f64::NEG_INFINITY
    } else {
        acc
    };
    let holds = if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
        true
    } else {
        lhs <= rhs + MIDPOINT_SLACK * rhs.abs().max(1.0)
    };
    Ok(JensenCheck {
        lhs: ExtendedPositive::from_ln(lhs),
        rhs: ExtendedPositive::from_ln(rhs),
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{make_grid_function, FunctionSpec, LogGrid, Tails};
    use super::*;

    fn g() -> LogGrid {
        LogGrid::new(0.1, 10.0, 129).unwrap()
    }

    #[test]
    fn exp_holds_everywhere() {
        let f = make_grid_function(&FunctionSpec::Exp, g()).unwrap();
        assert!(check_gg_convex(&f).holds());
        let flags = classify_convexities(&f);
        assert!(flags.aa && flags.ag && flags.ga && flags.gg && flags.nondecreasing);
    }

    #[test]
    fn log_like_samples_fail() {
        let grid = g();
        let logs = (0..grid.len()).map(|i| grid.x(i).ln().max(1e-6).ln()).collect();
        let f = GridFunction::from_log_values(grid, logs, Tails::TRUNCATE).unwrap();
        assert!(matches!(check_gg_convex(&f), ConvexityCheck::Violated { .. }));
    }

    #[test]
    fn gg_affine_is_both() {
        let f = make_grid_function(
            &FunctionSpec::GgAffine {
                scale: 3.7,
                exponent: -1.3,
            },
            g(),
        )
        .unwrap();
        assert!(check_gg_convex(&f).holds());
        assert!(check_gg_concave(&f).holds());
    }

    #[test]
    fn square_flags() {
        let f = make_grid_function(
            &FunctionSpec::GgAffine {
                scale: 1.0,
                exponent: 2.0,
            },
            g(),
        )
        .unwrap();
        let flags = classify_convexities(&f);
        assert_eq!(
            flags,
            ConvexityFlags {
                aa: true,
                ag: false,
                ga: true,
                gg: true,
                nondecreasing: true
            }
        );
    }

    #[test]
    fn violation_reports_triple() {
        let grid = LogGrid::new(1.0, 8.0, 4).unwrap();
        let f = GridFunction::from_log_values(grid, vec![0.0, 2.0, 1.0, 3.0], Tails::TRUNCATE).unwrap();
        assert_eq!(check_gg_convex(&f), ConvexityCheck::Violated { i: 0, j: 2 });
    }

    #[test]
    fn second_order_examples() {
        let e = std::f64::consts::E;
        let expr = second_order_expression(&f64::exp, &f64::exp, &f64::exp, 1.0).unwrap();
        assert!((expr - e * e).abs() < 1e-12);
        assert!(second_order_gg_test(&f64::exp, &f64::exp, &f64::exp, 1.0).unwrap());
        // x^B: x(B(B-1)x^{2B-2} - B^2 x^{2B-2}) + B x^{2B-1} = 0.
        for &b in &[0.5, 1.0, 2.0, -1.5] {
            let f = move |x: f64| x.powf(b);
            let df = move |x: f64| b * x.powf(b - 1.0);
            let d2f = move |x: f64| b * (b - 1.0) * x.powf(b - 2.0);
            for &x in &[0.3, 1.0, 4.0] {
                let expr = second_order_expression(&f, &df, &d2f, x).unwrap();
                assert!(
                    expr.abs() < 1e-12 * x.powf(2.0 * b - 1.0).max(1.0),
                    "b={b} x={x} expr={expr}"
                );
                assert!(second_order_gg_test(&f, &df, &d2f, x).unwrap());
            }
        }
        // ln x at x = e: e(-1/e^2 - 1/e^2) + 1/e = -1/e.
        let ln = |x: f64| x.ln();
        let dln = |x: f64| 1.0 / x;
        let d2ln = |x: f64| -1.0 / (x * x);
        assert!(!second_order_gg_test(&ln, &dln, &d2ln, e).unwrap());
        assert!(second_order_gg_test(&ln, &dln, &d2ln, 0.5).is_err());
    }

    #[test]
    fn jensen_examples() {
        let e = std::f64::consts::E;
        let grid = LogGrid::new(0.5, 5.0, 4097).unwrap();
        let p = FiniteProbSpace::uniform(2).unwrap();
        let x = PositiveRandomVariable::new(vec![1.0, e]).unwrap();
        let f = make_grid_function(&FunctionSpec::Exp, grid).unwrap();
        let r = gg_jensen_check(&f, &x, &p).unwrap();
        assert!(r.holds);
        // f(G[X]) is interpolated between grid points; G[f(X)] uses exact nodes
        // only when 1 and e are nodes, so tolerances are loose-ish.
        assert!((r.lhs.to_f64() - e.sqrt().exp()).abs() < 1e-5 * 5.207);
        assert!((r.rhs.to_f64() - ((1.0 + e) / 2.0).exp()).abs() < 1e-5 * 6.417);

        let sq = make_grid_function(
            &FunctionSpec::GgAffine {
                scale: 1.0,
                exponent: 2.0,
            },
            grid,
        )
        .unwrap();
        let x = PositiveRandomVariable::new(vec![0.7, 1.9, 3.3]).unwrap();
        let p = FiniteProbSpace::new(vec![0.2, 0.5, 0.3]).unwrap();
        let r = gg_jensen_check(&sq, &x, &p).unwrap();
        assert!(r.holds);
        assert!((r.lhs.to_f64() - r.rhs.to_f64()).abs() < 1e-12 * r.rhs.to_f64());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn nondecreasing_fn() -> impl Strategy<Value = GridFunction> {
            (prop::collection::vec(0.0f64..1.0, 6..24), -2.0f64..2.0).prop_map(|(incs, start)| {
                let grid = LogGrid::new(0.25, 4.0, incs.len()).unwrap();
                let mut acc = start;
                let logs = incs
                    .iter()
                    .map(|d| {
                        acc += d * d * 3.0;
                        acc
                    })
                    .collect();
                GridFunction::from_log_values(grid, logs, Tails::TRUNCATE).unwrap()
            })
        }

        fn positive_fn() -> impl Strategy<Value = GridFunction> {
            prop::collection::vec(
                prop_oneof![8 => -5.0f64..5.0, 1 => Just(f64::INFINITY), 1 => Just(f64::NEG_INFINITY)],
                3..20,
            )
            .prop_filter_map("contiguous domain", |logs| {
                let grid = LogGrid::new(0.5, 2.0, logs.len()).unwrap();
                GridFunction::from_log_values(grid, logs, Tails::TRUNCATE).ok()
            })
        }

        proptest! {
            #[test]
            fn implication_diagram(f in nondecreasing_fn()) {
                let c = classify_convexities(&f);
                prop_assert!(c.nondecreasing);
                prop_assert!(!c.ag || c.aa);
                prop_assert!(!c.gg || c.ga);
                prop_assert!(!c.aa || c.ga);
                prop_assert!(!c.ag || c.gg);
            }

            #[test]
            fn concave_iff_reciprocal_convex(f in positive_fn()) {
                let r = f.recip();
                prop_assume!(r.is_ok());
                prop_assert_eq!(check_gg_concave(&f).holds(), check_gg_convex(&r.unwrap()).holds());
            }

            #[test]
            fn gg_check_is_convexity_of_rep(f in positive_fn()) {
                let rep = f.to_convex_rep();
                let ok = (1..rep.values.len() - 1).all(|m| {
                    let (l, c, r) = (rep.values[m - 1], rep.values[m], rep.values[m + 1]);
                    if l == f64::INFINITY || r == f64::INFINITY { true }
                    else if l == f64::NEG_INFINITY || r == f64::NEG_INFINITY { c == f64::NEG_INFINITY }
                    else { c <= 0.5 * (l + r) + MIDPOINT_SLACK * l.abs().max(c.abs()).max(r.abs()) }
                });
                prop_assert_eq!(ok, check_gg_convex(&f).holds());
            }
        }
    }
}
