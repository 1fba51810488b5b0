//! GG-convex conjugation and friends, all computed on the convex
//! representation `g = ln ∘ f ∘ exp`, where `f⋄ = exp ∘ g* ∘ ln`.

mod calculus;
mod convolve;

pub use calculus::{apply_rule, conjugate_calculus, duality_transform, CalculusResult, CalculusRule, TransformParams};
pub use convolve::{additive_inf_convolution, mult_inf_convolution};

use crate::error::{Error, Result};
use crate::gridfn::{finite_range, ConvexRep, GridFunction, LogGrid, Tail, Tails, UniformGrid};

/// Relative slack when deciding whether a dual slope lies beyond an
/// extended tail's slope.
const TAIL_SLOPE_SLACK: f64 = 1e-9;

/// Outcome of a discrete Fenchel conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct FenchelResult {
    pub rep: ConvexRep,
    /// Primal index attaining the sup at each dual node; `None` where the
    /// conjugate is `+inf`.
    pub argmax: Vec<Option<usize>>,
    /// Slopes of the first and last lower-hull edges. Dual slopes inside
    /// this range are attained strictly inside the primal domain.
    pub coverage: Option<(f64, f64)>,
}

/// Lower convex hull of `(ts[i], gs[i])` for `i in idx`, as indices.
fn lower_hull(ts: &[f64], gs: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(hi - lo + 1);
    for i in lo..=hi {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b if it lies on or above the chord a–i.
            let cross = (ts[b] - ts[a]) * (gs[i] - gs[a]) - (gs[b] - gs[a]) * (ts[i] - ts[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

fn edge_slope(ts: &[f64], gs: &[f64], a: usize, b: usize) -> f64 {
    (gs[b] - gs[a]) / (ts[b] - ts[a])
}

/// `g*(s) = sup_t {s t - g(t)}` on the nodes of `dual`.
///
/// The sup runs over the primal grid points plus, for extended tails, the
/// rays beyond the grid; the latter only decide where `g*` is `+inf`.
pub fn fenchel_conjugate(g: &ConvexRep, dual: &UniformGrid) -> Result<ConvexRep> {
    fenchel_conjugate_detailed(g, dual).map(|r| r.rep)
}

pub fn fenchel_conjugate_detailed(g: &ConvexRep, dual: &UniformGrid) -> Result<FenchelResult> {
    let (lo, hi) = finite_range(&g.values)?.ok_or(Error::Improper)?;
    let m = dual.len();
    let ss = dual.points();
    let ts = g.grid.points();
    let gs = &g.values;

    if gs[lo..=hi].contains(&f64::NEG_INFINITY) {
        return Ok(FenchelResult {
            rep: ConvexRep::new(*dual, vec![f64::INFINITY; m], Tails::TRUNCATE)?,
            argmax: vec![None; m],
            coverage: None,
        });
    }

    if lo == hi {
        // One-point domain: g* is affine with slope t_lo.
        let values = ss.iter().map(|s| s * ts[lo] - gs[lo]).collect();
        return Ok(FenchelResult {
            rep: ConvexRep::new(*dual, values, Tails::EXTEND)?,
            argmax: vec![Some(lo); m],
            coverage: None,
        });
    }

    let n = ts.len();
    let left_bound = (g.tails.left == Tail::Extend && lo == 0).then(|| {
        let s = edge_slope(&ts, gs, 0, 1);
        s - TAIL_SLOPE_SLACK * s.abs().max(1.0)
    });
    let right_bound = (g.tails.right == Tail::Extend && hi == n - 1).then(|| {
        let s = edge_slope(&ts, gs, n - 2, n - 1);
        s + TAIL_SLOPE_SLACK * s.abs().max(1.0)
    });

    let hull = lower_hull(&ts, gs, lo, hi);
    let slopes: Vec<f64> = hull.windows(2).map(|w| edge_slope(&ts, gs, w[0], w[1])).collect();

    let mut values = Vec::with_capacity(m);
    let mut argmax = Vec::with_capacity(m);
    let mut k = 0;
    for &s in &ss {
        if left_bound.is_some_and(|b| s < b) || right_bound.is_some_and(|b| s > b) {
            values.push(f64::INFINITY);
            argmax.push(None);
            continue;
        }
        // Strict comparison keeps the smallest abscissa on ties.
        while k < slopes.len() && s > slopes[k] {
            k += 1;
        }
        let i = hull[k];
        values.push(s * ts[i] - gs[i]);
        argmax.push(Some(i));
    }
    Ok(FenchelResult {
        rep: ConvexRep::new(*dual, values, Tails::TRUNCATE)?,
        argmax,
        coverage: Some((slopes[0], slopes[slopes.len() - 1])),
    })
}

/// Conjugate of the convex representation, mapping the two degenerate
/// inputs to their limits: `g ≡ +inf` gives `g* ≡ -inf`.
fn conjugate_log_values(g: &ConvexRep, dual: &UniformGrid) -> Result<FenchelResult> {
    match fenchel_conjugate_detailed(g, dual) {
        Err(Error::Improper) => Ok(FenchelResult {
            rep: ConvexRep {
                grid: *dual,
                values: vec![f64::NEG_INFINITY; dual.len()],
                tails: Tails::TRUNCATE,
            },
            argmax: vec![None; dual.len()],
            coverage: None,
        }),
        other => other,
    }
}

/// `f⋄(y) = sup_x x^{ln y} / f(x)` at the points of `dual`.
///
/// If `f` vanishes at a grid point the result is `+inf` everywhere; if `f`
/// is `+inf` everywhere the result is identically zero.
pub fn gg_conjugate(f: &GridFunction, dual: &LogGrid) -> Result<GridFunction> {
    gg_conjugate_detailed(f, dual).map(|c| c.function)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugate {
    pub function: GridFunction,
    pub argmax: Vec<Option<usize>>,
    pub coverage: Option<(f64, f64)>,
}

pub fn gg_conjugate_detailed(f: &GridFunction, dual: &LogGrid) -> Result<Conjugate> {
    let r = conjugate_log_values(&f.to_convex_rep(), dual.log_grid())?;
    Ok(Conjugate {
        function: GridFunction::from_log_values(*dual, r.rep.values, r.rep.tails)?,
        argmax: r.argmax,
        coverage: r.coverage,
    })
}

/// Dual nodes whose maximizer lies strictly inside the primal domain, i.e.
/// where grid truncation cannot have cut off the sup.
pub fn dual_interior(c: &Conjugate, primal: &GridFunction) -> Vec<bool> {
    let Some((lo, hi)) = primal.domain() else {
        return vec![false; c.argmax.len()];
    };
    c.argmax.iter().map(|a| a.is_some_and(|i| i > lo && i < hi)).collect()
}

/// Uniform slope grid spanning the lower-hull slopes of `f`'s convex
/// representation, with `n` points. Falls back to a unit window around the
/// slope when the range is degenerate (GG-affine or one-point inputs), with
/// an odd point count so the central slope is a node.
pub fn matched_dual_grid(f: &GridFunction, n: usize) -> Result<UniformGrid> {
    let g = f.to_convex_rep();
    let ts = g.grid.points();
    let span = match finite_range(&g.values)? {
        Some((lo, hi)) if lo < hi && g.values[lo..=hi].iter().all(|v| v.is_finite()) => {
            let hull = lower_hull(&ts, &g.values, lo, hi);
            let first = edge_slope(&ts, &g.values, hull[0], hull[1]);
            let k = hull.len();
            let last = edge_slope(&ts, &g.values, hull[k - 2], hull[k - 1]);
            Some((first, last))
        }
        _ => None,
    };
    match span {
        Some((a, b)) if b - a > 1e-9 * a.abs().max(b.abs()).max(1.0) => UniformGrid::new(a, b, n),
        Some((a, b)) => {
            let mid = 0.5 * (a + b);
            UniformGrid::new(mid - 1.0, mid + 1.0, n | 1)
        }
        None => UniformGrid::new(-1.0, 1.0, n | 1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Biconjugate {
    /// `f⋄⋄` on the grid of `f`.
    pub function: GridFunction,
    /// `f⋄` on the intermediate dual grid.
    pub conjugate: GridFunction,
    pub dual_grid: UniformGrid,
}

/// `f⋄⋄` on `f`'s own grid, through a matched dual grid of the same size.
pub fn gg_biconjugate(f: &GridFunction) -> Result<GridFunction> {
    gg_biconjugate_detailed(f, f.len()).map(|b| b.function)
}

/// Like [`gg_biconjugate`] with `dual_points` nodes on the dual grid.
///
/// Discretely `f⋄⋄ <= f` holds exactly at every grid point; values that
/// exceed `f` by no more than the rounding error of the two conjugations
/// are snapped to `f`.
pub fn gg_biconjugate_detailed(f: &GridFunction, dual_points: usize) -> Result<Biconjugate> {
    let dual = matched_dual_grid(f, dual_points)?;
    let first = conjugate_log_values(&f.to_convex_rep(), &dual)?;
    let primal = *f.grid().log_grid();
    let second = conjugate_log_values(&first.rep, &primal)?;

    let g = f.log_values();
    let max_s = dual.start().abs().max(dual.end().abs());
    let max_t = primal.start().abs().max(primal.end().abs());
    let max_g = g.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = 64.0 * f64::EPSILON * (max_g + max_s * max_t);
    let values = second
        .rep
        .values
        .iter()
        .zip(g)
        .map(|(&v, &gi)| if v > gi && v - gi <= bound { gi } else { v })
        .collect();

    Ok(Biconjugate {
        function: GridFunction::from_log_values(*f.grid(), values, Tails::TRUNCATE)?,
        conjugate: GridFunction::from_log_values(LogGrid::from_uniform(dual), first.rep.values, first.rep.tails)?,
        dual_grid: dual,
    })
}

/// Grid points of `f` where a biconjugate through dual slopes in
/// `[lo, hi]` is expected to reproduce `f`: inner nodes with finite
/// neighbours whose discrete subgradient lies inside the slope span.
pub fn interior_mask(f: &GridFunction, span: (f64, f64)) -> Vec<bool> {
    let g = f.log_values();
    let h = f.grid().log_spacing();
    let n = g.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                return false;
            }
            if !(g[i - 1].is_finite() && g[i].is_finite() && g[i + 1].is_finite()) {
                return false;
            }
            let left = (g[i] - g[i - 1]) / h;
            let right = (g[i + 1] - g[i]) / h;
            left >= span.0 && right <= span.1
        })
        .collect()
}
