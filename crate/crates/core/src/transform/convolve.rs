use crate::error::{Error, Result};
use crate::extreal::ln_mul_convex;
use crate::gridfn::{ConvexRep, GridFunction, LogGrid, Tails, UniformGrid};

const SPACING_TOL: f64 = 1e-9;

/// `(g ⊕ h)(t) = min_{t1 + t2 = t} g(t1) + h(t2)` over grid pairs, with
/// `-inf + inf = +inf`. Both grids must share the same spacing; the result
/// lives on the sum grid with `n_g + n_h - 1` points.
pub fn additive_inf_convolution(g: &ConvexRep, h: &ConvexRep) -> Result<ConvexRep> {
    let (dg, dh) = (g.grid.spacing(), h.grid.spacing());
    if (dg - dh).abs() > SPACING_TOL * dg.max(dh) {
        return Err(Error::IncompatibleGrids(format!("log-spacings differ: {dg} vs {dh}")));
    }
    let (n, m) = (g.values.len(), h.values.len());
    let len = n + m - 1;
    let start = g.grid.start() + h.grid.start();
    let grid = UniformGrid::new(start, g.grid.end() + h.grid.end(), len)?;
    let mut out = vec![f64::INFINITY; len];
    for (i, &a) in g.values.iter().enumerate() {
        if a == f64::INFINITY {
            continue;
        }
        for (j, &b) in h.values.iter().enumerate() {
            let v = ln_mul_convex(a, b);
            if v < out[i + j] {
                out[i + j] = v;
            }
        }
    }
    ConvexRep::new(grid, out, Tails::TRUNCATE)
}

/// `(f ⊗ g)(x) = inf_{x1 x2 = x} f(x1) g(x2)` over grid pairs, computed as
/// the additive inf-convolution of the convex representations.
pub fn mult_inf_convolution(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let rep = additive_inf_convolution(&f.to_convex_rep(), &g.to_convex_rep())?;
    GridFunction::from_log_values(LogGrid::from_uniform(rep.grid), rep.values, rep.tails)
}
