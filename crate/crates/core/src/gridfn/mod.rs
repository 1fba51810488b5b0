//! Functions `f: (0, inf) -> [0, inf]` sampled on log-uniform grids.
//!
//! A [`GridFunction`] stores `ln f` at the points of a [`LogGrid`]; that is
//! exactly its convex representation `g = ln ∘ f ∘ exp` sampled on the uniform
//! grid of log-abscissae. Storing logarithms keeps functions such as `e^x` on
//! `[1e-4, 1e4]` representable even though `e^{10^4}` overflows `f64`.
//!
//! Between grid points functions are interpolated GG-affinely (linearly in
//! `(ln x, ln f)`), so GG-affine functions `A x^B` are reproduced exactly.

mod classify;

pub use classify::{
    check_gg_concave, check_gg_convex, classify_convexities, gg_jensen_check, second_order_expression,
    second_order_gg_test, ConvexityCheck, ConvexityFlags, JensenCheck,
};

use crate::error::{Error, Result};
use crate::extreal::ExtendedPositive;

/// Finite values below this threshold are treated as exact zeros when a
/// function is built from linear-scale values.
pub const ZERO_CLAMP: f64 = 1e-300;

/// Uniform partition of `[start, end]` into `n - 1` equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    start: f64,
    end: f64,
    n: usize,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, n: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{start}, {end}]"
            )));
        }
        if start >= end {
            return Err(Error::InvalidGrid(format!("need start < end, got [{start}, {end}]")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Ok(Self { start, end, n })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / (self.n - 1) as f64
    }

    /// The `i`-th point. Endpoints are returned exactly, and the midpoint of
    /// an odd-sized symmetric grid is exactly zero.
    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i + 1 == self.n {
            self.end
        } else {
            self.start + (self.end - self.start) * (i as f64 / (self.n - 1) as f64)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Index `i` with `point(i) <= t < point(i + 1)`, clamped to
    /// `0..=n-2`.
    pub(crate) fn bracket(&self, t: f64) -> usize {
        let raw = ((t - self.start) / self.spacing()).floor();
        let mut i = if raw.is_nan() || raw < 0.0 {
            0
        } else {
            (raw as usize).min(self.n - 2)
        };
        // Correct for rounding in the division.
        while i > 0 && t < self.point(i) {
            i -= 1;
        }
        while i + 2 < self.n && t >= self.point(i + 1) {
            i += 1;
        }
        i
    }
}

/// Log-uniform grid on `(0, inf)`: the exponentials of a [`UniformGrid`] of
/// log-abscissae.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    log: UniformGrid,
}

impl LogGrid {
    pub const DEFAULT_MIN: f64 = 1e-4;
    pub const DEFAULT_MAX: f64 = 1e4;
    pub const DEFAULT_POINTS: usize = 2048;

    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min > 0.0) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need 0 < x_min < x_max < inf, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            log: UniformGrid::new(x_min.ln(), x_max.ln(), n)?,
        })
    }

    /// Grid whose log-abscissae run uniformly over `[t_min, t_max]`. The
    /// abscissae themselves may exceed the `f64` range.
    pub fn from_log_bounds(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        Ok(Self {
            log: UniformGrid::new(t_min, t_max, n)?,
        })
    }

    pub fn from_uniform(log: UniformGrid) -> Self {
        Self { log }
    }

    pub fn log_grid(&self) -> &UniformGrid {
        &self.log
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_min(&self) -> f64 {
        self.log.start().exp()
    }

    pub fn x_max(&self) -> f64 {
        self.log.end().exp()
    }

    pub fn log_spacing(&self) -> f64 {
        self.log.spacing()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.log.point(i)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.log.point(i).exp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid::new(Self::DEFAULT_MIN, Self::DEFAULT_MAX, Self::DEFAULT_POINTS).expect("default grid is valid")
    }
}

/// Behaviour of a function beyond the last grid point on one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    /// `+inf` outside the grid.
    Truncate,
    /// GG-affine continuation through the two outermost points.
    Extend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tails {
    pub left: Tail,
    pub right: Tail,
}

impl Tails {
    pub const TRUNCATE: Tails = Tails {
        left: Tail::Truncate,
        right: Tail::Truncate,
    };
    pub const EXTEND: Tails = Tails {
        left: Tail::Extend,
        right: Tail::Extend,
    };
}

/// Linear interpolation on the log scale with the convex product
/// convention: any `+inf` endpoint gives `+inf`, otherwise any `-inf`
/// endpoint gives `-inf`.
pub(crate) fn interp_ln(a: f64, b: f64, w: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        f64::INFINITY
    } else if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a + w * (b - a)
    }
}

/// Contiguous index range `[lo, hi]` of entries below `+inf`, or `None`
/// if every entry is `+inf`. Errors if the range has holes.
pub(crate) fn finite_range(values: &[f64]) -> Result<Option<(usize, usize)>> {
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::InvalidGridFunction(format!("NaN at index {i}")));
    }
    let lo = match values.iter().position(|&v| v < f64::INFINITY) {
        Some(lo) => lo,
        None => return Ok(None),
    };
    let hi = values.iter().rposition(|&v| v < f64::INFINITY).unwrap();
    if let Some(k) = (lo..=hi).find(|&k| values[k] == f64::INFINITY) {
        return Err(Error::InvalidGridFunction(format!(
            "effective domain is not contiguous: +inf at index {k} inside [{lo}, {hi}]"
        )));
    }
    Ok(Some((lo, hi)))
}

/// A function on `(0, inf)` sampled on a [`LogGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: LogGrid,
    log_values: Vec<f64>,
    tails: Tails,
}

impl GridFunction {
    /// Builds a function from `ln f` at the grid points (`-inf` for zeros,
    /// `+inf` outside the effective domain).
    pub fn from_log_values(grid: LogGrid, log_values: Vec<f64>, tails: Tails) -> Result<Self> {
        if log_values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: log_values.len(),
            });
        }
        finite_range(&log_values)?;
        Ok(Self {
            grid,
            log_values,
            tails,
        })
    }

    /// Builds a function from linear-scale values; finite values below
    /// [`ZERO_CLAMP`] become zeros.
    pub fn from_values(grid: LogGrid, values: &[ExtendedPositive], tails: Tails) -> Result<Self> {
        let logs = values
            .iter()
            .map(|v| match *v {
                ExtendedPositive::Finite(x) if x < ZERO_CLAMP => f64::NEG_INFINITY,
                other => other.ln(),
            })
            .collect();
        Self::from_log_values(grid, logs, tails)
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn tails(&self) -> Tails {
        self.tails
    }

    pub fn with_tails(mut self, tails: Tails) -> Self {
        self.tails = tails;
        self
    }

    pub fn len(&self) -> usize {
        self.log_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_values.is_empty()
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn value(&self, i: usize) -> ExtendedPositive {
        to_extended(self.log_values[i])
    }

    pub fn values(&self) -> Vec<ExtendedPositive> {
        self.log_values.iter().map(|&l| to_extended(l)).collect()
    }

    /// Index range of the effective domain `{f < inf}`.
    pub fn domain(&self) -> Option<(usize, usize)> {
        finite_range(&self.log_values).expect("validated at construction")
    }

    /// True if `f` is `+inf` at every grid point.
    pub fn is_identically_infinite(&self) -> bool {
        self.domain().is_none()
    }

    /// True if `f` is zero at some grid point.
    pub fn vanishes_somewhere(&self) -> bool {
        self.log_values.contains(&f64::NEG_INFINITY)
    }

    /// Positive everywhere and finite somewhere.
    pub fn is_proper(&self) -> bool {
        !self.vanishes_somewhere() && !self.is_identically_infinite()
    }

    /// `ln f` at an arbitrary log-abscissa `t = ln x`.
    pub fn eval_ln_at(&self, t: f64) -> f64 {
        let g = self.grid.log_grid();
        let n = g.len();
        let h = g.spacing();
        let snap = 1e-10 * h;
        if t < g.start() - snap {
            return self.tail_value(t, true);
        }
        if t > g.end() + snap {
            return self.tail_value(t, false);
        }
        let i = g.bracket(t);
        let (t0, t1) = (g.point(i), g.point(i + 1));
        if (t - t0).abs() <= snap {
            return self.log_values[i];
        }
        if (t - t1).abs() <= snap {
            return self.log_values[i + 1];
        }
        debug_assert!(i + 1 < n);
        interp_ln(self.log_values[i], self.log_values[i + 1], (t - t0) / (t1 - t0))
    }

    fn tail_value(&self, t: f64, left: bool) -> f64 {
        let tail = if left { self.tails.left } else { self.tails.right };
        if tail == Tail::Truncate {
            return f64::INFINITY;
        }
        let g = self.grid.log_grid();
        let n = self.len();
        let (i0, i1) = if left { (0, 1) } else { (n - 1, n - 2) };
        let (a, b) = (self.log_values[i0], self.log_values[i1]);
        if a == f64::INFINITY || b == f64::INFINITY {
            return f64::INFINITY;
        }
        if a == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        if b == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        let slope = (b - a) / (g.point(i1) - g.point(i0));
        let dt = t - g.point(i0);
        if slope == 0.0 {
            a
        } else {
            a + slope * dt
        }
    }

    /// `ln f(x)`.
    pub fn eval_ln(&self, x: f64) -> f64 {
        assert!(x >= 0.0, "grid functions live on (0, inf), got x = {x}");
        self.eval_ln_at(x.ln())
    }

    /// `f(x)` by GG-affine interpolation; exact at grid points.
    pub fn eval(&self, x: f64) -> ExtendedPositive {
        to_extended(self.eval_ln(x))
    }

    /// The pointwise reciprocal `1/f`.
    pub fn recip(&self) -> Result<GridFunction> {
        let logs = self.log_values.iter().map(|&l| -l).collect();
        GridFunction::from_log_values(self.grid, logs, self.tails)
    }

    /// The convex representation `g = ln ∘ f ∘ exp`.
    pub fn to_convex_rep(&self) -> ConvexRep {
        ConvexRep {
            grid: *self.grid.log_grid(),
            values: self.log_values.clone(),
            tails: self.tails,
        }
    }

    /// Inverse of [`GridFunction::to_convex_rep`].
    pub fn from_convex_rep(rep: &ConvexRep) -> Result<GridFunction> {
        GridFunction::from_log_values(LogGrid::from_uniform(rep.grid), rep.values.clone(), rep.tails)
    }
}

fn to_extended(l: f64) -> ExtendedPositive {
    if l < ZERO_CLAMP.ln() {
        ExtendedPositive::Zero
    } else {
        ExtendedPositive::from_ln(l)
    }
}

/// `g = ln ∘ f ∘ exp` sampled on the uniform grid of log-abscissae. Values
/// are extended reals (`-inf` where `f = 0`, `+inf` off the domain).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRep {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub tails: Tails,
}

impl ConvexRep {
    pub fn new(grid: UniformGrid, values: Vec<f64>, tails: Tails) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        finite_range(&values)?;
        Ok(Self { grid, values, tails })
    }
}

/// Free-function form of [`GridFunction::to_convex_rep`].
pub fn to_convex_rep(f: &GridFunction) -> ConvexRep {
    f.to_convex_rep()
}

/// Free-function form of [`GridFunction::from_convex_rep`].
pub fn from_convex_rep(g: &ConvexRep) -> Result<GridFunction> {
    GridFunction::from_convex_rep(g)
}

/// Built-in function descriptors.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `A x^B` with `A > 0`.
    GgAffine { scale: f64, exponent: f64 },
    /// `e^x`.
    Exp,
    /// `δ_[lo, hi] + offset`: `offset` on the interval, `+inf` elsewhere.
    Indicator { lo: f64, hi: f64, offset: f64 },
    /// `Σ c_k x^k` with nonnegative coefficients, constant term first.
    Polynomial { coefficients: Vec<f64> },
    /// `Σ c_k x^{b_k}` with positive coefficients and real exponents.
    Posynomial { terms: Vec<(f64, f64)> },
    /// `A x^B exp(c (ln x)^2 / 2)`, GG-convex for `c >= 0`.
    LogQuadratic { scale: f64, exponent: f64, curvature: f64 },
    /// Tabulated values at positive abscissae, interpolated GG-affinely and
    /// `+inf` outside the table.
    Samples(Vec<(f64, ExtendedPositive)>),
}

impl FunctionSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDescriptor(m));
        match self {
            FunctionSpec::GgAffine { scale, exponent } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return bad(format!("scale A must be positive, got {scale}"));
                }
                if !exponent.is_finite() {
                    return bad(format!("exponent B must be finite, got {exponent}"));
                }
            }
            FunctionSpec::Exp => {}
            FunctionSpec::Indicator { lo, hi, offset } => {
                if !(*lo > 0.0) || !hi.is_finite() || lo > hi {
                    return bad(format!("interval [{lo}, {hi}] is empty or not in (0, inf)"));
                }
                if !(*offset >= 0.0) || !offset.is_finite() {
                    return bad(format!("offset must be finite and nonnegative, got {offset}"));
                }
            }
            FunctionSpec::Polynomial { coefficients } => {
                if coefficients.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
                    return bad("polynomial coefficients must be finite and nonnegative".into());
                }
                if coefficients.iter().all(|&c| c == 0.0) {
                    return bad("polynomial has no positive coefficient".into());
                }
            }
            FunctionSpec::Posynomial { terms } => {
                if terms.is_empty() {
                    return bad("posynomial needs at least one term".into());
                }
                if terms
                    .iter()
                    .any(|(c, b)| !(*c > 0.0) || !c.is_finite() || !b.is_finite())
                {
                    return bad("posynomial terms need positive coefficients and finite exponents".into());
                }
            }
            FunctionSpec::LogQuadratic {
                scale,
                exponent,
                curvature,
            } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return bad(format!("scale A must be positive, got {scale}"));
                }
                if !exponent.is_finite() || !curvature.is_finite() {
                    return bad("exponent and curvature must be finite".into());
                }
            }
            FunctionSpec::Samples(table) => {
                if table.is_empty() {
                    return bad("sample table is empty".into());
                }
                if let Some((x, _)) = table.iter().find(|(x, _)| !(*x > 0.0) || !x.is_finite()) {
                    return bad(format!("sample abscissa {x} is not positive"));
                }
                if table.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return bad("sample abscissae must be strictly increasing".into());
                }
            }
        }
        Ok(())
    }

    fn default_tails(&self) -> Tails {
        match self {
            FunctionSpec::GgAffine { .. } => Tails::EXTEND,
            _ => Tails::TRUNCATE,
        }
    }

    fn sample_ln(&self, t: f64) -> f64 {
        match self {
            FunctionSpec::GgAffine { scale, exponent } => scale.ln() + exponent * t,
            FunctionSpec::Exp => t.exp(),
            FunctionSpec::Indicator { lo, hi, offset } => {
                let (a, b) = (lo.ln(), hi.ln());
                let eps_a = 1e-9 * a.abs().max(1.0);
                let eps_b = 1e-9 * b.abs().max(1.0);
                if t >= a - eps_a && t <= b + eps_b {
                    if *offset < ZERO_CLAMP {
                        f64::NEG_INFINITY
                    } else {
                        offset.ln()
                    }
                } else {
                    f64::INFINITY
                }
            }
            FunctionSpec::Polynomial { coefficients } => log_sum_exp(
                coefficients
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c > 0.0)
                    .map(|(k, c)| c.ln() + k as f64 * t),
            ),
            FunctionSpec::Posynomial { terms } => log_sum_exp(terms.iter().map(|(c, b)| c.ln() + b * t)),
            FunctionSpec::LogQuadratic {
                scale,
                exponent,
                curvature,
            } => scale.ln() + exponent * t + 0.5 * curvature * t * t,
            FunctionSpec::Samples(table) => sample_table_ln(table, t),
        }
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn sample_table_ln(table: &[(f64, ExtendedPositive)], t: f64) -> f64 {
    let ln_at = |k: usize| match table[k].1 {
        ExtendedPositive::Finite(v) if v < ZERO_CLAMP => f64::NEG_INFINITY,
        v => v.ln(),
    };
    let ts: Vec<f64> = table.iter().map(|(x, _)| x.ln()).collect();
    let eps = 1e-12 * t.abs().max(1.0);
    if t < ts[0] - eps || t > ts[ts.len() - 1] + eps {
        return f64::INFINITY;
    }
    if let Some(k) = ts.iter().position(|&tk| (tk - t).abs() <= eps) {
        return ln_at(k);
    }
    let k = ts.partition_point(|&tk| tk <= t) - 1;
    interp_ln(ln_at(k), ln_at(k + 1), (t - ts[k]) / (ts[k + 1] - ts[k]))
}

/// Samples a built-in descriptor on `grid`.
pub fn make_grid_function(spec: &FunctionSpec, grid: LogGrid) -> Result<GridFunction> {
    spec.validate()?;
    let logs = (0..grid.len()).map(|i| spec.sample_ln(grid.t(i))).collect();
    GridFunction::from_log_values(grid, logs, spec.default_tails())
}
