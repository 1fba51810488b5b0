use super::conjugate_log_values;
use crate::error::{invalid_param, Result};
use crate::gridfn::{GridFunction, LogGrid, Tails, UniformGrid};

/// Transformations of `f` whose conjugates have closed forms in `f⋄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalculusRule {
    /// `A f`, with `[A f]⋄ = f⋄ / A`.
    ScaleValue(f64),
    /// `f(A x)`, with `[f(A x)]⋄(y) = f⋄(y) y^{-ln A}`.
    ScaleArg(f64),
    /// `f(x^A)`, with `[f(x^A)]⋄(y) = f⋄(y^{1/A})`.
    PowerArg(f64),
    /// `f(x) x^A`, with `[f(x) x^A]⋄(y) = f⋄(y / e^A)`.
    MulPower(f64),
}

impl CalculusRule {
    fn validate(&self) -> Result<()> {
        match *self {
            CalculusRule::ScaleValue(a) | CalculusRule::ScaleArg(a) if !(a > 0.0 && a.is_finite()) => {
                Err(invalid_param("A", format!("must be positive and finite, got {a}")))
            }
            CalculusRule::PowerArg(a) if a == 0.0 || !a.is_finite() => {
                Err(invalid_param("A", format!("must be finite and nonzero, got {a}")))
            }
            CalculusRule::MulPower(a) if !a.is_finite() => Err(invalid_param("A", format!("must be finite, got {a}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculusResult {
    pub function: GridFunction,
    /// Set when the supplied conjugate is `+inf` everywhere (for instance
    /// because `f` vanishes somewhere); the rules are then applied to the
    /// degenerate function as is.
    pub degenerate: bool,
}

fn affine_image(grid: &UniformGrid, scale: f64, shift: f64) -> Result<(UniformGrid, bool)> {
    let (a, b) = (scale * grid.start() + shift, scale * grid.end() + shift);
    if scale > 0.0 {
        Ok((UniformGrid::new(a, b, grid.len())?, false))
    } else {
        Ok((UniformGrid::new(b, a, grid.len())?, true))
    }
}

fn rebuild(grid: UniformGrid, mut values: Vec<f64>, tails: Tails, reversed: bool) -> Result<GridFunction> {
    let tails = if reversed {
        values.reverse();
        Tails {
            left: tails.right,
            right: tails.left,
        }
    } else {
        tails
    };
    GridFunction::from_log_values(LogGrid::from_uniform(grid), values, tails)
}

/// Conjugate of the transformed `f`, assembled from a precomputed `f⋄`.
pub fn conjugate_calculus(f_conj: &GridFunction, rule: CalculusRule) -> Result<CalculusResult> {
    rule.validate()?;
    let degenerate = f_conj.is_identically_infinite();
    let s = *f_conj.grid().log_grid();
    let logs = f_conj.log_values();
    let tails = f_conj.tails();
    let function = match rule {
        CalculusRule::ScaleValue(a) => {
            let la = a.ln();
            rebuild(s, logs.iter().map(|v| v - la).collect(), tails, false)?
        }
        CalculusRule::ScaleArg(a) => {
            let la = a.ln();
            let values = logs.iter().enumerate().map(|(j, v)| v - la * s.point(j)).collect();
            rebuild(s, values, tails, false)?
        }
        CalculusRule::PowerArg(a) => {
            let (grid, rev) = affine_image(&s, a, 0.0)?;
            rebuild(grid, logs.to_vec(), tails, rev)?
        }
        CalculusRule::MulPower(a) => {
            let (grid, rev) = affine_image(&s, 1.0, a)?;
            rebuild(grid, logs.to_vec(), tails, rev)?
        }
    };
    Ok(CalculusResult { function, degenerate })
}

/// The transformed function itself, on the grid that makes its conjugate
/// line up node for node with [`conjugate_calculus`].
pub fn apply_rule(f: &GridFunction, rule: CalculusRule) -> Result<GridFunction> {
    rule.validate()?;
    let t = *f.grid().log_grid();
    let logs = f.log_values();
    let tails = f.tails();
    match rule {
        CalculusRule::ScaleValue(a) => {
            let la = a.ln();
            rebuild(t, logs.iter().map(|v| v + la).collect(), tails, false)
        }
        CalculusRule::ScaleArg(a) => {
            let (grid, rev) = affine_image(&t, 1.0, -a.ln())?;
            rebuild(grid, logs.to_vec(), tails, rev)
        }
        CalculusRule::PowerArg(a) => {
            let (grid, rev) = affine_image(&t, 1.0 / a, 0.0)?;
            rebuild(grid, logs.to_vec(), tails, rev)
        }
        CalculusRule::MulPower(a) => {
            let values = logs.iter().enumerate().map(|(i, v)| v + a * t.point(i)).collect();
            rebuild(t, values, tails, false)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    a: f64,
    b: f64,
    c: f64,
}

impl TransformParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid_param("A", format!("must be positive, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(invalid_param("B", format!("must be positive, got {b}")));
        }
        if c == 0.0 || !c.is_finite() {
            return Err(invalid_param("C", format!("must be nonzero, got {c}")));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
}

/// `T(f)(x) = A x^{ln B} f⋄(B x^C)` on the grid of `f`.
///
/// The conjugate is evaluated on the slope nodes `ln B + C t_i`, so no
/// interpolation of `f⋄` is involved.
pub fn duality_transform(f: &GridFunction, p: &TransformParams) -> Result<GridFunction> {
    let t = *f.grid().log_grid();
    let (la, lb, c) = (p.a.ln(), p.b.ln(), p.c);
    let (dual, reversed) = affine_image(&t, c, lb)?;
    let conj = conjugate_log_values(&f.to_convex_rep(), &dual)?.rep.values;
    let n = t.len();
    let values = (0..n)
        .map(|i| {
            let j = if reversed { n - 1 - i } else { i };
            let v = conj[j];
            if v.is_infinite() {
                v
            } else {
                la + lb * t.point(i) + v
            }
        })
        .collect();
    GridFunction::from_log_values(*f.grid(), values, Tails::TRUNCATE)
}
