//! End-to-end acceptance checks. Each criterion recomputes its quantities
//! from scratch with seeded inputs and compares them with closed forms or
//! independent reference computations at fixed tolerances.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::Result;
use crate::gridfn::{make_grid_function, FunctionSpec, GridFunction, LogGrid, Tails};
use crate::oracle::mult_inf_convolution_direct;
use crate::orders::generate::{random_crossing_pair, random_ga_icx_pair, random_product_pair, random_st_pair};
use crate::orders::{
    consistency_test, ga_order_leq, order_leq, single_crossing_ga_cx, DiscreteDistribution, GaOrder, Order,
};
use crate::random::{random_instance, random_scenario, random_simplex, trial_rng, TrialRng};
use crate::riskmeasures::{
    axiom_check, entropy_dual_objective, entropy_dual_pnorm, geometric_mean, gg_convexity_suite,
    orlicz_premium_detailed, p_norm, AxiomConfig, FiniteProbSpace, OrliczSpec, RiskMeasureSpec, ORLICZ_TOL,
};
use crate::transform::{
    duality_transform, gg_biconjugate_detailed, gg_conjugate, interior_mask, mult_inf_convolution, TransformParams,
};

pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Deterministic for a fixed seed.
    pub detail: String,
    /// Wall-clock observations, kept apart from `detail`.
    pub timing: Option<String>,
    pub elapsed: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let timing = self.timing.as_deref().map_or(String::new(), |t| format!("; {t}"));
        format!(
            "criterion {} [{}] {}: {}{} ({:.2}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            timing,
            self.elapsed.as_secs_f64()
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "closed-form conjugates"),
    (2, "biconjugate recovers GG-convex functions"),
    (3, "conjugate of products and inf-convolution"),
    (4, "duality-transform family"),
    (5, "Orlicz identities"),
    (6, "entropy duality"),
    (7, "GG-convexity suites"),
    (8, "order logic"),
    (9, "consistency with GA-convex orders"),
];

type Outcome = Result<(bool, String, Option<String>)>;

/// Runs one criterion, turning any library error into a failure.
pub fn run_criterion(id: u8, seed: u64) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => criterion_1(),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        _ => Ok((false, format!("unknown criterion {id}"), None)),
    };
    let (passed, detail, timing) = outcome.unwrap_or_else(|e| (false, format!("error: {e}"), None));
    CriterionResult {
        id,
        name: CRITERIA.iter().find(|c| c.0 == id).map_or("?", |c| c.1),
        passed,
        detail,
        timing,
        elapsed: start.elapsed(),
    }
}

/// Runs every criterion in order. Criterion 9 also bounds the wall time of
/// the whole run.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    let start = Instant::now();
    let mut out: Vec<CriterionResult> = (1..=9).map(|id| run_criterion(id, seed)).collect();
    let total = start.elapsed();
    let last = out.last_mut().expect("nine criteria");
    if total >= Duration::from_secs(60) {
        last.passed = false;
        last.detail = format!("{}; total wall time over the 60s limit", last.detail);
    }
    last.timing = Some(format!("total wall time {:.1}s (limit 60s)", total.as_secs_f64()));
    out
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Ok((ok, detail, None))
}

fn criterion_1() -> Outcome {
    let mut worst_ind = 0.0f64;
    let mut slowest = Duration::ZERO;
    let dual = LogGrid::new(0.01, 100.0, 2048)?;
    for &a in &[0.5, 2.0, 5.0] {
        for &b in &[1.0, 3.0] {
            let grid = LogGrid::from_log_bounds(f64::ln(a) - 2.0, f64::ln(a) + 2.0, 101)?;
            let f = make_grid_function(
                &FunctionSpec::Indicator {
                    lo: a,
                    hi: a,
                    offset: b,
                },
                grid,
            )?;
            let t = Instant::now();
            let c = gg_conjugate(&f, &dual)?;
            slowest = slowest.max(t.elapsed());
            for j in 0..dual.len() {
                let y = dual.x(j);
                worst_ind = worst_ind.max(rel_err(c.value(j).to_f64(), y.powf(a.ln()) / b));
            }
        }
    }

    let f = make_grid_function(&FunctionSpec::Exp, LogGrid::new(1e-4, 1e4, 2048)?)?;
    let dual = LogGrid::new(1.5, 50.0, 2048)?;
    let t = Instant::now();
    let c = gg_conjugate(&f, &dual)?;
    slowest = slowest.max(t.elapsed());
    let mut worst_exp = 0.0f64;
    for j in 0..dual.len() {
        let y = dual.x(j);
        let ly = y.ln();
        worst_exp = worst_exp.max(rel_err(c.value(j).to_f64(), ly.powf(ly) / y));
    }
    let fast = slowest < Duration::from_secs(1);
    Ok((
        worst_ind < 1e-6 && worst_exp < 1e-3 && fast,
        format!(
            "indicator max rel err {worst_ind:.2e} (< 1e-6), exp max rel err {worst_exp:.2e} (< 1e-3){}",
            if fast { "" } else { ", a conjugate took over 1s" }
        ),
        Some(format!(
            "slowest conjugate {:.1} ms (limit 1000 ms)",
            slowest.as_secs_f64() * 1e3
        )),
    ))
}

/// Random non-convex log-values: a few random sinusoids plus noise.
fn rough_function(rng: &mut TrialRng, grid: LogGrid) -> Result<GridFunction> {
    let k = rng.random_range(1..=4);
    let waves: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.random_range(0.2..2.0),
                rng.random_range(0.5..6.0),
                rng.random_range(0.0..6.3),
            )
        })
        .collect();
    let logs = (0..grid.len())
        .map(|i| {
            let t = grid.t(i);
            waves.iter().map(|(a, w, ph)| a * (w * t + ph).sin()).sum::<f64>() + 0.3 * rng.random_range(-1.0..1.0)
        })
        .collect();
    GridFunction::from_log_values(grid, logs, Tails::TRUNCATE)
}

fn criterion_2(seed: u64) -> Outcome {
    let grid = LogGrid::new(0.1, 10.0, 2048)?;
    let family = [
        FunctionSpec::GgAffine {
            scale: 1.0,
            exponent: 2.0,
        },
        FunctionSpec::GgAffine {
            scale: 1.0,
            exponent: -0.5,
        },
        FunctionSpec::GgAffine {
            scale: 3.0,
            exponent: 1.5,
        },
        FunctionSpec::Exp,
        FunctionSpec::Polynomial {
            coefficients: vec![1.0, 1.0, 1.0],
        },
        FunctionSpec::Indicator {
            lo: 0.5,
            hi: 4.0,
            offset: 2.0,
        },
    ];
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for spec in &family {
        let f = make_grid_function(spec, grid)?;
        let b = gg_biconjugate_detailed(&f, grid.len())?;
        let span = (b.dual_grid.start(), b.dual_grid.end());
        let mask = interior_mask(&f, span);
        for (i, inside) in mask.iter().enumerate() {
            if *inside {
                checked += 1;
                let d = b.function.log_values()[i] - f.log_values()[i];
                worst = worst.max(d.exp_m1().abs());
            }
        }
    }

    let mut above = 0usize;
    let rough_grid = LogGrid::new(0.1, 10.0, 256)?;
    for trial in 0..100 {
        let mut rng = trial_rng(seed ^ 0x02, trial);
        let f = rough_function(&mut rng, rough_grid)?;
        let ff = gg_biconjugate_detailed(&f, 512)?.function;
        above += ff
            .log_values()
            .iter()
            .zip(f.log_values())
            .filter(|(a, b)| a > b)
            .count();
    }
    verdict(
        worst < 1e-3 && checked > 0 && above == 0,
        format!(
            "family interior max rel err {worst:.2e} over {checked} nodes (< 1e-3); {above} nodes with f** > f in 100 non-convex samples"
        ),
    )
}

fn log_quadratic(rng: &mut TrialRng) -> FunctionSpec {
    FunctionSpec::LogQuadratic {
        scale: rng.random_range(0.5..2.0),
        exponent: rng.random_range(-1.0..1.0),
        curvature: rng.random_range(0.2..1.0),
    }
}

fn criterion_3(seed: u64) -> Outcome {
    let dual = LogGrid::new(0.2, 5.0, 257)?;
    let (mut worst_mult, mut worst_c) = (0.0f64, 0.0f64);
    for trial in 0..50 {
        let mut rng = trial_rng(seed ^ 0x03, trial);
        let n = rng.random_range(64..=256);
        let width = rng.random_range(2.0..6.0);
        let (a, b) = (rng.random_range(-3.0..1.0), rng.random_range(-3.0..1.0));
        let f = make_grid_function(&log_quadratic(&mut rng), LogGrid::from_log_bounds(a, a + width, n)?)?;
        let g = make_grid_function(&log_quadratic(&mut rng), LogGrid::from_log_bounds(b, b + width, n)?)?;
        let h = mult_inf_convolution(&f, &g)?;
        let direct = mult_inf_convolution_direct(&f, &g);
        for (x, y) in h.log_values().iter().zip(&direct) {
            let d = if x == y { 0.0 } else { (x - y).abs() };
            worst_c = worst_c.max(d);
        }
        let (ch, cf, cg) = (
            gg_conjugate(&h, &dual)?,
            gg_conjugate(&f, &dual)?,
            gg_conjugate(&g, &dual)?,
        );
        for j in 0..dual.len() {
            let d = ch.log_values()[j] - (cf.log_values()[j] + cg.log_values()[j]);
            worst_mult = worst_mult.max(d.exp_m1().abs());
        }
    }
    verdict(
        worst_mult < 1e-3 && worst_c < 1e-9,
        format!("max rel gap of (f⊗g)* vs f*·g* {worst_mult:.2e} (< 1e-3); inf-convolution vs direct {worst_c:.2e} (< 1e-9)"),
    )
}

fn criterion_4(seed: u64) -> Outcome {
    let grid = LogGrid::new(1e-3, 1e3, 1025)?;
    let cs = [2.0, -2.0, 1.0, -1.0, 0.5, -0.5];
    let mut worst = 0.0f64;
    let mut min_checked = usize::MAX;
    let mut params = Vec::new();
    for trial in 0..20 {
        let mut rng = trial_rng(seed ^ 0x04, trial);
        let p = TransformParams::new(
            rng.random_range(0.2..5.0),
            rng.random_range(0.2..5.0),
            cs[rng.random_range(0..cs.len())],
        )?;
        let f = make_grid_function(&log_quadratic(&mut rng), grid)?;
        let tt = duality_transform(&duality_transform(&f, &p)?, &p)?;
        let (lb, t0, t1) = (p.b().ln(), grid.t(0), grid.t(grid.len() - 1));
        let (s0, s1) = (lb + p.c() * t0, lb + p.c() * t1);
        let mask = interior_mask(&f, (s0.min(s1), s0.max(s1)));
        let mut checked = 0;
        for (i, inside) in mask.iter().enumerate() {
            if *inside {
                checked += 1;
                worst = worst.max((tt.log_values()[i] - f.log_values()[i]).exp_m1().abs());
            }
        }
        min_checked = min_checked.min(checked);
        params.push(p);
    }

    // order reversal: f <= g pointwise  =>  T f >= T g pointwise
    let mut reversals = 0usize;
    for trial in 0..100 {
        let mut rng = trial_rng(seed ^ 0x44, trial);
        let f = make_grid_function(&log_quadratic(&mut rng), grid)?;
        let bumped: Vec<f64> = f
            .log_values()
            .iter()
            .map(|v| {
                if rng.random_bool(0.3) {
                    *v
                } else {
                    v + rng.random_range(0.0..1.0)
                }
            })
            .collect();
        let g = GridFunction::from_log_values(grid, bumped, f.tails())?;
        let p = params[trial as usize % params.len()];
        let (tf, tg) = (duality_transform(&f, &p)?, duality_transform(&g, &p)?);
        reversals += tf
            .log_values()
            .iter()
            .zip(tg.log_values())
            .filter(|(a, b)| a < b)
            .count();
    }
    verdict(
        worst < 1e-3 && min_checked >= 100 && reversals == 0,
        format!(
            "T(T f) max interior rel err {worst:.2e} (< 1e-3, at least {min_checked} nodes per case); {reversals} order-reversal failures on 100 pairs"
        ),
    )
}

fn criterion_5(seed: u64) -> Outcome {
    let (mut worst_gm, mut worst_p, mut max_iter) = (0.0f64, 0.0f64, 0usize);
    for trial in 0..100 {
        let mut rng = trial_rng(seed ^ 0x05, trial);
        let (p, x) = random_instance(&mut rng);
        let r = orlicz_premium_detailed(&x, &p, &OrliczSpec::LogAffine, ORLICZ_TOL)?;
        worst_gm = worst_gm.max(rel_err(r.value, geometric_mean(&x, &p)?));
        max_iter = max_iter.max(r.iterations);
        for &q in &[0.5, 1.0, 2.0, 3.0] {
            let r = orlicz_premium_detailed(&x, &p, &OrliczSpec::power(q)?, ORLICZ_TOL)?;
            worst_p = worst_p.max(rel_err(r.value, p_norm(&x, &p, q)?));
            max_iter = max_iter.max(r.iterations);
        }
    }
    verdict(
        worst_gm < 1e-10 && worst_p < 1e-9 && max_iter <= 60,
        format!(
            "log-affine vs geometric mean {worst_gm:.2e} (< 1e-10); power vs p-norm {worst_p:.2e} (< 1e-9); max {max_iter} bisection steps (<= 60)"
        ),
    )
}

/// Simplex points `k / m` with about `points` entries, for `n <= 3`.
fn simplex_grid(n: usize, points: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0]],
        2 => (0..points)
            .map(|k| {
                let a = k as f64 / (points - 1) as f64;
                vec![a, 1.0 - a]
            })
            .collect(),
        _ => {
            // (m + 1)(m + 2) / 2 >= points
            let mut m = 1;
            while (m + 1) * (m + 2) / 2 < points {
                m += 1;
            }
            let mut out = Vec::new();
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let (a, b) = (i as f64 / m as f64, j as f64 / m as f64);
                    out.push(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
            out
        }
    }
}

fn criterion_6(seed: u64) -> Outcome {
    let mut worst = 0.0f64;
    let ps = [0.25, 0.5, 1.0, 2.0, 3.0];
    for trial in 0..1000 {
        let mut rng = trial_rng(seed ^ 0x06, trial);
        let (prob, x) = random_instance(&mut rng);
        let p = ps[rng.random_range(0..ps.len())];
        let d = entropy_dual_pnorm(&x, &prob, p)?;
        worst = worst.max((d.value - p_norm(&x, &prob, p)?).abs());
    }

    let mut beaten = 0usize;
    let mut searched = 0usize;
    for trial in 0..20 {
        let mut rng = trial_rng(seed ^ 0x66, trial);
        let n = 2 + (trial as usize % 2);
        let prob = FiniteProbSpace::new(random_simplex(&mut rng, n))?;
        let x = crate::random::random_lognormal(&mut rng, n);
        let p = ps[rng.random_range(0..ps.len())];
        let best = entropy_dual_pnorm(&x, &prob, p)?.value;
        for q in simplex_grid(n, 10_000) {
            searched += 1;
            if entropy_dual_objective(&x, &prob, p, &q) > best * (1.0 + 1e-12) {
                beaten += 1;
            }
        }
    }
    verdict(
        worst < 1e-10 && beaten == 0,
        format!(
            "closed form vs p-norm max abs err {worst:.2e} on 1000 instances (< 1e-10); grid points beating the optimizer: {beaten} of {searched}"
        ),
    )
}

fn criterion_7(seed: u64) -> Outcome {
    type Maker = Box<dyn Fn(&mut TrialRng, &FiniteProbSpace) -> RiskMeasureSpec>;
    let fixed = |s: RiskMeasureSpec| -> Maker { Box::new(move |_: &mut TrialRng, _: &FiniteProbSpace| s.clone()) };
    let suites: Vec<(&str, Maker)> = vec![
        ("geometric-mean", fixed(RiskMeasureSpec::GeometricMean)),
        ("p-norm(1/4)", fixed(RiskMeasureSpec::PNorm { p: 0.25 })),
        ("p-norm(1/2)", fixed(RiskMeasureSpec::PNorm { p: 0.5 })),
        ("p-norm(3/4)", fixed(RiskMeasureSpec::PNorm { p: 0.75 })),
        (
            "worst-case-geometric(3)",
            Box::new(
                |rng: &mut TrialRng, p: &FiniteProbSpace| RiskMeasureSpec::WorstCaseGeometric {
                    scenarios: (0..3).map(|_| random_scenario(rng, p)).collect(),
                },
            ),
        ),
        (
            "penalized-geometric(3)",
            Box::new(
                |rng: &mut TrialRng, p: &FiniteProbSpace| RiskMeasureSpec::PenalizedGeometric {
                    scenarios: (0..3).map(|_| random_scenario(rng, p)).collect(),
                    weights: (0..3).map(|_| rng.random_range(0.05..=1.0)).collect(),
                },
            ),
        ),
        ("exp-avar-log(0)", fixed(RiskMeasureSpec::ExpAvarLog { lambda: 0.0 })),
        ("exp-avar-log(1/2)", fixed(RiskMeasureSpec::ExpAvarLog { lambda: 0.5 })),
        ("exp-avar-log(0.9)", fixed(RiskMeasureSpec::ExpAvarLog { lambda: 0.9 })),
    ];
    let mut total_violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for (k, (_, make)) in suites.iter().enumerate() {
        let r = gg_convexity_suite(make.as_ref(), 10_000, seed ^ (0x70 + k as u64), 1e-12)?;
        total_violations += r.violations;
        worst = worst.max(r.worst_excess);
    }

    let config = AxiomConfig {
        trials: 200,
        seed: seed ^ 0x77,
        slack: 1e-9,
    };
    let space = FiniteProbSpace::uniform(4)?;
    let mut aa_refuted = Vec::new();
    for spec in [RiskMeasureSpec::GeometricMean, RiskMeasureSpec::PNorm { p: 0.5 }] {
        let report = axiom_check(&spec, &space, &config)?;
        let stored = report.aa_convex.counterexample().is_some_and(|c| c.lhs > c.rhs);
        aa_refuted.push(stored);
    }
    verdict(
        total_violations == 0 && aa_refuted.iter().all(|b| *b),
        format!(
            "{total_violations} violations over 9 suites x 10^4 triples (worst log excess {worst:.2e}, slack 1e-12); AA refuted with counterexample: geometric-mean {}, p-norm(1/2) {}",
            aa_refuted[0], aa_refuted[1]
        ),
    )
}

fn ga_cx_equal_gm(f: &DiscreteDistribution, g: &DiscreteDistribution, bad: &mut usize) -> Result<bool> {
    let v = ga_order_leq(f, g, GaOrder::GaCx)?;
    if v.holds {
        let (a, b) = (f.geometric_mean()?, g.geometric_mean()?);
        if rel_err(a, b) > 1e-9 {
            *bad += 1;
        }
    }
    Ok(v.holds)
}

fn criterion_8(seed: u64) -> Outcome {
    let mut chain_breaks = 0usize;
    let mut gm_breaks = 0usize;
    for trial in 0..500 {
        let mut rng = trial_rng(seed ^ 0x08, trial);
        let (f, g) = random_st_pair(&mut rng, 8);
        let st = order_leq(&f, &g, Order::St).holds;
        let ga_icx = ga_order_leq(&f, &g, GaOrder::GaIcx)?.holds;
        let icx = order_leq(&f, &g, Order::Icx).holds;
        if !(st && ga_icx && icx) {
            chain_breaks += 1;
        }
        ga_cx_equal_gm(&f, &g, &mut gm_breaks)?;
    }

    let mut product_misses = 0usize;
    for trial in 0..500 {
        let mut rng = trial_rng(seed ^ 0x88, trial);
        let (f, g) = random_product_pair(&mut rng, 8);
        if !ga_cx_equal_gm(&f, &g, &mut gm_breaks)? {
            product_misses += 1;
        }
    }

    let (mut applicable, mut disagreements) = (0usize, 0usize);
    for trial in 0..200 {
        let mut rng = trial_rng(seed ^ 0x808, trial);
        let (f, g) = random_crossing_pair(&mut rng, 8);
        let r = single_crossing_ga_cx(&f, &g)?;
        ga_cx_equal_gm(&f, &g, &mut gm_breaks)?;
        if r.applicable {
            applicable += 1;
            if !(r.implied && r.verdict.holds) {
                disagreements += 1;
            }
        }
    }
    verdict(
        chain_breaks == 0 && product_misses == 0 && applicable > 0 && disagreements == 0 && gm_breaks == 0,
        format!(
            "chain breaks {chain_breaks}/500; product pairs not ga-cx {product_misses}/500; single-crossing applicable {applicable}/200 with {disagreements} disagreements; ga-cx verdicts with unequal geometric means {gm_breaks}"
        ),
    )
}

fn criterion_9(seed: u64) -> Outcome {
    let specs = [
        RiskMeasureSpec::GeometricMean,
        RiskMeasureSpec::PNorm { p: 0.5 },
        RiskMeasureSpec::Orlicz(OrliczSpec::power(0.5)?),
        RiskMeasureSpec::ExpAvarLog { lambda: 0.5 },
    ];
    let (mut unordered, mut violations) = (0usize, 0usize);
    for (mode, salt) in [(GaOrder::GaCx, 0x09u64), (GaOrder::GaIcx, 0x99)] {
        for trial in 0..500 {
            let mut rng = trial_rng(seed ^ salt, trial);
            let (f, g) = match mode {
                GaOrder::GaCx => random_product_pair(&mut rng, 8),
                GaOrder::GaIcx => random_ga_icx_pair(&mut rng, 8),
            };
            for spec in &specs {
                let r = consistency_test(spec, &f, &g, mode)?;
                if !r.ordered {
                    unordered += 1;
                }
                if !r.consistent {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        unordered == 0 && violations == 0,
        format!(
            "{violations} violations over 500 ga-cx and 500 ga-icx pairs x 4 measures ({unordered} pairs not ordered)"
        ),
    )
}
