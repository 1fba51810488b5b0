use ggconvex::gridfn::{
    check_gg_convex, classify_convexities, gg_jensen_check, make_grid_function, second_order_gg_test, FunctionSpec,
    GridFunction, LogGrid, Tails,
};
use ggconvex::riskmeasures::{FiniteProbSpace, PositiveRandomVariable};
use ggconvex::{ExtendedPositive, ProductMode};

#[test]
fn extended_products_follow_the_two_conventions() {
    let (z, inf) = (ExtendedPositive::Zero, ExtendedPositive::Infinity);
    assert_eq!(z.mul(inf, ProductMode::Convex), inf);
    assert_eq!(z.mul(inf, ProductMode::Concave), z);
    let six = ExtendedPositive::new(2.0)
        .unwrap()
        .mul(ExtendedPositive::new(3.0).unwrap(), ProductMode::Convex);
    assert_eq!(six.to_f64(), 6.0);
    assert_eq!(z.recip(), inf);
    assert_eq!(inf.recip(), z);
    assert_eq!(z.ln(), f64::NEG_INFINITY);
    assert_eq!(ExtendedPositive::new(std::f64::consts::E).unwrap().ln(), 1.0);
}

#[test]
fn gg_affine_interpolation_is_exact() {
    let grid = LogGrid::new(0.1, 10.0, 37).unwrap();
    let id = make_grid_function(
        &FunctionSpec::GgAffine {
            scale: 1.0,
            exponent: 1.0,
        },
        grid,
    )
    .unwrap();
    for &x in &[0.1, 0.137, 1.0, 2.5, 9.99] {
        assert!((id.eval(x).to_f64() - x).abs() < 1e-12 * x);
    }
    // values 1 at x = 1 and 4 at x = 4, queried at 2
    let g = LogGrid::new(1.0, 4.0, 2).unwrap();
    let f = GridFunction::from_values(
        g,
        &[ExtendedPositive::new(1.0).unwrap(), ExtendedPositive::new(4.0).unwrap()],
        Tails::TRUNCATE,
    )
    .unwrap();
    assert!((f.eval(2.0).to_f64() - 2.0).abs() < 1e-12);
    assert!(f.eval(0.5).is_infinite());
}

#[test]
fn convexity_flags_match_the_standard_examples() {
    let grid = LogGrid::new(0.1, 10.0, 257).unwrap();
    let sq = make_grid_function(
        &FunctionSpec::GgAffine {
            scale: 1.0,
            exponent: 2.0,
        },
        grid,
    )
    .unwrap();
    let flags = classify_convexities(&sq);
    assert!(flags.aa && !flags.ag && flags.ga && flags.gg);
    let e = classify_convexities(&make_grid_function(&FunctionSpec::Exp, grid).unwrap());
    assert!(e.aa && e.ag && e.ga && e.gg);
    let poly = make_grid_function(
        &FunctionSpec::Polynomial {
            coefficients: vec![1.0, 1.0, 1.0],
        },
        grid,
    )
    .unwrap();
    assert!(check_gg_convex(&poly).holds());
    // log x, floored to stay positive, is not GG-convex
    let logs: Vec<f64> = grid.xs().iter().map(|x| x.ln().max(1e-3).ln()).collect();
    let lg = GridFunction::from_log_values(grid, logs, Tails::TRUNCATE).unwrap();
    assert!(!check_gg_convex(&lg).holds());
}

#[test]
fn second_order_and_jensen() {
    assert!(second_order_gg_test(&f64::exp, &f64::exp, &f64::exp, 1.0).unwrap());
    // ln(1 + x) is GG-concave and not GG-convex
    let f = |x: f64| (1.0 + x).ln();
    let df = |x: f64| 1.0 / (1.0 + x);
    let d2f = |x: f64| -1.0 / (1.0 + x).powi(2);
    assert!(!second_order_gg_test(&f, &df, &d2f, 2.0).unwrap());

    let grid = LogGrid::new(0.1, 10.0, 1001).unwrap();
    let e = make_grid_function(&FunctionSpec::Exp, grid).unwrap();
    let x = PositiveRandomVariable::new(vec![1.0, std::f64::consts::E]).unwrap();
    let p = FiniteProbSpace::uniform(2).unwrap();
    let j = gg_jensen_check(&e, &x, &p).unwrap();
    assert!(j.holds);
    // both sides interpolate between grid nodes
    let (lhs, rhs) = (0.5f64.exp().exp(), ((1.0 + std::f64::consts::E) / 2.0).exp());
    assert!((j.lhs.to_f64() / lhs - 1.0).abs() < 1e-4);
    assert!((j.rhs.to_f64() / rhs - 1.0).abs() < 1e-4);
}
