use ggconvex::oracle::{ga_order_brute, random_convex_pl};
use ggconvex::orders::generate::{
    random_crossing_pair, random_ga_icx_pair, random_pair, random_product_pair, random_st_pair,
};
use ggconvex::orders::{
    consistency_test, ga_order_leq, independent_product, order_leq, single_crossing_ga_cx, DiscreteDistribution,
    GaOrder, Order, TestFunction,
};
use ggconvex::random::{trial_rng, TrialRng};
use ggconvex::riskmeasures::{MonetaryRisk, OrliczSpec, RiskMeasureSpec};
use proptest::prelude::*;

fn any_pair(rng: &mut TrialRng, kind: u8) -> (DiscreteDistribution, DiscreteDistribution) {
    match kind % 5 {
        0 => random_st_pair(rng, 8),
        1 => random_product_pair(rng, 6),
        2 => random_ga_icx_pair(rng, 6),
        3 => random_crossing_pair(rng, 8),
        _ => random_pair(rng, 8),
    }
}

fn gm(d: &DiscreteDistribution) -> f64 {
    d.geometric_mean().unwrap()
}

/// `E[test(ln X; t)]`, evaluated independently of the order code.
fn log_expect(d: &DiscreteDistribution, test: TestFunction, t: f64) -> f64 {
    d.atoms()
        .iter()
        .zip(d.probs())
        .map(|(x, p)| p * test.eval(x.ln(), t))
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ga_verdicts_bound_geometric_means(seed in any::<u64>(), kind in any::<u8>()) {
        let (f, g) = any_pair(&mut trial_rng(seed, 0), kind);
        if ga_order_leq(&f, &g, GaOrder::GaCx).unwrap().holds {
            prop_assert!((gm(&f) - gm(&g)).abs() <= 1e-9 * gm(&f).max(gm(&g)));
        }
        if ga_order_leq(&f, &g, GaOrder::GaIcx).unwrap().holds {
            prop_assert!(gm(&f) <= gm(&g) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn st_implies_ga_icx_implies_icx(seed in any::<u64>(), kind in any::<u8>()) {
        let (f, g) = any_pair(&mut trial_rng(seed, 0), kind);
        let st = order_leq(&f, &g, Order::St).holds;
        let ga_icx = ga_order_leq(&f, &g, GaOrder::GaIcx).unwrap().holds;
        let icx = order_leq(&f, &g, Order::Icx).holds;
        prop_assert!(!st || ga_icx);
        prop_assert!(!ga_icx || icx);
    }

    #[test]
    fn ga_verdicts_agree_with_brute_force(seed in any::<u64>(), kind in any::<u8>()) {
        let mut rng = trial_rng(seed, 0);
        let (f, g) = any_pair(&mut rng, kind);
        for (mode, increasing) in [(GaOrder::GaCx, false), (GaOrder::GaIcx, true)] {
            let v = ga_order_leq(&f, &g, mode).unwrap();
            let brute = ga_order_brute(&f, &g, increasing, &mut rng, 400, 1e-9);
            if v.holds {
                prop_assert!(brute.is_none(), "brute force found excess {:?}", brute);
            } else {
                let w = v.violation().unwrap();
                let (lhs, rhs) = (log_expect(&f, w.test, w.t), log_expect(&g, w.test, w.t));
                prop_assert!(lhs > rhs, "witness does not separate: {lhs} vs {rhs}");
                prop_assert!((lhs - w.lhs).abs() <= 1e-9 * lhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn ga_cx_orders_geometric_expectations(seed in any::<u64>(), kind in any::<u8>(), a in -3.0f64..3.0) {
        let (f, g) = any_pair(&mut trial_rng(seed, 0), kind);
        if ga_order_leq(&f, &g, GaOrder::GaCx).unwrap().holds {
            // G[f(X)] for the GG-convex f = exp and f = x^a
            let ln_geo = |d: &DiscreteDistribution, h: &dyn Fn(f64) -> f64| d.expect(h);
            let exp_f = ln_geo(&f, &|x| x);
            let exp_g = ln_geo(&g, &|x| x);
            prop_assert!(exp_f <= exp_g + 1e-9 * exp_g.abs().max(1.0));
            let pow_f = ln_geo(&f, &|x| a * x.ln());
            let pow_g = ln_geo(&g, &|x| a * x.ln());
            prop_assert!((pow_f - pow_g).abs() <= 1e-9 * a.abs().max(1.0) * pow_g.abs().max(1.0));
        }
    }

    #[test]
    fn random_convex_tests_respect_product_pairs(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let (f, g) = random_product_pair(&mut rng, 6);
        let (lo, hi) = (f.min().min(g.min()).ln(), f.max().max(g.max()).ln());
        for _ in 0..50 {
            let pieces = random_convex_pl(&mut rng, lo, hi, false);
            let h = |u: f64| ggconvex::oracle::eval_convex_pl(&pieces, u);
            let (ef, eg) = (f.expect(|x| h(x.ln())), g.expect(|x| h(x.ln())));
            prop_assert!(ef <= eg + 1e-9 * ef.abs().max(eg.abs()).max(1.0));
        }
    }

    #[test]
    fn single_crossing_implies_direct_verdict(seed in any::<u64>()) {
        let (f, g) = random_crossing_pair(&mut trial_rng(seed, 0), 8);
        let r = single_crossing_ga_cx(&f, &g).unwrap();
        prop_assert_eq!(r.implied, r.applicable);
        if r.applicable {
            prop_assert!(r.verdict.holds);
        }
    }

    #[test]
    fn product_geometric_mean_is_multiplicative(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let (f, z) = random_pair(&mut rng, 6);
        let y = independent_product(&f, &z).unwrap();
        prop_assert!((gm(&y) - gm(&f) * gm(&z)).abs() <= 1e-12 * gm(&y));
        prop_assert!(y.len() <= f.len() * z.len());
    }

    #[test]
    fn builtin_measures_are_consistent(seed in any::<u64>(), kind in any::<u8>()) {
        let (f, g) = any_pair(&mut trial_rng(seed, 0), kind);
        let specs = [
            RiskMeasureSpec::GeometricMean,
            RiskMeasureSpec::PNorm { p: 0.5 },
            RiskMeasureSpec::PNorm { p: 2.0 },
            RiskMeasureSpec::Orlicz(OrliczSpec::power(0.5).unwrap()),
            RiskMeasureSpec::Orlicz(OrliczSpec::LogAffine),
            RiskMeasureSpec::ExpAvarLog { lambda: 0.5 },
            RiskMeasureSpec::ExpMonetaryLog(MonetaryRisk::Entropic { gamma: 1.0 }),
        ];
        for spec in &specs {
            for mode in [GaOrder::GaCx, GaOrder::GaIcx] {
                let r = consistency_test(spec, &f, &g, mode).unwrap();
                prop_assert!(!r.ordered || r.consistent, "{:?} {:?}: {:?}", spec, mode, r);
            }
        }
    }
}

#[test]
fn three_atom_product_example() {
    let f = DiscreteDistribution::equiprobable(vec![1.0, 4.0]).unwrap();
    let z = DiscreteDistribution::equiprobable(vec![0.5, 2.0]).unwrap();
    let y = independent_product(&f, &z).unwrap();
    // four products 0.5, 2, 2, 8; the two 2s merge
    assert_eq!(y.atoms(), &[0.5, 2.0, 8.0]);
    assert!(ga_order_leq(&f, &y, GaOrder::GaCx).unwrap().holds);
    // stop-loss of the logs at every knot, by hand
    let lf = f.log().unwrap();
    let ly = y.log().unwrap();
    for t in [-(2f64.ln()), 0.0, 2f64.ln(), 4f64.ln(), 8f64.ln()] {
        assert!(lf.stop_loss(t) <= ly.stop_loss(t) + 1e-15);
    }
}
