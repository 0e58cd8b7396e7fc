use pnkit::analysis::{self, PointSet};
use pnkit::phi::{check_quasi_inverse_inequalities, validate_phi};
use pnkit::pnspace::{self, PNSpace, Vector};
use pnkit::triangle::{random_distribution, tau_m, tau_m_brute};
use pnkit::{DistributionFunction, ExtReal, GridSpec, TNorm, Tail, TriangleFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn df_from_seed(seed: u64) -> DistributionFunction {
    random_distribution(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// sup over a dense split of [0, x] of min(F(s), G(x − s)).
fn scan_sup_min(f: &DistributionFunction, g: &DistributionFunction, x: f64) -> f64 {
    let n = 4000;
    (0..=n)
        .map(|i| {
            let s = x * i as f64 / n as f64;
            f.at(s).min(g.at(x - s))
        })
        .fold(0.0, f64::max)
}

fn knots_strategy() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
    prop::collection::vec((0.01f64..2.0, 0.0f64..1.0), 1..8).prop_map(|steps| {
        let mut ys: Vec<f64> = steps.iter().map(|s| s.1).collect();
        ys.sort_by(f64::total_cmp);
        let mut x = 0.0;
        let mut knots = vec![(0.0, 0.0)];
        for (i, s) in steps.iter().enumerate() {
            x += s.0;
            knots.push((x, ys[i]));
        }
        let last = ys[ys.len() - 1];
        (knots, last)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn evaluation_is_monotone_and_bounded((knots, last) in knots_strategy(), xs in prop::collection::vec(0.0f64..20.0, 2..20)) {
        let f = DistributionFunction::new(knots, last).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(f.at(w[0]) <= f.at(w[1]));
        }
        prop_assert_eq!(f.at(0.0), 0.0);
        prop_assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&f.at(x))));
        prop_assert!(f.eval(ExtReal::Infinity) == 1.0);
    }

    #[test]
    fn json_round_trip((knots, last) in knots_strategy()) {
        let f = DistributionFunction::new(knots, last).unwrap();
        let back: DistributionFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(f, back);
    }

    #[test]
    fn tau_m_matches_scan(a in any::<u64>(), b in any::<u64>()) {
        let (f, g) = (df_from_seed(a), df_from_seed(b));
        let fast = tau_m(&f, &g);
        for x in [0.1, 0.5, 1.0, 1.7, 2.5, 4.0, 7.0] {
            prop_assert!((fast.at(x) - scan_sup_min(&f, &g, x)).abs() < 1e-3, "x = {}", x);
        }
        prop_assert!((fast.value_at_inf() - f.value_at_inf().min(g.value_at_inf())).abs() < 1e-12);
    }

    #[test]
    fn tau_m_is_commutative(a in any::<u64>(), b in any::<u64>()) {
        let (f, g) = (df_from_seed(a), df_from_seed(b));
        let (fg, gf) = (tau_m(&f, &g), tau_m(&g, &f));
        for i in 0..200 {
            let x = i as f64 * 0.05;
            prop_assert!((fg.at(x) - gf.at(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn tau_m_brute_agrees_with_fast(a in any::<u64>(), b in any::<u64>()) {
        let grid = GridSpec::default();
        let (f, g) = (df_from_seed(a), df_from_seed(b));
        let (fast, brute) = (tau_m(&f, &g), tau_m_brute(&f, &g, &grid));
        for x in grid.points_up_to(8.0) {
            prop_assert!((fast.at(x) - brute.at(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn product_convolution_is_below_min_convolution(a in any::<u64>(), b in any::<u64>()) {
        let grid = GridSpec::new(1.0 / 16.0, 16.0, 1e-9).unwrap();
        let (f, g) = (df_from_seed(a), df_from_seed(b));
        let pi = TriangleFunction::TauT(TNorm::Product).apply(&f, &g, &grid);
        let m = tau_m(&f, &g);
        for x in grid.points() {
            prop_assert!(pi.at(x) <= m.at(x) + 1e-9);
        }
    }

    #[test]
    fn quasi_inverse_inequalities(steps in prop::collection::vec((0.0f64..2.0, 0.0f64..3.0), 1..6), slope in 0.1f64..4.0, seed in any::<u64>()) {
        let mut knots = vec![(0.0, 0.0)];
        let (mut x, mut y) = (0.0, 0.0);
        for (dx, dy) in steps {
            x += dx.max(0.05);
            y += dy;
            knots.push((x, y));
        }
        if knots[1].1 == 0.0 {
            knots[1].1 = 0.1;
        }
        let phi = validate_phi(knots, Tail::Slope(slope)).unwrap();
        let r = check_quasi_inverse_inequalities(&phi, 200, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(r.passed, "{:?}", r);
    }

    #[test]
    fn serstnev_scaling(p in -50.0f64..50.0, lambda in prop::sample::select(vec![-3.0, -0.5, 0.2, 1.0, 7.5]), x in 0.001f64..100.0) {
        for space in [PNSpace::ex25(), PNSpace::ex22(0.3).unwrap()] {
            let lhs = space.nu_at(&Vector::scalar(lambda * p), ExtReal::Finite(x));
            let rhs = space.nu_at(&Vector::scalar(p), ExtReal::Finite(x / lambda.abs()));
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn radius_shrinks_as_set_grows(xs in prop::collection::vec(-20.0f64..20.0, 1..6), extra in -20.0f64..20.0) {
        let grid = GridSpec::new(1.0 / 16.0, 32.0, 1e-9).unwrap();
        let space = PNSpace::ex25();
        let small: Vec<Vector> = xs.iter().map(|&x| Vector::scalar(x)).collect();
        let mut big = small.clone();
        big.push(Vector::scalar(extra));
        let (rs, _) = analysis::probabilistic_radius(&space, &PointSet::explicit(small), &grid).unwrap();
        let (rb, _) = analysis::probabilistic_radius(&space, &PointSet::explicit(big), &grid).unwrap();
        for x in grid.points() {
            prop_assert!(rb.at(x) <= rs.at(x) + 1e-7);
        }
    }

    #[test]
    fn absorption_needs_more_as_n_grows(r in 0.01f64..100.0) {
        let space = PNSpace::ex25();
        let a = PointSet::explicit(vec![Vector::scalar(r)]);
        let rep = analysis::absorption_check(&space, &a, &[1, 2, 4, 8, 16], 1_000_000_000).unwrap();
        let ks: Vec<u64> = rep.rows.iter().map(|row| row.least_k.unwrap()).collect();
        prop_assert!(ks.windows(2).all(|w| w[0] <= w[1]), "{:?}", ks);
        // p/k lies in N_θ(1/n) iff |p|/k < λ²/(1 − λ) with λ = 1/n.
        for (row, k) in rep.rows.iter().zip(&ks) {
            let lambda = 1.0 / row.n as f64;
            let bound = if row.n == 1 { f64::INFINITY } else { lambda * lambda / (1.0 - lambda) };
            prop_assert!(r / *k as f64 <= bound * (1.0 + 1e-12));
            if *k > 1 {
                prop_assert!(r / (*k - 1) as f64 >= bound * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn constant_sequences_converge_to_themselves(p in -1e3f64..1e3) {
        let v = Vector::scalar(p);
        let seq = vec![v.clone(); 10];
        let r = pnspace::is_strongly_convergent(&PNSpace::ex25(), &seq, &v, &pnspace::DEFAULT_LAMBDAS).unwrap();
        prop_assert!(r.holds);
    }
}
