use mimtilt::oracle::{enumerate_types, enumerate_types_complement};
use mimtilt::{
    beta_from_raw, beta_of_omega, fairness, kl, mim_total, sanov_bound, solve_budget_problem, solve_omega,
    tilt, ImportanceCoefficient, Pmf, RawUsage,
};
use proptest::prelude::*;

/// Strictly positive distributions on 2..=6 atoms.
fn positive_pmf() -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.05f64..1.0, 2..=6).prop_map(|w| {
        let k = w.len();
        Pmf::from_probs_renormalized((1..=k).map(|i| format!("s{i}")), w).unwrap()
    })
}

/// Positive distributions with at least two distinct probabilities.
fn nondegenerate_pmf() -> impl Strategy<Value = Pmf> {
    positive_pmf().prop_filter("needs distinct probabilities", |p| p.p_max() - p.p_min() > 1e-3)
}

fn omega(w: f64) -> ImportanceCoefficient {
    ImportanceCoefficient::new(w).unwrap()
}

proptest! {
    #[test]
    fn counts_normalize(counts in prop::collection::vec(0.0f64..1e6, 2..=8)) {
        prop_assume!(counts.iter().sum::<f64>() > 0.0);
        let labels: Vec<String> = (0..counts.len()).map(|i| i.to_string()).collect();
        let (p, _) = Pmf::from_counts(labels, counts).unwrap();
        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn realized_budget_is_in_range(p in positive_pmf(), seed in prop::collection::vec(0.0f64..10.0, 6)) {
        let counts: Vec<f64> = seed[..p.len()].iter().map(|c| c + 1e-3).collect();
        let raw = RawUsage::new(p.labels().to_vec(), counts).unwrap();
        let beta = beta_from_raw(&p, &raw).unwrap().beta;
        prop_assert!(beta >= p.p_min() - 1e-15 && beta <= p.p_max() + 1e-15);
    }

    #[test]
    fn self_fairness(p in positive_pmf()) {
        prop_assert!(fairness(&p, &p).unwrap().all_fair());
    }

    #[test]
    fn tilt_outputs_are_valid(p in positive_pmf(), w in -300.0f64..300.0) {
        let r = tilt(&p, omega(w)).unwrap();
        prop_assert!((r.utility.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(r.utility.probs().iter().all(|&u| (0.0..=1.0).contains(&u)));
        prop_assert!(r.beta >= p.p_min() - 1e-15 && r.beta <= p.p_max() + 1e-15);
        prop_assert_eq!(r.alpha, 1.0 - r.beta);
        prop_assert!(r.kl_to_source >= 0.0);
        let floor = p.p_max().ln() + w * (1.0 - p.p_max());
        prop_assert!(r.mim_total.ln_value >= floor - 1e-12);
    }

    #[test]
    fn ratios_fall_with_probability(p in positive_pmf(), w in 0.01f64..50.0) {
        let u = tilt(&p, omega(w)).unwrap().utility;
        let mut pairs: Vec<(f64, f64)> = p.probs().iter().zip(u.probs()).map(|(a, b)| (*a, b / a)).collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for win in pairs.windows(2) {
            if win[1].0 > win[0].0 {
                prop_assert!(win[1].1 < win[0].1, "{:?}", win);
            }
        }
    }

    #[test]
    fn shift_does_not_change_tilt(p in positive_pmf(), w in -30.0f64..30.0) {
        let naive: Vec<f64> = p.probs().iter().map(|&pi| pi * (w * (1.0 - pi)).exp()).collect();
        let z: f64 = naive.iter().sum();
        let r = tilt(&p, omega(w)).unwrap();
        for (u, n) in r.utility.probs().iter().zip(&naive) {
            prop_assert!((u - n / z).abs() <= 1e-13);
        }
        let total = mim_total(&p, omega(w)).unwrap().value.unwrap();
        prop_assert!((total - z).abs() <= 1e-12 * z);
    }

    #[test]
    fn budget_strictly_decreasing(p in nondegenerate_pmf(), a in -50.0f64..50.0, b in -50.0f64..50.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (b_lo, b_hi) = (beta_of_omega(&p, omega(lo)).unwrap(), beta_of_omega(&p, omega(hi)).unwrap());
        prop_assert!(b_lo >= b_hi);
        // strict unless both ends already sit on an endpoint to machine precision
        prop_assert!(b_lo > b_hi || b_hi - p.p_min() < 1e-14 || p.p_max() - b_lo < 1e-14);
    }

    #[test]
    fn inverse_hits_the_budget(p in nondegenerate_pmf(), w in -30.0f64..30.0) {
        let beta = beta_of_omega(&p, omega(w)).unwrap();
        prop_assume!(beta > p.p_min() + 1e-11 && beta < p.p_max() - 1e-11);
        let back = solve_omega(&p, beta).unwrap();
        prop_assert!((beta_of_omega(&p, back).unwrap() - beta).abs() <= 1e-12);
    }

    #[test]
    fn source_is_the_only_fixed_point(p in nondegenerate_pmf(), w in 1e-3f64..40.0, neg in any::<bool>()) {
        let w = if neg { -w } else { w };
        let r = tilt(&p, omega(w)).unwrap();
        prop_assert!(r.utility.linf_distance(&p) > 0.0);
        prop_assert!((r.beta - p.collision()).abs() > 0.0);
        prop_assert!(r.kl_to_source > 0.0);
    }

    #[test]
    fn kl_nonnegative(p in positive_pmf(), q in prop::collection::vec(0.0f64..1.0, 6)) {
        let q = Pmf::from_probs_renormalized(p.labels().to_vec(), q[..p.len()].iter().map(|x| x + 1e-9).collect()).unwrap();
        let d = kl(&q, &p).unwrap();
        prop_assert!(d >= 0.0);
        if q.linf_distance(&p) > 1e-6 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn budget_solution_is_feasible(p in positive_pmf(), t in 0.0f64..1.0) {
        let beta = p.p_min() + t * (1.0 - p.p_min());
        let r = solve_budget_problem(&p, beta).unwrap();
        prop_assert!(r.beta <= beta + 1e-12);
        if r.omega > 0.0 && r.omega.is_finite() {
            prop_assert!((r.beta - beta).abs() <= 1e-12);
        }
    }

    #[test]
    fn enumeration_below_bound(w in prop::collection::vec(0.05f64..1.0, 2..=3), t in 0.0f64..1.0, n in 1usize..=12) {
        let k = w.len();
        let p = Pmf::from_probs_renormalized((0..k).map(|i| i.to_string()), w).unwrap();
        let beta = p.p_min() + t * (p.p_max() - p.p_min());
        let exact = enumerate_types(&p, beta, n).unwrap();
        let bound = sanov_bound(&p, beta, n).unwrap();
        prop_assert!(exact.exact_probability <= bound.bound);
        let rest = enumerate_types_complement(&p, beta, n).unwrap();
        prop_assert!((exact.exact_probability + rest.exact_probability - 1.0).abs() <= 1e-12);
    }
}
