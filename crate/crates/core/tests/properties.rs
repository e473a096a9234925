use proptest::prelude::*;
use repute::dynamics::{bayes_update, kl_divergence, PlayState, Player2Strategy, StrategyProfile};
use repute::game::MixedAction;
use repute::geometry::{chi_statistic, in_lambda_underline, RegionContext, RegionSpec};
use repute::samples::{self, H, THETA_STAR};

fn mixed() -> impl Strategy<Value = MixedAction> {
    prop::collection::vec(0.01f64..1.0, 3).prop_map(|w| MixedAction::from_weights(w).unwrap())
}

fn spec() -> RegionSpec {
    RegionSpec::new(vec![f64::INFINITY, 1.25, 1.25], 1.0).unwrap()
}

proptest! {
    #[test]
    fn chi_is_linear(a in prop::collection::vec(0.0f64..5.0, 3), b in prop::collection::vec(0.0f64..5.0, 3), w in 0.0f64..1.0) {
        let s = spec();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| w * x + (1.0 - w) * y).collect();
        let lhs = chi_statistic(&mix, &s);
        let rhs = w * chi_statistic(&a, &s) + (1.0 - w) * chi_statistic(&b, &s);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn lower_region_is_convex_and_inside(a in prop::collection::vec(0.0f64..2.0, 3), b in prop::collection::vec(0.0f64..2.0, 3), w in 0.0f64..1.0) {
        let s = samples::mixed_band();
        let ctx = RegionContext::new(&s, THETA_STAR, &samples::half_h_half_i()).unwrap();
        let lower = ctx.lower_spec().unwrap();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| w * x + (1.0 - w) * y).collect();
        if in_lambda_underline(&a, &lower) && in_lambda_underline(&b, &lower) {
            prop_assert!(in_lambda_underline(&mix, &lower));
        }
        if in_lambda_underline(&mix, &lower) {
            prop_assert!(ctx.in_lambda(&mix).unwrap());
        }
    }

    #[test]
    fn posterior_stays_normalized(path in prop::collection::vec((0usize..3, 0usize..3), 1..12)) {
        let (_, prof) = samples::band_profile();
        let mut ps = PlayState::initial(&prof);
        for (a1, a2) in path {
            // Sequences no type plays end the walk.
            let Ok(next) = bayes_update(&prof, &ps, a1, a2) else { break };
            ps = next;
            let total: f64 = ps.posterior.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(ps.posterior.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn pinsker_holds(p in mixed(), q in mixed()) {
        let kl = kl_divergence(&p, &q);
        prop_assert!(kl >= 0.0);
        prop_assert!(p.l1_distance(&q) <= (2.0 * kl).sqrt() + 1e-12);
    }

    #[test]
    fn stationary_profiles_keep_h_commitment_mass(steps in 1usize..20) {
        let s = samples::h_only();
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(H); 3], Player2Strategy::Myopic).unwrap();
        let mut ps = PlayState::initial(&prof);
        let start = ps.posterior.clone();
        for _ in 0..steps {
            ps = bayes_update(&prof, &ps, H, 0).unwrap();
        }
        for (x, y) in ps.posterior.iter().zip(&start) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
