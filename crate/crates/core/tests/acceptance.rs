//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its own pass/fail line.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repute::bounds::{
    conditioned_law_gap, construct_deviation, period_budget, survival_probabilities, verify_deviation, VerifyConfig,
};
use repute::dynamics::{
    binomial_sigma, discounted_frequency_concentration, simulate, supermartingale_check, Player2Strategy, SimConfig,
    StrategyProfile, TraceRecord, Tracking, TrueType,
};
use repute::equilibria::{
    build_low_payoff_equilibrium, check_incentives, deviation_payoff_bound, kbar, motivating_example_profile,
};
use repute::game::{CommitmentStructure, MixedAction, PayoffTensor, Plan, Prior, ReputationScenario, StageGame};
use repute::geometry::{
    chi_statistic, imperfect_monitoring_bound, lambda_k_iteration, IterationConfig, RegionContext, RegionSpec,
};
use repute::samples::{self, H, THETA_STAR};

const SEED: u64 = 20240601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn horizon_for(delta: f64, tail: f64) -> usize {
    (tail.ln() / delta.ln()).ceil() as usize + 1
}

fn band_spec(s: &ReputationScenario, alpha: &MixedAction) -> RegionSpec {
    let ctx = RegionContext::new(s, THETA_STAR, alpha).unwrap();
    let base = ctx.lower_spec().unwrap();
    let chi0 = chi_statistic(&ctx.prior_lambda, &base);
    base.with_chi(chi0)
}

/// 10⁴ commitment-type traces on the band profile, shared by 3, 4 and 5.
fn band_traces() -> &'static Vec<TraceRecord> {
    static TRACES: OnceLock<Vec<TraceRecord>> = OnceLock::new();
    TRACES.get_or_init(|| {
        let (s, prof) = samples::band_profile();
        let alpha = samples::half_h_half_i();
        let spec = band_spec(&s, &alpha);
        let band = (spec.chi, spec.chi + 0.1);
        let cfg = SimConfig::new(s.delta, 500, 10_000, SEED, TrueType::Commitment(alpha.clone())).tracking(Tracking {
            alpha,
            spec: Some(spec),
            band: Some(band),
            far_eps: 0.1,
        });
        simulate(&s, &prof, &cfg).unwrap()
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn motivating_payoff() -> Outcome {
    let eq = motivating_example_profile(0.1).unwrap();
    let mut worst: f64 = 0.0;
    for delta in [0.9, 0.95, 0.99] {
        let t = horizon_for(delta, 1e-12);
        let cfg = SimConfig::new(delta, t, 16, SEED, TrueType::Strategic(THETA_STAR));
        for tr in simulate(&eq.scenario, &eq.profile, &cfg).unwrap() {
            worst = worst.max((tr.discounted_payoff - 0.5).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |payoff - 0.5| = {worst:.3e}"))
}

fn motivating_incentives() -> Outcome {
    let eq = motivating_example_profile(0.1).unwrap();
    let rep = check_incentives(&eq, 0.95, 200, 1e-6).unwrap();
    outcome(
        rep.theta_star_max_gain <= 1e-6 && rep.player2_max_violation <= 1e-9,
        format!(
            "gain {:.3e}, player 2 violation {:.3e}, {} nodes, closed {}",
            rep.theta_star_max_gain, rep.player2_max_violation, rep.nodes, rep.closed
        ),
    )
}

fn doob_floor_check() -> Outcome {
    let traces = band_traces();
    let n = traces.len();
    let p = traces.iter().filter(|t| t.upcrossings == 0).count() as f64 / n as f64;
    let floor = 0.1 / 0.6;
    let slack = 3.0 * binomial_sigma(p, n);
    outcome(p >= floor - slack, format!("P(U = 0) = {p:.4}, floor {floor:.4} - {slack:.4}"))
}

fn kl_budget() -> Outcome {
    let sums: Vec<f64> = band_traces().iter().map(|t| t.kl_sum).collect();
    let (mean, sd) = mean_sd(&sums);
    let budget = -(0.1f64).ln();
    let slack = 3.0 * sd / 100.0;
    outcome(mean <= budget + slack, format!("mean KL sum {mean:.4} vs {budget:.4} + {slack:.4}"))
}

fn pinsker() -> Outcome {
    let traces = band_traces();
    let failures: usize = traces.iter().map(|t| t.pinsker_violations).sum();
    let periods: usize = traces.iter().map(|t| t.chi_path.len()).sum();
    outcome(failures == 0, format!("{failures} failures over {periods} periods"))
}

fn frequency_concentration() -> Outcome {
    let alpha = samples::half_h_half_i();
    let tail = discounted_frequency_concentration(&alpha, 0.999, 10_000, SEED, &[0.1]).unwrap();
    let cap = 0.1 / alpha.len() as f64;
    let mut ok = true;
    let mut parts = Vec::new();
    for a in &tail.actions {
        let (_, p, sigma) = a.tails[0];
        ok &= p <= cap + 3.0 * sigma;
        parts.push(format!("{p:.4}"));
    }
    outcome(ok, format!("tail probabilities [{}] vs {cap:.4}", parts.join(", ")))
}

fn random_mixed(rng: &mut ChaCha8Rng, n: usize) -> MixedAction {
    if rng.gen_bool(0.3) {
        return MixedAction::pure(n, rng.gen_range(0..n));
    }
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    MixedAction::from_weights(w).unwrap()
}

fn random_scenario(rng: &mut ChaCha8Rng) -> ReputationScenario {
    let m = rng.gen_range(1..=3);
    let n1 = rng.gen_range(2..=3);
    let n2 = rng.gen_range(2..=3);
    let names = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let mut table = || {
        let vals: Vec<f64> = (0..m * n1 * n2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        PayoffTensor::from_fn(m, n1, n2, |s, a, b| vals[(s * n1 + a) * n2 + b])
    };
    let (u1, u2) = (table(), table());
    let game = StageGame::new(names("s", m), names("a", n1), names("b", n2), u1, u2).unwrap();
    let plans = (0..rng.gen_range(1..=2))
        .map(|k| Plan { name: format!("p{k}"), actions: (0..m).map(|_| random_mixed(rng, n1)).collect() })
        .collect::<Vec<_>>();
    let cells: Vec<Vec<f64>> = (0..m).map(|_| (0..=plans.len()).map(|_| rng.gen_range(0.05..1.0)).collect()).collect();
    let total: f64 = cells.iter().flatten().sum();
    let prior = Prior::new(cells.iter().map(|r| r.iter().map(|x| x / total).collect()).collect()).unwrap();
    ReputationScenario::new(game, CommitmentStructure { plans }, prior, 0.9).unwrap()
}

fn supermartingale() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = f64::NEG_INFINITY;
    let mut histories = 0;
    for _ in 0..100 {
        let s = random_scenario(&mut rng);
        let (m, n1) = (s.game.num_states(), s.game.num_actions1());
        let actions = (0..m).map(|_| random_mixed(&mut rng, n1)).collect();
        let prof = StrategyProfile::stationary(&s, actions, Player2Strategy::Myopic).unwrap();
        let plan = &s.commitments.plans[0];
        let alpha = plan.actions[rng.gen_range(0..m)].clone();
        let rep = supermartingale_check(&s, &prof, &alpha, 5).unwrap();
        worst = worst.max(rep.max_violation);
        histories += rep.histories;
    }
    outcome(worst <= 1e-9, format!("max violation {worst:.3e} over {histories} histories"))
}

/// Brute-force scan of `[0, λ]` on a 0.01 grid, scoring every reply from the
/// payoff tables.
fn grid_scan(s: &ReputationScenario, ctx: &RegionContext, lambda: &[f64]) -> bool {
    const STEP: f64 = 0.01;
    let g = &s.game;
    let n2 = g.num_actions2();
    let a2_star = g.unique_best_reply(ctx.theta_star, &ctx.alpha).unwrap();
    let counts: Vec<usize> = lambda.iter().map(|l| (l / STEP).floor() as usize + 1).collect();
    let total: usize = counts.iter().product();
    let mut point = vec![0.0; lambda.len()];
    for mut flat in 0..total {
        for (i, c) in counts.iter().enumerate() {
            point[i] = (flat % c) as f64 * STEP;
            flat /= c;
        }
        let score = |a2: usize| {
            g.u2.expected(&ctx.phi, &ctx.alpha, a2).unwrap()
                + point.iter().enumerate().map(|(st, l)| l * g.u2.against(st, &ctx.alpha, a2)).sum::<f64>()
        };
        let best = score(a2_star);
        if (0..n2).any(|a2| a2 != a2_star && score(a2) >= best - 1e-9) {
            return false;
        }
    }
    true
}

fn region_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let (mut agree, mut skipped, mut inside) = (0, 0, 0);
    let mut disagreements = 0;
    let mut instances = 0;
    while instances < 50 {
        let s = random_scenario(&mut rng);
        let m = s.game.num_states();
        let st = rng.gen_range(0..m);
        let plan = rng.gen_range(0..s.commitments.plans.len());
        let alpha = s.commitments.plans[plan].actions[st].clone();
        let Ok(ctx) = RegionContext::new(&s, st, &alpha) else { continue };
        instances += 1;
        let reach = if m == 3 { 1.5 } else { 5.0 };
        let lambda: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..reach)).collect();
        let shrink: Vec<f64> = lambda.iter().map(|l| (l - 0.01).max(0.0)).collect();
        let grow: Vec<f64> = lambda.iter().map(|l| l + 0.01).collect();
        if grid_scan(&s, &ctx, &shrink) != grid_scan(&s, &ctx, &grow) {
            skipped += 1;
            continue;
        }
        let vertex = ctx.in_lambda(&lambda).unwrap();
        if vertex == grid_scan(&s, &ctx, &lambda) {
            agree += 1;
            inside += vertex as usize;
        } else {
            disagreements += 1;
        }
    }
    outcome(
        disagreements == 0 && agree > 0,
        format!("{agree} agree ({inside} inside), {skipped} near the boundary, {disagreements} disagree"),
    )
}

fn grid_convergence() -> Outcome {
    let s = samples::benchmark_pure(2.0);
    let ctx = RegionContext::new(&s, THETA_STAR, &samples::pure(H)).unwrap();
    let cfg = IterationConfig { step: 0.05, max: 4.0, max_k: 50, seed: SEED, ..IterationConfig::default() };
    let rep = lambda_k_iteration(&ctx, &cfg).unwrap();
    let stages = rep.stages.len() - 1;
    outcome(
        rep.converged && stages <= 50 && rep.hausdorff_cells <= 2.0,
        format!("{stages} stages, Hausdorff {:.3} cells", rep.hausdorff_cells),
    )
}

fn deviation_plan() -> Outcome {
    let (s, prof) = samples::band_machine_profile();
    let alpha = samples::half_h_half_i();
    let spec = band_spec(&s, &alpha);
    let eps = 0.1;
    let table = survival_probabilities(&s, &prof, &alpha, &spec, eps, 200).unwrap();
    let plan = construct_deviation(&table).unwrap();
    let cfg = VerifyConfig { replications: 10_000, seed: SEED, delta: s.delta };
    let rep = verify_deviation(&s, &prof, &plan, &table, &spec, eps, &cfg).unwrap();
    let gap = conditioned_law_gap(&s, &prof, &alpha, &spec, eps, 6).unwrap();
    let budget = period_budget(0.1, 0.5, 0.1);
    outcome(
        rep.band_violations == 0
            && budget == 2764
            && rep.period_budget == budget
            && rep.mean_far_periods <= budget as f64
            && gap.max_abs_diff < 1e-12,
        format!(
            "{} violations, mean far periods {:.2} of {}, law gap {:.3e}",
            rep.band_violations, rep.mean_far_periods, rep.period_budget, gap.max_abs_diff
        ),
    )
}

fn construction_numbers() -> Outcome {
    let k = kbar(0.5, 0.4);
    let (eq, p) = build_low_payoff_equilibrium(&samples::low_payoff(), THETA_STAR, H).unwrap();
    let delta = 0.999;
    let bound = deviation_payoff_bound(k, p.t1.unwrap_or(1), delta);
    let cfg = SimConfig::new(delta, horizon_for(delta, 1e-9), 4, SEED, TrueType::Strategic(THETA_STAR));
    let traces = simulate(&eq.scenario, &eq.profile, &cfg).unwrap();
    let payoff = traces.iter().map(|t| t.discounted_payoff).sum::<f64>() / traces.len() as f64;
    outcome(
        k == 4 && 2 * k == 8 && p.k_star == 8 && (bound - 0.8).abs() <= 0.01 && (payoff - 8.0 / 9.0).abs() <= 0.01,
        format!("kbar {k}, k* {}, deviation bound {bound:.4}, on-path payoff {payoff:.4}", p.k_star),
    )
}

fn monitoring_formula() -> Outcome {
    let s = samples::benchmark_pure(2.0);
    let h = samples::pure(H);
    let spec = RegionSpec::new(vec![f64::INFINITY, 9.0, 9.0], 1.0).unwrap();
    let chi0 = chi_statistic(&[1.0, 3.0, 3.0], &spec);
    let at_two_thirds = imperfect_monitoring_bound(&s, THETA_STAR, &h, chi0).unwrap().value;
    let at_zero = imperfect_monitoring_bound(&s, THETA_STAR, &h, 0.0).unwrap().value;
    let v = s.commitment_payoff(THETA_STAR, &h).unwrap();
    outcome(
        chi0 == 2.0 / 3.0 && at_two_thirds == 0.0 && at_zero == v,
        format!("chi0 {chi0}, bound {at_two_thirds}, at zero {at_zero} vs {v}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Option<u64>, fn() -> Outcome); 12] = [
        ("motivating payoff", Some(5), motivating_payoff),
        ("motivating incentives", Some(30), motivating_incentives),
        ("doob floor", Some(60), doob_floor_check),
        ("kl budget", None, kl_budget),
        ("pinsker", None, pinsker),
        ("frequency concentration", None, frequency_concentration),
        ("supermartingale", None, supermartingale),
        ("region oracle", None, region_oracle),
        ("grid convergence", None, grid_convergence),
        ("deviation plan", None, deviation_plan),
        ("construction numbers", None, construction_numbers),
        ("monitoring formula", None, monitoring_formula),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let in_time = limit.map_or(true, |s| took <= Duration::from_secs(s));
        let passed = out.passed && in_time;
        failed += !passed as usize;
        let limit = limit.map_or(String::new(), |s| format!(" of {s}s"));
        println!(
            "criterion {:>2} {name}: {} ({}; {:.2}s{limit})",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
