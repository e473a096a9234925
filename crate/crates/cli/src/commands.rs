use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use repute::bounds::{
    classify_scenario, construct_deviation, survival_probabilities, verify_deviation, Verdict, VerifyConfig,
};
use repute::dynamics::{simulate, SimConfig, Tracking, TrueType};
use repute::equilibria::{
    build_low_payoff_equilibrium, check_incentives, cycle_payoff, deviation_payoff_bound,
    motivating_example_profile, EquilibriumMachine,
};
use repute::game::{validate_scenario, MixedAction, ReputationScenario};
use repute::geometry::{
    chi_statistic, imperfect_monitoring_bound, in_lambda_underline, lambda_k_iteration, regions_csv, GridAxis,
    GridRegion, IterationConfig, RegionContext, RegionSpec,
};
use repute::io::{self, EquilibriumFile};
use serde_json::{json, Value};

use crate::input::{self, usage, Loaded, ProfileSource, Source};
use crate::output::{estimate, num, scenario_hash, Claim, Run};

pub struct Globals {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
}

impl Globals {
    fn run(&self, command: &str, params: Value) -> Run {
        Run::new(command, &self.out_dir, self.seed, self.threads, params)
    }
}

fn labelled(labels: &[String], xs: &[f64]) -> Value {
    Value::Object(labels.iter().zip(xs).map(|(l, x)| (l.clone(), num(*x))).collect())
}

fn action_map(labels: &[String], a: &MixedAction) -> Value {
    labelled(labels, a.weights())
}

fn spec_json(labels: &[String], spec: &RegionSpec) -> Value {
    json!({ "psi": labelled(labels, &spec.psi), "chi": num(spec.chi) })
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Scenario JSON file.
    pub path: PathBuf,
}

pub fn validate(args: &ValidateArgs) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&args.path)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.path.display())))?;
    let s = io::parse_scenario(&text)?;
    let report = validate_scenario(&s);
    print!("{report}");
    println!(
        "{}: {} error(s), {} warning(s)",
        args.path.display(),
        report.errors.len(),
        report.warnings.len()
    );
    Ok(report.is_ok())
}

#[derive(Args, Debug)]
pub struct RegionsArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub theta_star: Option<String>,
    /// Commitment action: plan name, action label, or `H=0.5,I=0.5`.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 4.0)]
    pub grid_max: f64,
    /// Also run the grid iteration towards the lower region.
    #[arg(long)]
    pub iterate: bool,
    #[arg(long, default_value_t = 50)]
    pub max_k: usize,
    /// Output stem; writes `<stem>.csv` and `<stem>.json`.
    #[arg(long, default_value = "regions")]
    pub out: String,
}

pub fn regions(g: &Globals, args: &RegionsArgs) -> anyhow::Result<bool> {
    let loaded = args.source.load()?;
    let s = &loaded.scenario;
    let labels = &s.game.states;
    let th = input::theta_star(&loaded, args.theta_star.as_deref())?;
    let alpha = input::alpha(s, &args.alpha, Some(th))?;
    let ctx = RegionContext::new(s, th, &alpha)?;
    let lambda = ctx.prior_lambda.clone();
    let spec = ctx.lower_spec().ok();
    let psi: Vec<Value> = (0..labels.len())
        .map(|st| {
            let p = ctx.psi_star(st);
            json!({ "state": labels[st], "value": num(p.value), "rejected_at_zero": p.rejected_at_zero })
        })
        .collect();
    let chi0 = spec.as_ref().map(|sp| chi_statistic(&lambda, sp));

    let mut run = g.run(
        "regions",
        json!({ "theta_star": labels[th], "alpha": args.alpha, "grid_step": args.grid_step,
                "grid_max": args.grid_max, "iterate": args.iterate, "max_k": args.max_k }),
    );
    run.scenario_path = Some(loaded.path.clone());

    let coords: Vec<usize> = match &spec {
        Some(sp) if (1..=3).contains(&sp.finite_coords().len()) => sp.finite_coords(),
        _ => (0..labels.len()).filter(|st| *st != th).collect(),
    };
    let mut claims = Vec::new();
    let mut grid = Value::Null;
    let mut iteration = Value::Null;
    if coords.len() <= 3 && args.grid_step > 0.0 && args.grid_max > 0.0 {
        let count = (args.grid_max / args.grid_step + 1e-9).floor() as usize + 1;
        let axes: Vec<GridAxis> = coords.iter().map(|st| GridAxis { state: *st, step: args.grid_step, count }).collect();
        let full = |x: &[f64]| {
            let mut v = vec![0.0; lambda.len()];
            for (c, xi) in coords.iter().zip(x) {
                v[*c] = *xi;
            }
            v
        };
        let bar = GridRegion::from_fn(axes.clone(), |x| ctx.in_lambda_bar(&full(x)));
        let boxed = GridRegion::from_fn(axes.clone(), |x| ctx.in_lambda(&full(x)).unwrap_or(false));
        let mut regions: Vec<(&str, &GridRegion)> = vec![("lambda_bar", &bar), ("lambda", &boxed)];
        let lower = spec.as_ref().map(|sp| GridRegion::from_fn(axes.clone(), |x| in_lambda_underline(&full(x), sp)));
        if let Some(l) = &lower {
            regions.push(("lambda_underline", l));
        }
        let report = if args.iterate {
            let cfg = IterationConfig {
                step: args.grid_step,
                max: args.grid_max,
                max_k: args.max_k,
                seed: g.seed,
                ..IterationConfig::default()
            };
            Some(lambda_k_iteration(&ctx, &cfg)?)
        } else {
            None
        };
        if let Some(r) = &report {
            if r.limit().axes == axes {
                regions.push(("lambda_limit", r.limit()));
            }
            iteration = json!({
                "stages": r.stages.iter().map(GridRegion::count).collect::<Vec<_>>(),
                "converged": r.converged,
                "hausdorff_cells": num(r.hausdorff_cells),
                "profiles_per_point": r.profiles_per_point,
                "triangles": r.triangles,
            });
            claims.push(Claim {
                name: "iteration_converged".into(),
                value: json!(r.converged),
                target: json!(true),
                tolerance: json!(args.max_k),
                passed: r.converged,
            });
        }
        run.write(&format!("{}.csv", args.out), &regions_csv(labels, &regions))?;
        grid = json!({
            "csv": format!("{}.csv", args.out),
            "axes": coords.iter().map(|c| &labels[*c]).collect::<Vec<_>>(),
            "step": args.grid_step,
            "points_per_axis": count,
            "rows": bar.len(),
            "others_held_at": 0.0,
            "counts": regions.iter().map(|(n, r)| (n.to_string(), json!(r.count()))).collect::<serde_json::Map<_, _>>(),
        });
    }
    let result = json!({
        "theta_star": labels[th],
        "alpha": action_map(&s.game.actions1, &alpha),
        "a2_star": s.game.actions2[ctx.a2_star],
        "lambda": labelled(labels, &lambda),
        "phi": labelled(labels, &ctx.phi),
        "psi_star": psi,
        "theta_b": ctx.theta_b().iter().map(|st| &labels[*st]).collect::<Vec<_>>(),
        "lower_spec": spec.as_ref().map(|sp| spec_json(labels, sp)),
        "chi0": chi0.map(num),
        "margin": num(ctx.margin(&lambda)),
        "box_margin": num(ctx.box_margin(&lambda)?),
        "in_lambda_bar": ctx.in_lambda_bar(&lambda),
        "in_lambda": ctx.in_lambda(&lambda)?,
        "in_lambda_underline": chi0.map(|c| c < 1.0),
        "tie_tolerance": repute::game::TIE_TOL,
        "grid": grid,
        "iteration": iteration,
    });
    let name = format!("{}.json", args.out);
    run.artifact(&name, &scenario_hash(s), &claims, result)?;
    println!("wrote {name}");
    let ok = claims.iter().all(|c| c.passed);
    run.finish(&name)?;
    Ok(ok)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: ProfileSource,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// `prior`, `agent:<i>`, `strategic:<state>` or `commitment:<action>`.
    #[arg(long, default_value = "prior")]
    pub true_type: String,
    /// Commitment action to track beliefs against.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub theta_star: Option<String>,
    /// Upcrossing interval `a,b` for the `χ` path.
    #[arg(long)]
    pub band: Option<String>,
    /// Prediction distance counted as a miss.
    #[arg(long, default_value_t = 0.1)]
    pub far_eps: f64,
    /// Replications written to the trace CSV.
    #[arg(long, default_value_t = 10)]
    pub trace_reps: usize,
    /// Expected discounted payoff to check.
    #[arg(long)]
    pub expect_payoff: Option<f64>,
    #[arg(long, default_value = "traces.csv")]
    pub out: String,
}

pub fn simulate_cmd(g: &Globals, args: &SimulateArgs) -> anyhow::Result<bool> {
    let (loaded, profile) = args.source.load()?;
    let s = &loaded.scenario;
    let th = match (&args.theta_star, &loaded.eq) {
        (None, None) => None,
        (flag, _) => Some(input::theta_star(&loaded, flag.as_deref())?),
    };
    let tt = input::true_type(s, &args.true_type, th)?;
    let delta = args.delta.unwrap_or(s.delta);
    let alpha = match (&args.alpha, &tt) {
        (Some(a), _) => Some(input::alpha(s, a, th)?),
        (None, TrueType::Commitment(a)) => Some(a.clone()),
        _ => None,
    };
    let tracking = match &alpha {
        Some(a) => {
            let spec = th.and_then(|t| RegionContext::new(s, t, a).ok()).and_then(|c| c.lower_spec().ok());
            Some(Tracking {
                alpha: a.clone(),
                spec,
                band: args.band.as_deref().map(input::band).transpose()?,
                far_eps: args.far_eps,
            })
        }
        None => None,
    };
    let mut cfg = SimConfig::new(delta, args.horizon, args.reps, g.seed, tt);
    if let Some(t) = &tracking {
        cfg = cfg.tracking(t.clone());
    }
    let traces = simulate(s, &profile, &cfg)?;
    let mut rec_cfg = cfg.clone().recording();
    rec_cfg.replications = args.trace_reps.min(args.reps);
    let recorded = simulate(s, &profile, &rec_cfg)?;

    let a1 = &s.game.actions1;
    let a2 = &s.game.actions2;
    let has_spec = tracking.as_ref().is_some_and(|t| t.spec.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rep", "t", "a1", "a2", "u1", "chi", "kl"])?;
    for tr in &recorded {
        for p in &tr.periods {
            let chi = if has_spec { p.chi.to_string() } else { String::new() };
            let kl = if tracking.is_some() { p.kl.to_string() } else { String::new() };
            w.write_record([
                tr.rep.to_string(),
                p.t.to_string(),
                a1[p.a1].clone(),
                a2[p.a2].clone(),
                p.u1.to_string(),
                chi,
                kl,
            ])?;
        }
    }
    let csv_text = String::from_utf8(w.into_inner()?)?;

    let mut run = g.run(
        "simulate",
        json!({ "delta": delta, "horizon": args.horizon, "reps": args.reps, "true_type": args.true_type,
                "alpha": args.alpha, "theta_star": args.theta_star, "band": args.band,
                "far_eps": args.far_eps, "trace_reps": args.trace_reps, "expect_payoff": args.expect_payoff }),
    );
    run.scenario_path = Some(loaded.path.clone());
    run.write(&args.out, &csv_text)?;

    let remainder = traces.iter().map(|t| t.remainder).fold(0.0, f64::max);
    let n = traces.len() as f64;
    let mean_payoff = traces.iter().map(|t| t.discounted_payoff).sum::<f64>() / n;
    let sd = (traces.iter().map(|t| (t.discounted_payoff - mean_payoff).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let mut claims = Vec::new();
    if let Some(x) = args.expect_payoff {
        claims.push(Claim::near("discounted_payoff", mean_payoff, x, remainder + 3.0 * sd / n.sqrt() + 1e-9));
    }
    if tracking.is_some() {
        let v: usize = traces.iter().map(|t| t.pinsker_violations).sum();
        claims.push(Claim::at_most("pinsker_violations", v as f64, 0.0, 0.0));
    }
    let freq: serde_json::Map<String, Value> = a1
        .iter()
        .enumerate()
        .map(|(a, l)| (l.clone(), estimate(traces.iter().map(|t| t.discounted_frequency[a]))))
        .collect();
    let result = json!({
        "traces_csv": args.out,
        "replications": traces.len(),
        "discounted_payoff": estimate(traces.iter().map(|t| t.discounted_payoff)),
        "truncation_remainder": num(remainder),
        "discounted_frequency": freq,
        "off_path_traces": traces.iter().filter(|t| t.off_path_at.is_some()).count(),
        "tracking": tracking.as_ref().map(|t| json!({
            "alpha": action_map(a1, &t.alpha),
            "spec": t.spec.as_ref().map(|sp| spec_json(&s.game.states, sp)),
            "kl_sum": estimate(traces.iter().map(|t| t.kl_sum)),
            "far_periods": estimate(traces.iter().map(|t| t.far_periods as f64)),
            "upcrossings": estimate(traces.iter().map(|t| t.upcrossings as f64)),
            "no_upcrossing": estimate(traces.iter().map(|t| f64::from(u8::from(t.upcrossings == 0)))),
        })),
    });
    let name = json_beside(&args.out);
    run.artifact(&name, &scenario_hash(s), &claims, result)?;
    println!("wrote {} and {name}", args.out);
    let ok = claims.iter().all(|c| c.passed);
    run.finish(&name)?;
    Ok(ok)
}

/// `traces.csv` → `traces.json`.
fn json_beside(path: &str) -> String {
    let p = std::path::Path::new(path);
    p.with_extension("json").display().to_string()
}

#[derive(Args, Debug)]
pub struct DeviationArgs {
    #[command(flatten)]
    pub source: ProfileSource,
    #[arg(long)]
    pub theta_star: Option<String>,
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Band level; defaults to the prior statistic.
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Plan entries written out.
    #[arg(long, default_value_t = 10_000)]
    pub max_entries: usize,
    #[arg(long, default_value = "plan.json")]
    pub out: String,
}

pub fn deviation(g: &Globals, args: &DeviationArgs) -> anyhow::Result<bool> {
    let (loaded, profile) = args.source.load()?;
    let s = &loaded.scenario;
    let th = input::theta_star(&loaded, args.theta_star.as_deref())?;
    let alpha = input::alpha(s, &args.alpha, Some(th))?;
    let ctx = RegionContext::new(s, th, &alpha)?;
    let base = ctx.lower_spec()?;
    let chi = args.chi.unwrap_or_else(|| chi_statistic(&ctx.prior_lambda, &base));
    let spec = base.with_chi(chi);
    let table = survival_probabilities(s, &profile, &alpha, &spec, args.epsilon, args.horizon)?;
    let plan = construct_deviation(&table)?;
    let delta = args.delta.unwrap_or(s.delta);
    let report = verify_deviation(
        s,
        &profile,
        &plan,
        &table,
        &spec,
        args.epsilon,
        &VerifyConfig { replications: args.reps, seed: g.seed, delta },
    )?;
    let a1 = &s.game.actions1;
    let entries = plan.sorted_entries();
    let listed: Vec<Value> = entries
        .iter()
        .take(args.max_entries)
        .map(|(t, key, e)| {
            json!({
                "t": t,
                "agent_states": key.agent_states,
                "player2_state": key.p2_state,
                "posterior": key.posterior.iter().map(|q| *q as f64 * 1e-12).collect::<Vec<_>>(),
                "allowed": e.allowed.iter().map(|a| &a1[*a]).collect::<Vec<_>>(),
                "probabilities": action_map(a1, &e.probs),
                "dead_end": e.dead_end,
            })
        })
        .collect();
    let claims = vec![
        Claim::at_most("band_violations", report.band_violations as f64, 0.0, 0.0),
        Claim::at_most("mean_far_periods", report.mean_far_periods, report.period_budget as f64, 0.0),
    ];
    let result = json!({
        "theta_star": s.game.states[th],
        "alpha": action_map(a1, &alpha),
        "spec": spec_json(&s.game.states, &spec),
        "epsilon": args.epsilon,
        "band": num(table.bound),
        "root_survival": num(table.root()),
        "tree_nodes": table.num_nodes(),
        "approximate": plan.approximate,
        "dead_ends": plan.dead_ends,
        "entries_total": entries.len(),
        "entries": listed,
        "verification": {
            "replications": report.replications,
            "band_violations": report.band_violations,
            "first_violation": report.first_violation,
            "frequency_within_eps": num(report.frequency_within_eps),
            "mean_far_periods": num(report.mean_far_periods),
            "period_budget": report.period_budget,
            "doob_floor": num(report.doob_floor),
            "off_path_traces": report.off_path_traces,
        },
    });
    let mut run = g.run(
        "deviation",
        json!({ "theta_star": s.game.states[th], "alpha": args.alpha, "epsilon": args.epsilon, "chi": chi,
                "horizon": args.horizon, "reps": args.reps, "delta": delta, "max_entries": args.max_entries }),
    );
    run.scenario_path = Some(loaded.path.clone());
    run.artifact(&args.out, &scenario_hash(s), &claims, result)?;
    println!("wrote {}", args.out);
    let ok = claims.iter().all(|c| c.passed);
    run.finish(&args.out)?;
    Ok(ok)
}

#[derive(Subcommand, Debug)]
pub enum EquilibriumCmd {
    /// Low-payoff equilibrium for a pure commitment action.
    Build {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        theta_star: String,
        #[arg(long)]
        a1_star: String,
        /// Discount factor for the reported payoff bounds.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value = "eq.json")]
        out: String,
    },
    /// Audit player 2's best replies and the patient type's one-shot deviations.
    Check {
        #[arg(long)]
        eq: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value = "check.json")]
        out: String,
    },
    /// The effort/product example with commitment action `(1-ε)H + εI`.
    Example {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value = "eq.json")]
        out: String,
    },
}

fn write_eq(g: &Globals, eq: &EquilibriumMachine, out: &str, params: Value, notes: Value, source: Option<String>) -> anyhow::Result<()> {
    let mut run = g.run("equilibrium", params);
    run.scenario_path = source;
    let mut file = EquilibriumFile::from_machine(eq);
    file.notes = Some(json!({
        "manifest": Run::manifest_name(out),
        "scenario_hash": scenario_hash(&eq.scenario),
        "construction": notes,
    }));
    run.write_json(out, &file)?;
    println!("wrote {out}");
    run.finish(out)
}

pub fn equilibrium(g: &Globals, cmd: &EquilibriumCmd) -> anyhow::Result<bool> {
    match cmd {
        EquilibriumCmd::Build { scenario, theta_star, a1_star, delta, out } => {
            let loaded = Source { scenario: Some(scenario.clone()), eq: None }.load()?;
            let s = &loaded.scenario;
            let th = input::state(s, theta_star)?;
            let a1 = s.game.action1_index(a1_star)?;
            let (eq, p) = build_low_payoff_equilibrium(s, th, a1)?;
            let delta = delta.unwrap_or(s.delta);
            let notes = json!({
                "params": p,
                "delta": delta,
                "deviation_payoff_bound": p.t1.map(|t1| num(deviation_payoff_bound(p.kbar, t1, delta))),
                "cycle_payoff": num(cycle_payoff(s.game.num_actions1(), p.k_star, delta)),
            });
            write_eq(
                g,
                &eq,
                out,
                json!({ "sub": "build", "theta_star": theta_star, "a1_star": a1_star, "delta": delta }),
                notes,
                Some(loaded.path),
            )?;
            Ok(true)
        }
        EquilibriumCmd::Example { eps, out } => {
            let eq = motivating_example_profile(*eps)?;
            write_eq(g, &eq, out, json!({ "sub": "example", "eps": eps }), json!({ "eps": eps }), None)?;
            Ok(true)
        }
        EquilibriumCmd::Check { eq, delta, horizon, tol, out } => {
            let loaded = Source { scenario: None, eq: Some(eq.clone()) }.load()?;
            let machine = loaded.eq.as_ref().expect("equilibrium source");
            let delta = delta.unwrap_or(loaded.scenario.delta);
            let rep = check_incentives(machine, delta, *horizon, *tol)?;
            let claims = vec![
                Claim::at_most("player2_best_reply_gap", rep.player2_max_violation, 0.0, *tol),
                Claim::at_most("one_shot_deviation_gain", rep.theta_star_max_gain, 0.0, *tol),
            ];
            let mut run = g.run("equilibrium", json!({ "sub": "check", "delta": delta, "horizon": horizon, "tol": tol }));
            run.scenario_path = Some(loaded.path.clone());
            let result = json!({
                "name": machine.name,
                "theta_star": loaded.scenario.game.states[machine.theta_star],
                "nodes": rep.nodes,
                "closed": rep.closed,
                "truncation_remainder": num(rep.truncation_remainder),
                "unresolved_off_path": rep.unresolved_off_path,
                "player2_worst": rep.player2_worst,
                "player2_first": rep.player2_first,
                "theta_star_worst": rep.theta_star_worst,
            });
            run.artifact(out, &scenario_hash(&loaded.scenario), &claims, result)?;
            println!("wrote {out}");
            let ok = claims.iter().all(|c| c.passed);
            run.finish(out)?;
            Ok(ok)
        }
    }
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub theta_star: Option<String>,
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value = "classify.json")]
    pub out: String,
}

pub fn classify(g: &Globals, args: &ClassifyArgs) -> anyhow::Result<bool> {
    let loaded: Loaded = args.source.load()?;
    let s: &ReputationScenario = &loaded.scenario;
    let th = input::theta_star(&loaded, args.theta_star.as_deref())?;
    let alpha = input::alpha(s, &args.alpha, Some(th))?;
    let c = classify_scenario(s, th, &alpha)?;
    let (verdict, kind) = match c.verdict {
        Verdict::Guarantee(_) => ("guarantee", if c.mixed { "mixed" } else { "pure" }),
        Verdict::LowPayoff(_) => ("low-payoff", if c.mixed { "mixed" } else { "pure" }),
        Verdict::Uncovered => ("uncovered", if c.mixed { "mixed" } else { "pure" }),
    };
    let labels = &s.game.states;
    let v = s.commitment_payoff(th, &alpha)?;
    let bound = if c.chi0.is_finite() { Some(imperfect_monitoring_bound(s, th, &alpha, c.chi0)?) } else { None };
    let result = json!({
        "theta_star": labels[th],
        "alpha": action_map(&s.game.actions1, &alpha),
        "verdict": verdict,
        "action_kind": kind,
        "lambda": labelled(labels, &c.lambda),
        "in_lambda": c.in_lambda,
        "box_margin": num(c.lambda_margin),
        "spec": spec_json(labels, &c.spec),
        "chi0": num(c.chi0),
        "in_lambda_underline": c.in_lambda_underline,
        "best_replies_phi": c.br_phi.iter().map(|a| &s.game.actions2[*a]).collect::<Vec<_>>(),
        "in_hull_of_other_commitments": c.in_hull_of_others,
        "commitment_payoff": num(v),
        "payoff_bound": bound.map(|b| json!({ "value": num(b.value), "meaningful": b.meaningful })),
        "tie_tolerance": repute::game::TIE_TOL,
    });
    let mut run = g.run("classify", json!({ "theta_star": labels[th], "alpha": args.alpha }));
    run.scenario_path = Some(loaded.path.clone());
    run.artifact(&args.out, &scenario_hash(s), &[], result)?;
    println!("{verdict} ({kind}); wrote {}", args.out);
    run.finish(&args.out)?;
    Ok(true)
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Artifacts from the other commands, all for one scenario.
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "report.json")]
    pub out: String,
}

pub fn report(g: &Globals, args: &ReportArgs) -> anyhow::Result<bool> {
    let mut hash: Option<String> = None;
    let mut parts = Vec::new();
    let mut claims = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(repute::Error::from)?;
        let (Some(h), Some(cs)) = (v.get("scenario_hash").and_then(Value::as_str), v.get("claims").and_then(Value::as_array))
        else {
            return Err(usage(format!("{} is not an analysis artifact", path.display())));
        };
        match &hash {
            Some(prev) if prev != h => {
                return Err(usage(format!("scenario hash mismatch: {} has {h}, expected {prev}", path.display())))
            }
            _ => hash = Some(h.to_string()),
        }
        for c in cs {
            let mut c = c.clone();
            c["source"] = json!(path.display().to_string());
            claims.push(c);
        }
        parts.push(json!({
            "path": path.display().to_string(),
            "command": v.get("command"),
            "manifest": v.get("manifest"),
            "result": v.get("result"),
        }));
    }
    let passed = claims.iter().all(|c| c.get("passed").and_then(Value::as_bool) == Some(true));
    let by_claim: BTreeMap<String, bool> = claims
        .iter()
        .map(|c| {
            (
                format!("{}:{}", c["source"].as_str().unwrap_or(""), c["name"].as_str().unwrap_or("")),
                c["passed"].as_bool() == Some(true),
            )
        })
        .collect();
    let mut run = g.run("report", json!({ "inputs": args.inputs }));
    let body = json!({
        "command": "report",
        "manifest": Run::manifest_name(&args.out),
        "scenario_hash": hash,
        "passed": passed,
        "summary": by_claim,
        "claims": claims,
        "inputs": parts,
    });
    run.write_json(&args.out, &body)?;
    for (k, ok) in &by_claim {
        println!("{} {k}", if *ok { "pass" } else { "FAIL" });
    }
    run.finish(&args.out)?;
    Ok(passed)
}
