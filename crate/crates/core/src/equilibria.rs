//! Explicit equilibria in which a patient type earns less than his
//! commitment payoff, with numerical incentive audits.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    bayes_update, myopic_scores, player2_action, AgentKind, Machine, NodeKey, PlayState,
    Player2Strategy, Strategy, StrategyProfile,
};
use crate::error::{Error, Result};
use crate::game::{
    best_reply_set, CommitmentStructure, MixedAction, PayoffTensor, ReputationScenario, StageGame,
    TIE_TOL,
};
use crate::geometry::RegionContext;
use crate::samples;

/// A complete profile for a scenario, with the patient type it concerns.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumMachine {
    pub name: String,
    pub theta_star: usize,
    pub scenario: ReputationScenario,
    pub profile: StrategyProfile,
}

/// The low-payoff equilibrium of the effort/product game with commitment
/// action `(1-ε)H + εI`.
pub fn motivating_example_profile(eps: f64) -> Result<EquilibriumMachine> {
    use samples::{H, I, L, M1, M2, THETA1, THETA2, THETA_STAR};
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Precondition(format!("ε = {eps} must lie in (0, 1/2)")));
    }
    let s = samples::perturbed(eps);
    let alpha = samples::perturbed_h(eps);
    let side = |first: usize| {
        let mut b = Machine::builder(3, 3);
        let p0 = b.state("first", samples::pure(first));
        let on = b.state("mimic", alpha.clone());
        let off = b.state("low", samples::pure(L));
        b.on(p0, Some(H), None, on).on(p0, Some(I), None, on).on(p0, Some(L), None, off);
        b.on(on, Some(L), None, off);
        Strategy::Machine(b.build(p0).expect("machine"))
    };
    let mut b = Machine::builder(3, 3);
    let half = MixedAction::new(vec![0.0, 0.5, 0.5])?;
    let first = if s.prior.strategic(THETA1) >= s.prior.strategic(THETA2) { M1 } else { M2 };
    let s0 = b.state("open", MixedAction::pure(3, first));
    let s1 = b.state("m1", MixedAction::pure(3, M1));
    let s2 = b.state("m2", MixedAction::pure(3, M2));
    let sm = b.state("split", half);
    b.on(s0, Some(H), None, s1).on(s0, Some(I), None, s2).on(s0, Some(L), None, sm);
    b.on(s1, Some(L), None, sm).on(s2, Some(L), None, sm);
    let p2 = b.build(s0)?;
    let profile = StrategyProfile::new(
        &s,
        vec![
            vec![(1.0, Strategy::Stationary(samples::pure(L)))],
            vec![(1.0, side(H))],
            vec![(1.0, side(I))],
        ],
        Player2Strategy::Fixed(Strategy::Machine(p2)),
    )?
    .with_off_path_belief(&[
        (THETA1, AgentKind::Strategic { component: 0 }, 0.5),
        (THETA2, AgentKind::Strategic { component: 0 }, 0.5),
    ])?;
    Ok(EquilibriumMachine {
        name: "motivating-example".into(),
        theta_star: THETA_STAR,
        scenario: s,
        profile,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparatingPair {
    pub lambda_prime: Vec<f64>,
    pub a2_prime: usize,
    /// 1 when `a2*` is the unique best reply under `φ`, 2 otherwise.
    pub case: u8,
    /// `Σ λ'_θ (u2(θ,a1*,a2') − u2(θ,a1*,a2*))`
    pub b1: f64,
    /// `b1` plus the same difference under `φ`.
    pub b2: f64,
}

/// Either the pair or the reason none is returned.
#[derive(Debug, Clone, Serialize)]
pub enum PairSearch {
    Found(SeparatingPair),
    None { reason: String, lambda_margin: f64 },
}

/// Finds `(λ', a2')` with `0 ≤ λ' ≤ λ(μ,a1*)`, `λ'_θ* = 0` and both
/// separation inequalities strict.
pub fn find_separating_pair(s: &ReputationScenario, theta_star: usize, a1_star: usize) -> Result<PairSearch> {
    let g = &s.game;
    let alpha = MixedAction::pure(g.num_actions1(), a1_star);
    let ctx = RegionContext::new(s, theta_star, &alpha)?;
    let lambda = ctx.prior_lambda.clone();
    let margin = ctx.box_margin(&lambda)?;
    let a2s = ctx.a2_star;
    if margin >= -TIE_TOL {
        return Ok(PairSearch::None {
            reason: "prior likelihood ratio lies in the closure of the region".into(),
            lambda_margin: margin,
        });
    }
    let br_phi = best_reply_set(&g.u2, &ctx.phi, &alpha)?;
    if br_phi.len() != 1 {
        return Ok(PairSearch::None {
            reason: "best reply under the commitment-conditional belief is not unique".into(),
            lambda_margin: margin,
        });
    }
    let diff = |st: usize, a2: usize| g.u2.at(st, a1_star, a2) - g.u2.at(st, a1_star, a2s);
    let base = |a2: usize| ctx.score(&vec![0.0; lambda.len()], a2) - ctx.score(&vec![0.0; lambda.len()], a2s);
    let b1_of = |lp: &[f64], a2: usize| lp.iter().enumerate().map(|(st, l)| l * diff(st, a2)).sum::<f64>();

    let (lambda_prime, a2_prime, case) = if br_phi[0] == a2s {
        let m = lambda.len();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for a2 in (0..g.num_actions2()).filter(|a| *a != a2s) {
            for mask in 0u32..(1 << m) {
                let v: Vec<f64> = (0..m)
                    .map(|i| if i != theta_star && mask >> i & 1 == 1 { lambda[i] } else { 0.0 })
                    .collect();
                let b2 = base(a2) + b1_of(&v, a2);
                if best.as_ref().map_or(true, |(b, _, _)| b2 > *b + TIE_TOL) {
                    best = Some((b2, a2, v));
                }
            }
        }
        let (_, a2, v) = best.expect("at least one competitor");
        (v, a2, 1)
    } else {
        let a2pp = br_phi[0];
        let Some(theta) = (0..lambda.len()).find(|st| lambda[*st] > 0.0 && diff(*st, a2pp) > 0.0) else {
            return Ok(PairSearch::None {
                reason: "no state with positive weight favours the conditional best reply".into(),
                lambda_margin: margin,
            });
        };
        let mut v = vec![0.0; lambda.len()];
        v[theta] = lambda[theta];
        (v, a2pp, 2)
    };
    let b1 = b1_of(&lambda_prime, a2_prime);
    let b2 = base(a2_prime) + b1;
    if !(b1 > TIE_TOL && b2 > TIE_TOL) {
        return Ok(PairSearch::None {
            reason: format!("separation fails numerically (b1 = {b1}, b2 = {b2})"),
            lambda_margin: margin,
        });
    }
    Ok(PairSearch::Found(SeparatingPair { lambda_prime, a2_prime, case, b1, b2 }))
}

/// `⌈ln(2κ/η)/ln((1−η/2)/(1−η))⌉`, at least one.
pub fn kbar(kappa: f64, eta: f64) -> u32 {
    let r = ((2.0 * kappa / eta).ln() / ((1.0 - eta / 2.0) / (1.0 - eta)).ln()).ceil();
    r.max(1.0) as u32
}

/// `⌈ln(β̄/β̲)/ln((1−η/2)/(1−η))⌉`, at least one.
pub fn t1_periods(beta_bar: f64, beta_under: f64, eta: f64) -> u32 {
    if !(beta_bar > 0.0) {
        return 1;
    }
    let r = ((beta_bar / beta_under).ln() / ((1.0 - eta / 2.0) / (1.0 - eta)).ln()).ceil();
    r.max(1.0) as u32
}

/// Upper bound on the patient type's continuation payoff after his first
/// deviation: `T1` free periods, then cycles of `k̄` good periods out of
/// `k̄ + 1`.
pub fn deviation_payoff_bound(kbar: u32, t1: u32, delta: f64) -> f64 {
    let dt = delta.powi(t1 as i32);
    (1.0 - dt) + dt * (1.0 - delta.powi(kbar as i32)) / (1.0 - delta.powi(kbar as i32 + 1))
}

/// Discounted value of the rotation from its first cycle period on, scaled
/// to period 0: `δ^n (1 − δ^k*)/(1 − δ^(k*+1))`.
pub fn cycle_payoff(opening: usize, k_star: u32, delta: f64) -> f64 {
    delta.powi(opening as i32) * (1.0 - delta.powi(k_star as i32)) / (1.0 - delta.powi(k_star as i32 + 1))
}

/// `(1−η/2)a1* + (η/2)α̃` where `α̃` is `α` conditioned away from `a1*`.
pub fn alpha_hat(alpha: &MixedAction, a1_star: usize, eta: f64) -> Result<MixedAction> {
    let rest = 1.0 - alpha.prob(a1_star);
    if !(rest > 0.0) {
        return Err(Error::Precondition("mixed action puts all weight on a1*".into()));
    }
    let w = (0..alpha.len())
        .map(|a| {
            if a == a1_star {
                1.0 - eta / 2.0
            } else {
                eta / 2.0 * alpha.prob(a) / rest
            }
        })
        .collect();
    MixedAction::from_weights(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionParams {
    pub a1_star: usize,
    pub a2_star: usize,
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub a2_prime: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub kappa: f64,
    pub kbar: u32,
    pub k_star: u32,
    pub beta_bar: Option<f64>,
    pub beta_under: Option<f64>,
    pub t1: Option<u32>,
    /// `(α, α̂(α))` per mixed commitment action.
    pub alpha_hat: Vec<(MixedAction, MixedAction)>,
    pub a1_prime: usize,
    pub off_cycle_action: usize,
    /// Left side of the `ε`-perturbed separation inequality.
    pub b3_margin: f64,
    /// Margin of `a2'` over `a2*` against `λ'` for each `α̂`.
    pub b7_margins: Vec<f64>,
}

/// Largest `2^-j`, `j ≥ 1`, satisfying `pred`.
fn dyadic(pred: impl Fn(f64) -> bool) -> Option<f64> {
    (1..=60).map(|j| 0.5f64.powi(j)).find(|x| pred(*x))
}

/// Builds the low-payoff equilibrium for pure `a1*` when the prior
/// likelihood ratio is outside the closure of the region.
pub fn build_low_payoff_equilibrium(
    s: &ReputationScenario,
    theta_star: usize,
    a1_star: usize,
) -> Result<(EquilibriumMachine, ConstructionParams)> {
    let g = &s.game;
    let (n1, n2) = (g.num_actions1(), g.num_actions2());
    let pure_star = MixedAction::pure(n1, a1_star);
    let pair = match find_separating_pair(s, theta_star, a1_star)? {
        PairSearch::Found(p) => p,
        PairSearch::None { reason, .. } => return Err(Error::Precondition(reason)),
    };
    let ctx = RegionContext::new(s, theta_star, &pure_star)?;
    let a2s = ctx.a2_star;
    let lambda = ctx.prior_lambda.clone();
    let lp = pair.lambda_prime.clone();
    let a2p = pair.a2_prime;

    let others: Vec<MixedAction> = s
        .commitment_actions()
        .into_iter()
        .filter(|a| !a.approx_eq(&pure_star, 1e-9))
        .collect();
    let mixed: Vec<MixedAction> = others.iter().filter(|a| a.as_pure().is_none()).cloned().collect();
    let k = mixed.len();

    let base = pair.b2 - pair.b1;
    let epsilon = dyadic(|e| base + (1.0 - e) * pair.b1 > 0.0)
        .ok_or_else(|| Error::Precondition("no dyadic ε satisfies the perturbed separation".into()))?;
    let top = others.iter().map(|a| a.prob(a1_star)).fold(f64::NEG_INFINITY, f64::max);
    let eta = dyadic(|e| top < 1.0 - e).unwrap_or(0.5);
    let kappa = if k == 0 {
        1.0
    } else {
        1.0 - mixed.iter().map(|a| a.prob(a1_star)).fold(f64::INFINITY, f64::min)
    };
    let kb = kbar(kappa, eta);
    let k_star = 2 * kb;

    let score_diff = |st: usize, a: &MixedAction| g.u2.against(st, a, a2p) - g.u2.against(st, a, a2s);
    let mut hats = Vec::new();
    let mut b7 = Vec::new();
    let mut beta_bars = Vec::new();
    let mut beta_unders = Vec::new();
    let eps_w = if k == 0 { 0.0 } else { epsilon };
    for a in &mixed {
        let hat = alpha_hat(a, a1_star, eta)?;
        let d1: f64 = lp.iter().enumerate().map(|(st, l)| l * score_diff(st, &hat)).sum();
        let cond = RegionContext::new(s, theta_star, a).map(|c| c.phi.clone()).or_else(|_| {
            crate::geometry::prior_likelihood(s, a).map(|(_, c)| c.phi)
        })?;
        let d0 = g.u2.expected(&cond, a, a2p)? - g.u2.expected(&cond, a, a2s)?;
        b7.push(d1);
        beta_bars.push(if d1 > 0.0 { (-d0 / d1).max(0.0) } else { f64::INFINITY });
        let follow: f64 = (0..lambda.len())
            .filter(|st| *st != theta_star && lambda[*st] > 0.0)
            .map(|st| s.prior.strategic(st) * eps_w / k as f64 * lp[st] / lambda[st])
            .sum();
        beta_unders.push(follow / s.commitment_mass(a));
        hats.push((a.clone(), hat));
    }
    let (beta_bar, beta_under, t1) = if k == 0 {
        (None, None, None)
    } else {
        let bb = 2.0 * beta_bars.iter().cloned().fold(0.0, f64::max);
        let bu = beta_unders.iter().cloned().fold(f64::INFINITY, f64::min);
        (Some(bb), Some(bu), Some(t1_periods(bb, bu, eta)))
    };

    let a1_prime = (0..n1).find(|a| *a != a1_star).ok_or_else(|| Error::Structure("player 1 needs two actions".into()))?;
    let off_cycle = a1_prime;
    // Rotation: every action once in list order, then k* plays of a1* and
    // one off-cycle action.
    let schedule: Vec<usize> = (0..n1).chain(std::iter::repeat(a1_star).take(k_star as usize)).chain([off_cycle]).collect();
    let cycle_start = n1;
    let next_pos = |p: usize| if p + 1 < schedule.len() { p + 1 } else { cycle_start };
    let rotation = {
        let mut b = Machine::builder(n1, n2);
        for (p, a) in schedule.iter().enumerate() {
            b.state(&format!("r{p}"), MixedAction::pure(n1, *a));
        }
        for p in 0..schedule.len() {
            b.on(p, None, None, next_pos(p));
        }
        Strategy::Machine(b.build(0)?)
    };
    let follower = |alpha: &MixedAction, hat: &MixedAction| -> Result<Strategy> {
        let mut b = Machine::builder(n1, n2);
        for p in 0..schedule.len() {
            b.state(&format!("r{p}"), alpha.clone());
        }
        let off = b.state("off", hat.clone());
        for (p, a) in schedule.iter().enumerate() {
            b.on(p, None, None, off);
            b.on(p, Some(*a), None, next_pos(p));
        }
        Ok(Strategy::Machine(b.build(0)?))
    };

    let mut strategic = Vec::with_capacity(g.num_states());
    for st in 0..g.num_states() {
        if st == theta_star {
            strategic.push(vec![(1.0, rotation.clone())]);
            continue;
        }
        if !(lambda[st] > 0.0) {
            strategic.push(vec![(1.0, Strategy::Stationary(MixedAction::pure(n1, a1_prime)))]);
            continue;
        }
        let share = lp[st] / lambda[st];
        let mut comps = vec![
            (1.0 - share, Strategy::Stationary(MixedAction::pure(n1, a1_prime))),
            ((1.0 - eps_w) * share, Strategy::Stationary(pure_star.clone())),
        ];
        for (a, hat) in &hats {
            comps.push((eps_w / k as f64 * share, follower(a, hat)?));
        }
        strategic.push(comps);
    }

    let u1 = PayoffTensor::from_fn(g.num_states(), n1, n2, |st, a1, a2| {
        f64::from(u8::from(st == theta_star && a1 == a1_star && a2 == a2s))
    });
    let game = StageGame::new(g.states.clone(), g.actions1.clone(), g.actions2.clone(), u1, g.u2.clone())?;
    let commitments: CommitmentStructure = s.commitments.clone();
    let scenario = ReputationScenario::new(game, commitments, s.prior.clone(), s.delta)?;
    let profile = StrategyProfile::new(&scenario, strategic, Player2Strategy::Myopic)?;

    let params = ConstructionParams {
        a1_star,
        a2_star: a2s,
        lambda,
        lambda_prime: lp,
        a2_prime: a2p,
        epsilon,
        eta,
        kappa,
        kbar: kb,
        k_star,
        beta_bar,
        beta_under,
        t1,
        alpha_hat: hats,
        a1_prime,
        off_cycle_action: off_cycle,
        b3_margin: base + (1.0 - epsilon) * pair.b1,
        b7_margins: b7,
    };
    let eq = EquilibriumMachine { name: "low-payoff".into(), theta_star, scenario, profile };
    Ok((eq, params))
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub value: f64,
    pub depth: usize,
    pub history: Vec<(usize, usize)>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncentiveReport {
    pub nodes: usize,
    /// Every reachable collapsed state was expanded.
    pub closed: bool,
    pub player2_max_violation: f64,
    pub player2_worst: Option<Violation>,
    /// Shallowest state where player 2 misses a best reply by more than `tol`.
    pub player2_first: Option<Violation>,
    pub theta_star_max_gain: f64,
    pub theta_star_worst: Option<Violation>,
    /// Bound on value error from cutting the graph at the horizon.
    pub truncation_remainder: f64,
    /// Observations with no belief defined.
    pub unresolved_off_path: usize,
    pub tol: f64,
}

impl IncentiveReport {
    pub fn passed(&self) -> bool {
        self.player2_max_violation <= self.tol && self.theta_star_max_gain <= self.tol
    }
}

/// Budget on collapsed states explored by the incentive audit.
pub const MAX_AUDIT_NODES: usize = 200_000;

struct AuditNode {
    state: PlayState,
    depth: usize,
    parent: Option<(usize, usize, usize)>,
    sigma2: MixedAction,
    /// `children[a1]` over the support of `sigma2`; `None` marks an unknown
    /// continuation.
    children: Vec<Vec<(usize, f64, Option<usize>)>>,
}

/// Audits player 2's myopic incentives and the patient type's one-shot
/// deviations over the collapsed state graph.
pub fn check_incentives(eq: &EquilibriumMachine, delta: f64, horizon: usize, tol: f64) -> Result<IncentiveReport> {
    let s = &eq.scenario;
    let prof = &eq.profile;
    let n1 = prof.n1;
    let mut nodes: Vec<AuditNode> = Vec::new();
    let mut index: HashMap<NodeKey, usize> = HashMap::new();
    let root = PlayState::initial(prof);
    index.insert(root.key(), 0);
    nodes.push(AuditNode { sigma2: player2_action(s, prof, &root), state: root, depth: 0, parent: None, children: Vec::new() });
    let mut queue = VecDeque::from([0usize]);
    let mut closed = true;
    let mut unresolved = 0;
    while let Some(i) = queue.pop_front() {
        if nodes[i].depth >= horizon {
            closed = false;
            continue;
        }
        let mut children = vec![Vec::new(); n1];
        let sigma2 = nodes[i].sigma2.clone();
        for (a1, slot) in children.iter_mut().enumerate() {
            for (a2, p) in sigma2.iter() {
                match bayes_update(prof, &nodes[i].state, a1, a2) {
                    Ok(child) => {
                        let key = child.key();
                        let id = match index.get(&key) {
                            Some(id) => *id,
                            None => {
                                let id = nodes.len();
                                if id >= MAX_AUDIT_NODES {
                                    return Err(Error::Budget(format!(
                                        "incentive audit exceeds {MAX_AUDIT_NODES} collapsed states"
                                    )));
                                }
                                index.insert(key, id);
                                nodes.push(AuditNode {
                                    sigma2: player2_action(s, prof, &child),
                                    state: child,
                                    depth: nodes[i].depth + 1,
                                    parent: Some((i, a1, a2)),
                                    children: Vec::new(),
                                });
                                queue.push_back(id);
                                id
                            }
                        };
                        slot.push((a2, p, Some(id)));
                    }
                    Err(Error::OffPath { .. }) => {
                        unresolved += 1;
                        slot.push((a2, p, None));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        nodes[i].children = children;
    }

    let history = |mut i: usize| {
        let mut h = Vec::new();
        while let Some((p, a1, a2)) = nodes[i].parent {
            h.push((a1, a2));
            i = p;
        }
        h.reverse();
        h
    };

    // Player 2.
    let p2: Vec<(f64, usize)> = nodes
        .par_iter()
        .map(|n| {
            let scores = myopic_scores(s, prof, &n.state);
            let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let worst_played = n.sigma2.iter().map(|(a, _)| scores[a]).fold(f64::INFINITY, f64::min);
            let weakest = n.sigma2.iter().min_by(|x, y| scores[x.0].total_cmp(&scores[y.0])).map_or(0, |x| x.0);
            (best - worst_played, weakest)
        })
        .collect();
    let (mut p2_max, mut p2_worst, mut p2_first) = (f64::NEG_INFINITY, None, None);
    for (i, (v, a2)) in p2.iter().enumerate() {
        let describe = || Violation {
            value: *v,
            depth: nodes[i].depth,
            history: history(i),
            detail: format!("prescribed {} is not a best reply", s.game.actions2[*a2]),
        };
        if *v > tol && p2_first.is_none() {
            p2_first = Some(describe());
        }
        if *v > p2_max {
            p2_max = *v;
            p2_worst = Some(describe());
        }
    }

    // Patient type: value of following each strategy component, with unknown
    // continuations bracketed by the payoff range.
    let th = eq.theta_star;
    let u = &s.game.u1;
    let (lo, hi) = (u.min(), u.max());
    let range = hi - lo;
    let remainder = if closed { 0.0 } else { delta.powi(horizon as i32) * range };
    let mut gain_max = f64::NEG_INFINITY;
    let mut gain_worst = None;
    for agent in prof.strategic_agents(th) {
        let strat = &prof.agents[agent].strategy;
        let act = |n: &AuditNode| strat.action(n.state.agent_states[agent], n.state.history.as_deref()).clone();
        let q = |n: &AuditNode, a1: usize, v: &[f64], fallback: f64| -> f64 {
            n.children[a1]
                .iter()
                .map(|(a2, p, c)| p * ((1.0 - delta) * u.at(th, a1, *a2) + delta * c.map_or(fallback, |c| v[c])))
                .sum()
        };
        let mut v_lo = vec![lo; nodes.len()];
        let mut v_hi = vec![hi; nodes.len()];
        let sweeps = ((tol * 1e-3 / range.max(1e-300)).ln() / delta.ln()).ceil().max(1.0) as usize;
        for _ in 0..sweeps.min(2_000_000) {
            let step = |v: &[f64], fallback: f64| -> Vec<f64> {
                nodes
                    .par_iter()
                    .map(|n| {
                        if n.children.is_empty() {
                            return fallback;
                        }
                        act(n).iter().map(|(a1, p)| p * q(n, a1, v, fallback)).sum()
                    })
                    .collect()
            };
            let new_lo = step(&v_lo, lo);
            let new_hi = step(&v_hi, hi);
            let change = new_lo
                .iter()
                .zip(&v_lo)
                .chain(new_hi.iter().zip(&v_hi))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            v_lo = new_lo;
            v_hi = new_hi;
            if change < 1e-15 {
                break;
            }
        }
        let depth_cap = if closed { usize::MAX } else { horizon / 2 };
        let gains: Vec<(f64, usize)> = nodes
            .par_iter()
            .map(|n| {
                if n.children.is_empty() || n.depth > depth_cap {
                    return (f64::NEG_INFINITY, 0);
                }
                (0..n1)
                    .map(|a1| (q(n, a1, &v_hi, hi) - v_lo[node_id(&index, n)], a1))
                    .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
            })
            .collect();
        for (i, (g, a1)) in gains.iter().enumerate() {
            if *g > gain_max {
                gain_max = *g;
                gain_worst = Some(Violation {
                    value: *g,
                    depth: nodes[i].depth,
                    history: history(i),
                    detail: format!("deviation to {}", s.game.actions1[*a1]),
                });
            }
        }
    }
    Ok(IncentiveReport {
        nodes: nodes.len(),
        closed,
        player2_max_violation: p2_max,
        player2_worst: p2_worst,
        player2_first: p2_first,
        theta_star_max_gain: gain_max,
        theta_star_worst: gain_worst,
        truncation_remainder: remainder,
        unresolved_off_path: unresolved,
        tol,
    })
}

fn node_id(index: &HashMap<NodeKey, usize>, n: &AuditNode) -> usize {
    index[&n.state.key()]
}
