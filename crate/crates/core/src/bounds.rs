//! Payoff guarantees from reputation: survival of the belief band under the
//! commitment type, the deviation that conditions on it, and the
//! classification of a target commitment action.

use std::collections::HashMap;

use serde::Serialize;

use crate::dynamics::{
    bayes_update, player2_action, predicted_action, simulate_with, LikelihoodView, NodeKey,
    PlayState, SimConfig, StrategyProfile, Tracking, TrueType, MAX_TREE_HORIZON,
};
use crate::error::{Error, Result};
use crate::game::{best_reply_set, MixedAction, ReputationScenario, TIE_TOL};
use crate::geometry::{in_convex_hull, RegionContext, RegionSpec};

/// Budget on collapsed tree nodes across all levels.
pub const MAX_NODES: usize = 4_000_000;

#[derive(Debug, Clone)]
struct Child {
    a1: usize,
    p2: f64,
    node: Option<usize>,
}

/// A collapsed history node at one level of the band tree.
#[derive(Debug, Clone)]
pub struct SurvivalNode {
    pub state: PlayState,
    pub chi: f64,
    pub surv: f64,
    children: Vec<Child>,
}

/// Probability, from each reachable collapsed history, that `χ` stays below
/// the band for the rest of the horizon under the commitment type.
#[derive(Debug, Clone)]
pub struct SurvivalTable {
    pub alpha: MixedAction,
    pub bound: f64,
    pub horizon: usize,
    pub levels: Vec<Vec<SurvivalNode>>,
    index: Vec<HashMap<NodeKey, usize>>,
    /// Some reachable node has player 2 mixing.
    pub player2_mixes: bool,
}

impl SurvivalTable {
    pub fn root(&self) -> f64 {
        self.levels[0][0].surv
    }

    pub fn lookup(&self, ps: &PlayState) -> Option<&SurvivalNode> {
        let level = self.index.get(ps.t)?;
        level.get(&ps.key()).map(|i| &self.levels[ps.t][*i])
    }

    pub fn num_nodes(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

/// Backward induction over the collapsed history tree for the event
/// `{χ_t < χ + ε for all t ≤ T}`.
pub fn survival_probabilities(
    s: &ReputationScenario,
    profile: &StrategyProfile,
    alpha: &MixedAction,
    spec: &RegionSpec,
    eps: f64,
    horizon: usize,
) -> Result<SurvivalTable> {
    let view = LikelihoodView::new(s, profile, alpha)?;
    let bound = spec.chi + eps;
    let root = PlayState::initial(profile);
    let chi0 = view.chi(&root.posterior, spec);
    if chi0 >= bound {
        return Err(Error::Precondition(format!("initial χ = {chi0} is already at or above {bound}")));
    }
    let mut levels = vec![vec![SurvivalNode { state: root.clone(), chi: chi0, surv: 0.0, children: Vec::new() }]];
    let mut index = vec![HashMap::from([(root.key(), 0)])];
    let mut total = 1;
    let mut player2_mixes = false;
    for t in 0..horizon {
        let mut next: Vec<SurvivalNode> = Vec::new();
        let mut next_index: HashMap<NodeKey, usize> = HashMap::new();
        for node in levels[t].iter_mut() {
            let sigma2 = player2_action(s, profile, &node.state);
            player2_mixes |= sigma2.as_pure().is_none();
            for (a1, _) in alpha.iter() {
                for (a2, p2) in sigma2.iter() {
                    let child = bayes_update(profile, &node.state, a1, a2)?;
                    let chi = view.chi(&child.posterior, spec);
                    let slot = if chi < bound {
                        let key = child.key();
                        Some(*next_index.entry(key).or_insert_with(|| {
                            next.push(SurvivalNode { state: child, chi, surv: 0.0, children: Vec::new() });
                            next.len() - 1
                        }))
                    } else {
                        None
                    };
                    node.children.push(Child { a1, p2, node: slot });
                }
            }
        }
        total += next.len();
        if total > MAX_NODES {
            return Err(Error::Budget(format!(
                "band tree exceeds {MAX_NODES} nodes at level {}; lower the horizon",
                t + 1
            )));
        }
        levels.push(next);
        index.push(next_index);
    }
    for node in levels[horizon].iter_mut() {
        node.surv = 1.0;
    }
    for t in (0..horizon).rev() {
        let (head, tail) = levels.split_at_mut(t + 1);
        for node in head[t].iter_mut() {
            node.surv = node
                .children
                .iter()
                .map(|c| alpha.prob(c.a1) * c.p2 * c.node.map_or(0.0, |i| tail[0][i].surv))
                .sum();
        }
    }
    Ok(SurvivalTable { alpha: alpha.clone(), bound, horizon, levels, index, player2_mixes })
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanEntry {
    pub allowed: Vec<usize>,
    pub probs: MixedAction,
    pub dead_end: bool,
}

/// `σ̃`: the commitment action conditioned on staying inside the band.
#[derive(Debug, Clone)]
pub struct DeviationPlan {
    pub alpha: MixedAction,
    pub horizon: usize,
    levels: Vec<HashMap<NodeKey, PlanEntry>>,
    pub dead_ends: usize,
    /// Player 2 mixes somewhere, so the conditioned law of her actions is
    /// only matched on average.
    pub approximate: bool,
}

impl DeviationPlan {
    pub fn entry(&self, ps: &PlayState) -> Option<&PlanEntry> {
        self.levels.get(ps.t)?.get(&ps.key())
    }

    /// The plan's action; `α1*` outside the band or past the horizon.
    pub fn action(&self, ps: &PlayState) -> MixedAction {
        self.entry(ps).map_or_else(|| self.alpha.clone(), |e| e.probs.clone())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &PlanEntry)> {
        self.levels.iter().enumerate().flat_map(|(t, m)| m.values().map(move |e| (t, e)))
    }

    /// Entries with their collapsed states, sorted by period then state.
    pub fn sorted_entries(&self) -> Vec<(usize, &NodeKey, &PlanEntry)> {
        let mut out: Vec<_> = self
            .levels
            .iter()
            .enumerate()
            .flat_map(|(t, m)| m.iter().map(move |(k, e)| (t, k, e)))
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }
}

pub fn construct_deviation(table: &SurvivalTable) -> Result<DeviationPlan> {
    if !(table.root() > 0.0) {
        return Err(Error::Precondition("band event has zero probability at the horizon".into()));
    }
    let alpha = &table.alpha;
    let mut levels = Vec::with_capacity(table.horizon);
    let mut dead_ends = 0;
    for t in 0..table.horizon {
        let mut m = HashMap::with_capacity(table.levels[t].len());
        for node in &table.levels[t] {
            let mut w = vec![0.0; alpha.len()];
            let mut allowed = Vec::new();
            for c in &node.children {
                if let Some(i) = c.node {
                    w[c.a1] += alpha.prob(c.a1) * c.p2 * table.levels[t + 1][i].surv;
                    if !allowed.contains(&c.a1) {
                        allowed.push(c.a1);
                    }
                }
            }
            allowed.sort_unstable();
            let (probs, dead_end) = match MixedAction::from_weights(w) {
                Ok(p) => (p, false),
                Err(_) => {
                    dead_ends += 1;
                    (alpha.clone(), true)
                }
            };
            m.insert(node.state.key(), PlanEntry { allowed, probs, dead_end });
        }
        levels.push(m);
    }
    Ok(DeviationPlan {
        alpha: alpha.clone(),
        horizon: table.horizon,
        levels,
        dead_ends,
        approximate: table.player2_mixes,
    })
}

/// `⌈−2(χ+ε)·ln μ(α1*)/ε³⌉`: expected number of periods with a prediction
/// more than `ε` away from `α1*`.
pub fn period_budget(commitment_mass: f64, chi: f64, eps: f64) -> u64 {
    (-2.0 * (chi + eps) * commitment_mass.ln() / eps.powi(3)).ceil() as u64
}

/// Lower bound `ε/(χ+ε)` on never crossing from `χ` up to `χ+ε`.
pub fn doob_floor(chi: f64, eps: f64) -> f64 {
    eps / (chi + eps)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    pub replications: usize,
    pub seed: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub horizon: usize,
    pub replications: usize,
    pub band_violations: usize,
    /// `(replication, period)` of the first violation.
    pub first_violation: Option<(usize, usize)>,
    pub frequency_within_eps: f64,
    pub mean_far_periods: f64,
    pub period_budget: u64,
    pub doob_floor: f64,
    pub root_survival: f64,
    pub approximate: bool,
    pub off_path_traces: usize,
}

impl DeviationReport {
    pub fn passed(&self) -> bool {
        self.band_violations == 0 && self.mean_far_periods <= self.period_budget as f64
    }
}

/// Simulates the plan against the profile's beliefs and player 2.
pub fn verify_deviation(
    s: &ReputationScenario,
    profile: &StrategyProfile,
    plan: &DeviationPlan,
    table: &SurvivalTable,
    spec: &RegionSpec,
    eps: f64,
    cfg: &VerifyConfig,
) -> Result<DeviationReport> {
    let alpha = &plan.alpha;
    let sim = SimConfig::new(cfg.delta, plan.horizon, cfg.replications, cfg.seed, TrueType::Commitment(alpha.clone()))
        .tracking(Tracking { alpha: alpha.clone(), spec: Some(spec.clone()), band: None, far_eps: eps });
    let policy = |ps: &PlayState| plan.action(ps);
    let traces = simulate_with(s, profile, &sim, Some(&policy))?;
    let mut violations = 0;
    let mut first = None;
    for tr in &traces {
        if let Some(t) = tr.chi_path.iter().position(|c| *c >= table.bound) {
            violations += 1;
            first.get_or_insert((tr.rep, t));
        }
    }
    let n = traces.len() as f64;
    let within = traces
        .iter()
        .filter(|tr| {
            tr.discounted_frequency
                .iter()
                .enumerate()
                .all(|(a, f)| (f - alpha.prob(a)).abs() <= eps)
        })
        .count() as f64
        / n;
    let mean_far = traces.iter().map(|t| t.far_periods as f64).sum::<f64>() / n;
    Ok(DeviationReport {
        horizon: plan.horizon,
        replications: traces.len(),
        band_violations: violations,
        first_violation: first,
        frequency_within_eps: within,
        mean_far_periods: mean_far,
        period_budget: period_budget(s.commitment_mass(alpha), spec.chi, eps),
        doob_floor: doob_floor(spec.chi, eps),
        root_survival: table.root(),
        approximate: plan.approximate,
        off_path_traces: traces.iter().filter(|t| t.off_path_at.is_some()).count(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LawGap {
    pub max_abs_diff: f64,
    pub paths: usize,
    pub band_probability: f64,
}

/// Compares, path by path, the law induced by the plan with the commitment
/// law conditioned on the band event. Needs player 2 to be pure.
pub fn conditioned_law_gap(
    s: &ReputationScenario,
    profile: &StrategyProfile,
    alpha: &MixedAction,
    spec: &RegionSpec,
    eps: f64,
    horizon: usize,
) -> Result<LawGap> {
    if horizon > MAX_TREE_HORIZON {
        return Err(Error::Budget(format!("horizon {horizon} exceeds {MAX_TREE_HORIZON}")));
    }
    let table = survival_probabilities(s, profile, alpha, spec, eps, horizon)?;
    if table.player2_mixes {
        return Err(Error::Precondition("exact comparison needs a pure player 2".into()));
    }
    let plan = construct_deviation(&table)?;
    let view = LikelihoodView::new(s, profile, alpha)?;
    let z = table.root();
    let mut gap: f64 = 0.0;
    let mut paths = 0;
    // (state, commitment probability, plan probability, still inside band)
    let mut stack = vec![(PlayState::initial(profile), 1.0, 1.0, true)];
    while let Some((ps, pc, pp, inside)) = stack.pop() {
        if ps.t == horizon {
            paths += 1;
            let cond = if inside { pc / z } else { 0.0 };
            gap = gap.max((cond - pp).abs());
            continue;
        }
        let a2 = player2_action(s, profile, &ps).support()[0];
        let probs = if inside { plan.action(&ps) } else { MixedAction::pure(alpha.len(), 0) };
        for (a1, p) in alpha.iter() {
            let child = bayes_update(profile, &ps, a1, a2)?;
            let still = inside && view.chi(&child.posterior, spec) < table.bound;
            let q = if inside { probs.prob(a1) } else { 0.0 };
            stack.push((child, pc * p, pp * q, still));
        }
    }
    Ok(LawGap { max_abs_diff: gap, paths, band_probability: z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Patient type `θ*` secures the commitment payoff.
    Guarantee(u8),
    /// Some payoff function admits a low-payoff equilibrium.
    LowPayoff(u8),
    /// On a region boundary or with a side condition failing.
    Uncovered,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub mixed: bool,
    pub lambda: Vec<f64>,
    pub spec: RegionSpec,
    pub in_lambda: bool,
    /// Smallest strict-preference margin over the box below `λ`.
    pub lambda_margin: f64,
    pub in_lambda_underline: bool,
    pub chi0: f64,
    pub br_phi: Vec<usize>,
    pub br_phi_singleton: bool,
    pub in_hull_of_others: bool,
    pub verdict: Verdict,
}

pub fn classify_scenario(s: &ReputationScenario, theta_star: usize, alpha: &MixedAction) -> Result<Classification> {
    let ctx = RegionContext::new(s, theta_star, alpha)?;
    let lambda = ctx.prior_lambda.clone();
    let mixed = alpha.as_pure().is_none();
    let margin = ctx.box_margin(&lambda)?;
    let in_lambda = margin > TIE_TOL;
    let br_phi = best_reply_set(&s.game.u2, &ctx.phi, alpha)?;
    let singleton = br_phi.len() == 1;
    let others: Vec<Vec<f64>> = s
        .commitment_actions()
        .into_iter()
        .filter(|a| !a.approx_eq(alpha, 1e-9))
        .map(|a| a.weights().to_vec())
        .collect();
    let in_hull = in_convex_hull(alpha.weights(), &others);
    let spec = match ctx.lower_spec() {
        Ok(spec) => spec,
        // a2* already loses under φ: every cutoff is zero.
        Err(Error::Precondition(_)) => RegionSpec { psi: vec![0.0; lambda.len()], chi: 1.0 },
        Err(e) => return Err(e),
    };
    let chi0 = if spec.psi.iter().all(|p| *p > 0.0) {
        crate::geometry::chi_statistic(&lambda, &spec)
    } else {
        f64::INFINITY
    };
    let in_lower = chi0 < 1.0;
    let verdict = if !mixed {
        if in_lambda {
            Verdict::Guarantee(1)
        } else if margin < -TIE_TOL && singleton {
            Verdict::LowPayoff(2)
        } else {
            Verdict::Uncovered
        }
    } else if in_lower {
        Verdict::Guarantee(3)
    } else if chi0 > 1.0 + TIE_TOL && singleton && !in_hull {
        Verdict::LowPayoff(4)
    } else {
        Verdict::Uncovered
    };
    Ok(Classification {
        mixed,
        lambda,
        spec,
        in_lambda,
        lambda_margin: margin,
        in_lambda_underline: in_lower,
        chi0,
        br_phi,
        br_phi_singleton: singleton,
        in_hull_of_others: in_hull,
        verdict,
    })
}

/// Predicted action at the root, exposed for reports.
pub fn root_prediction(profile: &StrategyProfile) -> MixedAction {
    predicted_action(profile, &PlayState::initial(profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Player2Strategy;
    use crate::samples::{self, H, I, THETA_STAR};

    fn band_spec() -> RegionSpec {
        RegionSpec::new(vec![f64::INFINITY, 1.25, 1.25], 0.5).unwrap()
    }

    #[test]
    fn budgets() {
        assert_eq!(period_budget(0.1, 0.5, 0.1), 2764);
        assert!((doob_floor(0.5, 0.1) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn still_beliefs_survive_surely() {
        let s = samples::h_only();
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(H); 3], Player2Strategy::Myopic).unwrap();
        let spec = RegionSpec::new(vec![f64::INFINITY, 3.0, 3.0], 2.0).unwrap();
        let table = survival_probabilities(&s, &prof, &samples::pure(H), &spec, 0.1, 20).unwrap();
        assert!(table.levels.iter().flatten().all(|n| n.surv == 1.0));
        let plan = construct_deviation(&table).unwrap();
        assert!(plan.entries().all(|(_, e)| e.probs == samples::pure(H)));
    }

    #[test]
    fn one_period_two_leaf_case() {
        let (s, prof) = samples::band_profile();
        let alpha = samples::half_h_half_i();
        let spec = band_spec();
        let table = survival_probabilities(&s, &prof, &alpha, &spec.with_chi(0.5), 0.05, 1).unwrap();
        // Both children give χ = 0.5 exactly: H raises θ1, I raises θ2.
        assert_eq!(table.root(), 1.0);
        // Weighting θ2 more heavily, I pushes χ from 0.64 to 0.70 > 0.65
        // while H lowers it to 0.58.
        let tight = RegionSpec::new(vec![f64::INFINITY, 1.25, 0.8], 0.45).unwrap();
        let table = survival_probabilities(&s, &prof, &alpha, &tight, 0.2, 1).unwrap();
        let plan = construct_deviation(&table).unwrap();
        let root = plan.entry(&PlayState::initial(&prof)).unwrap();
        assert!((table.root() - (1.0 - alpha.prob(I))).abs() < 1e-15);
        assert_eq!(root.allowed, vec![H]);
        assert_eq!(root.probs, samples::pure(H));
    }

    #[test]
    fn survival_monotone_in_eps() {
        let (s, prof) = samples::band_profile();
        let alpha = samples::half_h_half_i();
        let mut last = 0.0;
        for eps in [0.05, 0.1, 0.2, 0.4] {
            let table = survival_probabilities(&s, &prof, &alpha, &band_spec(), eps, 30).unwrap();
            assert!(table.root() >= last);
            last = table.root();
        }
    }

    #[test]
    fn conditioned_law_matches() {
        let (s, prof) = samples::band_profile();
        let gap = conditioned_law_gap(&s, &prof, &samples::half_h_half_i(), &band_spec(), 0.1, 6).unwrap();
        assert!(gap.max_abs_diff < 1e-12);
        assert_eq!(gap.paths, 64);
        assert!(gap.band_probability < 1.0);
    }

    #[test]
    fn classification_examples() {
        let c = classify_scenario(&samples::perturbed(0.01), THETA_STAR, &samples::perturbed_h(0.01)).unwrap();
        assert!(c.mixed && !c.in_lambda_underline && !c.in_hull_of_others && c.br_phi_singleton);
        assert!(c.chi0 > 2.0 && c.chi0 < 2.1);
        assert_eq!(c.verdict, Verdict::LowPayoff(4));

        let c = classify_scenario(&samples::benchmark_pure(2.0), THETA_STAR, &samples::pure(H)).unwrap();
        assert_eq!(c.verdict, Verdict::Guarantee(1));
        let c = classify_scenario(&samples::benchmark_pure(3.0), THETA_STAR, &samples::pure(H)).unwrap();
        assert_eq!(c.verdict, Verdict::Uncovered);
        assert!(c.lambda_margin.abs() < 1e-9);
        let c = classify_scenario(&samples::benchmark_pure(4.0), THETA_STAR, &samples::pure(H)).unwrap();
        assert_eq!(c.verdict, Verdict::LowPayoff(2));
        let c = classify_scenario(&samples::mixed_band(), THETA_STAR, &samples::half_h_half_i()).unwrap();
        assert_eq!(c.verdict, Verdict::Guarantee(3));
        assert!((c.chi0 - 0.5).abs() < 1e-12);
    }
}
