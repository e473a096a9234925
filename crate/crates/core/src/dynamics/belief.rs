//! Posterior beliefs over agents and their exact Bayesian update.

use serde::Serialize;

use super::strategy::{AgentKind, Player2Strategy, StrategyProfile};
use crate::error::{Error, Result};
use crate::game::{argmax_set, MixedAction, ReputationScenario};
use crate::geometry::{chi_statistic, RegionSpec};

/// Observations with total likelihood below this are off path.
pub const OFF_PATH_MASS: f64 = 1e-300;

/// Everything player 2 and the machines carry from one period to the next.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayState {
    pub t: usize,
    pub posterior: Vec<f64>,
    pub agent_states: Vec<usize>,
    pub p2_state: usize,
    /// Kept only when some strategy reads the full history.
    pub history: Option<Vec<(usize, usize)>>,
    pub off_path: bool,
}

/// Collapsed identity of a [`PlayState`] for tree and graph walks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub agent_states: Vec<usize>,
    pub p2_state: usize,
    pub posterior: Vec<i64>,
    pub history: Option<Vec<(usize, usize)>>,
    pub off_path: bool,
}

impl PlayState {
    pub fn initial(profile: &StrategyProfile) -> Self {
        let p2_state = match &profile.player2 {
            Player2Strategy::Fixed(s) => s.initial_state(),
            Player2Strategy::Myopic => 0,
        };
        Self {
            t: 0,
            posterior: profile.prior_weights(),
            agent_states: profile.agents.iter().map(|a| a.strategy.initial_state()).collect(),
            p2_state,
            history: profile.uses_tables().then(Vec::new),
            off_path: false,
        }
    }

    /// Posterior quantized at `1e-12`.
    pub fn key(&self) -> NodeKey {
        NodeKey {
            agent_states: self.agent_states.clone(),
            p2_state: self.p2_state,
            posterior: self.posterior.iter().map(|p| (p * 1e12).round() as i64).collect(),
            history: self.history.clone(),
            off_path: self.off_path,
        }
    }

    /// Agent `i`'s mixed action at this state.
    pub fn agent_action<'a>(&self, profile: &'a StrategyProfile, i: usize) -> &'a MixedAction {
        profile.agents[i]
            .strategy
            .action(self.agent_states[i], self.history.as_deref())
    }

    /// Posterior probability of each `(state, strategic)` cell.
    pub fn strategic_mass(&self, profile: &StrategyProfile, state: usize) -> f64 {
        profile
            .agents
            .iter()
            .zip(&self.posterior)
            .filter(|(a, _)| a.state == state && matches!(a.kind, AgentKind::Strategic { .. }))
            .map(|(_, p)| p)
            .sum()
    }
}

/// Posterior-weighted average of every agent's current action.
pub fn predicted_action(profile: &StrategyProfile, ps: &PlayState) -> MixedAction {
    let mut w = vec![0.0; profile.n1];
    for (i, p) in ps.posterior.iter().enumerate() {
        if *p > 0.0 {
            for (a, q) in ps.agent_action(profile, i).iter() {
                w[a] += p * q;
            }
        }
    }
    MixedAction::from_weights(w).expect("posterior has positive mass")
}

/// Player 2's expected stage payoff of each action against the posterior.
pub fn myopic_scores(s: &ReputationScenario, profile: &StrategyProfile, ps: &PlayState) -> Vec<f64> {
    let mut scores = vec![0.0; profile.n2];
    for (i, p) in ps.posterior.iter().enumerate() {
        if *p > 0.0 {
            let agent = &profile.agents[i];
            let alpha = ps.agent_action(profile, i);
            for (a2, sc) in scores.iter_mut().enumerate() {
                *sc += p * s.game.u2.against(agent.state, alpha, a2);
            }
        }
    }
    scores
}

/// Player 2's mixed action at `ps`.
pub fn player2_action(s: &ReputationScenario, profile: &StrategyProfile, ps: &PlayState) -> MixedAction {
    match &profile.player2 {
        Player2Strategy::Fixed(st) => st.action(ps.p2_state, ps.history.as_deref()).clone(),
        Player2Strategy::Myopic => {
            let best = argmax_set(myopic_scores(s, profile, ps))[0];
            MixedAction::pure(profile.n2, best)
        }
    }
}

/// Conditions on `a1`, then advances every machine on `(a1, a2)`.
pub fn bayes_update(profile: &StrategyProfile, ps: &PlayState, a1: usize, a2: usize) -> Result<PlayState> {
    let mut post: Vec<f64> = (0..profile.agents.len())
        .map(|i| {
            let p = ps.posterior[i];
            if p > 0.0 {
                p * ps.agent_action(profile, i).prob(a1)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = post.iter().sum();
    let mut off_path = ps.off_path;
    if total < OFF_PATH_MASS {
        match &profile.off_path_belief {
            Some(b) => {
                post = b.clone();
                off_path = true;
            }
            None => return Err(Error::OffPath { t: ps.t, action: a1.to_string() }),
        }
    } else {
        post.iter_mut().for_each(|p| *p /= total);
    }
    let agent_states = profile
        .agents
        .iter()
        .zip(&ps.agent_states)
        .map(|(a, st)| a.strategy.next_state(*st, a1, a2))
        .collect();
    let p2_state = match &profile.player2 {
        Player2Strategy::Fixed(st) => st.next_state(ps.p2_state, a1, a2),
        Player2Strategy::Myopic => 0,
    };
    let history = ps.history.as_ref().map(|h| {
        let mut h = h.clone();
        h.push((a1, a2));
        h
    });
    Ok(PlayState { t: ps.t + 1, posterior: post, agent_states, p2_state, history, off_path })
}

/// Reads likelihood ratios `λ_θ = μ_t(θ)/μ_t(α1*)` off posteriors.
#[derive(Debug, Clone)]
pub struct LikelihoodView {
    pub alpha: MixedAction,
    commit: Vec<bool>,
    strategic_state: Vec<Option<usize>>,
    num_states: usize,
}

impl LikelihoodView {
    pub fn new(s: &ReputationScenario, profile: &StrategyProfile, alpha: &MixedAction) -> Result<Self> {
        s.require_commitment_action(alpha)?;
        let commit = profile.commitment_mask(alpha);
        let strategic_state = profile
            .agents
            .iter()
            .map(|a| matches!(a.kind, AgentKind::Strategic { .. }).then_some(a.state))
            .collect();
        Ok(Self { alpha: alpha.clone(), commit, strategic_state, num_states: s.game.num_states() })
    }

    pub fn commitment_mass(&self, posterior: &[f64]) -> f64 {
        posterior.iter().zip(&self.commit).filter(|(_, c)| **c).map(|(p, _)| p).sum()
    }

    pub fn is_commitment(&self, agent: usize) -> bool {
        self.commit[agent]
    }

    /// Infinite entries once the commitment type has been ruled out.
    pub fn lambda(&self, posterior: &[f64]) -> Vec<f64> {
        let mass = self.commitment_mass(posterior);
        let mut out = vec![0.0; self.num_states];
        for (p, st) in posterior.iter().zip(&self.strategic_state) {
            if let Some(st) = st {
                out[*st] += p;
            }
        }
        out.iter_mut().for_each(|x| *x = if *x == 0.0 { 0.0 } else { *x / mass });
        out
    }

    pub fn chi(&self, posterior: &[f64], spec: &RegionSpec) -> f64 {
        chi_statistic(&self.lambda(posterior), spec)
    }
}

/// `d(p‖q)` in nats, summed as `Σ q·f((p−q)/q)` with
/// `f(r) = (1+r)ln(1+r) − r ≥ 0` so that nearly equal distributions do not
/// cancel to zero.
pub fn kl_divergence(p: &MixedAction, q: &MixedAction) -> f64 {
    let mut total = 0.0;
    for a in 0..p.len() {
        let (pa, qa) = (p.prob(a), q.prob(a));
        total += if pa == 0.0 {
            qa
        } else if qa == 0.0 {
            return f64::INFINITY;
        } else {
            qa * kl_kernel((pa - qa) / qa)
        };
    }
    total
}

fn kl_kernel(r: f64) -> f64 {
    if r.abs() < 1e-2 {
        // Σ_{n≥2} (−r)^n / (n(n−1))
        let mut term = r;
        let mut sum = 0.0;
        for n in 2..12 {
            term *= -r;
            sum += term / (n * (n - 1)) as f64;
        }
        -sum
    } else {
        ((1.0 + r) * r.ln_1p() - r).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::strategy::Strategy;
    use crate::samples::{self, H, I, L, M1};

    fn perturbed_profile(eps: f64) -> (ReputationScenario, StrategyProfile) {
        let s = samples::perturbed(eps);
        let prof = StrategyProfile::stationary(
            &s,
            vec![samples::pure(L), samples::pure(H), samples::pure(I)],
            Player2Strategy::Myopic,
        )
        .unwrap();
        (s, prof)
    }

    #[test]
    fn observing_h_in_period_zero() {
        let eps = 0.1;
        let (s, prof) = perturbed_profile(eps);
        let view = LikelihoodView::new(&s, &prof, &samples::perturbed_h(eps)).unwrap();
        let ps = PlayState::initial(&prof);
        let before = view.lambda(&ps.posterior);
        let next = bayes_update(&prof, &ps, H, M1).unwrap();
        let after = view.lambda(&next.posterior);
        assert!((after[1] / before[1] - 1.0 / (1.0 - eps)).abs() < 1e-12);
        assert_eq!(after[0], 0.0);
        assert_eq!(after[2], 0.0);
        assert!((next.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uninformative_observation_keeps_posterior() {
        let s = samples::h_only();
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(H); 3], Player2Strategy::Myopic).unwrap();
        let ps = PlayState::initial(&prof);
        let next = bayes_update(&prof, &ps, H, 0).unwrap();
        for (a, b) in ps.posterior.iter().zip(&next.posterior) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn action_only_commitment_plays() {
        let eps = 0.1;
        let s = samples::perturbed(eps);
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(L); 3], Player2Strategy::Myopic).unwrap();
        let view = LikelihoodView::new(&s, &prof, &samples::perturbed_h(eps)).unwrap();
        let next = bayes_update(&prof, &PlayState::initial(&prof), I, 0).unwrap();
        assert!((view.commitment_mass(&next.posterior) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn off_path_without_belief_errors() {
        let s = samples::benchmark_pure(3.0);
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(L); 3], Player2Strategy::Myopic).unwrap();
        let err = bayes_update(&prof, &PlayState::initial(&prof), I, 0).unwrap_err();
        assert!(matches!(err, Error::OffPath { t: 0, .. }));
        let prof = prof
            .with_off_path_belief(&[(1, AgentKind::Strategic { component: 0 }, 1.0)])
            .unwrap();
        let next = bayes_update(&prof, &PlayState::initial(&prof), I, 0).unwrap();
        assert!(next.off_path);
        assert_eq!(next.posterior[prof.agent_index(1, AgentKind::Strategic { component: 0 }).unwrap()], 1.0);
    }

    #[test]
    fn predicted_action_is_prior_weighted() {
        let eps = 0.1;
        let (_, prof) = perturbed_profile(eps);
        let pred = predicted_action(&prof, &PlayState::initial(&prof));
        // θ* 0.4 on L, θ1 0.15 on H, θ2 0.15 on I, commitment 0.05 on α*, 0.25 on L.
        let want = [0.15 + 0.05 * (1.0 - eps), 0.15 + 0.05 * eps, 0.4 + 0.25];
        for (a, w) in want.iter().enumerate() {
            assert!((pred.prob(a) - w).abs() < 1e-12);
        }
        let mut point = PlayState::initial(&prof);
        point.posterior = vec![0.0; prof.agents.len()];
        point.posterior[2] = 1.0;
        assert_eq!(predicted_action(&prof, &point), samples::pure(H));
    }

    #[test]
    fn kl_basics() {
        let p = MixedAction::new(vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(kl_divergence(&p, &p), 0.0);
        assert!(kl_divergence(&p, &MixedAction::pure(3, 0)).is_infinite());
        let q = MixedAction::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert!((kl_divergence(&p, &q) - 2f64.ln()).abs() < 1e-15);
        // Tiny perturbations keep Pinsker's inequality in floating point.
        for k in 6..16 {
            let d = 10f64.powi(-k);
            let a = MixedAction::new(vec![0.5, 0.5, 0.0]).unwrap();
            let b = MixedAction::new(vec![0.5 + d, 0.5 - d, 0.0]).unwrap();
            let kl = kl_divergence(&a, &b);
            assert!(kl > 0.0);
            assert!(a.l1_distance(&b) <= (2.0 * kl).sqrt() + 1e-15);
        }
    }

    #[test]
    fn machine_states_advance() {
        let s = samples::h_only();
        let mut b = crate::dynamics::Machine::builder(3, 3);
        let a = b.state("a", samples::pure(H));
        let z = b.state("z", samples::pure(L));
        b.on(a, None, Some(M1), z);
        let m = b.build(a).unwrap();
        let prof = StrategyProfile::new(
            &s,
            vec![vec![(1.0, Strategy::Machine(m))], vec![(1.0, Strategy::Stationary(samples::pure(H)))], vec![(1.0, Strategy::Stationary(samples::pure(H)))]],
            Player2Strategy::Myopic,
        )
        .unwrap();
        let ps = bayes_update(&prof, &PlayState::initial(&prof), H, M1).unwrap();
        assert_eq!(ps.agent_states[0], z);
        assert_eq!(ps.key().agent_states[0], z);
    }
}
