//! Histories, Bayesian updating over player 1's types, strategy machines and
//! Monte Carlo play.

mod belief;
mod simulate;
mod strategy;

pub use belief::{
    bayes_update, kl_divergence, myopic_scores, player2_action, predicted_action, LikelihoodView,
    NodeKey, PlayState, OFF_PATH_MASS,
};
pub use simulate::{
    binomial_sigma, discounted_frequency_concentration, replication_rng, run_trace, sample, simulate,
    simulate_with, upcrossings, ActionTail, FrequencyTail, PeriodRecord, Policy, SimConfig,
    TraceRecord, Tracking, TrueType,
};
pub use strategy::{
    Agent, AgentKind, History, HistoryTable, Machine, MachineBuilder, MachineState, Player2Strategy,
    Strategy, StrategyProfile,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{MixedAction, ReputationScenario};

/// Largest horizon accepted by exhaustive history walks.
pub const MAX_TREE_HORIZON: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct SupermartingaleReport {
    /// `max_θ Σ_a α1*(a)·λ_θ(h,a) − λ_θ(h)` over all checked histories.
    pub max_violation: f64,
    pub worst_history: Vec<(usize, usize)>,
    pub worst_state: usize,
    pub histories: usize,
}

/// Walks every history of length below `horizon` reachable under the
/// commitment type `alpha` and player 2's strategy, checking that each
/// likelihood ratio is a supermartingale.
pub fn supermartingale_check(
    s: &ReputationScenario,
    profile: &StrategyProfile,
    alpha: &MixedAction,
    horizon: usize,
) -> Result<SupermartingaleReport> {
    if horizon > MAX_TREE_HORIZON {
        return Err(Error::Budget(format!("horizon {horizon} exceeds {MAX_TREE_HORIZON}")));
    }
    let view = LikelihoodView::new(s, profile, alpha)?;
    let mut rep = SupermartingaleReport {
        max_violation: f64::NEG_INFINITY,
        worst_history: Vec::new(),
        worst_state: 0,
        histories: 0,
    };
    let mut stack = vec![(PlayState::initial(profile), Vec::new())];
    while let Some((ps, h)) = stack.pop() {
        if h.len() >= horizon {
            continue;
        }
        rep.histories += 1;
        let lambda = view.lambda(&ps.posterior);
        let sigma2 = player2_action(s, profile, &ps);
        let mut expected = vec![0.0; lambda.len()];
        for (a1, p) in alpha.iter() {
            let a2 = sigma2.support()[0];
            let child = bayes_update(profile, &ps, a1, a2)?;
            for (e, l) in expected.iter_mut().zip(view.lambda(&child.posterior)) {
                *e += p * l;
            }
            for a2 in sigma2.support() {
                let mut hc = h.clone();
                hc.push((a1, a2));
                stack.push((bayes_update(profile, &ps, a1, a2)?, hc));
            }
        }
        for (st, (e, l)) in expected.iter().zip(&lambda).enumerate() {
            if e - l > rep.max_violation {
                rep.max_violation = e - l;
                rep.worst_history = h.clone();
                rep.worst_state = st;
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{self, H};

    #[test]
    fn constant_play_is_a_martingale() {
        let s = samples::h_only();
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(H); 3], Player2Strategy::Myopic).unwrap();
        let rep = supermartingale_check(&s, &prof, &samples::pure(H), 4).unwrap();
        assert!(rep.max_violation.abs() < 1e-15);
        assert_eq!(rep.histories, 4);
        assert!(supermartingale_check(&s, &prof, &samples::pure(H), 9).is_err());
    }

    #[test]
    fn band_profile_is_a_supermartingale() {
        let (s, prof) = samples::band_profile();
        let rep = supermartingale_check(&s, &prof, &samples::half_h_half_i(), 5).unwrap();
        assert!(rep.max_violation <= 1e-9, "{rep:?}");
        // Strict supermartingale for θ* who plays L off the support.
        assert!(rep.histories > 1);
    }
}
