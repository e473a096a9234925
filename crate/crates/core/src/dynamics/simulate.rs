//! Monte Carlo play of a strategy profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::belief::{
    bayes_update, kl_divergence, player2_action, predicted_action, LikelihoodView, PlayState,
};
use super::strategy::StrategyProfile;
use crate::error::{Error, Result};
use crate::game::{MixedAction, ReputationScenario};
use crate::geometry::RegionSpec;

/// Which agent player 1 actually is in a replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrueType {
    Agent(usize),
    /// A commitment type playing this action, drawn in proportion to the prior.
    Commitment(MixedAction),
    /// A strategic type in this state, drawn across its strategy components.
    Strategic(usize),
    /// Any agent, drawn from the prior.
    Prior,
}

/// Belief statistics to track against a commitment action.
#[derive(Debug, Clone, Serialize)]
pub struct Tracking {
    pub alpha: MixedAction,
    pub spec: Option<RegionSpec>,
    /// Upcrossing interval `[a, b]` for the `χ` path.
    pub band: Option<(f64, f64)>,
    /// Periods with `‖α1* − α1(·|h^t)‖₁` above this are counted.
    pub far_eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub delta: f64,
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    pub true_type: TrueType,
    pub tracking: Option<Tracking>,
    pub record_periods: bool,
}

impl SimConfig {
    pub fn new(delta: f64, horizon: usize, replications: usize, seed: u64, true_type: TrueType) -> Self {
        Self { delta, horizon, replications, seed, true_type, tracking: None, record_periods: false }
    }

    pub fn tracking(mut self, t: Tracking) -> Self {
        self.tracking = Some(t);
        self
    }

    pub fn recording(mut self) -> Self {
        self.record_periods = true;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodRecord {
    pub t: usize,
    pub a1: usize,
    pub a2: usize,
    pub u1: f64,
    pub predicted: Vec<f64>,
    pub kl: f64,
    pub l1: f64,
    pub lambda: Vec<f64>,
    pub chi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub rep: usize,
    pub agent: usize,
    pub state: usize,
    pub periods: Vec<PeriodRecord>,
    pub length: usize,
    pub discounted_payoff: f64,
    /// `δ^T·max|u1|`
    pub remainder: f64,
    /// Normalized by `1 − δ^T` so the entries sum to one.
    pub discounted_frequency: Vec<f64>,
    pub off_path_at: Option<usize>,
    pub kl_sum: f64,
    pub far_periods: usize,
    pub pinsker_violations: usize,
    pub upcrossings: usize,
    /// Largest `χ_t` seen, including the final period.
    pub max_chi: f64,
    pub chi_path: Vec<f64>,
}

/// Counts completed `a → b` crossings: counting starts once the path is at
/// or below `a` and a crossing completes at or above `b`.
pub fn upcrossings(path: &[f64], a: f64, b: f64) -> usize {
    let mut below = false;
    let mut n = 0;
    for x in path {
        if !below && *x <= a {
            below = true;
        } else if below && *x >= b {
            n += 1;
            below = false;
        }
    }
    n
}

pub fn sample(alpha: &MixedAction, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (a, p) in alpha.iter() {
        acc += p;
        last = a;
        if u < acc {
            return a;
        }
    }
    last
}

pub fn replication_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

fn draw_agent(profile: &StrategyProfile, tt: &TrueType, rng: &mut ChaCha8Rng) -> Result<usize> {
    let weights: Vec<f64> = match tt {
        TrueType::Agent(i) => {
            if *i >= profile.agents.len() {
                return Err(Error::Structure(format!("agent {i} out of range")));
            }
            return Ok(*i);
        }
        TrueType::Commitment(alpha) => {
            let mask = profile.commitment_mask(alpha);
            profile.agents.iter().zip(mask).map(|(a, m)| if m { a.prior } else { 0.0 }).collect()
        }
        TrueType::Strategic(state) => {
            let ids = profile.strategic_agents(*state);
            (0..profile.agents.len())
                .map(|i| if ids.contains(&i) { profile.agents[i].prior.max(1e-300) } else { 0.0 })
                .collect()
        }
        TrueType::Prior => profile.agents.iter().map(|a| a.prior).collect(),
    };
    let dist = MixedAction::from_weights(weights)
        .map_err(|_| Error::Precondition(format!("true type {tt:?} has no prior mass")))?;
    Ok(sample(&dist, rng))
}

/// Chooses player 1's mixed action in place of the true agent's strategy.
pub type Policy<'a> = &'a (dyn Fn(&PlayState) -> MixedAction + Sync);

/// Plays one replication.
pub fn run_trace(
    s: &ReputationScenario,
    profile: &StrategyProfile,
    cfg: &SimConfig,
    rep: usize,
    policy: Option<Policy<'_>>,
) -> Result<TraceRecord> {
    let mut rng = replication_rng(cfg.seed, rep);
    let agent = draw_agent(profile, &cfg.true_type, &mut rng)?;
    let state = profile.agents[agent].state;
    let view = match &cfg.tracking {
        Some(t) => Some(LikelihoodView::new(s, profile, &t.alpha)?),
        None => None,
    };
    let chi_of = |ps: &PlayState| -> f64 {
        match (&view, cfg.tracking.as_ref().and_then(|t| t.spec.as_ref())) {
            (Some(v), Some(spec)) => v.chi(&ps.posterior, spec),
            _ => f64::NAN,
        }
    };
    let d = cfg.delta;
    let mut ps = PlayState::initial(profile);
    let mut rec = TraceRecord {
        rep,
        agent,
        state,
        periods: Vec::new(),
        length: 0,
        discounted_payoff: 0.0,
        remainder: d.powi(cfg.horizon as i32) * s.game.u1.max_abs(),
        discounted_frequency: vec![0.0; profile.n1],
        off_path_at: None,
        kl_sum: 0.0,
        far_periods: 0,
        pinsker_violations: 0,
        upcrossings: 0,
        max_chi: f64::NEG_INFINITY,
        chi_path: Vec::new(),
    };
    let mut weight = 1.0 - d;
    for t in 0..cfg.horizon {
        let chi = chi_of(&ps);
        let (kl, l1, pred) = match &cfg.tracking {
            Some(tr) => {
                let pred = predicted_action(profile, &ps);
                (kl_divergence(&tr.alpha, &pred), tr.alpha.l1_distance(&pred), Some(pred))
            }
            None => (f64::NAN, f64::NAN, None),
        };
        if let Some(tr) = &cfg.tracking {
            rec.kl_sum += kl;
            if l1 > tr.far_eps {
                rec.far_periods += 1;
            }
            if l1 > (2.0 * kl).sqrt() + 1e-12 {
                rec.pinsker_violations += 1;
            }
            rec.chi_path.push(chi);
            rec.max_chi = rec.max_chi.max(chi);
        }
        let alpha1 = match policy {
            Some(f) => f(&ps),
            None => ps.agent_action(profile, agent).clone(),
        };
        let alpha2 = player2_action(s, profile, &ps);
        let a1 = sample(&alpha1, &mut rng);
        let a2 = sample(&alpha2, &mut rng);
        let u = s.game.u1.at(state, a1, a2);
        rec.discounted_payoff += weight * u;
        rec.discounted_frequency[a1] += weight;
        if cfg.record_periods {
            rec.periods.push(PeriodRecord {
                t,
                a1,
                a2,
                u1: u,
                predicted: pred.map(|p| p.weights().to_vec()).unwrap_or_default(),
                kl,
                l1,
                lambda: view.as_ref().map(|v| v.lambda(&ps.posterior)).unwrap_or_default(),
                chi,
            });
        }
        weight *= d;
        rec.length = t + 1;
        match bayes_update(profile, &ps, a1, a2) {
            Ok(next) => ps = next,
            Err(Error::OffPath { .. }) => {
                rec.off_path_at = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if rec.off_path_at.is_none() && cfg.tracking.is_some() {
        let chi = chi_of(&ps);
        rec.chi_path.push(chi);
        rec.max_chi = rec.max_chi.max(chi);
    }
    let mass: f64 = rec.discounted_frequency.iter().sum();
    if mass > 0.0 {
        rec.discounted_frequency.iter_mut().for_each(|f| *f /= mass);
    }
    if let Some((a, b)) = cfg.tracking.as_ref().and_then(|t| t.band) {
        rec.upcrossings = upcrossings(&rec.chi_path, a, b);
    }
    Ok(rec)
}

/// Runs all replications in parallel; results are ordered by replication.
pub fn simulate(s: &ReputationScenario, profile: &StrategyProfile, cfg: &SimConfig) -> Result<Vec<TraceRecord>> {
    simulate_with(s, profile, cfg, None)
}

pub fn simulate_with(
    s: &ReputationScenario,
    profile: &StrategyProfile,
    cfg: &SimConfig,
    policy: Option<Policy<'_>>,
) -> Result<Vec<TraceRecord>> {
    if cfg.horizon == 0 || cfg.replications == 0 {
        return Err(Error::Structure("horizon and replications must be at least 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::Structure(format!("discount factor {} outside (0,1)", cfg.delta)));
    }
    (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_trace(s, profile, cfg, rep, policy))
        .collect()
}

/// Binomial standard error of an empirical frequency.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionTail {
    pub action: usize,
    pub mean: f64,
    /// `(η, P(|freq − α1*(a1)| ≥ η), binomial σ)`
    pub tails: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyTail {
    pub delta: f64,
    pub horizon: usize,
    pub remainder: f64,
    pub replications: usize,
    pub actions: Vec<ActionTail>,
}

/// Discounted action frequencies of i.i.d. draws from `alpha`, truncated
/// once `δ^T ≤ 1e-9`.
pub fn discounted_frequency_concentration(
    alpha: &MixedAction,
    delta: f64,
    replications: usize,
    seed: u64,
    etas: &[f64],
) -> Result<FrequencyTail> {
    if !(delta > 0.0 && delta < 1.0) || replications == 0 {
        return Err(Error::Structure("need δ in (0,1) and at least one replication".into()));
    }
    let horizon = ((1e-9f64).ln() / delta.ln()).ceil() as usize;
    let n = alpha.len();
    let freqs: Vec<Vec<f64>> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep);
            let mut f = vec![0.0; n];
            let mut w = 1.0 - delta;
            for _ in 0..horizon {
                f[sample(alpha, &mut rng)] += w;
                w *= delta;
            }
            f
        })
        .collect();
    let actions = (0..n)
        .map(|a| {
            let mean = freqs.iter().map(|f| f[a]).sum::<f64>() / replications as f64;
            let tails = etas
                .iter()
                .map(|eta| {
                    let hits = freqs.iter().filter(|f| (f[a] - alpha.prob(a)).abs() >= *eta).count();
                    let p = hits as f64 / replications as f64;
                    (*eta, p, binomial_sigma(p, replications))
                })
                .collect();
            ActionTail { action: a, mean, tails }
        })
        .collect();
    Ok(FrequencyTail { delta, horizon, remainder: delta.powi(horizon as i32), replications, actions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::strategy::Player2Strategy;
    use crate::samples::{self, H};

    #[test]
    fn upcrossing_convention() {
        assert_eq!(upcrossings(&[0.5, 0.7, 0.4, 0.8], 0.5, 0.6), 2);
        assert_eq!(upcrossings(&[0.55, 0.7, 0.55], 0.5, 0.6), 0);
        assert_eq!(upcrossings(&[0.5, 0.59, 0.5, 0.6], 0.5, 0.6), 1);
        assert_eq!(upcrossings(&[], 0.5, 0.6), 0);
    }

    #[test]
    fn frequency_of_point_mass() {
        let rep = discounted_frequency_concentration(&samples::pure(H), 0.9, 20, 1, &[0.1]).unwrap();
        assert!((rep.actions[H].mean - (1.0 - rep.remainder)).abs() < 1e-12);
        assert_eq!(rep.actions[H].tails[0].1, 0.0);
        assert_eq!(rep.actions[1].mean, 0.0);
    }

    #[test]
    fn constant_beliefs_never_cross() {
        let s = samples::h_only();
        let prof = StrategyProfile::stationary(&s, vec![samples::pure(H); 3], Player2Strategy::Myopic).unwrap();
        let spec = RegionSpec::new(vec![f64::INFINITY, 3.0, 3.0], 1.0).unwrap();
        let cfg = SimConfig::new(0.9, 50, 8, 3, TrueType::Commitment(samples::pure(H))).tracking(Tracking {
            alpha: samples::pure(H),
            spec: Some(spec),
            band: Some((0.5, 0.6)),
            far_eps: 0.1,
        });
        for tr in simulate(&s, &prof, &cfg).unwrap() {
            assert_eq!(tr.upcrossings, 0);
            assert!(tr.chi_path.windows(2).all(|w| w[0] == w[1]));
            assert_eq!(tr.far_periods, 0);
            assert!((tr.discounted_frequency.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn traces_independent_of_thread_count() {
        let s = samples::mixed_band();
        let prof = StrategyProfile::stationary(
            &s,
            vec![samples::pure(samples::L), samples::half_h_half_i(), samples::half_h_half_i()],
            Player2Strategy::Myopic,
        )
        .unwrap();
        let cfg = SimConfig::new(0.95, 40, 16, 11, TrueType::Prior);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| simulate(&s, &prof, &cfg).unwrap());
        let b = simulate(&s, &prof, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.discounted_payoff.to_bits(), y.discounted_payoff.to_bits());
            assert_eq!(x.agent, y.agent);
        }
    }
}
