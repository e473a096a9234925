//! Strategy representations and the agent-level strategy profile.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Characteristic, MixedAction, ReputationScenario};

/// Public history: the sequence of realized action pairs.
pub type History = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineState {
    pub label: String,
    pub output: MixedAction,
    /// `next[a1][a2]`
    pub next: Vec<Vec<usize>>,
}

/// Finite automaton over observed action pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Machine {
    pub states: Vec<MachineState>,
    pub initial: usize,
}

impl Machine {
    pub fn builder(n1: usize, n2: usize) -> MachineBuilder {
        MachineBuilder { n1, n2, states: Vec::new() }
    }

    pub fn constant(n1: usize, n2: usize, output: MixedAction) -> Self {
        let mut b = Self::builder(n1, n2);
        b.state("s0", output);
        b.build(0).expect("single state machine")
    }

    #[inline]
    pub fn step(&self, state: usize, a1: usize, a2: usize) -> usize {
        self.states[state].next[a1][a2]
    }

    pub fn output(&self, state: usize) -> &MixedAction {
        &self.states[state].output
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// Builds a [`Machine`]; unmatched observations keep the current state and
/// later rules override earlier ones.
#[derive(Debug, Clone)]
pub struct MachineBuilder {
    n1: usize,
    n2: usize,
    states: Vec<MachineState>,
}

impl MachineBuilder {
    pub fn state(&mut self, label: &str, output: MixedAction) -> usize {
        let id = self.states.len();
        self.states.push(MachineState {
            label: label.to_string(),
            output,
            next: vec![vec![id; self.n2]; self.n1],
        });
        id
    }

    /// Transition from `from` to `to` on `(a1, a2)`; `None` matches any action.
    pub fn on(&mut self, from: usize, a1: Option<usize>, a2: Option<usize>, to: usize) -> &mut Self {
        for x in 0..self.n1 {
            for y in 0..self.n2 {
                if a1.map_or(true, |a| a == x) && a2.map_or(true, |a| a == y) {
                    self.states[from].next[x][y] = to;
                }
            }
        }
        self
    }

    pub fn build(&self, initial: usize) -> Result<Machine> {
        if self.states.is_empty() || initial >= self.states.len() {
            return Err(Error::Structure("machine needs states and a valid initial state".into()));
        }
        let n = self.states.len();
        for s in &self.states {
            if s.next.iter().flatten().any(|t| *t >= n) {
                return Err(Error::Structure(format!("state `{}` transitions out of range", s.label)));
            }
        }
        Ok(Machine { states: self.states.clone(), initial })
    }
}

/// Explicit history-keyed play with a fallback.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryTable {
    pub default: MixedAction,
    pub entries: BTreeMap<History, MixedAction>,
}

impl HistoryTable {
    pub fn action(&self, h: &[(usize, usize)]) -> &MixedAction {
        self.entries.get(h).unwrap_or(&self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Strategy {
    Stationary(MixedAction),
    Machine(Machine),
    Table(HistoryTable),
}

impl Strategy {
    pub fn initial_state(&self) -> usize {
        match self {
            Strategy::Machine(m) => m.initial,
            _ => 0,
        }
    }

    pub fn action<'a>(&'a self, state: usize, history: Option<&[(usize, usize)]>) -> &'a MixedAction {
        match self {
            Strategy::Stationary(a) => a,
            Strategy::Machine(m) => m.output(state),
            Strategy::Table(t) => t.action(history.expect("history kept for table strategies")),
        }
    }

    #[inline]
    pub fn next_state(&self, state: usize, a1: usize, a2: usize) -> usize {
        match self {
            Strategy::Machine(m) => m.step(state, a1, a2),
            _ => state,
        }
    }

    fn outputs(&self) -> Vec<&MixedAction> {
        match self {
            Strategy::Stationary(a) => vec![a],
            Strategy::Machine(m) => m.states.iter().map(|s| &s.output).collect(),
            Strategy::Table(t) => std::iter::once(&t.default).chain(t.entries.values()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Player2Strategy {
    Fixed(Strategy),
    /// Stage-game best reply to the current posterior, ties to the first action.
    Myopic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AgentKind {
    Strategic { component: usize },
    Commitment { plan: usize },
}

/// One support point of player 2's belief: a state, a characteristic and,
/// for strategic types, one pure strategy component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    pub state: usize,
    pub kind: AgentKind,
    pub prior: f64,
    pub strategy: Strategy,
}

impl Agent {
    pub fn characteristic(&self) -> Characteristic {
        match self.kind {
            AgentKind::Strategic { .. } => Characteristic::Strategic,
            AgentKind::Commitment { plan } => Characteristic::Plan(plan),
        }
    }
}

/// Player 1's strategy as a weighted list of strategies per strategic state,
/// the commitment plans, and player 2's strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyProfile {
    pub agents: Vec<Agent>,
    pub player2: Player2Strategy,
    /// Belief over agents adopted after an observation no agent could make.
    pub off_path_belief: Option<Vec<f64>>,
    pub n1: usize,
    pub n2: usize,
}

impl StrategyProfile {
    /// `strategic[θ]` lists `(weight, strategy)` components summing to one.
    pub fn new(
        s: &ReputationScenario,
        strategic: Vec<Vec<(f64, Strategy)>>,
        player2: Player2Strategy,
    ) -> Result<Self> {
        let g = &s.game;
        let (n1, n2) = (g.num_actions1(), g.num_actions2());
        if strategic.len() != g.num_states() {
            return Err(Error::Structure(format!(
                "profile covers {} states, expected {}",
                strategic.len(),
                g.num_states()
            )));
        }
        let mut agents = Vec::new();
        for (state, comps) in strategic.into_iter().enumerate() {
            let total: f64 = comps.iter().map(|(w, _)| *w).sum();
            if comps.is_empty() || (total - 1.0).abs() > 1e-9 || comps.iter().any(|(w, _)| *w < 0.0) {
                return Err(Error::Normalization(format!(
                    "strategy weights for state `{}` must be nonnegative and sum to 1",
                    g.states[state]
                )));
            }
            for (component, (w, strategy)) in comps.into_iter().enumerate() {
                if strategy.outputs().iter().any(|a| a.len() != n1) {
                    return Err(Error::Structure("player 1 strategy mixes over the wrong action count".into()));
                }
                agents.push(Agent {
                    state,
                    kind: AgentKind::Strategic { component },
                    prior: s.prior.strategic(state) * w,
                    strategy,
                });
            }
            for (plan, p) in s.commitments.plans.iter().enumerate() {
                agents.push(Agent {
                    state,
                    kind: AgentKind::Commitment { plan },
                    prior: s.prior.get(state, Characteristic::Plan(plan)),
                    strategy: Strategy::Stationary(p.actions[state].clone()),
                });
            }
        }
        if let Player2Strategy::Fixed(st) = &player2 {
            if st.outputs().iter().any(|a| a.len() != n2) {
                return Err(Error::Structure("player 2 strategy mixes over the wrong action count".into()));
            }
        }
        Ok(Self { agents, player2, off_path_belief: None, n1, n2 })
    }

    /// Every strategic type plays a stationary action.
    pub fn stationary(s: &ReputationScenario, actions: Vec<MixedAction>, player2: Player2Strategy) -> Result<Self> {
        Self::new(
            s,
            actions.into_iter().map(|a| vec![(1.0, Strategy::Stationary(a))]).collect(),
            player2,
        )
    }

    /// Off-path belief given as `(state, kind, weight)` triples.
    pub fn with_off_path_belief(mut self, cells: &[(usize, AgentKind, f64)]) -> Result<Self> {
        let mut b = vec![0.0; self.agents.len()];
        for (state, kind, w) in cells {
            let i = self
                .agent_index(*state, *kind)
                .ok_or_else(|| Error::Structure(format!("no agent {kind:?} in state {state}")))?;
            b[i] += w;
        }
        let total: f64 = b.iter().sum();
        if !(total > 0.0) || b.iter().any(|w| *w < 0.0) {
            return Err(Error::Normalization("off-path belief needs positive total weight".into()));
        }
        b.iter_mut().for_each(|w| *w /= total);
        self.off_path_belief = Some(b);
        Ok(self)
    }

    pub fn agent_index(&self, state: usize, kind: AgentKind) -> Option<usize> {
        self.agents.iter().position(|a| a.state == state && a.kind == kind)
    }

    pub fn strategic_agents(&self, state: usize) -> Vec<usize> {
        (0..self.agents.len())
            .filter(|i| self.agents[*i].state == state && matches!(self.agents[*i].kind, AgentKind::Strategic { .. }))
            .collect()
    }

    /// Whether play depends on the full history rather than a machine state.
    pub fn uses_tables(&self) -> bool {
        self.agents.iter().any(|a| matches!(a.strategy, Strategy::Table(_)))
            || matches!(self.player2, Player2Strategy::Fixed(Strategy::Table(_)))
    }

    pub fn prior_weights(&self) -> Vec<f64> {
        let total: f64 = self.agents.iter().map(|a| a.prior).sum();
        self.agents.iter().map(|a| a.prior / total).collect()
    }

    /// Agents that are commitment types playing `alpha`.
    pub fn commitment_mask(&self, alpha: &MixedAction) -> Vec<bool> {
        self.agents
            .iter()
            .map(|a| match (&a.kind, &a.strategy) {
                (AgentKind::Commitment { .. }, Strategy::Stationary(b)) => b.approx_eq(alpha, 1e-9),
                _ => false,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn builder_defaults_to_staying() {
        let mut b = Machine::builder(3, 3);
        let p = b.state("p", MixedAction::pure(3, 0));
        let q = b.state("q", MixedAction::pure(3, 2));
        b.on(p, Some(2), None, q);
        let m = b.build(p).unwrap();
        assert_eq!(m.step(p, 0, 1), p);
        assert_eq!(m.step(p, 2, 1), q);
        assert_eq!(m.step(q, 0, 0), q);
        assert!(Machine::builder(3, 3).build(0).is_err());
    }

    #[test]
    fn profile_splits_prior_cells() {
        let s = samples::benchmark_pure(3.0);
        let prof = StrategyProfile::new(
            &s,
            vec![
                vec![(1.0, Strategy::Stationary(samples::pure(samples::L)))],
                vec![(0.25, Strategy::Stationary(samples::pure(samples::H))), (0.75, Strategy::Stationary(samples::pure(samples::I)))],
                vec![(1.0, Strategy::Stationary(samples::pure(samples::I)))],
            ],
            Player2Strategy::Myopic,
        )
        .unwrap();
        assert_eq!(prof.agents.len(), 7);
        let total: f64 = prof.agents.iter().map(|a| a.prior).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(prof.strategic_agents(samples::THETA1).len(), 2);
        let mask = prof.commitment_mask(&samples::pure(samples::H));
        assert_eq!(mask.iter().filter(|b| **b).count(), 1);
        assert!(StrategyProfile::new(
            &s,
            vec![vec![(0.5, Strategy::Stationary(samples::pure(0)))]; 3],
            Player2Strategy::Myopic
        )
        .is_err());
    }
}
