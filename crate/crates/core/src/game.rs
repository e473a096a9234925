//! Stage-game data model, best replies and commitment payoffs.
//!
//! States, player-1 actions and player-2 actions are addressed by their
//! position in the label lists of [`StageGame`]. Payoffs are stored as `f64`;
//! scenario files may carry exact rationals which are converted on load.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance for argmax membership.
pub const TIE_TOL: f64 = 1e-9;

/// Tolerance for probability vectors summing to one.
pub const SUM_TOL: f64 = 1e-9;

/// A payoff tensor indexed `(state, a1, a2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffTensor {
    states: usize,
    n1: usize,
    n2: usize,
    data: Vec<f64>,
}

impl PayoffTensor {
    pub fn from_nested(nested: &[Vec<Vec<f64>>]) -> Result<Self> {
        let states = nested.len();
        let n1 = nested.first().map_or(0, |m| m.len());
        let n2 = nested
            .first()
            .and_then(|m| m.first())
            .map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(states * n1 * n2);
        for (s, matrix) in nested.iter().enumerate() {
            if matrix.len() != n1 {
                return Err(Error::Structure(format!(
                    "payoff matrix for state {s} has {} rows, expected {n1}",
                    matrix.len()
                )));
            }
            for (i, row) in matrix.iter().enumerate() {
                if row.len() != n2 {
                    return Err(Error::Structure(format!(
                        "payoff row ({s}, {i}) has {} entries, expected {n2}",
                        row.len()
                    )));
                }
                if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                    return Err(Error::Structure(format!("non-finite payoff {x} at ({s}, {i})")));
                }
                data.extend_from_slice(row);
            }
        }
        Ok(Self { states, n1, n2, data })
    }

    /// Builds a tensor from a function of `(state, a1, a2)`.
    pub fn from_fn(states: usize, n1: usize, n2: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(states * n1 * n2);
        for s in 0..states {
            for a1 in 0..n1 {
                for a2 in 0..n2 {
                    data.push(f(s, a1, a2));
                }
            }
        }
        Self { states, n1, n2, data }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.states, self.n1, self.n2)
    }

    #[inline]
    pub fn at(&self, state: usize, a1: usize, a2: usize) -> f64 {
        self.data[(state * self.n1 + a1) * self.n2 + a2]
    }

    /// Payoff in a fixed state against a mixed player-1 action.
    pub fn against(&self, state: usize, alpha1: &MixedAction, a2: usize) -> f64 {
        alpha1
            .iter()
            .map(|(a1, p)| p * self.at(state, a1, a2))
            .sum()
    }

    /// `Σ_θ Σ_a1 φ(θ) α1(a1) u(θ, a1, a2)`.
    pub fn expected(&self, phi: &[f64], alpha1: &MixedAction, a2: usize) -> Result<f64> {
        if phi.len() != self.states || alpha1.len() != self.n1 || a2 >= self.n2 {
            return Err(Error::Structure(format!(
                "expected payoff: belief over {} states, action over {} actions, column {a2} \
                 against a {}x{}x{} tensor",
                phi.len(),
                alpha1.len(),
                self.states,
                self.n1,
                self.n2
            )));
        }
        Ok(phi
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(s, w)| w * self.against(s, alpha1, a2))
            .sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.states)
            .map(|s| {
                (0..self.n1)
                    .map(|a1| (0..self.n2).map(|a2| self.at(s, a1, a2)).collect())
                    .collect()
            })
            .collect()
    }
}

/// A probability vector over an ordered action list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MixedAction(Vec<f64>);

impl MixedAction {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Structure("mixed action over an empty action set".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Normalization(format!("negative or non-finite probability {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Normalization(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Normalizes nonnegative weights; used where the weights come from
    /// arithmetic rather than user input.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Normalization(format!("cannot normalize weights {weights:?}")));
        }
        Ok(Self(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn pure(n: usize, action: usize) -> Self {
        let mut w = vec![0.0; n];
        w[action] = 1.0;
        Self(w)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn prob(&self, action: usize) -> f64 {
        self.0[action]
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    /// `(action, probability)` pairs with positive probability.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().copied().enumerate().filter(|(_, p)| *p > 0.0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter().map(|(a, _)| a).collect()
    }

    /// The action played with certainty, if any.
    pub fn as_pure(&self) -> Option<usize> {
        let support = self.support();
        (support.len() == 1).then(|| support[0])
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len() && self.l1_distance(other) <= tol
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Convex combination `(1-w)·self + w·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect(),
        )
    }
}

/// Finite state and action sets with both players' payoff tensors.
#[derive(Debug, Clone, Serialize)]
pub struct StageGame {
    pub states: Vec<String>,
    pub actions1: Vec<String>,
    pub actions2: Vec<String>,
    pub u1: PayoffTensor,
    pub u2: PayoffTensor,
}

impl StageGame {
    pub fn new(
        states: Vec<String>,
        actions1: Vec<String>,
        actions2: Vec<String>,
        u1: PayoffTensor,
        u2: PayoffTensor,
    ) -> Result<Self> {
        let dims = (states.len(), actions1.len(), actions2.len());
        if states.is_empty() || actions1.is_empty() || actions2.is_empty() {
            return Err(Error::Structure("state and action lists must be nonempty".into()));
        }
        for (name, t) in [("u1", &u1), ("u2", &u2)] {
            if t.dims() != dims {
                return Err(Error::Structure(format!(
                    "{name} has shape {:?}, labels imply {dims:?}",
                    t.dims()
                )));
            }
        }
        for (kind, labels) in [("state", &states), ("action1", &actions1), ("action2", &actions2)] {
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::Structure(format!("duplicate {kind} label `{l}`")));
                }
            }
        }
        Ok(Self { states, actions1, actions2, u1, u2 })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions1(&self) -> usize {
        self.actions1.len()
    }

    pub fn num_actions2(&self) -> usize {
        self.actions2.len()
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        index_of(&self.states, label)
    }

    pub fn action1_index(&self, label: &str) -> Result<usize> {
        index_of(&self.actions1, label)
    }

    pub fn action2_index(&self, label: &str) -> Result<usize> {
        index_of(&self.actions2, label)
    }

    /// Point-mass belief on one state.
    pub fn point_belief(&self, state: usize) -> Vec<f64> {
        let mut phi = vec![0.0; self.num_states()];
        phi[state] = 1.0;
        phi
    }

    pub fn describe1(&self, alpha: &MixedAction) -> String {
        describe(&self.actions1, alpha)
    }

    pub fn describe2(&self, alpha: &MixedAction) -> String {
        describe(&self.actions2, alpha)
    }

    pub fn labels2(&self, actions: &[usize]) -> Vec<String> {
        actions.iter().map(|a| self.actions2[*a].clone()).collect()
    }

    /// Player 2's pure best replies to `alpha1` in a known state.
    pub fn best_replies_in_state(&self, state: usize, alpha1: &MixedAction) -> Vec<usize> {
        argmax_set((0..self.num_actions2()).map(|a2| self.u2.against(state, alpha1, a2)))
    }

    /// `a2*(θ, α1 | u2)`, failing when the best reply is not unique.
    pub fn unique_best_reply(&self, state: usize, alpha1: &MixedAction) -> Result<usize> {
        let replies = self.best_replies_in_state(state, alpha1);
        match replies.as_slice() {
            [a2] => Ok(*a2),
            _ => Err(Error::NotSingleton {
                state: self.states[state].clone(),
                action: self.describe1(alpha1),
                tied: self.labels2(&replies),
            }),
        }
    }
}

fn index_of(labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

fn describe(labels: &[String], alpha: &MixedAction) -> String {
    if let Some(a) = alpha.as_pure() {
        return labels[a].clone();
    }
    alpha
        .iter()
        .map(|(a, p)| format!("{}{}", fmt_prob(p), labels[a]))
        .collect::<Vec<_>>()
        .join("+")
}

fn fmt_prob(p: f64) -> String {
    let s = format!("{p:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Indices whose value is within [`TIE_TOL`] of the maximum.
pub fn argmax_set(values: impl IntoIterator<Item = f64>) -> Vec<usize> {
    let values: Vec<f64> = values.into_iter().collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= best - TIE_TOL)
        .map(|(i, _)| i)
        .collect()
}

/// `Σ_θ Σ_a1 φ(θ) α1(a1) u(θ, a1, a2)`.
pub fn expected_payoff(u: &PayoffTensor, phi: &[f64], alpha1: &MixedAction, a2: usize) -> Result<f64> {
    u.expected(phi, alpha1, a2)
}

/// `BR2(φ, α1 | u2)`: the pure best replies, ties included.
pub fn best_reply_set(u2: &PayoffTensor, phi: &[f64], alpha1: &MixedAction) -> Result<Vec<usize>> {
    let (_, _, n2) = u2.dims();
    let values = (0..n2)
        .map(|a2| u2.expected(phi, alpha1, a2))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_set(values))
}

/// A commitment plan: the mixed action played in each state.
#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub name: String,
    pub actions: Vec<MixedAction>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CommitmentStructure {
    pub plans: Vec<Plan>,
}

impl CommitmentStructure {
    /// The deduplicated set of actions some plan plays in some state, in
    /// order of first appearance.
    pub fn commitment_actions(&self) -> Vec<MixedAction> {
        let mut out: Vec<MixedAction> = Vec::new();
        for plan in &self.plans {
            for a in &plan.actions {
                if !out.iter().any(|b| b.approx_eq(a, 1e-12)) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    pub fn plan_index(&self, name: &str) -> Result<usize> {
        self.plans
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }
}

/// Player 1's characteristic: strategic, or following a commitment plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Characteristic {
    Strategic,
    Plan(usize),
}

/// Prior over `Θ × ({strategic} ∪ plans)`.
#[derive(Debug, Clone, Serialize)]
pub struct Prior {
    num_states: usize,
    num_plans: usize,
    weights: Vec<f64>,
}

impl Prior {
    /// `weights[state][0]` is the strategic cell, `weights[state][1 + j]` plan `j`.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let num_states = weights.len();
        let cols = weights.first().map_or(0, |r| r.len());
        if cols == 0 || weights.iter().any(|r| r.len() != cols) {
            return Err(Error::Structure("prior rows must have equal nonzero length".into()));
        }
        Ok(Self {
            num_states,
            num_plans: cols - 1,
            weights: weights.into_iter().flatten().collect(),
        })
    }

    fn slot(&self, state: usize, c: Characteristic) -> usize {
        let col = match c {
            Characteristic::Strategic => 0,
            Characteristic::Plan(j) => 1 + j,
        };
        state * (self.num_plans + 1) + col
    }

    pub fn get(&self, state: usize, c: Characteristic) -> f64 {
        self.weights[self.slot(state, c)]
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_plans(&self) -> usize {
        self.num_plans
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `μ(θ)`: the strategic type θ.
    pub fn strategic(&self, state: usize) -> f64 {
        self.get(state, Characteristic::Strategic)
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, Characteristic, f64)> + '_ {
        (0..self.num_states).flat_map(move |s| {
            std::iter::once(Characteristic::Strategic)
                .chain((0..self.num_plans).map(Characteristic::Plan))
                .map(move |c| (s, c, self.get(s, c)))
        })
    }
}

/// Stage game, commitment plans, prior and discount factor.
#[derive(Debug, Clone, Serialize)]
pub struct ReputationScenario {
    pub game: StageGame,
    pub commitments: CommitmentStructure,
    pub prior: Prior,
    pub delta: f64,
}

impl ReputationScenario {
    pub fn new(
        game: StageGame,
        commitments: CommitmentStructure,
        prior: Prior,
        delta: f64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Structure(format!("discount factor {delta} outside (0,1)")));
        }
        let m = game.num_states();
        if prior.num_states() != m || prior.num_plans() != commitments.plans.len() {
            return Err(Error::Structure(format!(
                "prior is {}x{} cells, expected {m}x{}",
                prior.num_states(),
                prior.num_plans() + 1,
                commitments.plans.len() + 1
            )));
        }
        for plan in &commitments.plans {
            if plan.actions.len() != m {
                return Err(Error::Structure(format!(
                    "plan `{}` covers {} states, expected {m}",
                    plan.name,
                    plan.actions.len()
                )));
            }
            if plan.actions.iter().any(|a| a.len() != game.num_actions1()) {
                return Err(Error::Structure(format!(
                    "plan `{}` mixes over the wrong number of actions",
                    plan.name
                )));
            }
        }
        Ok(Self { game, commitments, prior, delta })
    }

    pub fn commitment_actions(&self) -> Vec<MixedAction> {
        self.commitments.commitment_actions()
    }

    /// Locates `alpha` among the commitment actions.
    pub fn require_commitment_action(&self, alpha: &MixedAction) -> Result<()> {
        if self
            .commitment_actions()
            .iter()
            .any(|a| a.approx_eq(alpha, 1e-9))
        {
            Ok(())
        } else {
            Err(Error::UnknownCommitmentAction(self.game.describe1(alpha)))
        }
    }

    /// Prior cells `(state, plan)` whose plan plays `alpha` in that state.
    pub fn commitment_cells(&self, alpha: &MixedAction) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, plan) in self.commitments.plans.iter().enumerate() {
            for (s, a) in plan.actions.iter().enumerate() {
                if a.approx_eq(alpha, 1e-9) {
                    out.push((s, j));
                }
            }
        }
        out
    }

    /// `μ(α1*)`: prior mass of the commitment type playing `alpha`.
    pub fn commitment_mass(&self, alpha: &MixedAction) -> f64 {
        self.commitment_cells(alpha)
            .into_iter()
            .map(|(s, j)| self.prior.get(s, Characteristic::Plan(j)))
            .sum()
    }

    /// `v_θ(α1*, u1, u2) = u1(θ, α1*, a2*(θ, α1* | u2))`.
    pub fn commitment_payoff(&self, state: usize, alpha: &MixedAction) -> Result<f64> {
        commitment_payoff(self, state, alpha)
    }
}

pub fn commitment_payoff(s: &ReputationScenario, state: usize, alpha: &MixedAction) -> Result<f64> {
    let a2 = s.game.unique_best_reply(state, alpha)?;
    Ok(s.game.u1.against(state, alpha, a2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IssueKind {
    Structure,
    Normalization,
    FullSupport,
    NonSingletonBestReply,
}

#[derive(Debug, Clone, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
    /// For best-reply warnings: the commitment action.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    /// For best-reply warnings: `(state, tied replies)` per affected state.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {}", e.message)?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {}", w.message)?;
        }
        Ok(())
    }
}

/// Checks finiteness and full support of the prior (errors) and uniqueness of
/// player 2's best reply to every commitment action in every state (warnings).
pub fn validate_scenario(s: &ReputationScenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let g = &s.game;
    let mut error = |kind, message: String| {
        report.errors.push(Issue { kind, message, action: None, ties: Vec::new() })
    };
    if g.num_actions1() < 2 {
        error(IssueKind::Structure, format!("player 1 has {} action(s), need at least 2", g.num_actions1()));
    }
    if g.num_actions2() < 2 {
        error(IssueKind::Structure, format!("player 2 has {} action(s), need at least 2", g.num_actions2()));
    }
    let total = s.prior.total();
    if (total - 1.0).abs() > SUM_TOL {
        error(IssueKind::Normalization, format!("prior sums to {total}, not 1"));
    }
    for (state, c, w) in s.prior.cells() {
        let who = match c {
            Characteristic::Strategic => "strategic".to_string(),
            Characteristic::Plan(j) => s.commitments.plans[j].name.clone(),
        };
        if w < 0.0 || !w.is_finite() {
            error(
                IssueKind::Normalization,
                format!("prior cell ({}, {who}) = {w} is not a probability", g.states[state]),
            );
        } else if w == 0.0 {
            error(
                IssueKind::FullSupport,
                format!("full support violated: prior cell ({}, {who}) is zero", g.states[state]),
            );
        }
    }
    // One warning per commitment action, listing every state with a tie.
    for alpha in s.commitment_actions() {
        let ties: Vec<(String, Vec<String>)> = (0..g.num_states())
            .filter_map(|state| {
                let replies = g.best_replies_in_state(state, &alpha);
                (replies.len() > 1).then(|| (g.states[state].clone(), g.labels2(&replies)))
            })
            .collect();
        if ties.is_empty() {
            continue;
        }
        let listed: Vec<String> = ties.iter().map(|(st, r)| format!("{st}: {{{}}}", r.join(", "))).collect();
        report.warnings.push(Issue {
            kind: IssueKind::NonSingletonBestReply,
            message: format!(
                "player 2 has no unique best reply to {} ({})",
                g.describe1(&alpha),
                listed.join("; ")
            ),
            action: Some(g.describe1(&alpha)),
            ties,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn expected_payoff_examples() {
        let g = samples::motivating_game();
        let (th_star, th1) = (0, 1);
        let h = MixedAction::pure(3, 0);
        let g_col = 0;
        let v = expected_payoff(&g.u2, &g.point_belief(th_star), &h, g_col).unwrap();
        assert_eq!(v, 3.0);
        let mixed = MixedAction::new(vec![0.9, 0.1, 0.0]).unwrap();
        let v = expected_payoff(&g.u2, &g.point_belief(th1), &mixed, 1).unwrap();
        assert!((v - 1.45).abs() < 1e-12);
        // point masses pick out a single entry
        let l = MixedAction::pure(3, 2);
        assert_eq!(expected_payoff(&g.u1, &g.point_belief(2), &l, 2).unwrap(), 1.5);
    }

    #[test]
    fn expected_payoff_dimension_mismatch() {
        let g = samples::motivating_game();
        let h = MixedAction::pure(3, 0);
        assert!(expected_payoff(&g.u2, &[1.0, 0.0], &h, 0).is_err());
        assert!(expected_payoff(&g.u2, &g.point_belief(0), &MixedAction::pure(2, 0), 0).is_err());
    }

    #[test]
    fn best_reply_examples() {
        let g = samples::motivating_game();
        let h = MixedAction::pure(3, 0);
        let l = MixedAction::pure(3, 2);
        assert_eq!(best_reply_set(&g.u2, &g.point_belief(0), &h).unwrap(), vec![0]);
        assert_eq!(best_reply_set(&g.u2, &g.point_belief(1), &l).unwrap(), vec![0, 1, 2]);
        let single = PayoffTensor::from_fn(1, 2, 1, |_, a1, _| a1 as f64);
        assert_eq!(best_reply_set(&single, &[1.0], &MixedAction::pure(2, 1)).unwrap(), vec![0]);
    }

    #[test]
    fn commitment_payoff_examples() {
        let s = samples::benchmark_pure(3.0);
        let h = MixedAction::pure(3, 0);
        assert_eq!(s.commitment_payoff(0, &h).unwrap(), 1.0);
        assert_eq!(s.commitment_payoff(1, &h).unwrap(), 1.0);
        let mixed = MixedAction::new(vec![0.9, 0.1, 0.0]).unwrap();
        assert!((s.commitment_payoff(0, &mixed).unwrap() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn commitment_payoff_refuses_ties() {
        let s = samples::benchmark_pure(3.0);
        let l = MixedAction::pure(3, 2);
        match s.commitment_payoff(1, &l) {
            Err(Error::NotSingleton { tied, .. }) => assert_eq!(tied, ["G", "M1", "M2"]),
            other => panic!("expected tie error, got {other:?}"),
        }
    }

    #[test]
    fn validator_flags_all_ties_of_l() {
        let s = samples::benchmark_pure(3.0);
        let report = validate_scenario(&s);
        assert!(report.is_ok(), "{report}");
        assert_eq!(report.warnings.len(), 1);
        let w = &report.warnings[0];
        assert_eq!(w.action.as_deref(), Some("L"));
        assert_eq!(w.ties.len(), 3);
        assert!(w.ties.contains(&("theta1".into(), vec!["G".into(), "M1".into(), "M2".into()])));
        assert!(w.ties.contains(&("theta_star".into(), vec!["M1".into(), "M2".into()])));
    }

    #[test]
    fn validator_h_only_is_clean() {
        let s = samples::h_only();
        let report = validate_scenario(&s);
        assert!(report.is_ok() && report.warnings.is_empty(), "{report}");
        let g = &s.game;
        let h = MixedAction::pure(3, 0);
        assert_eq!(g.best_replies_in_state(0, &h), vec![0]);
        assert_eq!(g.best_replies_in_state(1, &h), vec![1]);
        assert_eq!(g.best_replies_in_state(2, &h), vec![2]);
    }

    #[test]
    fn validator_rejects_zero_cell() {
        let mut s = samples::benchmark_pure(3.0);
        let mut rows: Vec<Vec<f64>> = (0..3)
            .map(|st| {
                (0..=s.prior.num_plans())
                    .map(|c| {
                        let c = if c == 0 { Characteristic::Strategic } else { Characteristic::Plan(c - 1) };
                        s.prior.get(st, c)
                    })
                    .collect()
            })
            .collect();
        let moved = rows[1][0];
        rows[1][0] = 0.0;
        rows[0][0] += moved;
        s.prior = Prior::new(rows).unwrap();
        let report = validate_scenario(&s);
        assert!(report.errors.iter().any(|e| e.kind == IssueKind::FullSupport));
    }

    #[test]
    fn mixed_action_rejects_bad_weights() {
        assert!(matches!(MixedAction::new(vec![0.5, 0.6]), Err(Error::Normalization(_))));
        assert!(matches!(MixedAction::new(vec![-0.5, 1.5]), Err(Error::Normalization(_))));
        assert!(MixedAction::new(vec![0.5, 0.5 + 1e-12]).is_ok());
    }

    #[test]
    fn describe_mixed() {
        let g = samples::motivating_game();
        let a = MixedAction::new(vec![0.9, 0.1, 0.0]).unwrap();
        assert_eq!(g.describe1(&a), "0.9H+0.1I");
    }
}
