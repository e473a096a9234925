//! JSON scenario, profile and equilibrium files.
//!
//! Payoffs and probabilities may be given as JSON numbers or as strings
//! holding a decimal or an exact rational such as `"3/2"`. Prior cells are
//! keyed by state and then by `"strategic"` or a plan name; absent cells are
//! zero (and will fail validation).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{AgentKind, HistoryTable, Machine, Player2Strategy, Strategy, StrategyProfile};
use crate::equilibria::EquilibriumMachine;
use crate::error::{Error, Result};
use crate::game::{
    Characteristic, CommitmentStructure, MixedAction, PayoffTensor, Plan, Prior,
    ReputationScenario, StageGame,
};

pub const STRATEGIC: &str = "strategic";

/// A number or a numeric string (`"0.25"`, `"-1/2"`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    pub fn value(&self) -> Result<f64> {
        match self {
            Num::Float(x) => Ok(*x),
            Num::Text(s) => parse_number(s),
        }
    }
}

/// Parses a decimal or `p/q` rational; the rational is divided once so the
/// result is the double nearest to `p/q`.
pub fn parse_number(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::Structure(format!("cannot parse `{text}` as a number"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 || p.unsigned_abs() > 1 << 53 || q.unsigned_abs() > 1 << 53 {
                return Err(bad());
            }
            Ok(p as f64 / q as f64)
        }
        None => t.parse().map_err(|_| bad()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub name: String,
    pub map: BTreeMap<String, BTreeMap<String, Num>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub states: Vec<String>,
    pub actions1: Vec<String>,
    pub actions2: Vec<String>,
    pub u1: Vec<Vec<Vec<Num>>>,
    pub u2: Vec<Vec<Vec<Num>>>,
    #[serde(default)]
    pub plans: Vec<PlanFile>,
    pub prior: BTreeMap<String, BTreeMap<String, Num>>,
    pub delta: Num,
}

fn tensor(nested: &[Vec<Vec<Num>>]) -> Result<PayoffTensor> {
    let values = nested
        .iter()
        .map(|m| {
            m.iter()
                .map(|row| row.iter().map(Num::value).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    PayoffTensor::from_nested(&values)
}

/// Reads a mixed action given as `{label: prob}` over `labels`.
pub fn mixed_from_map(labels: &[String], map: &BTreeMap<String, Num>) -> Result<MixedAction> {
    let mut w = vec![0.0; labels.len()];
    for (k, v) in map {
        let i = labels
            .iter()
            .position(|l| l == k)
            .ok_or_else(|| Error::UnknownLabel(k.clone()))?;
        w[i] = v.value()?;
    }
    MixedAction::new(w)
}

pub fn mixed_to_map(labels: &[String], alpha: &MixedAction) -> BTreeMap<String, Num> {
    alpha
        .iter()
        .map(|(a, p)| (labels[a].clone(), Num::Float(p)))
        .collect()
}

impl ScenarioFile {
    pub fn into_scenario(&self) -> Result<ReputationScenario> {
        let game = StageGame::new(
            self.states.clone(),
            self.actions1.clone(),
            self.actions2.clone(),
            tensor(&self.u1)?,
            tensor(&self.u2)?,
        )?;
        let mut plans = Vec::with_capacity(self.plans.len());
        for p in &self.plans {
            if p.name == STRATEGIC {
                return Err(Error::Structure(format!("plan name `{STRATEGIC}` is reserved")));
            }
            if let Some(extra) = p.map.keys().find(|k| !game.states.contains(k)) {
                return Err(Error::UnknownLabel(extra.clone()));
            }
            let actions = game
                .states
                .iter()
                .map(|st| {
                    let m = p.map.get(st).ok_or_else(|| {
                        Error::Structure(format!("plan `{}` has no action for state `{st}`", p.name))
                    })?;
                    mixed_from_map(&game.actions1, m)
                })
                .collect::<Result<Vec<_>>>()?;
            plans.push(Plan { name: p.name.clone(), actions });
        }
        let commitments = CommitmentStructure { plans };
        let mut rows = vec![vec![0.0; commitments.plans.len() + 1]; game.num_states()];
        for (st, cells) in &self.prior {
            let s = game.state_index(st)?;
            for (who, w) in cells {
                let col = if who == STRATEGIC { 0 } else { 1 + commitments.plan_index(who)? };
                rows[s][col] = w.value()?;
            }
        }
        let prior = Prior::new(rows)?;
        ReputationScenario::new(game, commitments, prior, self.delta.value()?)
    }

    pub fn from_scenario(s: &ReputationScenario) -> Self {
        let g = &s.game;
        let nums = |t: &PayoffTensor| {
            t.nested()
                .into_iter()
                .map(|m| {
                    m.into_iter()
                        .map(|r| r.into_iter().map(Num::Float).collect())
                        .collect()
                })
                .collect()
        };
        let plans = s
            .commitments
            .plans
            .iter()
            .map(|p| PlanFile {
                name: p.name.clone(),
                map: g
                    .states
                    .iter()
                    .zip(&p.actions)
                    .map(|(st, a)| (st.clone(), mixed_to_map(&g.actions1, a)))
                    .collect(),
            })
            .collect();
        let prior = g
            .states
            .iter()
            .enumerate()
            .map(|(i, st)| {
                let mut cells = BTreeMap::new();
                cells.insert(STRATEGIC.to_string(), Num::Float(s.prior.strategic(i)));
                for (j, p) in s.commitments.plans.iter().enumerate() {
                    cells.insert(p.name.clone(), Num::Float(s.prior.get(i, Characteristic::Plan(j))));
                }
                (st.clone(), cells)
            })
            .collect();
        Self {
            states: g.states.clone(),
            actions1: g.actions1.clone(),
            actions2: g.actions2.clone(),
            u1: nums(&g.u1),
            u2: nums(&g.u2),
            plans,
            prior,
            delta: Num::Float(s.delta),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<ReputationScenario> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    file.into_scenario()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ReputationScenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

pub fn scenario_to_json(s: &ReputationScenario) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}

fn position(labels: &[String], key: &str) -> Result<usize> {
    labels.iter().position(|l| l == key).ok_or_else(|| Error::UnknownLabel(key.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<String>,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MachineStateFile {
    pub label: String,
    pub play: BTreeMap<String, Num>,
    /// Applied in order, later rules override earlier ones; unmatched
    /// observations keep the state.
    #[serde(default)]
    pub on: Vec<RuleFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntryFile {
    pub history: Vec<(String, String)>,
    pub play: BTreeMap<String, Num>,
}

/// A strategy over `own` actions reacting to `(a1, a2)` observations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StrategyFile {
    Stationary { action: BTreeMap<String, Num> },
    Machine { initial: String, states: Vec<MachineStateFile> },
    Table { default: BTreeMap<String, Num>, entries: Vec<TableEntryFile> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentFile {
    pub weight: Num,
    pub strategy: StrategyFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffPathCell {
    pub state: String,
    /// `"strategic"` or a plan name.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub component: usize,
    pub weight: Num,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player2File {
    Myopic,
    Fixed(StrategyFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileFile {
    pub strategic: BTreeMap<String, Vec<ComponentFile>>,
    pub player2: Player2File,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub off_path_belief: Option<Vec<OffPathCell>>,
}

struct Labels<'a> {
    own: &'a [String],
    a1: &'a [String],
    a2: &'a [String],
}

impl StrategyFile {
    fn build(&self, l: &Labels) -> Result<Strategy> {
        match self {
            StrategyFile::Stationary { action } => Ok(Strategy::Stationary(mixed_from_map(l.own, action)?)),
            StrategyFile::Machine { initial, states } => {
                let mut b = Machine::builder(l.a1.len(), l.a2.len());
                for st in states {
                    b.state(&st.label, mixed_from_map(l.own, &st.play)?);
                }
                let index = |label: &str| {
                    states
                        .iter()
                        .position(|s| s.label == label)
                        .ok_or_else(|| Error::UnknownLabel(label.to_string()))
                };
                for (i, st) in states.iter().enumerate() {
                    for r in &st.on {
                        let a1 = r.a1.as_deref().map(|x| position(l.a1, x)).transpose()?;
                        let a2 = r.a2.as_deref().map(|x| position(l.a2, x)).transpose()?;
                        b.on(i, a1, a2, index(&r.to)?);
                    }
                }
                Ok(Strategy::Machine(b.build(index(initial)?)?))
            }
            StrategyFile::Table { default, entries } => {
                let mut map = BTreeMap::new();
                for e in entries {
                    let h = e
                        .history
                        .iter()
                        .map(|(x, y)| Ok((position(l.a1, x)?, position(l.a2, y)?)))
                        .collect::<Result<Vec<_>>>()?;
                    map.insert(h, mixed_from_map(l.own, &e.play)?);
                }
                Ok(Strategy::Table(HistoryTable { default: mixed_from_map(l.own, default)?, entries: map }))
            }
        }
    }

    fn from_strategy(st: &Strategy, l: &Labels) -> Self {
        match st {
            Strategy::Stationary(a) => StrategyFile::Stationary { action: mixed_to_map(l.own, a) },
            Strategy::Machine(m) => StrategyFile::Machine {
                initial: m.states[m.initial].label.clone(),
                states: m
                    .states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| MachineStateFile {
                        label: s.label.clone(),
                        play: mixed_to_map(l.own, &s.output),
                        on: s
                            .next
                            .iter()
                            .enumerate()
                            .flat_map(|(a1, row)| row.iter().enumerate().map(move |(a2, to)| (a1, a2, *to)))
                            .filter(|(_, _, to)| *to != i)
                            .map(|(a1, a2, to)| RuleFile {
                                a1: Some(l.a1[a1].clone()),
                                a2: Some(l.a2[a2].clone()),
                                to: m.states[to].label.clone(),
                            })
                            .collect(),
                    })
                    .collect(),
            },
            Strategy::Table(t) => StrategyFile::Table {
                default: mixed_to_map(l.own, &t.default),
                entries: t
                    .entries
                    .iter()
                    .map(|(h, a)| TableEntryFile {
                        history: h.iter().map(|(x, y)| (l.a1[*x].clone(), l.a2[*y].clone())).collect(),
                        play: mixed_to_map(l.own, a),
                    })
                    .collect(),
            },
        }
    }
}

impl ProfileFile {
    pub fn into_profile(&self, s: &ReputationScenario) -> Result<StrategyProfile> {
        let g = &s.game;
        let p1 = Labels { own: &g.actions1, a1: &g.actions1, a2: &g.actions2 };
        let p2 = Labels { own: &g.actions2, a1: &g.actions1, a2: &g.actions2 };
        for key in self.strategic.keys() {
            position(&g.states, key)?;
        }
        let mut strategic = Vec::with_capacity(g.num_states());
        for st in &g.states {
            let comps = self
                .strategic
                .get(st)
                .ok_or_else(|| Error::Structure(format!("no strategy for state `{st}`")))?;
            strategic.push(
                comps
                    .iter()
                    .map(|c| Ok((c.weight.value()?, c.strategy.build(&p1)?)))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let player2 = match &self.player2 {
            Player2File::Myopic => Player2Strategy::Myopic,
            Player2File::Fixed(f) => Player2Strategy::Fixed(f.build(&p2)?),
        };
        let mut profile = StrategyProfile::new(s, strategic, player2)?;
        if let Some(cells) = &self.off_path_belief {
            let parsed = cells
                .iter()
                .map(|c| {
                    let state = position(&g.states, &c.state)?;
                    let kind = if c.kind == STRATEGIC {
                        AgentKind::Strategic { component: c.component }
                    } else {
                        let plan = s
                            .commitments
                            .plans
                            .iter()
                            .position(|p| p.name == c.kind)
                            .ok_or_else(|| Error::UnknownLabel(c.kind.clone()))?;
                        AgentKind::Commitment { plan }
                    };
                    Ok((state, kind, c.weight.value()?))
                })
                .collect::<Result<Vec<_>>>()?;
            profile = profile.with_off_path_belief(&parsed)?;
        }
        Ok(profile)
    }

    pub fn from_profile(s: &ReputationScenario, p: &StrategyProfile) -> Self {
        let g = &s.game;
        let p1 = Labels { own: &g.actions1, a1: &g.actions1, a2: &g.actions2 };
        let p2 = Labels { own: &g.actions2, a1: &g.actions1, a2: &g.actions2 };
        let mut strategic: BTreeMap<String, Vec<ComponentFile>> = BTreeMap::new();
        for a in &p.agents {
            if let AgentKind::Strategic { .. } = a.kind {
                let mass = s.prior.strategic(a.state);
                strategic.entry(g.states[a.state].clone()).or_default().push(ComponentFile {
                    weight: Num::Float(if mass > 0.0 { a.prior / mass } else { 1.0 }),
                    strategy: StrategyFile::from_strategy(&a.strategy, &p1),
                });
            }
        }
        let player2 = match &p.player2 {
            Player2Strategy::Myopic => Player2File::Myopic,
            Player2Strategy::Fixed(f) => Player2File::Fixed(StrategyFile::from_strategy(f, &p2)),
        };
        let off_path_belief = p.off_path_belief.as_ref().map(|b| {
            b.iter()
                .zip(&p.agents)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, a)| {
                    let (kind, component) = match a.kind {
                        AgentKind::Strategic { component } => (STRATEGIC.to_string(), component),
                        AgentKind::Commitment { plan } => (s.commitments.plans[plan].name.clone(), 0),
                    };
                    OffPathCell { state: g.states[a.state].clone(), kind, component, weight: Num::Float(*w) }
                })
                .collect()
        });
        Self { strategic, player2, off_path_belief }
    }
}

pub fn parse_profile(s: &ReputationScenario, text: &str) -> Result<StrategyProfile> {
    serde_json::from_str::<ProfileFile>(text)?.into_profile(s)
}

pub fn load_profile(s: &ReputationScenario, path: impl AsRef<Path>) -> Result<StrategyProfile> {
    parse_profile(s, &std::fs::read_to_string(path)?)
}

pub fn profile_to_json(s: &ReputationScenario, p: &StrategyProfile) -> String {
    serde_json::to_string_pretty(&ProfileFile::from_profile(s, p)).expect("profile serializes")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumFile {
    pub name: String,
    pub theta_star: String,
    pub scenario: ScenarioFile,
    pub profile: ProfileFile,
    /// Free-form construction data carried along for reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

impl EquilibriumFile {
    pub fn from_machine(eq: &EquilibriumMachine) -> Self {
        Self {
            name: eq.name.clone(),
            theta_star: eq.scenario.game.states[eq.theta_star].clone(),
            scenario: ScenarioFile::from_scenario(&eq.scenario),
            profile: ProfileFile::from_profile(&eq.scenario, &eq.profile),
            notes: None,
        }
    }

    pub fn into_machine(&self) -> Result<EquilibriumMachine> {
        let scenario = self.scenario.into_scenario()?;
        let profile = self.profile.into_profile(&scenario)?;
        let theta_star = position(&scenario.game.states, &self.theta_star)?;
        Ok(EquilibriumMachine { name: self.name.clone(), theta_star, scenario, profile })
    }
}

pub fn load_equilibrium(path: impl AsRef<Path>) -> Result<EquilibriumMachine> {
    serde_json::from_str::<EquilibriumFile>(&std::fs::read_to_string(path)?)?.into_machine()
}

/// Compact JSON with sorted maps, stable across runs.
pub fn canonical_json(s: &ReputationScenario) -> String {
    serde_json::to_string(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}
