//! Loading scenarios and profiles, and parsing label-based arguments.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use repute::dynamics::{StrategyProfile, TrueType};
use repute::equilibria::EquilibriumMachine;
use repute::game::{MixedAction, ReputationScenario};
use repute::io;

/// Bad input from the command line or a file; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "eq")]
    pub scenario: Option<PathBuf>,
    /// Equilibrium file from `equilibrium build` or `equilibrium example`;
    /// supplies scenario, profile and patient state.
    #[arg(long)]
    pub eq: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ProfileSource {
    #[command(flatten)]
    pub source: Source,
    /// Profile JSON file (ignored with --eq).
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

pub struct Loaded {
    pub scenario: ReputationScenario,
    pub path: String,
    pub eq: Option<EquilibriumMachine>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

impl Source {
    pub fn load(&self) -> anyhow::Result<Loaded> {
        match (&self.scenario, &self.eq) {
            (Some(p), None) => Ok(Loaded {
                scenario: io::parse_scenario(&read(p)?)?,
                path: p.display().to_string(),
                eq: None,
            }),
            (None, Some(p)) => {
                let file: io::EquilibriumFile = serde_json::from_str(&read(p)?).map_err(repute::Error::from)?;
                let eq = file.into_machine()?;
                Ok(Loaded { scenario: eq.scenario.clone(), path: p.display().to_string(), eq: Some(eq) })
            }
            _ => Err(usage("give exactly one of --scenario and --eq")),
        }
    }
}

impl ProfileSource {
    pub fn load(&self) -> anyhow::Result<(Loaded, StrategyProfile)> {
        let loaded = self.source.load()?;
        let profile = match (&loaded.eq, &self.profile) {
            (Some(eq), _) => eq.profile.clone(),
            (None, Some(p)) => io::parse_profile(&loaded.scenario, &read(p)?)?,
            (None, None) => return Err(usage("--profile is required with --scenario")),
        };
        Ok((loaded, profile))
    }
}

pub fn state(s: &ReputationScenario, label: &str) -> anyhow::Result<usize> {
    Ok(s.game.state_index(label)?)
}

/// The patient state from the flag, else from the equilibrium file.
pub fn theta_star(loaded: &Loaded, flag: Option<&str>) -> anyhow::Result<usize> {
    match (flag, &loaded.eq) {
        (Some(l), _) => state(&loaded.scenario, l),
        (None, Some(eq)) => Ok(eq.theta_star),
        (None, None) => Err(usage("--theta-star is required")),
    }
}

/// A plan name, an action label, or `label=p,label=p`.
pub fn alpha(s: &ReputationScenario, text: &str, theta_star: Option<usize>) -> anyhow::Result<MixedAction> {
    let g = &s.game;
    if let Ok(j) = s.commitments.plan_index(text) {
        let plan = &s.commitments.plans[j];
        return match theta_star {
            Some(t) => Ok(plan.actions[t].clone()),
            None if plan.actions.windows(2).all(|w| w[0] == w[1]) => Ok(plan.actions[0].clone()),
            None => Err(usage(format!("plan `{text}` varies with the state; give --theta-star"))),
        };
    }
    let mut w = vec![0.0; g.num_actions1()];
    if text.contains('=') {
        for part in text.split(',') {
            let (label, p) = part
                .split_once('=')
                .ok_or_else(|| usage(format!("cannot read `{part}` as label=probability")))?;
            w[g.action1_index(label.trim())?] = io::parse_number(p)?;
        }
    } else {
        w[g.action1_index(text.trim())?] = 1.0;
    }
    Ok(MixedAction::new(w)?)
}

/// `prior`, `agent:<index>`, `strategic:<state>` or `commitment:<alpha>`.
pub fn true_type(s: &ReputationScenario, text: &str, theta_star: Option<usize>) -> anyhow::Result<TrueType> {
    match text.split_once(':') {
        None if text == "prior" => Ok(TrueType::Prior),
        Some(("agent", i)) => Ok(TrueType::Agent(i.parse().map_err(|_| usage(format!("bad agent index `{i}`")))?)),
        Some(("strategic", st)) => Ok(TrueType::Strategic(state(s, st)?)),
        Some(("commitment", a)) => Ok(TrueType::Commitment(alpha(s, a, theta_star)?)),
        _ => Err(usage(format!(
            "true type `{text}` is not one of prior, agent:<i>, strategic:<state>, commitment:<action>"
        ))),
    }
}

/// `a,b` with `a < b`.
pub fn band(text: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = text.split_once(',').ok_or_else(|| usage("band must be written a,b"))?;
    let (a, b) = (io::parse_number(a)?, io::parse_number(b)?);
    if !(a < b) {
        return Err(usage("band needs a < b"));
    }
    Ok((a, b))
}
