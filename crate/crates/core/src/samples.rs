//! Ready-made scenarios built on the three-state effort/product game.
//!
//! States are `theta_star`, `theta1`, `theta2`; player 1 chooses high,
//! intermediate or low effort (`H`, `I`, `L`); player 2 buys the good product
//! `G` or one of two mediocre products `M1`, `M2`.

use crate::dynamics::{Machine, Player2Strategy, Strategy, StrategyProfile};
use crate::game::{
    CommitmentStructure, MixedAction, PayoffTensor, Plan, Prior, ReputationScenario, StageGame,
};

pub const THETA_STAR: usize = 0;
pub const THETA1: usize = 1;
pub const THETA2: usize = 2;
pub const H: usize = 0;
pub const I: usize = 1;
pub const L: usize = 2;
pub const G: usize = 0;
pub const M1: usize = 1;
pub const M2: usize = 2;

/// Default discount factor attached to the sample scenarios.
pub const DELTA: f64 = 0.95;

const U1: [[[f64; 3]; 3]; 3] = [
    [[1.0, -0.5, -0.5], [2.0, 0.0, 0.0], [3.0, 0.5, 0.5]],
    [[2.0, 1.0, -1.0], [2.0, 1.0, -1.0], [3.0, 1.5, 0.0]],
    [[2.0, -1.0, 1.0], [2.0, -1.0, 1.0], [3.0, 0.0, 1.5]],
];

const U2: [[[f64; 3]; 3]; 3] = [
    [[3.0, 0.0, 0.0], [-1.0, -0.5, -0.5], [-1.5, -1.0, -1.0]],
    [[0.5, 1.5, 0.0], [0.0, 1.0, -0.5], [-1.0, -1.0, -1.0]],
    [[0.5, 0.0, 1.5], [0.0, -0.5, 1.0], [-1.0, -1.0, -1.0]],
];

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

pub fn motivating_game() -> StageGame {
    StageGame::new(
        labels(&["theta_star", "theta1", "theta2"]),
        labels(&["H", "I", "L"]),
        labels(&["G", "M1", "M2"]),
        PayoffTensor::from_fn(3, 3, 3, |s, a1, a2| U1[s][a1][a2]),
        PayoffTensor::from_fn(3, 3, 3, |s, a1, a2| U2[s][a1][a2]),
    )
    .expect("static tables are well formed")
}

pub fn pure(a: usize) -> MixedAction {
    MixedAction::pure(3, a)
}

/// `(1-ε)H + εI`.
pub fn perturbed_h(eps: f64) -> MixedAction {
    MixedAction::new(vec![1.0 - eps, eps, 0.0]).expect("valid mixture")
}

/// One plan playing `at_star` in `theta_star` and `elsewhere` in the other
/// two states, so the commitment type `at_star` lives on `theta_star` only.
fn single_plan(at_star: MixedAction, elsewhere: MixedAction) -> CommitmentStructure {
    CommitmentStructure {
        plans: vec![Plan {
            name: "gamma".into(),
            actions: vec![at_star, elsewhere.clone(), elsewhere],
        }],
    }
}

/// Prior with strategic `theta_star` mass 0.4, commitment mass 0.05 on
/// `(theta_star, gamma)`, `μ(θ1) = μ(θ2) = ratio·0.05`, the rest spread over
/// the remaining plan cells.
fn ratio_prior(ratio: f64) -> Prior {
    let commit = 0.05;
    let side = ratio * commit;
    let star = 0.4;
    let rest = (1.0 - star - commit - 2.0 * side) / 2.0;
    assert!(rest > 0.0, "ratio {ratio} leaves no mass for the remaining cells");
    Prior::new(vec![vec![star, commit], vec![side, rest], vec![side, rest]]).expect("prior")
}

/// All commitment actions pure: `A1* = {H, L}` with the `H` type living on
/// `theta_star` and `μ(θ1) = μ(θ2) = ratio·μ(H)`.
pub fn benchmark_pure(ratio: f64) -> ReputationScenario {
    ReputationScenario::new(
        motivating_game(),
        single_plan(pure(H), pure(L)),
        ratio_prior(ratio),
        DELTA,
    )
    .expect("scenario")
}

/// `A1* = {(1-ε)H + εI, L}` with `μ(θ1) = μ(θ2) = 3μ(α1*)`.
pub fn perturbed(eps: f64) -> ReputationScenario {
    ReputationScenario::new(
        motivating_game(),
        single_plan(perturbed_h(eps), pure(L)),
        ratio_prior(3.0),
        DELTA,
    )
    .expect("scenario")
}

/// `A1* = {H}`: the commitment plan plays `H` in every state.
pub fn h_only() -> ReputationScenario {
    ReputationScenario::new(
        motivating_game(),
        single_plan(pure(H), pure(H)),
        ratio_prior(3.0),
        DELTA,
    )
    .expect("scenario")
}

/// `0.5H + 0.5I`, the commitment action of [`mixed_band`].
pub fn half_h_half_i() -> MixedAction {
    MixedAction::new(vec![0.5, 0.5, 0.0]).expect("valid mixture")
}

/// Mixed commitment action `0.5H + 0.5I` on `theta_star` with
/// `μ(α1*) = 0.1` and `λ = (5, 0.3125, 0.3125)`. Its cutoffs are
/// `ψ* = (∞, 1.25, 1.25)`, so the prior statistic is `χ0 = 0.5`.
pub fn mixed_band() -> ReputationScenario {
    let prior = Prior::new(vec![
        vec![0.5, 0.1],
        vec![0.03125, 0.16875],
        vec![0.03125, 0.16875],
    ])
    .expect("prior");
    ReputationScenario::new(motivating_game(), single_plan(half_h_half_i(), pure(L)), prior, DELTA)
        .expect("scenario")
}

/// `0.1H + 0.45I + 0.45L`, the mixed commitment action of [`low_payoff`].
pub fn diffuse_action() -> MixedAction {
    MixedAction::new(vec![0.1, 0.45, 0.45]).expect("valid mixture")
}

/// Pure commitment action `H` on `theta_star` next to the mixed commitment
/// action `0.1H + 0.45I + 0.45L` in the other states; `λ(μ, H) = (10, 4, 4)`
/// lies outside the closure of the region where `G` stays the best reply.
pub fn low_payoff() -> ReputationScenario {
    let prior = Prior::new(vec![vec![0.5, 0.05], vec![0.2, 0.025], vec![0.2, 0.025]]).expect("prior");
    ReputationScenario::new(
        motivating_game(),
        single_plan(pure(H), diffuse_action()),
        prior,
        DELTA,
    )
    .expect("scenario")
}

/// `(0.7H + 0.3I, 0.3H + 0.7I)`: the tilted actions of the strategic types in
/// [`band_profile`].
pub fn tilted_actions() -> (MixedAction, MixedAction) {
    (
        MixedAction::new(vec![0.7, 0.3, 0.0]).expect("valid mixture"),
        MixedAction::new(vec![0.3, 0.7, 0.0]).expect("valid mixture"),
    )
}

/// [`mixed_band`] with strategic `theta_star` playing `L`, `theta1` and
/// `theta2` playing the tilted actions, and a myopic player 2.
pub fn band_profile() -> (ReputationScenario, StrategyProfile) {
    let s = mixed_band();
    let (t1, t2) = tilted_actions();
    let prof = StrategyProfile::stationary(&s, vec![pure(L), t1, t2], Player2Strategy::Myopic)
        .expect("profile");
    (s, prof)
}

/// Like [`band_profile`] but `theta1` and `theta2` are two-state machines
/// that soften their tilt after observing the action they lean against.
pub fn band_machine_profile() -> (ReputationScenario, StrategyProfile) {
    let s = mixed_band();
    let (t1, t2) = tilted_actions();
    let soft = |w: f64| MixedAction::new(vec![w, 1.0 - w, 0.0]).expect("valid mixture");
    let machine = |lean: MixedAction, soft: MixedAction, against: usize, toward: usize| {
        let mut b = Machine::builder(3, 3);
        let l = b.state("lean", lean);
        let z = b.state("soft", soft);
        b.on(l, Some(against), None, z).on(z, Some(toward), None, l);
        Strategy::Machine(b.build(l).expect("machine"))
    };
    let prof = StrategyProfile::new(
        &s,
        vec![
            vec![(1.0, Strategy::Stationary(pure(L)))],
            vec![(1.0, machine(t1, soft(0.6), I, H))],
            vec![(1.0, machine(t2, soft(0.4), H, I))],
        ],
        Player2Strategy::Myopic,
    )
    .expect("profile");
    (s, prof)
}
