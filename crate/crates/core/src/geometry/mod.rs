//! Likelihood-ratio vectors and the regions of them on which player 2 keeps
//! playing the complete-information best reply to a commitment action.
//!
//! For a target `(θ*, α1*)` with unique best reply `a2*` in `θ*`, player 2's
//! score for `a2` at likelihood vector `λ` is
//! `u2(φ, α1*, a2) + Σ_θ λ_θ u2(θ, α1*, a2)`, where `φ` is the state
//! distribution conditional on the commitment type. Every region here is
//! defined by comparing these affine scores.

mod grid;
mod hull;

pub use grid::{
    hausdorff_cells, lambda_k_iteration, regions_csv, GridAxis, GridRegion, IterationConfig,
    IterationReport,
};
pub use hull::in_convex_hull;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{MixedAction, ReputationScenario, TIE_TOL};

/// Box vertices are enumerated up to this dimension.
pub const MAX_VERTEX_DIM: usize = 20;

/// Per-state ratios of strategic-type mass to the mass of one commitment type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodVector {
    pub entries: Vec<f64>,
    pub alpha: MixedAction,
}

impl LikelihoodVector {
    pub fn new(entries: Vec<f64>, alpha: MixedAction) -> Result<Self> {
        if let Some(x) = entries.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Structure(format!("likelihood ratio {x} must be finite and nonnegative")));
        }
        Ok(Self { entries, alpha })
    }
}

/// Prior state distribution conditional on the commitment type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommitmentConditional {
    pub phi: Vec<f64>,
}

/// `λ_θ(μ, α1*) = μ(θ)/μ(α1*)` together with `φ_{α1*}`.
pub fn prior_likelihood(
    s: &ReputationScenario,
    alpha: &MixedAction,
) -> Result<(LikelihoodVector, CommitmentConditional)> {
    s.require_commitment_action(alpha)?;
    let m = s.game.num_states();
    let mut phi = vec![0.0; m];
    for (state, plan) in s.commitment_cells(alpha) {
        phi[state] += s.prior.get(state, crate::game::Characteristic::Plan(plan));
    }
    let mass: f64 = phi.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::Precondition(format!(
            "commitment type {} has zero prior mass",
            s.game.describe1(alpha)
        )));
    }
    phi.iter_mut().for_each(|p| *p /= mass);
    let entries = (0..m).map(|st| s.prior.strategic(st) / mass).collect();
    Ok((LikelihoodVector::new(entries, alpha.clone())?, CommitmentConditional { phi }))
}

/// Cutoffs `ψ` (possibly infinite) and level `χ` of the linear region
/// `{λ ≥ 0 : Σ_θ λ_θ/ψ_θ < χ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSpec {
    #[serde(serialize_with = "ser_extended")]
    pub psi: Vec<f64>,
    pub chi: f64,
}

fn ser_extended<S: serde::Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        if x.is_finite() {
            seq.serialize_element(x)?;
        } else {
            seq.serialize_element("inf")?;
        }
    }
    seq.end()
}

impl RegionSpec {
    pub fn new(psi: Vec<f64>, chi: f64) -> Result<Self> {
        if psi.iter().any(|p| !(*p > 0.0)) || !(chi > 0.0) {
            return Err(Error::Structure(format!("region needs ψ > 0 and χ > 0, got {psi:?}, {chi}")));
        }
        Ok(Self { psi, chi })
    }

    pub fn with_chi(&self, chi: f64) -> Self {
        Self { psi: self.psi.clone(), chi }
    }

    /// Coordinates with a finite cutoff.
    pub fn finite_coords(&self) -> Vec<usize> {
        (0..self.psi.len()).filter(|i| self.psi[*i].is_finite()).collect()
    }
}

/// `Σ_θ λ_θ/ψ_θ`, skipping infinite cutoffs.
pub fn chi_statistic(lambda: &[f64], spec: &RegionSpec) -> f64 {
    lambda
        .iter()
        .zip(&spec.psi)
        .filter(|(_, p)| p.is_finite())
        .map(|(l, p)| l / p)
        .sum()
}

/// Membership in `{λ : Σ λ_θ/ψ_θ < χ}`.
pub fn in_lambda_underline(lambda: &[f64], spec: &RegionSpec) -> bool {
    chi_statistic(lambda, spec) < spec.chi
}

/// Result of the `ψ*_θ` computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiStar {
    pub value: f64,
    /// `a2*` is already beaten under `φ_{α1*}` alone.
    pub rejected_at_zero: bool,
}

/// Scores of player 2's actions against one commitment action, split into
/// the commitment-conditional part and one slope per state.
#[derive(Debug, Clone)]
pub struct RegionContext {
    pub theta_star: usize,
    pub alpha: MixedAction,
    pub a2_star: usize,
    pub phi: Vec<f64>,
    pub prior_lambda: Vec<f64>,
    /// `base[a2] = u2(φ, α1*, a2)`
    base: Vec<f64>,
    /// `slope[θ][a2] = u2(θ, α1*, a2)`
    slope: Vec<Vec<f64>>,
    /// Whether `a2* ∈ BR2(θ, α1*)`, per state.
    replies_in_state: Vec<bool>,
}

impl RegionContext {
    pub fn new(s: &ReputationScenario, theta_star: usize, alpha: &MixedAction) -> Result<Self> {
        let g = &s.game;
        if theta_star >= g.num_states() {
            return Err(Error::Structure(format!("state index {theta_star} out of range")));
        }
        let a2_star = g.unique_best_reply(theta_star, alpha)?;
        let (lambda, cond) = prior_likelihood(s, alpha)?;
        let n2 = g.num_actions2();
        let base = (0..n2)
            .map(|a2| g.u2.expected(&cond.phi, alpha, a2))
            .collect::<Result<Vec<_>>>()?;
        let slope: Vec<Vec<f64>> = (0..g.num_states())
            .map(|st| (0..n2).map(|a2| g.u2.against(st, alpha, a2)).collect())
            .collect();
        let replies_in_state = (0..g.num_states())
            .map(|st| g.best_replies_in_state(st, alpha).contains(&a2_star))
            .collect();
        Ok(Self {
            theta_star,
            alpha: alpha.clone(),
            a2_star,
            phi: cond.phi,
            prior_lambda: lambda.entries,
            base,
            slope,
            replies_in_state,
        })
    }

    pub fn num_states(&self) -> usize {
        self.slope.len()
    }

    fn num_actions2(&self) -> usize {
        self.base.len()
    }

    /// Player 2's score for `a2` at likelihood vector `lambda`.
    pub fn score(&self, lambda: &[f64], a2: usize) -> f64 {
        self.base[a2]
            + lambda
                .iter()
                .zip(&self.slope)
                .map(|(l, row)| l * row[a2])
                .sum::<f64>()
    }

    /// `score(a2*) - max_{a2 ≠ a2*} score(a2)`; positive iff `a2*` is the
    /// strict argmax.
    pub fn margin(&self, lambda: &[f64]) -> f64 {
        let best = self.score(lambda, self.a2_star);
        (0..self.num_actions2())
            .filter(|a2| *a2 != self.a2_star)
            .map(|a2| best - self.score(lambda, a2))
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership in `Λ̄`: `a2*` is the unique argmax with margin above the
    /// tie tolerance.
    pub fn in_lambda_bar(&self, lambda: &[f64]) -> bool {
        self.margin(lambda) > TIE_TOL
    }

    /// Smallest margin over the box `[0, λ]`, attained at a vertex because
    /// each score difference is affine in `λ'`.
    pub fn box_margin(&self, lambda: &[f64]) -> Result<f64> {
        let m = lambda.len();
        if m > MAX_VERTEX_DIM {
            return Err(Error::Budget(format!("{m} coordinates exceed the vertex bound {MAX_VERTEX_DIM}")));
        }
        let mut worst = f64::INFINITY;
        let mut vertex = vec![0.0; m];
        for mask in 0u32..(1u32 << m) {
            for (i, v) in vertex.iter_mut().enumerate() {
                *v = if mask >> i & 1 == 1 { lambda[i] } else { 0.0 };
            }
            worst = worst.min(self.margin(&vertex));
        }
        Ok(worst)
    }

    /// Membership in `Λ`: every `0 ≤ λ' ≤ λ` lies in `Λ̄`.
    pub fn in_lambda(&self, lambda: &[f64]) -> Result<bool> {
        Ok(self.box_margin(lambda)? > TIE_TOL)
    }

    /// `Θᵇ`: states in which `a2*` is not a best reply to `α1*`.
    pub fn theta_b(&self) -> Vec<usize> {
        (0..self.num_states()).filter(|st| !self.replies_in_state[*st]).collect()
    }

    /// `ψ*_θ`: the largest weight on state `θ` keeping `a2*` in the argmax.
    pub fn psi_star(&self, state: usize) -> PsiStar {
        if self.replies_in_state[state] {
            return PsiStar { value: f64::INFINITY, rejected_at_zero: false };
        }
        let a = self.a2_star;
        let mut value = f64::INFINITY;
        for b in (0..self.num_actions2()).filter(|b| *b != a) {
            let gap = self.base[a] - self.base[b];
            if gap < -TIE_TOL {
                return PsiStar { value: 0.0, rejected_at_zero: true };
            }
            let closing = self.slope[state][b] - self.slope[state][a];
            if closing > 0.0 {
                value = value.min(gap.max(0.0) / closing);
            }
        }
        PsiStar { value, rejected_at_zero: false }
    }

    /// `ψ*` for every state, infinite off `Θᵇ`, with `χ = 1`.
    pub fn lower_spec(&self) -> Result<RegionSpec> {
        let psi = (0..self.num_states())
            .map(|st| {
                let p = self.psi_star(st);
                if p.rejected_at_zero {
                    Err(Error::Precondition(
                        "a2* is not a best reply under the commitment-conditional belief".into(),
                    ))
                } else {
                    Ok(p.value)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        RegionSpec::new(psi, 1.0)
    }
}

/// `Λ̄` membership for an explicit scenario and target.
pub fn in_lambda_bar(
    lambda: &[f64],
    theta_star: usize,
    alpha: &MixedAction,
    s: &ReputationScenario,
) -> Result<bool> {
    Ok(RegionContext::new(s, theta_star, alpha)?.in_lambda_bar(lambda))
}

/// `Λ` membership via the `2^m` box vertices.
pub fn in_lambda(
    lambda: &[f64],
    theta_star: usize,
    alpha: &MixedAction,
    s: &ReputationScenario,
) -> Result<bool> {
    RegionContext::new(s, theta_star, alpha)?.in_lambda(lambda)
}

/// `Θᵇ` does not need a unique best reply anywhere except in `θ*`.
pub fn theta_b_set(theta_star: usize, alpha: &MixedAction, s: &ReputationScenario) -> Result<Vec<usize>> {
    Ok(RegionContext::new(s, theta_star, alpha)?.theta_b())
}

pub fn psi_star(
    state: usize,
    theta_star: usize,
    alpha: &MixedAction,
    s: &ReputationScenario,
) -> Result<PsiStar> {
    Ok(RegionContext::new(s, theta_star, alpha)?.psi_star(state))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitoringBound {
    pub value: f64,
    /// The bound only says something when `χ0 < 1`.
    pub meaningful: bool,
}

/// `(1-χ0)·v_θ*(α1*) + χ0·min_a2 u1(θ*, α1*, a2)`.
pub fn imperfect_monitoring_bound(
    s: &ReputationScenario,
    theta_star: usize,
    alpha: &MixedAction,
    chi0: f64,
) -> Result<MonitoringBound> {
    let v = s.commitment_payoff(theta_star, alpha)?;
    let worst = (0..s.game.num_actions2())
        .map(|a2| s.game.u1.against(theta_star, alpha, a2))
        .fold(f64::INFINITY, f64::min);
    // Written as a correction to v so that chi0 = 0 returns v untouched.
    let value = v + chi0 * (worst - v);
    Ok(MonitoringBound { value, meaningful: (0.0..1.0).contains(&chi0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{self, H, THETA1, THETA2, THETA_STAR};

    fn pure_h_ctx() -> RegionContext {
        RegionContext::new(&samples::benchmark_pure(3.0), THETA_STAR, &samples::pure(H)).unwrap()
    }

    /// Independent oracle: brute-force argmax of the explicit score sum.
    fn argmax_oracle(s: &ReputationScenario, alpha: &MixedAction, phi: &[f64], lambda: &[f64]) -> Vec<usize> {
        let g = &s.game;
        let scores: Vec<f64> = (0..g.num_actions2())
            .map(|a2| {
                let mut v = 0.0;
                for st in 0..g.num_states() {
                    for a1 in 0..g.num_actions1() {
                        v += (phi[st] + lambda[st]) * alpha.prob(a1) * g.u2.at(st, a1, a2);
                    }
                }
                v
            })
            .collect();
        crate::game::argmax_set(scores)
    }

    #[test]
    fn prior_likelihood_benchmark() {
        let s = samples::benchmark_pure(3.0);
        let (lambda, cond) = prior_likelihood(&s, &samples::pure(H)).unwrap();
        assert!((lambda.entries[THETA1] - 3.0).abs() < 1e-12);
        assert!((lambda.entries[THETA2] - 3.0).abs() < 1e-12);
        assert_eq!(cond.phi, vec![1.0, 0.0, 0.0]);
        let s1 = samples::benchmark_pure(1.0);
        let (l1, _) = prior_likelihood(&s1, &samples::pure(H)).unwrap();
        assert!((l1.entries[THETA1] - 1.0).abs() < 1e-12);
        assert!(matches!(
            prior_likelihood(&s, &samples::pure(samples::I)),
            Err(Error::UnknownCommitmentAction(_))
        ));
    }

    #[test]
    fn lambda_bar_examples() {
        let ctx = pure_h_ctx();
        let s = samples::benchmark_pure(3.0);
        assert!(ctx.in_lambda_bar(&[0.0, 2.0, 2.0]));
        assert_eq!(argmax_oracle(&s, &samples::pure(H), &ctx.phi, &[0.0, 2.0, 2.0]), vec![0]);
        assert!(!ctx.in_lambda_bar(&[0.0, 3.0, 0.0]));
        assert_eq!(argmax_oracle(&s, &samples::pure(H), &ctx.phi, &[0.0, 3.0, 0.0]), vec![0, 1]);
        assert!(ctx.in_lambda_bar(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn lambda_vertex_examples() {
        let ctx = pure_h_ctx();
        for star in [0.0, 1.0, 50.0] {
            assert!(ctx.in_lambda(&[star, 2.0, 2.0]).unwrap());
        }
        assert!(!ctx.in_lambda(&[0.0, 4.0, 4.0]).unwrap());
        assert!(!ctx.in_lambda_bar(&[0.0, 4.0, 0.0]));
        assert!(ctx.in_lambda(&[0.0, 0.0, 0.0]).unwrap());
        assert!(ctx.in_lambda(&vec![0.0; 21]).is_err());
    }

    #[test]
    fn theta_b_examples() {
        let s = samples::benchmark_pure(3.0);
        let h = samples::pure(H);
        assert_eq!(theta_b_set(THETA_STAR, &h, &s).unwrap(), vec![THETA1, THETA2]);
        assert_eq!(theta_b_set(THETA1, &h, &s).unwrap(), vec![THETA_STAR, THETA2]);
    }

    #[test]
    fn theta_b_empty_for_private_values() {
        let base = samples::benchmark_pure(3.0);
        let g = &base.game;
        let u2 = crate::game::PayoffTensor::from_fn(3, 3, 3, |_, a1, a2| g.u2.at(0, a1, a2));
        let game = crate::game::StageGame::new(
            g.states.clone(),
            g.actions1.clone(),
            g.actions2.clone(),
            g.u1.clone(),
            u2,
        )
        .unwrap();
        let s = ReputationScenario::new(game, base.commitments.clone(), base.prior.clone(), 0.9).unwrap();
        assert!(theta_b_set(THETA_STAR, &samples::pure(H), &s).unwrap().is_empty());
    }

    /// Scan oracle: largest ψ on a 1e-3 grid of [0, 10] keeping a2* in the
    /// explicit argmax.
    fn psi_scan(s: &ReputationScenario, ctx: &RegionContext, state: usize) -> f64 {
        let mut best = f64::NAN;
        for k in 0..=10_000 {
            let psi = k as f64 * 1e-3;
            let mut lambda = vec![0.0; s.game.num_states()];
            lambda[state] = psi;
            if argmax_oracle(s, &ctx.alpha, &ctx.phi, &lambda).contains(&ctx.a2_star) {
                best = psi;
            }
        }
        best
    }

    #[test]
    fn psi_star_examples() {
        let s = samples::benchmark_pure(3.0);
        let ctx = pure_h_ctx();
        for st in [THETA1, THETA2] {
            let p = ctx.psi_star(st);
            assert!(!p.rejected_at_zero);
            assert!((p.value - 3.0).abs() < 1e-12);
            assert!((psi_scan(&s, &ctx, st) - p.value).abs() <= 1e-3);
        }
        assert_eq!(ctx.psi_star(THETA_STAR).value, f64::INFINITY);
    }

    #[test]
    fn psi_star_rejected_at_zero() {
        // Commitment type living on theta1: G loses to M1 under φ alone.
        let mut s = samples::benchmark_pure(3.0);
        s.commitments.plans[0].actions = vec![samples::pure(samples::L), samples::pure(H), samples::pure(samples::L)];
        let ctx = RegionContext::new(&s, THETA_STAR, &samples::pure(H)).unwrap();
        let p = ctx.psi_star(THETA1);
        assert!(p.rejected_at_zero);
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn lower_region_examples() {
        let spec = RegionSpec::new(vec![f64::INFINITY, 3.0, 3.0], 1.0).unwrap();
        assert!(in_lambda_underline(&[7.0, 1.0, 1.0], &spec));
        assert!((chi_statistic(&[7.0, 1.0, 1.0], &spec) - 2.0 / 3.0).abs() < 1e-15);
        assert!(!in_lambda_underline(&[0.0, 3.0, 3.0], &spec));
        assert!(in_lambda_underline(&[0.0, 0.0, 0.0], &spec));
        assert_eq!(chi_statistic(&[0.0, 0.0, 0.0], &spec), 0.0);
        assert_eq!(chi_statistic(&[0.0, 3.0, 0.0], &spec), 1.0);
        assert_eq!(pure_h_ctx().lower_spec().unwrap(), spec);
    }

    #[test]
    fn monitoring_bound_examples() {
        let s = samples::benchmark_pure(3.0);
        let h = samples::pure(H);
        let b = imperfect_monitoring_bound(&s, THETA_STAR, &h, 2.0 / 3.0).unwrap();
        assert_eq!(b.value, 0.0);
        assert!(b.meaningful);
        assert_eq!(imperfect_monitoring_bound(&s, THETA_STAR, &h, 0.0).unwrap().value, 1.0);
        assert_eq!(imperfect_monitoring_bound(&s, THETA_STAR, &h, 1.0).unwrap().value, -0.5);
        assert!(!imperfect_monitoring_bound(&s, THETA_STAR, &h, 1.5).unwrap().meaningful);
    }

    #[test]
    fn lower_region_implies_coordinate_bounds() {
        let ctx = pure_h_ctx();
        let spec = ctx.lower_spec().unwrap();
        for (x, y) in [(2.9, 0.0), (1.4, 1.5), (0.0, 2.99)] {
            let l = [0.0, x, y];
            assert!(in_lambda_underline(&l, &spec));
            assert!(l[THETA1] < spec.psi[THETA1] && l[THETA2] < spec.psi[THETA2]);
        }
    }
}
