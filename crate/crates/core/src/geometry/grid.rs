//! Grid approximation of the increasing sequence `Λ⁰ ⊆ Λ¹ ⊆ …` of
//! likelihood-ratio sets from which a patient type can drag beliefs into the
//! lower region.
//!
//! Only the coordinates of states in `Θᵇ` are gridded; the others do not
//! enter the lower region and are held at zero.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{RegionContext, RegionSpec};
use crate::error::{Error, Result};

/// Budget on the number of candidate intercept vectors.
const MAX_TRIANGLES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxis {
    pub state: usize,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn max(&self) -> f64 {
        self.value(self.count - 1)
    }

    /// Nearest grid index, `None` beyond the last point.
    fn nearest(&self, x: f64) -> Option<usize> {
        let i = (x / self.step).round();
        (i >= 0.0 && (i as usize) < self.count).then_some(i as usize)
    }
}

/// Membership bitset over the row-major product of the axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRegion {
    pub axes: Vec<GridAxis>,
    pub members: Vec<bool>,
}

impl GridRegion {
    pub fn empty(axes: Vec<GridAxis>) -> Self {
        let n = axes.iter().map(|a| a.count).product();
        Self { axes, members: vec![false; n] }
    }

    pub fn from_fn(axes: Vec<GridAxis>, f: impl Fn(&[f64]) -> bool) -> Self {
        let mut r = Self::empty(axes);
        for k in 0..r.len() {
            r.members[k] = f(&r.point(k));
        }
        r
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|b| **b).count()
    }

    pub fn indices(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (d, ax) in self.axes.iter().enumerate().rev() {
            idx[d] = flat % ax.count;
            flat /= ax.count;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (i, ax)| acc * ax.count + i)
    }

    /// Coordinates of grid point `flat`, one per axis.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.indices(flat)
            .iter()
            .zip(&self.axes)
            .map(|(i, ax)| ax.value(*i))
            .collect()
    }

    /// Full likelihood vector for grid point `flat`.
    pub fn embed(&self, flat: usize, num_states: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_states];
        for (x, ax) in self.point(flat).into_iter().zip(&self.axes) {
            out[ax.state] = x;
        }
        out
    }

    fn nearest_flat(&self, x: &[f64]) -> Option<usize> {
        let idx = x
            .iter()
            .zip(&self.axes)
            .map(|(v, ax)| ax.nearest(*v))
            .collect::<Option<Vec<_>>>()?;
        Some(self.flat(&idx))
    }

    /// Membership of the grid point nearest to `x`.
    pub fn contains_nearest(&self, x: &[f64]) -> bool {
        self.nearest_flat(x).is_some_and(|k| self.members[k])
    }

    pub fn is_subset(&self, other: &GridRegion) -> bool {
        self.members.iter().zip(&other.members).all(|(a, b)| !a || *b)
    }
}

/// Symmetric Hausdorff distance between two grid sets, in grid cells.
/// Infinite if exactly one of them is empty.
pub fn hausdorff_cells(a: &GridRegion, b: &GridRegion) -> f64 {
    let pts = |r: &GridRegion| -> Vec<Vec<f64>> {
        (0..r.len())
            .filter(|k| r.members[*k])
            .map(|k| r.indices(k).into_iter().map(|i| i as f64).collect())
            .collect()
    };
    let (pa, pb) = (pts(a), pts(b));
    if pa.is_empty() && pb.is_empty() {
        return 0.0;
    }
    if pa.is_empty() || pb.is_empty() {
        return f64::INFINITY;
    }
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.par_iter()
            .map(|p| {
                to.iter()
                    .map(|q| p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
            .sqrt()
    };
    directed(&pa, &pb).max(directed(&pb, &pa))
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationConfig {
    /// Size threshold for the initial set.
    pub xi: f64,
    /// Minimum belief movement of an adversarial profile.
    pub epsilon: f64,
    pub step: f64,
    pub max: f64,
    pub max_k: usize,
    pub random_profiles: usize,
    /// Candidate intercepts per axis; the product over axes is capped.
    pub psi_candidates: usize,
    pub seed: u64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            xi: 0.1,
            epsilon: 0.2,
            step: 0.05,
            max: 4.0,
            max_k: 50,
            random_profiles: 512,
            psi_candidates: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    pub spec: RegionSpec,
    /// The lower region restricted to the grid.
    pub lower: GridRegion,
    /// `Λ⁰, Λ¹, …` up to the last computed stage.
    pub stages: Vec<GridRegion>,
    pub converged: bool,
    pub hausdorff_cells: f64,
    pub profiles_per_point: usize,
    pub triangles: usize,
}

impl IterationReport {
    pub fn limit(&self) -> &GridRegion {
        self.stages.last().expect("at least the initial stage")
    }
}

/// Per-type mixed actions over player 1's actions.
type Profile = Vec<Vec<f64>>;

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Unit directions in the nonnegative orthant.
fn directions(dim: usize, per_angle: usize) -> Vec<Vec<f64>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let angles: Vec<f64> = (0..per_angle).map(|k| half_pi * k as f64 / (per_angle - 1) as f64).collect();
    match dim {
        1 => vec![vec![1.0]],
        2 => angles.iter().map(|a| vec![a.cos(), a.sin()]).collect(),
        _ => {
            let mut out = Vec::new();
            for a in &angles {
                for b in &angles {
                    out.push(vec![a.cos() * b.cos(), a.cos() * b.sin(), a.sin()]);
                }
            }
            out
        }
    }
}

/// Adversarial profiles at likelihood point `x`: random draws, per-type
/// extremes, and near-minimal shifts of size `ε` along a grid of
/// directions.
fn profiles_at(x: &[f64], alpha: &[f64], cfg: &IterationConfig, rng: &mut ChaCha8Rng) -> Vec<Profile> {
    let d = x.len();
    let n1 = alpha.len();
    let mut out: Vec<Profile> = (0..cfg.random_profiles)
        .map(|_| (0..d).map(|_| dirichlet(rng, n1)).collect())
        .collect();

    let mut choices: Vec<Vec<f64>> = (0..n1)
        .map(|a| (0..n1).map(|b| f64::from(u8::from(a == b))).collect())
        .collect();
    choices.push(alpha.to_vec());
    let combos = choices.len().pow(d as u32);
    for mut c in 0..combos {
        let mut p = Vec::with_capacity(d);
        for _ in 0..d {
            p.push(choices[c % choices.len()].clone());
            c /= choices.len();
        }
        out.push(p);
    }

    let support: Vec<usize> = (0..n1).filter(|a| alpha[*a] > 0.0).collect();
    let outside: Vec<usize> = (0..n1).filter(|a| alpha[*a] == 0.0).collect();
    for &a in &support {
        for u in directions(d, 16) {
            for scale in [1.0, 1.05, 1.2] {
                for spill_outside in [false, true] {
                    if spill_outside && outside.is_empty() {
                        continue;
                    }
                    let mut p = Vec::with_capacity(d);
                    for i in 0..d {
                        let cut = if x[i] > 0.0 { (scale * cfg.epsilon * u[i] / x[i]).min(1.0) } else { 0.0 };
                        let keep = alpha[a] * (1.0 - cut);
                        let mut w = vec![0.0; n1];
                        w[a] = keep;
                        let rest = 1.0 - keep;
                        if spill_outside {
                            outside.iter().for_each(|b| w[*b] = rest / outside.len() as f64);
                        } else if alpha[a] < 1.0 {
                            for b in (0..n1).filter(|b| *b != a) {
                                w[b] = rest * alpha[b] / (1.0 - alpha[a]);
                            }
                        } else {
                            (0..n1).filter(|b| *b != a).for_each(|b| w[b] = rest / (n1 - 1) as f64);
                        }
                        p.push(w);
                    }
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Runs the grid iteration for the target of `ctx`.
pub fn lambda_k_iteration(ctx: &RegionContext, cfg: &IterationConfig) -> Result<IterationReport> {
    if !(cfg.xi > 0.0 && cfg.epsilon > 0.0 && cfg.step > 0.0 && cfg.max > 0.0) {
        return Err(Error::Structure("ξ, ε, grid step and grid max must be positive".into()));
    }
    let spec = ctx.lower_spec()?;
    let coords = spec.finite_coords();
    let d = coords.len();
    if d == 0 || d > 3 {
        return Err(Error::Budget(format!("grid iteration needs 1 to 3 constrained states, found {d}")));
    }
    let count = (cfg.max / cfg.step + 1e-9).floor() as usize + 1;
    if count < 10 {
        return Err(Error::Structure(format!("grid has {count} points per axis, at least 10 required")));
    }
    let axes: Vec<GridAxis> = coords.iter().map(|s| GridAxis { state: *s, step: cfg.step, count }).collect();
    let psi: Vec<f64> = coords.iter().map(|s| spec.psi[*s]).collect();
    let lower = GridRegion::from_fn(axes.clone(), |x| {
        x.iter().zip(&psi).map(|(v, p)| v / p).sum::<f64>() < spec.chi
    });

    // Candidate lower sets below the cutoffs, deduplicated by grid content.
    let per_axis = {
        let mut n = cfg.psi_candidates.max(2);
        while n.pow(d as u32) > MAX_TRIANGLES {
            n -= 1;
        }
        n
    };
    let intercepts: Vec<Vec<f64>> = psi
        .iter()
        .map(|p| {
            let lo = cfg.step / 4.0;
            let hi = p * (1.0 - 1e-4);
            (0..per_axis)
                .map(|j| lo * (hi / lo).powf(j as f64 / (per_axis - 1) as f64))
                .collect()
        })
        .collect();
    let n_tri = per_axis.pow(d as u32);
    let triangles: BTreeSet<Vec<u32>> = (0..n_tri)
        .into_par_iter()
        .map(|mut c| {
            let cut: Vec<f64> = (0..d)
                .map(|i| {
                    let v = intercepts[i][c % per_axis];
                    c /= per_axis;
                    v
                })
                .collect();
            (0..lower.len() as u32)
                .filter(|k| {
                    let x = lower.point(*k as usize);
                    x.iter().zip(&cut).map(|(v, p)| v / p).sum::<f64>() < 1.0
                })
                .collect::<Vec<u32>>()
        })
        .collect();
    let triangles: Vec<Vec<u32>> = triangles.into_iter().collect();

    let small = |k: u32| {
        lower.point(k as usize).iter().filter(|v| **v <= cfg.xi + 1e-12).count() + 1 >= d
    };
    let mut initial = GridRegion::empty(axes.clone());
    for tri in &triangles {
        if tri.iter().all(|k| small(*k)) {
            tri.iter().for_each(|k| initial.members[*k as usize] = true);
        }
    }

    // Posterior grid points of every qualifying profile, per grid point and
    // profile, one entry per supported action (None = off the grid).
    let alpha: Vec<f64> = ctx.alpha.weights().to_vec();
    let support: Vec<usize> = (0..alpha.len()).filter(|a| alpha[*a] > 0.0).collect();
    let mut profiles_per_point = 0;
    let moves: Vec<Vec<Vec<Option<u32>>>> = (0..lower.len())
        .into_par_iter()
        .map(|k| {
            if !lower.members[k] {
                return Vec::new();
            }
            let x = lower.point(k);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            profiles_at(&x, &alpha, cfg, &mut rng)
                .into_iter()
                .filter_map(|prof| {
                    let posts: Vec<Vec<f64>> = support
                        .iter()
                        .map(|&a| (0..d).map(|i| x[i] * prof[i][a] / alpha[a]).collect())
                        .collect();
                    let moved = posts.iter().any(|p| {
                        p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                            >= cfg.epsilon - 1e-12
                    });
                    moved.then(|| posts.iter().map(|p| lower.nearest_flat(p).map(|f| f as u32)).collect())
                })
                .collect()
        })
        .collect();
    if let Some(k) = (0..lower.len()).find(|k| lower.members[*k]) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        profiles_per_point = profiles_at(&lower.point(k), &alpha, cfg, &mut rng).len();
    }

    let mut stages = vec![initial];
    let mut converged = false;
    for _ in 1..=cfg.max_k {
        let prev = stages.last().expect("nonempty");
        let hat: Vec<bool> = (0..lower.len())
            .into_par_iter()
            .map(|k| {
                lower.members[k]
                    && (prev.members[k]
                        || moves[k].iter().all(|posts| {
                            posts.iter().any(|p| p.is_some_and(|f| prev.members[f as usize]))
                        }))
            })
            .collect();
        let mut next = prev.clone();
        let allowed: Vec<bool> = prev.members.iter().zip(&hat).map(|(a, b)| *a || *b).collect();
        for tri in &triangles {
            if tri.iter().all(|k| allowed[*k as usize]) {
                tri.iter().for_each(|k| next.members[*k as usize] = true);
            }
        }
        let same = next == *prev;
        stages.push(next);
        if same {
            converged = true;
            break;
        }
    }
    let hausdorff = hausdorff_cells(stages.last().expect("nonempty"), &lower);
    Ok(IterationReport {
        spec,
        lower,
        stages,
        converged,
        hausdorff_cells: hausdorff,
        profiles_per_point,
        triangles: triangles.len(),
    })
}

/// CSV of grid points with one 0/1 column per named region.
pub fn regions_csv(labels: &[String], regions: &[(&str, &GridRegion)]) -> String {
    let mut out = String::new();
    let Some((_, first)) = regions.first() else {
        return out;
    };
    let header: Vec<String> = first
        .axes
        .iter()
        .map(|a| labels[a.state].clone())
        .chain(regions.iter().map(|(n, _)| n.to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for k in 0..first.len() {
        let mut row: Vec<String> = first.point(k).iter().map(|v| format!("{v}")).collect();
        row.extend(regions.iter().map(|(_, r)| u8::from(r.members[k]).to_string()));
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn axes(count: usize) -> Vec<GridAxis> {
        (0..2).map(|s| GridAxis { state: s, step: 0.5, count }).collect()
    }

    #[test]
    fn flat_index_round_trip() {
        let r = GridRegion::empty(vec![
            GridAxis { state: 1, step: 0.1, count: 4 },
            GridAxis { state: 2, step: 0.1, count: 3 },
        ]);
        for k in 0..r.len() {
            assert_eq!(r.flat(&r.indices(k)), k);
        }
        assert_eq!(r.embed(r.flat(&[2, 1]), 3), vec![0.0, 0.2, 0.1]);
    }

    #[test]
    fn hausdorff_brute_force() {
        let a = GridRegion::from_fn(axes(5), |x| x[0] + x[1] <= 1.0);
        let b = GridRegion::from_fn(axes(5), |x| x[0] + x[1] <= 2.0);
        // In index units a is i + j <= 2 and b is i + j <= 4; (4, 0) is two
        // cells from (2, 0) while (2, 2) is only a diagonal away from (1, 1).
        assert_eq!(hausdorff_cells(&a, &b), 2.0);
        assert_eq!(hausdorff_cells(&a, &a), 0.0);
        assert_eq!(hausdorff_cells(&a, &GridRegion::empty(axes(5))), f64::INFINITY);
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let a = GridRegion::from_fn(axes(4), |x| x[0] <= 0.5);
        let labels = vec!["x".to_string(), "y".to_string()];
        let csv = regions_csv(&labels, &[("a", &a)]);
        assert_eq!(csv.lines().count(), 1 + 16);
        assert_eq!(csv.lines().next().unwrap(), "x,y,a");
    }

    #[test]
    fn coarse_grid_refused() {
        let s = samples::benchmark_pure(3.0);
        let ctx = RegionContext::new(&s, samples::THETA_STAR, &samples::pure(samples::H)).unwrap();
        let cfg = IterationConfig { step: 0.5, max: 4.0, ..IterationConfig::default() };
        assert!(lambda_k_iteration(&ctx, &cfg).is_err());
    }

    #[test]
    fn coarse_iteration_is_monotone_and_contained() {
        let s = samples::benchmark_pure(3.0);
        let ctx = RegionContext::new(&s, samples::THETA_STAR, &samples::pure(samples::H)).unwrap();
        let cfg = IterationConfig {
            step: 0.2,
            max: 4.0,
            random_profiles: 32,
            psi_candidates: 16,
            ..IterationConfig::default()
        };
        let rep = lambda_k_iteration(&ctx, &cfg).unwrap();
        for w in rep.stages.windows(2) {
            assert!(w[0].is_subset(&w[1]));
        }
        for st in &rep.stages {
            assert!(st.is_subset(&rep.lower));
        }
        // The axes up to ξ belong to the initial set.
        let init = &rep.stages[0];
        assert!(init.members[init.flat(&[0, 0])]);
        assert!(init.members[init.flat(&[10, 0])]);
        assert!(init.members[init.flat(&[0, 14])]);
    }
}
