//! Convex-hull membership as a phase-one linear program.

const PIVOT_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;

/// Whether `target` is a convex combination of `points`.
///
/// Solves `min Σ s` over `w ≥ 0, s ≥ 0` with `Σ_j w_j p_j ± s = target` and
/// `Σ w = 1` by a dense tableau simplex with Bland's rule.
pub fn in_convex_hull(target: &[f64], points: &[Vec<f64>]) -> bool {
    let n = target.len();
    let p = points.len();
    if p == 0 {
        return false;
    }
    assert!(points.iter().all(|x| x.len() == n), "point dimension mismatch");
    let rows = n + 1;
    let cols = p + rows;
    let rhs = cols;
    // One row per coordinate plus the weight-sum row, flipped to rhs >= 0.
    let mut t = vec![vec![0.0; cols + 1]; rows + 1];
    for r in 0..rows {
        let b = if r < n { target[r] } else { 1.0 };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            let a = if r < n { points[j][r] } else { 1.0 };
            t[r][j] = sign * a;
        }
        t[r][p + r] = 1.0;
        t[r][rhs] = sign * b;
    }
    // Reduced costs for artificial costs of one.
    for j in 0..=cols {
        if (p..cols).contains(&j) {
            continue;
        }
        t[rows][j] = -(0..rows).map(|r| t[r][j]).sum::<f64>();
    }
    let mut basis: Vec<usize> = (p..cols).collect();

    for _ in 0..10_000 {
        let Some(enter) = (0..cols).find(|j| t[rows][*j] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            if t[r][enter] > PIVOT_TOL {
                let ratio = t[r][rhs] / t[r][enter];
                let better = ratio < best - PIVOT_TOL
                    || (ratio <= best + PIVOT_TOL && leave.is_some_and(|l| basis[r] < basis[l]));
                if leave.is_none() || better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else {
            break;
        };
        let piv = t[r][enter];
        t[r].iter_mut().for_each(|x| *x /= piv);
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
        basis[r] = enter;
    }
    let residual: f64 = (0..rows)
        .filter(|r| basis[*r] >= p)
        .map(|r| t[r][rhs])
        .sum();
    residual <= FEAS_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_membership() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(in_convex_hull(&[0.2, 0.2], &tri));
        assert!(in_convex_hull(&[0.5, 0.5], &tri));
        assert!(in_convex_hull(&[0.0, 0.0], &tri));
        assert!(!in_convex_hull(&[0.6, 0.6], &tri));
        assert!(!in_convex_hull(&[-0.1, 0.0], &tri));
    }

    #[test]
    fn degenerate_sets() {
        assert!(!in_convex_hull(&[0.0], &[]));
        let seg = vec![vec![-1.0, 2.0], vec![3.0, -2.0]];
        assert!(in_convex_hull(&[1.0, 0.0], &seg));
        assert!(!in_convex_hull(&[1.0, 0.1], &seg));
        let dup = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(in_convex_hull(&[1.0, 1.0], &dup));
    }

    #[test]
    fn simplex_of_mixed_actions() {
        let pts: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        assert!(in_convex_hull(&[0.2, 0.3, 0.5], &pts));
        assert!(!in_convex_hull(&[0.2, 0.3, 0.4], &pts));
    }
}
