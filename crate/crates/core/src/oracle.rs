//! Brute-force reference solutions for small simplices.
//!
//! [`grid_map_search`] enumerates every point `i / m` of a regular simplex grid and keeps the
//! best entropic log-joint; [`golden_section_map`] is a second, unrelated route for `K = 2`.
//! Neither touches the fixed-point solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{check_strength, log_joint_raw, xlogx};
use crate::simplex::{CountVector, SimplexVector};

/// Largest number of grid points the oracle will enumerate.
pub const MAX_GRID_POINTS: f64 = 1e8;
/// Supported simplex dimensions.
pub const MIN_GRID_DIM: usize = 2;
pub const MAX_GRID_DIM: usize = 4;
/// A pairwise move counts as an improvement only if it gains more than this.
pub const LOCAL_IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: f64,
    k: usize,
    divisions: u64,
}

impl GridSpec {
    pub fn new(resolution: f64, k: usize) -> Result<Self> {
        if !(MIN_GRID_DIM..=MAX_GRID_DIM).contains(&k) {
            return Err(Error::InvalidInput(format!(
                "grid oracle supports {MIN_GRID_DIM} <= K <= {MAX_GRID_DIM}, got K = {k}"
            )));
        }
        if !(resolution > 0.0 && resolution <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must lie in (0, 0.5], got {resolution}"
            )));
        }
        let divisions = (1.0 / resolution).round();
        let spec = Self {
            resolution,
            k,
            divisions: divisions as u64,
        };
        let size = spec.size();
        if size > MAX_GRID_POINTS {
            return Err(Error::Resource(format!(
                "grid with resolution {resolution} on K = {k} has {size:.3e} points, above the {MAX_GRID_POINTS:e} guard"
            )));
        }
        Ok(spec)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    /// `m = round(1 / resolution)`; grid coordinates are `i / m`.
    pub fn divisions(&self) -> u64 {
        self.divisions
    }

    /// Number of grid points, `C(m + K - 1, K - 1)`.
    pub fn size(&self) -> f64 {
        let m = self.divisions as f64;
        (1..self.k).fold(1.0, |acc, j| acc * (m + j as f64) / j as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub theta: SimplexVector,
    #[serde(with = "crate::ext_f64")]
    pub value: f64,
    pub grid_points: u64,
}

/// Exhaustive maximization of the entropic log-joint over the grid.
///
/// Boundary points take part (ranked via the `-inf` sentinel); ties go to the
/// lexicographically smallest theta.
pub fn grid_map_search(counts: &CountVector, a: f64, spec: &GridSpec) -> Result<GridResult> {
    check_strength(a)?;
    let k = spec.dim();
    if counts.len() != k {
        return Err(Error::InvalidInput(format!(
            "counts have {} categories, grid is for K = {k}",
            counts.len()
        )));
    }
    let m = spec.divisions() as usize;
    let c = counts.as_slice();
    let coords: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    let xlx: Vec<f64> = coords.iter().copied().map(xlogx).collect();
    let logs: Vec<f64> = coords.iter().map(|t| t.ln()).collect();

    // Same arithmetic as `log_joint_raw`, with the per-coordinate terms tabulated.
    let score = |idx: &[usize]| -> f64 {
        let prior: f64 = idx.iter().map(|&i| xlx[i]).sum();
        let ll: f64 = idx
            .iter()
            .zip(c)
            .map(|(&i, &ck)| {
                if ck == 0.0 {
                    0.0
                } else if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    ck * logs[i]
                }
            })
            .sum();
        a * prior + ll
    };

    let mut idx = vec![0usize; k];
    idx[k - 1] = m;
    let mut best_idx = idx.clone();
    let mut best = score(&idx);
    let mut points: u64 = 1;
    // Lexicographic successor over compositions of m into k parts.
    while next_composition(&mut idx, m) {
        points += 1;
        let v = score(&idx);
        if v > best {
            best = v;
            best_idx.copy_from_slice(&idx);
        }
    }

    let theta = SimplexVector::new(best_idx.iter().map(|&i| coords[i]).collect())?;
    debug_assert_eq!(best, log_joint_raw(theta.as_slice(), c, a));
    Ok(GridResult {
        theta,
        value: best,
        grid_points: points,
    })
}

/// Advances `idx` (first `k - 1` free, last = remainder) to the next composition in
/// lexicographic order. Returns `false` after the last one.
fn next_composition(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let free = k - 1;
    // find the rightmost free coordinate that can still grow
    let mut used: usize = idx[..free].iter().sum();
    for j in (0..free).rev() {
        if used < m {
            idx[j] += 1;
            for slot in idx.iter_mut().take(free).skip(j + 1) {
                *slot = 0;
            }
            let prefix: usize = idx[..free].iter().sum();
            idx[free] = m - prefix;
            return true;
        }
        used -= idx[j];
    }
    false
}

/// Largest gain in log-joint from moving `step` of mass from one category to another.
///
/// Pairs whose source entry is below `step` are skipped; returns `-inf` if no pair qualifies.
pub fn max_pairwise_gain(theta: &SimplexVector, counts: &CountVector, a: f64, step: f64) -> f64 {
    let t = theta.as_slice();
    let c = counts.as_slice();
    let base = log_joint_raw(t, c, a);
    let mut moved = t.to_vec();
    let mut best = f64::NEG_INFINITY;
    for j in 0..t.len() {
        if t[j] < step {
            continue;
        }
        for k in 0..t.len() {
            if j == k {
                continue;
            }
            moved[j] = t[j] - step;
            moved[k] = t[k] + step;
            let gain = log_joint_raw(&moved, c, a) - base;
            moved[j] = t[j];
            moved[k] = t[k];
            // -inf - -inf is NaN: no improvement
            if gain > best {
                best = gain;
            }
        }
    }
    best
}

/// True iff no pairwise mass move of size `step` improves the log-joint by more than
/// [`LOCAL_IMPROVEMENT_TOL`].
pub fn local_optimality_check(
    theta: &SimplexVector,
    counts: &CountVector,
    a: f64,
    step: f64,
) -> bool {
    max_pairwise_gain(theta, counts, a, step) <= LOCAL_IMPROVEMENT_TOL
}

/// `K = 2` maximization of the log-joint over `theta_0 ∈ [0, 1]`: a coarse scan picks the best
/// bracket, then golden-section search refines it to width `tol`.
///
/// Returns `(theta_0, value)`.
pub fn golden_section_map(counts: &CountVector, a: f64, tol: f64) -> Result<(f64, f64)> {
    check_strength(a)?;
    if counts.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "golden-section oracle needs K = 2, got K = {}",
            counts.len()
        )));
    }
    let c = counts.as_slice();
    let f = |x: f64| log_joint_raw(&[x, 1.0 - x], c, a);

    const SCAN: usize = 1000;
    let (best_i, mut best_v) = (0..=SCAN).map(|i| (i, f(i as f64 / SCAN as f64))).fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
    );
    let mut best_x = best_i as f64 / SCAN as f64;

    let mut lo = best_i.saturating_sub(1) as f64 / SCAN as f64;
    let mut hi = (best_i + 1).min(SCAN) as f64 / SCAN as f64;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    Ok((best_x, best_v))
}

/// L-infinity distance between `x` and `y`, minimized over permutations that only exchange
/// categories with equal counts.
pub fn linf_up_to_ties(x: &SimplexVector, y: &SimplexVector, counts: &CountVector) -> f64 {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    assert_eq!(x.len(), counts.len(), "dimension mismatch");
    let k = x.len();
    let mut used = vec![false; k];
    let mut best = f64::INFINITY;
    search_ties(
        x.as_slice(),
        y.as_slice(),
        counts.as_slice(),
        0,
        0.0,
        &mut used,
        &mut best,
    );
    best
}

fn search_ties(
    x: &[f64],
    y: &[f64],
    counts: &[f64],
    pos: usize,
    current: f64,
    used: &mut [bool],
    best: &mut f64,
) {
    if current >= *best {
        return;
    }
    if pos == x.len() {
        *best = current;
        return;
    }
    for j in 0..y.len() {
        if used[j] || counts[j] != counts[pos] {
            continue;
        }
        used[j] = true;
        let d = current.max((x[pos] - y[j]).abs());
        search_ties(x, y, counts, pos + 1, d, used, best);
        used[j] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::log_joint;
    use crate::simplex::ml_estimate;
    use approx::assert_abs_diff_eq;

    fn cv(v: &[f64]) -> CountVector {
        CountVector::new(v.to_vec()).unwrap()
    }

    fn sv(v: &[f64]) -> SimplexVector {
        SimplexVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn compositions_enumerated_in_order() {
        let mut idx = vec![0, 0, 3];
        let mut seen = vec![idx.clone()];
        while next_composition(&mut idx, 3) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[1], vec![0, 1, 2]);
        assert_eq!(seen[4], vec![1, 0, 2]);
        assert_eq!(seen.last().unwrap(), &vec![3, 0, 0]);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_size_matches_enumeration() {
        let spec = GridSpec::new(0.1, 3).unwrap();
        assert_eq!(spec.size(), 66.0);
        let r = grid_map_search(&cv(&[1.0, 2.0, 3.0]), 0.5, &spec).unwrap();
        assert_eq!(r.grid_points, 66);
        let spec = GridSpec::new(0.25, 4).unwrap();
        let r = grid_map_search(&cv(&[1.0, 0.0, 3.0, 0.0]), 0.5, &spec).unwrap();
        assert_eq!(r.grid_points as f64, spec.size());
    }

    #[test]
    fn grid_spec_validation() {
        assert!(matches!(
            GridSpec::new(0.01, 5),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            GridSpec::new(0.01, 1),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            GridSpec::new(0.6, 2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            GridSpec::new(0.0, 2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(GridSpec::new(1e-3, 4), Err(Error::Resource(_))));
        assert!(GridSpec::new(1e-6, 2).is_ok());
    }

    #[test]
    fn grid_ml_case() {
        let counts = cv(&[6.0, 4.0]);
        let r = grid_map_search(&counts, 0.0, &GridSpec::new(1e-3, 2).unwrap()).unwrap();
        assert_eq!(r.theta.as_slice(), &[0.6, 0.4]);
        assert_abs_diff_eq!(
            r.value,
            6.0 * 0.6f64.ln() + 4.0 * 0.4f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn grid_symmetric_case() {
        let r =
            grid_map_search(&cv(&[2.0, 2.0, 2.0]), 0.0, &GridSpec::new(0.01, 3).unwrap()).unwrap();
        for t in r.theta.iter() {
            assert!((t - 1.0 / 3.0).abs() <= 0.01);
        }
    }

    #[test]
    fn grid_ranks_boundary_points() {
        // zero count on category 1 with a > 0: the point mass wins
        let r = grid_map_search(&cv(&[3.0, 0.0]), 2.0, &GridSpec::new(1e-3, 2).unwrap()).unwrap();
        assert_eq!(r.theta.as_slice(), &[1.0, 0.0]);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn grid_ties_break_lexicographically() {
        // no data, strong prior: both point masses score 0
        let r = grid_map_search(&cv(&[0.0, 0.0]), 1.0, &GridSpec::new(0.1, 2).unwrap()).unwrap();
        assert_eq!(r.theta.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn grid_value_is_log_joint_of_theta() {
        let counts = cv(&[3.0, 2.0, 1.0]);
        let r = grid_map_search(&counts, 1.5, &GridSpec::new(0.02, 3).unwrap()).unwrap();
        assert_eq!(r.value, log_joint(&r.theta, &counts, 1.5).unwrap());
    }

    #[test]
    fn local_check_examples() {
        let counts = cv(&[6.0, 4.0]);
        let ml = ml_estimate(&counts).unwrap();
        assert!(local_optimality_check(&ml, &counts, 0.0, 1e-4));
        assert!(!local_optimality_check(
            &sv(&[0.5, 0.5]),
            &counts,
            0.0,
            1e-4
        ));
    }

    #[test]
    fn local_check_skips_small_sources() {
        let counts = cv(&[3.0, 0.0]);
        let gain = max_pairwise_gain(&sv(&[1.0, 0.0]), &counts, 1.0, 1e-3);
        assert!(gain < 0.0);
        let gain = max_pairwise_gain(&sv(&[1.0, 0.0]), &cv(&[0.0, 0.0]), 1.0, 2.0);
        assert_eq!(gain, f64::NEG_INFINITY);
    }

    #[test]
    fn golden_section_ml() {
        let (x, v) = golden_section_map(&cv(&[6.0, 4.0]), 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(x, 0.6, epsilon = 1e-8);
        assert_abs_diff_eq!(v, 6.0 * 0.6f64.ln() + 4.0 * 0.4f64.ln(), epsilon = 1e-12);
        assert!(golden_section_map(&cv(&[1.0, 1.0, 1.0]), 0.0, 1e-9).is_err());
    }

    #[test]
    fn tie_permutations() {
        let counts = cv(&[5.0, 5.0, 1.0]);
        let x = sv(&[0.7, 0.2, 0.1]);
        let y = sv(&[0.2, 0.7, 0.1]);
        assert_eq!(linf_up_to_ties(&x, &y, &counts), 0.0);
        // category 2 is not tied with the others
        let z = sv(&[0.1, 0.2, 0.7]);
        assert_abs_diff_eq!(linf_up_to_ties(&x, &z, &counts), 0.6, epsilon = 1e-15);
        let untied = cv(&[1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(linf_up_to_ties(&x, &y, &untied), 0.5, epsilon = 1e-15);
    }
}
