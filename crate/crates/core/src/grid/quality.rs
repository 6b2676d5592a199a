//! Whole-map quality metrics: entropy, coverage, RMSE and SSIM.
//!
//! All metrics operate on the probability view of the grid with
//! never-observed cells at p = 0.5 (maximum ignorance).

use super::{Cell, CellState, OccupancyGrid, UNKNOWN_RAW};
use crate::error::MapError;

/// Binary Shannon entropy of an occupancy probability, in bits.
///
/// Returns `-(p log2 p + (1-p) log2 (1-p))`, with the limit convention
/// of 0 at p = 0 and p = 1. Maximum 1.0 at p = 0.5.
pub fn cell_entropy(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let q = 1.0 - p;
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if q > 0.0 {
        h -= q * q.log2();
    }
    h
}

/// Mean per-cell binary entropy of the map, in `[0, 1]` bits per cell.
///
/// 1.0 iff every cell sits at p = 0.5 (e.g. an all-unknown grid), 0.0
/// iff every cell is saturated at p = 0 or p = 1.
pub fn map_entropy(grid: &OccupancyGrid) -> f64 {
    let n = grid.len();
    assert!(n > 0, "map_entropy needs a non-empty grid");
    let sum: f64 = (0..n).map(|i| cell_entropy(grid.probability_at(i))).sum();
    sum / n as f64
}

fn check_dims(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<(), MapError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MapError::DimensionMismatch {
            a_width: a.width(),
            a_height: a.height(),
            b_width: b.width(),
            b_height: b.height(),
        });
    }
    Ok(())
}

/// Mark the observable part of a truth map: the largest 8-connected
/// component of free cells plus every occupied cell 8-adjacent to it.
///
/// This is the denominator set for [`coverage_percent`]; unknown truth
/// cells (outside the authored map) are never counted.
pub fn reachable_mask(truth: &OccupancyGrid) -> Vec<bool> {
    let (w, h) = (truth.width(), truth.height());
    let n = w * h;
    let mut component = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();

    for start in 0..n {
        if component[start] != usize::MAX || truth.state_at(start) != CellState::Free {
            continue;
        }
        let id = sizes.len();
        let mut size = 0usize;
        stack.push(start);
        component[start] = id;
        while let Some(i) = stack.pop() {
            size += 1;
            let c = truth.cell_at(i);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nb = Cell::new(c.x + dx, c.y + dy);
                    if !truth.in_bounds(nb) {
                        continue;
                    }
                    let j = truth.index(nb);
                    if component[j] == usize::MAX && truth.state_at(j) == CellState::Free {
                        component[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        sizes.push(size);
    }

    let mut mask = vec![false; n];
    let Some(largest) = (0..sizes.len()).max_by_key(|&i| (sizes[i], std::cmp::Reverse(i))) else {
        return mask;
    };
    for i in 0..n {
        if component[i] == largest {
            mask[i] = true;
        }
    }
    // occupied cells bounding the region are observable too
    for i in 0..n {
        if truth.state_at(i) != CellState::Occupied {
            continue;
        }
        let c = truth.cell_at(i);
        'nb: for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nb = Cell::new(c.x + dx, c.y + dy);
                if truth.in_bounds(nb) {
                    let j = truth.index(nb);
                    if component[j] == largest {
                        mask[i] = true;
                        break 'nb;
                    }
                }
            }
        }
    }
    mask
}

/// Percentage of the truth map's observable cells that the belief map
/// has observed.
pub fn coverage_percent(belief: &OccupancyGrid, truth: &OccupancyGrid) -> Result<f64, MapError> {
    check_dims(belief, truth)?;
    let mask = reachable_mask(truth);
    Ok(coverage_percent_masked(belief, &mask))
}

/// [`coverage_percent`] against a precomputed [`reachable_mask`].
pub fn coverage_percent_masked(belief: &OccupancyGrid, mask: &[bool]) -> f64 {
    debug_assert_eq!(mask.len(), belief.len());
    let total = mask.iter().filter(|&&m| m).count();
    if total == 0 {
        return 0.0;
    }
    let observed = belief
        .raw_cells()
        .iter()
        .zip(mask)
        .filter(|&(&raw, &m)| m && raw != UNKNOWN_RAW)
        .count();
    100.0 * observed as f64 / total as f64
}

/// Root mean square difference of the probability views, in `[0, 1]`.
pub fn rmse(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<f64, MapError> {
    check_dims(a, b)?;
    let n = a.len();
    let sum: f64 = (0..n)
        .map(|i| {
            let d = a.probability_at(i) - b.probability_at(i);
            d * d
        })
        .sum();
    Ok((sum / n as f64).sqrt())
}

const SSIM_C1: f64 = 0.01 * 0.01; // (0.01 * L)^2, dynamic range L = 1
const SSIM_C2: f64 = 0.03 * 0.03;

/// Summed-area tables over the probability views of two grids.
struct SsimTables {
    w: usize,
    sa: Vec<f64>,
    sb: Vec<f64>,
    saa: Vec<f64>,
    sbb: Vec<f64>,
    sab: Vec<f64>,
}

impl SsimTables {
    fn build(a: &OccupancyGrid, b: &OccupancyGrid) -> Self {
        let (w, h) = (a.width(), a.height());
        let stride = w + 1;
        let mut t = SsimTables {
            w: stride,
            sa: vec![0.0; stride * (h + 1)],
            sb: vec![0.0; stride * (h + 1)],
            saa: vec![0.0; stride * (h + 1)],
            sbb: vec![0.0; stride * (h + 1)],
            sab: vec![0.0; stride * (h + 1)],
        };
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let pa = a.probability_at(i);
                let pb = b.probability_at(i);
                let o = (y + 1) * stride + (x + 1);
                let up = o - stride;
                t.sa[o] = pa + t.sa[o - 1] + t.sa[up] - t.sa[up - 1];
                t.sb[o] = pb + t.sb[o - 1] + t.sb[up] - t.sb[up - 1];
                t.saa[o] = pa * pa + t.saa[o - 1] + t.saa[up] - t.saa[up - 1];
                t.sbb[o] = pb * pb + t.sbb[o - 1] + t.sbb[up] - t.sbb[up - 1];
                t.sab[o] = pa * pb + t.sab[o - 1] + t.sab[up] - t.sab[up - 1];
            }
        }
        t
    }

    #[inline]
    fn window_sum(table: &[f64], stride: usize, x0: usize, y0: usize, win: usize) -> f64 {
        let (x1, y1) = (x0 + win, y0 + win);
        table[y1 * stride + x1] - table[y0 * stride + x1] - table[y1 * stride + x0]
            + table[y0 * stride + x0]
    }

    fn local_ssim(&self, x0: usize, y0: usize, win: usize) -> f64 {
        let n = (win * win) as f64;
        let mu_a = Self::window_sum(&self.sa, self.w, x0, y0, win) / n;
        let mu_b = Self::window_sum(&self.sb, self.w, x0, y0, win) / n;
        let var_a = Self::window_sum(&self.saa, self.w, x0, y0, win) / n - mu_a * mu_a;
        let var_b = Self::window_sum(&self.sbb, self.w, x0, y0, win) / n - mu_b * mu_b;
        let cov = Self::window_sum(&self.sab, self.w, x0, y0, win) / n - mu_a * mu_b;
        ((2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2))
            / ((mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2))
    }
}

fn check_window(a: &OccupancyGrid, window: usize) -> Result<(), MapError> {
    if window < 3 || window % 2 == 0 || window > a.width() || window > a.height() {
        return Err(MapError::InvalidWindow {
            window,
            width: a.width(),
            height: a.height(),
        });
    }
    Ok(())
}

/// Mean local SSIM over all fully-contained sliding windows of the
/// probability views. Uniform (unweighted) windows, dynamic range 1,
/// stabilizers `C1 = 0.01^2`, `C2 = 0.03^2`. Result in `[-1, 1]`.
pub fn ssim(a: &OccupancyGrid, b: &OccupancyGrid, window: usize) -> Result<f64, MapError> {
    check_dims(a, b)?;
    check_window(a, window)?;
    let t = SsimTables::build(a, b);
    let mut sum = 0.0;
    let mut count = 0usize;
    for y0 in 0..=(a.height() - window) {
        for x0 in 0..=(a.width() - window) {
            sum += t.local_ssim(x0, y0, window);
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// [`ssim`] restricted to windows whose center cell is observed in `a`
/// (the belief map). Returns 0.0 when no window qualifies.
pub fn ssim_masked(a: &OccupancyGrid, b: &OccupancyGrid, window: usize) -> Result<f64, MapError> {
    check_dims(a, b)?;
    check_window(a, window)?;
    let t = SsimTables::build(a, b);
    let r = window / 2;
    let mut sum = 0.0;
    let mut count = 0usize;
    for y0 in 0..=(a.height() - window) {
        for x0 in 0..=(a.width() - window) {
            let center = Cell::new((x0 + r) as i32, (y0 + r) as i32);
            if a.raw(center) == UNKNOWN_RAW {
                continue;
            }
            sum += t.local_ssim(x0, y0, window);
            count += 1;
        }
    }
    if count == 0 {
        return Ok(0.0);
    }
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Pose;
    use approx::assert_abs_diff_eq;

    fn uniform(w: usize, h: usize, raw: i8) -> OccupancyGrid {
        let mut g = OccupancyGrid::new_unknown(w, h, 0.1, Pose::new(0.0, 0.0, 0.0));
        if raw != UNKNOWN_RAW {
            for i in 0..g.len() {
                let c = g.cell_at(i);
                g.set_raw(c, raw);
            }
        }
        g
    }

    #[test]
    fn cell_entropy_known_values() {
        assert_eq!(cell_entropy(0.5), 1.0);
        assert_eq!(cell_entropy(0.0), 0.0);
        assert_eq!(cell_entropy(1.0), 0.0);
        assert_abs_diff_eq!(cell_entropy(0.1), 0.46900, epsilon = 1e-4);
        assert_abs_diff_eq!(cell_entropy(0.45), 0.99277, epsilon = 1e-4);
    }

    #[test]
    fn cell_entropy_symmetry() {
        for k in 1..100 {
            let p = k as f64 / 100.0;
            assert_abs_diff_eq!(cell_entropy(p), cell_entropy(1.0 - p), epsilon = 1e-12);
        }
    }

    #[test]
    fn map_entropy_extremes() {
        assert_eq!(map_entropy(&uniform(4, 4, UNKNOWN_RAW)), 1.0);
        assert_eq!(map_entropy(&uniform(4, 4, 0)), 0.0);
        assert_eq!(map_entropy(&uniform(4, 4, 100)), 0.0);
    }

    #[test]
    fn map_entropy_hand_sum() {
        // cells with p = {0.5, 0.5, 1.0, 0.0} -> (1 + 1 + 0 + 0) / 4
        let mut g = uniform(2, 2, 0);
        g.set_raw(Cell::new(0, 0), 50);
        g.set_raw(Cell::new(1, 0), UNKNOWN_RAW);
        g.set_raw(Cell::new(0, 1), 100);
        g.set_raw(Cell::new(1, 1), 0);
        assert_abs_diff_eq!(map_entropy(&g), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn coverage_extremes() {
        // 10x10 box: occupied ring, free interior
        let mut truth = uniform(10, 10, 0);
        for i in 0..truth.len() {
            let c = truth.cell_at(i);
            if c.x == 0 || c.y == 0 || c.x == 9 || c.y == 9 {
                truth.set_raw(c, 100);
            }
        }
        let belief = uniform(10, 10, UNKNOWN_RAW);
        assert_eq!(coverage_percent(&belief, &truth).unwrap(), 0.0);
        assert_eq!(coverage_percent(&truth, &truth).unwrap(), 100.0);
    }

    #[test]
    fn coverage_counts_half_observed() {
        // 10x10 all free, fully connected: the observable set is all 100
        // cells. Observe exactly the lower half in the belief.
        let truth = uniform(10, 10, 0);
        let mut belief = uniform(10, 10, UNKNOWN_RAW);
        for y in 0..5 {
            for x in 0..10 {
                belief.set_raw(Cell::new(x, y), 0);
            }
        }
        assert_abs_diff_eq!(coverage_percent(&belief, &truth).unwrap(), 50.0);
    }

    #[test]
    fn coverage_ignores_disconnected_pockets() {
        // Free field split by a full-width wall; the smaller upper part
        // is not part of the observable region.
        let mut truth = uniform(10, 10, 0);
        for x in 0..10 {
            truth.set_raw(Cell::new(x, 7), 100);
        }
        let mask = reachable_mask(&truth);
        // rows 0..7 free (70) + wall row adjacent (10); rows 8..10 excluded
        let count = mask.iter().filter(|&&m| m).count();
        assert_eq!(count, 80);
    }

    #[test]
    fn rmse_basics() {
        let a = uniform(5, 5, 0);
        let b = uniform(5, 5, 100);
        let u = uniform(5, 5, UNKNOWN_RAW);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert_abs_diff_eq!(rmse(&a, &b).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rmse(&u, &a).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(rmse(&a, &b).unwrap(), rmse(&b, &a).unwrap());
    }

    #[test]
    fn rmse_dimension_mismatch() {
        let a = uniform(5, 5, 0);
        let b = uniform(5, 6, 0);
        assert!(matches!(rmse(&a, &b), Err(MapError::DimensionMismatch { .. })));
    }

    #[test]
    fn ssim_identical_is_one() {
        let mut g = uniform(12, 12, 0);
        for i in (0..g.len()).step_by(3) {
            let c = g.cell_at(i);
            g.set_raw(c, 100);
        }
        assert_eq!(ssim(&g, &g, 7).unwrap(), 1.0);
    }

    #[test]
    fn ssim_constant_grids_luminance_term() {
        // constant a = 0 vs constant b = 1: variances vanish, leaving
        // (2ab + C1) / (a^2 + b^2 + C1)
        let a = uniform(9, 9, 0);
        let b = uniform(9, 9, 100);
        let expected = SSIM_C1 / (1.0 + SSIM_C1);
        assert_abs_diff_eq!(ssim(&a, &b, 7).unwrap(), expected, epsilon = 1e-12);

        let u = uniform(9, 9, UNKNOWN_RAW); // constant 0.5
        let f = uniform(9, 9, 0);
        let expected = SSIM_C1 / (0.25 + SSIM_C1);
        assert_abs_diff_eq!(ssim(&u, &f, 7).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn ssim_symmetry_and_window_errors() {
        let a = uniform(9, 9, 0);
        let mut b = uniform(9, 9, 0);
        b.set_raw(Cell::new(4, 4), 100);
        assert_eq!(ssim(&a, &b, 5).unwrap(), ssim(&b, &a, 5).unwrap());
        assert!(ssim(&a, &b, 4).is_err());
        assert!(ssim(&a, &b, 11).is_err());
        assert!(ssim(&a, &b, 1).is_err());
    }

    #[test]
    fn ssim_masked_skips_unknown_centers() {
        let truth = uniform(9, 9, 0);
        let belief = uniform(9, 9, UNKNOWN_RAW);
        // nothing observed -> no window qualifies
        assert_eq!(ssim_masked(&belief, &truth, 3).unwrap(), 0.0);
        // fully observed -> same as unmasked
        assert_eq!(
            ssim_masked(&truth, &truth, 3).unwrap(),
            ssim(&truth, &truth, 3).unwrap()
        );
    }
}
