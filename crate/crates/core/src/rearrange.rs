//! Distribution functions, Schwarz and Steiner rearrangements.
//!
//! The discrete Schwarz rearrangement sorts the cell values in decreasing
//! order and hands them out to the cells ranked by distance of their centers
//! to the box center (ties broken by flat index). Distances are compared as
//! exact integers, so the ranking is deterministic.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, IndicatorSet};

/// Flat cell indices in ranking order.
pub fn ranking(grid: &Grid) -> Vec<usize> {
    let mut keys: Vec<(i64, usize)> = (0..grid.len())
        .map(|k| {
            let idx = grid.unravel(k);
            let d2: i64 = (0..grid.dim())
                .map(|a| {
                    let d = grid.doubled_offset(a, idx[a]);
                    d * d
                })
                .sum();
            (d2, k)
        })
        .collect();
    keys.sort_unstable();
    keys.into_iter().map(|(_, k)| k).collect()
}

/// Positions along a line of length n in ranking order.
fn line_ranking(n: usize) -> Vec<usize> {
    let mut keys: Vec<(i64, usize)> =
        (0..n).map(|i| ((2 * i as i64 + 1 - n as i64).abs(), i)).collect();
    keys.sort_unstable();
    keys.into_iter().map(|(_, i)| i).collect()
}

fn require_nonnegative(u: &GridFunction) -> Result<()> {
    match u.values().iter().position(|&v| v < 0.0) {
        None => Ok(()),
        Some(i) => Err(Error::Domain(format!(
            "negative value {} at cell {i}; rearrangements need u >= 0",
            u.values()[i]
        ))),
    }
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// μ_u(t) = hᴺ · #{u_i > t}.
pub fn distribution_function(u: &GridFunction, t: f64) -> Result<f64> {
    require_nonnegative(u)?;
    let count = u.values().iter().filter(|&&v| v > t).count();
    Ok(count as f64 * u.grid().cell_volume())
}

/// Table of the distribution function at every distinct value of u, with
/// the decreasing inverse u₀.
#[derive(Debug, Clone)]
pub struct DistributionProfile {
    levels: Vec<f64>,
    measures: Vec<f64>,
    sorted: Vec<f64>,
    cell_volume: f64,
}

impl DistributionProfile {
    pub fn new(u: &GridFunction) -> Result<Self> {
        require_nonnegative(u)?;
        let sorted = sorted_desc(u.values());
        let vol = u.grid().cell_volume();
        let mut levels = Vec::new();
        let mut measures = Vec::new();
        for (k, &v) in sorted.iter().enumerate() {
            if levels.last() != Some(&v) {
                levels.push(v);
                // cells strictly above v are exactly those ranked before k
                measures.push(k as f64 * vol);
            }
        }
        Ok(Self { levels, measures, sorted, cell_volume: vol })
    }

    /// Strictly decreasing thresholds t_k (the distinct values of u).
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
    /// μ_u(t_k).
    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn mu(&self, t: f64) -> f64 {
        // number of sorted values > t
        let count = self.sorted.partition_point(|&v| v > t);
        count as f64 * self.cell_volume
    }

    /// u₀(r) = sup{t ≥ 0 : μ_u(t) > r}.
    pub fn profile(&self, r: f64) -> f64 {
        if r < 0.0 {
            return self.sorted.first().copied().unwrap_or(0.0);
        }
        let m = (r / self.cell_volume).floor() as usize;
        self.sorted.get(m).copied().unwrap_or(0.0).max(0.0)
    }
}

/// Symmetric decreasing rearrangement u*.
pub fn schwarz_function(u: &GridFunction) -> Result<GridFunction> {
    require_nonnegative(u)?;
    let sorted = sorted_desc(u.values());
    let order = ranking(u.grid());
    let mut out = vec![0.0; u.len()];
    for (rank, &cell) in order.iter().enumerate() {
        out[cell] = sorted[rank];
    }
    Ok(u.with_values(out))
}

/// E*: the first |E|/hᴺ cells in ranking order.
pub fn schwarz_set(e: &IndicatorSet) -> IndicatorSet {
    let count = e.count();
    let order = ranking(e.grid());
    let mut mask = vec![false; e.grid().len()];
    for &cell in order.iter().take(count) {
        mask[cell] = true;
    }
    IndicatorSet::new(e.grid().clone(), mask).expect("same grid")
}

/// Steiner symmetrization: 1D rearrangement of every line parallel to `axis`.
pub fn steiner_function(u: &GridFunction, axis: usize) -> Result<GridFunction> {
    let grid = u.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} invalid for a {}-dimensional grid",
            grid.dim()
        )));
    }
    require_nonnegative(u)?;
    let (r, c) = grid.rows_cols();
    let vals = u.values();
    let mut out = vec![0.0; u.len()];
    if grid.dim() == 1 || axis == 1 {
        let order = line_ranking(c);
        for i in 0..r {
            let line = sorted_desc(&vals[i * c..(i + 1) * c]);
            for (rank, &j) in order.iter().enumerate() {
                out[i * c + j] = line[rank];
            }
        }
    } else {
        let order = line_ranking(r);
        for j in 0..c {
            let col: Vec<f64> = (0..r).map(|i| vals[i * c + j]).collect();
            let line = sorted_desc(&col);
            for (rank, &i) in order.iter().enumerate() {
                out[i * c + j] = line[rank];
            }
        }
    }
    Ok(u.with_values(out))
}

pub fn steiner_set(e: &IndicatorSet, axis: usize) -> Result<IndicatorSet> {
    IndicatorSet::from_function(&steiner_function(&e.indicator(), axis)?)
}

/// The first `count` cells ordered by `key(x)` (ties by flat index).
pub fn ranked_mask(grid: &Grid, count: usize, key: impl Fn(&[f64]) -> f64) -> IndicatorSet {
    let dim = grid.dim();
    let mut keys: Vec<(f64, usize)> =
        (0..grid.len()).map(|k| (key(&grid.center(k)[..dim]), k)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut mask = vec![false; grid.len()];
    for &(v, k) in keys.iter().take(count) {
        if v.is_finite() {
            mask[k] = true;
        }
    }
    IndicatorSet::new(grid.clone(), mask).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_ranking_alternates_about_center() {
        assert_eq!(line_ranking(4), vec![1, 2, 0, 3]);
        assert_eq!(line_ranking(5), vec![2, 1, 3, 0, 4]);
    }

    #[test]
    fn profile_inverse() {
        let g = Grid::new(&[4], &[0.0], 1.0, false).unwrap();
        let u = GridFunction::new(g, vec![0.0, 3.0, 1.0, 3.0]).unwrap();
        let d = DistributionProfile::new(&u).unwrap();
        assert_eq!(d.levels(), &[3.0, 1.0, 0.0]);
        assert_eq!(d.measures(), &[0.0, 2.0, 3.0]);
        assert_eq!(d.profile(0.0), 3.0);
        assert_eq!(d.profile(1.99), 3.0);
        assert_eq!(d.profile(2.0), 1.0);
        assert_eq!(d.profile(10.0), 0.0);
        assert_eq!(d.mu(0.5), 3.0);
    }
}
