//! Anchor lattice and nested per-anchor grids.
//!
//! The coarse lattice G has spacing `grid_res`, is anchored at the origin,
//! and is clipped to the domain cube. Around an anchor `s` sits a cube of
//! edge `cs_edge` (the nominal `2 log2(mn)/sqrt(n)`, clipped to the domain
//! edge); level `l` partitions it into `2^(l d)` equal sub-cubes whose
//! centers form the level-`l` grid. Cells near the boundary may overhang
//! the domain; their centers are projected onto the cube for evaluation
//! but keep their indices for coding.

use rand::Rng;

use crate::grid::MreParams;

/// One point of a nested grid: anchor index, refinement level, and the
/// in-level cell index (one integer in `[0, 2^level)` per dimension).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub s: Vec<i64>,
    pub level: u32,
    pub cell: Vec<u32>,
}

impl GridPoint {
    pub fn anchor(s: Vec<i64>) -> Self {
        let d = s.len();
        GridPoint { s, level: 0, cell: vec![0; d] }
    }
}

/// Index of the closest lattice point to `theta`. Ties break toward the
/// lexicographically smallest index (round half down per coordinate).
pub fn nearest_grid_point(theta: &[f64], params: &MreParams) -> Vec<i64> {
    debug_assert_eq!(theta.len(), params.d);
    theta
        .iter()
        .map(|&x| {
            let idx = (x / params.grid_res - 0.5).ceil() as i64;
            idx.clamp(params.s_index_min, params.s_index_max)
        })
        .collect()
}

/// Geometric position of a lattice point (inside the cube by construction).
pub fn lattice_position(s: &[i64], params: &MreParams) -> Vec<f64> {
    s.iter().map(|&i| i as f64 * params.grid_res).collect()
}

/// Geometric position of a grid point: the center of its sub-cube of the
/// anchor cube. May overhang the domain near the boundary; callers project
/// before evaluating a loss there.
pub fn point_position(p: &GridPoint, params: &MreParams) -> Vec<f64> {
    let half = params.cs_edge / 2.0;
    let cell_edge = params.cs_edge / 2f64.powi(p.level as i32);
    p.s.iter()
        .zip(&p.cell)
        .map(|(&si, &ci)| si as f64 * params.grid_res - half + (ci as f64 + 0.5) * cell_edge)
        .collect()
}

/// The level-(l-1) point whose sub-cube contains `p`. Panics at level 0.
pub fn parent_of(p: &GridPoint) -> GridPoint {
    assert!(p.level >= 1, "level-0 points have no parent");
    GridPoint {
        s: p.s.clone(),
        level: p.level - 1,
        cell: p.cell.iter().map(|&c| c / 2).collect(),
    }
}

/// The 2^d children of `p` on the next level, in lexicographic cell order.
pub fn children_of(p: &GridPoint, params: &MreParams) -> Vec<GridPoint> {
    debug_assert!(p.level < params.t);
    let d = p.cell.len();
    (0..1u64 << d)
        .map(|mask| {
            let cell = p
                .cell
                .iter()
                .enumerate()
                .map(|(j, &c)| 2 * c + ((mask >> (d - 1 - j)) & 1) as u32)
                .collect();
            GridPoint { s: p.s.clone(), level: p.level + 1, cell }
        })
        .collect()
}

/// Draw a refinement level with Pr(l) ∝ 2^((d-2)l).
pub fn sample_level<R: Rng + ?Sized>(params: &MreParams, rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    params
        .level_cdf
        .iter()
        .position(|&c| u < c)
        .unwrap_or(params.t as usize) as u32
}

/// Draw a uniform cell index at the given level (coordinates in order).
pub fn sample_cell<R: Rng + ?Sized>(level: u32, params: &MreParams, rng: &mut R) -> Vec<u32> {
    (0..params.d).map(|_| rng.random_range(0..1u32 << level)).collect()
}

/// Flatten a cell index lexicographically (first coordinate most significant).
pub fn cell_to_index(cell: &[u32], level: u32) -> usize {
    let mut idx = 0usize;
    for &c in cell {
        idx = (idx << level) | c as usize;
    }
    idx
}

pub fn index_to_cell(mut idx: usize, level: u32, d: usize) -> Vec<u32> {
    let mask = (1usize << level) - 1;
    let mut cell = vec![0u32; d];
    for j in (0..d).rev() {
        cell[j] = (idx & mask) as u32;
        idx >>= level;
    }
    cell
}
