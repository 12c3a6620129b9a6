//! Brute-force solver for the SNR-exponent minimisation behind the DMT.
//!
//! With `v_n` the exponent order of `1/a_n` (channel eigenvalues) and `u_n`
//! that of `1/c_n` (error eigenvalues), the power-adapted channel is in
//! outage when
//!
//! ```text
//! Σ_n (1 - v_n + Σ_m w_m · min(v_m, u_N))^+ < r,      w_m = 2m - 1 + M - N
//! ```
//!
//! and the outage probability decays with exponent
//! `inf Σ_n w_n (v_n + u_n - α)` over that set. Nothing here reuses the
//! closed-form algebra in [`crate::closed_form`]; the two are compared by the
//! test suites and by the `oracle-check` command.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::channel::ChannelConfig;
use crate::error::{DmtError, Result};

/// Largest receive-antenna count the grid search accepts.
pub const MAX_ORACLE_RX: usize = 4;

const CLOSURE_EPS: f64 = 1e-9;

/// Exponent orders of the channel (`v`) and error (`u`) eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
}

impl ExponentVector {
    /// Checks `v_n >= 0`, `u_n >= α` and descending order of both vectors.
    pub fn new(cfg: &ChannelConfig, v: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let n = cfg.n_rx;
        for len in [v.len(), u.len()] {
            if len != n {
                return Err(DmtError::LengthMismatch { expected: n, got: len });
            }
        }
        if !v.iter().all(|&x| x >= 0.0) {
            return Err(DmtError::InvalidArgument("v must be nonnegative".into()));
        }
        if !u.iter().all(|&x| x >= cfg.alpha) {
            return Err(DmtError::InvalidArgument(format!("u must be at least alpha = {}", cfg.alpha)));
        }
        if !is_descending(&v) || !is_descending(&u) {
            return Err(DmtError::InvalidArgument("exponents must be sorted descending".into()));
        }
        Ok(Self { v, u })
    }

    /// `Σ w_n (v_n + u_n - α)`.
    pub fn objective(&self, cfg: &ChannelConfig) -> f64 {
        (1..=cfg.n_rx)
            .map(|n| cfg.weight(n) * (self.v[n - 1] + self.u[n - 1] - cfg.alpha))
            .sum()
    }

    pub fn in_outage(&self, cfg: &ChannelConfig, r: f64) -> bool {
        outage_lhs_with_floor(cfg, &self.v, self.u[cfg.n_rx - 1]) < r
    }
}

fn is_descending(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] >= w[1])
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `+∞` when no grid point is in outage.
    pub d_min: f64,
    /// Empty when `d_min` is infinite.
    pub argmin_v: Vec<f64>,
    pub grid_step: f64,
    pub r_probe: f64,
}

/// Grid-resolution tolerance `N (2N - 1 + M - N) · step`.
pub fn tolerance(cfg: &ChannelConfig, step: f64) -> f64 {
    cfg.n_rx as f64 * cfg.weight(cfg.n_rx) * step
}

/// Left side of the outage inequality with the error exponents floored at
/// `u_floor` (the smallest error exponent `u_N`).
pub fn outage_lhs_with_floor(cfg: &ChannelConfig, v: &[f64], u_floor: f64) -> f64 {
    let shift: f64 = v.iter().enumerate().map(|(i, &x)| cfg.weight(i + 1) * x.min(u_floor)).sum();
    v.iter().map(|&x| (1.0 - x + shift).max(0.0)).sum()
}

/// Left side of the outage inequality with `u` pinned at `α`.
pub fn outage_lhs(cfg: &ChannelConfig, v: &[f64]) -> f64 {
    outage_lhs_with_floor(cfg, v, cfg.alpha)
}

/// Strict outage test with `u = α`.
pub fn outage_condition(cfg: &ChannelConfig, v: &[f64], r: f64) -> bool {
    outage_lhs(cfg, v) < r
}

/// Exponent grid: multiples of `step` up to `v_max`, plus `α` and the
/// saturation levels `1 + α Σ_{m<=k} w_m` (`k = 0..=N`) at which a
/// coordinate's `(·)^+` term clips once the `k` largest exponents sit at or
/// above `α`. The extra knots keep the feasible slivers just past each
/// discontinuity reachable by the grid.
fn exponent_grid(cfg: &ChannelConfig, v_max: f64, step: f64) -> Vec<f64> {
    let count = (v_max / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|j| j as f64 * step).collect();
    grid.push(cfg.alpha);
    let mut acc = 0.0;
    grid.push(1.0);
    for n in 1..=cfg.n_rx {
        acc += cfg.weight(n);
        grid.push(1.0 + cfg.alpha * acc);
    }
    grid.retain(|&x| x <= v_max);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    grid
}

struct Search<'a> {
    cfg: &'a ChannelConfig,
    grid: &'a [f64],
    weights: Vec<f64>,
    u_floor: f64,
    r: f64,
    /// `r = N`: only the left limit exists, so points of the closure must be
    /// limits of points strictly in outage.
    full_rate: bool,
    shared_best: &'a AtomicU64,
}

impl Search<'_> {
    fn shared(&self) -> f64 {
        f64::from_bits(self.shared_best.load(Ordering::Relaxed))
    }

    fn feasible(&self, v: &[f64]) -> bool {
        let lhs = outage_lhs_with_floor(self.cfg, v, self.u_floor);
        if !self.full_rate {
            return lhs <= self.r + CLOSURE_EPS * self.r.max(1.0);
        }
        if lhs < self.r - CLOSURE_EPS * self.r {
            return true;
        }
        lhs <= self.r + CLOSURE_EPS * self.r && self.strictly_reachable(v)
    }

    /// Sufficient test for points with a strictly smaller left side lying
    /// arbitrarily close to `v`: raising every exponent at or above the floor
    /// lowers each unclipped term belonging to such an exponent and leaves
    /// the others unchanged. A boundary point that fails it either admits no
    /// such neighbours or has an exponent strictly between 0 and the floor,
    /// and lowering that exponent reaches a cheaper point in outage, so the
    /// minimum is unaffected.
    fn strictly_reachable(&self, v: &[f64]) -> bool {
        let shift: f64 = v.iter().zip(&self.weights).map(|(&x, w)| w * x.min(self.u_floor)).sum();
        v.iter().any(|&x| x >= self.u_floor - 1e-12 && 1.0 - x + shift > CLOSURE_EPS)
    }

    /// Depth-first over descending vectors. Objective terms are nonnegative
    /// and grow with each coordinate, so a prefix at or above the incumbent
    /// ends the scan at that level.
    fn descend(&self, level: usize, top: usize, partial: f64, v: &mut Vec<f64>, best: &mut (f64, Vec<f64>)) {
        let last = level + 1 == v.len();
        for idx in 0..=top {
            let obj = partial + self.weights[level] * self.grid[idx];
            if obj >= best.0 || obj > self.shared() {
                break;
            }
            v[level] = self.grid[idx];
            if last {
                if self.feasible(v) {
                    *best = (obj, v.clone());
                    self.shared_best.fetch_min(obj.to_bits(), Ordering::Relaxed);
                    break;
                }
            } else {
                self.descend(level + 1, idx, obj, v, best);
            }
        }
    }
}

fn check_oracle_args(cfg: &ChannelConfig, r: f64, v_max: f64, step: f64) -> Result<()> {
    if cfg.n_rx > MAX_ORACLE_RX {
        return Err(DmtError::OracleTooLarge(cfg.n_rx));
    }
    if !(r > 0.0 && r <= cfg.n_rx as f64) {
        return Err(DmtError::GainOutOfRange { r, n: cfg.n_rx });
    }
    if !(step > 0.0 && step <= 0.05) {
        return Err(DmtError::InvalidArgument(format!("grid step must lie in (0, 0.05], got {step}")));
    }
    let needed = 1.0 + cfg.alpha * (1..=cfg.n_rx).map(|n| cfg.weight(n)).sum::<f64>() + 1.0;
    if v_max.is_nan() || v_max < needed - 1e-12 {
        return Err(DmtError::InvalidArgument(format!("v_max = {v_max} below required {needed}")));
    }
    Ok(())
}

fn minimise(cfg: &ChannelConfig, r: f64, grid: &[f64], u_floor: f64) -> (f64, Vec<f64>) {
    let n = cfg.n_rx;
    let shared_best = AtomicU64::new(f64::INFINITY.to_bits());
    let search = Search {
        cfg,
        grid,
        weights: cfg.weights(),
        u_floor,
        r,
        full_rate: r >= n as f64,
        shared_best: &shared_best,
    };
    // Outage needs at least one exponent at or above α; below that the left
    // side is at least N.
    let first = grid.partition_point(|&x| x < cfg.alpha - 1e-12);
    (first..grid.len())
        .into_par_iter()
        .map(|lead| {
            let mut v = vec![0.0; n];
            let mut best = (f64::INFINITY, Vec::new());
            let obj = search.weights[0] * grid[lead];
            if obj <= search.shared() {
                v[0] = grid[lead];
                if n == 1 {
                    if search.feasible(&v) {
                        best = (obj, v.clone());
                        shared_best.fetch_min(obj.to_bits(), Ordering::Relaxed);
                    }
                } else {
                    search.descend(1, lead, obj, &mut v, &mut best);
                }
            }
            (best, lead)
        })
        .reduce(
            || ((f64::INFINITY, Vec::new()), usize::MAX),
            |a, b| if (b.0 .0, b.1) < (a.0 .0, a.1) { b } else { a },
        )
        .0
}

/// Exhaustive minimisation of `Σ w_n v_n` over descending grid vectors in
/// the closure of the outage set, with `u` pinned at `α`.
///
/// The outage set is open, so the value at a boundary is a one-sided limit.
/// For `r < N` that is the right limit, the minimum over the closure, which
/// makes a discontinuity point take the lower value as the closed form
/// does. At `r = N` only the left limit exists: closure points count only
/// if strictly-in-outage points lie arbitrarily close, so a subset whose
/// region shrinks to the single point `N` does not count. Exponent vectors
/// with every coordinate below `α` are skipped: their left side is at least
/// `N`.
///
/// The search cost grows like `(v_max/step)^N`; it is practical for
/// `N <= 3` and refused above `N = 4`.
pub fn grid_oracle(cfg: &ChannelConfig, r: f64, v_max: f64, step: f64) -> Result<OracleResult> {
    check_oracle_args(cfg, r, v_max, step)?;
    let grid = exponent_grid(cfg, v_max, step);
    let (d_min, argmin_v) = minimise(cfg, r, &grid, cfg.alpha);
    Ok(OracleResult { d_min, argmin_v, grid_step: step, r_probe: r })
}

/// Default `v_max` for [`grid_oracle`]: one above the largest saturation
/// level.
pub fn default_v_max(cfg: &ChannelConfig) -> f64 {
    2.0 + cfg.alpha * (1..=cfg.n_rx).map(|n| cfg.weight(n)).sum::<f64>()
}

/// Like [`grid_oracle`], but also searches the smallest error exponent
/// `u_N` over `{α, α + step, …, u_max}` (the other `u_n` equal to `u_N`,
/// their cheapest value under the ordering). Used to confirm that raising
/// `u` above `α` never helps.
pub fn grid_oracle_joint(cfg: &ChannelConfig, r: f64, v_max: f64, u_max: f64, step: f64) -> Result<OracleResult> {
    check_oracle_args(cfg, r, v_max, step)?;
    let grid = exponent_grid(cfg, v_max, step);
    let weight_sum: f64 = cfg.weights().iter().sum();
    let mut best = (f64::INFINITY, Vec::new());
    let mut j = 0;
    loop {
        let u = cfg.alpha + j as f64 * step;
        if u > u_max + 1e-12 {
            break;
        }
        let (d, v) = minimise(cfg, r, &grid, u);
        let total = d + weight_sum * (u - cfg.alpha);
        if total < best.0 {
            best = (total, v);
        }
        j += 1;
    }
    Ok(OracleResult { d_min: best.0, argmin_v: best.1, grid_step: step, r_probe: r })
}

/// Exact infimum of `Σ_{n<=k} w_n v_n` over outage subset `k`:
///
/// `N·T - Σ v_n < r`, `α <= v_k <= … <= v_1 <= T`, `T = 1 + α Σ_{m<=k} w_m`,
///
/// the tail exponents `v_{k+1..N}` being zero at the optimum. Weights grow
/// with `n`, so an optimal vertex fills coordinates in order: a prefix at
/// `T`, one free coordinate, the rest at `α`. All `k` such vertices are
/// tried.
pub fn subset_oracle(cfg: &ChannelConfig, k: usize, r: f64) -> Result<f64> {
    if k == 0 || k > cfg.n_rx {
        return Err(DmtError::IndexOutOfRange { k, n: cfg.n_rx });
    }
    if !(0.0..=cfg.n_rx as f64).contains(&r) {
        return Err(DmtError::GainOutOfRange { r, n: cfg.n_rx });
    }
    let w = cfg.weights();
    let alpha = cfg.alpha;
    let cap = 1.0 + alpha * w[..k].iter().sum::<f64>();
    let need = cfg.n_rx as f64 * cap - r;
    // The sum of the first k exponents must exceed `need` and cannot exceed k·T.
    if need >= k as f64 * cap {
        return Ok(f64::INFINITY);
    }
    let mut best = f64::INFINITY;
    for free in 0..k {
        let fixed = free as f64 * cap + (k - free - 1) as f64 * alpha;
        let v_free = (need - fixed).max(alpha);
        if v_free > cap + 1e-12 {
            continue;
        }
        let obj = w[..free].iter().sum::<f64>() * cap + w[free] * v_free + w[free + 1..k].iter().sum::<f64>() * alpha;
        best = best.min(obj);
    }
    Ok(best)
}
