//! Finite-SNR Monte Carlo of the power-adaptation scheme.
//!
//! The transmitter sees `Ĥ = H + E` and sends with power
//! `κ P̄ / (∏ b_n^(2n-1+M-N))^t`, where `b` are the ascending eigenvalues of
//! `ĤĤ†`. Noise variance is fixed at 1, so `P̄ = ρ`. A trial is in outage
//! when `log₂ det(I + (P/M) HH†) < r log₂ ρ`.
//!
//! Trial `j` at SNR index `i` is seeded with `derive_seed(seed, i, j)`, and
//! calibration batches draw from [`CALIBRATION_STREAM`] at every SNR point.
//! Counts are integers and float reductions run in index order, so results
//! do not depend on the rayon pool size.

use rayon::prelude::*;

use crate::channel::{eig_ascending, sample_channel, wishart_log_norm_const, ChannelConfig};
use crate::error::{DmtError, Result};
use crate::rng::{derive_seed, CALIBRATION_STREAM};

pub const DEFAULT_T: f64 = 0.9;
pub const DEFAULT_CALIBRATION_BATCH: usize = 100_000;
pub const MIN_CALIBRATION_BATCH: usize = 10_000;
pub const MIN_SWEEP_TRIALS: usize = 1_000;
/// SNR points with fewer outage events are left out of the slope fit.
pub const MIN_SLOPE_EVENTS: u64 = 20;

/// Stream used by [`power_constraint_ratio`] so validation never reuses
/// calibration draws.
pub const VALIDATION_STREAM: u64 = u64::MAX - 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaMode {
    /// Asymptotic constant `ξ̂ ∏ w_n (1 - t)`.
    Analytic,
    /// Sample mean of the power equals `P̄` on a calibration batch.
    Calibrated,
    /// Use `kappa` as given.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPolicy {
    pub t: f64,
    pub kappa_mode: KappaMode,
    pub kappa: f64,
}

impl PowerPolicy {
    /// Policy whose `kappa` is resolved later from `mode`.
    pub fn new(t: f64, kappa_mode: KappaMode) -> Result<Self> {
        check_t(t)?;
        Ok(Self { t, kappa_mode, kappa: 1.0 })
    }

    pub fn fixed(t: f64, kappa: f64) -> Result<Self> {
        check_t(t)?;
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(DmtError::InvalidArgument(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { t, kappa_mode: KappaMode::Fixed, kappa })
    }

    /// Constant power, `P = P̄`.
    pub fn constant() -> Self {
        Self { t: 0.0, kappa_mode: KappaMode::Fixed, kappa: 1.0 }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(DmtError::InvalidArgument(format!("t must lie in [0, 1), got {t}")));
    }
    Ok(())
}

/// `Σ w_n ln b_n`; rejects a zero eigenvalue.
fn log_weighted_product(cfg: &ChannelConfig, b: &[f64]) -> Result<f64> {
    if b.len() != cfg.n_rx {
        return Err(DmtError::LengthMismatch { expected: cfg.n_rx, got: b.len() });
    }
    let mut acc = 0.0;
    for (i, &x) in b.iter().enumerate() {
        if x.is_nan() || x <= 0.0 {
            return Err(DmtError::DegenerateEigenvalue { index: i });
        }
        acc += cfg.weight(i + 1) * x.ln();
    }
    Ok(acc)
}

/// Transmit power `κ P̄ / (∏ b_n^(2n-1+M-N))^t` for estimated-channel
/// eigenvalues `b` (ascending).
pub fn adapted_power(cfg: &ChannelConfig, b: &[f64], policy: &PowerPolicy, p_bar: f64) -> Result<f64> {
    let log_prod = log_weighted_product(cfg, b)?;
    Ok(policy.kappa * p_bar * (-policy.t * log_prod).exp())
}

/// One outage indicator at SNR `rho` and multiplexing gain `r`.
pub fn outage_trial(cfg: &ChannelConfig, rho: f64, r: f64, policy: &PowerPolicy, seed: u64) -> Result<bool> {
    if !(0.0..=cfg.n_rx as f64).contains(&r) {
        return Err(DmtError::GainOutOfRange { r, n: cfg.n_rx });
    }
    let draw = sample_channel(cfg, rho, seed)?;
    let a = eig_ascending(&draw.h)?;
    let power = if policy.t == 0.0 {
        policy.kappa * rho
    } else {
        adapted_power(cfg, &eig_ascending(&draw.h_hat())?, policy, rho)?
    };
    let scale = power / cfg.m_tx as f64;
    let capacity: f64 = a.iter().map(|&x| (1.0 + scale * x).log2()).sum();
    Ok(capacity < r * rho.log2())
}

/// `(∏ b_n^w_n)^(-t)` for `count` channel draws from `stream`, in index
/// order.
fn power_factors(cfg: &ChannelConfig, rho: f64, t: f64, count: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let draw = sample_channel(cfg, rho, derive_seed(seed, stream, i))?;
            let b = eig_ascending(&draw.h_hat())?;
            Ok((-t * log_weighted_product(cfg, &b)?).exp())
        })
        .collect()
}

fn ordered_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Result of resolving `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub kappa: f64,
    /// Relative disagreement between the two batch halves; large values flag
    /// a sample mean that has not settled (heavy tail as `t → 1`).
    pub rel_error: f64,
    pub batch: usize,
}

/// Analytic `κ = ξ̂ ∏ (2n-1+M-N)(1-t)` with `ξ̂ = ξ (1 + σ_e²)^(MN)`.
pub fn analytic_kappa(cfg: &ChannelConfig, rho: f64, t: f64) -> Result<f64> {
    let log_xi = wishart_log_norm_const(cfg.m_tx, cfg.n_rx)?;
    let sigma_e_sq = cfg.error_variance(rho);
    let log_xi_hat = log_xi + (cfg.m_tx * cfg.n_rx) as f64 * sigma_e_sq.ln_1p();
    let log_prod: f64 = cfg.weights().iter().map(|w| (w * (1.0 - t)).ln()).sum();
    Ok((log_xi_hat + log_prod).exp())
}

/// Resolves `κ` for `policy` at SNR `rho`.
///
/// In calibrated mode `κ` is the reciprocal batch mean of
/// `(∏ b_n^w_n)^(-t)`, so the batch mean power equals `P̄` exactly. The
/// returned `rel_error` is the half-split disagreement of that mean.
pub fn calibrate_kappa(cfg: &ChannelConfig, rho: f64, policy: &PowerPolicy, batch: usize, seed: u64) -> Result<Calibration> {
    check_t(policy.t)?;
    match policy.kappa_mode {
        KappaMode::Fixed => Ok(Calibration { kappa: policy.kappa, rel_error: 0.0, batch: 0 }),
        KappaMode::Analytic => Ok(Calibration { kappa: analytic_kappa(cfg, rho, policy.t)?, rel_error: f64::NAN, batch: 0 }),
        KappaMode::Calibrated => {
            if batch < MIN_CALIBRATION_BATCH {
                return Err(DmtError::InvalidArgument(format!(
                    "calibration batch must be at least {MIN_CALIBRATION_BATCH}, got {batch}"
                )));
            }
            if policy.t == 0.0 {
                return Ok(Calibration { kappa: 1.0, rel_error: 0.0, batch });
            }
            let x = power_factors(cfg, rho, policy.t, batch, seed, CALIBRATION_STREAM)?;
            let mean = ordered_mean(&x);
            let (lo, hi) = x.split_at(batch / 2);
            let rel_error = (ordered_mean(lo) - ordered_mean(hi)).abs() / mean;
            Ok(Calibration { kappa: 1.0 / mean, rel_error, batch })
        }
    }
}

/// Copy of `policy` with `kappa` resolved at `rho`.
pub fn resolve_policy(cfg: &ChannelConfig, rho: f64, policy: &PowerPolicy, batch: usize, seed: u64) -> Result<(PowerPolicy, Calibration)> {
    let cal = calibrate_kappa(cfg, rho, policy, batch, seed)?;
    Ok((PowerPolicy { kappa: cal.kappa, ..*policy }, cal))
}

/// Mean of `P / P̄` over a fresh batch (validation stream) for a policy
/// whose `kappa` is already resolved.
pub fn power_constraint_ratio(cfg: &ChannelConfig, rho: f64, policy: &PowerPolicy, batch: usize, seed: u64) -> Result<f64> {
    let x = power_factors(cfg, rho, policy.t, batch, seed, VALIDATION_STREAM)?;
    Ok(policy.kappa * ordered_mean(&x))
}

/// Per-SNR outage estimates for one multiplexing gain.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageSweep {
    pub rho_grid: Vec<f64>,
    pub p_out: Vec<f64>,
    pub outages: Vec<u64>,
    /// 95% normal-approximation half widths.
    pub ci_half_width: Vec<f64>,
    pub kappa: Vec<f64>,
    pub trials: usize,
    pub r: f64,
    /// Least-squares slope of `ln p_out` against `ln ρ`; `None` when fewer
    /// than two SNR points have [`MIN_SLOPE_EVENTS`] outages.
    pub fitted_slope: Option<f64>,
}

/// Least-squares slope of `ln p` against `ln ρ` over points with at least
/// `min_events` outages.
pub fn fit_log_log_slope(rho: &[f64], p: &[f64], outages: &[u64], min_events: u64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rho
        .iter()
        .zip(p)
        .zip(outages)
        .filter(|&((_, &p), &k)| k >= min_events && p > 0.0)
        .map(|((&x, &p), _)| (x.ln(), p.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `n` SNR values, log-spaced from `start_db` to `stop_db` inclusive.
pub fn rho_grid_db(start_db: f64, stop_db: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![10f64.powf(start_db / 10.0)],
        _ => (0..n)
            .map(|i| {
                let db = start_db + (stop_db - start_db) * i as f64 / (n - 1) as f64;
                10f64.powf(db / 10.0)
            })
            .collect(),
    }
}

/// Outage probability over `rho_grid` with `trials` draws per point.
///
/// `κ` is resolved per SNR point from `policy.kappa_mode`; in calibrated
/// mode every point reuses the same calibration draws.
pub fn run_sweep(
    cfg: &ChannelConfig,
    r: f64,
    rho_grid: &[f64],
    trials: usize,
    policy: &PowerPolicy,
    seed: u64,
) -> Result<OutageSweep> {
    if trials < MIN_SWEEP_TRIALS {
        return Err(DmtError::InvalidArgument(format!("need at least {MIN_SWEEP_TRIALS} trials, got {trials}")));
    }
    let increasing = rho_grid.windows(2).all(|w| w[1] > w[0]);
    if rho_grid.len() < 2 || !increasing || rho_grid[0].is_nan() || rho_grid[0] <= 0.0 {
        return Err(DmtError::InvalidArgument("SNR grid must be positive and strictly increasing".into()));
    }
    if rho_grid[rho_grid.len() - 1] / rho_grid[0] < 100.0 * (1.0 - 1e-9) {
        return Err(DmtError::InvalidArgument("SNR grid must span at least two decades".into()));
    }
    if !(0.0..=cfg.n_rx as f64).contains(&r) {
        return Err(DmtError::GainOutOfRange { r, n: cfg.n_rx });
    }

    let mut sweep = OutageSweep {
        rho_grid: rho_grid.to_vec(),
        p_out: Vec::with_capacity(rho_grid.len()),
        outages: Vec::with_capacity(rho_grid.len()),
        ci_half_width: Vec::with_capacity(rho_grid.len()),
        kappa: Vec::with_capacity(rho_grid.len()),
        trials,
        r,
        fitted_slope: None,
    };
    for (i, &rho) in rho_grid.iter().enumerate() {
        let (resolved, _) = resolve_policy(cfg, rho, policy, DEFAULT_CALIBRATION_BATCH, seed)?;
        let count = (0..trials as u64)
            .into_par_iter()
            .map(|j| outage_trial(cfg, rho, r, &resolved, derive_seed(seed, i as u64, j)).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let p = count as f64 / trials as f64;
        sweep.outages.push(count);
        sweep.p_out.push(p);
        sweep.ci_half_width.push(1.96 * (p * (1.0 - p) / trials as f64).sqrt());
        sweep.kappa.push(resolved.kappa);
    }
    sweep.fitted_slope = fit_log_log_slope(&sweep.rho_grid, &sweep.p_out, &sweep.outages, MIN_SLOPE_EVENTS);
    Ok(sweep)
}
