//! Closed-form achievable DMT under eigenvalue-driven power adaptation.
//!
//! Each outage subset `k` (the `k` smallest channel eigenvalues fade past the
//! CSIT error floor) has its own piecewise-linear diversity curve `d_k(r)`,
//! finite only above `(N-k)·τ(k)`. The overall DMT is their pointwise
//! minimum, which collapses to one segment per index in the expurgated set
//! `B`. Segments own their left end and exclude their right end, so at a jump
//! the curve takes the lower value.

use std::collections::BTreeMap;

use crate::channel::ChannelConfig;
use crate::error::{DmtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `N = 1` or `α >= 1/(M-1)`: one straight line over `[0, N]`.
    SingleLine,
    /// Several segments with downward jumps between them.
    Discontinuous,
    /// Reference curve (no CSIT, or rate adaptation), not a power-adaptation
    /// result.
    Baseline,
}

/// Affine piece of a DMT curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmtSegment {
    pub k: usize,
    pub r_left: f64,
    pub d_left: f64,
    pub r_right: f64,
    pub d_right: f64,
    pub left_closed: bool,
    pub right_closed: bool,
}

impl DmtSegment {
    pub fn contains(&self, r: f64) -> bool {
        let above = if self.left_closed { r >= self.r_left } else { r > self.r_left };
        let below = if self.right_closed { r <= self.r_right } else { r < self.r_right };
        above && below
    }

    pub fn slope(&self) -> f64 {
        (self.d_right - self.d_left) / (self.r_right - self.r_left)
    }

    /// Linear interpolation between the endpoints; ignores domain closure.
    pub fn value_at(&self, r: f64) -> f64 {
        if r == self.r_left {
            return self.d_left;
        }
        if r == self.r_right {
            return self.d_right;
        }
        let w = (r - self.r_left) / (self.r_right - self.r_left);
        self.d_left + w * (self.d_right - self.d_left)
    }
}

/// Piecewise-linear DMT curve over `[0, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmtCurve {
    pub cfg: ChannelConfig,
    /// Ordered by ascending `r_left`.
    pub segments: Vec<DmtSegment>,
    pub case_tag: CaseTag,
    pub b_set: Vec<usize>,
    pub tau_table: BTreeMap<usize, f64>,
}

/// A discontinuity at `r`: value approached from the left and the value the
/// curve actually takes there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub r: f64,
    pub left_limit: f64,
    pub value: f64,
}

impl DmtCurve {
    pub fn max_gain(&self) -> f64 {
        self.cfg.n_rx as f64
    }

    /// Boundaries between consecutive segments, including continuous ones.
    pub fn jumps(&self) -> Vec<Jump> {
        self.segments
            .windows(2)
            .map(|w| Jump { r: w[1].r_left, left_limit: w[0].d_right, value: w[1].d_left })
            .collect()
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        eval_dmt(self, r)
    }
}

/// `τ(k) = 1 + kα(M - N + k)`, with `τ(0) = 1`.
pub fn tau(cfg: &ChannelConfig, k: usize) -> Result<f64> {
    if k > cfg.n_rx {
        return Err(DmtError::IndexOutOfRange { k, n: cfg.n_rx });
    }
    Ok(tau_unchecked(cfg, k))
}

fn tau_unchecked(cfg: &ChannelConfig, k: usize) -> f64 {
    1.0 + (k * (cfg.m_tx - cfg.n_rx + k)) as f64 * cfg.alpha
}

/// `(N - k)·τ(k)`: the lowest gain at which subset `k` can be in outage.
fn outage_threshold(cfg: &ChannelConfig, k: usize) -> f64 {
    (cfg.n_rx - k) as f64 * tau_unchecked(cfg, k)
}

/// `(M - N + k)(N - k) < 1/α`, with `1/0 = ∞`.
fn in_set_a(cfg: &ChannelConfig, k: usize) -> bool {
    let prod = ((cfg.m_tx - cfg.n_rx + k) * (cfg.n_rx - k)) as f64;
    cfg.alpha < 1.0 / prod
}

/// Subsets whose diversity curve is finite somewhere on `[0, N]`. Always
/// contains `N`.
pub fn set_a(cfg: &ChannelConfig) -> Vec<usize> {
    (1..=cfg.n_rx).filter(|&k| in_set_a(cfg, k)).collect()
}

/// Expurgated set `B` and the predecessor map `I`.
///
/// `k ∈ A` survives when its outage threshold is strictly below that of
/// every smaller index in `A`; on a tie the smaller index wins.
/// `I(k)` is the previous element of `B`, and `I(min B) = 0`.
pub fn set_b(cfg: &ChannelConfig) -> (Vec<usize>, BTreeMap<usize, usize>) {
    let a = set_a(cfg);
    let mut b = Vec::new();
    for (i, &k) in a.iter().enumerate() {
        let thr = outage_threshold(cfg, k);
        if a[..i].iter().all(|&kb| thr < outage_threshold(cfg, kb)) {
            b.push(k);
        }
    }
    let pred = b
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, if i == 0 { 0 } else { b[i - 1] }))
        .collect();
    (b, pred)
}

/// Corner of `d_k(r)` where the `k'` weakest eigenvalues sit at `τ(k)` and
/// the rest of the subset at `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerPoint {
    pub k_prime: usize,
    pub r: f64,
    pub d: f64,
    /// False when `r > N`.
    pub in_domain: bool,
}

fn check_subset_index(cfg: &ChannelConfig, k: usize) -> Result<()> {
    if k == 0 || k > cfg.n_rx {
        return Err(DmtError::IndexOutOfRange { k, n: cfg.n_rx });
    }
    Ok(())
}

fn check_gain(cfg: &ChannelConfig, r: f64) -> Result<()> {
    if !(0.0..=cfg.n_rx as f64).contains(&r) {
        return Err(DmtError::GainOutOfRange { r, n: cfg.n_rx });
    }
    Ok(())
}

/// Corners of `d_k(r)` for `k' = 1..=k`.
pub fn dk_corner_points(cfg: &ChannelConfig, k: usize) -> Result<Vec<CornerPoint>> {
    check_subset_index(cfg, k)?;
    let (m, n) = (cfg.m_tx as f64, cfg.n_rx as f64);
    let (kf, alpha) = (k as f64, cfg.alpha);
    let t = tau_unchecked(cfg, k);
    Ok((1..=k)
        .map(|kp| {
            let kp_f = kp as f64;
            let r = (n - kp_f) * t - (kf - kp_f) * alpha;
            let d = kp_f * (m - n + kp_f) * t + (kf - kp_f) * (kf + kp_f + m - n) * alpha;
            CornerPoint { k_prime: kp, r, d, in_domain: r <= n }
        })
        .collect())
}

/// `d_k(r)`: `+∞` below the subset's outage threshold or when `k ∉ A`,
/// otherwise the affine piece between consecutive corners.
pub fn dk_eval(cfg: &ChannelConfig, k: usize, r: f64) -> Result<f64> {
    check_subset_index(cfg, k)?;
    check_gain(cfg, r)?;
    if !in_set_a(cfg, k) || r <= outage_threshold(cfg, k) {
        return Ok(f64::INFINITY);
    }
    let (m, n) = (cfg.m_tx as f64, cfg.n_rx as f64);
    let (kf, alpha) = (k as f64, cfg.alpha);
    let t = tau_unchecked(cfg, k);
    let corner_r = |kp: f64| (n - kp) * t - (kf - kp) * alpha;
    for kp in (1..=k).rev() {
        let kp = kp as f64;
        if kp == 1.0 || r < corner_r(kp - 1.0) {
            let d = ((n - kp) * (kp - n - 1.0) + m * n) * t + (kf - kp + 1.0) * (kf - kp) * alpha
                - (2.0 * kp - 1.0 + m - n) * r;
            return Ok(d);
        }
    }
    unreachable!("k >= 1 always reaches k' = 1")
}

/// The achievable DMT curve.
pub fn compute_dmt_curve(cfg: &ChannelConfig) -> DmtCurve {
    let (m, n) = (cfg.m_tx as f64, cfg.n_rx as f64);
    let tau_table: BTreeMap<usize, f64> = (0..=cfg.n_rx).map(|k| (k, tau_unchecked(cfg, k))).collect();
    let (b_set, pred) = set_b(cfg);

    let mut segments: Vec<DmtSegment> = b_set
        .iter()
        .map(|&k| {
            let kf = k as f64;
            let t = tau_table[&k];
            let ik = pred[&k];
            let r_right = (n - ik as f64) * tau_table[&ik];
            DmtSegment {
                k,
                r_left: (n - kf) * t,
                d_left: kf * (m - n + kf) * t,
                r_right,
                d_right: ((n - kf) * (kf - n - 1.0) + m * n) * t - (2.0 * kf - 1.0 + m - n) * r_right,
                left_closed: true,
                right_closed: ik == 0,
            }
        })
        .collect();
    segments.sort_by(|x, y| x.r_left.total_cmp(&y.r_left));

    let case_tag = if segments.len() == 1 { CaseTag::SingleLine } else { CaseTag::Discontinuous };
    DmtCurve { cfg: *cfg, segments, case_tag, b_set, tau_table }
}

/// Value of the curve at `r`. At a jump the segment starting there owns the
/// point. `r = 0` returns the closed left end of the first segment.
pub fn eval_dmt(curve: &DmtCurve, r: f64) -> Result<f64> {
    check_gain(&curve.cfg, r)?;
    curve
        .segments
        .iter()
        .find(|s| s.contains(r))
        .or_else(|| curve.segments.last().filter(|s| r == s.r_right))
        .map(|s| s.value_at(r))
        .ok_or(DmtError::GainOutOfRange { r, n: curve.cfg.n_rx })
}

/// Optimal DMT without CSIT: `(M - r)(N - r)` at integer `r`, linear between.
pub fn baseline_no_csit(cfg: &ChannelConfig) -> DmtCurve {
    let (m, n) = (cfg.m_tx, cfg.n_rx);
    let corner = |j: usize| ((m - j) * (n - j)) as f64;
    let segments = (0..n)
        .map(|j| DmtSegment {
            k: n - j,
            r_left: j as f64,
            d_left: corner(j),
            r_right: (j + 1) as f64,
            d_right: corner(j + 1),
            left_closed: true,
            right_closed: j + 1 == n,
        })
        .collect();
    DmtCurve {
        cfg: *cfg,
        segments,
        case_tag: CaseTag::Baseline,
        b_set: Vec::new(),
        tau_table: BTreeMap::new(),
    }
}

/// Average DMT with rate adaptation, `K(1 + α - r)`; SIMO/MISO only.
pub fn baseline_rate_adaptation(cfg: &ChannelConfig) -> Result<DmtCurve> {
    if cfg.n_rx != 1 {
        return Err(DmtError::NotSingleAntenna(cfg.n_rx));
    }
    let k = cfg.m_tx as f64;
    Ok(DmtCurve {
        cfg: *cfg,
        segments: vec![DmtSegment {
            k: 1,
            r_left: 0.0,
            d_left: k * (1.0 + cfg.alpha),
            r_right: 1.0,
            d_right: k * cfg.alpha,
            left_closed: true,
            right_closed: true,
        }],
        case_tag: CaseTag::Baseline,
        b_set: Vec::new(),
        tau_table: BTreeMap::new(),
    })
}

/// Closed-form `d(N) = pα(M-N+p)(MN + (p-N)(N-p+1)) - p² + p` with
/// `p = min B`.
pub fn full_gain_diversity(cfg: &ChannelConfig) -> f64 {
    let (b, _) = set_b(cfg);
    branch_full_gain(cfg, b[0])
}

/// `d(N)` on the branch where `p = min B`, continued to any `α`.
pub fn branch_full_gain(cfg: &ChannelConfig, p: usize) -> f64 {
    let p = p as f64;
    let (m, n) = (cfg.m_tx as f64, cfg.n_rx as f64);
    p * cfg.alpha * (m - n + p) * (m * n + (p - n) * (n - p + 1.0)) - p * p + p
}

/// Diversity added by imperfect CSIT on top of the no-CSIT optimum.
pub fn csit_diversity_gain(cfg: &ChannelConfig, r: f64) -> Result<f64> {
    Ok(eval_dmt(&compute_dmt_curve(cfg), r)? - eval_dmt(&baseline_no_csit(cfg), r)?)
}
