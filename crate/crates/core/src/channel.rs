//! Channel and CSIT-error generation, Hermitian eigenvalues, and the
//! random-matrix checks built on them.
//!
//! Conventions: `H` is `N × M` with i.i.d. `CN(0, 1)` entries (real and
//! imaginary parts each of variance 1/2). The transmitter's estimate is
//! `Ĥ = H + E` where `E` has i.i.d. `CN(0, σ_e²)` entries and
//! `σ_e² = ρ^(-α)`. All eigenvalue vectors are sorted ascending.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{DmtError, Result};
use crate::rng::seeded_rng;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Antenna counts and CSIT quality.
///
/// The constructor swaps the antenna counts when fewer transmit than receive
/// antennas are given, so `m_tx >= n_rx` always holds afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub m_tx: usize,
    pub n_rx: usize,
    pub alpha: f64,
    pub block_len: Option<usize>,
}

impl ChannelConfig {
    pub fn new(m_tx: usize, n_rx: usize, alpha: f64) -> Result<Self> {
        if m_tx == 0 || n_rx == 0 {
            return Err(DmtError::InvalidConfig(format!(
                "antenna counts must be positive, got M = {m_tx}, N = {n_rx}"
            )));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(DmtError::InvalidConfig(format!(
                "CSIT quality must be finite and nonnegative, got {alpha}"
            )));
        }
        let (m_tx, n_rx) = if n_rx > m_tx { (n_rx, m_tx) } else { (m_tx, n_rx) };
        Ok(Self { m_tx, n_rx, alpha, block_len: None })
    }

    /// Attaches a block length; it must be at least `M + N - 1`.
    pub fn with_block_len(mut self, block_len: usize) -> Result<Self> {
        let min = self.m_tx + self.n_rx - 1;
        if block_len < min {
            return Err(DmtError::InvalidConfig(format!(
                "block length {block_len} below M + N - 1 = {min}"
            )));
        }
        self.block_len = Some(block_len);
        Ok(self)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let mut cfg = Self::new(self.m_tx, self.n_rx, alpha)?;
        cfg.block_len = self.block_len;
        Ok(cfg)
    }

    /// Exponent weight `2n - 1 + M - N` of the `n`-th (1-based) ordered
    /// eigenvalue.
    pub fn weight(&self, n: usize) -> f64 {
        (2 * n + self.m_tx - self.n_rx - 1) as f64
    }

    /// All weights, `n = 1..=N`.
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.n_rx).map(|n| self.weight(n)).collect()
    }

    /// Estimation error variance `ρ^(-α)`.
    pub fn error_variance(&self, rho: f64) -> f64 {
        rho.powf(-self.alpha)
    }
}

/// One realisation of the true channel and the transmitter's estimation
/// error. The estimate `Ĥ = H + E` is derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub h: CMatrix,
    pub e: CMatrix,
    pub sigma_e_sq: f64,
}

impl ChannelDraw {
    pub fn h_hat(&self) -> CMatrix {
        &self.h + &self.e
    }

    pub fn eigen_triple(&self) -> Result<EigenTriple> {
        Ok(EigenTriple {
            a: eig_ascending(&self.h)?,
            b: eig_ascending(&self.h_hat())?,
            c: eig_ascending(&self.e)?,
        })
    }
}

/// Ascending eigenvalues of `HH†` (`a`), `ĤĤ†` (`b`) and `EE†` (`c`).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriple {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std_per_part: f64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * std_per_part, im * std_per_part)
}

/// Draws `(H, E)` from `rng`. `H` is filled first, column-major, then `E`.
pub fn sample_channel_with<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    rho: f64,
    rng: &mut R,
) -> Result<ChannelDraw> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(DmtError::InvalidArgument(format!("SNR must be positive and finite, got {rho}")));
    }
    let (n, m) = (cfg.n_rx, cfg.m_tx);
    let sigma_e_sq = cfg.error_variance(rho);
    let h_std = std::f64::consts::FRAC_1_SQRT_2;
    let e_std = (sigma_e_sq / 2.0).sqrt();
    let h = CMatrix::from_fn(n, m, |_, _| complex_gaussian(rng, h_std));
    let e = CMatrix::from_fn(n, m, |_, _| complex_gaussian(rng, e_std));
    Ok(ChannelDraw { h, e, sigma_e_sq })
}

/// Draws one channel and estimation error, deterministically in `seed`.
pub fn sample_channel(cfg: &ChannelConfig, rho: f64, seed: u64) -> Result<ChannelDraw> {
    sample_channel_with(cfg, rho, &mut seeded_rng(seed))
}

/// Eigenvalues of `m·m†`, ascending, with round-off negatives clamped to 0.
pub fn eig_ascending(m: &CMatrix) -> Result<Vec<f64>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(DmtError::NonFiniteMatrix);
    }
    let gram = m * m.adjoint();
    let mut eig: Vec<f64> = match gram.nrows() {
        0 => Vec::new(),
        1 => vec![gram[(0, 0)].re],
        _ => gram.symmetric_eigenvalues().iter().copied().collect(),
    };
    eig.sort_by(f64::total_cmp);
    for x in &mut eig {
        *x = x.max(0.0);
    }
    Ok(eig)
}

/// `b_n <= 2(a_n + c_N)` for every `n`, up to `1e-9 · max(1, b_N)`.
pub fn check_lemma1(t: &EigenTriple) -> Result<bool> {
    let n = t.b.len();
    for len in [t.a.len(), t.c.len()] {
        if len != n {
            return Err(DmtError::LengthMismatch { expected: n, got: len });
        }
    }
    if n == 0 {
        return Ok(true);
    }
    let c_max = t.c[n - 1];
    let eps = 1e-9 * t.b[n - 1].max(1.0);
    Ok(t.b.iter().zip(&t.a).all(|(&b, &a)| b <= 2.0 * (a + c_max) + eps))
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `ln ξ` with `ξ = ∏_{i=1..N} (M-i)! (N-i)!`, the normaliser of the ordered
/// eigenvalue density of an `N × M` complex Wishart matrix.
pub fn wishart_log_norm_const(m: usize, n: usize) -> Result<f64> {
    if n == 0 || m < n {
        return Err(DmtError::InvalidArgument(format!("need M >= N >= 1, got M = {m}, N = {n}")));
    }
    Ok((1..=n).map(|i| ln_factorial(m - i) + ln_factorial(n - i)).sum())
}

/// Log of the unnormalised ordered-eigenvalue density
/// `∏ λ^(M-N) ∏_{i<j} (λ_i - λ_j)² exp(-Σ λ)`, or `-∞` when it vanishes.
pub fn wishart_log_density_unnormalized(m: usize, eig: &[f64]) -> f64 {
    let n = eig.len();
    let power = (m - n) as f64;
    let mut acc = -eig.iter().sum::<f64>();
    for (i, &x) in eig.iter().enumerate() {
        if power > 0.0 {
            acc += power * x.ln();
        }
        for &y in &eig[i + 1..] {
            acc += 2.0 * (x - y).abs().ln();
        }
    }
    acc
}

/// `-log x / log ρ`, the exponent order of `1/x` at SNR `ρ`.
pub fn exponent_order(x: f64, rho: f64) -> f64 {
    -x.ln() / rho.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, n: usize, alpha: f64) -> ChannelConfig {
        ChannelConfig::new(m, n, alpha).unwrap()
    }

    #[test]
    fn config_canonicalises_antenna_order() {
        let c = cfg(2, 4, 0.3);
        assert_eq!((c.m_tx, c.n_rx), (4, 2));
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(ChannelConfig::new(0, 1, 0.0).is_err());
        assert!(ChannelConfig::new(2, 2, -0.1).is_err());
        assert!(ChannelConfig::new(2, 2, f64::NAN).is_err());
        assert!(cfg(3, 2, 0.0).with_block_len(3).is_err());
        assert_eq!(cfg(3, 2, 0.0).with_block_len(4).unwrap().block_len, Some(4));
    }

    #[test]
    fn error_variance_examples() {
        let d = sample_channel(&cfg(2, 2, 0.0), 100.0, 1).unwrap();
        assert_eq!(d.sigma_e_sq, 1.0);
        let d = sample_channel(&cfg(4, 1, 1.0), 1000.0, 1).unwrap();
        assert!((d.sigma_e_sq - 1e-3).abs() < 1e-18);
        assert_eq!((d.h.nrows(), d.h.ncols()), (1, 4));
        assert!(sample_channel(&cfg(2, 2, 0.5), 0.0, 1).is_err());
    }

    #[test]
    fn same_seed_same_draw() {
        let c = cfg(3, 2, 0.7);
        assert_eq!(sample_channel(&c, 50.0, 9).unwrap(), sample_channel(&c, 50.0, 9).unwrap());
        assert_ne!(sample_channel(&c, 50.0, 9).unwrap(), sample_channel(&c, 50.0, 10).unwrap());
    }

    #[test]
    fn entry_moments_match_model() {
        let c = cfg(4, 4, 1.0);
        let rho = 10.0;
        let (mut h2, mut e2, mut h_re2, mut count) = (0.0, 0.0, 0.0, 0.0);
        for seed in 0..4000 {
            let d = sample_channel(&c, rho, seed).unwrap();
            for (h, e) in d.h.iter().zip(d.e.iter()) {
                h2 += h.norm_sqr();
                e2 += e.norm_sqr();
                h_re2 += h.re * h.re;
                count += 1.0;
            }
        }
        assert!((h2 / count - 1.0).abs() < 0.02);
        assert!((h_re2 / count - 0.5).abs() < 0.01);
        assert!((e2 / count - 0.1).abs() < 0.002);
    }

    #[test]
    fn eig_trivial_cases() {
        let one = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        assert_eq!(eig_ascending(&one).unwrap(), vec![1.0]);
        assert_eq!(eig_ascending(&CMatrix::zeros(2, 2)).unwrap(), vec![0.0, 0.0]);
        let mut bad = CMatrix::zeros(2, 2);
        bad[(1, 0)] = C64::new(f64::NAN, 0.0);
        assert_eq!(eig_ascending(&bad), Err(DmtError::NonFiniteMatrix));
    }

    #[test]
    fn eig_matches_two_by_two_closed_form() {
        for seed in 0..200 {
            let d = sample_channel(&cfg(3, 2, 0.0), 10.0, seed).unwrap();
            let g = &d.h * d.h.adjoint();
            let (p, s, q) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)].norm_sqr());
            let mid = 0.5 * (p + s);
            let rad = (0.25 * (p - s) * (p - s) + q).sqrt();
            let eig = eig_ascending(&d.h).unwrap();
            for (got, want) in eig.iter().zip([mid - rad, mid + rad]) {
                assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }

    #[test]
    fn lemma1_examples() {
        let t = EigenTriple { a: vec![1.0, 2.0], b: vec![2.0, 4.0], c: vec![0.0, 0.0] };
        assert!(check_lemma1(&t).unwrap());
        let t = EigenTriple { a: vec![0.0, 0.0], b: vec![1.0, 1.0], c: vec![0.0, 0.0] };
        assert!(!check_lemma1(&t).unwrap());
        let t = EigenTriple { a: vec![0.0], b: vec![1.0, 1.0], c: vec![0.0, 0.0] };
        assert!(matches!(check_lemma1(&t), Err(DmtError::LengthMismatch { .. })));
    }

    #[test]
    fn norm_const_small_cases() {
        assert_eq!(wishart_log_norm_const(1, 1).unwrap(), 0.0);
        assert_eq!(wishart_log_norm_const(2, 1).unwrap(), 0.0);
        assert_eq!(wishart_log_norm_const(2, 2).unwrap(), 0.0);
        // (2!·1!)(1!·0!) = 2
        assert!((wishart_log_norm_const(3, 2).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(wishart_log_norm_const(1, 2).is_err());
        assert!(wishart_log_norm_const(40, 40).unwrap().is_finite());
    }
}
