//! Power allocation factors (PAFs) for the two sources and the relay.
//!
//! A frame's power budget is split as `kappa1 + kappa2 + tau1 + tau2 = 1`:
//! `kappa_k` scales source `k` in slot 1, `tau_k` scales the relay's share
//! for symbol `k` in slot 2 (RGNC uses the single sum `tau = tau1 + tau2`).
//!
//! Two allocation styles are provided. OSPAS picks one `kappa` from the rate
//! alone by minimizing the high-SNR system frame error approximation
//! averaged over the fading statistics. IPAS (RCNC only) re-solves the
//! minimization per frame from the instantaneous channel magnitudes.

use num_complex::Complex64;

use crate::{Error, Protocol, Result};

/// Largest deviation from 1 tolerated for the PAF sum.
pub const PAF_SUM_TOLERANCE: f64 = 1e-12;

/// One frame's power split across both sources and the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PafSet {
    /// Source 1 share in slot 1.
    pub kappa1: f64,
    /// Source 2 share in slot 1.
    pub kappa2: f64,
    /// Relay share for symbol 1 in slot 2.
    pub tau1: f64,
    /// Relay share for symbol 2 in slot 2.
    pub tau2: f64,
}

impl PafSet {
    /// Total source share `kappa1 + kappa2`.
    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2
    }

    /// Total relay share `tau1 + tau2`.
    pub fn tau(&self) -> f64 {
        self.tau1 + self.tau2
    }

    /// Checks non-negativity and the sum-to-one budget.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    constraint: "each factor must lie in [0, 1]",
                });
            }
        }
        let sum = self.kappa1 + self.kappa2 + self.tau1 + self.tau2;
        if (sum - 1.0).abs() > PAF_SUM_TOLERANCE {
            return Err(Error::OutOfRange {
                name: "kappa1+kappa2+tau1+tau2",
                value: sum,
                constraint: "factors must sum to 1",
            });
        }
        Ok(())
    }
}

/// How the per-frame PAFs are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AllocationScheme {
    /// Statistical split with a caller-chosen total source share.
    FixedKappa(f64),
    /// Statistical split with the rate-optimal source share.
    Ospas,
    /// Per-frame split from instantaneous channel magnitudes (RCNC only).
    Ipas,
}

impl AllocationScheme {
    /// Lowercase name used in CSV output and config files.
    pub fn name(&self) -> &'static str {
        match self {
            AllocationScheme::FixedKappa(_) => "fixed",
            AllocationScheme::Ospas => "ospas",
            AllocationScheme::Ipas => "ipas",
        }
    }
}

fn check_rate(rate: u32) -> Result<()> {
    if rate == 0 {
        return Err(Error::OutOfRange {
            name: "rate",
            value: 0.0,
            constraint: "rate must be at least 1 bit per symbol",
        });
    }
    Ok(())
}

/// Rate-optimal statistical source share for RCNC:
/// `kappa = sqrt(2^(R−2)) / (sqrt(2^(R−2)) + 1)`.
///
/// This is the minimizer of the high-SNR system error objective
/// `2^(R−1)/kappa + 2/(1−kappa)` over `kappa` in (0, 1).
pub fn ospas_kappa_rcnc(rate: u32) -> Result<f64> {
    check_rate(rate)?;
    let s = 2f64.powi(rate as i32 - 2).sqrt();
    Ok(s / (s + 1.0))
}

/// Rate-optimal statistical source share for RGNC:
/// `kappa = sqrt(2^(R−1) + 2) / (sqrt(2^(R−1) + 2) + 1)`.
///
/// This is the minimizer of `(2^(R−1) + 2)/kappa + 1/(1−kappa)` over (0, 1).
pub fn ospas_kappa_rgnc(rate: u32) -> Result<f64> {
    check_rate(rate)?;
    let s = (2f64.powi(rate as i32 - 1) + 2.0).sqrt();
    Ok(s / (s + 1.0))
}

/// Rate-optimal statistical source share for either protocol.
pub fn ospas_kappa(protocol: Protocol, rate: u32) -> Result<f64> {
    match protocol {
        Protocol::Rcnc => ospas_kappa_rcnc(rate),
        Protocol::Rgnc => ospas_kappa_rgnc(rate),
    }
}

/// Statistical PAF set for a total source share `kappa`: both sources get
/// `kappa/2`, both relay halves get `(1−kappa)/2`.
pub fn make_statistical_pafset(kappa: f64) -> Result<PafSet> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            constraint: "total source share must lie strictly inside (0, 1)",
        });
    }
    Ok(PafSet {
        kappa1: kappa / 2.0,
        kappa2: kappa / 2.0,
        tau1: (1.0 - kappa) / 2.0,
        tau2: (1.0 - kappa) / 2.0,
    })
}

/// Splits a total source share so each source's contribution at the relay is
/// equalized: `kappa_k = kappa·|g_other|² / (|g1|² + |g2|²)`.
///
/// The weaker source-relay link receives the larger share, which balances
/// `kappa_1|g1|² = kappa_2|g2|²` (see [`mutual_info_share`]).
pub fn source_split(kappa: f64, g1: Complex64, g2: Complex64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            constraint: "total source share must lie strictly inside (0, 1)",
        });
    }
    let (p1, p2) = (g1.norm_sqr(), g2.norm_sqr());
    let denom = p1 + p2;
    if denom <= 0.0 {
        return Err(Error::DegenerateChannel(
            "source_split needs at least one nonzero source-relay coefficient",
        ));
    }
    Ok((kappa * p2 / denom, kappa * p1 / denom))
}

/// Fraction of the relay's received signal power contributed by each source:
/// `share_k = kappa_k|g_k|² / (kappa_1|g1|² + kappa_2|g2|²)`.
pub fn mutual_info_share(
    kappa1: f64,
    kappa2: f64,
    g1: Complex64,
    g2: Complex64,
) -> Result<(f64, f64)> {
    let a = kappa1 * g1.norm_sqr();
    let b = kappa2 * g2.norm_sqr();
    let denom = a + b;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::DegenerateChannel(
            "mutual_info_share needs nonzero received power from some source",
        ));
    }
    Ok((a / denom, b / denom))
}

/// Instantaneous PAF set for RCNC from the channel magnitudes of one frame.
///
/// Minimizes the instantaneous high-SNR system error objective
///
/// ```text
/// 2^(R−1)/(kappa·|g|²) + 1/(tau1·|h2|²) + 1/(tau2·|h1|²),
/// |g|² = |g1·g2|² / (|g1|² + |g2|²),
/// ```
///
/// over `kappa + tau1 + tau2 = 1`. The closed-form solution is
/// `kappa = sqrt(eta·2^(R−1)) / (sqrt(eta·2^(R−1)) + 1)` with
/// `eta = |h1·h2|²(|g1|² + |g2|²) / (|g1·g2|²(|h1| + |h2|)²)`, relay shares
/// `tau_k = (1−kappa)·|h_k| / (|h1| + |h2|)`, and the source shares given by
/// [`source_split`]. Any zero magnitude among the four coefficients makes
/// the objective singular and yields [`Error::DegenerateChannel`].
pub fn ipas_rcnc(
    g1: Complex64,
    g2: Complex64,
    h1: Complex64,
    h2: Complex64,
    rate: u32,
) -> Result<PafSet> {
    check_rate(rate)?;
    let (ag1, ag2, ah1, ah2) = (g1.norm(), g2.norm(), h1.norm(), h2.norm());
    if ag1 == 0.0 || ag2 == 0.0 || ah1 == 0.0 || ah2 == 0.0 {
        return Err(Error::DegenerateChannel(
            "instantaneous allocation needs all four of |g1|, |g2|, |h1|, |h2| nonzero",
        ));
    }
    let g_sum = ag1 * ag1 + ag2 * ag2;
    let h_sum = ah1 + ah2;
    let eta = (ah1 * ah2).powi(2) * g_sum / ((ag1 * ag2).powi(2) * h_sum * h_sum);
    if !eta.is_finite() || eta <= 0.0 {
        // Extreme magnitude ratios can overflow or underflow the objective.
        return Err(Error::DegenerateChannel(
            "channel magnitudes outside the representable allocation range",
        ));
    }
    let s = (eta * 2f64.powi(rate as i32 - 1)).sqrt();
    let kappa = s / (s + 1.0);
    let tau = 1.0 - kappa;
    let (kappa1, kappa2) = source_split(kappa, g1, g2)?;
    Ok(PafSet {
        kappa1,
        kappa2,
        tau1: tau * ah1 / h_sum,
        tau2: tau * ah2 / h_sum,
    })
}
