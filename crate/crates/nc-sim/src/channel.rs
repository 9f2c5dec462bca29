//! Rayleigh block fading and receiver noise.
//!
//! A frame sees six independent CN(0, 1) coefficients, constant over its two
//! slots: `g1`, `g2` from the sources to the relay, `h1`, `h2` from the relay
//! to the destinations, and `hbar1`, `hbar2` on the direct source-destination
//! links. Every receiver in the cell shares the same noise variance
//! `sigma² = P/rho`, where `rho` is the nominal SNR.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// One block-fading draw: the six link coefficients of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// Source 1 to relay.
    pub g1: Complex64,
    /// Source 2 to relay.
    pub g2: Complex64,
    /// Relay to destination 1.
    pub h1: Complex64,
    /// Relay to destination 2.
    pub h2: Complex64,
    /// Source 1 to destination 1 (direct link).
    pub hbar1: Complex64,
    /// Source 2 to destination 2 (direct link).
    pub hbar2: Complex64,
}

/// Common receiver noise model, `sigma² = P/rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    /// Noise variance for a nominal SNR in dB at reference power `p`.
    ///
    /// `snr_db = +inf` yields a noiseless model (`sigma² = 0`).
    pub fn from_snr_db(snr_db: f64, p: f64) -> Result<Self> {
        if snr_db.is_nan() {
            return Err(Error::OutOfRange {
                name: "snr_db",
                value: snr_db,
                constraint: "SNR must not be NaN",
            });
        }
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                constraint: "reference power must be finite and positive",
            });
        }
        Ok(Self {
            sigma2: p / snr_db_to_rho(snr_db),
        })
    }

    /// Per-receiver complex noise variance.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// Linear SNR `rho = 10^(snr_db/10)`.
pub fn snr_db_to_rho(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// One CN(0, `variance`) sample: independent real and imaginary parts, each
/// N(0, `variance`/2). Draws the real part first.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Draws the six coefficients of one frame, in field order (`g1`, `g2`,
/// `h1`, `h2`, `hbar1`, `hbar2`), each CN(0, 1).
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R) -> ChannelRealization {
    ChannelRealization {
        g1: complex_gaussian(rng, 1.0),
        g2: complex_gaussian(rng, 1.0),
        h1: complex_gaussian(rng, 1.0),
        h2: complex_gaussian(rng, 1.0),
        hbar1: complex_gaussian(rng, 1.0),
        hbar2: complex_gaussian(rng, 1.0),
    }
}

/// Adds CN(0, `sigma2`) noise to a received sample.
///
/// `sigma2 = 0` returns the sample unchanged without consuming the stream;
/// negative variance is an error.
pub fn awgn<R: Rng + ?Sized>(sample: Complex64, sigma2: f64, rng: &mut R) -> Result<Complex64> {
    if sigma2 < 0.0 {
        return Err(Error::NegativeVariance(sigma2));
    }
    if sigma2 == 0.0 {
        return Ok(sample);
    }
    Ok(sample + complex_gaussian(rng, sigma2))
}
