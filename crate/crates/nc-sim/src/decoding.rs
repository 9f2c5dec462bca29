//! Joint maximum-likelihood decoders for the relay and the destinations.
//!
//! All decoders minimize a squared-distance metric by exhaustive search over
//! candidate labels. Ties are broken lexicographically: the search visits
//! label pairs in ascending `(s1, s2)` order and only a strictly smaller
//! metric replaces the incumbent, so the smallest tied pair wins. This makes
//! every decode deterministic even on engineered tie cases.

use num_complex::Complex64;

use crate::constellation::{gf_superpose, Constellation};

/// Unit-modulus relay precoder applied to the second symbol under RCNC,
/// `exp(j·3π/4)`. The quarter-turn offset keeps the superposed
/// constellation's points distinguishable for square QAM inputs.
pub const PRECODER_ALPHA: Complex64 =
    Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);

/// True source labels of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub s1_label: u16,
    pub s2_label: u16,
}

/// Outcome of a decode: estimated labels and the achieved metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeResult {
    pub s1_hat: u16,
    pub s2_hat: u16,
    /// Minimized squared-distance metric.
    pub metric: f64,
}

/// Which destination is decoding; selects which source is heard directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dest {
    D1,
    D2,
}

/// Relay decode: jointly estimates both source labels from the slot-1
/// superposition `y = g1·√kappa1·x1 + g2·√kappa2·x2 + noise`.
///
/// Under instantaneous allocation the caller passes the phase-equalized
/// coefficients (real magnitudes) in place of `g1`, `g2`.
pub fn relay_joint_ml(
    y: Complex64,
    g1: Complex64,
    g2: Complex64,
    kappa1: f64,
    kappa2: f64,
    c: &Constellation,
) -> DecodeResult {
    assert!(kappa1 >= 0.0 && kappa2 >= 0.0, "PAFs must be non-negative");
    let a1 = g1 * kappa1.sqrt();
    let a2 = g2 * kappa2.sqrt();
    let points = c.points();
    let mut best = DecodeResult {
        s1_hat: 0,
        s2_hat: 0,
        metric: f64::INFINITY,
    };
    for (s1, x1) in points.iter().enumerate() {
        let part = y - a1 * x1;
        for (s2, x2) in points.iter().enumerate() {
            let metric = (part - a2 * x2).norm_sqr();
            if metric < best.metric {
                best = DecodeResult {
                    s1_hat: s1 as u16,
                    s2_hat: s2 as u16,
                    metric,
                };
            }
        }
    }
    best
}

/// Destination decode under RCNC: jointly estimates both labels from the
/// direct slot-1 observation of the own symbol and the slot-2 relay
/// superposition.
///
/// For destination `k` the metric is
///
/// ```text
/// |y1 − hbar·√kappa_k·x_k|² + |y2 − h·(√tau1·x1 + alpha·√tau2·x2)|²
/// ```
///
/// where `x_k` is the candidate for the own symbol (`x1` at D1, `x2` at D2)
/// and `alpha` is [`PRECODER_ALPHA`].
#[allow(clippy::too_many_arguments)]
pub fn dest_joint_ml_rcnc(
    y1: Complex64,
    y2: Complex64,
    hbar: Complex64,
    h: Complex64,
    kappa_k: f64,
    tau1: f64,
    tau2: f64,
    dest: Dest,
    c: &Constellation,
) -> DecodeResult {
    assert!(
        kappa_k >= 0.0 && tau1 >= 0.0 && tau2 >= 0.0,
        "PAFs must be non-negative"
    );
    let a_own = hbar * kappa_k.sqrt();
    let b1 = h * tau1.sqrt();
    let b2 = h * PRECODER_ALPHA * tau2.sqrt();
    let points = c.points();
    let mut best = DecodeResult {
        s1_hat: 0,
        s2_hat: 0,
        metric: f64::INFINITY,
    };
    for (s1, x1) in points.iter().enumerate() {
        let relay_part = y2 - b1 * x1;
        let direct1 = match dest {
            Dest::D1 => (y1 - a_own * x1).norm_sqr(),
            Dest::D2 => 0.0,
        };
        for (s2, x2) in points.iter().enumerate() {
            let direct = match dest {
                Dest::D1 => direct1,
                Dest::D2 => (y1 - a_own * x2).norm_sqr(),
            };
            let metric = direct + (relay_part - b2 * x2).norm_sqr();
            if metric < best.metric {
                best = DecodeResult {
                    s1_hat: s1 as u16,
                    s2_hat: s2 as u16,
                    metric,
                };
            }
        }
    }
    best
}

/// Destination decode under RGNC: two independent single-symbol decodes, one
/// per slot, then the partner label is extracted by XOR.
///
/// The own label minimizes `|y1 − hbar·√kappa_k·x|²`; the relay label
/// minimizes `|y2 − h·√tau·x|²`; the partner estimate is the GF
/// superposition of the two. The reported metric is the sum of both minima.
#[allow(clippy::too_many_arguments)]
pub fn dest_ml_rgnc(
    y1: Complex64,
    y2: Complex64,
    hbar: Complex64,
    h: Complex64,
    kappa_k: f64,
    tau: f64,
    dest: Dest,
    c: &Constellation,
) -> DecodeResult {
    assert!(kappa_k >= 0.0 && tau >= 0.0, "PAFs must be non-negative");
    let (own, m1) = single_symbol_ml(y1, hbar * kappa_k.sqrt(), c);
    let (relay, m2) = single_symbol_ml(y2, h * tau.sqrt(), c);
    let partner = gf_superpose(own, relay);
    let (s1_hat, s2_hat) = match dest {
        Dest::D1 => (own, partner),
        Dest::D2 => (partner, own),
    };
    DecodeResult {
        s1_hat,
        s2_hat,
        metric: m1 + m2,
    }
}

/// Single-symbol ML scan with lexicographic tie-break.
fn single_symbol_ml(y: Complex64, a: Complex64, c: &Constellation) -> (u16, f64) {
    let mut best = (0u16, f64::INFINITY);
    for (s, x) in c.points().iter().enumerate() {
        let metric = (y - a * x).norm_sqr();
        if metric < best.1 {
            best = (s as u16, metric);
        }
    }
    best
}
