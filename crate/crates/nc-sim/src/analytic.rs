//! Frame-error-probability approximations in the high-SNR regime.
//!
//! The relay's exact average pairwise error probability is a finite average
//! over codeword-pair error events of a single-integral form evaluated by
//! composite Gauss-Legendre quadrature. Its high-SNR limit replaces each
//! integral by `2/(rho·|u|²)`, which collapses the system frame error
//! probability to closed forms in the power split `kappa`:
//!
//! ```text
//! RCNC: 2^R·rho^(−1)·(2^(R−1)/kappa + 2/tau)
//! RGNC: 2^R·rho^(−1)·((2^(R−1) + 2)/kappa + 1/tau),   tau = 1 − kappa
//! ```
//!
//! The two curves cross at `kappa = 2/3` for every rate and SNR.

use crate::constellation::Constellation;
use crate::{Error, Protocol, Result};

/// Default node budget for the pairwise-error quadrature.
pub const DEFAULT_QUADRATURE_POINTS: usize = 256;

/// Smallest accepted quadrature node budget.
pub const MIN_QUADRATURE_POINTS: usize = 64;

/// One evaluated point of a closed-form error curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub protocol: Protocol,
    pub rate: u32,
    pub kappa: f64,
    pub tau: f64,
    pub rho: f64,
    /// High-SNR system frame error approximation at this point.
    pub sfep: f64,
}

/// Multiset of squared symbol-difference magnitudes `|x − x̂|²/P` over
/// ordered point pairs of one constellation, with multiplicities.
///
/// A symbol role's normalized error magnitude is `|u|² = paf·d²` where `d²`
/// is an entry here and `paf` is the role's power allocation factor.
#[derive(Debug, Clone)]
pub struct ErrorSpectrum {
    /// Distinct `d²` values with the number of ordered pairs attaining them.
    entries: Vec<(f64, u64)>,
    total: u64,
}

impl ErrorSpectrum {
    /// Spectrum over all ordered pairs with `x̂ ≠ x`; contains no zeros.
    pub fn nonzero(c: &Constellation) -> Self {
        Self::build(c, false)
    }

    /// Spectrum over all ordered pairs including `x̂ = x`; used for moment
    /// identities that average over independent uniform symbols.
    pub fn full(c: &Constellation) -> Self {
        Self::build(c, true)
    }

    fn build(c: &Constellation, include_equal: bool) -> Self {
        let m = 1u64 << (c.rate() / 2); // levels per axis
        // Points differ by even integer multiples of the grid scale per
        // axis; grouping by the integer squared distance keeps the
        // multiset exact. |i1−i2| = a occurs 2(m−a) times for a > 0 and m
        // times for a = 0, per axis.
        let axis_count = |a: u64| if a == 0 { m } else { 2 * (m - a) };
        let unit = 4.0 * c.scale() * c.scale() / c.power();
        let mut cells = std::collections::BTreeMap::new();
        for ai in 0..m {
            for aq in 0..m {
                if !include_equal && ai == 0 && aq == 0 {
                    continue;
                }
                let key = ai * ai + aq * aq;
                *cells.entry(key).or_insert(0u64) += axis_count(ai) * axis_count(aq);
            }
        }
        let mut total = 0;
        let entries = cells
            .into_iter()
            .map(|(key, count)| {
                total += count;
                (unit * key as f64, count)
            })
            .collect();
        Self { entries, total }
    }

    /// Distinct `(d², multiplicity)` entries in increasing `d²` order.
    pub fn entries(&self) -> &[(f64, u64)] {
        &self.entries
    }

    /// Number of ordered pairs covered.
    pub fn total_count(&self) -> u64 {
        self.total
    }

    /// Multiplicity-weighted mean of `d²`.
    pub fn mean(&self) -> f64 {
        let sum: f64 = self.entries.iter().map(|(d2, n)| d2 * *n as f64).sum();
        sum / self.total as f64
    }

    /// Multiplicity-weighted mean of `f(d²)`.
    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        let sum: f64 = self.entries.iter().map(|(d2, n)| f(*d2) * *n as f64).sum();
        sum / self.total as f64
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::OutOfRange {
            name: "rho",
            value: rho,
            constraint: "linear SNR must be positive",
        });
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            constraint: "source share must lie strictly inside (0, 1)",
        });
    }
    Ok(())
}

/// Exact average pairwise error probability of the relay's joint decode,
/// averaged over all ordered codeword-pair error events:
///
/// ```text
/// mean over (u1,u2) ≠ (0,0) of (rho^(−1)/π)·∫_0^(π/2)
///     (1/rho + (|u1|² + |u2|²)/(8 sin²θ))^(−1) dθ
/// ```
///
/// with `|u_k|² = kappa_k·d_k²`. Integrals use composite Gauss-Legendre
/// with `quadrature_points` nodes (at least [`MIN_QUADRATURE_POINTS`]).
pub fn apep_relay(
    kappa1: f64,
    kappa2: f64,
    rho: f64,
    c: &Constellation,
    quadrature_points: usize,
) -> Result<f64> {
    assert!(kappa1 >= 0.0 && kappa2 >= 0.0, "PAFs must be non-negative");
    check_rho(rho)?;
    if !rho.is_finite() {
        return Err(Error::OutOfRange {
            name: "rho",
            value: rho,
            constraint: "the pairwise error integral needs a finite SNR",
        });
    }
    if quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(Error::QuadratureBudget(quadrature_points));
    }
    let spectrum = ErrorSpectrum::full(c);
    let mut sum = 0.0;
    let mut events = 0u64;
    for &(d1, n1) in spectrum.entries() {
        for &(d2, n2) in spectrum.entries() {
            if d1 == 0.0 && d2 == 0.0 {
                continue;
            }
            let s = kappa1 * d1 + kappa2 * d2;
            let integral = quadrature::integrate(
                |theta| {
                    let sin2 = theta.sin().powi(2);
                    1.0 / (1.0 / rho + s / (8.0 * sin2))
                },
                0.0,
                std::f64::consts::FRAC_PI_2,
                quadrature_points,
            );
            sum += (n1 * n2) as f64 * integral / (rho * std::f64::consts::PI);
            events += n1 * n2;
        }
    }
    Ok(sum / events as f64)
}

/// High-SNR relay frame error approximation:
/// `2^(2R) · mean over error events of 2/(rho·(|u1|² + |u2|²))`.
pub fn relay_fep_highsnr(kappa1: f64, kappa2: f64, rho: f64, c: &Constellation) -> Result<f64> {
    assert!(kappa1 >= 0.0 && kappa2 >= 0.0, "PAFs must be non-negative");
    check_rho(rho)?;
    let spectrum = ErrorSpectrum::full(c);
    let mut sum = 0.0;
    let mut events = 0u64;
    for &(d1, n1) in spectrum.entries() {
        for &(d2, n2) in spectrum.entries() {
            if d1 == 0.0 && d2 == 0.0 {
                continue;
            }
            sum += (n1 * n2) as f64 * 2.0 / (rho * (kappa1 * d1 + kappa2 * d2));
            events += n1 * n2;
        }
    }
    let size = c.size() as f64;
    Ok(size * size * sum / events as f64)
}

/// High-SNR destination frame error approximation given a correct relay.
///
/// RCNC extracts the partner symbol from the relay superposition, so only
/// the partner's relay share matters: `tau` is `tau_k̄` and `kappa_k` is
/// unused by the formula. RGNC decodes the own symbol in slot 1 and the
/// relay symbol in slot 2, so both terms appear with `tau = tau1 + tau2`:
///
/// ```text
/// RCNC: 2^R · mean over x ≠ x̂ of 2/(rho·tau·d²)
/// RGNC: 2^R · mean over x ≠ x̂ of (2/(rho·kappa_k·d²) + 2/(rho·tau·d²))
/// ```
pub fn dest_fep_highsnr(
    protocol: Protocol,
    tau: f64,
    kappa_k: f64,
    rho: f64,
    c: &Constellation,
) -> Result<f64> {
    assert!(tau >= 0.0 && kappa_k >= 0.0, "PAFs must be non-negative");
    check_rho(rho)?;
    let spectrum = ErrorSpectrum::nonzero(c);
    let size = c.size() as f64;
    let relay_term = spectrum.mean_of(|d2| 2.0 / (rho * tau * d2));
    match protocol {
        Protocol::Rcnc => Ok(size * relay_term),
        Protocol::Rgnc => {
            let own_term = spectrum.mean_of(|d2| 2.0 / (rho * kappa_k * d2));
            Ok(size * (own_term + relay_term))
        }
    }
}

/// Closed-form high-SNR system frame error approximation under the
/// statistical split `kappa_k = kappa/2`, `tau_k = (1−kappa)/2`.
pub fn sfep_approx(protocol: Protocol, rate: u32, kappa: f64, rho: f64) -> Result<f64> {
    if rate == 0 {
        return Err(Error::OutOfRange {
            name: "rate",
            value: 0.0,
            constraint: "rate must be at least 1 bit per symbol",
        });
    }
    check_kappa(kappa)?;
    check_rho(rho)?;
    let tau = 1.0 - kappa;
    let size = 2f64.powi(rate as i32);
    let half = 2f64.powi(rate as i32 - 1);
    let objective = match protocol {
        Protocol::Rcnc => half / kappa + 2.0 / tau,
        Protocol::Rgnc => (half + 2.0) / kappa + 1.0 / tau,
    };
    Ok(size * objective / rho)
}

/// Source share at which the RCNC and RGNC approximations intersect,
/// independent of rate and SNR.
pub fn crossover_kappa() -> f64 {
    2.0 / 3.0
}

/// Absolute gap between the two protocol approximations:
/// `|2^R·rho^(−1)·(2/kappa − 1/tau)|`.
pub fn performance_gap(rate: u32, kappa: f64, rho: f64) -> Result<f64> {
    if rate == 0 {
        return Err(Error::OutOfRange {
            name: "rate",
            value: 0.0,
            constraint: "rate must be at least 1 bit per symbol",
        });
    }
    check_kappa(kappa)?;
    check_rho(rho)?;
    let tau = 1.0 - kappa;
    Ok((2f64.powi(rate as i32) / rho * (2.0 / kappa - 1.0 / tau)).abs())
}

/// Fixed-budget composite Gauss-Legendre quadrature.
mod quadrature {
    /// Nodes and weights of the `order`-point Gauss-Legendre rule on
    /// [−1, 1], found by Newton iteration on the Legendre polynomial.
    pub(crate) fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
        assert!(order >= 2);
        let mut rule = Vec::with_capacity(order);
        let n = order as f64;
        for i in 0..order {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(order, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(order, x);
            rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        rule
    }

    /// Legendre polynomial value and derivative by the three-term
    /// recurrence.
    fn legendre(order: usize, x: f64) -> (f64, f64) {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=order {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    }

    /// Integrates `f` over [a, b] with roughly `points` nodes split into
    /// 16-node panels.
    pub(crate) fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, points: usize) -> f64 {
        const PANEL_ORDER: usize = 16;
        let panels = (points / PANEL_ORDER).max(1);
        let rule = gauss_legendre(PANEL_ORDER);
        let width = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let mid = lo + width / 2.0;
            let half = width / 2.0;
            for &(x, w) in &rule {
                sum += w * f(mid + half * x);
            }
        }
        sum * width / 2.0
    }
}
