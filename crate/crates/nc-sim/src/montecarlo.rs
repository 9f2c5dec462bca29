//! Monte Carlo estimation of the system frame error probability (SFEP).
//!
//! A trial simulates one frame end to end: draw labels and fading, transmit
//! both slots, decode at the relay and both destinations, and report whether
//! any destination missed the frame. A system frame error event (SFEE) at a
//! destination is a wrong joint decision on the pair of source labels.
//!
//! Every draw is keyed by `(effective seed, frame index, attempt, role)`
//! (see [`crate::streams`]), where the effective seed mixes the config seed
//! with the physical grid point (protocol, rate, SNR, scheme). Grid points
//! therefore get independent streams, while knobs that must not perturb the
//! physics (frame budget, worker count, relay error convention) reuse the
//! same streams. Estimates are bit-identical for any worker count because
//! trials are pure functions and the accumulator is a commutative sum.
//!
//! Simulations run at reference power `P = 1`; the SNR sweep moves the
//! common noise variance `sigma² = P/rho`.


use crate::channel::{awgn, sample_channel, NoiseModel};
use crate::constellation::{gf_superpose, Constellation, SUPPORTED_RATES};
use crate::decoding::{
    dest_joint_ml_rcnc, dest_ml_rgnc, relay_joint_ml, Dest, Frame, PRECODER_ALPHA,
};
use crate::power_allocation::{
    ipas_rcnc, make_statistical_pafset, ospas_kappa, AllocationScheme, PafSet,
};
use crate::streams::{trial_rng, StreamRole};
use crate::{Error, Protocol, Result};

/// Reference power; the SNR sweep scales the noise, not the signal.
const P: f64 = 1.0;

/// Default number of frames per estimate.
pub const DEFAULT_FRAMES: u64 = 100_000;

/// Retries allowed before a degenerate-channel loop is reported as an error.
const MAX_ATTEMPTS: u32 = 64;

/// 97.5th percentile of the standard normal: 95% Wilson score intervals.
const WILSON_Z: f64 = 1.959_963_984_540_054;

/// What a relay decoding error means for the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayErrorMode {
    /// A relay error loses the frame outright (destinations are skipped).
    CountAsSfee,
    /// The relay forwards its wrong decision and destinations judge the
    /// frame on whatever they extract.
    Propagate,
}

/// Full description of one Monte Carlo grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub rate: u32,
    pub snr_db: f64,
    pub scheme: AllocationScheme,
    pub frames: u64,
    pub seed: u64,
    pub relay_error_mode: RelayErrorMode,
    /// Worker threads for the trial loop; 0 picks the library default.
    /// Purely a throughput knob: results never depend on it.
    pub workers: usize,
}

impl SimConfig {
    /// Checks the physical parameters; every public entry point calls this.
    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_RATES.contains(&self.rate) {
            return Err(Error::UnsupportedRate(self.rate));
        }
        if self.frames == 0 {
            return Err(Error::InvalidSimConfig("frames must be at least 1".into()));
        }
        if self.snr_db.is_nan() {
            return Err(Error::InvalidSimConfig("snr_db must not be NaN".into()));
        }
        match self.scheme {
            AllocationScheme::FixedKappa(kappa) => {
                if !(kappa > 0.0 && kappa < 1.0) {
                    return Err(Error::InvalidSimConfig(format!(
                        "fixed kappa {kappa} must lie strictly inside (0, 1)"
                    )));
                }
            }
            AllocationScheme::Ospas => {}
            AllocationScheme::Ipas => {
                if self.protocol != Protocol::Rcnc {
                    return Err(Error::InvalidSimConfig(
                        "instantaneous allocation (ipas) is only defined for rcnc".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Seed actually used for trial streams: the config seed mixed with the
    /// physical grid point. Frame budget, worker count and the relay error
    /// convention are deliberately excluded so that varying them replays
    /// the same channel and noise draws.
    pub(crate) fn effective_seed(&self) -> u64 {
        let mut h = splitmix64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let protocol_tag = match self.protocol {
            Protocol::Rcnc => 1u64,
            Protocol::Rgnc => 2,
        };
        h = splitmix64(h ^ protocol_tag);
        h = splitmix64(h ^ u64::from(self.rate));
        h = splitmix64(h ^ self.snr_db.to_bits());
        h = match self.scheme {
            AllocationScheme::FixedKappa(kappa) => splitmix64(splitmix64(h ^ 1) ^ kappa.to_bits()),
            AllocationScheme::Ospas => splitmix64(h ^ 2),
            AllocationScheme::Ipas => splitmix64(h ^ 3),
        };
        h
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Result of a single simulated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// Frame lost at some destination (per the configured relay error mode).
    pub sfee: bool,
    /// The relay's joint decision was wrong.
    pub relay_error: bool,
    /// Degenerate-channel redraws consumed by this trial.
    pub retries: u32,
    /// Power spent on the frame: `kappa_1|x1|² + kappa_2|x2|²` plus the
    /// relay share; averages to `2P` over many frames.
    pub tx_power: f64,
}

/// Aggregated estimate with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfepEstimate {
    pub errors: u64,
    pub trials: u64,
    pub sfep: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub retries: u64,
}

/// 95% Wilson score interval for `errors` successes in `trials` draws.
/// Always contains the point estimate `errors/trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "interval needs at least one trial");
    assert!(errors <= trials, "errors cannot exceed trials");
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // Clamp away rounding dust: the interval must bracket p and stay in [0,1].
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Precomputed per-config state shared by all trials.
struct TrialContext {
    protocol: Protocol,
    rate: u32,
    scheme: AllocationScheme,
    mode: RelayErrorMode,
    constellation: Constellation,
    sigma2: f64,
    /// Fixed PAF set for the statistical schemes; `None` under IPAS.
    statistical: Option<PafSet>,
    seed: u64,
}

impl TrialContext {
    fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let constellation = Constellation::new(config.rate, P)?;
        let sigma2 = NoiseModel::from_snr_db(config.snr_db, P)?.sigma2();
        let statistical = match config.scheme {
            AllocationScheme::FixedKappa(kappa) => Some(make_statistical_pafset(kappa)?),
            AllocationScheme::Ospas => Some(make_statistical_pafset(ospas_kappa(
                config.protocol,
                config.rate,
            )?)?),
            AllocationScheme::Ipas => None,
        };
        Ok(Self {
            protocol: config.protocol,
            rate: config.rate,
            scheme: config.scheme,
            mode: config.relay_error_mode,
            constellation,
            sigma2,
            statistical,
            seed: config.effective_seed(),
        })
    }

    fn run(&self, frame_index: u64) -> Result<TrialOutcome> {
        for attempt in 0..MAX_ATTEMPTS {
            if let Some(mut outcome) = self.attempt(frame_index, attempt)? {
                outcome.retries = attempt;
                return Ok(outcome);
            }
        }
        Err(Error::DegenerateChannel(
            "exhausted the retry budget for degenerate channel draws",
        ))
    }

    /// Simulates one frame; `None` means the channel draw was degenerate
    /// for the scheme and the trial must be re-keyed.
    fn attempt(&self, frame: u64, attempt: u32) -> Result<Option<TrialOutcome>> {
        let c = &self.constellation;
        let n = c.size() as u16;
        let rng = |role| trial_rng(self.seed, frame, attempt, role);

        let mut symbols = rng(StreamRole::Symbols);
        use rand::Rng;
        let sent = Frame {
            s1_label: symbols.random_range(0..n),
            s2_label: symbols.random_range(0..n),
        };
        let ch = sample_channel(&mut rng(StreamRole::Fading));

        // Power split. Under IPAS the closed-form per-source split would
        // equalize the two effective relay amplitudes exactly (that is its
        // purpose), but a symbol-level joint decoder then cannot tell
        // swapped or same-sum symbol pairs apart and the relay stops being
        // identifiable at any SNR. The simulator therefore transmits with
        // an even per-source split of the instantaneous kappa; the tau
        // shares and the kappa/tau balance still adapt per realization.
        let pafs = match self.scheme {
            AllocationScheme::Ipas => {
                match ipas_rcnc(ch.g1, ch.g2, ch.h1, ch.h2, self.rate) {
                    Ok(mut pafs) => {
                        let half = pafs.kappa() / 2.0;
                        pafs.kappa1 = half;
                        pafs.kappa2 = half;
                        pafs
                    }
                    Err(Error::DegenerateChannel(_)) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            _ => self.statistical.expect("statistical PAFs precomputed"),
        };

        // Slot 1: simultaneous source broadcasts.
        let x1 = c.point(sent.s1_label);
        let x2 = c.point(sent.s2_label);
        let tx1 = pafs.kappa1.sqrt() * x1;
        let tx2 = pafs.kappa2.sqrt() * x2;
        let y_r = awgn(
            ch.g1 * tx1 + ch.g2 * tx2,
            self.sigma2,
            &mut rng(StreamRole::RelayNoise),
        )?;

        let relay = relay_joint_ml(y_r, ch.g1, ch.g2, pafs.kappa1, pafs.kappa2, c);
        let relay_error = (relay.s1_hat, relay.s2_hat) != (sent.s1_label, sent.s2_label);

        // Slot 2: the relay always forwards its own decision.
        let xr1 = c.point(relay.s1_hat);
        let xr2 = c.point(relay.s2_hat);
        let (relay_tx, relay_power) = match self.protocol {
            Protocol::Rcnc => (
                pafs.tau1.sqrt() * xr1 + PRECODER_ALPHA * pafs.tau2.sqrt() * xr2,
                pafs.tau1 * xr1.norm_sqr() + pafs.tau2 * xr2.norm_sqr(),
            ),
            Protocol::Rgnc => {
                let xr = c.point(gf_superpose(relay.s1_hat, relay.s2_hat));
                (pafs.tau().sqrt() * xr, pafs.tau() * xr.norm_sqr())
            }
        };
        let tx_power =
            pafs.kappa1 * x1.norm_sqr() + pafs.kappa2 * x2.norm_sqr() + relay_power;

        if relay_error && self.mode == RelayErrorMode::CountAsSfee {
            return Ok(Some(TrialOutcome {
                sfee: true,
                relay_error,
                retries: 0,
                tx_power,
            }));
        }

        // Destinations decode their direct observation plus the relay slot.
        let mut sfee = false;
        for (dest, hbar, h, kappa_k, noise1, noise2) in [
            (
                Dest::D1,
                ch.hbar1,
                ch.h1,
                pafs.kappa1,
                StreamRole::Dest1Slot1,
                StreamRole::Dest1Slot2,
            ),
            (
                Dest::D2,
                ch.hbar2,
                ch.h2,
                pafs.kappa2,
                StreamRole::Dest2Slot1,
                StreamRole::Dest2Slot2,
            ),
        ] {
            let own_tx = match dest {
                Dest::D1 => tx1,
                Dest::D2 => tx2,
            };
            let y1 = awgn(hbar * own_tx, self.sigma2, &mut rng(noise1))?;
            let y2 = awgn(h * relay_tx, self.sigma2, &mut rng(noise2))?;
            let decoded = match self.protocol {
                Protocol::Rcnc => dest_joint_ml_rcnc(
                    y1, y2, hbar, h, kappa_k, pafs.tau1, pafs.tau2, dest, c,
                ),
                Protocol::Rgnc => {
                    dest_ml_rgnc(y1, y2, hbar, h, kappa_k, pafs.tau(), dest, c)
                }
            };
            if (decoded.s1_hat, decoded.s2_hat) != (sent.s1_label, sent.s2_label) {
                sfee = true;
            }
        }

        Ok(Some(TrialOutcome {
            sfee,
            relay_error,
            retries: 0,
            tx_power,
        }))
    }
}

/// Simulates a single frame of a config. Outcomes are pure functions of
/// `(config physics, seed, frame_index)`.
pub fn run_trial(config: &SimConfig, frame_index: u64) -> Result<TrialOutcome> {
    TrialContext::new(config)?.run(frame_index)
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    errors: u64,
    retries: u64,
}

impl Tally {
    fn add(mut self, outcome: TrialOutcome) -> Self {
        self.errors += u64::from(outcome.sfee);
        self.retries += u64::from(outcome.retries);
        self
    }

    // Only the work-stealing reduction needs to combine partial tallies.
    #[cfg(feature = "parallel")]
    fn merge(self, other: Self) -> Self {
        Tally {
            errors: self.errors + other.errors,
            retries: self.retries + other.retries,
        }
    }
}

fn finish(tally: Tally, trials: u64) -> SfepEstimate {
    let (ci_low, ci_high) = wilson_interval(tally.errors, trials);
    SfepEstimate {
        errors: tally.errors,
        trials,
        sfep: tally.errors as f64 / trials as f64,
        ci_low,
        ci_high,
        retries: tally.retries,
    }
}

/// Estimates the SFEP of one grid point over `config.frames` trials.
///
/// With the `parallel` feature (default) trials run on a rayon pool sized
/// by `config.workers` (0 = rayon's default); without it the loop is
/// sequential. Both paths produce bit-identical estimates.
#[cfg(feature = "parallel")]
pub fn estimate_sfep(config: &SimConfig) -> Result<SfepEstimate> {
    use rayon::prelude::*;
    let ctx = TrialContext::new(config)?;
    let fold = || {
        (0..config.frames)
            .into_par_iter()
            .try_fold(Tally::default, |tally, frame| {
                ctx.run(frame).map(|outcome| tally.add(outcome))
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    };
    let tally = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        pool.install(fold)?
    } else {
        fold()?
    };
    Ok(finish(tally, config.frames))
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn estimate_sfep(config: &SimConfig) -> Result<SfepEstimate> {
    estimate_sfep_sequential(config)
}

/// Always-sequential estimator; the parallel path must match it exactly.
pub fn estimate_sfep_sequential(config: &SimConfig) -> Result<SfepEstimate> {
    let ctx = TrialContext::new(config)?;
    let mut tally = Tally::default();
    for frame in 0..config.frames {
        tally = tally.add(ctx.run(frame)?);
    }
    Ok(finish(tally, config.frames))
}

/// Runs a list of grid points in order. Each config derives its own stream
/// family from its physical parameters, so permuting the list permutes the
/// estimates and nothing else.
pub fn sweep(configs: &[SimConfig]) -> Result<Vec<SfepEstimate>> {
    configs.iter().map(estimate_sfep).collect()
}
