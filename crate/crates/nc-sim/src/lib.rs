//! Link-level toolkit for a two-source multicast relay cell whose relay
//! decodes and retransmits network-coded combinations.
//!
//! The cell has two sources `s1`, `s2`, one relay `r` and two destinations
//! `d1`, `d2`. A transmission frame spans two time slots. In the first slot
//! each source broadcasts one QAM symbol, heard by the relay and by its own
//! destination. In the second slot the relay decodes both symbols and
//! forwards a network-coded combination, either a complex-field superposition
//! (RCNC) or a Galois-field superposition (RGNC). Each destination then
//! jointly decodes its own symbol and the partner symbol it never heard
//! directly.
//!
//! The crate provides:
//!
//! * [`constellation`]: Gray-labelled square QAM alphabets,
//! * [`channel`]: Rayleigh block fading and AWGN sampling,
//! * [`power_allocation`]: statistical (OSPAS) and instantaneous (IPAS)
//!   power-allocation-factor computations,
//! * [`decoding`]: joint maximum-likelihood decoders for relay and
//!   destinations,
//! * [`analytic`]: high-SNR frame-error-probability approximations and the
//!   quadrature-based exact pairwise error integral,
//! * [`montecarlo`]: a reproducible Monte Carlo system frame error
//!   probability estimator,
//! * [`cli`]: config parsing and the command implementations behind the
//!   `nc-sim` binary.
//!
//! Monte Carlo runs are deterministic: every random draw is keyed by
//! `(seed, frame index, draw role)`, so estimates do not depend on the
//! worker count or on the order in which grid points execute.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod constellation;
pub mod decoding;
pub mod montecarlo;
pub mod power_allocation;
pub mod streams;

/// Network-coding protocol used by the relay in the second slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Complex-field superposition: the relay sends a weighted sum of both
    /// decoded symbols through a unit-modulus precoder.
    Rcnc,
    /// Galois-field superposition: the relay sends the constellation point
    /// whose label is the XOR of both decoded labels.
    Rgnc,
}

impl Protocol {
    /// Lowercase name used in CSV output and config files.
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Rcnc => "rcnc",
            Protocol::Rgnc => "rgnc",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rcnc" => Ok(Protocol::Rcnc),
            "rgnc" => Ok(Protocol::Rgnc),
            other => Err(Error::ConfigValue {
                key: "protocol".into(),
                message: format!("unknown protocol `{other}` (expected rcnc or rgnc)"),
            }),
        }
    }
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Modulation rate outside the supported set {2, 4, 6}.
    #[error("unsupported modulation rate R={0}; supported rates are 2, 4 and 6")]
    UnsupportedRate(u32),
    /// A scalar parameter violated its documented range.
    #[error("{name} = {value} is out of range: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    /// Noise variance must be non-negative.
    #[error("negative noise variance {0}")]
    NegativeVariance(f64),
    /// Channel magnitudes make a power-allocation formula singular.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),
    /// Quadrature node budget below the supported minimum.
    #[error("quadrature budget {0} is too small; need at least 64 nodes")]
    QuadratureBudget(usize),
    /// Config file parse error with location diagnostics.
    #[error("config error at line {line} (key `{key}`): {message}")]
    ConfigFile {
        line: usize,
        key: String,
        message: String,
    },
    /// Config semantic error without a file location (overrides, CLI args).
    #[error("config error (key `{key}`): {message}")]
    ConfigValue { key: String, message: String },
    /// Simulation config rejected by validation.
    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),
    /// I/O failure while reading or writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for config errors, 3 for runtime
    /// or numeric errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::UnsupportedRate(_)
            | Error::OutOfRange { .. }
            | Error::DegenerateChannel(_)
            | Error::QuadratureBudget(_)
            | Error::ConfigFile { .. }
            | Error::ConfigValue { .. }
            | Error::InvalidSimConfig(_) => 2,
            Error::NegativeVariance(_) | Error::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
