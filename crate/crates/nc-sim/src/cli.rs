//! Config files, grid expansion and the command implementations behind the
//! `nc-sim` binary.
//!
//! Config files are flat `key = value` text: one key per line, `#` comments,
//! blank lines ignored. Sweep dimensions take either a comma list
//! (`protocol = rcnc, rgnc`) or an inclusive numeric grid written
//! `start:stop:step` (`kappa = 0.30:0.80:0.05`). Command-line overrides
//! (`--set key=value`, plus the dedicated `--seed/--frames/--workers`
//! flags) replace file values before expansion.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;

use crate::analytic::{performance_gap, sfep_approx, AnalyticPoint};
use crate::channel::snr_db_to_rho;
use crate::constellation::SUPPORTED_RATES;
use crate::montecarlo::{sweep, RelayErrorMode, SimConfig, DEFAULT_FRAMES};
use crate::power_allocation::{ipas_rcnc, ospas_kappa, ospas_kappa_rcnc, ospas_kappa_rgnc, AllocationScheme};
use crate::{Error, Protocol, Result};

/// Header of the `simulate` CSV output; consumers key on it verbatim.
pub const SIMULATE_CSV_HEADER: &str =
    "protocol,R,kappa,scheme,snr_db,frames,errors,sfep,ci_low,ci_high,retries";

/// Header of the `analytic` CSV output.
pub const ANALYTIC_CSV_HEADER: &str = "protocol,R,kappa,snr_db,sfep_approx,gap";

/// Largest number of points a single `start:stop:step` grid may expand to.
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone)]
struct RawEntry {
    value: String,
    /// 1-based config file line; `None` for command-line overrides.
    line: Option<usize>,
    consumed: bool,
}

/// Parsed but untyped config: keys, values and their source lines.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, RawEntry>,
}

impl RawConfig {
    /// Parses config text. Duplicate keys and malformed lines are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let content = content.trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigFile {
                    line,
                    key: content.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::ConfigFile {
                    line,
                    key,
                    message: "empty key".into(),
                });
            }
            if let Some(previous) = entries.insert(
                key.clone(),
                RawEntry {
                    value,
                    line: Some(line),
                    consumed: false,
                },
            ) {
                return Err(Error::ConfigFile {
                    line,
                    key,
                    message: format!(
                        "duplicate key (previously set on line {})",
                        previous.line.unwrap_or(0)
                    ),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Applies one `key=value` override, replacing any file value.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let Some((key, value)) = spec.split_once('=') else {
            return Err(Error::ConfigValue {
                key: spec.to_string(),
                message: "override must be written key=value".into(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::ConfigValue {
                key: spec.to_string(),
                message: "override key is empty".into(),
            });
        }
        self.entries.insert(
            key.to_string(),
            RawEntry {
                value: value.trim().to_string(),
                line: None,
                consumed: false,
            },
        );
        Ok(())
    }

    /// Convenience for the dedicated CLI flags.
    pub fn set_value(&mut self, key: &str, value: String) {
        self.entries.insert(
            key.to_string(),
            RawEntry {
                value,
                line: None,
                consumed: false,
            },
        );
    }

    fn take(&mut self, key: &str) -> Option<(String, Option<usize>)> {
        self.entries.get_mut(key).map(|entry| {
            entry.consumed = true;
            (entry.value.clone(), entry.line)
        })
    }

    fn located(key: &str, line: Option<usize>, message: String) -> Error {
        match line {
            Some(line) => Error::ConfigFile {
                line,
                key: key.to_string(),
                message,
            },
            None => Error::ConfigValue {
                key: key.to_string(),
                message,
            },
        }
    }

    fn parse_with<T>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((value, line)) => parse(&value)
                .map(Some)
                .map_err(|message| Self::located(key, line, message)),
        }
    }

    fn require<T>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        self.parse_with(key, parse)?.ok_or_else(|| Error::ConfigValue {
            key: key.to_string(),
            message: "required key is missing".into(),
        })
    }

    /// Errors on the first key no command consumed (catches typos).
    fn finish(&self) -> Result<()> {
        for (key, entry) in &self.entries {
            if !entry.consumed {
                return Err(Self::located(
                    key,
                    entry.line,
                    "unknown key for this command".into(),
                ));
            }
        }
        Ok(())
    }
}

// --- value parsers ----------------------------------------------------

fn parse_list<T>(
    value: &str,
    item: impl Fn(&str) -> std::result::Result<T, String>,
) -> std::result::Result<Vec<T>, String> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) || items.is_empty() {
        return Err("expected a non-empty comma-separated list".into());
    }
    items.into_iter().map(item).collect()
}

fn parse_f64_item(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

/// Numeric sweep values: a single number, a comma list, or an inclusive
/// `start:stop:step` grid. Grid points are snapped to 10 decimal places so
/// accumulated step rounding never leaks into output files.
fn parse_grid(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err("grid must be written start:stop:step".into());
        }
        let start = parse_f64_item(parts[0])?;
        let stop = parse_f64_item(parts[1])?;
        let step = parse_f64_item(parts[2])?;
        if !step.is_finite() || step <= 0.0 {
            return Err(format!("grid step {step} must be positive"));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err("grid endpoints must be finite".into());
        }
        if stop < start {
            return Err(format!("empty grid: stop {stop} is below start {start}"));
        }
        let count = ((stop - start) / step).round() as usize + 1;
        if count > MAX_GRID_POINTS {
            return Err(format!("grid expands to more than {MAX_GRID_POINTS} points"));
        }
        let snap = |v: f64| (v * 1e10).round() / 1e10;
        let mut values = Vec::new();
        let mut k = 0u64;
        loop {
            let v = snap(start + k as f64 * step);
            if v > stop + step * 1e-9 {
                break;
            }
            values.push(v);
            k += 1;
        }
        if values.is_empty() {
            return Err("empty grid".into());
        }
        Ok(values)
    } else {
        let values = parse_list(value, parse_f64_item)?;
        if values.is_empty() {
            return Err("empty grid".into());
        }
        Ok(values)
    }
}

fn parse_protocols(value: &str) -> std::result::Result<Vec<Protocol>, String> {
    parse_list(value, |s| match s {
        "rcnc" => Ok(Protocol::Rcnc),
        "rgnc" => Ok(Protocol::Rgnc),
        other => Err(format!("unknown protocol `{other}` (expected rcnc or rgnc)")),
    })
}

fn parse_rates(value: &str) -> std::result::Result<Vec<u32>, String> {
    parse_list(value, |s| {
        let rate: u32 = s.parse().map_err(|_| format!("`{s}` is not a rate"))?;
        if SUPPORTED_RATES.contains(&rate) {
            Ok(rate)
        } else {
            Err(format!("unsupported rate {rate} (expected 2, 4 or 6)"))
        }
    })
}

/// Scheme tags accepted in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SchemeKind {
    Fixed,
    Ospas,
    Ipas,
}

fn parse_schemes(value: &str) -> std::result::Result<Vec<SchemeKind>, String> {
    parse_list(value, |s| match s {
        "fixed" => Ok(SchemeKind::Fixed),
        "ospas" => Ok(SchemeKind::Ospas),
        "ipas" => Ok(SchemeKind::Ipas),
        other => Err(format!(
            "unknown scheme `{other}` (expected fixed, ospas or ipas)"
        )),
    })
}

fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    s.parse().map_err(|_| format!("`{s}` is not an unsigned integer"))
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not an unsigned integer"))
}

fn parse_mode(s: &str) -> std::result::Result<RelayErrorMode, String> {
    match s {
        "count_as_sfee" => Ok(RelayErrorMode::CountAsSfee),
        "propagate" => Ok(RelayErrorMode::Propagate),
        other => Err(format!(
            "unknown relay_error_mode `{other}` (expected count_as_sfee or propagate)"
        )),
    }
}

/// Resolves the worker count: `--workers` flag, then the `NC_SIM_WORKERS`
/// environment variable, then the config file, in that order.
pub fn workers_override(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    if let Some(flag) = flag {
        return Ok(Some(flag));
    }
    match env {
        None => Ok(None),
        Some(raw) => raw
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::ConfigValue {
                key: "NC_SIM_WORKERS".into(),
                message: format!("`{raw}` is not an unsigned integer"),
            }),
    }
}

/// Channel magnitudes `|g1|,|g2|,|h1|,|h2|` for `paf --gains`.
pub fn parse_gains(value: &str) -> Result<[f64; 4]> {
    let items = parse_list(value, parse_f64_item).map_err(|message| Error::ConfigValue {
        key: "gains".into(),
        message,
    })?;
    if items.len() != 4 {
        return Err(Error::ConfigValue {
            key: "gains".into(),
            message: format!("expected 4 magnitudes, got {}", items.len()),
        });
    }
    for &g in &items {
        if !g.is_finite() || g < 0.0 {
            return Err(Error::ConfigValue {
                key: "gains".into(),
                message: format!("magnitude {g} must be finite and non-negative"),
            });
        }
    }
    Ok([items[0], items[1], items[2], items[3]])
}

// --- grid expansion ----------------------------------------------------

/// Expands a simulate config into grid points, ordered by
/// (protocol, rate, scheme, kappa, snr_db) with each list in config order.
pub fn simulate_configs(raw: &mut RawConfig) -> Result<Vec<SimConfig>> {
    let protocols = raw.require("protocol", parse_protocols)?;
    let rates = raw.require("rate", parse_rates)?;
    let schemes = raw.require("scheme", parse_schemes)?;
    let snrs = raw.require("snr_db", parse_grid)?;
    let kappas = raw.parse_with("kappa", parse_grid)?;
    let frames = raw.parse_with("frames", parse_u64)?.unwrap_or(DEFAULT_FRAMES);
    let seed = raw.parse_with("seed", parse_u64)?.unwrap_or(0);
    let workers = raw.parse_with("workers", parse_usize)?.unwrap_or(0);
    let mode = raw
        .parse_with("relay_error_mode", parse_mode)?
        .unwrap_or(RelayErrorMode::CountAsSfee);
    raw.finish()?;

    if schemes.contains(&SchemeKind::Fixed) && kappas.is_none() {
        return Err(Error::ConfigValue {
            key: "kappa".into(),
            message: "scheme `fixed` needs a kappa grid".into(),
        });
    }
    if schemes.contains(&SchemeKind::Ipas) && protocols.contains(&Protocol::Rgnc) {
        return Err(Error::ConfigValue {
            key: "scheme".into(),
            message: "ipas is only defined for rcnc".into(),
        });
    }

    let mut configs = Vec::new();
    for &protocol in &protocols {
        for &rate in &rates {
            for &scheme in &schemes {
                let point_schemes: Vec<AllocationScheme> = match scheme {
                    SchemeKind::Fixed => kappas
                        .as_ref()
                        .expect("checked above")
                        .iter()
                        .map(|&k| AllocationScheme::FixedKappa(k))
                        .collect(),
                    SchemeKind::Ospas => vec![AllocationScheme::Ospas],
                    SchemeKind::Ipas => vec![AllocationScheme::Ipas],
                };
                for scheme in point_schemes {
                    for &snr_db in &snrs {
                        let config = SimConfig {
                            protocol,
                            rate,
                            snr_db,
                            scheme,
                            frames,
                            seed,
                            relay_error_mode: mode,
                            workers,
                        };
                        config.validate().map_err(|e| Error::ConfigValue {
                            key: "config".into(),
                            message: e.to_string(),
                        })?;
                        configs.push(config);
                    }
                }
            }
        }
    }
    Ok(configs)
}

/// Expands an analytic config into evaluated closed-form points, ordered by
/// (protocol, rate, kappa, snr_db).
pub fn analytic_points(raw: &mut RawConfig) -> Result<Vec<AnalyticPoint>> {
    let protocols = raw.require("protocol", parse_protocols)?;
    let rates = raw.require("rate", parse_rates)?;
    let kappas = raw.require("kappa", parse_grid)?;
    let snrs = raw.require("snr_db", parse_grid)?;
    raw.finish()?;

    let mut points = Vec::new();
    for &protocol in &protocols {
        for &rate in &rates {
            for &kappa in &kappas {
                for &snr_db in &snrs {
                    let rho = snr_db_to_rho(snr_db);
                    let sfep = sfep_approx(protocol, rate, kappa, rho)?;
                    points.push(AnalyticPoint {
                        protocol,
                        rate,
                        kappa,
                        tau: 1.0 - kappa,
                        rho,
                        sfep,
                    });
                }
            }
        }
    }
    Ok(points)
}

// --- commands ----------------------------------------------------------

/// `paf`: prints the statistical optima for a rate and, given channel
/// magnitudes, the instantaneous PAF set.
pub fn cmd_paf(rate: u32, gains: Option<[f64; 4]>, out: &mut dyn Write) -> Result<()> {
    if !SUPPORTED_RATES.contains(&rate) {
        return Err(Error::UnsupportedRate(rate));
    }
    writeln!(out, "R,kappa_rcnc,kappa_rgnc")?;
    writeln!(
        out,
        "{rate},{},{}",
        ospas_kappa_rcnc(rate)?,
        ospas_kappa_rgnc(rate)?
    )?;
    if let Some([g1, g2, h1, h2]) = gains {
        let to_c = |m: f64| Complex64::new(m, 0.0);
        let pafs = ipas_rcnc(to_c(g1), to_c(g2), to_c(h1), to_c(h2), rate)?;
        writeln!(out, "kappa1,kappa2,tau1,tau2")?;
        writeln!(
            out,
            "{},{},{},{}",
            pafs.kappa1, pafs.kappa2, pafs.tau1, pafs.tau2
        )?;
    }
    Ok(())
}

/// `analytic`: closed-form approximation CSV over the config grid.
pub fn cmd_analytic(raw: &mut RawConfig, out: &mut dyn Write) -> Result<()> {
    let points = analytic_points(raw)?;
    writeln!(out, "{ANALYTIC_CSV_HEADER}")?;
    for p in points {
        let snr_db = 10.0 * p.rho.log10();
        let gap = performance_gap(p.rate, p.kappa, p.rho)?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.protocol.name(),
            p.rate,
            p.kappa,
            snap_snr(snr_db),
            p.sfep,
            gap
        )?;
    }
    Ok(())
}

/// Round-trip guard for the SNR column: `rho = 10^(snr/10)` loses the last
/// bit of the dB value, so snap to 10 decimals for display.
fn snap_snr(snr_db: f64) -> f64 {
    (snr_db * 1e10).round() / 1e10
}

/// `simulate`: Monte Carlo SFEP CSV over the config grid.
pub fn cmd_simulate(raw: &mut RawConfig, out: &mut dyn Write) -> Result<()> {
    let configs = simulate_configs(raw)?;
    let estimates = sweep(&configs)?;
    writeln!(out, "{SIMULATE_CSV_HEADER}")?;
    for (config, est) in configs.iter().zip(estimates) {
        let kappa = match config.scheme {
            AllocationScheme::FixedKappa(kappa) => kappa,
            AllocationScheme::Ospas => ospas_kappa(config.protocol, config.rate)?,
            // No single kappa exists per frame under IPAS.
            AllocationScheme::Ipas => f64::NAN,
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            config.protocol.name(),
            config.rate,
            kappa,
            config.scheme.name(),
            config.snr_db,
            est.trials,
            est.errors,
            est.sfep,
            est.ci_low,
            est.ci_high,
            est.retries
        )?;
    }
    Ok(())
}
