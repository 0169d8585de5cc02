//! Simulation configuration: methods, sweeps, code choices, and the flat
//! key-value config file mirroring the CLI flags (CLI values override file
//! values).

use crate::error::{Error, Result};
use crate::detect::DetectorKind;
use crate::gf2codes::{self, BlockCode, CaPolarSpec, CrcCodeSpec};
use crate::jointdec::CandidateSet;
use crate::modem::Constellation;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Decoding strategy measured by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    /// Single decode with the pilot estimate.
    Baseline,
    /// Candidate grid with posterior-argmax selection.
    Method1,
    /// Candidate grid with prior-weighted posterior selection.
    Method1Weighted,
    /// Candidate grid with residual-error-aware LLRs per Voronoi cell.
    Method2,
    /// Candidate grid selected by true-codeword distance (lower bound).
    Genie,
}

impl MethodKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Baseline => "baseline",
            MethodKind::Method1 => "method1",
            MethodKind::Method1Weighted => "method1-weighted",
            MethodKind::Method2 => "method2",
            MethodKind::Genie => "genie",
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(MethodKind::Baseline),
            "method1" => Ok(MethodKind::Method1),
            "method1-weighted" | "method1_weighted" => Ok(MethodKind::Method1Weighted),
            "method2" => Ok(MethodKind::Method2),
            "genie" => Ok(MethodKind::Genie),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Which candidate offsets surround the pilot estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// Only the pilot estimate.
    Single,
    /// Zero plus one step along each half-axis (five candidates).
    Axis5,
    /// 3x3 grid with Voronoi cells (nine candidates).
    Grid9,
}

impl CandidateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CandidateKind::Single => "1",
            CandidateKind::Axis5 => "axis5",
            CandidateKind::Grid9 => "grid9",
        }
    }

    pub fn build(&self, sigma_e2: f64) -> Result<CandidateSet> {
        match self {
            CandidateKind::Single => Ok(CandidateSet::single()),
            CandidateKind::Axis5 => CandidateSet::axis5(sigma_e2.sqrt()),
            CandidateKind::Grid9 => CandidateSet::grid9(sigma_e2.sqrt()),
        }
    }
}

impl FromStr for CandidateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "single" => Ok(CandidateKind::Single),
            "axis5" => Ok(CandidateKind::Axis5),
            "grid9" => Ok(CandidateKind::Grid9),
            other => Err(Error::Config(format!("unknown candidate set '{other}'"))),
        }
    }
}

/// Code selection: a named preset, or an explicit spec as expressed in the
/// config file (kind, dimensions, polynomial hex, optional reliability
/// order given as comma-separated 1-based positions, most reliable first).
#[derive(Debug, Clone, PartialEq)]
pub enum CodeConfig {
    Named(String),
    Crc {
        n: usize,
        k: usize,
        poly_hex: String,
    },
    CaPolar {
        n: usize,
        k: usize,
        poly_hex: String,
        reliability: Option<Vec<usize>>,
    },
}

impl CodeConfig {
    pub fn build(&self) -> Result<Box<dyn BlockCode>> {
        match self {
            CodeConfig::Named(name) => match name.as_str() {
                "crc128-112" => Ok(Box::new(gf2codes::crc128_112())),
                "capolar128-112" => Ok(Box::new(gf2codes::capolar128_112())),
                "crc16-8" => Ok(Box::new(gf2codes::crc16_8())),
                other => Err(Error::Config(format!("unknown code '{other}'"))),
            },
            CodeConfig::Crc { n, k, poly_hex } => {
                let poly = gf2codes::poly_from_hex(poly_hex)?;
                Ok(Box::new(CrcCodeSpec::new(*n, *k, poly)?))
            }
            CodeConfig::CaPolar {
                n,
                k,
                poly_hex,
                reliability,
            } => {
                let poly = gf2codes::poly_from_hex(poly_hex)?;
                let order = match reliability {
                    Some(positions) => {
                        // External positions are 1-based.
                        let mut zero_based = Vec::with_capacity(positions.len());
                        for &p in positions {
                            if p == 0 {
                                return Err(Error::Config(
                                    "reliability positions are 1-based".into(),
                                ));
                            }
                            zero_based.push(p - 1);
                        }
                        Some(zero_based)
                    }
                    None => None,
                };
                Ok(Box::new(CaPolarSpec::new(*n, *k, poly, order)?))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CodeConfig::Named(name) => name.clone(),
            CodeConfig::Crc { n, k, .. } => format!("crc{n}-{k}"),
            CodeConfig::CaPolar { n, k, .. } => format!("capolar{n}-{k}"),
        }
    }
}

/// SNR sweep in dB: either a single value or "start:step:stop" inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSweep {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SnrSweep {
    pub fn single(value: f64) -> Self {
        SnrSweep {
            start: value,
            step: 1.0,
            stop: value,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let v = self.start + self.step * f64::from(i);
            if v > self.stop + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    }
}

impl FromStr for SnrSweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |p: &str| -> Result<f64> {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad SNR value '{p}': {e}")))
        };
        match parts.as_slice() {
            [single] => Ok(SnrSweep::single(parse(single)?)),
            [start, step, stop] => {
                let (start, step, stop) = (parse(start)?, parse(step)?, parse(stop)?);
                if !(step > 0.0) {
                    return Err(Error::Config("SNR step must be positive".into()));
                }
                if stop < start {
                    return Err(Error::Config("SNR stop below start".into()));
                }
                Ok(SnrSweep { start, step, stop })
            }
            _ => Err(Error::Config(format!(
                "SNR must be a value or start:step:stop, got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

/// Full experiment description.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code: CodeConfig,
    pub modulation: String,
    pub detector: DetectorKind,
    pub method: MethodKind,
    pub sigma_e2: f64,
    pub k_factor: f64,
    pub snr: SnrSweep,
    pub trials: u64,
    pub seed: u64,
    pub max_queries: usize,
    pub candidates: CandidateKind,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl SimConfig {
    pub fn constellation(&self) -> Result<Constellation> {
        self.modulation.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.max_queries < 1 {
            return Err(Error::Config("max-queries must be at least 1".into()));
        }
        if self.sigma_e2 < 0.0 {
            return Err(Error::Config("sigma-e2 must be nonnegative".into()));
        }
        if self.k_factor < 0.0 {
            return Err(Error::Config("k-factor must be nonnegative".into()));
        }
        if self.snr.values().is_empty() {
            return Err(Error::Config("empty SNR sweep".into()));
        }
        self.constellation()?;
        let code = self.code.build()?;
        let m = self.constellation()?.bits_per_symbol();
        if code.n() % m != 0 {
            return Err(Error::Config(format!(
                "code length {} is not a multiple of {m} bits per symbol",
                code.n()
            )));
        }
        let needs_offsets = !matches!(self.method, MethodKind::Baseline);
        if needs_offsets && self.candidates != CandidateKind::Single && !(self.sigma_e2 > 0.0) {
            return Err(Error::Config(
                "candidate offsets scale with sigma-e2; it must be positive".into(),
            ));
        }
        if self.method == MethodKind::Method2 && self.candidates != CandidateKind::Grid9 {
            return Err(Error::Config(
                "method2 needs Voronoi cells; use --candidates grid9".into(),
            ));
        }
        if self.detector == DetectorKind::MlCee && self.method != MethodKind::Method2 {
            return Err(Error::Config(
                "the ml-cee detector is implied by method2; pick ml, ml-exact, zf or mmse".into(),
            ));
        }
        Ok(())
    }

    /// Candidate set implied by the configuration.
    pub fn candidate_set(&self) -> Result<CandidateSet> {
        match self.method {
            MethodKind::Baseline => Ok(CandidateSet::single()),
            _ => self.candidates.build(self.sigma_e2),
        }
    }
}

/// Builder with every field optional, so CLI flags, config-file entries and
/// defaults can be merged in precedence order.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub code: Option<String>,
    pub code_kind: Option<String>,
    pub code_n: Option<usize>,
    pub code_k: Option<usize>,
    pub code_poly: Option<String>,
    pub code_reliability: Option<Vec<usize>>,
    pub modulation: Option<String>,
    pub detector: Option<String>,
    pub method: Option<String>,
    pub sigma_e2: Option<f64>,
    pub k_factor: Option<f64>,
    pub snr: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub max_queries: Option<usize>,
    pub candidates: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl PartialConfig {
    /// Reads a flat key-value file: one `key = value` pair per line, `#`
    /// comments, keys named after the CLI flags.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_kv_text(&text)
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let value = value.trim().trim_matches('"');
            entries.insert(key.trim().to_string(), value.to_string());
        }
        let mut cfg = PartialConfig::default();
        for (key, value) in entries {
            match key.as_str() {
                "code" => cfg.code = Some(value),
                "code-kind" => cfg.code_kind = Some(value),
                "code-n" => cfg.code_n = Some(parse_field(&key, &value)?),
                "code-k" => cfg.code_k = Some(parse_field(&key, &value)?),
                "code-poly" => cfg.code_poly = Some(value),
                "code-reliability" => {
                    let positions = value
                        .split(',')
                        .map(|p| parse_field::<usize>(&key, p.trim()))
                        .collect::<Result<Vec<usize>>>()?;
                    cfg.code_reliability = Some(positions);
                }
                "mod" | "modulation" => cfg.modulation = Some(value),
                "detector" => cfg.detector = Some(value),
                "method" => cfg.method = Some(value),
                "sigma-e2" => cfg.sigma_e2 = Some(parse_field(&key, &value)?),
                "k-factor" => cfg.k_factor = Some(parse_field(&key, &value)?),
                "snr" | "snr-db" => cfg.snr = Some(value),
                "trials" => cfg.trials = Some(parse_field(&key, &value)?),
                "seed" => cfg.seed = Some(parse_field(&key, &value)?),
                "max-queries" => cfg.max_queries = Some(parse_field(&key, &value)?),
                "candidates" => cfg.candidates = Some(value),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(value),
                other => {
                    return Err(Error::Config(format!("unknown config key '{other}'")));
                }
            }
        }
        Ok(cfg)
    }

    /// Fields present in `self` win over `fallback`.
    pub fn merged_over(self, fallback: PartialConfig) -> PartialConfig {
        PartialConfig {
            code: self.code.or(fallback.code),
            code_kind: self.code_kind.or(fallback.code_kind),
            code_n: self.code_n.or(fallback.code_n),
            code_k: self.code_k.or(fallback.code_k),
            code_poly: self.code_poly.or(fallback.code_poly),
            code_reliability: self.code_reliability.or(fallback.code_reliability),
            modulation: self.modulation.or(fallback.modulation),
            detector: self.detector.or(fallback.detector),
            method: self.method.or(fallback.method),
            sigma_e2: self.sigma_e2.or(fallback.sigma_e2),
            k_factor: self.k_factor.or(fallback.k_factor),
            snr: self.snr.or(fallback.snr),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            max_queries: self.max_queries.or(fallback.max_queries),
            candidates: self.candidates.or(fallback.candidates),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
        }
    }

    /// Resolves to a full configuration, applying defaults for anything
    /// still unset.
    pub fn build(self) -> Result<SimConfig> {
        let code = match (&self.code_kind, &self.code) {
            (Some(kind), _) => {
                let n = self
                    .code_n
                    .ok_or_else(|| Error::Config("code-kind needs code-n".into()))?;
                let k = self
                    .code_k
                    .ok_or_else(|| Error::Config("code-kind needs code-k".into()))?;
                let poly_hex = self
                    .code_poly
                    .clone()
                    .ok_or_else(|| Error::Config("code-kind needs code-poly".into()))?;
                match kind.as_str() {
                    "crc" => CodeConfig::Crc { n, k, poly_hex },
                    "capolar" => CodeConfig::CaPolar {
                        n,
                        k,
                        poly_hex,
                        reliability: self.code_reliability.clone(),
                    },
                    other => {
                        return Err(Error::Config(format!("unknown code-kind '{other}'")));
                    }
                }
            }
            (None, Some(name)) => CodeConfig::Named(name.clone()),
            (None, None) => CodeConfig::Named("crc128-112".into()),
        };
        let method: MethodKind = self.method.as_deref().unwrap_or("method1").parse()?;
        let candidates: CandidateKind = match &self.candidates {
            Some(s) => s.parse()?,
            None => match method {
                MethodKind::Baseline => CandidateKind::Single,
                MethodKind::Method2 => CandidateKind::Grid9,
                _ => CandidateKind::Axis5,
            },
        };
        let cfg = SimConfig {
            code,
            modulation: self.modulation.unwrap_or_else(|| "qam16".into()),
            detector: self.detector.as_deref().unwrap_or("mmse").parse()?,
            method,
            sigma_e2: self.sigma_e2.unwrap_or(0.01),
            k_factor: self.k_factor.unwrap_or(10.0),
            snr: self.snr.as_deref().unwrap_or("14:1:22").parse()?,
            trials: self.trials.unwrap_or(1000),
            seed: self.seed.unwrap_or(1),
            max_queries: self.max_queries.unwrap_or(100_000),
            candidates,
            out: self.out,
            format: match self.format.as_deref() {
                Some(f) => f.parse()?,
                None => OutputFormat::Csv,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_field<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::Config(format!("bad value for '{key}': {e}")))
}
