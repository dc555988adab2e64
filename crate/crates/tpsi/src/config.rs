//! File-backed run configuration (TOML).

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tpsi_core::opprf::OpprfKind;
use tpsi_core::session::{ConfigError, Mode, Protocol, SessionConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    Et,
    St,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    #[serde(alias = "single")]
    #[value(alias = "single")]
    SingleModulus,
    Crt,
}

/// `ideal` runs the primitive in the clear (for testing); `real` is the
/// cryptographic instantiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Ideal,
    #[serde(alias = "table", alias = "paillier")]
    #[value(alias = "table", alias = "paillier")]
    Real,
}

fn default_lambda() -> u32 {
    40
}
fn default_timeout() -> u64 {
    60
}
fn default_paillier_bits() -> u64 {
    2048
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: ProtocolChoice,
    #[serde(default = "default_mode")]
    pub mode: ModeChoice,
    pub n: usize,
    pub t: usize,
    /// Maximum set size of any party.
    pub m: usize,
    #[serde(default = "default_lambda")]
    pub lambda: u32,
    /// Fixes all randomness for reproducible runs; fresh entropy if absent.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_ideal")]
    pub opprf: BackendChoice,
    #[serde(default = "default_ideal")]
    pub ole: BackendChoice,
    #[serde(default = "default_paillier_bits")]
    pub paillier_bits: u64,
    #[serde(default = "default_true")]
    pub pad_simple: bool,
    /// Set file per party, relative to the configuration file.
    #[serde(default)]
    pub sets: Vec<PathBuf>,
    /// `host:port` per party, for networked runs.
    #[serde(default)]
    pub endpoints: Vec<String>,
    #[serde(default)]
    pub tls: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_mode() -> ModeChoice {
    ModeChoice::SingleModulus
}
fn default_ideal() -> BackendChoice {
    BackendChoice::Ideal
}

#[derive(Debug, thiserror::Error)]
pub enum RunConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Session(#[from] ConfigError),
    #[error("{0} set files listed for {1} parties")]
    SetCount(usize, usize),
    #[error("{0} endpoints listed for {1} parties")]
    EndpointCount(usize, usize),
    #[error("TLS transport is not available in this build")]
    TlsUnsupported,
    #[error("Paillier modulus must be at least 1024 bits (got {0})")]
    PaillierBits(u64),
}

impl RunConfig {
    pub fn new(protocol: ProtocolChoice, n: usize, t: usize, m: usize) -> Self {
        RunConfig {
            protocol,
            mode: ModeChoice::SingleModulus,
            n,
            t,
            m,
            lambda: default_lambda(),
            seed: None,
            timeout_secs: default_timeout(),
            opprf: BackendChoice::Ideal,
            ole: BackendChoice::Ideal,
            paillier_bits: default_paillier_bits(),
            pad_simple: true,
            sets: Vec::new(),
            endpoints: Vec::new(),
            tls: false,
            out: None,
        }
    }

    /// Loads and resolves relative set paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, RunConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|source| RunConfigError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut cfg.sets {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn protocol(&self) -> Protocol {
        match self.protocol {
            ProtocolChoice::Et => Protocol::Et,
            ProtocolChoice::St => Protocol::St,
        }
    }

    pub fn session_mode(&self) -> Mode {
        match self.mode {
            ModeChoice::SingleModulus => Mode::Single,
            ModeChoice::Crt => Mode::Crt,
        }
    }

    pub fn opprf_kind(&self) -> OpprfKind {
        match self.opprf {
            BackendChoice::Ideal => OpprfKind::Ideal,
            BackendChoice::Real => OpprfKind::Table,
        }
    }

    pub fn ole_tag(&self) -> u8 {
        match self.ole {
            BackendChoice::Ideal => tpsi_core::ole::TAG_IDEAL,
            BackendChoice::Real => tpsi_core::ole::TAG_PAILLIER,
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }

    pub fn session(&self, party: u8) -> SessionConfig {
        SessionConfig {
            lambda: self.lambda,
            mode: self.session_mode(),
            opprf: self.opprf_kind(),
            ole_tag: self.ole_tag(),
            pad_simple: self.pad_simple,
            ..SessionConfig::new(self.protocol(), self.n, self.t, self.m, party)
        }
    }

    /// Cross-field checks that need no I/O.
    pub fn validate(&self) -> Result<(), RunConfigError> {
        self.session(0).validate()?;
        if self.tls {
            return Err(RunConfigError::TlsUnsupported);
        }
        if self.ole == BackendChoice::Real && self.paillier_bits < crate::paillier::MIN_MODULUS_BITS
        {
            return Err(RunConfigError::PaillierBits(self.paillier_bits));
        }
        if !self.sets.is_empty() && self.sets.len() != self.n {
            return Err(RunConfigError::SetCount(self.sets.len(), self.n));
        }
        if !self.endpoints.is_empty() && self.endpoints.len() != self.n {
            return Err(RunConfigError::EndpointCount(self.endpoints.len(), self.n));
        }
        Ok(())
    }
}
