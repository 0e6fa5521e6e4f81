//! Flat key=value simulation configuration.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("field '{field}': {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Ens,
    Ftr,
    Oop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowChoice {
    Hct,
    Lbp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_psd: usize,
    pub scheme: SchemeChoice,
    pub pow_kind: PowChoice,
    pub kappa: u32,
    pub db_rows: usize,
    pub block_bytes: usize,
    pub n_users: usize,
    pub ring_size: usize,
    pub window_s: u64,
    pub link_delay: u64,
    pub workers: usize,
    pub seed: u64,
    /// Shamir privacy degree for the robust scheme.
    pub ftr_privacy_t: usize,
    /// Extra queries one attacker floods through a single AP (0 disables).
    pub flood_queries: usize,
    /// Corrupt one server's answers (exercises robust reconstruction).
    pub byzantine_psd: bool,
    /// Use the real module-lattice signature backend (false: fast stub).
    pub mldsa: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_psd: 2,
            scheme: SchemeChoice::Ens,
            pow_kind: PowChoice::Hct,
            kappa: 8,
            db_rows: 256,
            block_bytes: 3 * 1024,
            n_users: 4,
            ring_size: 16,
            window_s: 3600,
            link_delay: 1,
            workers: 2,
            seed: 1,
            ftr_privacy_t: 1,
            flood_queries: 0,
            byzantine_psd: false,
            mldsa: true,
        }
    }
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<SimConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        Self::from_str_pairs(&text)
    }

    pub fn from_str_pairs(text: &str) -> Result<SimConfig, ConfigError> {
        let mut pairs = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Invalid {
                    field: "config",
                    reason: format!("line {} is not key=value", lineno + 1),
                });
            };
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_pairs(&pairs)
    }

    fn from_pairs(pairs: &HashMap<String, String>) -> Result<SimConfig, ConfigError> {
        let mut cfg = SimConfig::default();
        for (key, value) in pairs {
            match key.as_str() {
                "n_psd" => cfg.n_psd = parse(key, value)?,
                "scheme" => {
                    cfg.scheme = match value.as_str() {
                        "ens" => SchemeChoice::Ens,
                        "ftr" => SchemeChoice::Ftr,
                        "oop" => SchemeChoice::Oop,
                        other => {
                            return Err(ConfigError::Invalid {
                                field: "scheme",
                                reason: format!("'{other}' is not ens|ftr|oop"),
                            })
                        }
                    }
                }
                "pow_kind" => {
                    cfg.pow_kind = match value.as_str() {
                        "hct" => PowChoice::Hct,
                        "lbp" => PowChoice::Lbp,
                        other => {
                            return Err(ConfigError::Invalid {
                                field: "pow_kind",
                                reason: format!("'{other}' is not hct|lbp"),
                            })
                        }
                    }
                }
                "kappa" => cfg.kappa = parse(key, value)?,
                "db_rows" => cfg.db_rows = parse(key, value)?,
                "block_bytes" => cfg.block_bytes = parse(key, value)?,
                "n_users" => cfg.n_users = parse(key, value)?,
                "ring_size" => cfg.ring_size = parse(key, value)?,
                "window_s" => cfg.window_s = parse(key, value)?,
                "link_delay" => cfg.link_delay = parse(key, value)?,
                "workers" => cfg.workers = parse(key, value)?,
                "seed" => cfg.seed = parse(key, value)?,
                "ftr_privacy_t" => cfg.ftr_privacy_t = parse(key, value)?,
                "flood_queries" => cfg.flood_queries = parse(key, value)?,
                "byzantine_psd" => cfg.byzantine_psd = parse_bool(key, value)?,
                "mldsa" => cfg.mldsa = parse_bool(key, value)?,
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive: [(&'static str, usize); 6] = [
            ("n_psd", self.n_psd),
            ("db_rows", self.db_rows),
            ("block_bytes", self.block_bytes),
            ("n_users", self.n_users),
            ("ring_size", self.ring_size),
            ("workers", self.workers),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(ConfigError::Invalid { field, reason: "must be positive".into() });
            }
        }
        if self.n_psd < 2 {
            return Err(ConfigError::Invalid {
                field: "n_psd",
                reason: "multi-server retrieval needs at least 2 replicas".into(),
            });
        }
        if !self.ring_size.is_power_of_two() {
            return Err(ConfigError::Invalid {
                field: "ring_size",
                reason: "must be a power of two".into(),
            });
        }
        if self.block_bytes % 8 != 0 || (self.block_bytes * 8) % 64 != 0 {
            return Err(ConfigError::Invalid {
                field: "block_bytes",
                reason: "block must be a whole number of 64-bit words".into(),
            });
        }
        if self.scheme == SchemeChoice::Oop && self.db_rows % self.n_psd != 0 {
            return Err(ConfigError::Invalid {
                field: "db_rows",
                reason: format!("must split into {} equal chunks", self.n_psd),
            });
        }
        if self.scheme == SchemeChoice::Ftr && self.ftr_privacy_t >= self.n_psd {
            return Err(ConfigError::Invalid {
                field: "ftr_privacy_t",
                reason: "privacy degree must be below the server count".into(),
            });
        }
        if self.byzantine_psd && self.scheme != SchemeChoice::Ftr {
            return Err(ConfigError::Invalid {
                field: "byzantine_psd",
                reason: "only the robust scheme reconstructs past a lying replica".into(),
            });
        }
        if self.flood_queries > 0 && self.ring_size < 2 {
            return Err(ConfigError::Invalid {
                field: "flood_queries",
                reason: "flooding reserves one AP; ring_size must be at least 2".into(),
            });
        }
        if self.ring_size < self.n_users + 5 {
            return Err(ConfigError::Invalid {
                field: "ring_size",
                reason: format!(
                    "per-AP-per-window rate limiting needs one AP per user plus 5 reserved; {} users need a ring of at least {}",
                    self.n_users,
                    (self.n_users + 5).next_power_of_two()
                ),
            });
        }
        if self.db_rows < 2 {
            return Err(ConfigError::Invalid {
                field: "db_rows",
                reason: "at least two rows (one is reserved for the attack matrix)".into(),
            });
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Invalid {
        field: leak(key),
        reason: format!("cannot parse '{value}'"),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(ConfigError::Invalid { field: leak(key), reason: format!("'{value}' is not a boolean") }),
    }
}

fn leak(key: &str) -> &'static str {
    // Field names come from a small fixed key set; leaking them keeps the
    // error type simple.
    Box::leak(key.to_string().into_boxed_str())
}
