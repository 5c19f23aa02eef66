//! Process-wide numeric configuration.

use std::path::PathBuf;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides the coefficient cache directory.
pub const CACHE_DIR_ENV: &str = "PKM_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Mantissa bits for the extended-precision backend; at least 64.
    pub precision_bits: u32,
    /// Default relative tolerance; in `(0, 1e-4]`.
    pub default_tol: f64,
    /// Worker threads, 0 meaning one per core.
    pub threads: usize,
    pub cache_dir: PathBuf,
    pub output_format: OutputFormat,
    /// Largest modulus the coefficient c-sum may reach.
    pub c_cap: u64,
}

impl Default for Config {
    fn default() -> Self {
        let cache_dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".pkm-cache"));
        Config {
            precision_bits: 256,
            default_tol: 1e-10,
            threads: 0,
            cache_dir,
            output_format: OutputFormat::Json,
            c_cap: 100_000,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return Err(Error::domain(format!(
                "precision_bits must be at least 64, got {}",
                self.precision_bits
            )));
        }
        if !(self.default_tol > 0.0 && self.default_tol <= 1e-4) {
            return Err(Error::domain(format!(
                "default_tol must lie in (0, 1e-4], got {}",
                self.default_tol
            )));
        }
        Ok(())
    }
}

static GLOBAL: RwLock<Option<Config>> = RwLock::new(None);

/// Snapshot of the active configuration.
pub fn global() -> Config {
    GLOBAL
        .read()
        .expect("config lock poisoned")
        .clone()
        .unwrap_or_default()
}

/// Replaces the active configuration after validating it.
pub fn set_global(cfg: Config) -> Result<()> {
    cfg.validate()?;
    *GLOBAL.write().expect("config lock poisoned") = Some(cfg);
    Ok(())
}

/// Active precision in bits.
pub fn precision_bits() -> usize {
    global().precision_bits as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = Config::default();
        assert_eq!(c.precision_bits, 256);
        assert_eq!(c.default_tol, 1e-10);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = Config::default();
        c.precision_bits = 32;
        assert!(c.validate().is_err());
        let mut c = Config::default();
        c.default_tol = 1e-3;
        assert!(c.validate().is_err());
    }
}
