use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::capture::{DeviceRegistry, RegistryError};
use crate::classify::{ClassifierConfig, DecisionMethod};
use crate::leak::{DictionaryError, DictionarySet, LeakRules, DEFAULT_IDENTIFIER_KEYS, DEFAULT_IMAGE_WINDOW_SECS};
use crate::metadata::DEFAULT_GAP_SECS;
use crate::vendor::VendorPatterns;

/// Environment variable naming a dictionary directory, used when neither the
/// command line nor the config file gives one.
pub const DICT_DIR_ENV: &str = "MEDLEAK_DICT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Syntax { path: PathBuf, detail: String },
    #[error("{0} must be a positive number")]
    NotPositive(&'static str),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("device registry is empty")]
    EmptyRegistry,
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
}

/// Everything one analysis run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub classifier: ClassifierConfig,
    pub gap_secs: f64,
    pub image_window_secs: f64,
    /// Directory with `medical-terms.txt`, `first-names.txt` and
    /// `pii-fields.txt`. `None` means the bundled lists.
    pub dict_dir: Option<PathBuf>,
    pub vendors: VendorPatterns,
    pub identifier_keys: Vec<String>,
    pub registry: DeviceRegistry,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            classifier: ClassifierConfig::default(),
            gap_secs: DEFAULT_GAP_SECS,
            image_window_secs: DEFAULT_IMAGE_WINDOW_SECS,
            dict_dir: None,
            vendors: VendorPatterns::default(),
            identifier_keys: DEFAULT_IDENTIFIER_KEYS.iter().map(|k| k.to_string()).collect(),
            registry: DeviceRegistry::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    thresholds: Thresholds,
    #[serde(default)]
    classifier: ClassifierSection,
    #[serde(default)]
    dictionaries: DictionarySection,
    vendors: Option<VendorSection>,
    identifiers: Option<IdentifierSection>,
    #[serde(default)]
    devices: BTreeMap<String, String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Thresholds {
    entropy: Option<f64>,
    chi_squared: Option<f64>,
    min_stat_len: Option<usize>,
    gap_seconds: Option<f64>,
    image_window_seconds: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifierSection {
    decision: Option<DecisionMethod>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DictionarySection {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VendorSection {
    #[serde(default)]
    host_patterns: Vec<String>,
    #[serde(default)]
    keywords: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentifierSection {
    keys: Vec<String>,
}

impl RunConfig {
    /// Parse a TOML config. A relative dictionary directory is taken
    /// relative to the config file's directory.
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        let mut cfg = RunConfig::default();
        let t = file.thresholds;
        if let Some(v) = t.entropy {
            cfg.classifier.entropy_threshold = v;
        }
        if let Some(v) = t.chi_squared {
            cfg.classifier.chi_threshold = v;
        }
        if let Some(v) = t.min_stat_len {
            cfg.classifier.min_stat_len = v;
        }
        if let Some(v) = t.gap_seconds {
            cfg.gap_secs = v;
        }
        if let Some(v) = t.image_window_seconds {
            cfg.image_window_secs = v;
        }
        if let Some(d) = file.classifier.decision {
            cfg.classifier.decision = d;
        }
        if let Some(dir) = file.dictionaries.dir {
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.dict_dir = Some(if dir.is_relative() { base.join(dir) } else { dir });
        }
        if let Some(v) = file.vendors {
            cfg.vendors = VendorPatterns {
                host_patterns: v.host_patterns,
                keywords: v.keywords,
            };
        }
        if let Some(ids) = file.identifiers {
            cfg.identifier_keys = ids.keys;
        }
        for (mac, label) in file.devices {
            cfg.registry.insert(mac.parse().map_err(RegistryError::from)?, label)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&read(path)?, path)
    }

    /// Positive, finite thresholds.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.classifier.entropy_threshold) {
            return Err(ConfigError::NotPositive("entropy threshold"));
        }
        if !positive(self.classifier.chi_threshold) {
            return Err(ConfigError::NotPositive("chi-squared threshold"));
        }
        if self.classifier.min_stat_len == 0 {
            return Err(ConfigError::NotPositive("min_stat_len"));
        }
        if !positive(self.gap_secs) {
            return Err(ConfigError::NotPositive("gap threshold"));
        }
        if !positive(self.image_window_secs) {
            return Err(ConfigError::NotPositive("image window"));
        }
        Ok(())
    }

    /// The dictionary directory to use: the configured one, else
    /// `$MEDLEAK_DICT_DIR`, else none (bundled lists).
    pub fn effective_dict_dir(&self) -> Option<PathBuf> {
        self.dict_dir.clone().or_else(|| {
            std::env::var_os(DICT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
    }

    pub fn leak_rules(&self) -> Result<LeakRules, ConfigError> {
        let dictionaries = match self.effective_dict_dir() {
            Some(dir) => DictionarySet::from_dir(&dir)?,
            None => DictionarySet::bundled(),
        };
        Ok(LeakRules {
            dictionaries,
            vendors: self.vendors.clone(),
            identifier_keys: self.identifier_keys.clone(),
        })
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse a registry in either form: a TOML document with a `[devices]`
/// table of `"MAC" = "label"`, or plain `MAC label` lines.
pub fn parse_registry(text: &str) -> Result<DeviceRegistry, ConfigError> {
    #[derive(Deserialize)]
    struct RegistryFile {
        devices: BTreeMap<String, String>,
    }
    if let Ok(file) = toml::from_str::<RegistryFile>(text) {
        let mut reg = DeviceRegistry::new();
        for (mac, label) in file.devices {
            reg.insert(mac.parse().map_err(RegistryError::from)?, label)?;
        }
        return Ok(reg);
    }
    Ok(DeviceRegistry::parse_lines(text)?)
}

pub fn load_registry(path: &Path) -> Result<DeviceRegistry, ConfigError> {
    parse_registry(&read(path)?)
}
