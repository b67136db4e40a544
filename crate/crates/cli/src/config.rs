//! Flat `section.key = value` configuration with resolved-value tracking.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Every key the driver understands.
pub const KNOWN_KEYS: &[&str] = &[
    "output.dir",
    "run.deterministic",
    "model.kind",
    "model.omega0",
    "model.amplitude_sq",
    "model.center",
    "model.width",
    "model.half_width",
    "model.lower",
    "model.upper",
    "model.coefficient",
    "model.exponent",
    "model.threshold",
    "model.cutoff",
    "model.table",
    "selfenergy.eta",
    "selfenergy.rel_tol",
    "selfenergy.abs_tol",
    "selfenergy.max_subdiv",
    "selfenergy.sheet",
    "selfenergy.re_min",
    "selfenergy.re_max",
    "selfenergy.im",
    "selfenergy.n",
    "spectral.e_min",
    "spectral.e_max",
    "spectral.n",
    "poles.guess_re",
    "poles.guess_im",
    "survival.method",
    "survival.tmin",
    "survival.tmax",
    "survival.log",
    "survival.nt",
    "survival.contour_a",
    "survival.omega_max",
    "survival.spacing",
    "oracle.n",
    "oracle.binning",
    "oracle.window_lo",
    "oracle.window_hi",
    "oracle.solver",
    "packet.time",
    "packet.gamma",
    "packet.window_lo",
    "packet.window_hi",
    "packet.n",
    "packet.basis",
    "packet.slope",
    "packet.x_min",
    "packet.x_max",
    "packet.n_x",
    "twosurface.coupling",
    "twosurface.beta_slope",
    "twosurface.x_min",
    "twosurface.x_max",
    "twosurface.n_x",
    "twosurface.dt",
    "twosurface.t_max",
    "twosurface.snapshot_stride",
    "twosurface.record_stride",
    "twosurface.absorber_width",
    "twosurface.absorber_strength",
    "partition.models",
    "partition.omegas",
    "partition.n_min",
    "partition.n_max",
    "partition.seed",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    Syntax {
        line: usize,
        message: String,
    },
    UnknownKey {
        line: usize,
        key: String,
    },
    Duplicate {
        line: usize,
        key: String,
    },
    Value {
        line: Option<usize>,
        key: String,
        message: String,
    },
    Missing {
        key: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, message } => write!(f, "config line {line}: {message}"),
            ConfigError::UnknownKey { line, key } => {
                write!(f, "config line {line}: unknown key `{key}`")
            }
            ConfigError::Duplicate { line, key } => {
                write!(f, "config line {line}: duplicate key `{key}`")
            }
            ConfigError::Value {
                line: Some(l),
                key,
                message,
            } => {
                write!(f, "config line {l}: key `{key}`: {message}")
            }
            ConfigError::Value {
                line: None,
                key,
                message,
            } => write!(f, "key `{key}`: {message}"),
            ConfigError::Missing { key } => write!(f, "missing required key `{key}`"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Parsed configuration. Every value read, including applied defaults, is
/// recorded for the manifest.
#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    resolved: RefCell<BTreeMap<String, String>>,
}

fn check_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|p| {
            !p.is_empty()
                && p.chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        })
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, found `{body}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !check_key(k) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("malformed key `{k}`"),
                });
            }
            if v.is_empty() {
                return Err(ConfigError::Value {
                    line: Some(line),
                    key: k.into(),
                    message: "empty value".into(),
                });
            }
            cfg.insert(k, v, Some(line))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(Self::parse(&text)?)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let l = line.unwrap_or(0);
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: l,
                key: key.into(),
            });
        }
        if line.is_some() && self.entries.contains_key(key) {
            return Err(ConfigError::Duplicate {
                line: l,
                key: key.into(),
            });
        }
        self.entries.insert(
            key.into(),
            Entry {
                value: value.into(),
                line,
            },
        );
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax {
                line: 0,
                message: format!("override `{assignment}` is not `key=value`"),
            })?;
        self.insert(k.trim(), v.trim(), None)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| ConfigError::Value {
                    line: e.line,
                    key: key.into(),
                    message: format!("cannot parse `{}`: {err}", e.value),
                }),
        }
    }

    /// Records a resolved value for the manifest.
    pub fn record(&self, key: &str, value: impl fmt::Display) {
        self.resolved
            .borrow_mut()
            .insert(key.into(), value.to_string());
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.parse_value::<f64>(key)?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(self.invalid(key, "value must be finite"));
            }
            self.record(key, fmt_f64(x));
        }
        Ok(v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.f64_opt(key)?.unwrap_or(default);
        self.record(key, fmt_f64(v));
        Ok(v)
    }

    pub fn f64_req(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(key)?
            .ok_or_else(|| ConfigError::Missing { key: key.into() })
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let v = self.parse_value::<usize>(key)?.unwrap_or(default);
        self.record(key, v);
        Ok(v)
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        let v = self.parse_value::<u64>(key)?.unwrap_or(default);
        self.record(key, v);
        Ok(v)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let v = self.parse_value::<bool>(key)?.unwrap_or(default);
        self.record(key, v);
        Ok(v)
    }

    pub fn str_opt(&self, key: &str) -> Option<String> {
        let v = self.entries.get(key).map(|e| e.value.clone());
        if let Some(s) = &v {
            self.record(key, s);
        }
        v
    }

    pub fn str_or(&self, key: &str, default: &str) -> String {
        let v = self.str_opt(key).unwrap_or_else(|| default.to_string());
        self.record(key, &v);
        v
    }

    pub fn str_req(&self, key: &str) -> Result<String, ConfigError> {
        self.str_opt(key)
            .ok_or_else(|| ConfigError::Missing { key: key.into() })
    }

    /// Error for `key` pointing at its source line.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            line: self.entries.get(key).and_then(|e| e.line),
            key: key.into(),
            message: message.into(),
        }
    }

    /// Resolved values in key order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.resolved
            .borrow()
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Full-precision, locale-free float formatting used in every artifact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_lines() {
        let c =
            Config::parse("# comment\nmodel.kind = box\n\nmodel.amplitude_sq = 0.05 # inline\n")
                .unwrap();
        assert_eq!(c.str_req("model.kind").unwrap(), "box");
        assert_eq!(c.f64_req("model.amplitude_sq").unwrap(), 0.05);
        let e = Config::parse("model.kind = box\nmodel.amplitude_sq = abc\n")
            .unwrap()
            .f64_req("model.amplitude_sq")
            .unwrap_err();
        assert!(e.to_string().contains("line 2"));
        assert!(e.to_string().contains("model.amplitude_sq"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            Config::parse("model.kind box"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Config::parse("\nmodel.colour = red"),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            Config::parse("model.kind = a\nmodel.kind = b"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            Config::parse("Model.Kind = a"),
            Err(ConfigError::Syntax { .. })
        ));
    }

    #[test]
    fn defaults_are_recorded() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.usize_or("survival.nt", 201).unwrap(), 201);
        assert_eq!(
            c.resolved(),
            vec![("survival.nt".to_string(), "201".to_string())]
        );
    }

    #[test]
    fn overrides_replace_values() {
        let mut c = Config::parse("survival.tmax = 5").unwrap();
        c.set("survival.tmax=7").unwrap();
        assert_eq!(c.f64_req("survival.tmax").unwrap(), 7.0);
        assert!(c.set("nonsense").is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 12345.678] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
