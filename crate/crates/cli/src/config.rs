//! Resolved run configuration: flags layered over an optional TOML file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use diskflow::C64;
use serde::{Deserialize, Serialize};

/// A usage problem; reported with exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Parsed<T> = std::result::Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> Parsed<T> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Key–value settings read from `--config`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    pub fn load(path: &Path) -> Parsed<Self> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Top-level keys only; numbers, booleans, strings and arrays of those.
    pub fn parse(text: &str) -> Parsed<Self> {
        let table: toml::Table = text.parse().or_else(|e| usage(format!("config is not valid TOML: {e}")))?;
        let mut map = BTreeMap::new();
        for (k, v) in table {
            let s = scalar(&v).ok_or_else(|| UsageError(format!("config key `{k}` must be a scalar or a flat array")))?;
            map.insert(k.replace('-', "_"), s);
        }
        Ok(FileConfig(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// The flag value if given, else the file value.
    pub fn pick(&self, flag: &Option<String>, key: &str) -> Option<String> {
        flag.clone().or_else(|| self.get(key).map(str::to_string))
    }
}

fn scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(format!("{f:?}")),
        toml::Value::Boolean(b) => Some(b.to_string()),
        toml::Value::Array(a) => a.iter().map(scalar).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
        _ => None,
    }
}

pub fn parse_f64(key: &str, s: &str) -> Parsed<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => usage(format!("--{key}: `{s}` is not a finite number")),
    }
}

pub fn parse_i32(key: &str, s: &str) -> Parsed<i32> {
    s.trim().parse().or_else(|_| usage(format!("--{key}: `{s}` is not an integer")))
}

/// `a`, `a+bi`, `a-bi`, `bi`, with optional exponents.
pub fn parse_complex(s: &str) -> Parsed<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || UsageError(format!("`{s}` is not a complex number (expected forms like 0.02, 0.01+0.005i, -2e-3i)"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&j| {
        (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E')
    });
    let (re, im) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

/// `v`, `v1,v2,…`, `start:stop:count` (linear) or `start:stop:count:log`.
pub fn parse_grid(key: &str, s: &str) -> Parsed<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.len() {
        1 => s.split(',').map(|x| parse_f64(key, x)).collect(),
        3 | 4 => {
            let a = parse_f64(key, parts[0])?;
            let b = parse_f64(key, parts[1])?;
            let count: usize =
                parts[2].parse().or_else(|_| usage(format!("--{key}: count `{}` is not a positive integer", parts[2])))?;
            if count == 0 {
                return usage(format!("--{key}: count must be ≥ 1"));
            }
            let log = match parts.get(3) {
                None | Some(&"lin") => false,
                Some(&"log") => true,
                Some(x) => return usage(format!("--{key}: spacing `{x}` must be `lin` or `log`")),
            };
            if log && !(a > 0.0 && b > 0.0) {
                return usage(format!("--{key}: logarithmic grids need positive ends"));
            }
            if count == 1 {
                return Ok(vec![a]);
            }
            Ok((0..count)
                .map(|i| {
                    let s = i as f64 / (count - 1) as f64;
                    if i + 1 == count {
                        b
                    } else if log {
                        a * (b / a).powf(s)
                    } else {
                        tidy(a + (b - a) * s)
                    }
                })
                .collect())
        }
        _ => usage(format!("--{key}: `{s}` must be a value, a list or start:stop:count[:log]")),
    }
}

/// Drops the rounding noise of a linear grid step.
fn tidy(v: f64) -> f64 {
    format!("{v:.13e}").parse().unwrap_or(v)
}

/// `a:b` with 1 ≤ a < b.
pub fn parse_support(s: &str) -> Parsed<(f64, f64)> {
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 2 {
        return usage(format!("--support: `{s}` must be a:b"));
    }
    let (a, b) = (parse_f64("support", p[0])?, parse_f64("support", p[1])?);
    if !(1.0 <= a && a < b) {
        return usage(format!("--support: [{a}, {b}] must satisfy 1 ≤ a < b"));
    }
    Ok((a, b))
}

pub fn require_positive(key: &str, v: f64) -> Parsed<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        usage(format!("--{key} must be positive, got {v}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub alpha: f64,
    pub delta: f64,
    pub window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub phi: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub max_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bessel,
    Gamma,
    Spectral,
    Zeros,
    Resolvent,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Oracle {
    Bessel,
    Fd,
}

/// How forcings and initial data are placed in r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// The bump stays on the given support.
    Fixed,
    /// The support is multiplied by |λ|^{-1/2} (scan) or √t (semigroup).
    Diffusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandConfig {
    Verify {
        suite: Suite,
    },
    FnEval {
        params: ParamsConfig,
        n: i32,
        lambda: C64,
        method: diskflow::spectral::FnMethod,
    },
    ZeroScan {
        params: ParamsConfig,
        n: i32,
        region: RegionConfig,
    },
    Sweep {
        alpha: Vec<f64>,
        delta: Vec<f64>,
        n_set: Vec<i32>,
        region: RegionConfig,
    },
    Resolvent {
        params: ParamsConfig,
        n: i32,
        support: (f64, f64),
        lambda: Option<C64>,
        oracle: Oracle,
        scan_arg: Option<f64>,
        moduli: Vec<f64>,
        scale: Scale,
    },
    Semigroup {
        params: ParamsConfig,
        n: i32,
        support: (f64, f64),
        t: Vec<f64>,
        b: Option<f64>,
        phi: Option<f64>,
        scale: Scale,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Verify { .. } => "verify",
            CommandConfig::FnEval { .. } => "fn-eval",
            CommandConfig::ZeroScan { .. } => "zero-scan",
            CommandConfig::Sweep { .. } => "sweep",
            CommandConfig::Resolvent { .. } => "resolvent",
            CommandConfig::Semigroup { .. } => "semigroup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.02").unwrap(), C64::new(0.02, 0.0));
        assert_eq!(parse_complex("-1").unwrap(), C64::new(-1.0, 0.0));
        assert_eq!(parse_complex("0.01+0.005i").unwrap(), C64::new(0.01, 0.005));
        assert_eq!(parse_complex("1e-3-2e-4i").unwrap(), C64::new(1e-3, -2e-4));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("2.5e+1i").unwrap(), C64::new(0.0, 25.0));
        assert!(parse_complex("1+").is_err());
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("alpha", "0.02:0.1:5").unwrap().len(), 5);
        let d = parse_grid("delta", "-0.05:0.05:11").unwrap();
        assert_eq!((d[0], d[10]), (-0.05, 0.05));
        assert_eq!((d[3], d[5]), (-0.02, 0.0));
        let t = parse_grid("t", "10:1000:3:log").unwrap();
        assert!((t[1] - 100.0).abs() < 1e-12);
        assert_eq!(parse_grid("t", "1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_grid("t", "1:2").is_err());
        assert!(parse_grid("t", "0:2:3:log").is_err());
    }

    #[test]
    fn run_config_round_trips() {
        let cfg = RunConfig {
            command: CommandConfig::Resolvent {
                params: ParamsConfig { alpha: 0.05, delta: 0.02, window: 0.2 },
                n: -1,
                support: (1.5, 3.0),
                lambda: Some(C64::new(0.01, 0.005)),
                oracle: Oracle::Fd,
                scan_arg: None,
                moduli: parse_grid("moduli", "1e-4:1e-2:9:log").unwrap(),
                scale: Scale::Diffusive,
            },
            tol: 1e-10,
            format: Format::Csv,
            out: Some(PathBuf::from("out.csv")),
            threads: Some(1),
        };
        let back: RunConfig = serde_json::from_value(cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn file_values_become_strings() {
        let f = FileConfig::parse("alpha = 0.05\nn = -1\nsupport = \"1.5:3\"\nn-set = [1, -1]\n").unwrap();
        assert_eq!(f.get("alpha"), Some("0.05"));
        assert_eq!(f.get("n"), Some("-1"));
        assert_eq!(f.get("n_set"), Some("1,-1"));
        assert_eq!(f.pick(&Some("0.1".into()), "alpha").as_deref(), Some("0.1"));
        assert!(FileConfig::parse("[section]\nx = 1\n").is_err());
    }
}
