//! Effective run configuration: command-line flags over a `key = value`
//! file over built-in defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub d: usize,
    pub mu: f64,
    /// Quasimomentum `k` (two-body) or `K` (three-body), radians.
    pub k: Vec<f64>,
    /// Nyström points per axis.
    pub n: usize,
    /// Quasimomentum grid points per axis for band scans.
    pub nk: usize,
    /// Box sizes for the finite-volume oracle.
    #[serde(rename = "L")]
    pub ls: Vec<usize>,
    /// Box sizes for the oracle comparison of `threebody`; empty when off.
    pub oracle: Vec<usize>,
    pub tol: f64,
    /// Number of particles for `band`.
    pub particles: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub quick: bool,
}

/// Recognized keys, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "d", "mu", "k", "n", "nk", "L", "oracle", "tol", "particles", "format", "out", "jobs", "quick",
];

/// Raw `key -> value` layer.
pub type Layer = BTreeMap<String, String>;

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<Layer> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidArgument(format!("cannot read config file {}: {e}", path.display()))
    })?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<Layer> {
    let mut layer = Layer::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("config line {}: expected key = value", no + 1))
        })?;
        let key = canonical_key(key.trim())?;
        layer.insert(key, value.trim().to_string());
    }
    Ok(layer)
}

fn canonical_key(key: &str) -> Result<String> {
    let k = match key {
        "K" => "k",
        "l" | "ls" => "L",
        other => other,
    };
    if KEYS.contains(&k) {
        Ok(k.to_string())
    } else {
        Err(Error::InvalidArgument(format!("unknown config key '{key}'")))
    }
}

/// Parses radians; accepts multiples and fractions of `pi` such as `-pi/2`, `2pi/3` or `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase().replace(['*', ' '], "");
    let bad = || Error::InvalidArgument(format!("cannot parse angle '{s}'"));
    if let Some(pos) = t.find("pi") {
        let (coef, rest) = (&t[..pos], &t[pos + 2..]);
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let den = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        let v = c * PI / den;
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("{key}: expected a finite number, got '{s}'")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidArgument(format!("{key}: expected a nonnegative integer, got '{s}'")))
}

fn parse_sizes(key: &str, s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let s = s.strip_prefix("L=").or_else(|| s.strip_prefix("l=")).unwrap_or(s);
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_usize(key, x)).collect()
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidArgument(format!("{key}: expected true or false, got '{s}'"))),
    }
}

impl RunConfig {
    /// Resolves `flags > file > defaults`. Defaults that depend on the
    /// dimension are filled in after `d` is known.
    pub fn resolve(command: &str, file: &Layer, flags: &Layer) -> Result<Self> {
        let get = |key: &str| flags.get(key).or_else(|| file.get(key)).map(String::as_str);
        let d = get("d").map(|s| parse_usize("d", s)).transpose()?.unwrap_or(1);
        if !(1..=2).contains(&d) {
            return Err(Error::InvalidArgument(format!("d must be 1 or 2, got {d}")));
        }
        let mu = get("mu").map(|s| parse_f64("mu", s)).transpose()?.unwrap_or(-1.0);
        let mut k = match get("k") {
            Some(s) => s.split(',').map(parse_angle).collect::<Result<Vec<_>>>()?,
            None => vec![0.0; d],
        };
        if k.len() == 1 && d == 2 {
            k.push(k[0]);
        }
        if k.len() != d {
            return Err(Error::InvalidArgument(format!(
                "quasimomentum needs {d} component(s), got {}",
                k.len()
            )));
        }
        let n = get("n")
            .map(|s| parse_usize("n", s))
            .transpose()?
            .unwrap_or(if d == 1 { 512 } else { 48 });
        let nk = get("nk")
            .map(|s| parse_usize("nk", s))
            .transpose()?
            .unwrap_or(if d == 1 { 64 } else { 16 });
        let ls = match get("L") {
            Some(s) => parse_sizes("L", s)?,
            None if d == 1 => vec![32, 64, 128],
            None => vec![6, 8],
        };
        let oracle = get("oracle").map(|s| parse_sizes("oracle", s)).transpose()?.unwrap_or_default();
        let tol = get("tol").map(|s| parse_f64("tol", s)).transpose()?.unwrap_or(1e-10);
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
        }
        let particles = get("particles")
            .map(|s| parse_usize("particles", s))
            .transpose()?
            .unwrap_or(3);
        if !(2..=3).contains(&particles) {
            return Err(Error::InvalidArgument(format!("particles must be 2 or 3, got {particles}")));
        }
        let format = match get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "format must be csv or json, got '{other}'"
                )))
            }
        };
        let out = get("out").filter(|s| !s.is_empty()).map(PathBuf::from);
        let jobs = get("jobs").map(|s| parse_usize("jobs", s)).transpose()?.unwrap_or(0);
        let quick = get("quick").map(|s| parse_bool("quick", s)).transpose()?.unwrap_or(false);
        if nk == 0 || n == 0 {
            return Err(Error::InvalidArgument("grid sizes must be positive".into()));
        }
        Ok(Self {
            command: command.to_string(),
            d,
            mu,
            k,
            n,
            nk,
            ls,
            oracle,
            tol,
            particles,
            format,
            out,
            jobs,
            quick,
        })
    }

    /// `key=value` pairs in [`KEYS`] order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let fmt = super::output::fmt12;
        vec![
            ("command".into(), self.command.clone()),
            ("d".into(), self.d.to_string()),
            ("mu".into(), fmt(self.mu)),
            ("k".into(), self.k.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(",")),
            ("n".into(), self.n.to_string()),
            ("nk".into(), self.nk.to_string()),
            ("L".into(), join(&self.ls)),
            ("oracle".into(), join(&self.oracle)),
            ("tol".into(), fmt(self.tol)),
            ("particles".into(), self.particles.to_string()),
            (
                "format".into(),
                match self.format {
                    Format::Csv => "csv".into(),
                    Format::Json => "json".into(),
                },
            ),
            (
                "out".into(),
                self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            ),
            ("jobs".into(), self.jobs.to_string()),
            ("quick".into(), self.quick.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert!(parse_angle("bogus").is_err());
        assert!(parse_angle("pi/x").is_err());
    }

    #[test]
    fn precedence() {
        let file = parse_config_text("mu = -3 # strong\nd=2\nL = 4,6\n").unwrap();
        let mut flags = Layer::new();
        flags.insert("mu".into(), "-1.5".into());
        let c = RunConfig::resolve("band", &file, &flags).unwrap();
        assert_eq!(c.mu, -1.5);
        assert_eq!(c.d, 2);
        assert_eq!(c.ls, vec![4, 6]);
        assert_eq!(c.n, 48);
        assert_eq!(c.k, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_values() {
        let empty = Layer::new();
        let bad = |k: &str, v: &str| {
            let mut f = Layer::new();
            f.insert(k.into(), v.into());
            RunConfig::resolve("x", &empty, &f).is_err()
        };
        assert!(bad("d", "3"));
        assert!(bad("tol", "0"));
        assert!(bad("format", "xml"));
        assert!(bad("k", "0,0"));
        assert!(parse_config_text("nonsense").is_err());
        assert!(parse_config_text("colour = red").is_err());
    }
}
