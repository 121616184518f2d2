//! Line-oriented experiment configuration: `[section]` headers followed by
//! `key = value` lines. `#` starts a comment. Unknown sections and keys are
//! rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::perturb::PerturbationKind;
use crate::{Error, Result};

/// Accepted keys per section.
pub const SCHEMA: &[(&str, &[&str])] = &[
    (
        "map",
        &["family", "matrix", "offset", "a", "b", "c", "alpha", "beta", "x0", "tol", "transitions"],
    ),
    ("perturbation", &["model", "epsilon", "sigma", "density", "amplitude"]),
    ("run", &["radius", "one_sided", "seeds", "ladder", "schedule", "epsilon", "out"]),
    ("checks", &["recursion", "gap_sum", "theorem", "uniform", "certificates"]),
    ("sweep", &["parameter", "values"]),
    ("decay", &["r", "alpha", "v", "steps"]),
    ("glue", &["x_start", "y0", "backward", "forward", "x", "y", "origin"]),
];

/// Raw `section -> key -> value` table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RawConfig::default();
        let mut section: Option<String> = None;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::Parse(format!("line {}: {msg}", no + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("malformed section header `{line}`")))?
                    .trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(at(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| at(format!("key `{key}` outside any section")))?;
            cfg.set(&sec, key, value).map_err(|e| at(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets a value, checking the key against the schema.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let keys = SCHEMA
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, k)| *k)
            .ok_or_else(|| Error::Parse(format!("unknown section [{section}]")))?;
        if !keys.contains(&key) {
            return Err(Error::Parse(format!("unknown key `{key}` in [{section}]")));
        }
        let slot = self.entries.entry(section.to_string()).or_default();
        if slot.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Parse(format!("duplicate key `{key}` in [{section}]")));
        }
        Ok(())
    }

    /// Replaces a value, e.g. for sweep points; `path` is `section.key`.
    pub fn with(&self, path: &str, value: &str) -> Result<Self> {
        let (section, key) = path
            .split_once('.')
            .ok_or_else(|| Error::Parse(format!("parameter `{path}` must be `section.key`")))?;
        let mut out = self.clone();
        if let Some(s) = out.entries.get_mut(section) {
            s.remove(key);
        }
        out.set(section, key, value)?;
        Ok(out)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries.get(section)?.get(key).map(String::as_str)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.entries.contains_key(section)
    }

    fn bad(section: &str, key: &str, value: &str, what: &str) -> Error {
        Error::Parse(format!("[{section}] {key} = `{value}`: expected {what}"))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Self::bad(section, key, v, "a finite number"))
            })
            .transpose()
    }

    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(section, key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, section: &str, key: &str) -> Result<f64> {
        self.f64(section, key)?
            .ok_or_else(|| Error::Parse(format!("missing [{section}] {key}")))
    }

    pub fn int(&self, section: &str, key: &str) -> Result<Option<i64>> {
        self.get(section, key)
            .map(|v| v.parse::<i64>().map_err(|_| Self::bad(section, key, v, "an integer")))
            .transpose()
    }

    pub fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.get(section, key) {
            None => Ok(default),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "0") => Ok(false),
            Some(v) => Err(Self::bad(section, key, v, "true or false")),
        }
    }

    pub fn floats(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(section, key)
            .map(|v| {
                split_list(v)
                    .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| Self::bad(section, key, v, "a list of numbers"))
            })
            .transpose()
    }

    pub fn ints(&self, section: &str, key: &str) -> Result<Option<Vec<i64>>> {
        self.get(section, key)
            .map(|v| {
                split_list(v)
                    .map(|t| t.parse::<i64>().ok())
                    .collect::<Option<Vec<i64>>>()
                    .ok_or_else(|| Self::bad(section, key, v, "a list of integers"))
            })
            .transpose()
    }

    /// Seed list: numbers separated by spaces or commas, or an inclusive range `a:b`.
    pub fn seeds(&self) -> Result<Option<Vec<u64>>> {
        let Some(v) = self.get("run", "seeds") else {
            return Ok(None);
        };
        let err = || Self::bad("run", "seeds", v, "seeds `1 2 3` or a range `1:20`");
        if let Some((a, b)) = v.split_once(':') {
            let a: u64 = a.trim().parse().map_err(|_| err())?;
            let b: u64 = b.trim().parse().map_err(|_| err())?;
            if b < a {
                return Err(err());
            }
            return Ok(Some((a..=b).collect()));
        }
        let seeds = split_list(v)
            .map(|t| t.parse::<u64>().ok())
            .collect::<Option<Vec<u64>>>()
            .ok_or_else(err)?;
        if seeds.is_empty() {
            return Err(err());
        }
        Ok(Some(seeds))
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

/// Map family selected by `[map] family`.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Doubling,
    /// Symmetric neutral map with `a = b = 2^α`, `c = 1/2`.
    Neutral { alpha: f64 },
    Interval { a: f64, b: f64, c: f64, alpha: f64, beta: f64 },
    Torus { matrix: [[i64; 2]; 2] },
    Affine { dim: usize, matrix: Vec<f64>, offset: Vec<f64>, tol: Option<f64> },
    Symbolic { transitions: PathBuf },
}

impl FamilySpec {
    pub fn from_config(cfg: &RawConfig, base: Option<&Path>) -> Result<Self> {
        let family = cfg
            .get("map", "family")
            .ok_or_else(|| Error::Parse("missing [map] family".into()))?;
        Ok(match family {
            "doubling" => FamilySpec::Doubling,
            "neutral" => FamilySpec::Neutral {
                alpha: cfg.require_f64("map", "alpha")?,
            },
            "interval" => FamilySpec::Interval {
                a: cfg.require_f64("map", "a")?,
                b: cfg.require_f64("map", "b")?,
                c: cfg.require_f64("map", "c")?,
                alpha: cfg.f64_or("map", "alpha", 0.0)?,
                beta: cfg.f64_or("map", "beta", 0.0)?,
            },
            "torus" => {
                let m = cfg
                    .ints("map", "matrix")?
                    .unwrap_or_else(|| vec![2, 1, 1, 1]);
                if m.len() != 4 {
                    return Err(Error::Parse("[map] matrix for the torus needs 4 integers".into()));
                }
                FamilySpec::Torus {
                    matrix: [[m[0], m[1]], [m[2], m[3]]],
                }
            }
            "affine" => {
                let m = cfg
                    .floats("map", "matrix")?
                    .ok_or_else(|| Error::Parse("missing [map] matrix".into()))?;
                let dim = (m.len() as f64).sqrt().round() as usize;
                if dim == 0 || dim * dim != m.len() {
                    return Err(Error::Parse(format!(
                        "[map] matrix has {} entries, not a square number",
                        m.len()
                    )));
                }
                let offset = cfg.floats("map", "offset")?.unwrap_or_else(|| vec![0.0; dim]);
                if offset.len() != dim {
                    return Err(Error::Parse(format!("[map] offset needs {dim} entries")));
                }
                FamilySpec::Affine {
                    dim,
                    matrix: m,
                    offset,
                    tol: cfg.f64("map", "tol")?,
                }
            }
            "symbolic" => {
                let p = PathBuf::from(
                    cfg.get("map", "transitions")
                        .ok_or_else(|| Error::Parse("missing [map] transitions".into()))?,
                );
                let transitions = match base {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p,
                };
                FamilySpec::Symbolic { transitions }
            }
            other => {
                return Err(Error::Parse(format!(
                    "unknown family `{other}` (doubling, neutral, interval, torus, affine, symbolic)"
                )))
            }
        })
    }
}

/// `[perturbation]` section; `model = none` or a missing section means no noise.
pub fn perturbation_from_config(cfg: &RawConfig) -> Result<Option<PerturbationKind>> {
    let Some(model) = cfg.get("perturbation", "model") else {
        return Ok(None);
    };
    let req = |k| cfg.require_f64("perturbation", k);
    Ok(Some(match model {
        "none" => return Ok(None),
        "uniform" => PerturbationKind::Uniform { epsilon: req("epsilon")? },
        "average_small" => PerturbationKind::AverageSmall { epsilon: req("epsilon")? },
        "rare" => PerturbationKind::Rare {
            density: req("density")?,
            amplitude: req("amplitude")?,
        },
        "gaussian" => PerturbationKind::Gaussian { sigma: req("sigma")? },
        other => {
            return Err(Error::Parse(format!(
                "unknown model `{other}` (none, uniform, average_small, rare, gaussian)"
            )))
        }
    }))
}

/// Which bound checks decide the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checks {
    pub recursion: bool,
    pub gap_sum: bool,
    pub theorem: bool,
    /// Uniform-error check; only applied to uniformly bounded noise.
    pub uniform: bool,
    pub certificates: bool,
}

impl Checks {
    pub fn from_config(cfg: &RawConfig) -> Result<Self> {
        Ok(Self {
            recursion: cfg.bool_or("checks", "recursion", true)?,
            gap_sum: cfg.bool_or("checks", "gap_sum", true)?,
            theorem: cfg.bool_or("checks", "theorem", true)?,
            uniform: cfg.bool_or("checks", "uniform", true)?,
            certificates: cfg.bool_or("checks", "certificates", true)?,
        })
    }

    pub fn none() -> Self {
        Self {
            recursion: false,
            gap_sum: false,
            theorem: false,
            uniform: false,
            certificates: false,
        }
    }
}
