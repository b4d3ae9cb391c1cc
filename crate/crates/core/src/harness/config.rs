//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Recognised keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `field.name` | corpus id, or `csv` for tabulated samples | required |
//! | `field.params` | comma-separated reals | empty |
//! | `field.path` | sample file for `field.name = csv` | |
//! | `field.n` | spatial dimension, 1 or 2 | 1 |
//! | `field.T` | time horizon | 1 |
//! | `mode` | one of [`Mode`] | required |
//! | `r`, `r1`, `r2` | polynomial orders | 1, 1, 2 |
//! | `p`, `q`, `q1`, `q2` | integrability indices, `inf` allowed for `p` | 2 |
//! | `s`, `s1`, `s2` | smoothness indices | |
//! | `sweep.start`, `sweep.stop`, `sweep.points` | sweep range | required |
//! | `sweep.scale` | `log` or `linear` | `log` |
//! | `fit.skip` | smallest-`m` points dropped by the rate fit | 2 |
//! | `grid.panels` | panels per axis of the spatial grid | 16 |
//! | `space.t` | time slice for `greedy-space` | `T/2` |
//! | `rates.input` | CSV with `cardinality,error` columns for `rates` | |
//! | `rates.synthetic` | `c, s` for the table `(m, c m^-s)` | |
//! | `out.dir` | output directory | |
//! | `seed` | recorded in every report | 0 |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{make_test_field, DomainSpec, Field};

const KEYS: [&str; 28] = [
    "field.name",
    "field.params",
    "field.path",
    "field.n",
    "field.T",
    "mode",
    "r",
    "r1",
    "r2",
    "p",
    "q",
    "q1",
    "q2",
    "s",
    "s1",
    "s2",
    "sweep.start",
    "sweep.stop",
    "sweep.points",
    "sweep.scale",
    "fit.skip",
    "grid.panels",
    "space.t",
    "rates.input",
    "rates.synthetic",
    "out.dir",
    "seed",
    "kmax",
];

/// Experiment kinds, one per CLI subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `omega_r` and `w_r` over a sweep of `u`.
    Moduli,
    /// Discrete Besov seminorm over a sweep of the dyadic depth.
    Besov,
    /// Jackson construction on `[0, L)` over a sweep of `L`.
    Jackson,
    /// Whitney ratio on `[0, L)` over a sweep of `L`.
    Whitney,
    /// Time greedy over a sweep of `delta`.
    GreedyTime,
    /// Spatial greedy on `f(space.t, .)` over a sweep of `delta`.
    GreedySpace,
    /// Fully discrete construction over a sweep of `eps`.
    GreedySt,
    /// Rate fit of a given table.
    Rates,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Moduli,
        Mode::Besov,
        Mode::Jackson,
        Mode::Whitney,
        Mode::GreedyTime,
        Mode::GreedySpace,
        Mode::GreedySt,
        Mode::Rates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Moduli => "moduli",
            Mode::Besov => "besov",
            Mode::Jackson => "jackson",
            Mode::Whitney => "whitney",
            Mode::GreedyTime => "greedy-time",
            Mode::GreedySpace => "greedy-space",
            Mode::GreedySt => "greedy-st",
            Mode::Rates => "rates",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// Which field to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub params: Vec<f64>,
    pub path: Option<PathBuf>,
    pub n: usize,
    #[serde(rename = "T")]
    pub t_end: f64,
}

impl FieldSpec {
    pub fn build(&self) -> Result<Field> {
        let domain = DomainSpec::new(self.t_end, self.n)?;
        if self.name == "csv" {
            let path = self
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("field.name = csv needs field.path".into()))?;
            return Field::from_csv(domain, path);
        }
        make_test_field(&self.name, &self.params, domain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Log,
    Linear,
}

/// `points` values from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                match self.scale {
                    Scale::Log => self.start * (self.stop / self.start).powf(s),
                    Scale::Linear => self.start + s * (self.stop - self.start),
                }
            })
            .collect()
    }
}

/// Numeric parameters shared by the modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    /// `None` means "derive from `s`" where that makes sense.
    pub r: Option<usize>,
    pub r1: usize,
    pub r2: usize,
    pub p: f64,
    pub q: f64,
    pub q1: f64,
    pub q2: f64,
    pub s: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub kmax: Option<usize>,
    pub grid_panels: usize,
    pub space_t: Option<f64>,
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub mode: Mode,
    pub params: ParamBlock,
    pub sweep: Option<Sweep>,
    pub fit_skip: usize,
    pub rates_input: Option<PathBuf>,
    pub rates_synthetic: Option<(f64, f64)>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

fn parse_real(key: &str, v: &str) -> Result<f64> {
    let x = match v {
        "inf" | "infinity" | "Inf" => f64::INFINITY,
        _ => v
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))?,
    };
    if x.is_nan() {
        return Err(Error::Config(format!("{key}: NaN is not allowed")));
    }
    Ok(x)
}

fn parse_int<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: `{v}` is not a non-negative integer")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_real(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Parses and validates config text.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_for(text, None)
    }

    /// Parses config text for a mode chosen elsewhere; a `mode` key, if
    /// present, must agree with it.
    pub fn parse_for(text: &str, mode: Option<Mode>) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", no + 1)));
            }
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", no + 1)));
            }
        }
        Self::from_map(&kv, mode)
    }

    pub fn load(path: &Path, mode: Option<Mode>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_for(&text, mode)
    }

    fn from_map(kv: &BTreeMap<String, String>, forced: Option<Mode>) -> Result<Self> {
        let get = |k: &str| kv.get(k).map(String::as_str);
        let real = |k: &str| get(k).map(|v| parse_real(k, v)).transpose();
        let int = |k: &str| get(k).map(|v| parse_int::<usize>(k, v)).transpose();

        let mode = match (get("mode").map(str::parse::<Mode>).transpose()?, forced) {
            (Some(m), Some(f)) if m != f => {
                return Err(Error::Config(format!("config is for mode `{m}`, not `{f}`")))
            }
            (Some(m), _) | (None, Some(m)) => m,
            (None, None) => return Err(Error::Config("missing key `mode`".into())),
        };
        let field = FieldSpec {
            name: get("field.name")
                .ok_or_else(|| Error::Config("missing key `field.name`".into()))?
                .to_string(),
            params: get("field.params")
                .map(|v| parse_list("field.params", v))
                .transpose()?
                .unwrap_or_default(),
            path: get("field.path").map(PathBuf::from),
            n: int("field.n")?.unwrap_or(1),
            t_end: real("field.T")?.unwrap_or(1.0),
        };
        let params = ParamBlock {
            r: int("r")?,
            r1: int("r1")?.unwrap_or(1),
            r2: int("r2")?.unwrap_or(2),
            p: real("p")?.unwrap_or(2.0),
            q: real("q")?.unwrap_or(2.0),
            q1: real("q1")?.unwrap_or(2.0),
            q2: real("q2")?.unwrap_or(2.0),
            s: real("s")?,
            s1: real("s1")?,
            s2: real("s2")?,
            kmax: int("kmax")?,
            grid_panels: int("grid.panels")?.unwrap_or(16),
            space_t: real("space.t")?,
        };
        let sweep = match (get("sweep.start"), get("sweep.stop"), get("sweep.points")) {
            (None, None, None) => None,
            (Some(a), Some(b), Some(n)) => Some(Sweep {
                start: parse_real("sweep.start", a)?,
                stop: parse_real("sweep.stop", b)?,
                points: parse_int("sweep.points", n)?,
                scale: match get("sweep.scale").unwrap_or("log") {
                    "log" => Scale::Log,
                    "linear" => Scale::Linear,
                    other => return Err(Error::Config(format!("sweep.scale: unknown scale `{other}`"))),
                },
            }),
            _ => {
                return Err(Error::Config(
                    "sweep.start, sweep.stop and sweep.points must be given together".into(),
                ))
            }
        };
        let rates_synthetic = match get("rates.synthetic") {
            None => None,
            Some(v) => match parse_list("rates.synthetic", v)?.as_slice() {
                [c, s] => Some((*c, *s)),
                _ => return Err(Error::Config("rates.synthetic expects `c, s`".into())),
            },
        };
        let cfg = ExperimentConfig {
            field,
            mode,
            params,
            sweep,
            fit_skip: int("fit.skip")?.unwrap_or(2),
            rates_input: get("rates.input").map(PathBuf::from),
            rates_synthetic,
            out_dir: get("out.dir").map(PathBuf::from),
            seed: get("seed").map(|v| parse_int("seed", v)).transpose()?.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Order used by the single-interval modes: `r` if given, else
    /// `floor(s) + 1` when `s` is given, else 1.
    pub fn order(&self) -> usize {
        self.params
            .r
            .unwrap_or_else(|| self.params.s.map_or(1, |s| s.floor() as usize + 1))
    }

    /// Checks every constraint of the selected mode.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let p = &self.params;
        if !(self.field.t_end > 0.0) {
            return bad(format!("field.T must be positive, got {}", self.field.t_end));
        }
        if self.field.n != 1 && self.field.n != 2 {
            return bad(format!("field.n must be 1 or 2, got {}", self.field.n));
        }
        let needs_sweep = !(self.mode == Mode::Rates && self.rates_input.is_some());
        match self.sweep {
            None if needs_sweep => return bad("missing sweep (sweep.start, sweep.stop, sweep.points)".into()),
            Some(s) => {
                if s.points < 4 {
                    return bad(format!("sweep needs at least 4 points, got {}", s.points));
                }
                if !s.start.is_finite() || !s.stop.is_finite() {
                    return bad("sweep bounds must be finite".into());
                }
                if s.scale == Scale::Log && !(s.start > 0.0 && s.stop > 0.0) {
                    return bad("log sweeps need positive bounds".into());
                }
            }
            None => {}
        }
        let sweep_positive = self.sweep.map_or(true, |s| s.values().iter().all(|v| *v > 0.0));
        let order = self.order();
        if order == 0 || p.r1 == 0 {
            return bad("polynomial orders must be at least 1".into());
        }
        if !(p.p >= 1.0) && self.mode != Mode::Moduli {
            return bad(format!("p must be in [1, inf], got {}", p.p));
        }
        if !(p.p > 0.0) {
            return bad(format!("p must be in (0, inf], got {}", p.p));
        }
        if p.grid_panels == 0 {
            return bad("grid.panels must be at least 1".into());
        }
        match self.mode {
            Mode::Moduli | Mode::Jackson | Mode::Whitney | Mode::GreedyTime => {
                if !sweep_positive {
                    return bad(format!("{} sweeps must be positive", self.mode));
                }
                if matches!(self.mode, Mode::Jackson | Mode::Whitney) {
                    let top = self.sweep.map_or(0.0, |s| s.start.max(s.stop));
                    if top > self.field.t_end {
                        return bad(format!("interval length {top} exceeds field.T"));
                    }
                }
                if self.mode == Mode::Jackson && p.p.is_infinite() {
                    return bad("jackson needs finite p".into());
                }
                if self.mode == Mode::Whitney {
                    let Some(s) = p.s else {
                        return bad("whitney needs s".into());
                    };
                    let lower = (1.0 / p.q - 1.0 / p.p).max(0.0);
                    if s < lower || s >= order as f64 {
                        return bad(format!("whitney needs (1/q - 1/p)_+ <= s < r, got s = {s}, r = {order}"));
                    }
                }
            }
            Mode::Besov => {
                let Some(s) = p.s else {
                    return bad("besov needs s".into());
                };
                if !(s > 0.0) || s >= order as f64 {
                    return bad(format!("besov needs 0 < s < r, got s = {s}, r = {order}"));
                }
                if !(p.q > 0.0) {
                    return bad("besov needs q > 0".into());
                }
                if self.sweep.is_some_and(|sw| sw.values().iter().any(|v| v.round() < 4.0)) {
                    return bad("besov sweeps the dyadic depth and needs values >= 4".into());
                }
            }
            Mode::GreedySpace | Mode::GreedySt => {
                if p.r2 < 2 {
                    return bad(format!("r2 must be at least 2, got {}", p.r2));
                }
                if !sweep_positive {
                    return bad(format!("{} sweeps must be positive", self.mode));
                }
                if let Some(t) = p.space_t {
                    if !(0.0..self.field.t_end).contains(&t) {
                        return bad(format!("space.t = {t} is outside [0, T)"));
                    }
                }
                if let Some(s2) = p.s2 {
                    let n = self.field.n as f64;
                    let lower = n * (1.0 / p.q2 - 0.5).max(0.0);
                    if !(s2 > lower) {
                        return bad(format!("need s2 > n (1/q2 - 1/2)_+ = {lower}, got s2 = {s2}"));
                    }
                }
            }
            Mode::Rates => match (&self.rates_input, self.rates_synthetic) {
                (Some(_), Some(_)) => return bad("give either rates.input or rates.synthetic".into()),
                (None, None) => return bad("rates needs rates.input or rates.synthetic".into()),
                (None, Some((c, _))) if !(c > 0.0) || !sweep_positive => {
                    return bad("synthetic rates need c > 0 and a positive sweep".into())
                }
                _ => {}
            },
        }
        if self.mode != Mode::Rates {
            self.field.build().map_err(|e| match e {
                Error::Io(m) => Error::Config(m),
                other => other,
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "field.name = time-power\nfield.params = 0.25\nmode = greedy-time\n\
                        sweep.start = 0.1\nsweep.stop = 0.001\nsweep.points = 4\n";

    #[test]
    fn parses_a_minimal_config() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(c.mode, Mode::GreedyTime);
        assert_eq!(c.field.params, vec![0.25]);
        assert_eq!(c.params.p, 2.0);
        assert_eq!(c.fit_skip, 2);
        let v = c.sweep.unwrap().values();
        assert_eq!(v.len(), 4);
        assert!((v[0] - 0.1).abs() < 1e-15 && (v[3] - 0.001).abs() < 1e-15);
        assert!((v[1] - 0.1 * 0.01f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        for extra in [
            "bogus = 1\n",
            "p = x\n",
            "mode = other\n",
            "r1 = -1\n",
            "field.n = 3\n",
        ] {
            let text = format!("{BASE}{extra}");
            assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))), "{extra}");
        }
        let short = BASE.replace("sweep.points = 4", "sweep.points = 3");
        assert!(ExperimentConfig::parse(&short).is_err());
        let unknown = BASE.replace("time-power", "nope");
        assert!(ExperimentConfig::parse(&unknown).unwrap_err().is_config());
        let s2 = BASE.replace("greedy-time", "greedy-st") + "q2 = 1\ns2 = 0.4\n";
        assert!(ExperimentConfig::parse(&s2).is_err());
        let s2 = BASE.replace("greedy-time", "greedy-st") + "q2 = 1\ns2 = 0.6\n";
        assert!(ExperimentConfig::parse(&s2).is_ok());
    }

    #[test]
    fn mode_can_come_from_outside() {
        let text = BASE.replace("mode = greedy-time\n", "");
        assert!(ExperimentConfig::parse(&text).is_err());
        let c = ExperimentConfig::parse_for(&text, Some(Mode::Moduli)).unwrap();
        assert_eq!(c.mode, Mode::Moduli);
        assert!(ExperimentConfig::parse_for(BASE, Some(Mode::Moduli)).is_err());
    }

    #[test]
    fn infinite_p_and_derived_order() {
        let text = BASE.replace("greedy-time", "moduli") + "p = inf\ns = 1.5\n";
        let c = ExperimentConfig::parse(&text).unwrap();
        assert!(c.params.p.is_infinite());
        assert_eq!(c.order(), 2);
    }
}
