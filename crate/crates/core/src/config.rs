//! Plain-text `key = value` configuration shared by every experiment.
//!
//! Lines are `key = value`; `#` starts a comment; keys are unique. Lists are
//! comma separated.
//!
//! Domain keys: `shape` (`box` | `ball`), `dim`, `lower`, `upper` (one value
//! or one per axis), `center`, `radius`, `T`, `t_start`, `nx`, `nt`,
//! `time_scaling` (1 keeps `tau ~ h`, 2 keeps `tau ~ h^2` across levels).
//!
//! Exponent keys (prefix `alpha` or `beta`): `alpha = constant:0.5` or
//! `alpha = example:0.5,0.4` (`gamma`, `zeta`).
//!
//! Field specs: `constant:v`, `example` (the optimality example source with
//! the exponent's `gamma`, `zeta`), `corpus:name`, `manufactured:name`, or
//! `polynomial:c@e1,...,en,et; ...` (monomials `c x1^e1 ... xn^en t^et`).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::experiments::{test_field_corpus, ExampleParams};
use crate::exponents::VariableExponent;
use crate::geometry::{GridDomain, Shape};
use crate::norms::FieldFn;
use crate::solver::{manufactured_corpus, Coefficients};

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
    used: Mutex<BTreeSet<String>>,
}

impl Clone for Config {
    fn clone(&self) -> Self {
        Config { entries: self.entries.clone(), used: Mutex::new(self.used.lock().unwrap().clone()) }
    }
}

fn cfg_err(line: usize, detail: impl Into<String>) -> Error {
    Error::Config { line, detail: detail.into() }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| cfg_err(i + 1, format!("expected key = value, got {line:?}")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(cfg_err(i + 1, "empty key"));
            }
            if entries.insert(k.to_string(), (i + 1, v.trim().to_string())).is_some() {
                return Err(cfg_err(i + 1, format!("duplicate key {k:?}")));
            }
        }
        Ok(Config { entries, used: Mutex::new(BTreeSet::new()) })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { line: 0, detail: format!("cannot read {}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    /// All entries, sorted by key.
    pub fn entries(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|(k, (_, v))| (k.clone(), v.clone())).collect()
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    /// Keys never read so far.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.lock().unwrap();
        self.entries.keys().filter(|k| !used.contains(*k)).cloned().collect()
    }

    pub fn raw(&self, key: &str) -> Option<(usize, &str)> {
        let e = self.entries.get(key)?;
        self.used.lock().unwrap().insert(key.to_string());
        Some((e.0, e.1.as_str()))
    }

    pub fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| cfg_err(line, format!("cannot parse {key} = {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| cfg_err(0, format!("missing key {key:?}")))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).map_or(default, |e| e.1)
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => parse_list(v).map(Some).map_err(|d| cfg_err(line, format!("{key}: {d}"))),
        }
    }
}

pub fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("cannot parse list entry {s:?}")))
        .collect()
}

fn per_axis(v: Option<Vec<f64>>, n: usize, default: f64) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![default; n]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; n]),
        Some(v) if v.len() == n => Ok(v),
        Some(v) => Err(cfg_err(0, format!("expected 1 or {n} values, got {}", v.len()))),
    }
}

/// Shape and time window from the config.
pub fn shape_from_config(cfg: &Config) -> Result<(Shape, f64, f64)> {
    let n: usize = cfg.get_or("dim", 1)?;
    let shape = match cfg.str_or("shape", "box") {
        "box" => Shape::Box {
            lower: per_axis(cfg.list("lower")?, n, 0.0)?,
            upper: per_axis(cfg.list("upper")?, n, 1.0)?,
        },
        "ball" => Shape::Ball { center: per_axis(cfg.list("center")?, n, 0.0)?, radius: cfg.get_or("radius", 1.0)? },
        other => return Err(cfg_err(cfg.raw("shape").map_or(0, |e| e.0), format!("unknown shape {other:?}"))),
    };
    let t_start = cfg.get_or("t_start", 0.0)?;
    let t_end = t_start + cfg.get_or("T", 1.0)?;
    Ok((shape, t_start, t_end))
}

/// Grid at refinement level `nx`; `nt` follows `time_scaling`.
pub fn domain_at(cfg: &Config, nx: usize) -> Result<GridDomain> {
    let (shape, t0, t1) = shape_from_config(cfg)?;
    let base_nx: usize = cfg.get_or("nx", nx)?;
    let base_nt: usize = cfg.get_or("nt", base_nx - 1)?;
    let p: i32 = cfg.get_or("time_scaling", 1)?;
    let ratio = (nx as f64 - 1.0) / (base_nx as f64 - 1.0);
    let nt = ((base_nt as f64) * ratio.powi(p)).round().max(1.0) as usize;
    GridDomain::with_time_window(shape, t0, t1, nx, nt)
}

pub fn domain_from_config(cfg: &Config) -> Result<GridDomain> {
    let nx = cfg.require("nx")?;
    domain_at(cfg, nx)
}

/// Refinement levels: `levels`, else the single `nx`.
pub fn levels_from_config(cfg: &Config) -> Result<Vec<usize>> {
    let levels = match cfg.list("levels")? {
        Some(l) => l,
        None => vec![cfg.require("nx")?],
    };
    check_levels(&levels)?;
    Ok(levels)
}

pub fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(cfg_err(0, format!("levels must be strictly increasing, got {levels:?}")));
    }
    Ok(())
}

/// Exponent under `key` (`alpha` or `beta`); `default` when absent.
pub fn exponent_from_config(cfg: &Config, key: &str, default: &str) -> Result<VariableExponent> {
    let (line, spec) = cfg.raw(key).unwrap_or((0, default));
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        parse_list(args).map_err(|d| cfg_err(line, d))?
    };
    match (kind.trim(), nums.as_slice()) {
        ("constant", [v]) => VariableExponent::constant(*v),
        ("example", [g, z]) => VariableExponent::example(*g, *z),
        _ => Err(cfg_err(line, format!("unknown exponent spec {spec:?}"))),
    }
}

/// Parameters of the optimality example.
pub fn example_params(cfg: &Config) -> Result<ExampleParams> {
    let d = ExampleParams::default();
    Ok(ExampleParams {
        gamma: cfg.get_or("gamma", d.gamma)?,
        zeta: cfg.get_or("zeta", d.zeta)?,
        beta_probe: cfg.get_or("beta_probe", d.beta_probe)?,
        n_max: cfg.get_or("n_max", d.n_max)?,
    })
}

fn polynomial(spec: &str, line: usize) -> Result<FieldFn> {
    let mut terms: Vec<(f64, Vec<i32>)> = Vec::new();
    for mono in spec.split(';').map(str::trim).filter(|m| !m.is_empty()) {
        let (c, e) = mono.split_once('@').unwrap_or((mono, ""));
        let c: f64 = c.trim().parse().map_err(|_| cfg_err(line, format!("bad coefficient in {mono:?}")))?;
        let e: Vec<i32> = if e.trim().is_empty() { Vec::new() } else { parse_list(e).map_err(|d| cfg_err(line, d))? };
        terms.push((c, e));
    }
    Ok(Arc::new(move |x: &[f64], t: f64| {
        terms
            .iter()
            .map(|(c, e)| {
                let mut v = *c;
                for (k, &p) in e.iter().enumerate() {
                    let base = if k < x.len() { x[k] } else { t };
                    v *= base.powi(p);
                }
                v
            })
            .sum()
    }))
}

/// A field spec, see the module docs.
pub fn field_spec(cfg: &Config, spec: &str, line: usize) -> Result<FieldFn> {
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    match kind.trim() {
        "constant" => {
            let v: f64 = args.trim().parse().map_err(|_| cfg_err(line, format!("bad constant {args:?}")))?;
            Ok(Arc::new(move |_: &[f64], _: f64| v))
        }
        "zero" => Ok(Arc::new(|_: &[f64], _: f64| 0.0)),
        "example" => {
            let p = example_params(cfg)?;
            p.validate()?;
            Ok(p.source())
        }
        "polynomial" => polynomial(args, line),
        "corpus" => test_field_corpus()
            .into_iter()
            .find(|(n, _)| n == args.trim())
            .map(|e| e.1)
            .ok_or_else(|| cfg_err(line, format!("unknown corpus field {args:?}"))),
        "manufactured" => {
            let n = cfg.get_or("dim", 1)?;
            manufactured_corpus(n)
                .into_iter()
                .find(|m| m.name == args.trim())
                .map(|m| m.exact())
                .ok_or_else(|| cfg_err(line, format!("unknown manufactured solution {args:?}")))
        }
        other => Err(cfg_err(line, format!("unknown field kind {other:?}"))),
    }
}

/// Field under `key`, `default` spec when absent.
pub fn field_from_config(cfg: &Config, key: &str, default: &str) -> Result<FieldFn> {
    let (line, spec) = cfg.raw(key).map_or((0, default.to_string()), |(l, s)| (l, s.to_string()));
    field_spec(cfg, &spec, line)
}

/// `a` (isotropic, times the identity) overridden entrywise by `a_ij`,
/// drift `b_i`, reaction `c`.
pub fn coefficients_from_config(cfg: &Config, n: usize) -> Result<Coefficients> {
    let iso = field_from_config(cfg, "a", "constant:1")?;
    let zero: FieldFn = Arc::new(|_: &[f64], _: f64| 0.0);
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let key = format!("a_{i}{j}");
            let default = if i == j { iso.clone() } else { zero.clone() };
            a.push(if cfg.has(&key) { field_from_config(cfg, &key, "zero")? } else { default });
        }
    }
    let b = (0..n).map(|i| field_from_config(cfg, &format!("b_{i}"), "zero")).collect::<Result<_>>()?;
    Ok(Coefficients { a, b, c: field_from_config(cfg, "c", "zero")? })
}
