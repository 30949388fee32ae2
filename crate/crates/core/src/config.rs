//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! A = [[-1, -4], [4, -1]]
//! x_c = [10, -5]
//! period = 0.1
//! input = sinusoid 0.5 1 0
//! disturbance = uniform 0.05
//! ```
//!
//! Matrices are bracketed row-major lists of rows. Keys may appear once.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::observer::ObserverCertificate;
use crate::plant::{BoundsConfig, PlantModel};
use crate::quantizer::QuantizerConfig;
use crate::schemes::SchemeKind;
use crate::signals::{DisturbanceSignal, InputSignal, SignalSpec, Table};
use crate::sim::Experiment;

/// The reference configuration shipped with the crate.
pub const REFERENCE_CFG: &str = include_str!("../configs/paper.cfg");

const KEYS: &[&str] = &[
    "A",
    "B",
    "E",
    "H",
    "x_c",
    "x_b",
    "u_b",
    "d_b",
    "x0",
    "P",
    "Q",
    "nu1",
    "nu2",
    "levels",
    "bits",
    "period",
    "horizon",
    "dt",
    "scheme",
    "seeds",
    "input",
    "disturbance",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub signals: SignalSpec,
    /// Channel bits per transmission, when given instead of or with `levels`.
    pub bits: Option<u32>,
    pub schemes: Vec<SchemeKind>,
    pub horizon: f64,
    pub dt: f64,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    entries: HashMap<String, Entry>,
}

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

impl Fields {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    fn scalar(&self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        parse_scalar(&e.value).map_err(|m| parse_err(e.line, key, m))
    }

    fn scalar_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(e) => parse_scalar(&e.value).map_err(|m| parse_err(e.line, key, m)),
            None => Ok(default),
        }
    }

    fn vector(&self, key: &str) -> Result<Vector> {
        let e = self.require(key)?;
        parse_list(&e.value)
            .map(Vector::new)
            .map_err(|m| parse_err(e.line, key, m))
    }

    fn matrix(&self, key: &str) -> Result<Matrix> {
        let e = self.require(key)?;
        parse_matrix(&e.value).map_err(|m| parse_err(e.line, key, m))
    }

    fn uint(&self, key: &str) -> Result<Option<u32>> {
        self.get(key)
            .map(|e| {
                e.value
                    .trim()
                    .parse::<u32>()
                    .map_err(|err| parse_err(e.line, key, err.to_string()))
            })
            .transpose()
    }

    /// Wraps a cross-field validation failure with the line of `key`.
    fn at<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|err| match self.get(key) {
            Some(e) => parse_err(e.line, key, err.to_string()),
            None => err,
        })
    }
}

fn parse_scalar(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn strip_brackets(s: &str) -> std::result::Result<&str, String> {
    let s = s.trim();
    s.strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected a bracketed list, found `{s}`"))
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let inner = strip_brackets(s)?;
    if inner.contains('[') || inner.contains(']') {
        return Err("unexpected nested brackets".into());
    }
    if inner.trim().is_empty() {
        return Err("empty list".into());
    }
    inner.split(',').map(parse_scalar).collect()
}

fn parse_matrix(s: &str) -> std::result::Result<Matrix, String> {
    let inner = strip_brackets(s)?;
    let mut rows = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        if !rest.starts_with('[') {
            return Err(format!("row {} must start with `[`", rows.len() + 1));
        }
        let close = rest
            .find(']')
            .ok_or_else(|| format!("row {} is not closed", rows.len() + 1))?;
        let row =
            parse_list(&rest[..=close]).map_err(|m| format!("row {}: {m}", rows.len() + 1))?;
        rows.push(row);
        rest = rest[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing comma".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` after row {}", rows.len()));
        }
    }
    if rows.is_empty() {
        return Err("matrix has no rows".into());
    }
    let width = rows[0].len();
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(format!(
            "row {} has {} entries, expected {width}",
            i + 1,
            rows[i].len()
        ));
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

fn parse_table(s: &str) -> std::result::Result<Table, String> {
    let m = parse_matrix(s)?;
    if m.cols() < 2 {
        return Err("table rows need a time and at least one value".into());
    }
    let times = (0..m.rows()).map(|i| m[(i, 0)]).collect();
    let values = (0..m.rows())
        .map(|i| Vector::from(&m.row(i)[1..]))
        .collect();
    Table::new(times, values).map_err(|e| e.to_string())
}

fn words(s: &str) -> (&str, &str) {
    let s = s.trim();
    match s.split_once(char::is_whitespace) {
        Some((head, rest)) => (head, rest.trim()),
        None => (s, ""),
    }
}

fn parse_input(s: &str) -> std::result::Result<InputSignal, String> {
    match words(s) {
        ("zero", "") => Ok(InputSignal::Zero),
        ("sinusoid", rest) => {
            let v: Vec<f64> = rest
                .split_whitespace()
                .map(parse_scalar)
                .collect::<std::result::Result<_, _>>()?;
            match v[..] {
                [amplitude, frequency, phase] => Ok(InputSignal::Sinusoid {
                    amplitude,
                    frequency,
                    phase,
                }),
                _ => Err("sinusoid takes amplitude, frequency and phase".into()),
            }
        }
        ("table", rest) => parse_table(rest).map(InputSignal::Table),
        _ => Err(format!("unknown input `{}`", s.trim())),
    }
}

fn parse_disturbance(s: &str) -> std::result::Result<DisturbanceSignal, String> {
    match words(s) {
        ("zero", "") => Ok(DisturbanceSignal::Zero),
        ("uniform", rest) => {
            let v: Vec<f64> = rest
                .split_whitespace()
                .map(parse_scalar)
                .collect::<std::result::Result<_, _>>()?;
            match v[..] {
                [bound] => Ok(DisturbanceSignal::Uniform { bound, hold: None }),
                [bound, hold] => Ok(DisturbanceSignal::Uniform {
                    bound,
                    hold: Some(hold),
                }),
                _ => Err("uniform takes a bound and an optional hold time".into()),
            }
        }
        ("table", rest) => parse_table(rest).map(DisturbanceSignal::Table),
        _ => Err(format!("unknown disturbance `{}`", s.trim())),
    }
}

pub fn parse_schemes(s: &str) -> Result<Vec<SchemeKind>> {
    match s.trim() {
        "both" => Ok(SchemeKind::ALL.to_vec()),
        other => Ok(vec![other.parse()?]),
    }
}

fn parse_seeds(s: &str) -> std::result::Result<Vec<u64>, String> {
    let inner = strip_brackets(s)?;
    let seeds: Vec<u64> = inner
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<u64>()
                .map_err(|_| format!("`{}` is not a seed", w.trim()))
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok(seeds)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| parse_err(line, content, "expected `key = value`"))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(parse_err(line, key, "unknown key"));
            }
            if let Some(prev) = entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            ) {
                return Err(parse_err(
                    line,
                    key,
                    format!("duplicate key, first set on line {}", prev.line),
                ));
            }
        }
        let f = Fields { entries };

        let plant = f.at(
            "A",
            PlantModel::new(
                f.matrix("A")?,
                f.matrix("B")?,
                f.matrix("E")?,
                f.matrix("H")?,
            ),
        )?;
        let n = plant.state_dim();
        let bounds = f.at(
            "x_c",
            BoundsConfig::new(
                f.vector("x_c")?,
                f.scalar("x_b")?,
                f.scalar("u_b")?,
                f.scalar("d_b")?,
            ),
        )?;
        if bounds.x_c.dim() != n {
            return Err(parse_err(
                f.require("x_c")?.line,
                "x_c",
                format!("expected {n} entries"),
            ));
        }
        let x0 = match f.get("x0") {
            Some(_) => f.vector("x0")?,
            None => bounds.x_c.clone(),
        };
        if x0.dim() != n {
            return Err(parse_err(
                f.require("x0")?.line,
                "x0",
                format!("expected {n} entries"),
            ));
        }
        let p = f.matrix("P")?;
        if p.rows() != n || p.cols() != n {
            return Err(parse_err(
                f.require("P")?.line,
                "P",
                format!("expected {n}x{n}"),
            ));
        }
        let q = f.matrix("Q")?;
        if q.rows() != n || q.cols() != plant.output_dim() {
            return Err(parse_err(
                f.require("Q")?.line,
                "Q",
                format!("expected {n}x{}", plant.output_dim()),
            ));
        }
        let cert = f.at(
            "P",
            ObserverCertificate::new(p, q, f.scalar("nu1")?, f.scalar("nu2")?),
        )?;

        let bits = f.uint("bits")?;
        let quantizer = match (f.uint("levels")?, bits) {
            (Some(levels), bits) => {
                let q = f.at("levels", QuantizerConfig::from_levels(n, levels))?;
                if let Some(b) = bits {
                    let from_bits = f.at("bits", QuantizerConfig::from_bits(n, b))?;
                    if from_bits != q {
                        return Err(parse_err(
                            f.require("bits")?.line,
                            "bits",
                            format!(
                                "{b} bits give {} levels, but levels = {levels}",
                                from_bits.levels()
                            ),
                        ));
                    }
                }
                q
            }
            (None, Some(b)) => f.at("bits", QuantizerConfig::from_bits(n, b))?,
            (None, None) => {
                return Err(Error::Config(
                    "one of `levels` or `bits` is required".into(),
                ))
            }
        };

        let period = f.scalar("period")?;
        if !(period > 0.0) {
            return Err(parse_err(
                f.require("period")?.line,
                "period",
                "must be positive",
            ));
        }
        let horizon = f.scalar("horizon")?;
        let dt = f.scalar_or("dt", 1e-3)?;
        for (key, v) in [("horizon", horizon), ("dt", dt)] {
            if !(v > 0.0) {
                return Err(parse_err(
                    f.get(key).map_or(0, |e| e.line),
                    key,
                    "must be positive",
                ));
            }
        }
        let schemes = match f.get("scheme") {
            Some(e) => f.at("scheme", parse_schemes(&e.value))?,
            None => SchemeKind::ALL.to_vec(),
        };
        let seeds = match f.get("seeds") {
            Some(e) => parse_seeds(&e.value).map_err(|m| parse_err(e.line, "seeds", m))?,
            None => vec![0],
        };
        let input = match f.get("input") {
            Some(e) => parse_input(&e.value).map_err(|m| parse_err(e.line, "input", m))?,
            None => InputSignal::Zero,
        };
        let disturbance = match f.get("disturbance") {
            Some(e) => {
                parse_disturbance(&e.value).map_err(|m| parse_err(e.line, "disturbance", m))?
            }
            None => DisturbanceSignal::Zero,
        };
        let signals = SignalSpec { input, disturbance };
        f.at(
            "input",
            signals.check_dims(plant.input_dim(), plant.disturbance_dim()),
        )?;
        let out_dir = PathBuf::from(f.get("out_dir").map_or("out", |e| e.value.as_str()));

        Ok(Self {
            experiment: Experiment {
                plant,
                bounds,
                cert,
                quantizer,
                period,
                x0,
            },
            signals,
            bits,
            schemes,
            horizon,
            dt,
            seeds,
            out_dir,
        })
    }

    pub fn reference() -> Self {
        Self::parse(REFERENCE_CFG).expect("bundled configuration parses")
    }

    /// Canonical text; `parse(emit())` reproduces `self`.
    pub fn emit(&self) -> String {
        let e = &self.experiment;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("A", fmt_matrix(&e.plant.a));
        kv("B", fmt_matrix(&e.plant.b));
        kv("E", fmt_matrix(&e.plant.e));
        kv("H", fmt_matrix(&e.plant.h));
        kv("x_c", fmt_list(&e.bounds.x_c));
        kv("x_b", e.bounds.x_b.to_string());
        kv("u_b", e.bounds.u_b.to_string());
        kv("d_b", e.bounds.d_b.to_string());
        kv("x0", fmt_list(&e.x0));
        kv("P", fmt_matrix(&e.cert.p));
        kv("Q", fmt_matrix(&e.cert.q));
        kv("nu1", e.cert.nu1.to_string());
        kv("nu2", e.cert.nu2.to_string());
        kv("levels", e.quantizer.levels().to_string());
        if let Some(b) = self.bits {
            kv("bits", b.to_string());
        }
        kv("period", e.period.to_string());
        kv("horizon", self.horizon.to_string());
        kv("dt", self.dt.to_string());
        kv(
            "scheme",
            if self.schemes == SchemeKind::ALL {
                "both".to_string()
            } else {
                self.schemes[0].to_string()
            },
        );
        kv(
            "seeds",
            format!(
                "[{}]",
                self.seeds
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
        kv("input", fmt_input(&self.signals.input));
        kv("disturbance", fmt_disturbance(&self.signals.disturbance));
        kv("out_dir", self.out_dir.display().to_string());
        s
    }
}

fn fmt_list(v: &[f64]) -> String {
    format!(
        "[{}]",
        v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
    )
}

fn fmt_matrix(m: &Matrix) -> String {
    format!(
        "[{}]",
        (0..m.rows())
            .map(|i| fmt_list(m.row(i)))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn fmt_table(t: &Table) -> String {
    let rows: Vec<String> = t
        .times()
        .iter()
        .zip(t.values())
        .map(|(time, v)| {
            let mut row = vec![*time];
            row.extend_from_slice(v);
            fmt_list(&row)
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn fmt_input(u: &InputSignal) -> String {
    match u {
        InputSignal::Zero => "zero".into(),
        InputSignal::Sinusoid {
            amplitude,
            frequency,
            phase,
        } => format!("sinusoid {amplitude} {frequency} {phase}"),
        InputSignal::Table(t) => format!("table {}", fmt_table(t)),
    }
}

fn fmt_disturbance(d: &DisturbanceSignal) -> String {
    match d {
        DisturbanceSignal::Zero => "zero".into(),
        DisturbanceSignal::Uniform { bound, hold: None } => format!("uniform {bound}"),
        DisturbanceSignal::Uniform {
            bound,
            hold: Some(h),
        } => format!("uniform {bound} {h}"),
        DisturbanceSignal::Table(t) => format!("table {}", fmt_table(t)),
    }
}
