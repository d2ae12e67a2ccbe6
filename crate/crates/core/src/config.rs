//! Sweep configuration: a TOML file plus `key=value` overrides.
//!
//! ```toml
//! [grid]
//! T = { from = 0.01, to = 1.0, steps = 25, log = true }
//! k_so = [-5.0, -10.0]
//! eta = 0.9
//! V_A = "optimize"
//!
//! [source]
//! sigma_rel = 0.05
//!
//! [engine]
//! kind = "both"
//! ```
//!
//! Every axis accepts a number, an array, or a `{ from, to, steps, log }`
//! table. Overrides use dotted keys (`grid.eta=0.8`) or bare keys when the
//! name is unambiguous (`eta=0.8`).

use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::{Table, Value};

use crate::bogoliubov::PhaseModel;
use crate::error::{Error, Result};
use crate::overlap::EngineConfig;
use crate::qkd::Eavesdropper;
use crate::wavepackets::{DetectorProfile, Envelope, TransverseProfile, ValidityThresholds};

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["T", "events", "k_so", "a", "eta", "V_A", "beta_rec"]),
    ("source", &["shape", "sigma", "sigma_rel", "sigma_t", "k_perp"]),
    ("detector", &["k_min", "k_max", "tau_window"]),
    (
        "engine",
        &[
            "kind",
            "eve",
            "phase_model",
            "inner_tol",
            "outer_panels",
            "narrowband_max",
            "delta_min",
            "paraxial_max",
        ],
    ),
    ("output", &["dir", "prefix", "diagnostics"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Analytic,
    Numeric,
    Both,
}

impl EngineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Numeric => "numeric",
            Self::Both => "both",
        }
    }

    pub fn numeric(&self) -> bool {
        !matches!(self, Self::Analytic)
    }
}

/// Source bandwidth, fixed directly or tied to the carrier or to `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Sigma(f64),
    /// `σ/|k_so|`
    Relative(f64),
    /// `σT`
    TimesT(f64),
}

impl Bandwidth {
    pub fn sigma(&self, k_so: f64, t_inv: f64) -> f64 {
        match *self {
            Self::Sigma(s) => s,
            Self::Relative(r) => r * k_so.abs(),
            Self::TimesT(st) => st / t_inv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Modulation {
    Optimize,
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSpec {
    pub shape: Envelope,
    pub bandwidth: Option<Bandwidth>,
    pub transverse: TransverseProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSpec {
    pub kind: EngineKind,
    pub eve: Eavesdropper,
    pub overlap: EngineConfig,
    pub thresholds: ValidityThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    /// Write one JSON line of overlap diagnostics per numeric point.
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub t: Vec<f64>,
    pub k_so: Vec<f64>,
    pub a: Vec<f64>,
    pub eta: Vec<f64>,
    pub v_a: Modulation,
    pub beta_rec: Vec<f64>,
    pub source: SourceSpec,
    pub detector: DetectorProfile,
    pub engine: EngineSpec,
    pub output: OutputSpec,
    /// Merged configuration as read, echoed into the run manifest.
    pub table: Table,
}

impl SweepConfig {
    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, overrides)
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn from_overrides(overrides: &[String]) -> Result<Self> {
        Self::from_toml("", overrides)
    }

    pub fn from_table(table: Table) -> Result<Self> {
        check_keys(&table)?;
        let empty = Table::new();
        let sec = |name: &str| -> Result<&Table> {
            match table.get(name) {
                None => Ok(&empty),
                Some(Value::Table(t)) => Ok(t),
                Some(_) => Err(Error::config(name, "expected a table")),
            }
        };
        let grid = sec("grid")?;
        let source = sec("source")?;
        let detector = sec("detector")?;
        let engine = sec("engine")?;
        let output = sec("output")?;

        let t = match (grid.get("T"), grid.get("events")) {
            (Some(_), Some(_)) => return Err(Error::config("grid.events", "give either T or events, not both")),
            (Some(v), None) => axis(v, "grid.T")?,
            (None, Some(v)) => events(v)?,
            (None, None) => return Err(Error::config("grid.T", "missing")),
        };
        let k_so = match grid.get("k_so") {
            Some(v) => axis(v, "grid.k_so")?,
            None => return Err(Error::config("grid.k_so", "missing")),
        };
        if let Some(k) = k_so.iter().find(|k| !(**k < 0.0)) {
            return Err(Error::config(
                "grid.k_so",
                format!("{k} is not a left-moving carrier (k_so < 0)"),
            ));
        }
        let a = opt_axis(grid, "a", 1.0)?;
        if a.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::config("grid.a", "acceleration must be positive"));
        }
        let eta = opt_axis(grid, "eta", 1.0)?;
        if eta.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::config("grid.eta", "efficiency must lie in (0, 1]"));
        }
        let beta_rec = opt_axis(grid, "beta_rec", 1.0)?;
        if beta_rec.iter().any(|b| !(*b > 0.0 && *b <= 1.0)) {
            return Err(Error::config("grid.beta_rec", "must lie in (0, 1]"));
        }
        let v_a = match grid.get("V_A") {
            None => Modulation::Optimize,
            Some(Value::String(s)) if s == "optimize" => Modulation::Optimize,
            Some(v) => {
                let vals = axis(v, "grid.V_A")?;
                if vals.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::config("grid.V_A", "modulation variance must be positive"));
                }
                Modulation::Values(vals)
            }
        };

        let shape = match source.get("shape") {
            None => Envelope::Gaussian,
            Some(v) => match str_of(v, "source.shape")? {
                "gaussian" => Envelope::Gaussian,
                "sech" => Envelope::Sech,
                s => return Err(Error::config("source.shape", format!("unknown envelope `{s}`"))),
            },
        };
        let widths: Vec<Bandwidth> = [
            ("sigma", Bandwidth::Sigma as fn(f64) -> Bandwidth),
            ("sigma_rel", Bandwidth::Relative),
            ("sigma_t", Bandwidth::TimesT),
        ]
        .into_iter()
        .filter_map(|(k, f)| source.get(k).map(|v| (k, v, f)))
        .map(|(k, v, f)| positive(v, &format!("source.{k}")).map(f))
        .collect::<Result<_>>()?;
        if widths.len() > 1 {
            return Err(Error::config(
                "source.sigma",
                "give only one of sigma, sigma_rel, sigma_t",
            ));
        }
        let transverse = match source.get("k_perp") {
            Some(v) => TransverseProfile {
                k_perp: positive(v, "source.k_perp")?,
            },
            None => TransverseProfile::default(),
        };

        let mut det = DetectorProfile {
            transverse,
            ..DetectorProfile::default()
        };
        if let Some(v) = detector.get("k_min") {
            det.k_min = positive(v, "detector.k_min")?;
        }
        if let Some(v) = detector.get("k_max") {
            det.k_max = Some(positive(v, "detector.k_max")?);
        }
        if let Some(v) = detector.get("tau_window") {
            det.tau_window = Some(positive(v, "detector.tau_window")?);
        }
        det.validate().map_err(|e| Error::config("detector", e.to_string()))?;

        let kind = match engine.get("kind") {
            None => EngineKind::Analytic,
            Some(v) => match str_of(v, "engine.kind")? {
                "analytic" => EngineKind::Analytic,
                "numeric" => EngineKind::Numeric,
                "both" => EngineKind::Both,
                s => return Err(Error::config("engine.kind", format!("unknown engine `{s}`"))),
            },
        };
        if kind.numeric() && widths.is_empty() {
            return Err(Error::config(
                "source.sigma",
                "numeric engine needs the source bandwidth (sigma, sigma_rel or sigma_t)",
            ));
        }
        let eve = match engine.get("eve") {
            None => Eavesdropper::default(),
            Some(v) => str_of(v, "engine.eve")?
                .parse()
                .map_err(|e: String| Error::config("engine.eve", e))?,
        };
        let mut overlap = EngineConfig::default();
        if let Some(v) = engine.get("phase_model") {
            overlap.phase_model = match str_of(v, "engine.phase_model")? {
                "exact" => PhaseModel::Exact,
                "approximated" => PhaseModel::Approximated,
                s => {
                    return Err(Error::config(
                        "engine.phase_model",
                        format!("unknown phase model `{s}`"),
                    ))
                }
            };
        }
        if let Some(v) = engine.get("inner_tol") {
            overlap.inner_tol = positive(v, "engine.inner_tol")?;
        }
        if let Some(v) = engine.get("outer_panels") {
            let n = positive(v, "engine.outer_panels")?;
            if n.fract() != 0.0 || n < 4.0 {
                return Err(Error::config("engine.outer_panels", "must be an integer ≥ 4"));
            }
            overlap.outer_panels = n as usize;
        }
        let mut thresholds = ValidityThresholds::default();
        for (key, slot) in [
            ("narrowband_max", &mut thresholds.narrowband_max),
            ("delta_min", &mut thresholds.delta_min),
            ("paraxial_max", &mut thresholds.paraxial_max),
        ] {
            if let Some(v) = engine.get(key) {
                *slot = positive(v, &format!("engine.{key}"))?;
            }
        }

        let out = OutputSpec {
            dir: match output.get("dir") {
                Some(v) => PathBuf::from(str_of(v, "output.dir")?),
                None => PathBuf::from("."),
            },
            prefix: match output.get("prefix") {
                Some(v) => str_of(v, "output.prefix")?.to_string(),
                None => "sweep".into(),
            },
            diagnostics: match output.get("diagnostics") {
                Some(Value::Boolean(b)) => *b,
                Some(_) => return Err(Error::config("output.diagnostics", "expected true or false")),
                None => false,
            },
        };
        if out.prefix.is_empty() || out.prefix.contains(['/', '\\']) {
            return Err(Error::config("output.prefix", "must be a plain file stem"));
        }

        Ok(Self {
            t,
            k_so,
            a,
            eta,
            v_a,
            beta_rec,
            source: SourceSpec {
                shape,
                bandwidth: widths.first().copied(),
                transverse,
            },
            detector: det,
            engine: EngineSpec {
                kind,
                eve,
                overlap,
                thresholds,
            },
            output: out,
            table,
        })
    }

    pub fn points(&self) -> usize {
        let v = match &self.v_a {
            Modulation::Optimize => 1,
            Modulation::Values(v) => v.len(),
        };
        self.t.len() * self.k_so.len() * self.a.len() * self.eta.len() * v * self.beta_rec.len()
    }

    /// Every configuration key in dotted form, sorted.
    pub fn keys(&self) -> Vec<String> {
        let mut keys = Vec::new();
        for (sec, v) in &self.table {
            if let Value::Table(t) = v {
                keys.extend(t.keys().map(|k| format!("{sec}.{k}")));
            }
        }
        keys.sort();
        keys
    }
}

fn check_keys(table: &Table) -> Result<()> {
    for (sec, v) in table {
        let Some((_, allowed)) = SECTIONS.iter().find(|(s, _)| s == sec) else {
            return Err(Error::config(sec.clone(), "unknown section"));
        };
        let Value::Table(t) = v else {
            return Err(Error::config(sec.clone(), "expected a table"));
        };
        if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::config(format!("{sec}.{k}"), "unknown key"));
        }
    }
    Ok(())
}

/// Applies `key=value`; the value is read as a TOML literal, falling back to a string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must look like key=value"))?;
    let key = key.trim();
    let (section, name) = match key.split_once('.') {
        Some((s, n)) => (s.to_string(), n.to_string()),
        None => {
            let owner = SECTIONS
                .iter()
                .find(|(_, keys)| keys.contains(&key))
                .ok_or_else(|| Error::config(key, "unknown key"))?;
            (owner.0.to_string(), key.to_string())
        }
    };
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let sec = table
        .entry(section.clone())
        .or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(sec) = sec else {
        return Err(Error::config(section, "expected a table"));
    };
    sec.insert(name, value);
    Ok(())
}

fn num(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::config(key, format!("expected a number, got `{v}`"))),
    }
}

fn positive(v: &Value, key: &str) -> Result<f64> {
    let x = num(v, key)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::config(key, format!("must be positive, got {x}")));
    }
    Ok(x)
}

fn str_of<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(key, format!("expected a string, got `{v}`")))
}

fn opt_axis(grid: &Table, name: &str, default: f64) -> Result<Vec<f64>> {
    match grid.get(name) {
        Some(v) => axis(v, &format!("grid.{name}")),
        None => Ok(vec![default]),
    }
}

/// Number, array, or `{ from, to, steps, log }`.
pub fn axis(v: &Value, key: &str) -> Result<Vec<f64>> {
    let vals = match v {
        Value::Float(_) | Value::Integer(_) => vec![num(v, key)?],
        Value::Array(a) => a.iter().map(|x| num(x, key)).collect::<Result<_>>()?,
        Value::Table(t) => {
            let get = |k: &str| {
                t.get(k)
                    .ok_or_else(|| Error::config(format!("{key}.{k}"), "missing"))
                    .and_then(|v| num(v, &format!("{key}.{k}")))
            };
            let (from, to) = (get("from")?, get("to")?);
            let steps = get("steps")?;
            if steps.fract() != 0.0 || steps < 1.0 {
                return Err(Error::config(format!("{key}.steps"), "must be a positive integer"));
            }
            let steps = steps as usize;
            let log = match t.get("log") {
                None => false,
                Some(Value::Boolean(b)) => *b,
                Some(_) => return Err(Error::config(format!("{key}.log"), "expected true or false")),
            };
            if let Some(extra) = t.keys().find(|k| !["from", "to", "steps", "log"].contains(&k.as_str())) {
                return Err(Error::config(format!("{key}.{extra}"), "unknown key"));
            }
            if log && !(from > 0.0 && to > 0.0 || from < 0.0 && to < 0.0) {
                return Err(Error::config(key, "log range needs endpoints of one sign"));
            }
            linspace(from, to, steps, log)
        }
        _ => {
            return Err(Error::config(
                key,
                format!("expected a number, array or range table, got `{v}`"),
            ))
        }
    };
    if vals.is_empty() {
        return Err(Error::config(key, "empty range"));
    }
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(key, "non-finite value"));
    }
    Ok(vals)
}

fn linspace(from: f64, to: f64, steps: usize, log: bool) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    let frac = |i: usize| i as f64 / (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i == 0 {
                from
            } else if i == steps - 1 {
                to
            } else if log {
                from.signum() * (from.abs().ln() + (to.abs() / from.abs()).ln() * frac(i)).exp()
            } else {
                from + (to - from) * frac(i)
            }
        })
        .collect()
}

fn events(v: &Value) -> Result<Vec<f64>> {
    let Value::Array(list) = v else {
        return Err(Error::config("grid.events", "expected an array of { x, t } tables"));
    };
    let out: Vec<f64> = list
        .iter()
        .map(|e| {
            let t = e
                .as_table()
                .ok_or_else(|| Error::config("grid.events", "expected { x, t }"))?;
            let get = |k: &str| {
                t.get(k)
                    .ok_or_else(|| Error::config(format!("grid.events.{k}"), "missing"))
                    .and_then(|v| num(v, "grid.events"))
            };
            Ok(get("x")? + get("t")?)
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::config("grid.events", "empty range"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[grid]
T = { from = 0.1, to = 1.0, steps = 4 }
k_so = [-5, -10.0]
eta = 0.9
"#;

    #[test]
    fn parses_ranges() {
        let c = SweepConfig::from_toml(BASIC, &[]).unwrap();
        assert_eq!(c.t.len(), 4);
        assert!((c.t[1] - 0.4).abs() < 1e-15);
        assert_eq!(c.t[3], 1.0);
        assert_eq!(c.k_so, vec![-5.0, -10.0]);
        assert_eq!(c.v_a, Modulation::Optimize);
        assert_eq!(c.points(), 8);
    }

    #[test]
    fn log_range_hits_endpoints() {
        let v: Table = "r = { from = 0.01, to = 100, steps = 5, log = true }".parse().unwrap();
        let x = axis(&v["r"], "r").unwrap();
        assert_eq!(x[0], 0.01);
        assert_eq!(x[4], 100.0);
        assert!((x[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overrides_replace_values() {
        let c = SweepConfig::from_toml(BASIC, &["eta=0.5".into(), "grid.V_A=[1, 10]".into()]).unwrap();
        assert_eq!(c.eta, vec![0.5]);
        assert_eq!(c.v_a, Modulation::Values(vec![1.0, 10.0]));
        let c = SweepConfig::from_toml(BASIC, &["output.prefix=run1".into()]).unwrap();
        assert_eq!(c.output.prefix, "run1");
    }

    #[test]
    fn errors_name_the_key() {
        let bad = |text: &str, ov: &[&str]| -> String {
            let ov: Vec<String> = ov.iter().map(|s| s.to_string()).collect();
            match SweepConfig::from_toml(text, &ov).unwrap_err() {
                Error::Config { key, .. } => key,
                e => panic!("{e}"),
            }
        };
        assert_eq!(bad(BASIC, &["eta=1.5"]), "grid.eta");
        assert_eq!(bad(BASIC, &["grid.bogus=1"]), "grid.bogus");
        assert_eq!(bad(BASIC, &["engine.kind=numeric"]), "source.sigma");
        assert_eq!(bad(BASIC, &["k_so=[]"]), "grid.k_so");
        assert_eq!(bad("[grid]\nk_so = -1", &[]), "grid.T");
        assert_eq!(bad(BASIC, &["nonsense"]), "nonsense");
    }

    #[test]
    fn events_map_to_invariants() {
        let c = SweepConfig::from_toml("[grid]\nk_so = -1\nevents = [{ x = 1.0, t = -0.25 }]", &[]).unwrap();
        assert_eq!(c.t, vec![0.75]);
    }

    #[test]
    fn bandwidth_forms() {
        let c = SweepConfig::from_toml(BASIC, &["sigma_t=10".into(), "kind=both".into()]).unwrap();
        assert_eq!(c.source.bandwidth, Some(Bandwidth::TimesT(10.0)));
        assert_eq!(Bandwidth::TimesT(10.0).sigma(-5.0, 0.5), 20.0);
        assert_eq!(Bandwidth::Relative(0.05).sigma(-20.0, 0.5), 1.0);
    }
}
