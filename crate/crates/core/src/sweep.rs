//! Grid sweeps over `(T, k_so, a, η, V_A, β)` and their file outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{gain_from_kappa, kappa};
use crate::config::{EngineKind, Modulation, SweepConfig};
use crate::error::{Error, Result};
use crate::kinematics::{reception_proper_time, EmissionEvent};
use crate::overlap::{OverlapEngine, OverlapResult};
use crate::qkd::{key_rate, optimize_modulation, KeyRateResult, QkdParams};
use crate::wavepackets::{validity_report, SourceProfile, TransverseProfile};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "RELQKD_WORKERS";

/// Largest `κ` handed to the key-rate engine; beyond it `G = 1` in f64.
const KAPPA_CAP: f64 = 700.0;

pub const CSV_HEADER: [&str; 20] = [
    "T",
    "k_so",
    "a",
    "tau_R",
    "kappa",
    "G",
    "V",
    "eta",
    "V_A",
    "beta_rec",
    "I_AB",
    "chi_BE",
    "K",
    "engine",
    "G_numeric",
    "V_numeric",
    "K_numeric",
    "discrepancy",
    "validity",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// `T ≤ 0`: the pulse never reaches the receiver.
    Horizon,
    /// The overlap engine failed; the analytic columns are still filled.
    NumericFailed,
}

impl RowStatus {
    fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Horizon => "horizon",
            Self::NumericFailed => "numeric_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub k_so: f64,
    pub a: f64,
    #[serde(rename = "tau_R")]
    pub tau_r: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "G")]
    pub gain: Option<f64>,
    #[serde(rename = "V")]
    pub variance: Option<f64>,
    pub eta: f64,
    /// Requested or optimised modulation; empty when no key exists.
    #[serde(rename = "V_A")]
    pub v_a: Option<f64>,
    pub beta_rec: f64,
    #[serde(rename = "I_AB")]
    pub i_ab: Option<f64>,
    #[serde(rename = "chi_BE")]
    pub chi_be: Option<f64>,
    #[serde(rename = "K")]
    pub key_rate: Option<f64>,
    pub engine: String,
    #[serde(rename = "G_numeric")]
    pub gain_numeric: Option<f64>,
    #[serde(rename = "V_numeric")]
    pub variance_numeric: Option<f64>,
    #[serde(rename = "K_numeric")]
    pub key_rate_numeric: Option<f64>,
    pub discrepancy: Option<f64>,
    pub validity: String,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub row: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub k_so: f64,
    pub overlap: Option<OverlapResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl SweepTable {
    pub fn failed(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::NumericFailed)
            .count()
    }
}

/// Worker count from [`WORKERS_ENV`], defaulting to the available parallelism.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::config(
                WORKERS_ENV,
                format!("expected a positive integer, got `{s}`"),
            )),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    t: f64,
    k_so: f64,
    a: f64,
    eta: f64,
    v_a: Option<f64>,
    beta_rec: f64,
}

fn grid(cfg: &SweepConfig) -> Vec<GridPoint> {
    let v_as: Vec<Option<f64>> = match &cfg.v_a {
        Modulation::Optimize => vec![None],
        Modulation::Values(v) => v.iter().copied().map(Some).collect(),
    };
    let mut pts = Vec::with_capacity(cfg.points());
    for &t in &cfg.t {
        for &k_so in &cfg.k_so {
            for &a in &cfg.a {
                for &eta in &cfg.eta {
                    for &v_a in &v_as {
                        for &beta_rec in &cfg.beta_rec {
                            pts.push(GridPoint {
                                t,
                                k_so,
                                a,
                                eta,
                                v_a,
                                beta_rec,
                            });
                        }
                    }
                }
            }
        }
    }
    pts
}

fn rate_at(cfg: &SweepConfig, p: &GridPoint, kap: f64) -> Result<KeyRateResult> {
    let params = QkdParams::new(kap.min(KAPPA_CAP), p.eta, p.beta_rec).with_eve(cfg.engine.eve);
    match p.v_a {
        Some(v) => key_rate(&params, v),
        None => Ok(optimize_modulation(&params)?.result),
    }
}

/// `κ` of an ideal amplifier with gain `g`.
fn kappa_of_gain(g: f64) -> f64 {
    if g <= 1.0 {
        KAPPA_CAP
    } else {
        -(-1.0 / g).ln_1p()
    }
}

/// Overlap outcome shared by every row with the same `(T, k_so)`; failures
/// that mark a row `numeric_failed` are kept as messages.
type OverlapOutcome = std::result::Result<OverlapResult, String>;

fn source_at(cfg: &SweepConfig, t: f64, k_so: f64) -> Result<Option<SourceProfile>> {
    let Some(bw) = cfg.source.bandwidth else {
        return Ok(None);
    };
    let src = SourceProfile::new(
        k_so,
        bw.sigma(k_so, t),
        cfg.source.shape,
        TransverseProfile {
            k_perp: cfg.source.transverse.k_perp,
        },
        EmissionEvent::from_invariant(t),
    )?;
    Ok(Some(src))
}

fn overlap_at(cfg: &SweepConfig, t: f64, k_so: f64) -> Result<Option<OverlapOutcome>> {
    if !(t > 0.0) || !cfg.engine.kind.numeric() {
        return Ok(None);
    }
    let Some(src) = source_at(cfg, t, k_so)? else {
        return Ok(None);
    };
    match OverlapEngine::new(src, cfg.detector, t, cfg.engine.overlap).and_then(|e| e.evaluate()) {
        Ok(r) => Ok(Some(Ok(r))),
        Err(e @ (Error::NonConvergence { .. } | Error::Unphysical(_))) => Ok(Some(Err(e.to_string()))),
        Err(e) => Err(e),
    }
}

fn evaluate(
    cfg: &SweepConfig,
    idx: usize,
    p: &GridPoint,
    overlap: Option<&OverlapOutcome>,
) -> Result<(SweepRow, Option<PointDiagnostics>)> {
    let kind = cfg.engine.kind;
    let mut row = SweepRow {
        t: p.t,
        k_so: p.k_so,
        a: p.a,
        tau_r: None,
        kappa: None,
        gain: None,
        variance: None,
        eta: p.eta,
        v_a: p.v_a,
        beta_rec: p.beta_rec,
        i_ab: None,
        chi_be: None,
        key_rate: None,
        engine: kind.as_str().to_string(),
        gain_numeric: None,
        variance_numeric: None,
        key_rate_numeric: None,
        discrepancy: None,
        validity: String::new(),
        status: RowStatus::Ok,
    };
    if !(p.t > 0.0) {
        row.status = RowStatus::Horizon;
        return Ok((row, None));
    }
    row.tau_r = Some(reception_proper_time(p.t, p.a)?);
    let kap = kappa(p.k_so, p.t)?;
    let gain = gain_from_kappa(kap)?;
    row.kappa = Some(kap);

    let fill = |row: &mut SweepRow, r: &KeyRateResult| {
        row.i_ab = Some(r.i_ab);
        row.chi_be = Some(r.chi_be);
        row.key_rate = Some(r.key_rate);
        if p.v_a.is_none() {
            row.v_a = (r.key_rate > 0.0).then_some(r.v_a_used);
        }
    };

    let analytic = if kind != EngineKind::Numeric {
        let r = rate_at(cfg, p, kap)?;
        row.gain = Some(gain);
        row.variance = Some(p.eta * (2.0 * gain - 1.0) + 1.0 - p.eta);
        fill(&mut row, &r);
        Some(r)
    } else {
        None
    };

    let mut diag = None;
    if let Some(src) = source_at(cfg, p.t, p.k_so)? {
        row.validity = validity_report(&src, &cfg.detector, p.t, &cfg.engine.thresholds).flags();
    }
    match overlap {
        Some(Ok(res)) => {
            let g_num = res.mean_ratio * res.mean_ratio;
            row.gain_numeric = Some(g_num);
            row.variance_numeric = Some(p.eta * res.variance_ratio + 1.0 - p.eta);
            let r = rate_at(cfg, p, kappa_of_gain(g_num))?;
            row.key_rate_numeric = Some(r.key_rate);
            match &analytic {
                Some(a) => {
                    let scale = a.key_rate.abs().max(1e-12);
                    row.discrepancy = Some((r.key_rate - a.key_rate).abs() / scale);
                }
                None => fill(&mut row, &r),
            }
            diag = Some(PointDiagnostics {
                row: idx,
                t: p.t,
                k_so: p.k_so,
                overlap: Some(*res),
                error: None,
            });
        }
        Some(Err(msg)) => {
            row.status = RowStatus::NumericFailed;
            diag = Some(PointDiagnostics {
                row: idx,
                t: p.t,
                k_so: p.k_so,
                overlap: None,
                error: Some(msg.clone()),
            });
        }
        None => {}
    }
    Ok((row, diag))
}

/// Evaluates every grid point on `workers` threads. Rows come back in
/// lexicographic grid order (`T` slowest, `β` fastest) whatever the worker count.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepTable> {
    let pts = grid(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config(WORKERS_ENV, e.to_string()))?;
    // the overlap depends on (T, k_so) only, the slowest two grid axes
    let per_pair = pts.len() / (cfg.t.len() * cfg.k_so.len()).max(1);
    let pairs: Vec<(f64, f64)> = cfg
        .t
        .iter()
        .flat_map(|&t| cfg.k_so.iter().map(move |&k| (t, k)))
        .collect();
    let overlaps: Vec<Option<OverlapOutcome>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(t, k_so)| overlap_at(cfg, t, k_so))
            .collect::<Result<_>>()
    })?;
    let results: Vec<Result<(SweepRow, Option<PointDiagnostics>)>> = pool.install(|| {
        pts.par_iter()
            .enumerate()
            .map(|(i, p)| evaluate(cfg, i, p, overlaps[i / per_pair].as_ref()))
            .collect()
    });
    let mut rows = Vec::with_capacity(pts.len());
    let mut diagnostics = Vec::new();
    for r in results {
        let (row, d) = r?;
        rows.push(row);
        diagnostics.extend(d);
    }
    Ok(SweepTable { rows, diagnostics })
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// CSV with the fixed header and every float printed with 17 significant digits.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f(r.t),
            fmt_f(r.k_so),
            fmt_f(r.a),
            fmt_opt(r.tau_r),
            fmt_opt(r.kappa),
            fmt_opt(r.gain),
            fmt_opt(r.variance),
            fmt_f(r.eta),
            fmt_opt(r.v_a),
            fmt_f(r.beta_rec),
            fmt_opt(r.i_ab),
            fmt_opt(r.chi_be),
            fmt_opt(r.key_rate),
            r.engine.clone(),
            fmt_opt(r.gain_numeric),
            fmt_opt(r.variance_numeric),
            fmt_opt(r.key_rate_numeric),
            fmt_opt(r.discrepancy),
            r.validity.clone(),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_csv<R: std::io::Read>(input: R) -> std::result::Result<Vec<SweepRow>, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {header:?}"),
        )));
    }
    r.deserialize().collect()
}

/// Gnuplot `splot` data for `K(T, k_so)`: one data block per combination of
/// the remaining axes, one scan line per `k_so`.
pub fn write_surface<W: Write>(rows: &[SweepRow], cfg: &SweepConfig, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# K(T, k_so); columns: T k_so K")?;
    let inner = rows.len() / (cfg.t.len() * cfg.k_so.len()).max(1);
    for block in 0..inner {
        let first = &rows[block];
        writeln!(
            out,
            "# a = {} eta = {} V_A = {} beta_rec = {}",
            fmt_f(first.a),
            fmt_f(first.eta),
            match &cfg.v_a {
                Modulation::Optimize => "optimize".to_string(),
                Modulation::Values(_) => fmt_opt(first.v_a),
            },
            fmt_f(first.beta_rec)
        )?;
        for ik in 0..cfg.k_so.len() {
            for it in 0..cfg.t.len() {
                let r = &rows[(it * cfg.k_so.len() + ik) * inner + block];
                let k = r.key_rate.map_or_else(|| "NaN".to_string(), fmt_f);
                writeln!(out, "{} {} {}", fmt_f(r.t), fmt_f(r.k_so), k)?;
            }
            writeln!(out)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a toml::Table,
    resolved: &'a SweepConfig,
    points: usize,
    rows_ok: usize,
    rows_horizon: usize,
    rows_numeric_failed: usize,
    outputs: Vec<String>,
}

pub fn manifest_json(table: &SweepTable, cfg: &SweepConfig, outputs: &[PathBuf]) -> serde_json::Result<String> {
    let count = |s: RowStatus| table.rows.iter().filter(|r| r.status == s).count();
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg.table,
        resolved: cfg,
        points: table.rows.len(),
        rows_ok: count(RowStatus::Ok),
        rows_horizon: count(RowStatus::Horizon),
        rows_numeric_failed: count(RowStatus::NumericFailed),
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&m)
}

/// Writes `<prefix>.csv`, `<prefix>_surface.dat`, `<prefix>_manifest.json`
/// and, when enabled, `<prefix>_diagnostics.jsonl` under the output directory.
pub fn emit_outputs(table: &SweepTable, cfg: &SweepConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = |suffix: &str| dir.join(format!("{}{suffix}", cfg.output.prefix));
    let csv_path = path(".csv");
    let surf_path = path("_surface.dat");
    let manifest_path = path("_manifest.json");
    let mut written = vec![csv_path.clone(), surf_path.clone()];

    let mut buf = Vec::new();
    write_csv(&table.rows, &mut buf).map_err(io_err(&csv_path))?;
    fs::write(&csv_path, &buf).map_err(io_err(&csv_path))?;

    let mut buf = Vec::new();
    write_surface(&table.rows, cfg, &mut buf).map_err(io_err(&surf_path))?;
    fs::write(&surf_path, &buf).map_err(io_err(&surf_path))?;

    if cfg.output.diagnostics {
        let diag_path = path("_diagnostics.jsonl");
        let mut buf = String::new();
        for d in &table.diagnostics {
            buf.push_str(&serde_json::to_string(d).expect("diagnostics serialize"));
            buf.push('\n');
        }
        fs::write(&diag_path, buf).map_err(io_err(&diag_path))?;
        written.push(diag_path);
    }

    written.push(manifest_path.clone());
    let json = manifest_json(table, cfg, &written).expect("manifest serializes");
    fs::write(&manifest_path, json + "\n").map_err(io_err(&manifest_path))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &[&str]) -> SweepConfig {
        let base = "[grid]\nT = [0.0, 0.05]\nk_so = -10\neta = 0.9\n";
        let ov: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        SweepConfig::from_toml(base, &ov).unwrap()
    }

    #[test]
    fn horizon_rows_are_data() {
        let t = run_sweep(&config(&[]), 2).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].status, RowStatus::Horizon);
        assert_eq!(t.rows[0].key_rate, None);
        assert_eq!(t.rows[1].status, RowStatus::Ok);
        assert!(t.rows[1].key_rate.unwrap() > 0.0);
    }

    #[test]
    fn rows_match_direct_calls() {
        let t = run_sweep(&config(&["V_A=[2.0, 20.0]", "T=[0.02, 0.05]"]), 3).unwrap();
        assert_eq!(t.rows.len(), 4);
        for r in &t.rows {
            let direct = key_rate(&QkdParams::new(r.kappa.unwrap(), r.eta, r.beta_rec), r.v_a.unwrap()).unwrap();
            assert_eq!(r.key_rate, Some(direct.key_rate));
        }
        // V_A varies faster than T
        assert_eq!(t.rows[0].v_a, Some(2.0));
        assert_eq!(t.rows[1].v_a, Some(20.0));
        assert_eq!(t.rows[0].t, t.rows[1].t);
    }

    #[test]
    fn csv_round_trips() {
        let t = run_sweep(&config(&["V_A=[0.5, 5.0]"]), 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&t.rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t.rows);
    }

    #[test]
    fn kappa_gain_inverse() {
        // the round trip loses digits as G → 1
        for k in [1e-3, 0.5, 3.0, 10.0] {
            let g = gain_from_kappa(k).unwrap();
            assert!((kappa_of_gain(g) / k - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn surface_has_one_line_per_point() {
        let cfg = config(&["k_so=[-5, -10]"]);
        let t = run_sweep(&cfg, 2).unwrap();
        let mut buf = Vec::new();
        write_surface(&t.rows, &cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
        assert_eq!(data.len(), 4);
        assert!(data[0].ends_with("NaN"));
    }
}
