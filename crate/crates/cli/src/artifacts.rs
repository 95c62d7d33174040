//! On-disk artifacts of a run: CSV tables, JSON reports and the manifest.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a half-written artifact. Floats go through the shortest
//! round-trip representation, which makes every table lossless.

use std::io::Write;
use std::path::{Path, PathBuf};

use rflab_core::flow::{FlowStatus, FlowTrace, SnapshotFunctionals};
use rflab_core::{DyadicDecomposition, DyadicLevel, FunctionalSeries, KappaSeries, WarpedProfile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scenario_file::Resolved;
use crate::CliError;

pub const TRACE_CSV: &str = "trace.csv";
pub const PROFILES_CSV: &str = "profiles.csv";
pub const FUNCTIONALS_CSV: &str = "functionals.csv";
pub const DYADIC_CSV: &str = "dyadic.csv";
pub const LEDGER_CSV: &str = "ledger.csv";
pub const GAP_REPORT: &str = "gap_report.json";
pub const PLOT_SCRIPT: &str = "plot_products.py";
pub const MANIFEST: &str = "manifest.json";
pub const VERIFY_REPORT: &str = "verify_report.json";

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        // temp files are created private; artifacts are ordinary files
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(|e| io_err(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let bytes = csv_bytes(rows).map_err(|e| io_err(path, e))?;
    write_atomic(path, &bytes)
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// One row of `trace.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    #[serde(rename = "O")]
    pub o: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "P_minus")]
    pub p_minus: f64,
    pub diameter: f64,
    pub neck_radius: Option<f64>,
    /// Empty on snapshots where `κ̂` was not evaluated.
    pub kappa_hat: Option<f64>,
    pub argmax_rm: usize,
    pub epoch: u32,
}

impl TraceRow {
    pub fn functionals(&self) -> SnapshotFunctionals {
        SnapshotFunctionals {
            t: self.t,
            o: self.o,
            p: self.p,
            q: self.q,
            p_minus: self.p_minus,
            diameter: self.diameter,
            neck_radius: self.neck_radius,
            argmax_rm: self.argmax_rm,
        }
    }
}

pub fn trace_rows(trace: &FlowTrace, kappa: &KappaSeries) -> Vec<TraceRow> {
    let mut kappa_at = vec![None; trace.len()];
    for (&k, v) in kappa.index.iter().zip(&kappa.kappa) {
        kappa_at[k] = *v;
    }
    trace
        .functionals
        .iter()
        .zip(&trace.epochs)
        .zip(kappa_at)
        .map(|((f, &epoch), kappa_hat)| TraceRow {
            t: f.t,
            o: f.o,
            p: f.p,
            q: f.q,
            p_minus: f.p_minus,
            diameter: f.diameter,
            neck_radius: f.neck_radius,
            kappa_hat,
            argmax_rm: f.argmax_rm,
            epoch,
        })
        .collect()
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<(), CliError> {
    write_csv(path, rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    read_csv(path)
}

/// A trace carrying only the scalar functionals, enough for the checks that
/// never look at the profiles.
pub fn functionals_trace(rows: &[TraceRow]) -> Result<FlowTrace, CliError> {
    for w in rows.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(CliError::Usage(format!("trace times must increase strictly ({} after {})", w[1].t, w[0].t)));
        }
    }
    Ok(FlowTrace {
        times: rows.iter().map(|r| r.t).collect(),
        profiles: Vec::new(),
        curvatures: Vec::new(),
        functionals: rows.iter().map(TraceRow::functionals).collect(),
        epochs: rows.iter().map(|r| r.epoch).collect(),
        status: FlowStatus::Completed,
        steps: 0,
    })
}

/// One node of one stored profile in `profiles.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub snapshot: usize,
    pub t: f64,
    pub epoch: u32,
    pub n: usize,
    pub x: f64,
    pub phi: f64,
    pub psi: f64,
    pub material: f64,
}

/// Snapshot indices whose profiles are stored: every `stride`-th, plus
/// the last.
pub fn stored_snapshots(len: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..len).step_by(stride.max(1)).collect();
    if len > 0 && out.last() != Some(&(len - 1)) {
        out.push(len - 1);
    }
    out
}

pub fn write_profiles(path: &Path, trace: &FlowTrace, stride: usize) -> Result<(), CliError> {
    let rows = stored_snapshots(trace.len(), stride).into_iter().flat_map(|k| {
        let p = &trace.profiles[k];
        let epoch = trace.epochs[k];
        (0..p.grid.len()).map(move |i| ProfileRow {
            snapshot: k,
            t: p.time,
            epoch,
            n: p.n,
            x: p.grid[i],
            phi: p.phi[i],
            psi: p.psi[i],
            material: p.material[i],
        })
    });
    write_csv(path, rows)
}

/// Stored profiles with their snapshot index and epoch, in file order.
pub fn read_profiles(path: &Path) -> Result<Vec<(usize, WarpedProfile, u32)>, CliError> {
    let rows: Vec<ProfileRow> = read_csv(path)?;
    let mut out = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let head = rows[start];
        let end = start + rows[start..].iter().take_while(|r| r.snapshot == head.snapshot).count();
        let block = &rows[start..end];
        let profile = WarpedProfile {
            n: head.n,
            grid: block.iter().map(|r| r.x).collect(),
            phi: block.iter().map(|r| r.phi).collect(),
            psi: block.iter().map(|r| r.psi).collect(),
            time: head.t,
            material: block.iter().map(|r| r.material).collect(),
        };
        profile
            .validate()
            .map_err(|e| CliError::Usage(format!("{}: snapshot {}: {e}", path.display(), head.snapshot)))?;
        out.push((head.snapshot, profile, head.epoch));
        start = end;
    }
    Ok(out)
}

/// `functionals.csv`: the sup-norms and their `(T̂−t)` products.
pub fn write_functionals(path: &Path, series: &FunctionalSeries) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["t", "t_hat_minus_t", "O", "P", "Q", "P_minus", "tQ", "tP", "tO", "t_sqrt_OQ", "tP_minus"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(b) = &series.blowup {
        header.extend(b.lambdas.iter().map(|l| format!("Q_lambda_{l}")));
    }
    let fmt = |v: f64| v.to_string();
    let mut records = vec![header];
    for k in 0..series.len() {
        let mut rec = vec![fmt(series.t[k])];
        match &series.blowup {
            Some(b) => rec.push(fmt(b.t_hat - series.t[k])),
            None => rec.push(String::new()),
        }
        rec.extend([series.o[k], series.p[k], series.q[k], series.p_minus[k]].map(fmt));
        match &series.blowup {
            Some(b) => {
                rec.extend([b.tq[k], b.tp[k], b.to[k], b.t_sqrt_oq[k], b.tp_minus[k]].map(fmt));
                rec.extend(b.q_lambda.iter().map(|col| fmt(col[k])));
            }
            None => rec.extend(std::iter::repeat(String::new()).take(5)),
        }
        records.push(rec);
    }
    for rec in records {
        w.write_record(&rec).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

/// One row of `dyadic.csv`; every row repeats the base point of the
/// decomposition so the file stands on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicRow {
    pub i: u32,
    pub s_i: f64,
    pub s_next: f64,
    pub integral: f64,
    pub t0: f64,
    pub q_base: f64,
}

pub fn write_dyadic(path: &Path, d: &DyadicDecomposition) -> Result<(), CliError> {
    write_csv(
        path,
        d.levels.iter().map(|l| DyadicRow {
            i: l.i,
            s_i: l.s_i,
            s_next: l.s_next,
            integral: l.integral,
            t0: d.t0,
            q_base: d.q_base,
        }),
    )
}

pub fn read_dyadic(path: &Path) -> Result<DyadicDecomposition, CliError> {
    let rows: Vec<DyadicRow> = read_csv(path)?;
    let Some(first) = rows.first() else {
        return Err(CliError::Usage(format!("{}: no dyadic levels", path.display())));
    };
    let levels: Vec<DyadicLevel> = rows
        .iter()
        .map(|r| DyadicLevel {
            i: r.i,
            s_i: r.s_i,
            s_next: r.s_next,
            integral: r.integral,
        })
        .collect();
    let epsilon_hat = levels.iter().map(|l| l.integral).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    Ok(DyadicDecomposition {
        t0: first.t0,
        q_base: first.q_base,
        levels,
        epsilon_hat,
        warning: None,
    })
}

pub fn write_ledger(path: &Path, rows: &[rflab_core::LedgerEntry]) -> Result<(), CliError> {
    write_csv(path, rows)
}

/// Python script plotting the blowup products against `log(T̂−t)`.
pub fn plot_script() -> &'static str {
    r#"#!/usr/bin/env python3
"""Blowup products against log(T_hat - t), read from functionals.csv."""
import csv
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

run = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
rows = [r for r in csv.DictReader(open(run / "functionals.csv")) if r["t_hat_minus_t"]]
rows = [r for r in rows if float(r["t_hat_minus_t"]) > 0]
if not rows:
    sys.exit("no snapshots before the estimated singular time")
x = [math.log(float(r["t_hat_minus_t"])) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4.5))
for col, label in [("tQ", "Q (T-t)"), ("tP", "P (T-t)"), ("t_sqrt_OQ", "sqrt(OQ) (T-t)")]:
    ax.plot(x, [float(r[col]) for r in rows], label=label)
ax.axhline(0.125, color="grey", linestyle=":", label="1/8")
ax.invert_xaxis()
ax.set_xlabel("log(T_hat - t)")
ax.set_ylabel("product")
ax.legend()
fig.tight_layout()
fig.savefig(run / "products.svg")
"#
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Written last by `lab run`; lists every artifact with its digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool: String,
    pub tool_version: String,
    pub scenario_path: String,
    pub resolved: Resolved,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub status: FlowStatus,
    pub steps: usize,
    pub snapshots: usize,
    pub artifacts: Vec<ArtifactDigest>,
}

pub fn digest_artifacts(dir: &Path, names: &[&str]) -> Result<Vec<ArtifactDigest>, CliError> {
    names
        .iter()
        .map(|name| {
            let path = dir.join(name);
            let bytes = std::fs::metadata(&path).map_err(|e| io_err(&path, e))?.len();
            Ok(ArtifactDigest {
                path: name.to_string(),
                sha256: sha256_file(&path)?,
                bytes,
            })
        })
        .collect()
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Root under which run directories are created.
pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("LAB_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lab-output"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rflab_core::flow::{run, Scenario};
    use rflab_core::dyadic_decompose;
    use rflab_core::functionals::kappa_monitor_strided;

    fn short_trace() -> FlowTrace {
        let mut s = Scenario::round_sphere(3, 1.0);
        s.stop_q_ratio = 3.0;
        run(&s).unwrap()
    }

    #[test]
    fn trace_csv_round_trips() {
        let trace = short_trace();
        let kappa = kappa_monitor_strided(&trace, 50);
        let rows = trace_rows(&trace, &kappa);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(TRACE_CSV);
        write_trace(&path, &rows).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(back, rows);
        let ft = functionals_trace(&back).unwrap();
        assert_eq!(ft.functionals, trace.functionals);
        assert_eq!(ft.times, trace.times);
    }

    #[test]
    fn profiles_and_dyadic_round_trip() {
        let trace = short_trace();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(PROFILES_CSV);
        write_profiles(&path, &trace, 7).unwrap();
        let back = read_profiles(&path).unwrap();
        let idx = stored_snapshots(trace.len(), 7);
        assert_eq!(back.len(), idx.len());
        for ((k, p, e), &want) in back.iter().zip(&idx) {
            assert_eq!(*k, want);
            assert_eq!(p, &trace.profiles[want]);
            assert_eq!(*e, trace.epochs[want]);
        }

        let d = dyadic_decompose(&trace, 0.0);
        let path = dir.path().join(DYADIC_CSV);
        write_dyadic(&path, &d).unwrap();
        let back = read_dyadic(&path).unwrap();
        assert_eq!(back.levels, d.levels);
        assert_eq!(back.q_base, d.q_base);
        assert_eq!(back.epsilon_hat, d.epsilon_hat);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
