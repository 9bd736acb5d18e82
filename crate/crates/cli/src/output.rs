use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use toc_core::harness::{RunOutput, SweepRow};
use toc_core::metrics::{ChannelKind, ChannelMetrics, MetricsReport};

/// Shortest decimal that reads back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x}")
}

fn kind_name(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::Raw => "x",
        ChannelKind::Compensated => "xhat",
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    writer.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV buffer: {}", e.error()))
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))?;
    }
    let file_name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("moving {} to {}", tmp.display(), path.display()))
}

/// `t, v, v1..vm, x1..xm, xhat1..xhat(m-1), u`, one row per sample.
pub fn trajectory_csv(out: &RunOutput) -> Result<Vec<u8>> {
    let m = out.signal.clean.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "v".to_string()];
    header.extend((1..=m).map(|i| format!("v{i}")));
    header.extend((1..=m).map(|i| format!("x{i}")));
    header.extend((1..m).map(|i| format!("xhat{i}")));
    header.push("u".into());
    w.write_record(&header)?;
    for k in 0..out.trajectory.len() {
        let mut row = Vec::with_capacity(header.len());
        row.push(num(out.trajectory.t[k]));
        row.push(num(out.signal.v[k]));
        row.extend(out.signal.clean.iter().map(|c| num(c[k])));
        row.extend(out.trajectory.states[k].iter().map(|&x| num(x)));
        row.extend(out.compensated.xhat.iter().map(|c| num(c[k])));
        row.push(num(out.trajectory.controls[k]));
        w.write_record(&row)?;
    }
    finish(w)
}

/// `signal, reference, lag_steps, amplitude_ratio, residual_rms`, one row per channel.
pub fn metrics_csv(report: &MetricsReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["signal", "reference", "lag_steps", "amplitude_ratio", "residual_rms"])?;
    for c in &report.channels {
        w.write_record([
            format!("{}{}", kind_name(c.kind), c.channel),
            format!("v{}", c.channel),
            num(c.lag_steps),
            num(c.amplitude_ratio),
            num(c.residual_rms),
        ])?;
    }
    finish(w)
}

fn sweep_columns(c: &ChannelMetrics) -> [String; 3] {
    let stem = format!("{}{}", kind_name(c.kind), c.channel);
    [format!("{stem}_lag_steps"), format!("{stem}_amplitude_ratio"), format!("{stem}_residual_rms")]
}

/// One row per `(n0, gsm)` combination; each channel contributes three columns.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let first = rows.first().context("sweep produced no rows")?;
    let mut header = vec!["n0".to_string(), "gsm".to_string()];
    header.extend(first.metrics.channels.iter().flat_map(sweep_columns));
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![num(row.n0), num(row.gsm)];
        for c in &row.metrics.channels {
            record.extend([num(c.lag_steps), num(c.amplitude_ratio), num(c.residual_rms)]);
        }
        w.write_record(&record)?;
    }
    finish(w)
}

pub struct RunPaths {
    pub trajectory: PathBuf,
    pub metrics: PathBuf,
}

pub fn run_paths(dir: &Path, name: &str) -> RunPaths {
    RunPaths {
        trajectory: dir.join(format!("{name}_trajectory.csv")),
        metrics: dir.join(format!("{name}_metrics.csv")),
    }
}

pub fn sweep_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_sweep.csv"))
}
