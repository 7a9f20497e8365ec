//! CSV emission. Fixed column order, 17-significant-digit decimal
//! formatting (round-trip exact for f64), and a `#`-prefixed header that
//! echoes the full config and library version so every file is
//! self-describing.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::optimizers::RunRecord;

pub const COLUMNS: &str = "k,gamma,f,g_l1,g_l2,rho_norm_hat,bits_up,bits_down,rep,seed";

/// 17 significant digits, plain decimal/scientific as printed by Rust's
/// shortest-exact formatter widened to full precision.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# signdesc {} run transcript\n",
        env!("CARGO_PKG_VERSION")
    ));
    for line in config.to_toml().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)
}

/// Per-repetition transcript: one row per checkpointed iteration.
pub fn write_run_csv(
    path: &Path,
    config: &ExperimentConfig,
    record: &RunRecord,
    rep: usize,
) -> Result<()> {
    let mut out = header(config);
    out.push_str(COLUMNS);
    out.push('\n');
    let stride = config.stride();
    for row in &record.rows {
        if row.k % stride != 0 && row.k != config.k {
            continue;
        }
        let rho = row.rho_norm_hat.map(format_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.k,
            format_f64(row.gamma),
            format_f64(row.f),
            format_f64(row.g_l1),
            format_f64(row.g_l2),
            rho,
            row.bits_up,
            row.bits_down,
            rep,
            record.seed,
        ));
    }
    write_file(path, &out)
}

pub const AGGREGATE_COLUMNS: &str =
    "k,gamma,f_mean,f_std,g_l1_mean,g_l1_std,g_l2_mean,g_l2_std,bits_up,bits_down,reps";

/// Mean and standard deviation (R - 1 divisor) per checkpoint over all
/// repetitions. All records must share the row layout, which deterministic
/// runs of one config guarantee.
pub fn write_aggregate_csv(
    path: &Path,
    config: &ExperimentConfig,
    records: &[RunRecord],
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::domain("no records to aggregate"));
    }
    let r = records.len();
    let mut out = header(config);
    out.push_str(AGGREGATE_COLUMNS);
    out.push('\n');
    let stride = config.stride();
    for (i, base) in records[0].rows.iter().enumerate() {
        if base.k % stride != 0 && base.k != config.k {
            continue;
        }
        let stats = |field: fn(&crate::optimizers::IterationRow) -> f64| {
            let mean = records.iter().map(|rec| field(&rec.rows[i])).sum::<f64>() / r as f64;
            let std = if r > 1 {
                (records
                    .iter()
                    .map(|rec| {
                        let d = field(&rec.rows[i]) - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / (r as f64 - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            (mean, std)
        };
        let (f_mean, f_std) = stats(|row| row.f);
        let (l1_mean, l1_std) = stats(|row| row.g_l1);
        let (l2_mean, l2_std) = stats(|row| row.g_l2);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            base.k,
            format_f64(base.gamma),
            format_f64(f_mean),
            format_f64(f_std),
            format_f64(l1_mean),
            format_f64(l1_std),
            format_f64(l2_mean),
            format_f64(l2_std),
            base.bits_up,
            base.bits_down,
            r,
        ));
    }
    write_file(path, &out)
}
