//! Batch runs: sweeps and reach searches over configurations × ratios,
//! written as CSV files plus a manifest that can be fed back as a config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::config::{Provenance, RunConfig};
use crate::error::{Error, Result};
use crate::noise::{RamanTable, BUNDLED_RAMAN_TABLE};
use crate::scenario::{max_distance, rate_at, sweep, SweepResult};

pub const SWEEP_COLUMNS: [&str; 9] = [
    "total_length_km",
    "length_alice_km",
    "length_bob_km",
    "xi_a_snu",
    "xi_b_snu",
    "xi_prime_snu",
    "mutual_information_bits",
    "holevo_bits",
    "key_fraction_bits",
];

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_SCRIPT_FILE: &str = "plot_rates.py";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub configuration: String,
    pub quantum_wavelength_nm: f64,
    pub channel_count: usize,
    pub asymmetry_ratio: f64,
    pub max_distance_km: Option<f64>,
    pub key_fraction_at_zero_bits: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Vec<SummaryRow>,
    pub files: Vec<PathBuf>,
}

/// 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sweep_file_name(configuration: &str, ratio: f64) -> String {
    format!("sweep_config{configuration}_ratio{ratio}.csv")
}

pub fn sweep_csv(result: &SweepResult, symbol_rate_hz: Option<f64>) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    if symbol_rate_hz.is_some() {
        out.push_str(",key_rate_bps");
    }
    out.push('\n');
    for r in &result.rows {
        let cells = [
            r.total_length_km,
            r.length_alice_km,
            r.length_bob_km,
            r.xi_a_snu,
            r.xi_b_snu,
            r.xi_prime_snu,
            r.mutual_information_bits,
            r.holevo_bits,
            r.key_fraction_bits,
        ];
        out.push_str(&cells.map(fmt_num).join(","));
        if let Some(rate) = symbol_rate_hz {
            let _ = write!(out, ",{}", fmt_num(r.key_fraction_bits * rate));
        }
        out.push('\n');
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "configuration,quantum_wavelength_nm,channel_count,asymmetry_ratio,max_distance_km,key_fraction_at_zero_bits\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.configuration,
            r.quantum_wavelength_nm,
            r.channel_count,
            r.asymmetry_ratio,
            r.max_distance_km.map(fmt_num).unwrap_or_default(),
            fmt_num(r.key_fraction_at_zero_bits)
        );
    }
    out
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Loads the table named by the config (or the bundled one) and returns it
/// with its checksum. A manifest checksum that no longer matches is a data error.
pub fn load_raman_table(config: &RunConfig) -> Result<(RamanTable, String)> {
    let (table, digest) = match &config.run.raman_table {
        Some(path) => {
            let bytes = fs::read(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            (RamanTable::from_reader(bytes.as_slice())?, sha256_hex(&bytes))
        }
        None => (RamanTable::bundled(), sha256_hex(BUNDLED_RAMAN_TABLE.as_bytes())),
    };
    if let Some(p) = &config.provenance {
        if p.raman_table_sha256 != digest {
            return Err(Error::Data(format!(
                "Raman table checksum {digest} does not match manifest {}",
                p.raman_table_sha256
            )));
        }
    }
    Ok((table, digest))
}

/// Summary rows, `(file name, contents)` pairs and the Raman table digest.
pub type Computed = (Vec<SummaryRow>, Vec<(String, String)>, String);

/// Runs every requested scenario and returns the files' contents without
/// touching the filesystem (other than reading the Raman table).
pub fn compute(config: &RunConfig) -> Result<Computed> {
    config.validate()?;
    let (table, table_digest) = load_raman_table(config)?;
    let table = Arc::new(table);
    let grid = config.sweep_grid();

    let mut files = Vec::new();
    let mut summary = Vec::new();
    for (label, plan) in config.plans()? {
        for &ratio in &config.run.ratios {
            let template = config.scenario(&plan, ratio, Arc::clone(&table))?;
            let result = sweep(&template, &grid)?;
            files.push((
                sweep_file_name(&label, ratio),
                sweep_csv(&result, config.run.symbol_rate_hz),
            ));
            summary.push(SummaryRow {
                configuration: label.clone(),
                quantum_wavelength_nm: plan.quantum_wavelength_nm(),
                channel_count: plan.channel_count(),
                asymmetry_ratio: ratio,
                max_distance_km: max_distance(
                    &template,
                    config.run.search_upper_km,
                    config.run.resolution_km,
                )?,
                key_fraction_at_zero_bits: rate_at(&template)?.key_fraction,
            });
        }
    }
    files.push((SUMMARY_FILE.to_string(), summary_csv(&summary)));
    if config.run.emit_plot_script {
        files.push((PLOT_SCRIPT_FILE.to_string(), plot_script(config, &summary)));
    }
    Ok((summary, files, table_digest))
}

pub fn manifest(config: &RunConfig, table_digest: &str, files: &[(String, String)]) -> String {
    let mut effective = config.clone();
    effective.provenance = Some(Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        raman_table_sha256: table_digest.to_string(),
        outputs: files
            .iter()
            .map(|(name, body)| (name.clone(), sha256_hex(body.as_bytes())))
            .collect::<BTreeMap<_, _>>(),
    });
    let mut text =
        String::from("# Effective parameters of this run; pass back with --config to reproduce.\n");
    text.push_str(&effective.to_toml_string());
    text
}

/// Computes everything, then writes it under `out_dir`. Files written before a
/// failure are removed again.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunReport> {
    let (summary, mut files, digest) = compute(config)?;
    let manifest_text = manifest(config, &digest, &files);
    files.push((MANIFEST_FILE.to_string(), manifest_text));

    let created_dir = !out_dir.exists();
    let io_err = |path: &Path, source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut written = Vec::new();
    let result = (|| {
        fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
        for (name, body) in &files {
            let path = out_dir.join(name);
            fs::write(&path, body).map_err(|e| io_err(&path, e))?;
            written.push(path);
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created_dir {
            let _ = fs::remove_dir(out_dir);
        }
        return Err(e);
    }
    Ok(RunReport {
        summary,
        files: written,
    })
}

fn plot_script(config: &RunConfig, summary: &[SummaryRow]) -> String {
    let mut groups: Vec<(String, f64, usize)> = Vec::new();
    for row in summary {
        if !groups.iter().any(|g| g.0 == row.configuration) {
            groups.push((
                row.configuration.clone(),
                row.quantum_wavelength_nm,
                row.channel_count,
            ));
        }
    }
    let panels = groups
        .iter()
        .map(|(label, lq, n)| {
            let curves = config
                .run
                .ratios
                .iter()
                .map(|&r| format!("({r:?}, {:?})", sweep_file_name(label, r)))
                .collect::<Vec<_>>()
                .join(", ");
            format!("    ({label:?}, {lq:?}, {n}, [{curves}]),")
        })
        .collect::<Vec<_>>()
        .join("\n");
    format!(
        r#"#!/usr/bin/env python3
"""Key fraction versus total fiber length, one panel per channel plan and
one curve per asymmetry ratio. Run from the output directory."""
import csv
import math
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
PANELS = [
{panels}
]


def load(name):
    with open(os.path.join(HERE, name)) as fh:
        rows = list(csv.DictReader(fh))
    return ([float(r["total_length_km"]) for r in rows],
            [float(r["key_fraction_bits"]) for r in rows])


cols = min(2, len(PANELS))
nrows = math.ceil(len(PANELS) / cols)
fig, axes = plt.subplots(nrows, cols, figsize=(6 * cols, 4 * nrows), squeeze=False)
for ax, (label, lq, n, curves) in zip(axes.flat, PANELS):
    for ratio, name in curves:
        x, y = load(name)
        ax.semilogy(x, [v if v > 0 else float("nan") for v in y], label=f"La/Lb = {{ratio:g}}")
    ax.set_title(f"configuration {{label}}: {{n}} channels, {{lq}} nm")
    ax.set_xlabel("total fiber length, km")
    ax.set_ylabel("key fraction, bits/use")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
for ax in list(axes.flat)[len(PANELS):]:
    ax.set_visible(False)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "key_rate_vs_length.png"), dpi=150)
"#
    )
}
