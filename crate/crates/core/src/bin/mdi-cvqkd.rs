use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mdi_cvqkd::config::RunConfig;
use mdi_cvqkd::error::Error;
use mdi_cvqkd::run;

/// Secure key rate and reach of MDI CV-QKD links sharing fiber with DWDM traffic.
#[derive(Debug, Parser)]
#[command(name = "mdi-cvqkd", version)]
struct Args {
    /// TOML config layered over the reference parameters (a previous run's manifest works too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reference configuration ids, comma separated (1-4).
    #[arg(long, value_delimiter = ',')]
    configuration: Option<Vec<u32>>,
    /// Asymmetry ratios L_a/L_b, comma separated.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Longest total length in the sweep grid, km.
    #[arg(long)]
    max_km: Option<f64>,
    /// Sweep grid step, km.
    #[arg(long)]
    step_km: Option<f64>,
    /// Raman cross-section table (CSV); the bundled table is used otherwise.
    #[arg(long)]
    raman_table: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write plot_rates.py.
    #[arg(long)]
    emit_plot_script: bool,
}

fn load(args: &Args) -> Result<RunConfig, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::from_toml_str(&text)?;
    if let Some(ids) = &args.configuration {
        cfg.run.configurations = ids.clone();
        cfg.plan = None;
    }
    if let Some(r) = &args.ratios {
        cfg.run.ratios = r.clone();
    }
    if let Some(v) = args.max_km {
        cfg.run.max_km = v;
    }
    if let Some(v) = args.step_km {
        cfg.run.step_km = v;
    }
    if let Some(p) = &args.raman_table {
        cfg.run.raman_table = Some(p.clone());
    }
    if args.emit_plot_script {
        cfg.run.emit_plot_script = true;
    }
    // flags may change the inputs a manifest vouched for
    if args.raman_table.is_some() {
        cfg.provenance = None;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| run::run(&cfg, &args.out));
    match result {
        Ok(report) => {
            for row in &report.summary {
                let reach = row
                    .max_distance_km
                    .map(|d| format!("{d:.2} km"))
                    .unwrap_or_else(|| "none".to_string());
                println!(
                    "configuration {:>6}  ratio {:<4}  max distance {reach}",
                    row.configuration, row.asymmetry_ratio
                );
            }
            println!("wrote {} files to {}", report.files.len(), args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
