use anyhow::Context;
use clap::Parser;
use compop::scenario::{preset_config, run_analyze, write_bundle, ReportBundle, ScenarioConfig};
use std::path::PathBuf;
use std::process::exit;

/// Compactness analysis of composition operators on model spaces: sweep the
/// indicator over dyadic annuli, decompose the Clark measures on the
/// spectrum, and emit a verdict with plot-ready CSVs.
#[derive(Parser, Debug)]
#[command(name = "compop", version)]
struct Cli {
    /// Analysis config (JSON; see the shipped schemas).
    #[arg(long, value_name = "PATH", conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,

    /// Shipped preset: paley-wiener-small | tangent-disk | sparse-blaschke.
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,

    /// Override the deepest sweep annulus (radii 1 - 2^-k, k = 2..=depth).
    #[arg(long, value_name = "K")]
    depth: Option<u32>,

    /// Override the number of sweep angles.
    #[arg(long, value_name = "N")]
    angles: Option<usize>,

    /// Output directory (default: the config's output_dir, else "out").
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Double all sampling grids; may be given more than once.
    #[arg(long, action = clap::ArgAction::Count)]
    refine: u8,

    /// Emit only verdict.json and config.json, no CSVs.
    #[arg(long)]
    json_only: bool,

    /// Cap the number of worker threads.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            exit(1);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    let mut config: ScenarioConfig = match (&cli.config, &cli.scenario) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(name)) => preset_config(name)?,
        _ => anyhow::bail!("pass exactly one of --config or --scenario"),
    };

    if let Some(depth) = cli.depth {
        config.sweep.depth = depth;
    }
    if let Some(angles) = cli.angles {
        config.sweep.angles = angles;
    }
    // A refine step doubles the angle grid here and the Clark boundary grid
    // through the config's refine counter.
    for _ in 0..cli.refine {
        config.sweep.angles *= 2;
    }
    config.refine += cli.refine as u32;

    let bundle: ReportBundle = run_analyze(&config)?;

    let out_dir = cli
        .out
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let written = write_bundle(&bundle, &out_dir, cli.json_only)?;

    println!(
        "{}: {} (trend {}, essential norm estimate {:.6})",
        config.name, bundle.document.classification, bundle.document.trend, bundle.document.essential_norm
    );
    for caveat in &bundle.document.caveats {
        println!("  caveat: {caveat}");
    }
    for path in written {
        println!("  wrote {}", path.display());
    }
    Ok(bundle.exit_code)
}
