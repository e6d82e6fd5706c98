use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use noma_gssk::analysis::{ber_union_bound, ber_union_bound_per_branch, fading_averaged_bound, table1_rows};
use noma_gssk::montecarlo::{cell_edge_snr, fixed_channels, run_capacity_vs_antennas, run_sweep, ChannelMode};
use noma_gssk::output::{self, CapacityTable, LabelledResult};
use noma_gssk::scenario::{parse_scenario, Analysis, OutputFormat, Scenario};
use noma_gssk::{build_codebook, Metric, SweepSpec, SystemConfig};

/// Thread-count override; unset or 0 uses every available core.
const THREADS_ENV: &str = "NOMA_SIM_THREADS";

#[derive(Parser)]
#[command(name = "sim", version, about = "NOMA-GSSK link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario document and write its curve data.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Do not echo the resolved scenario on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Print the complexity table next to the published values.
    Table1 {
        #[arg(long, value_enum, default_value = "text")]
        format: Table1Format,
    },
    /// Union bound on the cell-edge BER for one NOMA-GSSK configuration.
    Bound {
        #[arg(long)]
        mt: usize,
        #[arg(long)]
        ma: usize,
        /// SNR values in dB, comma separated.
        #[arg(long = "snr-db", value_delimiter = ',', required = true)]
        snr_db: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        mr: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Channel draws for the fading-averaged bound.
        #[arg(long, default_value_t = 2000)]
        draws: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table1Format {
    Text,
    Csv,
    Json,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn render(scenario: &Scenario) -> anyhow::Result<String> {
    let csv = scenario.format == OutputFormat::Csv;
    match scenario.analysis {
        Analysis::Table1 => {
            let rows = table1_rows();
            Ok(if csv { output::table1_csv(&rows) } else { output::table1_json(&rows) })
        }
        Analysis::CapacityVsAntennas => {
            let mut tables = Vec::new();
            for run in &scenario.runs {
                for &snr_db in &scenario.snr_grid_db {
                    let snr = 10f64.powf(snr_db / 10.0);
                    let rows =
                        run_capacity_vs_antennas(&run.config, snr, &scenario.m_t_grid, scenario.bound_draws, scenario.seed)?;
                    tables.push(CapacityTable { snr_db, rows });
                }
            }
            Ok(if csv { output::capacity_csv(&tables) } else { output::capacity_json(&tables) })
        }
        Analysis::Sweep => {
            let mut results = Vec::new();
            for (label, spec) in scenario.sweep_specs() {
                let result = run_sweep(&spec).with_context(|| format!("run {label}"))?;
                results.push(LabelledResult { label, result });
            }
            Ok(if csv { output::sweep_csv(&results) } else { output::sweep_json(&results) })
        }
    }
}

fn run(
    path: PathBuf,
    seed: Option<u64>,
    trials: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    quiet: bool,
) -> anyhow::Result<()> {
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut scenario = parse_scenario(&text).with_context(|| format!("scenario {}", path.display()))?;
    let format = format.map(|f| match f {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    });
    scenario.apply_overrides(seed, trials, out, format)?;
    if !quiet {
        eprintln!("{}", scenario.echo());
    }
    let body = render(&scenario)?;
    match &scenario.output {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn bound(mt: usize, ma: usize, snr_db: &[f64], mr: usize, seed: u64, draws: usize) -> anyhow::Result<()> {
    if draws == 0 {
        bail!("--draws must be positive");
    }
    let config = SystemConfig {
        m_r: mr,
        ..SystemConfig::noma_gssk(mt, ma)
    };
    config.validate()?;
    let cb = build_codebook(mt, ma)?;
    let spec = SweepSpec {
        config: config.clone(),
        snr_grid_db: snr_db.to_vec(),
        trials_per_point: 1,
        master_seed: seed,
        metric: Metric::CellEdgeBer,
        channel_mode: ChannelMode::Fixed,
    };
    let channels = fixed_channels(&spec)?;
    let edge = channels.last().context("no cell-edge user")?;
    println!("n_h={} b_h={} m_r={mr} seed={seed}", cb.n_h(), cb.b_h());
    println!("snr_db,edge_snr_db,bound_mrc,bound_per_branch,bound_fading_avg");
    for &s in snr_db {
        let snr = cell_edge_snr(&config, 10f64.powf(s / 10.0))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        println!(
            "{},{},{},{},{}",
            output::fmt_decimal(s),
            output::fmt_decimal(10.0 * snr.log10()),
            output::fmt_scientific(ber_union_bound(&cb, edge, snr, ma)?),
            output::fmt_scientific(ber_union_bound_per_branch(&cb, edge, snr, ma)?),
            output::fmt_scientific(fading_averaged_bound(&config, &cb, snr, draws, &mut rng)?),
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Run {
            scenario,
            seed,
            trials,
            output,
            format,
            quiet,
        } => run(scenario, seed, trials, output, format, quiet),
        Command::Table1 { format } => {
            let rows = table1_rows();
            match format {
                Table1Format::Text => print!("{}", output::table1_report(&rows)),
                Table1Format::Csv => print!("{}", output::table1_csv(&rows)),
                Table1Format::Json => println!("{}", output::table1_json(&rows)),
            }
            Ok(())
        }
        Command::Bound {
            mt,
            ma,
            snr_db,
            mr,
            seed,
            draws,
        } => bound(mt, ma, &snr_db, mr, seed, draws),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
