use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beamsquint::cli_io::{
    cmd_export_taps, cmd_pattern, cmd_squint_table, cmd_sweep, load_config, optimize_angle,
    optimize_summary_line, serialize_config, squint_rows_csv, trace_csv, RunConfig,
};
use beamsquint::error::Error;
use beamsquint::BeamformerVariant;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BeamformerArg {
    Phase,
    Ttd,
}

impl From<BeamformerArg> for BeamformerVariant {
    fn from(arg: BeamformerArg) -> Self {
        match arg {
            BeamformerArg::Phase => BeamformerVariant::PhaseOnly,
            BeamformerArg::Ttd => BeamformerVariant::TrueTimeDelay,
        }
    }
}

#[derive(Parser)]
#[command(name = "beamsquint", version, about = "Beam squint simulation and baseband delay compensation for wideband phased arrays")]
struct Cli {
    /// JSON run configuration; omitted fields use the built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for pattern and sweep computation
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Beam pattern (power vs scan angle) as CSV
    Pattern {
        #[arg(long)]
        steer: f64,
        #[arg(long, default_value_t = 0.0)]
        fbb: f64,
        #[arg(long, value_enum, default_value = "phase")]
        beamformer: BeamformerArg,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steered angle and squint error per center frequency as CSV
    SquintTable {
        #[arg(long)]
        steer: f64,
        #[arg(long, value_enum, default_value = "phase")]
        beamformer: BeamformerArg,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the optimum per-element delay for one steering angle
    Optimize {
        #[arg(long)]
        steer: f64,
        /// Include the carrier in the optimization cost
        #[arg(long)]
        include_carrier: bool,
        /// Destination for the convergence-trace CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize every configured steering angle; write a JSON bundle
    /// plus per-angle CSVs
    Sweep {
        #[arg(long)]
        include_carrier: bool,
        /// Output directory
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
    },
    /// Fractional-delay filter coefficients, one per line
    ExportTaps {
        #[arg(long)]
        fraction: f64,
        #[arg(long, default_value_t = 62)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the fully resolved configuration as JSON
    ShowConfig,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    let cfg: RunConfig = match &cli.config {
        Some(path) => load_config(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };

    match cli.command {
        Command::Pattern {
            steer,
            fbb,
            beamformer,
            delta,
            out,
        } => {
            let csv = cmd_pattern(&cfg, steer, fbb, beamformer.into(), delta)?;
            emit(&csv, out.as_deref())
        }
        Command::SquintTable {
            steer,
            beamformer,
            delta,
            out,
        } => {
            let csv = cmd_squint_table(&cfg, steer, beamformer.into(), delta)?;
            emit(&csv, out.as_deref())
        }
        Command::Optimize {
            steer,
            include_carrier,
            out,
        } => {
            let (trace, _rows, summary) = optimize_angle(&cfg, steer, include_carrier)?;
            emit(&trace_csv(&trace), out.as_deref())?;
            println!("{}", optimize_summary_line(&summary));
            Ok(())
        }
        Command::Sweep {
            include_carrier,
            out,
        } => {
            let bundle = cmd_sweep(&cfg, include_carrier)?;
            fs::create_dir_all(&out)?;
            let mut json = serde_json::to_string_pretty(&bundle)
                .map_err(|e| Error::config(e.to_string()))?;
            json.push('\n');
            fs::write(out.join("bundle.json"), json)?;
            for (i, &steer) in bundle.steer_deg_list.iter().enumerate() {
                let tag = format!("{steer:.0}");
                fs::write(
                    out.join(format!("squint_{tag}.csv")),
                    squint_rows_csv(&bundle.squint_tables[i]),
                )?;
                fs::write(
                    out.join(format!("trace_{tag}.csv")),
                    trace_csv(&bundle.traces[i]),
                )?;
                println!("{}", optimize_summary_line(&bundle.optimum_delays[i]));
            }
            Ok(())
        }
        Command::ExportTaps {
            fraction,
            order,
            out,
        } => {
            let csv = cmd_export_taps(fraction, order)?;
            emit(&csv, out.as_deref())
        }
        Command::ShowConfig => {
            print!("{}", serialize_config(&cfg));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Capacity(msg)) => {
            eprintln!("error: delay capacity exceeded: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
