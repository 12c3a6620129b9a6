use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use csit_dmt::report::{
    cmd_curve, cmd_figures, cmd_oracle_check, cmd_simulate, r_grid, write_dataset, Command, Dataset, Figure,
    FigureParams, Format, ReportSpec, SimulateParams,
};
use csit_dmt::rng::DEFAULT_SEED;
use csit_dmt::sim::DEFAULT_T;
use csit_dmt::{ChannelConfig, KappaMode};

#[derive(Parser)]
#[command(name = "csit-dmt", version, about = "DMT of MIMO channels with imperfect transmitter CSI")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form DMT curve, per-subset curves and the no-CSIT baseline.
    Curve {
        #[command(flatten)]
        chan: ChannelArgs,
        #[arg(long, default_value_t = 0.01)]
        r_step: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the closed form with a brute-force grid search.
    OracleCheck {
        #[command(flatten)]
        chan: ChannelArgs,
        #[arg(long, default_value_t = 0.05)]
        r_step: f64,
        #[arg(long, default_value_t = 0.02)]
        grid_step: f64,
        /// Upper end of the exponent grid (defaults to 2 + α Σ w_n).
        #[arg(long)]
        vmax: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo outage probability of the power-adaptation scheme.
    Simulate {
        #[command(flatten)]
        chan: ChannelArgs,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 10.0)]
        rho_start_db: f64,
        #[arg(long, default_value_t = 50.0)]
        rho_stop_db: f64,
        #[arg(long, default_value_t = 17)]
        rho_points: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_T)]
        t: f64,
        #[arg(long, value_enum, default_value_t = KappaArg::Calibrated)]
        kappa_mode: KappaArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Datasets for the standard figures.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=5))]
        fig: u8,
        /// Antenna count for figure 4.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Multiplexing gain for figure 4.
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ChannelArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Comma-separated alphas; overrides --alpha.
    #[arg(long, value_delimiter = ',')]
    alpha_list: Vec<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KappaArg {
    Analytic,
    Calibrated,
    Fixed,
}

fn spec(command: Command, chan: &ChannelArgs, r_step: Option<f64>, out: &OutputArgs) -> Result<ReportSpec> {
    let cfg = ChannelConfig::new(chan.m, chan.n, chan.alpha)?;
    let r_grid = match r_step {
        Some(step) => r_grid(cfg.n_rx, step)?,
        None => Vec::new(),
    };
    let spec = ReportSpec {
        command,
        cfg,
        r_grid,
        alpha_list: chan.alpha_list.clone(),
        output_path: out.out.clone(),
        format: match out.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
    };
    spec.validate()?;
    Ok(spec)
}

fn emit(data: &Dataset, out: &OutputArgs) -> Result<()> {
    let format = match out.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match &out.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_dataset(&mut w, data, format)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            write_dataset(&mut w, data, format)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Cmd::Curve { chan, r_step, out } => {
            let spec = spec(Command::Curve, &chan, Some(r_step), &out)?;
            emit(&cmd_curve(&spec)?, &out)?;
        }
        Cmd::OracleCheck { chan, r_step, grid_step, vmax, out } => {
            let spec = spec(Command::OracleCheck, &chan, Some(r_step), &out)?;
            let check = cmd_oracle_check(&spec, grid_step, vmax)?;
            emit(&check.data, &out)?;
            if !check.all_pass() {
                eprintln!("oracle check failed at {} of {} points", check.failures, check.rows);
                return Ok(false);
            }
        }
        Cmd::Simulate { chan, r, rho_start_db, rho_stop_db, rho_points, trials, t, kappa_mode, seed, workers, out } => {
            if trials == 0 {
                bail!("--trials must be positive");
            }
            if let Some(w) = workers {
                rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
            }
            let spec = spec(Command::Simulate, &chan, None, &out)?;
            let params = SimulateParams {
                r,
                rho_start_db,
                rho_stop_db,
                rho_points,
                trials,
                t,
                kappa_mode: match kappa_mode {
                    KappaArg::Analytic => KappaMode::Analytic,
                    KappaArg::Calibrated => KappaMode::Calibrated,
                    KappaArg::Fixed => KappaMode::Fixed,
                },
                seed,
            };
            emit(&cmd_simulate(&spec, &params)?, &out)?;
        }
        Cmd::Figures { fig, k, r, out } => {
            let figure = Figure::from_number(fig).context("unknown figure")?;
            emit(&cmd_figures(figure, &FigureParams { k, r })?, &out)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
