//! `ehh`: generate benchmark data, train, evaluate and inspect EHH NARX
//! models. Every run writes a manifest that `ehh replay` can verify.

mod commands;
mod config;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ehh::trainer::NeighbourhoodMode;

use crate::config::{Overrides, RunConfig, SizeSetting};

#[derive(Parser)]
#[command(
    name = "ehh",
    version,
    about = "Efficient hinging hyperplanes networks for NARX identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Column,
    Element,
}

impl From<Mode> for NeighbourhoodMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Column => NeighbourhoodMode::Column,
            Mode::Element => NeighbourhoodMode::Element,
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self, extra: Overrides) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        cfg.apply(&Overrides {
            seed: self.seed,
            ..extra
        });
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded benchmark train/test CSVs.
    GenBenchmark {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train with restarts (and an optional size sweep) and save the best model.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        /// Scores restarts by free-run VAF when given.
        #[arg(long)]
        test_data: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Maximum training cycles.
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Comma-separated `QxC` sizes: q offsets per regressor and C intermediates.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<SizeSetting>>,
    },
    /// One-step and free-run metrics plus parameter counts.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Also write the report as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank the ANOVA functions of a model by sigma.
    Anova {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Training data the sigmas are computed on.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        /// Also write the table as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write `k,y,y_s` free-run simulation data for plotting.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep only the last N samples.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Re-run a recorded command and compare output hashes.
    Replay { manifest: PathBuf },
}

fn write_json(path: &std::path::Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenBenchmark { common, out } => {
            let cfg = common.resolve(Overrides::default())?;
            let out = commands::default_out(out);
            let m = commands::gen_benchmark(cfg, &out)?;
            for f in &m.outputs {
                println!("{} {}", f.sha256, f.path.display());
            }
        }
        Command::Train {
            common,
            data,
            test_data,
            out,
            restarts,
            cycles,
            mode,
            grid,
        } => {
            let cfg = common.resolve(Overrides {
                restarts,
                cycles,
                mode: mode.map(Into::into),
                grid,
                ..Overrides::default()
            })?;
            let out = commands::default_out(out);
            let m = commands::train_cmd(cfg, &data, test_data.as_deref(), &out)?;
            let sel = &m.candidates[m.selected.unwrap()];
            println!(
                "selected q={} M={} seed={}: {} cycles, {} neurons",
                sel.q,
                sel.neurons,
                sel.seed,
                sel.cycles.unwrap_or(0),
                sel.active_neurons.unwrap_or(0)
            );
            if let Some(r) = &m.test_report {
                print!("{}", report::render_eval(r));
            }
            println!("model written to {}", out.join(commands::MODEL_FILE).display());
        }
        Command::Eval {
            common,
            model,
            data,
            out,
        } => {
            let cfg = common.resolve(Overrides::default())?;
            let r = commands::eval_cmd(&model, &data, &cfg)?;
            print!("{}", report::render_eval(&r));
            if let Some(p) = out {
                write_json(&p, &r)?;
            }
        }
        Command::Anova {
            common,
            model,
            data,
            top_k,
            out,
        } => {
            let cfg = common.resolve(Overrides::default())?;
            let rows = commands::anova_cmd(&model, &data, &cfg, top_k)?;
            print!("{}", report::render_anova(&rows));
            if let Some(p) = out {
                write_json(&p, &rows)?;
            }
        }
        Command::Export {
            common,
            model,
            data,
            out,
            window,
        } => {
            let cfg = common.resolve(Overrides::default())?;
            let rows = commands::export_cmd(&model, &data, &cfg, &out, window)?;
            println!("{rows} rows written to {}", out.display());
        }
        Command::Replay { manifest } => {
            commands::replay_cmd(&manifest)?;
            println!("replay matches {}", manifest.display());
        }
    }
    Ok(())
}

/// Exit codes by error class.
mod exit {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const SPEC_MISMATCH: u8 = 5;
    pub const TRAINING: u8 = 6;
    pub const NUMERIC: u8 = 7;
    pub const REPLAY: u8 = 8;
}

fn library_code(e: &ehh::Error) -> u8 {
    use ehh::Error::*;
    match e {
        Io(_) => exit::IO,
        Json(_) | Parse { .. } | MissingColumn { .. } | UnsupportedVersion(_) | InvalidNetwork(_) => exit::PARSE,
        SpecMismatch { .. } | DimensionMismatch { .. } => exit::SPEC_MISMATCH,
        InvalidConfig(_) => exit::USAGE,
        NumericOverflow { .. } | ZeroVariance => exit::NUMERIC,
        ConstantDimension(_)
        | InsufficientData { .. }
        | ResourceBound { .. }
        | DegenerateQuantiles { .. }
        | GenerationStall { .. }
        | NonConvergence(_)
        | Saturated { .. }
        | NoValidLambda => exit::TRAINING,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<commands::ReplayMismatch>() {
            return exit::REPLAY;
        }
        if cause.is::<commands::TrainingFailed>() {
            return exit::TRAINING;
        }
        if let Some(e) = cause.downcast_ref::<ehh::Error>() {
            return library_code(e);
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            return if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                exit::IO
            } else {
                exit::PARSE
            };
        }
        if cause.is::<toml::de::Error>() || cause.is::<serde_json::Error>() {
            return exit::PARSE;
        }
        if cause.is::<std::io::Error>() {
            return exit::IO;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
