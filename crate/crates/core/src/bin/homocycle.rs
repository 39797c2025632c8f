use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use homocycle::expansion::Mode;
use homocycle::report::{self, AnalysisConfig, Pipeline};
use homocycle::{Error, Result};

#[derive(Parser)]
#[command(name = "homocycle", version, about = "Counting prime cycles of a weighted graph by homology class")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, β-derivatives and expansion coefficients in both normalisations.
    Analyze(Common),
    /// Exact π(T, α) over the T grid and class window.
    Census(Common),
    /// Census counts against the normalized expansion.
    Verify(Common),
    /// Lattice and continued-fraction diagnostics for cycle lengths.
    Conditions(Common),
    /// Closed forms for roses and the loop-plus-double-bond graph.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// Graph document (JSON).
    graph: PathBuf,
    #[arg(long, default_value = "normalized")]
    mode: String,
    /// Largest T; the grid is 8, 10, … up to this value.
    #[arg(long)]
    tmax: Option<f64>,
    /// Explicit T grid, comma separated (overrides --tmax).
    #[arg(long, value_delimiter = ',')]
    tgrid: Option<Vec<f64>>,
    #[arg(long)]
    alpha_radius: Option<i64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    budget_mb: Option<u64>,
    /// Output directory for report.json and table.csv; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<AnalysisConfig> {
        let mut c = AnalysisConfig {
            mode: self.mode.parse::<Mode>()?,
            out: self.out.clone(),
            n_max: self.nmax,
            ..AnalysisConfig::default()
        };
        if let Some(t) = self.tmax {
            c.t_grid = (4..).map(|k| 2.0 * k as f64).take_while(|&x| x <= t).collect();
            if c.t_grid.last() != Some(&t) {
                c.t_grid.push(t);
            }
        }
        if let Some(g) = &self.tgrid {
            c.t_grid = g.clone();
        }
        if let Some(r) = self.alpha_radius {
            c.alpha_radius = r;
        }
        if let Some(b) = self.budget_mb {
            c.budget_mb = b;
        }
        if let Ok(t) = std::env::var("HOMOCYCLE_THREADS") {
            c.threads = Some(t.parse().map_err(|_| Error::Parse(format!("HOMOCYCLE_THREADS={t:?}")))?);
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(out: Option<&PathBuf>, json: String, csv: Option<String>) -> Result<()> {
    match out {
        Some(dir) => report::write_outputs(dir, &json, csv.as_deref()),
        None => match writeln!(std::io::stdout().lock(), "{json}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    let (Command::Analyze(common)
    | Command::Census(common)
    | Command::Verify(common)
    | Command::Conditions(common)
    | Command::Oracle(common)) = &cli.command;
    let config = common.config()?;
    let pipeline = Pipeline::from_document(&report::read_document(&common.graph)?)?;
    let out = config.out.as_ref();
    match &cli.command {
        Command::Analyze(_) => {
            let rep = report::cmd_analyze(&pipeline, &config)?;
            emit(out, report::to_json(&rep)?, Some(report::c1_csv(&rep)?))
        }
        Command::Census(_) => {
            let rep = report::cmd_census(&pipeline, &config)?;
            emit(out, report::to_json(&rep)?, Some(report::census_csv(&rep)?))
        }
        Command::Verify(_) => {
            if config.mode != Mode::Normalized {
                return Err(Error::Parse("verify compares counts with the normalized expansion only".into()));
            }
            let rep = report::cmd_verify(&pipeline, &config)?;
            for w in &rep.residuals.warnings {
                eprintln!("warning: {w}");
            }
            emit(out, report::to_json(&rep)?, Some(report::residual_csv(&rep.residuals)?))
        }
        Command::Conditions(_) => emit(out, report::to_json(&report::cmd_conditions(&pipeline)?)?, None),
        Command::Oracle(_) => emit(out, report::to_json(&report::cmd_oracle(&pipeline)?)?, None),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
