use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ineqlab_cli::config::{ExperimentConfig, Format};
use ineqlab_cli::run::{csv_row, EXPERIMENTS};
use ineqlab_cli::verify::render;
use ineqlab_cli::{run, scan, verify, CliError, Sweep, SCHEMA};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ineqlab", version, about = "Evaluate X_p-type inequalities, embeddings and trace inequalities")]
struct Cli {
    /// Omit wall-clock timings so that reports are byte-identical across runs.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its JSON report.
    Run(RunArgs),
    /// Run an experiment once per value of a swept parameter and write a CSV curve.
    Scan {
        #[command(flatten)]
        args: RunArgs,
        /// field=v1,v2,..., field=lin:a..b:count or field=geo:a..b:count.
        #[arg(long, required = true)]
        sweep: Vec<String>,
    },
    /// Run invariant suites and print a pass/fail table.
    Verify {
        /// Suite name, or "all".
        #[arg(default_value = "all")]
        suite: String,
        /// Print the checks as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// List experiment names.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name; optional when the config file names one.
    experiment: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Box radius R.
    #[arg(long = "R", alias = "radius")]
    radius: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Multiplier K of the PSD counterexample.
    #[arg(long = "K")]
    big_k: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    modulus: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Append one CSV row of report scalars to this file.
    #[arg(long)]
    csv_append: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(e) = &self.experiment {
            c.experiment = e.clone();
        }
        if c.experiment.is_empty() {
            bail!(CliError::Config("no experiment named; pass one or use --config".into()));
        }
        macro_rules! overlay {
            ($($field:ident),*) => { $( if self.$field.is_some() { c.$field = self.$field.clone(); } )* };
        }
        overlay!(p, q, m, n, k, d, radius, s, theta, big_k, trials, modulus, seed, budget, out, format, csv_append);
        Ok(c)
    }
}

fn emit(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<u8> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global().context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Run(args) => {
            let config = args.config()?;
            let (doc, eval) = run(&config, cli.deterministic)?;
            let text = match config.format.unwrap_or_default() {
                Format::Json => serde_json::to_string_pretty(&doc)? + "\n",
                Format::Csv => {
                    let (header, row) = csv_row(&eval)?;
                    format!("{header}\n{row}\n")
                }
            };
            emit(config.out.as_deref(), &text)?;
            if let Some(path) = &config.csv_append {
                let (header, row) = csv_row(&eval)?;
                let fresh = std::fs::metadata(path).map_or(true, |m| m.len() == 0);
                let mut file = OpenOptions::new().create(true).append(true).open(path).with_context(|| format!("opening {path}"))?;
                if fresh {
                    writeln!(file, "{header}")?;
                }
                writeln!(file, "{row}")?;
            }
            Ok(if eval.has_warnings() { 2 } else { 0 })
        }
        Command::Scan { args, sweep } => {
            let config = args.config()?;
            let sweeps = sweep.iter().map(|s| Sweep::parse(s)).collect::<Result<Vec<_>, _>>()?;
            let text = scan(&config, &sweeps)?;
            emit(config.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Verify { suite, json } => {
            let checks = verify(&suite)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&checks)?);
            } else {
                print!("{}", render(&checks));
                let failed = checks.iter().filter(|c| !c.passed).count();
                println!("{} checks, {failed} failed", checks.len());
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 })
        }
        Command::List => {
            EXPERIMENTS.iter().for_each(|e| println!("{e}"));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let kind = err.downcast_ref::<CliError>().map_or("error", CliError::kind);
            let doc = json!({ "schema": SCHEMA, "error": { "kind": kind, "message": format!("{err:#}") } });
            eprintln!("{doc}");
            ExitCode::from(1)
        }
    }
}
