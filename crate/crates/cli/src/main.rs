use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use delib_core::grouping::Strategy;
use delib_core::harness::{run_experiment, run_replication, Condition, RunRecord};
use delib_core::plot::{figure_data, render_svg, Figure};
use delib_core::records::{load_records, persist_records};
use delib_core::rules::Rule;
use delib_core::{report, Error, ExperimentConfig};

/// Deliberation and multi-winner voting simulator.
#[derive(Parser)]
#[command(name = "delib", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records and a report.
    Run(RunArgs),
    /// Check a configuration file without running it.
    Validate(ConfigArgs),
    /// Print summary tables for a records file.
    Report {
        /// Records file written by `run` (records.jsonl).
        records: PathBuf,
        /// Print the aggregate report as JSON instead of tables.
        #[arg(long)]
        json: bool,
    },
    /// Render one figure from a records file as SVG.
    Plot {
        records: PathBuf,
        /// variance, ur, rr, uragg, vs, cc_approvals or disagreement.
        figure: String,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a single replication and narrate what happens.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Comma-separated strategy names.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    /// Comma-separated rule names.
    #[arg(long, value_delimiter = ',')]
    rules: Option<Vec<Rule>>,
    /// Extra `key=value` overrides in TOML syntax, e.g. `population.phi=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long, env = "DELIB_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    /// Append to existing record files instead of replacing them.
    #[arg(long)]
    append: bool,
}

/// Bad input exits with 2, anything that goes wrong afterwards with 1.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) | Error::Format { .. } => Failure::Input(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(input)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(r) = self.replications {
            cfg.replications = r;
        }
        if let Some(s) = &self.strategies {
            cfg.strategies = s.clone();
        }
        if let Some(r) = &self.rules {
            cfg.rules = r.clone();
        }
        for o in &self.overrides {
            cfg.set(o).map_err(input)?;
        }
        cfg.validate().map_err(input)?;
        Ok(cfg)
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(runtime)
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = args.config.resolve()?;
    let out = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display())).map_err(runtime)?;
    let (records, report) = run_experiment(&cfg, args.threads).map_err(runtime)?;
    let records_path = out.join("records.jsonl");
    persist_records(&records, &records_path, args.append).map_err(runtime)?;
    let text = report::render(&report);
    write(&out.join("report.json"), &serde_json::to_string_pretty(&report).map_err(runtime)?)?;
    write(&out.join("report.txt"), &text)?;
    write(&out.join("config.toml"), &cfg.to_toml())?;
    print!("{text}");
    eprintln!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn cmd_validate(args: &ConfigArgs) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let p = &cfg.population;
    println!(
        "ok: n={} ({} + {}), m={}, k={}, phi={}, g={}, rounds={}, {} strategies, {} rules, {} replications, seed {}",
        p.n(),
        p.n_maj,
        p.n_min,
        p.m,
        p.k,
        p.phi,
        cfg.g,
        cfg.rounds,
        cfg.strategies.len(),
        cfg.rules.len(),
        cfg.replications,
        cfg.master_seed
    );
    Ok(())
}

fn load_nonempty(path: &Path) -> Result<Vec<RunRecord>, Failure> {
    let records = load_records(path).map_err(input)?;
    if records.is_empty() {
        return Err(input(anyhow!("{} holds no records", path.display())));
    }
    Ok(records)
}

fn cmd_report(path: &Path, json: bool) -> Result<(), Failure> {
    let records = load_nonempty(path)?;
    let report = delib_core::harness::aggregate(&records)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(runtime)?);
    } else {
        print!("{}", report::render(&report));
    }
    Ok(())
}

fn cmd_plot(path: &Path, figure: &str, out: Option<&Path>) -> Result<(), Failure> {
    let figure: Figure = figure.parse()?;
    let records = load_nonempty(path)?;
    let svg = render_svg(&figure_data(&records, figure)?);
    match out {
        Some(p) => write(p, &svg),
        None => {
            print!("{svg}");
            Ok(())
        }
    }
}

fn demo_transcript(seed: u64) -> Result<String, Failure> {
    let cfg = ExperimentConfig {
        replications: 1,
        master_seed: seed,
        ..Default::default()
    };
    let records = run_replication(&cfg, 0)?;
    let p = &cfg.population;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} voters ({} majority, {} minority), {} candidates, committees of {}, seed {seed}",
        p.n(),
        p.n_maj,
        p.n_min,
        p.m,
        p.k
    );
    let _ = writeln!(out, "eligible profile found after {} attempts", records[0].attempts);
    let _ = writeln!(
        out,
        "variance of utilities before deliberation {:.4}",
        records[0].consensus.utility_variance
    );
    for c in Condition::all() {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.strategy == c).collect();
        let Some(first) = rows.first() else { continue };
        let _ = writeln!(
            out,
            "\n[{c}] variance {:.4}, minority/majority ballot disagreement {:.3}",
            first.consensus.utility_variance, first.consensus.intergroup_disagreement
        );
        for r in rows {
            let base = records.iter().find(|b| b.strategy == Condition::INITIAL && b.rule == r.rule).expect("baseline");
            let members: Vec<String> = r.committee.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(
                out,
                "  {:<4} {{{}}}  UR {:.3}  RR {:.3}  URagg {:.3} ({:+.3})  EJR {}  PJR {}  minority kept {}",
                r.rule.name().to_uppercase(),
                members.join(","),
                r.scores.ur,
                r.scores.rr,
                r.scores.uragg,
                r.scores.uragg - base.scores.uragg,
                if r.scores.ejr_ok { "yes" } else { "no" },
                if r.scores.pjr_ok { "yes" } else { "no" },
                r.scores.minority_preserved
            );
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Report { records, json } => cmd_report(records, *json),
        Command::Plot { records, figure, out } => cmd_plot(records, figure, out.as_deref()),
        Command::Demo { seed } => demo_transcript(*seed).map(|t| print!("{t}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
