use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bslab_core::acceptance::run_acceptance;
use bslab_core::config::ExperimentConfig;
use bslab_core::report::Report;
use bslab_core::run::{run, Command};
use bslab_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bslab", version, about = "Benjamini-Schramm and Plancherel convergence experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Euclidean lattice families.
    #[command(subcommand)]
    Euclid(EuclidCmd),
    /// Finite-index subgroups of free, surface and free abelian groups.
    #[command(subcommand)]
    Schreier(SchreierCmd),
    /// Congruence-type covers of the genus-two octagon surface.
    #[command(subcommand)]
    Hyp(HypCmd),
    /// Z-covers in the abelian model.
    #[command(subcommand)]
    Zcover(ZCoverCmd),
    /// Built-in suites.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Subcommand)]
enum EuclidCmd {
    Scan(RunArgs),
}

#[derive(Subcommand)]
enum SchreierCmd {
    Scan(RunArgs),
}

#[derive(Subcommand)]
enum HypCmd {
    /// Mean injectivity radius and systole per subgroup.
    Injrad(RunArgs),
    /// Probability that the injectivity radius is at most R.
    Bsprob(RunArgs),
    /// Injectivity radius against the conjugate-in-compact-set criterion.
    Prop24(RunArgs),
}

#[derive(Subcommand)]
enum ZCoverCmd {
    Check(RunArgs),
}

#[derive(Subcommand)]
enum SuiteCmd {
    Acceptance(SuiteArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the config's seed.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Directory for report.csv / report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Criterion numbers to run (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn experiment(command: Command, args: &RunArgs) -> Result<i32, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config: ExperimentConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => return Err(Error::Parse(e.to_string())),
    };
    if let Some(seed) = args.seed_override {
        config.set_seed(seed);
    }
    config.validate()?;
    let out = args.out.clone().or_else(|| config.out().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("bslab-out"));
    let report = run(&config, command)?;
    report.write(&out)?;
    summarize(&report, &out);
    Ok(report.exit_code())
}

fn summarize(report: &Report, out: &Path) {
    println!("{}: {} rows, {} failures -> {}", report.command, report.rows.len(), report.failures.len(), out.display());
    for f in &report.failures {
        match f.n {
            Some(n) => eprintln!("  n={n}: {}", f.error),
            None => eprintln!("  {}", f.error),
        }
    }
}

fn acceptance(args: &SuiteArgs) -> Result<i32, Error> {
    let results = run_acceptance(&args.only);
    for c in &results {
        println!("{}", c.line());
    }
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if let Some(out) = &args.out {
        let mut report = Report::new("suite", "suite acceptance", vec!["id", "name", "passed", "seconds", "limit_seconds", "detail"]);
        for c in &results {
            report.push(vec![
                c.id.to_string(),
                c.name.to_string(),
                c.passed.to_string(),
                format!("{:.3}", c.seconds),
                c.limit_seconds.to_string(),
                c.detail.clone(),
            ]);
        }
        report.write(out)?;
    }
    Ok(if failed == 0 { 0 } else { 4 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&Error::invalid(format!("thread pool: {e}")));
        }
    }
    let result = match &cli.command {
        Top::Euclid(EuclidCmd::Scan(a)) => experiment(Command::EuclidScan, a),
        Top::Schreier(SchreierCmd::Scan(a)) => experiment(Command::SchreierScan, a),
        Top::Hyp(HypCmd::Injrad(a)) => experiment(Command::HypInjRad, a),
        Top::Hyp(HypCmd::Bsprob(a)) => experiment(Command::HypBsProb, a),
        Top::Hyp(HypCmd::Prop24(a)) => experiment(Command::HypProp24, a),
        Top::Zcover(ZCoverCmd::Check(a)) => experiment(Command::ZCoverCheck, a),
        Top::Suite(SuiteCmd::Acceptance(a)) => acceptance(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}
