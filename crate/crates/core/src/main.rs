use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use nbba::grid::{generate_instance, generate_map};
use nbba::harness::{
    aggregate, run_experiment_with, write_results, write_violation, ExperimentConfig, HarnessError,
    VerifyReport,
};
use nbba::search::Algorithm;

#[derive(Parser)]
#[command(
    version,
    about = "Bounded-suboptimal search with batched heuristic evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a config.json skeleton holding every default.
    Gen {
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment sweep and write runs.csv, aggregates.csv and config.json.
    Run(RunArgs),
    /// Check a runs.csv (or the directory holding it) against the planner invariants.
    Verify { path: PathBuf },
    /// Generate a sand-trap map and write it in binary form.
    Map(MapArgs),
}

#[derive(Args)]
struct MapArgs {
    #[arg(long, default_value_t = 512)]
    width: u32,
    #[arg(long, default_value_t = 512)]
    height: u32,
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// Also draw a start/goal pair with this seed and print it.
    #[arg(long)]
    instance_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Square map side length.
    #[arg(long)]
    map_size: Option<u32>,
    #[arg(long)]
    sand_density: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    instances: Option<u32>,
    #[arg(long)]
    w_so: Option<f64>,
    #[arg(long)]
    w_h: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    batch_sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k_fast: Option<Vec<f64>>,
    #[arg(long)]
    k_nn: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    max_expansions: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the exact optimum per instance, and with it the bound check.
    /// Needed for maps beyond the oracle's size limit.
    #[arg(long)]
    no_oracle: bool,
    /// Suppress per-run progress on stderr.
    #[arg(long)]
    quiet: bool,
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.map_size {
            c.map_width = s;
            c.map_height = s;
        }
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = &self.$flag {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(
            sand_density => sand_density,
            seed => master_seed,
            instances => num_instances,
            w_so => w_so,
            w_h => w_h,
            batch_sizes => batch_sizes,
            k_fast => k_fast_levels,
            k_nn => k_nn,
            algorithms => algorithms,
            max_expansions => max_expansions,
            out => output_path,
            workers => workers
        );
        if self.seed.is_some() || self.instances.is_some() {
            c.instance_seeds.clear();
        }
        if self.no_oracle {
            c.verify_bound = false;
        }
        c.validate()?;
        Ok(c)
    }
}

fn gen(out: Option<&PathBuf>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(&ExperimentConfig::default().resolved())? + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn map(args: &MapArgs) -> anyhow::Result<()> {
    let map = generate_map(args.width, args.height, args.density, args.seed)?;
    map.save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "{}x{} map, {} sand cells, written to {}",
        map.width(),
        map.height(),
        map.sand_count(),
        args.out.display()
    );
    if let Some(seed) = args.instance_seed {
        let min_sep = args.width.max(args.height) as u64 / 2;
        let inst = generate_instance(std::sync::Arc::new(map), seed, min_sep)?;
        println!(
            "start {} goal ({},{})",
            inst.start, inst.goal.x, inst.goal.y
        );
    }
    Ok(())
}

fn run(args: &RunArgs) -> anyhow::Result<ExitCode> {
    let config = args.config()?;
    let quiet = args.quiet;
    let progress = move |r: &nbba::harness::RunRecord, done: usize, total: usize| {
        if !quiet {
            eprintln!(
                "[{done}/{total}] {} k={} B={} instance {}: {} expansions, {}",
                r.algorithm,
                r.k_fast,
                r.batch_size.map_or("-".into(), |b| b.to_string()),
                r.instance_id,
                r.expansions,
                r.status
            );
        }
    };
    match run_experiment_with(&config, &progress) {
        Ok(records) => {
            let rows = aggregate(&records)?;
            write_results(&config.output_path, &config, &records, &rows)?;
            println!(
                "{} runs written to {}",
                records.len(),
                config.output_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(HarnessError::BoundViolation(report)) => {
            eprintln!("error: {}", HarnessError::BoundViolation(report.clone()));
            let (json, map) = write_violation(&config.output_path, &report)?;
            eprintln!(
                "reproduction data: {} and {}",
                json.display(),
                map.display()
            );
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(path: &Path) -> anyhow::Result<ExitCode> {
    let report = VerifyReport::from_path(path)?;
    for note in &report.notes {
        println!("  {note}");
    }
    for check in &report.checks {
        println!("{check}");
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen { out } => gen(out.as_ref()).map(|_| ExitCode::SUCCESS),
        Command::Run(args) => run(args),
        Command::Verify { path } => verify(path),
        Command::Map(args) => map(args).map(|_| ExitCode::SUCCESS),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
