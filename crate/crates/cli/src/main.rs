use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use visilat::counting::{
    count_visible_direct_with_caps, count_visible_sieve_with_caps, mc_estimate, Caps, CountResult,
};
use visilat::density::{exact_window_density_capped, predicted_density, DEFAULT_CRT_CAP};
use visilat::ideals::PointTuple;
use visilat::numfield::FieldSpec;
use visilat::primes::{primes_up_to_norm_seeded, PrimeWindow};
use visilat_cli::config::{
    build_field, parse_field, parse_region, parse_set, parse_set_json, read_set_file, ExperimentConfig,
};
use visilat_cli::error::CliError;
use visilat_cli::report::{emit_csv, lemma_check, CountJson, FieldJson, OracleJson, PredictionJson, PrimeJson};

#[derive(Parser)]
#[command(name = "visilat", version, about = "Densities of lattice points visible from a finite set")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Field, dimension and the set `S`, shared by most subcommands.
#[derive(clap::Args)]
struct Problem {
    /// Field descriptor: JSON, or `rational`, `quadratic:D`, `monogenic:c0,c1,...`.
    #[arg(long)]
    field: String,
    #[arg(long)]
    m: usize,
    /// `S` as inline JSON, e.g. `[[[0,0],[0,0]]]`. Defaults to the origin.
    #[arg(long, conflicts_with = "s_file")]
    s: Option<String>,
    /// JSON file holding `S`.
    #[arg(long)]
    s_file: Option<PathBuf>,
}

impl Problem {
    fn resolve(&self) -> Result<(FieldSpec, Vec<PointTuple>), CliError> {
        let field = build_field(&parse_field(&self.field)?)?;
        let raw = match (&self.s, &self.s_file) {
            (Some(s), _) => parse_set_json(s)?,
            (None, Some(path)) => read_set_file(path)?,
            (None, None) => vec![vec![vec![0; field.degree()]; self.m]],
        };
        if self.m < 2 {
            return Err(CliError::InvalidConfig(format!("m must be at least 2, got {}", self.m)));
        }
        let set = parse_set(&raw, self.m, field.degree())?;
        Ok((field, set))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMode {
    Direct,
    Sieve,
    Mc,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a field: degree, basis, discriminant.
    Field {
        #[arg(long)]
        field: String,
    },
    /// List prime ideals by norm as JSON lines.
    Primes {
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 100)]
        max_norm: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rigorous interval for the predicted density.
    Predict {
        #[command(flatten)]
        problem: Problem,
        #[arg(long = "x", default_value_t = 10_000)]
        cutoff: u64,
    },
    /// Count visible tuples in one region.
    Count {
        #[command(flatten)]
        problem: Problem,
        /// `cube:L=20` or `ball:R=30`.
        #[arg(long)]
        region: String,
        #[arg(long, value_enum, default_value = "sieve")]
        mode: CountMode,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Unimodular integer matrix as JSON, e.g. `[[1,1],[0,1]]`.
        #[arg(long)]
        basis_transform: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact density over a finite window of primes, computed two ways.
    Oracle {
        #[command(flatten)]
        problem: Problem,
        /// Use the primes above the first `t` rational primes.
        #[arg(long, conflicts_with = "primes")]
        t: Option<usize>,
        /// Use the primes above these rational primes, e.g. `2,5`.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_CRT_CAP)]
        cap: u64,
    },
    /// Normalized error of ideal lattice-point counts in regions.
    LemmaCheck {
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 100)]
        max_norm: u64,
        /// Repeatable; one entry per region size.
        #[arg(long = "region", required = true)]
        regions: Vec<String>,
    },
    /// Run a full experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV export path; overrides the config's `csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn write_or_print<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|source| CliError::Io { context: format!("writing {}", path.display()), source }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Field { field } => {
            print_json(&FieldJson::from(&build_field(&parse_field(&field)?)?));
        }
        Command::Primes { field, max_norm, seed } => {
            let field = build_field(&parse_field(&field)?)?;
            for p in primes_up_to_norm_seeded(&field, max_norm, seed)? {
                print_json(&PrimeJson::from(&p));
            }
        }
        Command::Predict { problem, cutoff } => {
            let (field, set) = problem.resolve()?;
            let iv = predicted_density(&field, &set, problem.m, cutoff)?;
            print_json(&PredictionJson::from(&iv));
        }
        Command::Count { problem, region, mode, samples, seed, basis_transform, out } => {
            let (field, set) = problem.resolve()?;
            let transform = basis_transform
                .map(|t| serde_json::from_str(&t))
                .transpose()
                .map_err(|e| CliError::InvalidConfig(format!("basis transform: {e}")))?;
            let region = parse_region(&region, field.degree(), transform)?;
            let start = Instant::now();
            let caps = Caps::default();
            let result: CountResult = match mode {
                CountMode::Direct => count_visible_direct_with_caps(&field, &set, problem.m, &region, &caps)?,
                CountMode::Sieve => count_visible_sieve_with_caps(&field, &set, problem.m, &region, &caps)?,
                CountMode::Mc => mc_estimate(&field, &set, problem.m, &region, samples, seed)?,
            };
            let row = CountJson::new(&result, None, start.elapsed().as_secs_f64() * 1000.0);
            write_or_print(&row, out.as_ref())?;
        }
        Command::Oracle { problem, t, primes, cap } => {
            let (field, set) = problem.resolve()?;
            let window = match t {
                Some(t) => PrimeWindow::first_t(&field, t)?,
                None if !primes.is_empty() => PrimeWindow::from_rational_primes(&field, &primes)?,
                None => return Err(CliError::InvalidConfig("give --t or --primes".into())),
            };
            let exact = exact_window_density_capped(&field, &set, problem.m, &window, cap)?;
            print_json(&OracleJson::from(&exact));
            if !exact.agrees() {
                return Err(CliError::ToleranceFailure("product and enumeration disagree".into()));
            }
        }
        Command::LemmaCheck { field, max_norm, regions } => {
            let field = build_field(&parse_field(&field)?)?;
            let regions = regions
                .iter()
                .map(|r| parse_region(r, field.degree(), None))
                .collect::<Result<Vec<_>, _>>()?;
            write_or_print(&lemma_check(&field, &regions, max_norm)?, None)?;
        }
        Command::Run { config, out, csv } => {
            let mut config = ExperimentConfig::from_file(&config)?;
            if out.is_some() {
                config.output = out;
            }
            if csv.is_some() {
                config.csv = csv;
            }
            let report = visilat_cli::report::run_experiment(&config)?;
            match &config.output {
                Some(path) => report.write_json(path)?,
                None => write_or_print(&report, None)?,
            }
            if let Some(path) = &config.csv {
                emit_csv(&report, path)?;
            }
            for f in report.failures.iter().chain(&report.errors) {
                log::error!("{f}");
            }
            return Ok(report.exit_code());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(threads) = std::env::var("VISILAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("VISILAT_THREADS ignored: {e}");
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
