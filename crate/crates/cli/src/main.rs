use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dcgpann::data::{FetchOutcome, DEFAULT_PMLB_URL};
use dcgpann::DotMode;
use dcgpann_cli::{cache_dir, commands, CliError, ExperimentConfig, Overrides, CACHE_ENV};

#[derive(Parser)]
#[command(
    name = "dcgpann",
    version,
    about = "Evolve and train differentiable CGP neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Download a PMLB regression dataset into the cache.
    Fetch {
        name: String,
        #[arg(long, env = CACHE_ENV)]
        cache_dir: Option<PathBuf>,
        /// Download URL; `{name}` is replaced by the dataset name.
        #[arg(long, env = "DCGPANN_PMLB_URL", default_value = DEFAULT_PMLB_URL)]
        url: String,
    },
    /// Run the memetic search, then retrain the template and every iteration's best topology.
    Evolve(RunArgs),
    /// Train random genomes with the same epoch budget.
    Baseline(RunArgs),
    /// Plain SGD against SGD perturbed by periodic cumulative mutations.
    DemoPerturb(RunArgs),
    /// Print topology statistics of a genome and write its DOT graph.
    Analyze {
        genome: PathBuf,
        #[arg(long, default_value = "all-active")]
        mode: DotMode,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    Overrides {
        out_dir: args.out.clone(),
        seed: args.seed,
        cache_dir: args.cache_dir.clone(),
    }
    .apply(&mut cfg);
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fetch {
            name,
            cache_dir: dir,
            url,
        } => {
            let dir = cache_dir(dir.as_deref());
            match commands::fetch(&name, &dir, &url)? {
                FetchOutcome::CacheHit(p) => println!("cache hit: {}", p.display()),
                FetchOutcome::Downloaded(p) => println!("downloaded: {}", p.display()),
            }
        }
        Command::Evolve(args) => {
            let cfg = load(&args)?;
            let report = with_threads(args.threads, || commands::evolve(&cfg))??;
            for it in &report.iterations {
                println!(
                    "iteration {}: final test MSE {:.6e}, compression {:.6}",
                    it.iteration, it.final_test_mse_mean, it.stats.compression_ratio
                );
            }
            if let Some(r) = &report.evolved_vs_template {
                println!(
                    "evolved vs template: U = {}, p(less) = {:.4}, p(two-sided) = {:.4}",
                    r.u, r.p_less, r.p_two_sided
                );
            }
        }
        Command::Baseline(args) => {
            let cfg = load(&args)?;
            let report = with_threads(args.threads, || commands::baseline(&cfg))??;
            println!(
                "baseline: mean test MSE {:.6e} (std {:.6e}) over {} of {}",
                report.mean_test_mse, report.std_test_mse, report.retained, report.count
            );
            if let Some(c) = &report.evolved_vs_baseline {
                println!(
                    "evolved vs baseline: p(less) = {:.4}, p(two-sided) = {:.4}",
                    c.rank_sum.p_less, c.rank_sum.p_two_sided
                );
            }
        }
        Command::DemoPerturb(args) => {
            let cfg = load(&args)?;
            let curves = with_threads(args.threads, || commands::demo_perturb(&cfg))??;
            println!("epoch  sgd_loss      perturbed_loss");
            for (e, (a, b)) in curves.plain.iter().zip(&curves.perturbed).enumerate() {
                let mark = if curves.mutation_epochs.contains(&(e + 1)) {
                    " *"
                } else {
                    ""
                };
                println!("{:>5}  {a:.6e}  {b:.6e}{mark}", e + 1);
            }
        }
        Command::Analyze { genome, mode, out } => {
            print!("{}", commands::analyze(&genome, mode, &out)?.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
