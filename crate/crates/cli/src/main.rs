use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod run;
mod verify;

use config::{ConfigError, FileConfig, ImageFile, Method, RunConfig, ViewportFile};

/// Julia sets of rational semigroups by full and random backward iteration.
#[derive(Parser)]
#[command(name = "semijulia", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured method and write image, grid export and report.
    Run(Overrides),
    /// Run the verification checks on the configured semigroup.
    Verify(Overrides),
}

/// Every flag overrides the key of the same name in the config file.
#[derive(Args)]
struct Overrides {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example: circle, chebyshev or annulus.
    #[arg(long)]
    example: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Base seed; chain k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start point as re,im.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Option<Vec<f64>>,
    /// Generator weights, comma separated.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    /// Steps per chain.
    #[arg(long)]
    n: Option<usize>,
    /// Full tree depth.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    max_atoms: Option<usize>,
    /// Viewport center as re,im.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    color_map: Option<String>,
    /// linear or log.
    #[arg(long)]
    scale: Option<String>,
}

impl Overrides {
    fn apply(self, file: &mut FileConfig) -> Result<(), ConfigError> {
        fn set<T>(slot: &mut Option<T>, value: Option<T>) {
            if value.is_some() {
                *slot = value;
            }
        }
        set(&mut file.example, self.example);
        set(&mut file.method, self.method);
        if self.seed.is_some() {
            file.seeds = None;
        }
        set(&mut file.seed, self.seed);
        set(&mut file.seeds, self.seeds);
        set(&mut file.out, self.out);
        set(&mut file.a, self.a.map(|v| pair("a", v)).transpose()?);
        set(&mut file.b, self.b);
        set(&mut file.n, self.n);
        set(&mut file.depth, self.depth);
        set(&mut file.burn_in, self.burn_in);
        set(&mut file.chains, self.chains);
        set(&mut file.threads, self.threads);
        set(&mut file.max_atoms, self.max_atoms);

        let vp = file.viewport.get_or_insert_with(ViewportFile::default);
        set(
            &mut vp.center,
            self.center
                .map(|v| pair("viewport.center", v))
                .transpose()?,
        );
        set(&mut vp.width, self.width);
        set(&mut vp.height, self.height);
        set(&mut vp.nx, self.nx);
        set(&mut vp.ny, self.ny);
        let image = file.image.get_or_insert_with(ImageFile::default);
        set(&mut image.color_map, self.color_map);
        set(&mut image.scale, self.scale);
        Ok(())
    }
}

fn pair(field: &str, v: Vec<f64>) -> Result<[f64; 2], ConfigError> {
    match v[..] {
        [re, im] => Ok([re, im]),
        _ => Err(ConfigError::new(
            field,
            format!("expected re,im but got {} numbers", v.len()),
        )),
    }
}

/// Why a command did not succeed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn config<E: std::fmt::Display>(field: &'static str) -> impl Fn(E) -> Failure {
        move |e| Failure::Config(ConfigError::new(field, e))
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

const EXIT_VERIFICATION: u8 = 1;
/// Bad configuration, and anything else that stops a run before it finishes.
const EXIT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, Failure> {
    let (overrides, forced) = match command {
        Command::Run(o) => (o, None),
        Command::Verify(o) => (o, Some(Method::Verify)),
    };
    let mut file = match &overrides.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    overrides.apply(&mut file)?;
    if forced.is_some() {
        file.method = forced;
    }
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let config = RunConfig::resolve(file, available)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.into()))?;

    if config.method == Method::Verify {
        let (report, passed) = verify::verify(&config)?;
        print!("{report}");
        return Ok(if passed {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_VERIFICATION)
        });
    }
    let report = run::run(&config)?;
    print!("{report}");
    Ok(ExitCode::SUCCESS)
}
