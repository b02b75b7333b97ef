use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparsecert::cli::{self, GenOptions, LoadedMatrix, ReportFormat, VerifyTarget};
use sparsecert::oracle::{OracleConfig, DEFAULT_BUDGET};
use sparsecert::Error;

#[derive(Parser)]
#[command(name = "sparsecert", version, about = "Sparsity-uniqueness certificates for measurement matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct GenFlags {
    /// partial_dft | partial_dct | gaussian | partial_gft | simplex_etf
    #[arg(long)]
    family: Option<String>,
    /// Number of columns (full transform size for partial families)
    #[arg(long)]
    n: Option<usize>,
    /// Number of rows
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit comma-separated row indices (overrides seeded selection)
    #[arg(long)]
    rows: Option<String>,
    /// Laplacian matrix file (partial_gft)
    #[arg(long)]
    laplacian: Option<PathBuf>,
    /// combinatorial | normalized
    #[arg(long)]
    laplacian_kind: Option<String>,
}

impl GenFlags {
    fn options(&self) -> Result<GenOptions, Error> {
        let family = self
            .family
            .clone()
            .ok_or_else(|| Error::Usage("--family is required".into()))?;
        let rows = self
            .rows
            .as_deref()
            .map(cli::parse_row_list)
            .transpose()
            .map_err(|e| Error::Usage(e.to_string()))?;
        let n = match (self.n, &self.laplacian) {
            (Some(n), _) => n,
            (None, Some(_)) => 0,
            (None, None) => return Err(Error::Usage("--n is required".into())),
        };
        Ok(GenOptions {
            family,
            n,
            m: self.m,
            seed: self.seed,
            rows,
            laplacian: self.laplacian.clone(),
            laplacian_kind: self.laplacian_kind.clone(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a measurement matrix file
    Gen {
        #[command(flatten)]
        gen: GenFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute all sparsity bounds for a matrix
    Analyze {
        /// Matrix file; standard input when neither this nor --family is given
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        gen: GenFlags,
        /// text | structured
        #[arg(long, default_value = "text")]
        format: String,
        /// Include sorted row profiles in structured output
        #[arg(long)]
        profile: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force check of the certified sparsity levels
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, conflicts_with = "from_report")]
        k: Option<usize>,
        #[arg(long)]
        from_report: Option<PathBuf>,
        /// Absolute singular-value threshold (default 1e-10 * sigma_max)
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Seeded reconstruction trials
    Recon {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sparsity: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// ls | omp
        #[arg(long, default_value = "omp")]
        method: String,
    },
    /// List registered bounds, matrix families and methods
    List,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_input(input: Option<&PathBuf>, gen: &GenFlags) -> Result<LoadedMatrix, Error> {
    match (input, &gen.family) {
        (Some(_), Some(_)) => Err(Error::Usage("use either --in or --family, not both".into())),
        (Some(p), None) => cli::load_file(p),
        (None, Some(_)) => cli::load_generated(&gen.options()?),
        (None, None) => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            cli::load_text(&text, "stdin")
        }
    }
}

fn run(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Gen { gen, out } => {
            emit(&cli::cmd_gen(&gen.options()?)?, out.as_ref())?;
            Ok(cli::EXIT_OK)
        }
        Command::Analyze {
            input,
            gen,
            format,
            profile,
            out,
        } => {
            let format = ReportFormat::parse(&format).map_err(|e| Error::Usage(e.to_string()))?;
            let loaded = load_input(input.as_ref(), &gen)?;
            emit(&cli::cmd_analyze(&loaded, format, profile)?, out.as_ref())?;
            Ok(cli::EXIT_OK)
        }
        Command::Verify {
            input,
            k,
            from_report,
            tol,
            budget,
        } => {
            let loaded = cli::load_file(&input)?;
            let target = match (k, from_report) {
                (Some(k), _) => VerifyTarget::Fixed(k),
                (None, Some(p)) => VerifyTarget::Report(p),
                (None, None) => VerifyTarget::Own,
            };
            let (text, passed) = cli::cmd_verify(&loaded, &target, &OracleConfig { tol, budget })?;
            emit(&text, None)?;
            Ok(if passed { cli::EXIT_OK } else { cli::EXIT_FAIL })
        }
        Command::Recon {
            input,
            sparsity,
            trials,
            seed,
            method,
        } => {
            let loaded = cli::load_file(&input)?;
            emit(&cli::cmd_recon(&loaded, sparsity, trials, seed, &method)?, None)?;
            Ok(cli::EXIT_OK)
        }
        Command::List => {
            emit(&cli::cmd_list(), None)?;
            Ok(cli::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Some(n) = std::env::var(cli::THREADS_ENV).ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let code = match run(args.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
