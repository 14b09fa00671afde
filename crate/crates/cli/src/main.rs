//! `galimage`: coefficients, field analysis, exceptional sets, certificates
//! and the GL₂ oracle from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use galimage_core::analysis::{analyze, AnalysisOptions, KLProfile, DEFAULT_K_SEARCH_BOUND};
use galimage_core::certifier::{
    primes_in_range, replay, Certificate, Certifier, CertifierConfig, Choices, DEFAULT_SEARCH_BOUND,
};
use galimage_core::newform::{self, CoefficientFileV1, FetchConfig, NewformRecord};
use galimage_core::qexp::DEFAULT_PRECISION;
use galimage_core::{oracle, CoreError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "galimage", version, about = "Certify PSL2/PGL2 projective images of mod-lambda Galois representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute q-expansion coefficients and write them as a coefficient file
    Coeffs(FormArgs),
    /// Fetch a newform from the LMFDB, or normalize an existing coefficient file
    Ingest(IngestArgs),
    /// Print the fields K and L as JSON
    Analyze(FormArgs),
    /// Print the exceptional set S as JSON
    ExceptionalSet(FormArgs),
    /// Certify the primes above one rational prime
    Certify {
        #[command(flatten)]
        form: FormArgs,
        /// the rational prime below the lambdas
        #[arg(long)]
        ell: u64,
    },
    /// Certify every prime in a range
    Scan {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        min: u64,
        #[arg(long)]
        max: u64,
    },
    /// Re-check a certificate file
    Replay {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Exhaustive GL2(F_q) checks for small q
    Oracle {
        #[arg(long)]
        selftest: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct FormArgs {
    /// builtin form: level27 or level160
    #[arg(long)]
    builtin: Option<String>,
    /// coefficient file (overrides --builtin)
    #[arg(long)]
    file: Option<PathBuf>,
    /// TOML file with defaults for any of these options
    #[arg(long)]
    config: Option<PathBuf>,
    /// number of coefficients B
    #[arg(long)]
    precision: Option<usize>,
    /// primes p up to this bound must have r_p in Q(r_q)
    #[arg(long)]
    k_search_bound: Option<u64>,
    /// bound on witness primes
    #[arg(long)]
    search_bound: Option<u64>,
    /// the primes q_i, comma separated
    #[arg(long, value_delimiter = ',')]
    q_primes: Option<Vec<u64>>,
    /// the primes p_i, comma separated
    #[arg(long, value_delimiter = ',')]
    p_primes: Option<Vec<u64>>,
    /// the prime q with K = Q(r_q)
    #[arg(long)]
    generator_prime: Option<u64>,
    /// extra primes forced into the index part of S
    #[arg(long, value_delimiter = ',')]
    extra_index_primes: Option<Vec<u64>>,
    /// worker threads for scan
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON output path (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// LMFDB label N.k.c.x
    #[arg(long, conflicts_with = "from")]
    label: Option<String>,
    /// existing coefficient file to validate and rewrite
    #[arg(long)]
    from: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: usize,
    #[arg(long)]
    offline: bool,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Options readable from `--config`; command-line flags take precedence.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    builtin: Option<String>,
    file: Option<PathBuf>,
    precision: Option<usize>,
    k_search_bound: Option<u64>,
    search_bound: Option<u64>,
    q_primes: Option<Vec<u64>>,
    p_primes: Option<Vec<u64>>,
    generator_prime: Option<u64>,
    extra_index_primes: Option<Vec<u64>>,
    jobs: Option<usize>,
}

/// Fully resolved options.
struct RunConfig {
    builtin: String,
    file: Option<PathBuf>,
    precision: Option<usize>,
    k_search_bound: u64,
    search_bound: u64,
    q_primes: Option<Vec<u64>>,
    p_primes: Option<Vec<u64>>,
    generator_prime: Option<u64>,
    extra_index_primes: Vec<u64>,
    jobs: Option<usize>,
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(CoreError),
    Usage(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

impl CliError {
    fn report(&self) -> String {
        let (error, message) = match self {
            CliError::Core(e) => (e.kind(), e.to_string()),
            CliError::Usage(m) => ("usage", m.clone()),
        };
        serde_json::to_string(&ErrorReport { error, message }).expect("error serializes")
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Core(CoreError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl RunConfig {
    fn resolve(a: &FormArgs) -> CliResult<Self> {
        let fc: FileConfig = match &a.config {
            None => FileConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
        };
        let cfg = RunConfig {
            builtin: a.builtin.clone().or(fc.builtin).unwrap_or_else(|| "level27".into()),
            file: a.file.clone().or(fc.file),
            precision: a.precision.or(fc.precision),
            k_search_bound: a.k_search_bound.or(fc.k_search_bound).unwrap_or(DEFAULT_K_SEARCH_BOUND),
            search_bound: a.search_bound.or(fc.search_bound).unwrap_or(DEFAULT_SEARCH_BOUND),
            q_primes: a.q_primes.clone().or(fc.q_primes),
            p_primes: a.p_primes.clone().or(fc.p_primes),
            generator_prime: a.generator_prime.or(fc.generator_prime),
            extra_index_primes: a.extra_index_primes.clone().or(fc.extra_index_primes).unwrap_or_default(),
            jobs: a.jobs.or(fc.jobs),
            output: a.output.clone(),
        };
        if cfg.precision == Some(0) || cfg.k_search_bound == 0 || cfg.search_bound == 0 || cfg.jobs == Some(0) {
            return Err(CliError::Usage("bounds, precision and jobs must be positive".into()));
        }
        Ok(cfg)
    }

    fn record(&self) -> CliResult<NewformRecord> {
        let rec = match &self.file {
            Some(p) => newform::load_file(p)?,
            None => newform::builtin(&self.builtin, self.precision)?,
        };
        Ok(match self.precision {
            Some(b) if b < rec.bound() => rec.truncated(b),
            _ => rec,
        })
    }

    fn profile(&self, rec: &NewformRecord) -> CliResult<KLProfile> {
        let opts = AnalysisOptions {
            k_search_bound: self.k_search_bound,
            ..Default::default()
        };
        Ok(analyze(rec, &opts)?)
    }

    fn certifier<'a>(&self, rec: &'a NewformRecord, profile: &'a KLProfile) -> CliResult<Certifier<'a>> {
        let overridden = self.q_primes.is_some() || self.p_primes.is_some() || self.generator_prime.is_some();
        let choices = if overridden {
            let defaults = Certifier::new(
                rec,
                profile,
                &CertifierConfig {
                    search_bound: self.search_bound,
                    ..Default::default()
                },
            )
            .map(|c| c.choices)
            .ok();
            let pick = |given: &Option<Vec<u64>>, default: Option<Vec<u64>>| {
                given.clone().or(default).ok_or_else(|| {
                    CliError::Usage("partial choice override needs --q-primes and --p-primes".into())
                })
            };
            Some(Choices {
                q_primes: pick(&self.q_primes, defaults.as_ref().map(|d| d.q_primes.clone()))?,
                p_primes: pick(&self.p_primes, defaults.as_ref().map(|d| d.p_primes.clone()))?,
                generator_prime: self.generator_prime.unwrap_or(profile.k.generator_prime),
            })
        } else {
            None
        };
        let cfg = CertifierConfig {
            search_bound: self.search_bound,
            choices,
            extra_index_primes: self.extra_index_primes.clone(),
        };
        Ok(Certifier::new(rec, profile, &cfg)?)
    }
}

fn emit(output: &Option<PathBuf>, json: &str) -> CliResult<()> {
    match output {
        Some(p) => std::fs::write(p, json).map_err(|e| io_err(p, e)),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("value serializes") + "\n"
}

#[derive(Serialize)]
struct ScanOutput {
    min: u64,
    max: u64,
    certificates: Vec<Certificate>,
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Coeffs(a) => {
            let cfg = RunConfig::resolve(&a)?;
            let rec = cfg.record()?;
            emit(&cfg.output, &CoefficientFileV1::from_record(&rec).to_json())?;
            if cfg.output.is_some() {
                println!("wrote {} coefficients of the level {} form", rec.bound(), rec.level());
            }
            Ok(true)
        }
        Command::Ingest(a) => {
            let file = match (&a.label, &a.from) {
                (Some(label), None) => {
                    let mut fc = FetchConfig {
                        offline: a.offline,
                        timeout: Duration::from_secs(a.timeout_secs),
                        ..Default::default()
                    };
                    if let Some(u) = &a.base_url {
                        fc.base_url = u.clone();
                    }
                    let out = newform::fetch_lmfdb(label, a.precision, &fc)?;
                    if out.obtained < out.requested {
                        eprintln!("note: {} of {} coefficients recovered", out.obtained, out.requested);
                    }
                    out.file
                }
                (None, Some(p)) => CoefficientFileV1::from_record(&newform::load_file(p)?),
                _ => return Err(CliError::Usage("ingest needs exactly one of --label or --from".into())),
            };
            file.to_record()?;
            emit(&a.output, &file.to_json())?;
            Ok(true)
        }
        Command::Analyze(a) => {
            let cfg = RunConfig::resolve(&a)?;
            let rec = cfg.record()?;
            let profile = cfg.profile(&rec)?;
            emit(&cfg.output, &pretty(&profile.summary()))?;
            Ok(true)
        }
        Command::ExceptionalSet(a) => {
            let cfg = RunConfig::resolve(&a)?;
            let rec = cfg.record()?;
            let profile = cfg.profile(&rec)?;
            let c = cfg.certifier(&rec, &profile)?;
            emit(&cfg.output, &pretty(&c.exceptional))?;
            Ok(true)
        }
        Command::Certify { form, ell } => {
            let cfg = RunConfig::resolve(&form)?;
            let rec = cfg.record()?;
            let profile = cfg.profile(&rec)?;
            let cert = cfg.certifier(&rec, &profile)?.certify(ell)?;
            match &cfg.output {
                Some(p) => {
                    std::fs::write(p, cert.to_json()).map_err(|e| io_err(p, e))?;
                    print!("{}", cert.summary());
                }
                None => print!("{}", cert.to_json()),
            }
            Ok(cert.all_certified())
        }
        Command::Scan { form, min, max } => {
            if min > max {
                return Err(CliError::Usage(format!("empty range {min}..{max}")));
            }
            let cfg = RunConfig::resolve(&form)?;
            let rec = cfg.record()?;
            let profile = cfg.profile(&rec)?;
            let certifier = cfg.certifier(&rec, &profile)?;
            let ells = primes_in_range(min, max);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.jobs.unwrap_or(0))
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let certificates = pool.install(|| {
                ells.par_iter()
                    .map(|&l| certifier.certify(l))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            for c in &certificates {
                print!("{}", c.summary());
            }
            let ok = certificates.iter().all(|c| c.all_certified());
            let certified = certificates.iter().filter(|c| c.all_certified()).count();
            println!("{certified} of {} primes certified", certificates.len());
            let json = pretty(&ScanOutput { min, max, certificates });
            if let Some(p) = &cfg.output {
                std::fs::write(p, json).map_err(|e| io_err(p, e))?;
            }
            Ok(ok)
        }
        Command::Replay { form, certificate } => {
            let cfg = RunConfig::resolve(&form)?;
            let rec = cfg.record()?;
            let profile = cfg.profile(&rec)?;
            let text = std::fs::read_to_string(&certificate).map_err(|e| io_err(&certificate, e))?;
            let cert: Certificate = serde_json::from_str(&text).map_err(CoreError::from)?;
            let report = replay(&rec, &profile, &cert)?;
            emit(&cfg.output, &pretty(&report))?;
            Ok(report.ok())
        }
        Command::Oracle { selftest, output } => {
            if !selftest {
                return Err(CliError::Usage("oracle currently supports only --selftest".into()));
            }
            let reports = oracle::selftest();
            for r in &reports {
                println!(
                    "{} q={} {}: {} elements{}",
                    if r.passed { "pass" } else { "FAIL" },
                    r.q,
                    r.check,
                    r.elements_checked,
                    r.detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default()
                );
            }
            if let Some(p) = output {
                std::fs::write(&p, pretty(&reports)).map_err(|e| io_err(&p, e))?;
            }
            Ok(reports.iter().all(|r| r.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(2)
        }
    }
}
