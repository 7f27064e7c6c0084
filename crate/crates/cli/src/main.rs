use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qnm_usc::config::{self, Config};
use qnm_usc::error::CliError;
use qnm_usc::output::{write_artifact, Artifact};
use qnm_usc::run::{run_scenario, sweep, validate_scenario, Overrides, RunContext};
use qnm_usc_core::liouvillian::NegativeRatePolicy;

#[derive(Parser, Debug)]
#[command(name = "qnm-usc", version, about = "QNM-based ultrastrong-coupling cavity QED spectra")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Keep negative spectral densities (study mode).
    #[arg(long, global = true, conflicts_with = "clamp_negative_rates")]
    allow_negative_rates: bool,
    /// Set negative spectral densities to zero.
    #[arg(long, global = true)]
    clamp_negative_rates: bool,
    /// Use the secular master equation.
    #[arg(long, global = true)]
    secular: bool,
    /// Fock (and matter) truncation for every scenario.
    #[arg(long, global = true)]
    fock: Option<usize>,
    /// Number of dressed states kept.
    #[arg(long, global = true)]
    keep: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every scenario in a config file.
    Run { config: PathBuf },
    /// Run one scenario over a list of values for one parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        scenario: String,
        /// eta, phi0, omega0_over_omega_c, pump_fraction or q.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        values: Vec<f64>,
    },
    /// Broadband and single-mode criteria for tabulated QNMs.
    Criteria {
        /// QNM data files (bundled names or paths); defaults to the bundled tables.
        files: Vec<String>,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
}

impl Global {
    fn overrides(&self) -> Overrides {
        let policy = if self.allow_negative_rates {
            Some(NegativeRatePolicy::Allow)
        } else if self.clamp_negative_rates {
            Some(NegativeRatePolicy::ClampZero)
        } else {
            None
        };
        Overrides { n_fock: self.fock, keep: self.keep, secular: self.secular, policy }
    }
}

fn write_all(out: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    for a in artifacts {
        let (csv, json) = write_artifact(out, a)?;
        log::info!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}

fn load(path: &Path) -> Result<Config, CliError> {
    let cfg = config::load(path)?;
    if cfg.scenarios.is_empty() {
        log::warn!("no scenarios in {}", path.display());
    }
    Ok(cfg)
}

fn criteria_config(files: &[String]) -> Result<Config, CliError> {
    let files: Vec<String> =
        if files.is_empty() { vec!["modes.json".into()] } else { files.to_vec() };
    let mut text = String::from("schema_version = 1\n");
    for (i, f) in files.iter().enumerate() {
        let stem = Path::new(f).file_stem().and_then(|s| s.to_str()).unwrap_or("criteria");
        text.push_str(&format!(
            "[[scenario]]\nname = \"criteria_{i}\"\noutput = \"criteria_{stem}\"\nkind = \"criteria\"\nqnm = {{ file = {} }}\n",
            toml_str(f)
        ));
    }
    config::parse(&text, std::env::current_dir().ok().as_deref())
}

fn toml_str(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Runs `f` per scenario, keeps going after a failure and returns the first failure's code.
fn each<F>(cfg: &Config, mut f: F) -> u8
where
    F: FnMut(&config::Scenario) -> Result<(), CliError>,
{
    let mut code = 0;
    for sc in &cfg.scenarios {
        if let Err(e) = f(sc) {
            report(&e, Some(&sc.name));
            if code == 0 {
                code = e.exit_code() as u8;
            }
        }
    }
    code
}

fn report(e: &CliError, scenario: Option<&str>) {
    let mut r = e.report();
    if let (Some(name), Some(o)) = (scenario, r.as_object_mut()) {
        o.insert("scenario".into(), name.into());
    }
    eprintln!("{r}");
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let overrides = cli.global.overrides();
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(config)?;
            let ctx = RunContext { base_dir: cfg.base_dir.as_deref(), overrides };
            Ok(each(&cfg, |sc| {
                log::info!("running {} ({})", sc.name, sc.kind.name());
                write_all(&cli.global.out, &run_scenario(sc, &ctx)?)
            }))
        }
        Command::Sweep { config, scenario, axis, values } => {
            let cfg = load(config)?;
            let sc = cfg
                .scenarios
                .iter()
                .find(|s| &s.name == scenario)
                .ok_or_else(|| CliError::config(format!("no scenario named `{scenario}`")))?;
            let ctx = RunContext { base_dir: cfg.base_dir.as_deref(), overrides };
            write_all(&cli.global.out, &sweep(sc, axis, values, &ctx)?)?;
            Ok(0)
        }
        Command::Criteria { files } => {
            let cfg = criteria_config(files)?;
            let ctx = RunContext { base_dir: cfg.base_dir.as_deref(), overrides };
            Ok(each(&cfg, |sc| {
                let arts = run_scenario(sc, &ctx)?;
                for a in &arts {
                    print!("{}", String::from_utf8_lossy(&a.table.to_csv()?));
                }
                write_all(&cli.global.out, &arts)
            }))
        }
        Command::Validate { config } => {
            let cfg = load(config)?;
            let ctx = RunContext { base_dir: cfg.base_dir.as_deref(), overrides };
            let code = each(&cfg, |sc| validate_scenario(sc, &ctx));
            if code == 0 {
                println!("{}: {} scenario(s) ok", config.display(), cfg.scenarios.len());
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.workers {
        if n == 0 {
            report(&CliError::config("--workers must be at least 1"), None);
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            report(&CliError::config(e.to_string()), None);
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report(&e, None);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
