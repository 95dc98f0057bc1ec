use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fluxindex_cli::{run_experiment, sweep, write_csv, CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "fluxindex", version, about = "Transport-index experiments on lattice models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Directory for result records; overrides `output` in the config.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// One-particle index tr[P(U†QU−Q)_−].
    FfIndex(Common),
    /// Many-body index of a process.
    MbIndex(Common),
    /// Charge per column transported by translation.
    Lsm(Common),
    /// Hall conductance from flux insertion.
    Hall(Common),
    /// Density, flux and Hall conductance compatibility.
    Adz(Common),
    /// Twist identity, its interpolation and loop braiding.
    Braid(Common),
    /// String operators, endpoint charges and braid phase.
    Anyon(Common),
    /// One-particle proof-chain residuals.
    ProofChain(Common),
    /// Run a config over a list of values of one or more fields.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted config path, e.g. `model.l1`; repeat to set several fields to the same value.
        #[arg(short, long = "field", required = true)]
        fields: Vec<String>,
        /// Comma-separated values (TOML literals).
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Worker threads.
        #[arg(short, long, default_value_t = 1)]
        workers: usize,
    },
}

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, CliError> {
    let mut table = read_table(&common.config)?;
    override_table(&mut table, common)?;
    table.insert("kind".into(), toml::Value::String(kind.name().into()));
    ExperimentConfig::from_toml(&toml::to_string(&table).map_err(|e| CliError::Parse(e.to_string()))?)
}

fn read_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)?;
    text.parse::<toml::Table>().map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn override_table(table: &mut toml::Table, common: &Common) -> Result<(), CliError> {
    if let Some(o) = &common.output {
        table.insert("output".into(), toml::Value::String(o.display().to_string()));
    }
    if let Some(s) = common.seed {
        let s = i64::try_from(s).map_err(|_| CliError::Invalid {
            field: "seed".into(),
            message: "must fit in a signed 64-bit integer".into(),
        })?;
        table.insert("seed".into(), toml::Value::Integer(s));
    }
    Ok(())
}

fn single(common: &Common, kind: ExperimentKind) -> Result<bool, CliError> {
    let cfg = load(common, kind)?;
    let rec = run_experiment(&cfg)?;
    if let Some(dir) = &cfg.output {
        let path = rec.write(dir, kind.name())?;
        eprintln!("wrote {}", path.display());
    }
    println!("{}", rec.to_json());
    Ok(rec.is_ok())
}

fn run_sweep(common: &Common, fields: &[String], values: &[String], workers: usize) -> Result<bool, CliError> {
    let mut table = read_table(&common.config)?;
    override_table(&mut table, common)?;
    let points = sweep(&table, fields, values, workers)?;
    let dir = table.get("output").and_then(|v| v.as_str()).map(PathBuf::from);
    match &dir {
        Some(dir) => {
            for (i, p) in points.iter().enumerate() {
                if let Ok(r) = &p.record {
                    r.write(dir, &format!("{}-{i:03}", r.config.kind.name()))?;
                }
            }
            let path = dir.join("sweep.csv");
            write_csv(&points, std::fs::File::create(&path)?)?;
            eprintln!("wrote {} records and {}", points.len(), path.display());
        }
        None => write_csv(&points, std::io::stdout())?,
    }
    Ok(points.iter().all(|p| p.record.as_ref().is_ok_and(|r| r.is_ok())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::FfIndex(c) => single(c, ExperimentKind::FfIndex),
        Command::MbIndex(c) => single(c, ExperimentKind::MbIndex),
        Command::Lsm(c) => single(c, ExperimentKind::Lsm),
        Command::Hall(c) => single(c, ExperimentKind::Hall),
        Command::Adz(c) => single(c, ExperimentKind::Adz),
        Command::Braid(c) => single(c, ExperimentKind::Braid),
        Command::Anyon(c) => single(c, ExperimentKind::Anyon),
        Command::ProofChain(c) => single(c, ExperimentKind::ProofChain),
        Command::Sweep { common, fields, values, workers } => run_sweep(common, fields, values, *workers),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
