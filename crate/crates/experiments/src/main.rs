use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use freelab_experiments::{
    emit_plot_data, list_scenarios, run_scenario, PlotKind, RunError, RunManifest, ScenarioConfig, ScenarioId,
};

#[derive(Parser)]
#[command(name = "freelab", version, about = "Spectra of Gaussian-field matrices against free convolutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its manifest and CSV artifacts.
    Run(RunArgs),
    /// List the available scenarios.
    List {
        /// Print the registry as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write one CSV view of a finished run.
    Plot {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Directory for the CSV; defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<String>,
    /// JSON configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<ScenarioConfig, RunError> {
        let scenario = self.scenario.as_deref().map(str::parse::<ScenarioId>).transpose()?;
        let mut c = match (&self.config, scenario) {
            (Some(path), _) => ScenarioConfig::from_file(path, scenario)?,
            (None, Some(id)) => ScenarioConfig::default_for(id),
            (None, None) => return Err(RunError::Validation("give --scenario or --config".into())),
        };
        if let Some(id) = scenario {
            if id != c.scenario {
                return Err(RunError::Validation(format!(
                    "--scenario {id} conflicts with config scenario {}",
                    c.scenario
                )));
            }
        }
        c.n = self.n.unwrap_or(c.n);
        c.replicates = self.replicates.unwrap_or(c.replicates);
        c.seed = self.seed.unwrap_or(c.seed);
        c.kmax = self.kmax.unwrap_or(c.kmax);
        c.tolerance_scale = self.tolerance_scale.unwrap_or(c.tolerance_scale);
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        Ok(c)
    }
}

fn run(args: &RunArgs) -> Result<i32, RunError> {
    let config = args.config()?;
    let dir = config.output_dir();
    let manifest = run_scenario(&config);
    for c in &manifest.criteria {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {} value={:.6e} threshold={:.6e}", c.name, c.value, c.threshold);
    }
    if let Some(e) = &manifest.error {
        eprintln!("error ({}): {}", e.kind, e.message);
    }
    println!("manifest: {}", dir.join("manifest.json").display());
    Ok(manifest.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(&args),
        Command::List { json } => {
            let all = list_scenarios();
            if json {
                println!("{}", serde_json::to_string_pretty(&all).expect("registry serializes"));
            } else {
                for s in all {
                    println!("{:<22} {}\n{:<22} requires: {}", s.id.as_str(), s.description, "", s.required.join(", "));
                }
            }
            Ok(0)
        }
        Command::Plot { manifest, kind, out } => RunManifest::read(&manifest).and_then(|m| {
            let dir = out.or_else(|| manifest.parent().map(PathBuf::from)).unwrap_or_default();
            let path = emit_plot_data(&m, kind, &dir)?;
            println!("{}", path.display());
            Ok(0)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
