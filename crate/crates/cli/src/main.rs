//! `losmimo` command line: run array-design methods from a config file and
//! write capacity curves, coordinates, solver traces and summary stats.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use losmimo::config::Method;
use losmimo::{driver, load_config};

#[derive(Parser)]
#[command(name = "losmimo", version, about = "Non-uniform antenna array design for LoS MIMO links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the design methods described by a config file.
    Design(DesignArgs),
}

#[derive(Args)]
struct DesignArgs {
    /// Path to the TOML run configuration.
    config: PathBuf,

    /// Override the config's method list (repeatable or comma separated:
    /// ula, co, co_rr, es).
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<String>,

    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// Run the exhaustive search even when it exceeds its evaluation budget.
    #[arg(long)]
    es_force: bool,
}

fn design(args: &DesignArgs) -> anyhow::Result<()> {
    let mut config = load_config(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;

    if !args.methods.is_empty() {
        let mut methods: Vec<Method> = Vec::new();
        for name in &args.methods {
            let m: Method = name.parse().map_err(anyhow::Error::msg)?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        config.methods = methods;
    }
    if let Some(dir) = &args.out_dir {
        config.out_dir = dir.clone();
    }
    if args.es_force {
        config.es_budget.force = true;
    }

    if config.methods.is_empty() {
        eprintln!("warning: no methods requested; nothing to do");
        return Ok(());
    }

    let results = driver::run(&config)?;
    let files = driver::write_outputs(&results, &config.out_dir)?;
    print!("{}", driver::summary_text(&results));
    println!("wrote {} files to {}", files.len(), config.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(args) => design(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
