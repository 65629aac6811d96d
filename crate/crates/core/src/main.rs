use clap::{Parser, Subcommand};

use jetlaw::report::{self, Options};

#[derive(Parser)]
#[command(
    name = "jetlaw",
    about = "Conservation laws of scaling-invariant field equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit a machine-readable JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Render expressions as LaTeX in human output.
    #[arg(long, global = true)]
    latex: bool,
    /// Sample count for numeric spot checks.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Absolute tolerance for numeric spot checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a conservation law from an adjoint-symmetry.
    Derive {
        #[arg(long)]
        model: String,
        /// Adjoint-symmetry expression (scalar models).
        #[arg(long)]
        omega: Option<String>,
        /// Catalog entry name.
        #[arg(long)]
        entry: Option<String>,
    },
    /// Generate hierarchy members for the soliton models.
    Hierarchy {
        #[arg(long)]
        model: String,
        #[arg(short)]
        k: usize,
    },
    /// Report the scaling weight of a catalog entry.
    Weights {
        #[arg(long)]
        model: String,
        #[arg(long)]
        entry: String,
    },
    /// Verify an entry or expression as symmetry/multiplier/conservation law.
    Verify {
        #[arg(long)]
        model: String,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        omega: Option<String>,
    },
    /// List the catalog of a model.
    Catalog {
        #[arg(long)]
        model: String,
    },
    /// Run the full invariant suite over every built-in model.
    Selftest,
}

fn main() {
    let cli = Cli::parse();
    let opts = Options {
        latex: cli.latex,
        samples: cli.samples,
        tol: cli.tol,
    };
    let result = match &cli.command {
        Command::Derive {
            model,
            omega,
            entry,
        } => report::derive(model, omega.as_deref(), entry.as_deref(), &opts),
        Command::Hierarchy { model, k } => report::hierarchy(model, *k, &opts),
        Command::Weights { model, entry } => report::weights(model, entry, &opts),
        Command::Verify {
            model,
            entry,
            omega,
        } => report::verify_cmd(model, entry.as_deref(), omega.as_deref(), &opts),
        Command::Catalog { model } => report::catalog(model, &opts),
        Command::Selftest => report::selftest(&opts),
    };
    match result {
        Ok((human, run)) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&run).expect("report serializes")
                );
            } else {
                print!("{human}");
            }
            std::process::exit(if run.ok { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
