use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mixed_ego::metrics::DEFAULT_TAUS;
use mixed_ego::problems;
use mixed_ego_cli::campaign::load_config;
use mixed_ego_cli::{run_campaign, summarize, CampaignError};

#[derive(Parser)]
#[command(name = "mixed-ego", version, about = "Mixed-variable Bayesian optimization campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs a campaign described by a JSON config or campaign manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed base.
        #[arg(long)]
        seed_base: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Recomputes summaries of a campaign output directory.
    Summarize {
        #[arg(long)]
        out: PathBuf,
    },
    /// Lists benchmark problems and design-space schemas.
    ListProblems,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed_base,
            jobs,
        } => {
            let result = load_config(&config).and_then(|mut c| {
                if let Some(s) = seed_base {
                    c.seed_base = s;
                    c.seeds = None;
                }
                run_campaign(&c, &out, jobs)
            });
            match result {
                Ok(r) => {
                    println!("{} runs, {} failed, results in {}", r.runs, r.failed, r.out.display());
                    ExitCode::from(if r.failed > 0 { 1 } else { 0 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(match e {
                        CampaignError::Config(_) => 2,
                        CampaignError::Runtime(_) => 1,
                    })
                }
            }
        }
        Command::Summarize { out } => match summarize(&out, &DEFAULT_TAUS) {
            Ok(r) => {
                println!("{} runs summarized, {} warnings", r.runs, r.warnings);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Command::ListProblems => {
            for name in problems::names() {
                match problems::by_name(name) {
                    Ok(p) => println!(
                        "{name}\tvariables={}\tobjectives={}\tconstraints={}",
                        p.space.variables().len(),
                        p.n_obj,
                        p.n_ineq + p.n_eq
                    ),
                    Err(e) => println!("{name}\terror: {e}"),
                }
            }
            for name in problems::schemas::names() {
                if let Ok(s) = problems::schemas::schema(name) {
                    println!("{name}\tschema\tvariables={}\trelaxed={}", s.variables().len(), s.relaxed_dimension());
                }
            }
            ExitCode::SUCCESS
        }
    }
}
