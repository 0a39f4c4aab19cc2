use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tripleforge::pipeline::{Config, Pipeline, MANIFEST_FILE};
use tripleforge::{CostReport, Result};

#[derive(Parser)]
#[command(name = "tripleforge", version, about = "Few-shot relational triple extraction runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Zero-shot extraction over the candidate pool.
    Preextract(Opts),
    /// Pairwise triple-set distances within the pool.
    Distances(Opts),
    /// Train the sample retriever.
    Train(Opts),
    /// Score the pool against the test set and pick demonstrations.
    Select(Opts),
    /// Few-shot inference over the test set.
    Run(Opts),
    /// Micro precision, recall and F1 of the predictions.
    Eval(Opts),
    /// Character counts of the raw outputs.
    Cost(Opts),
    /// Every stage in order.
    All(Opts),
    /// Re-run a recorded run from its manifest.
    Replay {
        /// manifest.json of the run, or its run directory.
        manifest: PathBuf,
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    run_dir: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    distance_source: Option<String>,
    /// tableie, textie or codeie
    #[arg(long)]
    format: Option<String>,
    /// real or mock
    #[arg(long)]
    provider: Option<String>,
}

impl Opts {
    fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let cwd = Path::new(".");
        if let Some(dir) = &self.run_dir {
            cfg.set("run_dir", &dir.to_string_lossy(), cwd)?;
            cfg.cache_dir = cfg.run_dir.join("cache");
        }
        let overrides = [
            ("strategy", self.strategy.clone()),
            ("budget", self.budget.map(|b| b.to_string())),
            ("seed", self.seed.map(|s| s.to_string())),
            ("distance_source", self.distance_source.clone()),
            ("format", self.format.clone()),
            ("provider", self.provider.clone()),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v, cwd)?;
            }
        }
        Ok(cfg)
    }
}

fn execute(command: Command) -> Result<()> {
    let (opts, stage) = match command {
        Command::Replay { manifest, run_dir } => {
            let path = if manifest.is_dir() {
                manifest.join(MANIFEST_FILE)
            } else {
                manifest
            };
            let p = Pipeline::replay(&path, run_dir)?;
            println!(
                "replayed into {} ({} provider calls)",
                p.run_dir().display(),
                p.provider_calls()
            );
            return Ok(());
        }
        Command::Preextract(o) => (o, "preextract"),
        Command::Distances(o) => (o, "distances"),
        Command::Train(o) => (o, "train"),
        Command::Select(o) => (o, "select"),
        Command::Run(o) => (o, "run"),
        Command::Eval(o) => (o, "eval"),
        Command::Cost(o) => (o, "cost"),
        Command::All(o) => (o, "all"),
    };
    let mut p = Pipeline::new(opts.config()?);
    match stage {
        "preextract" => {
            let a = p.preextract()?;
            println!(
                "pre-extracted {} samples, {} without triples",
                a.samples.len(),
                a.excluded.len()
            );
        }
        "distances" => {
            let m = p.distances()?;
            println!("pool distance matrix {n}x{n}", n = m.n);
        }
        "train" => {
            let t = p.train()?;
            for e in &t.history {
                println!(
                    "epoch {} train {:.6} validation {:.6}",
                    e.epoch, e.train_loss, e.validation_loss
                );
            }
            println!("best epoch {}", t.best_epoch);
        }
        "select" => {
            let s = p.select()?;
            println!(
                "selected {} demonstrations ({} checked, {} annotated)",
                s.demonstrations.len(),
                s.checked_count,
                s.annotated_count
            );
            for d in &s.demonstrations {
                println!("  {} {:.4}", d.id, d.similarity);
            }
        }
        "run" => {
            let r = p.run()?;
            println!("{} predictions", r.predictions.len());
        }
        "eval" => print!("{}", p.eval()?.to_table()),
        "cost" => {
            let c = p.cost()?;
            let label = p.config().format.to_string();
            print!("{}", CostReport::table(&[(&label, &c)]));
        }
        _ => {
            let r = p.run_all()?;
            print!("{}", r.to_table());
        }
    }
    eprintln!("{} provider calls", p.provider_calls());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
