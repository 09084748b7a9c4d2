use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mulberry_cli::pipeline;
use mulberry_cli::{CliResult, ModelSelection, RunConfig};
use mulberry_core::agronomy::ThresholdTable;

#[derive(Parser)]
#[command(
    name = "mulberry",
    version,
    about = "Soil-nutrient yield regression: MLR, ridge and random forest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic soil table with a known yield response.
    Synth {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Clean, split, normalize and fit the selected models.
    Train(RunArgs),
    /// Score saved models on the held-out rows and write comparison files.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Model files to score instead of `<output-dir>/models/*.json`.
        #[arg(long = "model-file")]
        model_files: Vec<PathBuf>,
    },
    /// Append predictions from a saved model to every row of a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Pearson correlation matrix and heatmap of the attributes.
    Correlate(RunArgs),
    /// Merge evaluation reports and rank the models.
    Compare {
        /// Defaults to `<output-dir>/evaluation.json`.
        #[arg(long = "report")]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Low/medium/high counts and nutrient index per nutrient.
    NutrientIndex {
        #[arg(long)]
        input: PathBuf,
        /// TOML threshold table; the bundled defaults are used otherwise.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    test_ratio: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<ModelSelection>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_split: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_features: Option<usize>,
    /// Forest worker threads; outputs do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    /// CLI flags over the config file over defaults.
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            c.input = Some(v.clone());
        }
        if let Some(v) = &self.output_dir {
            c.output_dir = v.clone();
        }
        if let Some(v) = &self.target {
            c.target = v.clone();
        }
        c.seed = self.seed.unwrap_or(c.seed);
        c.test_ratio = self.test_ratio.unwrap_or(c.test_ratio);
        c.model = self.model.unwrap_or(c.model);
        c.lambda = self.lambda.unwrap_or(c.lambda);
        c.workers = self.workers.or(c.workers);
        let f = &mut c.forest;
        f.trees = self.trees.or(f.trees);
        f.max_depth = self.max_depth.or(f.max_depth);
        f.min_split = self.min_split.or(f.min_split);
        f.min_leaf = self.min_leaf.or(f.min_leaf);
        f.max_features = self.max_features.or(f.max_features);
        Ok(c)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth {
            n,
            seed,
            output_dir,
        } => {
            let path = pipeline::synth(n, seed, &output_dir)?;
            println!("wrote {}", path.display());
        }
        Command::Train(args) => {
            let out = pipeline::train(&args.resolve()?)?;
            print!("{}", out.log);
            for (_, p) in &out.models {
                println!("wrote {}", p.display());
            }
        }
        Command::Evaluate { run, model_files } => {
            let out = pipeline::evaluate(&run.resolve()?, &model_files)?;
            print!("{}", mulberry_core::report::text_table(&out.report));
            for p in [&out.report_path, &out.csv, &out.svg] {
                println!("wrote {}", p.display());
            }
        }
        Command::Predict {
            model,
            input,
            output_dir,
            config,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::from_file(p)?,
                None => RunConfig::default(),
            };
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            let out = pipeline::predict(&model, &input, &cfg)?;
            println!(
                "predicted {} rows, skipped {} incomplete, {} feature cells clamped",
                out.predicted, out.skipped, out.clamped_cells
            );
            println!("wrote {}", out.path.display());
        }
        Command::Correlate(args) => {
            let out = pipeline::correlate(&args.resolve()?)?;
            println!("{}x{} correlation matrix", out.dim, out.dim);
            println!("wrote {}", out.csv.display());
            println!("wrote {}", out.svg.display());
        }
        Command::Compare {
            reports,
            output_dir,
        } => {
            let reports = if reports.is_empty() {
                vec![output_dir.join("evaluation.json")]
            } else {
                reports
            };
            let out = pipeline::compare(&reports, &output_dir)?;
            print!("{}", out.table);
            println!("wrote {}", out.csv.display());
            println!("wrote {}", out.svg.display());
        }
        Command::NutrientIndex {
            input,
            thresholds,
            output_dir,
        } => {
            let text = match &thresholds {
                Some(p) => std::fs::read_to_string(p)?,
                None => pipeline::DEFAULT_THRESHOLDS.to_string(),
            };
            let table = ThresholdTable::from_toml(&text)?;
            let rows = pipeline::nutrient_summary(&input, &table, &RunConfig::default())?;
            println!(
                "{:<10} {:>6} {:>6} {:>6} {:>6} {:>6}",
                "nutrient", "low", "medium", "high", "total", "index"
            );
            for r in &rows {
                let c = r.counts;
                println!(
                    "{:<10} {:>6} {:>6} {:>6} {:>6} {:>6.2}",
                    r.nutrient, c.nl, c.nm, c.nh, c.nt, r.index
                );
            }
            let path = pipeline::write_nutrient_summary(&rows, &output_dir)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
