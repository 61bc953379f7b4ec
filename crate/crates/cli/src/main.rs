use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cbforest::metrics::{MetricSpec, DEFAULT_BEDROC_ALPHA};
use cbforest::service::config::RunConfig;
use cbforest::service::synth::{synthesize, write_synth, SynthParams};
use cbforest::service::{self, EvaluateRequest};
use cbforest::Error;

#[derive(Debug, Parser)]
#[command(
    name = "cbforest",
    version,
    about = "Calibrated boosting forest for rare-event classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an ensemble from a JSON run configuration.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to available parallelism.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Score a dataset with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compute metrics for a score file against a label file.
    Evaluate(EvaluateArgs),
    /// Write a synthetic rare-event dataset in SVMLight format.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    auc_roc: bool,
    #[arg(long)]
    auc_prc: bool,
    /// BEDROC with the given alpha.
    #[arg(long, value_name = "ALPHA", num_args = 0..=1, default_missing_value = "20")]
    auc_bed: Option<f64>,
    /// Enrichment factor at fraction t; may be repeated.
    #[arg(long, value_name = "T")]
    ef: Vec<f64>,
    #[arg(long)]
    logloss: bool,
    #[arg(long)]
    reliability_score: bool,
    /// Report logloss as a mean over records.
    #[arg(long)]
    mean: bool,
    /// Append the quantile reliability table.
    #[arg(long)]
    reliability: bool,
    /// Equal-width bins over [0, 1] instead of quantile bins.
    #[arg(long, requires = "reliability")]
    fixed_width: bool,
    #[arg(long, default_value_t = 10)]
    bins: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    n_features: usize,
    #[arg(long, default_value_t = 0.05)]
    pos_rate: f64,
    /// Number of informative features.
    #[arg(long, default_value_t = 16)]
    signal: usize,
    #[arg(long, default_value_t = 0.1)]
    density: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl EvaluateArgs {
    fn request(&self) -> EvaluateRequest {
        let mut metrics = Vec::new();
        if self.auc_roc {
            metrics.push(MetricSpec::AucRoc);
        }
        if self.auc_prc {
            metrics.push(MetricSpec::AucPrc);
        }
        if let Some(alpha) = self.auc_bed {
            metrics.push(MetricSpec::AucBed { alpha });
        }
        metrics.extend(self.ef.iter().map(|&t| MetricSpec::Ef { t }));
        if self.logloss {
            metrics.push(MetricSpec::Logloss);
        }
        if self.reliability_score {
            metrics.push(MetricSpec::ReliabilityScore { n_bins: self.bins });
        }
        if metrics.is_empty() && !self.reliability {
            metrics = vec![
                MetricSpec::AucRoc,
                MetricSpec::AucPrc,
                MetricSpec::AucBed {
                    alpha: DEFAULT_BEDROC_ALPHA,
                },
                MetricSpec::Ef { t: 0.01 },
                MetricSpec::Logloss,
                MetricSpec::ReliabilityScore { n_bins: self.bins },
            ];
        }
        EvaluateRequest {
            metrics,
            mean_logloss: self.mean,
            reliability_bins: self.reliability.then_some(self.bins),
            fixed_width: self.fixed_width,
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train { config, workers } => {
            let cfg = RunConfig::load(&config)?;
            if workers == Some(0) {
                return Err(Error::Config("workers: must be at least 1".into()));
            }
            let outcome = service::train(&cfg, workers)?;
            outcome.write()?;
            eprintln!("wrote {}", cfg.output_dir.display());
        }
        Command::Predict { model, input, output } => {
            let text = service::predict(&model, &input)?;
            write_file(&output, &text)?;
        }
        Command::Evaluate(args) => {
            for m in args.request().metrics {
                m.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
            let scores = service::read_column(&args.scores)?;
            let labels = service::read_column(&args.labels)?;
            print!("{}", service::evaluate(&scores, &labels, &args.request())?);
        }
        Command::Synth(a) => {
            let data = synthesize(&SynthParams {
                n: a.n,
                n_features: a.n_features,
                pos_rate: a.pos_rate,
                signal: a.signal,
                density: a.density,
                noise: a.noise,
                seed: a.seed,
            })?;
            let file = std::fs::File::create(&a.out).map_err(|source| Error::Io {
                path: a.out.clone(),
                source,
            })?;
            write_synth(&data, std::io::BufWriter::new(file))?;
            eprintln!("threshold {}", data.mapping.threshold);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
