//! The `radar-vitals` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use radar_vitals_core::featurize::FeatureTensor;
use radar_vitals_core::simkit::RadarKind;
use radar_vitals_core::train::{ablation_suite, train, AblationSpec, Example, Regime, Splits};
use serde::Serialize;

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::config::{load_over, train_preset, AblateConfig, EvaluateConfig, PreprocessConfig, Scale, SimulateConfig};
use crate::dataset::{featurize_dataset, load_examples, preprocess_dataset, simulate_dataset};
use crate::manifest::{DatasetManifest, FeatureManifest, Split};
use crate::report::{build_report, predictions, read_predictions, write_ablation, write_evaluation, PredictionRow};
use crate::{Error, Result};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "RADAR_VITALS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "radar-vitals", version, about = "Radar heart-rate simulation, training and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic cohort into a segment dataset.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Preset::Fmcw)]
        preset: Preset,
    },
    /// Detect presence and extract features from a segment dataset.
    Preprocess {
        #[command(flatten)]
        common: Common,
        /// Segment dataset directory.
        #[arg(long)]
        input: PathBuf,
        /// Featurization preset; defaults by radar kind.
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// Train a model from random initialization.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArgs,
        /// Feature store directory.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// Fine-tune a transfer-base checkpoint.
    Finetune {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        base_checkpoint: Option<PathBuf>,
    },
    /// Score a checkpoint (or a predictions table) on one split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, required_unless_present = "predictions")]
        checkpoint: Option<PathBuf>,
        /// CSV with `file,pred_hr` columns, used instead of a checkpoint.
        #[arg(long, conflicts_with = "checkpoint")]
        predictions: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SplitArg::Test)]
        split: SplitArg,
    },
    /// Run the ablation grid on a segment dataset.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file overriding preset fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Reduced budgets that finish on one machine (default).
    #[arg(long, conflicts_with = "paper_scale")]
    pub desk_scale: bool,
    /// Full-size step budgets, batch sizes and model width.
    #[arg(long)]
    pub paper_scale: bool,
}

impl ScaleArgs {
    fn scale(&self) -> Scale {
        if self.paper_scale {
            Scale::Paper
        } else {
            Scale::Desk
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Fmcw,
    Uwb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    FmcwFull,
    TransferBase,
    UwbFinetune,
    UwbScratch,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::FmcwFull => Regime::FmcwFull,
            RegimeArg::TransferBase => Regime::TransferBase,
            RegimeArg::UwbFinetune => Regime::UwbFinetune,
            RegimeArg::UwbScratch => Regime::UwbScratch,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Validation => Split::Validation,
            SplitArg::Test => Split::Test,
        }
    }
}

fn default_regime(kind: RadarKind) -> Regime {
    match kind {
        RadarKind::Fmcw => Regime::FmcwFull,
        RadarKind::IrUwb => Regime::UwbScratch,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match configure_threads().and_then(|()| execute(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Applies `RADAR_VITALS_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // A pool that already exists (repeated calls in one process) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate { common, preset } => simulate(&common, preset),
        Command::Preprocess { common, input, regime } => preprocess(&common, &input, regime),
        Command::Train {
            common,
            scale,
            input,
            regime,
        } => {
            let manifest = FeatureManifest::load(&input)?;
            let regime = regime.map_or_else(|| default_regime(manifest.radar_kind), Regime::from);
            fit(&common, scale.scale(), &input, &manifest, regime, None)
        }
        Command::Finetune {
            common,
            scale,
            input,
            base_checkpoint,
        } => {
            let base = base_checkpoint
                .ok_or_else(|| Error::Usage("finetune requires --base-checkpoint".into()))?;
            let manifest = FeatureManifest::load(&input)?;
            fit(&common, scale.scale(), &input, &manifest, Regime::UwbFinetune, Some(&base))
        }
        Command::Evaluate {
            common,
            input,
            checkpoint,
            predictions,
            split,
        } => evaluate(&common, &input, checkpoint.as_deref(), predictions.as_deref(), split.into()),
        Command::Ablate {
            common,
            scale,
            input,
            regime,
        } => ablate(&common, scale.scale(), &input, regime),
    }
}

fn simulate(common: &Common, preset: Preset) -> Result<()> {
    let kind = match preset {
        Preset::Fmcw => RadarKind::Fmcw,
        Preset::Uwb => RadarKind::IrUwb,
    };
    let mut cfg = load_over(SimulateConfig::preset(kind), common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.cohort.seed = seed;
    }
    let [train, ..] = radar_vitals_core::simkit::split_counts(cfg.cohort.subjects, &cfg.splits)?;
    if train == cfg.cohort.subjects && cfg.splits.train < 1.0 {
        eprintln!(
            "warning: {} subject(s) are too few for the split ratios; all go to train",
            cfg.cohort.subjects
        );
    }
    let m = simulate_dataset(&cfg, &common.out)?;
    println!(
        "wrote {} segments to {} (train {}, validation {}, test {})",
        m.segments.len(),
        common.out.display(),
        m.count(Split::Train),
        m.count(Split::Validation),
        m.count(Split::Test)
    );
    Ok(())
}

fn preprocess(common: &Common, input: &Path, regime: Option<RegimeArg>) -> Result<()> {
    let manifest = DatasetManifest::load(input)?;
    let regime = regime.map_or_else(|| default_regime(manifest.radar_kind), Regime::from);
    let cfg = load_over(PreprocessConfig::for_regime(regime), common.config.as_deref())?;
    let fm = preprocess_dataset(input, &cfg, &common.out)?;
    let (detected, offered) = fm.presence.iter().fold((0, 0), |(d, o), p| (d + p.detected as usize, o + 1));
    println!(
        "{} examples of width {} from {offered} segments ({detected} with a detected user)",
        fm.examples.len(),
        fm.width
    );
    Ok(())
}

/// Optimization summary written next to the checkpoint.
#[derive(Serialize)]
struct TrainingLog<'a> {
    regime: &'static str,
    config: &'a radar_vitals_core::train::TrainConfig,
    best_step: usize,
    best_validation_mae: Option<f64>,
    history: &'a [(usize, f64)],
    losses: &'a [f64],
}

fn examples(input: &Path, manifest: &FeatureManifest, split: Split) -> Result<Vec<Example>> {
    Ok(load_examples(input, manifest, split)?.into_iter().map(|(_, e)| e).collect())
}

fn fit(
    common: &Common,
    scale: Scale,
    input: &Path,
    manifest: &FeatureManifest,
    regime: Regime,
    base: Option<&Path>,
) -> Result<()> {
    let mut cfg = load_over(train_preset(regime, scale), common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let base = base.map(load_checkpoint).transpose()?;
    if let Some(b) = &base {
        if b.input_width != manifest.width {
            return Err(Error::Usage(format!(
                "base checkpoint expects {} feature rows, the feature store has {}",
                b.input_width, manifest.width
            )));
        }
        if b.spec != cfg.model {
            // Fine-tuning keeps the base architecture.
            cfg.model = b.spec.clone();
        }
    }
    let train_set = examples(input, manifest, Split::Train)?;
    let validation = examples(input, manifest, Split::Validation)?;
    let outcome = train(&cfg, &train_set, &validation, base.as_ref())?;
    save_checkpoint(&outcome.best, &common.out)?;
    crate::json::write(
        &common.out.join("training.json"),
        &TrainingLog {
            regime: regime.name(),
            config: &cfg,
            best_step: outcome.best.step,
            best_validation_mae: outcome.best.best_mae(),
            history: &outcome.best.history,
            losses: &outcome.losses,
        },
    )?;
    println!(
        "{}: {} steps on {} examples, best step {} (validation MAE {})",
        regime.name(),
        cfg.steps,
        train_set.len(),
        outcome.best.step,
        outcome.best.best_mae().map_or("n/a".into(), |m| format!("{m:.3} bpm"))
    );
    Ok(())
}

fn evaluate(
    common: &Common,
    input: &Path,
    checkpoint: Option<&Path>,
    supplied: Option<&Path>,
    split: Split,
) -> Result<()> {
    let manifest = FeatureManifest::load(input)?;
    let mut cfg = load_over(EvaluateConfig::default(), common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.report.bootstrap.seed = seed;
    }
    let loaded = load_examples(input, &manifest, split)?;
    if loaded.is_empty() {
        return Err(Error::Usage(format!("the {} split has no examples", split.name())));
    }
    let pred: Vec<f64> = match (checkpoint, supplied) {
        (Some(ck), _) => {
            let ck = load_checkpoint(ck)?;
            if ck.input_width != manifest.width {
                return Err(Error::Usage(format!(
                    "checkpoint expects {} feature rows, the feature store has {}",
                    ck.input_width, manifest.width
                )));
            }
            let inputs: Vec<FeatureTensor> = loaded.iter().map(|(_, e)| e.features.normalize()).collect();
            ck.predict(&inputs)?
        }
        (None, Some(csv)) => {
            let table: std::collections::HashMap<String, f64> = read_predictions(csv)?.into_iter().collect();
            loaded
                .iter()
                .map(|(r, _)| {
                    table
                        .get(&r.file)
                        .copied()
                        .ok_or_else(|| Error::Usage(format!("{} has no prediction for {}", csv.display(), r.file)))
                })
                .collect::<Result<_>>()?
        }
        (None, None) => return Err(Error::Usage("evaluate needs --checkpoint or --predictions".into())),
    };
    let records: Vec<_> = loaded.iter().map(|(r, _)| r.clone()).collect();
    let results = predictions(&records, &pred);
    let (detected, offered) = manifest.presence_counts(split);
    let output = build_report(split.name(), &results, detected, offered, &cfg.report)?;
    let rows: Vec<PredictionRow> = records
        .iter()
        .zip(&pred)
        .map(|(r, &p)| PredictionRow {
            file: r.file.clone(),
            subject: r.subject,
            truth_hr: r.label_hr,
            pred_hr: p,
        })
        .collect();
    write_evaluation(&common.out, &output, &rows)?;
    let r = &output.report;
    println!(
        "{}: MAE {:.3} bpm [{:.3}, {:.3}], MAPE {:.2}%, recall {:.3}, bias {:.3} bpm, LoA [{:.3}, {:.3}]",
        split.name(),
        r.mae,
        r.mae_ci[0],
        r.mae_ci[1],
        r.mape,
        r.recall,
        r.bland_altman.bias,
        r.bland_altman.loa_low,
        r.bland_altman.loa_high
    );
    Ok(())
}

fn ablate(common: &Common, scale: Scale, input: &Path, regime: Option<RegimeArg>) -> Result<()> {
    let manifest = DatasetManifest::load(input)?;
    let regime = regime.map_or_else(|| default_regime(manifest.radar_kind), Regime::from);
    let mut cfg = load_over(AblateConfig::preset(regime, scale), common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.train.seed = seed;
        cfg.bootstrap.seed = seed;
    }
    cfg.train.validate().map_err(|e| Error::Usage(e.to_string()))?;
    let spec = AblationSpec {
        train: cfg.train.clone(),
        cells: cfg.grid.cells(),
        bootstrap: cfg.bootstrap,
    };
    let rows = ablation_suite(&spec, |features| {
        let f = match featurize_dataset(input, &manifest, features, &cfg.cfar) {
            Ok(f) => f,
            Err(Error::Core(e)) => return Err(e),
            Err(e) => return Err(radar_vitals_core::Error::Rejected(e.to_string())),
        };
        if f.records.is_empty() {
            return Ok(None);
        }
        Ok(Some(Splits {
            train: f.examples(Split::Train),
            validation: f.examples(Split::Validation),
            test: f.examples(Split::Test),
        }))
    });
    write_ablation(&common.out, &rows)?;
    for r in &rows {
        match (r.mae, &r.absent) {
            (Some(m), _) => println!("{:<40} MAE {m:.3} bpm", r.name),
            (None, Some(why)) => println!("{:<40} absent: {why}", r.name),
            (None, None) => println!("{:<40} absent", r.name),
        }
    }
    Ok(())
}
