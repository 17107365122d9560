//! The `scf` command line. Exit codes: 0 success, 1 input or configuration
//! error, 2 failed verification, 3 internal error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::audio::{load_audio, spectrogram};
use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::data::{read_dataset, synth_generate, write_dataset, EmbeddingDataset, Scenario};
use crate::error::{Result, ScfError};
use crate::field::{AreaState, ScfModel, ScfParams, Stimulus};
use crate::trainer::gradcheck::small_problem;
use crate::trainer::{cross_validate_with, gradient_check, train, Encoder, ModelKind};

#[derive(Debug, Parser)]
#[command(name = "scf", version, about = "Neural-field fusion of audio and visual embeddings")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured root seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Magnitude spectrogram of a 16-bit mono WAV clip.
    Spectrogram {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Write a plain-text matrix (one frame per line) instead of an SCFE file.
        #[arg(long)]
        text: bool,
    },
    /// Generate the synthetic coincidence dataset.
    Synth {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train one classifier on a dataset; writes a checkpoint and a history table.
    Train {
        data: PathBuf,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Cross-validate a freshly initialized classifier; writes a fold report.
    Eval {
        data: PathBuf,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        scenario: Option<Scenario>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare analytic gradients with finite differences on a small model.
    Gradcheck {
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Run the field on one instance; writes the fused embedding and every step's activity.
    Simulate {
        stimulus: PathBuf,
        /// Instance of the stimulus file to present.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Trained parameters; a fresh field from the config is used otherwise.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let mut config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.global.seed {
        config.seed = seed;
    }
    match &cli.command {
        Command::Spectrogram { input, output, text } => cmd_spectrogram(&config, input, output, *text),
        Command::Synth { output } => {
            let path = output.clone().unwrap_or_else(|| config.output_dir.join("synth.scfe"));
            cmd_synth(&config, &path)
        }
        Command::Train { data, model, out_dir } => {
            let dir = out_dir.clone().unwrap_or_else(|| config.output_dir.clone());
            cmd_train(&config, data, model.clone().unwrap_or(config.eval.model.clone()), &dir)
        }
        Command::Eval {
            data,
            model,
            scenario,
            folds,
            output,
        } => {
            if let Some(m) = model {
                config.eval.model = m.clone();
            }
            if let Some(s) = scenario {
                config.eval.scenario = *s;
            }
            if let Some(k) = folds {
                config.eval.folds = *k;
            }
            let path = output.clone().unwrap_or_else(|| {
                config
                    .output_dir
                    .join(format!("report_{}_{}.txt", config.eval.model.name(), config.eval.scenario))
            });
            cmd_eval(&config, data, &path)
        }
        Command::Gradcheck { step, tolerance } => cmd_gradcheck(&config, *step, *tolerance),
        Command::Simulate {
            stimulus,
            index,
            checkpoint,
            out_dir,
        } => {
            let dir = out_dir.clone().unwrap_or_else(|| config.output_dir.join("simulate"));
            cmd_simulate(&config, stimulus, *index, checkpoint.as_deref(), &dir)
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| ScfError::io(dir, e)),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| ScfError::io(path, e))
}

pub fn cmd_spectrogram(config: &RunConfig, input: &Path, output: &Path, text: bool) -> Result<()> {
    let (samples, rate) = load_audio(input)?;
    if rate != config.spectrogram.sample_rate {
        return Err(ScfError::input(format!(
            "{}: sample rate {rate} Hz differs from the configured {} Hz",
            input.display(),
            config.spectrogram.sample_rate
        )));
    }
    let spec = spectrogram(&samples, &config.spectrogram)?;
    if text {
        write_text(output, &spec.to_text())?;
    } else {
        let clip = input.file_stem().map_or_else(|| "clip".into(), |s| s.to_string_lossy().into_owned());
        ensure_parent(output)?;
        write_dataset(&spec.to_dataset(&clip), output)?;
    }
    println!("{} frames x {} bins -> {}", spec.frames.len(), spec.bins(), output.display());
    Ok(())
}

pub fn cmd_synth(config: &RunConfig, output: &Path) -> Result<()> {
    let out = synth_generate(&config.synth_config())?;
    ensure_parent(output)?;
    write_dataset(&out.dataset, output)?;
    let positives = out.dataset.instances.iter().filter(|i| i.label == 1).count();
    println!(
        "{} instances ({positives} positive), {} groups -> {}",
        out.dataset.len(),
        out.dataset.groups().len(),
        output.display()
    );
    Ok(())
}

fn load_data(path: &Path) -> Result<EmbeddingDataset> {
    let dataset = read_dataset(path)?;
    dataset.validate()?;
    Ok(dataset)
}

pub fn cmd_train(config: &RunConfig, data: &Path, model: ModelKind, out_dir: &Path) -> Result<()> {
    let dataset = load_data(data)?;
    let classifier = config
        .recipe(model)
        .build(dataset.audio_dim, dataset.visual_dim, config.init_seed())?;
    let outcome = train(classifier, &dataset.samples(), &config.train_config())?;
    fs::create_dir_all(out_dir).map_err(|e| ScfError::io(out_dir, e))?;
    let ckpt = Checkpoint {
        classifier: outcome.classifier.to_params(),
        optimizer: outcome.optimizer,
        config: config.clone(),
        history: outcome.history,
    };
    ckpt.save(out_dir.join("checkpoint.scfk"))?;
    write_text(&out_dir.join("history.txt"), &ckpt.history.to_table())?;
    let best = &ckpt.history.epochs[ckpt.history.best_epoch - 1];
    println!(
        "best epoch {} of {}: val loss {:.6}, val accuracy {:.4} -> {}",
        best.epoch,
        ckpt.history.epochs.len(),
        best.val_loss,
        best.val_accuracy,
        out_dir.display()
    );
    Ok(())
}

pub fn cmd_eval(config: &RunConfig, data: &Path, output: &Path) -> Result<()> {
    let dataset = load_data(data)?;
    let recipe = config.recipe(config.eval.model.clone());
    let report = cross_validate_with(
        &dataset,
        config.eval.scenario,
        config.eval.folds,
        &recipe,
        &config.train_config(),
        |fold, acc| eprintln!("fold {fold}: accuracy {acc:.4}"),
    )?;
    let table = report.to_table();
    write_text(output, &table)?;
    print!("{table}");
    Ok(())
}

pub fn cmd_gradcheck(config: &RunConfig, step: f64, tolerance: f64) -> Result<()> {
    let (classifier, batch) = small_problem(config.seed)?;
    let report = gradient_check(&classifier, &batch, step, tolerance)?;
    println!(
        "checked {} parameters ({} below {:e} skipped), max relative error {:.3e}",
        report.checked,
        report.skipped,
        crate::trainer::gradcheck::MIN_CHECKED_GRADIENT,
        report.max_relative_error()
    );
    if report.passed() {
        Ok(())
    } else {
        for f in &report.failures {
            println!(
                "parameter {}: analytic {:e} numeric {:e} relative error {:.3e}",
                f.index, f.analytic, f.numeric, f.relative_error
            );
        }
        Err(ScfError::Verification(format!(
            "{} of {} gradients exceed relative error {tolerance:e}",
            report.failures.len(),
            report.checked
        )))
    }
}

fn grid_text(out: &mut String, area: &AreaState) {
    for r in 0..area.shape.rows {
        let row: Vec<String> = (0..area.shape.cols).map(|c| format!("{:.9e}", area.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn cmd_simulate(
    config: &RunConfig,
    stimulus: &Path,
    index: usize,
    checkpoint: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let dataset = load_data(stimulus)?;
    let instance = dataset.instances.get(index).ok_or_else(|| {
        ScfError::input(format!(
            "{}: instance {index} requested, file holds {}",
            stimulus.display(),
            dataset.len()
        ))
    })?;
    let model = match checkpoint {
        Some(path) => match Checkpoint::load(path)?.classifier()?.encoder() {
            Encoder::Fusion(model) => model.clone(),
            Encoder::Concat { .. } => {
                return Err(ScfError::input(format!("{}: checkpoint holds a concat baseline", path.display())))
            }
        },
        None => {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(config.init_seed());
            let dims = [("audio", dataset.audio_dim), ("visual", dataset.visual_dim)];
            ScfModel::new(ScfParams::from_config(&config.field, &dims, &mut rng)?)?
        }
    };
    let sample = instance.sample();
    let stimuli = vec![
        Stimulus::new("audio", sample.inputs[0].clone()),
        Stimulus::new("visual", sample.inputs[1].clone()),
    ];
    let snapshots = model.run_with_snapshots(&stimuli)?;
    let last = snapshots.last().expect("at least the initial state");

    let mut embedding = String::new();
    grid_text(&mut embedding, &last.multimodal);
    let mut steps = String::new();
    let names: Vec<String> = model.modalities().map(|(n, _)| n.to_string()).collect();
    for (n, state) in snapshots.iter().enumerate() {
        for (name, area) in names.iter().zip(&state.unimodal) {
            writeln!(steps, "# step {n} area {name}").unwrap();
            grid_text(&mut steps, area);
        }
        writeln!(steps, "# step {n} area multimodal").unwrap();
        grid_text(&mut steps, &state.multimodal);
    }
    write_text(&out_dir.join("embedding.txt"), &embedding)?;
    write_text(&out_dir.join("snapshots.txt"), &steps)?;
    let peak = last.multimodal.activity.iter().copied().fold(0.0, f64::max);
    println!(
        "{} (label {}): {} steps, peak multimodal activity {peak:.4} -> {}",
        instance.clip_id,
        instance.label,
        model.steps(),
        out_dir.display()
    );
    Ok(())
}
