//! Command implementations behind the `ser` binary.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, SubsecRound, Utc};
use clap::{Parser, Subcommand};

use crate::analyzer::{
    daily_report, export_report, parse_timestamp, range_report, read_log, AdvisoryConfig, EmotionEvent,
    EmotionReport, EventLog, ReportFormat,
};
use crate::audio::synth::{write_tone_corpus, ToneSpec};
use crate::audio::{
    read_manifest_file, scan_dataset, standardize_length, stratified_split, write_manifest, AudioClip,
    ManifestEntry, Partition, SplitFractions,
};
use crate::error::{Error, Result};
use crate::label::{EmotionLabel, NUM_EMOTIONS};
use crate::metrics::{build_confusion, MetricsReport};
use crate::model::{load_params, param_count, save_params, EmotionModel, ModelConfig, Precision};
use crate::tensor::Scalar;
use crate::train::{argmax, fit, predict_classes, Sample, TrainRunLog};

pub const PARAMS_FILE: &str = "model.params";
pub const TRAIN_LOG_FILE: &str = "train_log.tsv";
pub const MANIFEST_FILE: &str = "split_manifest.tsv";
pub const REPORT_FILE: &str = "report.txt";
pub const REPORT_KV_FILE: &str = "report.kv";

#[derive(Debug, Parser)]
#[command(name = "ser", version, about = "Speech emotion recognition from raw waveforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a directory of labelled WAV files and evaluate on the held-out split.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate saved parameters on the clips listed in a split manifest.
    Evaluate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Only use entries from this partition (train, validation or test).
        #[arg(long)]
        partition: Option<Partition>,
        /// Write the text report here and key=value records next to it with a `.kv` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify one WAV file.
    Predict {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        wav: PathBuf,
        /// Append the prediction to this emotion event log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Event time (RFC 3339, whole seconds); defaults to now.
        #[arg(long)]
        timestamp: Option<String>,
        #[arg(long)]
        request_id: Option<String>,
    },
    /// Summarize an emotion event log.
    Report {
        #[arg(long)]
        log: PathBuf,
        /// Text report path; key=value records go to the same path plus `.kv`.
        #[arg(long)]
        out: PathBuf,
        /// Single UTC day (YYYY-MM-DD); defaults to the whole log.
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Print the trainable parameter count for a config file.
    ParamCount {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic tone corpus, one frequency per emotion.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 16_000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::MissingDirectory(_) => 3,
        Error::ConfigParse { .. } | Error::InvalidConfig(_) | Error::InfeasibleGeometry { .. } => 4,
        Error::MalformedHeader(_)
        | Error::UnsupportedEncoding(_)
        | Error::TruncatedData(_)
        | Error::UnrecognizedLabel { .. }
        | Error::MalformedManifest { .. }
        | Error::MalformedParams(_)
        | Error::MalformedEvent(_) => 5,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            data,
            out,
            seed,
        } => {
            let outcome = cmd_train(&config, &data, &out, seed)?;
            match &outcome.report {
                Some(r) => print!("{}", r.to_text()),
                None => println!("no test partition; report skipped"),
            }
            println!("wrote outputs to {}", out.display());
        }
        Command::Evaluate {
            params,
            manifest,
            partition,
            out,
        } => {
            let report = cmd_evaluate(&params, &manifest, partition)?;
            let text = report.to_text();
            match out {
                Some(path) => {
                    write_file(&path, &text)?;
                    write_file(&kv_path(&path), report.to_kv())?;
                }
                None => print!("{text}"),
            }
        }
        Command::Predict {
            params,
            wav,
            log,
            timestamp,
            request_id,
        } => {
            let timestamp = timestamp.as_deref().map(parse_timestamp).transpose()?;
            let p = cmd_predict(&params, &wav, log.as_deref(), timestamp, request_id)?;
            println!("{}", p.label);
            for (l, prob) in EmotionLabel::ALL.iter().zip(&p.probabilities) {
                println!("{:<10} {prob:.6}", l.name());
            }
        }
        Command::Report { log, out, date } => {
            let report = cmd_report(&log, &out, date)?;
            print!("{}", export_report(&report, ReportFormat::Text));
        }
        Command::ParamCount { config } => println!("{}", cmd_param_count(&config)?),
        Command::Synth {
            out,
            per_class,
            samples,
            seed,
        } => {
            let spec = ToneSpec {
                samples,
                ..Default::default()
            };
            let paths = write_tone_corpus(&out, &spec, per_class, seed)?;
            println!("wrote {} clips to {}", paths.len(), out.display());
        }
    }
    Ok(())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn kv_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".kv");
    PathBuf::from(s)
}

pub fn read_config(path: &Path) -> Result<ModelConfig> {
    ModelConfig::from_text(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn cmd_param_count(config: &Path) -> Result<usize> {
    param_count(&read_config(config)?)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub log: TrainRunLog,
    /// Evaluation on the test partition; `None` when the split has no test clips.
    pub report: Option<MetricsReport>,
    pub manifest: Vec<ManifestEntry>,
}

fn to_samples<T: Scalar>(clips: &[AudioClip], indices: &[usize], len: usize) -> Vec<Sample<T>> {
    indices
        .iter()
        .map(|&i| Sample {
            input: standardize_length(&clips[i].samples, len),
            label: clips[i].label.expect("scanned clips are labelled").code(),
        })
        .collect()
}

fn train_at<T: Scalar>(
    config: &ModelConfig,
    train: Vec<Sample<T>>,
    validation: Vec<Sample<T>>,
) -> Result<(EmotionModel<f32>, TrainRunLog)> {
    let mut model: EmotionModel<T> = EmotionModel::seeded(config)?;
    let log = fit(&mut model.net, &train, &validation, &config.fit_config(), &config.to_text())?;
    Ok((model.cast(), log))
}

/// Evaluates `model` on `samples` and builds the full metrics report.
pub fn evaluate_samples(model: &EmotionModel<f32>, samples: &[Sample<f32>]) -> Result<MetricsReport> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predicted = predict_classes(&model.net, samples)?;
    let truth: Vec<usize> = samples.iter().map(|s| s.label).collect();
    MetricsReport::from_confusion(build_confusion(&truth, &predicted, model.config.num_classes)?)
}

/// Scans `data`, splits, trains, evaluates on the test split and writes
/// the parameter file, training log, split manifest and report into `out`.
/// Nothing is left in `out` if any step fails.
pub fn cmd_train(config: &Path, data: &Path, out: &Path, seed: Option<u64>) -> Result<TrainOutcome> {
    let mut config = read_config(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if config.num_classes != NUM_EMOTIONS {
        return Err(Error::InvalidConfig(format!(
            "num_classes must be {NUM_EMOTIONS} for emotion data, got {}",
            config.num_classes
        )));
    }
    let scan = scan_dataset(data)?;
    if scan.clips.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let clips = scan.clips;
    let labels: Vec<EmotionLabel> = clips.iter().map(|c| c.label.expect("labelled")).collect();
    let fractions = SplitFractions::new(config.test_fraction, config.validation_fraction)?;
    let split = stratified_split(&labels, fractions, config.seed)?;
    log::info!(
        "{} clips: {} train, {} validation, {} test",
        clips.len(),
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );

    let len = config.input_samples;
    let (model, log) = match config.precision {
        Precision::F32 => train_at::<f32>(
            &config,
            to_samples(&clips, &split.train, len),
            to_samples(&clips, &split.validation, len),
        )?,
        Precision::F64 => train_at::<f64>(
            &config,
            to_samples(&clips, &split.train, len),
            to_samples(&clips, &split.validation, len),
        )?,
    };
    let report = if split.test.is_empty() {
        log::warn!("test partition is empty; skipping evaluation");
        None
    } else {
        Some(evaluate_samples(&model, &to_samples(&clips, &split.test, len))?)
    };
    let manifest: Vec<ManifestEntry> = (0..clips.len())
        .map(|i| ManifestEntry {
            path: clips[i].source.clone(),
            label: labels[i],
            partition: split.partition_of(i).expect("split covers every clip"),
        })
        .collect();

    let existed = out.exists();
    let written = write_train_outputs(out, &model, &log, &manifest, report.as_ref());
    if let Err(e) = written {
        for name in [PARAMS_FILE, TRAIN_LOG_FILE, MANIFEST_FILE, REPORT_FILE, REPORT_KV_FILE] {
            let _ = fs::remove_file(out.join(name));
        }
        if !existed {
            let _ = fs::remove_dir(out);
        }
        return Err(e);
    }
    Ok(TrainOutcome {
        log,
        report,
        manifest,
    })
}

fn write_train_outputs(
    out: &Path,
    model: &EmotionModel<f32>,
    log: &TrainRunLog,
    manifest: &[ManifestEntry],
    report: Option<&MetricsReport>,
) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    save_params(model, out.join(PARAMS_FILE))?;
    write_file(&out.join(TRAIN_LOG_FILE), log.to_tsv())?;
    write_file(&out.join(MANIFEST_FILE), write_manifest(manifest))?;
    if let Some(r) = report {
        write_file(&out.join(REPORT_FILE), r.to_text())?;
        write_file(&out.join(REPORT_KV_FILE), r.to_kv())?;
    }
    Ok(())
}

/// Loads the clips listed in `manifest` (optionally one partition only)
/// and evaluates the saved model on them.
pub fn cmd_evaluate(params: &Path, manifest: &Path, partition: Option<Partition>) -> Result<MetricsReport> {
    let model: EmotionModel<f32> = load_params(params)?;
    let entries: Vec<ManifestEntry> = read_manifest_file(manifest)?
        .into_iter()
        .filter(|e| partition.is_none_or(|p| e.partition == p))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let samples = entries
        .iter()
        .map(|e| {
            let clip = AudioClip::read(&e.path)?;
            Ok(Sample {
                input: standardize_length(&clip.samples, model.config.input_samples),
                label: e.label.code(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    evaluate_samples(&model, &samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: EmotionLabel,
    pub probabilities: Vec<f32>,
    /// The logged event, when a log was given.
    pub event: Option<EmotionEvent>,
}

pub fn predict_clip(model: &EmotionModel<f32>, samples: &[f32]) -> Result<(EmotionLabel, Vec<f32>)> {
    let probs = model.predict(&standardize_length(samples, model.config.input_samples))?;
    let code = argmax(probs.data());
    let label = EmotionLabel::from_code(code).ok_or(Error::LabelOutOfRange {
        label: code,
        classes: NUM_EMOTIONS,
    })?;
    Ok((label, probs.into_data()))
}

/// Classifies one file. With `log`, appends an event stamped `timestamp`
/// (default: now) whose confidence is the winning probability. A file that
/// fails to decode logs nothing.
pub fn cmd_predict(
    params: &Path,
    wav: &Path,
    log: Option<&Path>,
    timestamp: Option<DateTime<Utc>>,
    request_id: Option<String>,
) -> Result<Prediction> {
    let model: EmotionModel<f32> = load_params(params)?;
    if model.config.num_classes != NUM_EMOTIONS {
        return Err(Error::InvalidConfig(format!(
            "model has {} classes, expected {NUM_EMOTIONS}",
            model.config.num_classes
        )));
    }
    let clip = AudioClip::read(wav)?;
    let (label, probabilities) = predict_clip(&model, &clip.samples)?;
    let event = match log {
        Some(path) => {
            let ts = timestamp.unwrap_or_else(|| Utc::now().trunc_subsecs(0));
            let id = request_id.unwrap_or_else(|| format!("req-{}", ts.timestamp()));
            let confidence = probabilities[label.code()].clamp(0.0, 1.0) as f64;
            let event = EmotionEvent::new(ts, label, confidence, id)?;
            EventLog::open(path)?.record(&event)?;
            Some(event)
        }
        None => None,
    };
    Ok(Prediction {
        label,
        probabilities,
        event,
    })
}

/// Reports on one UTC day, or on the whole span of the log when `date` is
/// `None`, writing the text form to `out` and the machine form to `out.kv`.
pub fn cmd_report(log: &Path, out: &Path, date: Option<NaiveDate>) -> Result<EmotionReport> {
    let events = read_log(log)?;
    let config = AdvisoryConfig::default();
    let report = match date {
        Some(d) => daily_report(&events, d, &config),
        None => {
            let days = events.iter().map(|e| e.timestamp.date_naive());
            let today = Utc::now().date_naive();
            let start = days.clone().min().unwrap_or(today);
            let end = days.max().unwrap_or(today);
            range_report(&events, start, end, &config)
        }
    };
    write_file(out, export_report(&report, ReportFormat::Text))?;
    write_file(&kv_path(out), export_report(&report, ReportFormat::Machine))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_train_arguments() {
        let cli = Cli::try_parse_from([
            "ser", "train", "--config", "c.cfg", "--data", "d", "--out", "o", "--seed", "9",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Train { seed: Some(9), .. }));
        assert!(Cli::try_parse_from(["ser", "report", "--log", "l"]).is_err());
    }

    #[test]
    fn kv_path_appends_suffix() {
        assert_eq!(kv_path(Path::new("a/report.txt")), PathBuf::from("a/report.txt.kv"));
    }

    #[test]
    fn exit_codes_are_nonzero() {
        assert_eq!(exit_code(&Error::MissingDirectory("x".into())), 3);
        assert_eq!(exit_code(&Error::EmptyDataset), 1);
    }
}
