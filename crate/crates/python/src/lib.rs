//! Python bindings for the speech emotion recognition engine.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use ser_core::analyzer::{
    self, export_report, parse_timestamp, AdvisoryConfig, EmotionEvent, ReportFormat,
};
use ser_core::audio::{parse_wav as decode_wav, write_wav as encode_wav};
use ser_core::cli::predict_clip;
use ser_core::error::Error;
use ser_core::label::{self, EmotionLabel};
use ser_core::metrics::{self, build_confusion, MetricsReport};
use ser_core::model::{self, load_params, EmotionModel, ModelConfig};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::MissingDirectory(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Emotion names in class-code order.
#[pyfunction]
fn labels() -> Vec<&'static str> {
    EmotionLabel::ALL.iter().map(|l| l.name()).collect()
}

#[pyfunction]
fn label_from_path(path: PathBuf) -> PyResult<&'static str> {
    label::label_from_path(path).map(EmotionLabel::name).map_err(py_err)
}

/// Decodes 16-bit PCM WAV bytes into `(samples, sample_rate)`.
#[pyfunction]
fn parse_wav(data: &[u8]) -> PyResult<(Vec<f32>, u32)> {
    let w = decode_wav(data).map_err(py_err)?;
    Ok((w.samples, w.sample_rate))
}

#[pyfunction]
fn write_wav<'py>(py: Python<'py>, samples: Vec<f32>, sample_rate: u32) -> Bound<'py, PyBytes> {
    PyBytes::new(py, &encode_wav(&samples, sample_rate))
}

#[pyfunction]
fn kappa(observed: f64, expected: f64) -> PyResult<f64> {
    metrics::kappa(observed, expected).map_err(py_err)
}

#[pyfunction]
fn youden(sensitivity: f64, specificity: f64) -> PyResult<f64> {
    metrics::youden(sensitivity, specificity).map_err(py_err)
}

/// Full metrics report for label sequences, as the key=value text records.
#[pyfunction]
#[pyo3(signature = (truth, predicted, classes = 7))]
fn metrics_report(truth: Vec<usize>, predicted: Vec<usize>, classes: usize) -> PyResult<String> {
    let cm = build_confusion(&truth, &predicted, classes).map_err(py_err)?;
    Ok(MetricsReport::from_confusion(cm).map_err(py_err)?.to_kv())
}

/// Trainable parameter count for a `key = value` config text (empty text
/// means the defaults).
#[pyfunction]
#[pyo3(signature = (config_text = ""))]
fn param_count(config_text: &str) -> PyResult<usize> {
    let config = ModelConfig::from_text(config_text).map_err(py_err)?;
    model::param_count(&config).map_err(py_err)
}

#[pyfunction]
fn default_config() -> String {
    ModelConfig::default().to_text()
}

/// A trained classifier loaded from a parameter file.
#[pyclass(frozen)]
struct Model {
    inner: EmotionModel<f32>,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_params(path).map_err(py_err)?,
        })
    }

    /// Builds an untrained model from config text.
    #[staticmethod]
    #[pyo3(signature = (config_text = ""))]
    fn untrained(config_text: &str) -> PyResult<Self> {
        let config = ModelConfig::from_text(config_text).map_err(py_err)?;
        Ok(Self {
            inner: EmotionModel::seeded(&config).map_err(py_err)?,
        })
    }

    #[getter]
    fn input_samples(&self) -> usize {
        self.inner.config.input_samples
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.net.param_count()
    }

    /// Returns `(label, probabilities)`; the waveform is cropped or padded
    /// to the model's input length.
    fn predict(&self, py: Python<'_>, samples: Vec<f32>) -> PyResult<(&'static str, Vec<f32>)> {
        let (label, probs) = py
            .detach(|| predict_clip(&self.inner, &samples))
            .map_err(py_err)?;
        Ok((label.name(), probs))
    }
}

/// Append-only emotion event log.
#[pyclass]
struct EventLog {
    inner: analyzer::EventLog,
}

#[pymethods]
impl EventLog {
    #[new]
    fn new(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: analyzer::EventLog::open(path).map_err(py_err)?,
        })
    }

    /// Appends one event; `timestamp` is RFC 3339 at whole seconds.
    fn record(&mut self, timestamp: &str, label: &str, confidence: f64, request_id: &str) -> PyResult<()> {
        let label: EmotionLabel = label.parse().map_err(py_err)?;
        let ts = parse_timestamp(timestamp).map_err(py_err)?;
        let event = EmotionEvent::new(ts, label, confidence, request_id).map_err(py_err)?;
        self.inner.record(&event).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Report for one UTC day (`YYYY-MM-DD`) in `text` or `machine` format.
    #[pyo3(signature = (date, format = "machine"))]
    fn daily_report(&self, date: &str, format: &str) -> PyResult<String> {
        let format: ReportFormat = format.parse().map_err(py_err)?;
        let day = chrono_date(date)?;
        let events = self.inner.events().map_err(py_err)?;
        let report = analyzer::daily_report(&events, day, &AdvisoryConfig::default());
        Ok(export_report(&report, format))
    }
}

fn chrono_date(s: &str) -> PyResult<analyzer::NaiveDate> {
    s.parse()
        .map_err(|e| PyValueError::new_err(format!("date {s:?}: {e}")))
}

#[pymodule]
fn ser_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(labels, m)?)?;
    m.add_function(wrap_pyfunction!(label_from_path, m)?)?;
    m.add_function(wrap_pyfunction!(parse_wav, m)?)?;
    m.add_function(wrap_pyfunction!(write_wav, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(youden, m)?)?;
    m.add_function(wrap_pyfunction!(metrics_report, m)?)?;
    m.add_function(wrap_pyfunction!(param_count, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_class::<Model>()?;
    m.add_class::<EventLog>()?;
    Ok(())
}
