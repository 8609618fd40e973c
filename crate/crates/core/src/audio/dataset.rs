use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use walkdir::WalkDir;

use super::AudioClip;
use crate::error::{Error, Result};
use crate::label::{EmotionLabel, NUM_EMOTIONS};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFailure {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    /// Labelled clips in lexicographic path order.
    pub clips: Vec<AudioClip>,
    pub failures: Vec<ScanFailure>,
    /// Clip count per label code.
    pub counts: [usize; NUM_EMOTIONS],
    pub warnings: Vec<String>,
}

/// Recursively loads every `.wav` file under `root`. Files that cannot be
/// read, decoded or labelled are recorded in `failures` and skipped.
pub fn scan_dataset(root: impl AsRef<Path>) -> Result<ScanReport> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::MissingDirectory(root.to_path_buf()));
    }
    let mut paths = Vec::new();
    let mut report = ScanReport::default();
    for entry in WalkDir::new(root) {
        match entry {
            Ok(e) => {
                let is_wav = e
                    .path()
                    .extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| x.eq_ignore_ascii_case("wav"));
                if e.file_type().is_file() && is_wav {
                    paths.push(e.into_path());
                }
            }
            Err(e) => report.failures.push(ScanFailure {
                path: e.path().map(Path::to_path_buf).unwrap_or_default(),
                error: e.to_string(),
            }),
        }
    }
    paths.sort();
    for path in paths {
        match AudioClip::read_labelled(&path) {
            Ok(clip) => {
                report.counts[clip.label.expect("labelled").code()] += 1;
                report.clips.push(clip);
            }
            Err(e) => report.failures.push(ScanFailure {
                error: e.to_string(),
                path,
            }),
        }
    }

    if report.clips.is_empty() {
        report.warnings.push(format!("no clips found under {}", root.display()));
    } else {
        let max = report.counts.iter().max().copied().unwrap_or(0);
        let min = report.counts.iter().min().copied().unwrap_or(0);
        if max != min {
            let detail: Vec<String> = EmotionLabel::ALL
                .iter()
                .map(|l| format!("{l}={}", report.counts[l.code()]))
                .collect();
            report.warnings.push(format!("unbalanced classes: {}", detail.join(" ")));
        }
    }
    for f in &report.failures {
        log::warn!("skipped {}: {}", f.path.display(), f.error);
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(report)
}

/// `train + test = 1`; `validation` is the share of the training part held
/// out for validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            test: 0.2,
            validation: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn new(test: f64, validation: f64) -> Result<Self> {
        let f = Self {
            train: 1.0 - test,
            test,
            validation,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(in_unit(self.train) && in_unit(self.test) && in_unit(self.validation)) {
            return Err(Error::BadFractions(format!("{self:?} has a value outside [0, 1]")));
        }
        if (self.train + self.test - 1.0).abs() > 1e-9 {
            return Err(Error::BadFractions(format!(
                "train {} + test {} does not sum to 1",
                self.train, self.test
            )));
        }
        Ok(())
    }
}

/// Indices into the clip list passed to [`stratified_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub fractions: SplitFractions,
}

impl DatasetSplit {
    pub fn partition_of(&self, index: usize) -> Option<Partition> {
        [
            (Partition::Train, &self.train),
            (Partition::Validation, &self.validation),
            (Partition::Test, &self.test),
        ]
        .into_iter()
        .find(|(_, v)| v.contains(&index))
        .map(|(p, _)| p)
    }
}

/// Splits each class separately: its clips are shuffled with a generator
/// seeded from `seed`, then `round(n·test)` go to test and
/// `round((n − n_test)·validation)` of the rest to validation.
/// Each output list is sorted.
pub fn stratified_split(labels: &[EmotionLabel], fractions: SplitFractions, seed: u64) -> Result<DatasetSplit> {
    fractions.validate()?;
    let mut split = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
        fractions,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for label in EmotionLabel::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if members.is_empty() {
            return Err(Error::EmptyClass(label.to_string()));
        }
        members.shuffle(&mut rng);
        let n = members.len();
        let n_test = (n as f64 * fractions.test).round() as usize;
        let n_val = ((n - n_test) as f64 * fractions.validation).round() as usize;
        split.test.extend_from_slice(&members[..n_test]);
        split.validation.extend_from_slice(&members[n_test..n_test + n_val]);
        split.train.extend_from_slice(&members[n_test + n_val..]);
    }
    split.train.sort_unstable();
    split.validation.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
            Partition::Test => "test",
        })
    }
}

impl FromStr for Partition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Partition::Train),
            "validation" | "val" => Ok(Partition::Validation),
            "test" => Ok(Partition::Test),
            _ => Err(format!("unknown partition {s:?}")),
        }
    }
}

/// One `path<TAB>label<TAB>partition` line of a split manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: EmotionLabel,
    pub partition: Partition,
}

pub fn write_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&format!("{}\t{}\t{}\n", e.path, e.label, e.partition));
    }
    out
}

pub fn read_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::MalformedManifest { line: i + 1, msg };
        let fields: Vec<&str> = line.split('\t').collect();
        let [path, label, partition] = fields[..] else {
            return Err(err(format!("expected 3 tab-separated fields, got {}", fields.len())));
        };
        out.push(ManifestEntry {
            path: path.to_string(),
            label: EmotionLabel::from_token(label).ok_or_else(|| err(format!("unknown label {label:?}")))?,
            partition: partition.parse().map_err(err)?,
        });
    }
    Ok(out)
}

pub fn read_manifest_file(path: &Path) -> Result<Vec<ManifestEntry>> {
    read_manifest(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
