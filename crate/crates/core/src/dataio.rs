//! Dataset manifests, per-patient CSV files, the synthetic EEG generator and
//! the stratified train/test splitter.
//!
//! Layout of a dataset directory:
//!
//! ```text
//! manifest.json
//! patients/<id>.csv
//! ```
//!
//! Each CSV starts with a header naming the channels (in manifest order),
//! followed by one row per sample of decimal microvolts. Values are written
//! in shortest round-trip form so a write/read cycle is exact.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::hv::Seed;
use crate::memory::Class;
use crate::preprocess::EegRecording;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PATIENT_DIR: &str = "patients";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatientEntry {
    pub id: String,
    pub label: Class,
    /// Path of the CSV file relative to the manifest.
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub sample_rate_hz: f64,
    pub channels: Vec<String>,
    pub patients: Vec<PatientEntry>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(HdcError::Validation("manifest lists no channels".into()));
        }
        if self.patients.is_empty() {
            return Err(HdcError::Validation("manifest lists no patients".into()));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(HdcError::Validation("manifest sample rate must be positive".into()));
        }
        let mut channels = HashSet::new();
        for c in &self.channels {
            if c.is_empty() || !channels.insert(c) {
                return Err(HdcError::Validation(format!("bad or duplicate channel name {c:?}")));
            }
        }
        let mut ids = HashSet::new();
        for p in &self.patients {
            if p.id.is_empty() || !ids.insert(&p.id) {
                return Err(HdcError::Validation(format!("bad or duplicate patient id {:?}", p.id)));
            }
        }
        Ok(())
    }

    pub fn count(&self, class: Class) -> usize {
        self.patients.iter().filter(|p| p.label == class).count()
    }
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| HdcError::io(path, e))?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| HdcError::Validation(format!("{}: {e}", path.display())))?;
    manifest.validate()?;
    Ok(manifest)
}

pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serialises");
    text.push('\n');
    fs::write(path, text).map_err(|e| HdcError::io(path, e))
}

/// A manifest together with its loaded recordings, in manifest order.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub recordings: Vec<EegRecording>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Option<&EegRecording> {
        self.recordings.iter().find(|r| r.patient_id == id)
    }

    /// Recordings for `ids`, in the order given.
    pub fn select(&self, ids: &[String]) -> Result<Vec<EegRecording>> {
        ids.iter()
            .map(|id| {
                self.get(id)
                    .cloned()
                    .ok_or_else(|| HdcError::Validation(format!("unknown patient {id:?}")))
            })
            .collect()
    }
}

/// Reads the manifest and every patient file it references.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let recordings = manifest
        .patients
        .iter()
        .map(|p| {
            read_patient_csv(
                &root.join(&p.file),
                &p.id,
                p.label,
                &manifest.channels,
                manifest.sample_rate_hz,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { manifest, recordings })
}

pub fn read_patient_csv(
    path: &Path,
    patient_id: &str,
    label: Class,
    channels: &[String],
    sample_rate_hz: f64,
) -> Result<EegRecording> {
    let file = fs::File::open(path).map_err(|e| HdcError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != channels {
        return Err(HdcError::Validation(format!(
            "patient {patient_id}: header {header:?} does not match manifest channels {channels:?}"
        )));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); channels.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() > channels.len() {
            return Err(HdcError::Validation(format!(
                "patient {patient_id}: row {row} has {} fields for {} channels",
                record.len(),
                channels.len()
            )));
        }
        for (c, name) in channels.iter().enumerate() {
            let field = record.get(c).unwrap_or("");
            if field.is_empty() {
                return Err(HdcError::Validation(format!(
                    "patient {patient_id}: channel {name} is missing a sample at row {row}"
                )));
            }
            let value: f64 = field.parse().map_err(|_| {
                HdcError::Validation(format!(
                    "patient {patient_id}: channel {name} has unparsable value {field:?} at row {row}"
                ))
            })?;
            if !value.is_finite() {
                return Err(HdcError::Validation(format!(
                    "patient {patient_id}: channel {name} has a non-finite sample at index {row}"
                )));
            }
            columns[c].push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(HdcError::Validation(format!("patient {patient_id}: no samples")));
    }
    EegRecording::new(patient_id, label, channels.to_vec(), columns, sample_rate_hz)
}

fn csv_error(path: &Path, e: csv::Error) -> HdcError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => HdcError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        HdcError::Validation(format!("{}: {e}", path.display()))
    }
}

pub fn write_patient_csv(path: &Path, rec: &EegRecording) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer.write_record(rec.channels()).map_err(|e| csv_error(path, e))?;
    let mut row = Vec::with_capacity(rec.channels().len());
    for i in 0..rec.len() {
        row.clear();
        row.extend(rec.samples().iter().map(|c| c[i].to_string()));
        writer.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| HdcError::io(path, e))
}

/// Writes a manifest and its recordings as a dataset directory.
pub fn write_dataset(dir: &Path, manifest: &DatasetManifest, recordings: &[EegRecording]) -> Result<PathBuf> {
    manifest.validate()?;
    fs::create_dir_all(dir.join(PATIENT_DIR)).map_err(|e| HdcError::io(dir, e))?;
    for (entry, rec) in manifest.patients.iter().zip(recordings) {
        write_patient_csv(&dir.join(&entry.file), rec)?;
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    write_manifest(&manifest_path, manifest)?;
    Ok(manifest_path)
}

/// Signal parameters for one synthetic class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSignal {
    pub frequency_hz: f64,
    pub amplitude_uv: f64,
    pub noise_std_uv: f64,
}

/// Two-class sinusoid-plus-noise fixture.
///
/// Channel `c` of every patient is `A sin(2 pi f t + c pi / 4) + N(0, sigma^2)`
/// with the class's `f`, `A` and `sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub patients_per_class: usize,
    pub samples_per_channel: usize,
    pub sample_rate_hz: f64,
    pub channels: Vec<String>,
    pub adhd: ClassSignal,
    pub control: ClassSignal,
    /// Highest frequency allowed for either class (the post-downsample Nyquist rate).
    pub max_frequency_hz: f64,
    pub seed: Seed,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            patients_per_class: 20,
            samples_per_channel: 7680,
            sample_rate_hz: 256.0,
            channels: vec!["F4".into(), "Cz".into()],
            adhd: ClassSignal {
                frequency_hz: 6.0,
                amplitude_uv: 50.0,
                noise_std_uv: 10.0,
            },
            control: ClassSignal {
                frequency_hz: 12.0,
                amplitude_uv: 50.0,
                noise_std_uv: 10.0,
            },
            max_frequency_hz: 16.0,
            seed: Seed(0),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.patients_per_class == 0 {
            return Err(HdcError::invalid("need at least one patient per class"));
        }
        if self.samples_per_channel == 0 {
            return Err(HdcError::invalid("need at least one sample per channel"));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(HdcError::invalid("sample rate must be positive"));
        }
        if self.channels.is_empty() {
            return Err(HdcError::invalid("need at least one channel"));
        }
        for (class, s) in [(Class::Adhd, &self.adhd), (Class::Control, &self.control)] {
            if !(s.frequency_hz.is_finite() && s.frequency_hz > 0.0 && s.frequency_hz <= self.max_frequency_hz) {
                return Err(HdcError::invalid(format!(
                    "{class} frequency {} Hz must be in (0, {}]",
                    s.frequency_hz, self.max_frequency_hz
                )));
            }
            if !(s.amplitude_uv.is_finite() && s.noise_std_uv.is_finite() && s.noise_std_uv >= 0.0) {
                return Err(HdcError::invalid(format!(
                    "{class} amplitude/noise must be finite, noise >= 0"
                )));
            }
        }
        Ok(())
    }

    fn signal(&self, class: Class) -> &ClassSignal {
        match class {
            Class::Adhd => &self.adhd,
            Class::Control => &self.control,
        }
    }
}

fn synthetic_id(class: Class, i: usize) -> String {
    match class {
        Class::Adhd => format!("A{:03}", i + 1),
        Class::Control => format!("C{:03}", i + 1),
    }
}

/// Generates the synthetic dataset. Patient `p` (ADHD first, then CONTROL)
/// draws its noise from `seed.derive(p)`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(DatasetManifest, Vec<EegRecording>)> {
    spec.validate()?;
    let mut patients = Vec::new();
    let mut recordings = Vec::new();
    for class in Class::ALL {
        let signal = spec.signal(class);
        let noise = Normal::new(0.0, signal.noise_std_uv).map_err(|e| HdcError::invalid(e.to_string()))?;
        for i in 0..spec.patients_per_class {
            let id = synthetic_id(class, i);
            let mut rng = spec.seed.derive(recordings.len() as u64).rng();
            let columns: Vec<Vec<f64>> = (0..spec.channels.len())
                .map(|c| {
                    let phase = c as f64 * std::f64::consts::FRAC_PI_4;
                    (0..spec.samples_per_channel)
                        .map(|t| {
                            let time = t as f64 / spec.sample_rate_hz;
                            let clean = signal.amplitude_uv
                                * (std::f64::consts::TAU * signal.frequency_hz * time + phase).sin();
                            clean + noise.sample(&mut rng)
                        })
                        .collect()
                })
                .collect();
            recordings.push(EegRecording::new(
                id.clone(),
                class,
                spec.channels.clone(),
                columns,
                spec.sample_rate_hz,
            )?);
            patients.push(PatientEntry {
                file: format!("{PATIENT_DIR}/{id}.csv"),
                id,
                label: class,
            });
        }
    }
    let manifest = DatasetManifest {
        name: "synthetic".into(),
        sample_rate_hz: spec.sample_rate_hz,
        channels: spec.channels.clone(),
        patients,
    };
    Ok((manifest, recordings))
}

/// Per-class patient counts for the two sides of a split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train_adhd: usize,
    pub train_control: usize,
    pub test_adhd: usize,
    pub test_control: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        SplitCounts {
            train_adhd: 27,
            train_control: 32,
            test_adhd: 10,
            test_control: 10,
        }
    }
}

impl SplitCounts {
    pub fn train_total(&self) -> usize {
        self.train_adhd + self.train_control
    }

    pub fn test_total(&self) -> usize {
        self.test_adhd + self.test_control
    }
}

/// Patient ids on each side of a split. `train` is in training order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded stratified split.
///
/// Each class's ids (manifest order) are shuffled, ADHD first; the first
/// `train_*` go to training and the next `test_*` to test. The combined
/// training list is then shuffled again to fix the training order. All
/// shuffles draw from one `seed` stream.
pub fn split(manifest: &DatasetManifest, counts: SplitCounts, seed: Seed) -> Result<Split> {
    let mut rng = seed.rng();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, n_train, n_test) in [
        (Class::Adhd, counts.train_adhd, counts.test_adhd),
        (Class::Control, counts.train_control, counts.test_control),
    ] {
        let mut ids: Vec<String> = manifest
            .patients
            .iter()
            .filter(|p| p.label == class)
            .map(|p| p.id.clone())
            .collect();
        if n_train + n_test > ids.len() {
            return Err(HdcError::invalid(format!(
                "split needs {} {class} patients but the dataset has {}",
                n_train + n_test,
                ids.len()
            )));
        }
        ids.shuffle(&mut rng);
        test.extend(ids.drain(n_train..n_train + n_test));
        train.extend(ids.into_iter().take(n_train));
    }
    train.shuffle(&mut rng);
    Ok(Split { train, test })
}

/// Seeded split that ignores class labels: shuffle all ids, then take
/// `train_total` for training and the next `test_total` for test.
pub fn split_uniform(manifest: &DatasetManifest, train_total: usize, test_total: usize, seed: Seed) -> Result<Split> {
    if train_total + test_total > manifest.patients.len() {
        return Err(HdcError::invalid(format!(
            "split needs {} patients but the dataset has {}",
            train_total + test_total,
            manifest.patients.len()
        )));
    }
    let mut rng = seed.rng();
    let mut ids: Vec<String> = manifest.patients.iter().map(|p| p.id.clone()).collect();
    ids.shuffle(&mut rng);
    let test = ids[train_total..train_total + test_total].to_vec();
    ids.truncate(train_total);
    Ok(Split { train: ids, test })
}
