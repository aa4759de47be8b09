//! Training, inference, patient-level voting and evaluation.
//!
//! Training encodes every window of every training patient (patients in the
//! given order, windows in temporal order) and offers each window vector to
//! the associative memory under the patient's label. Inference classifies
//! each window independently; a patient counts as correctly classified when
//! strictly more than half of its windows carry the true label.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::{split, split_uniform, Dataset, Split, SplitCounts};
use crate::encoder::{EncodedNGram, SpatioTemporalEncoder, DEFAULT_NGRAM};
use crate::error::{HdcError, Result};
use crate::hv::{Seed, DEFAULT_DIMENSION};
use crate::memory::{
    AssociativeMemory, Class, ContinuousItemMemory, ItemMemory, QueryResult, DEFAULT_GATE, DEFAULT_LEVELS,
};
use crate::preprocess::{
    ChannelStats, EegRecording, PreprocessParams, QuantizedRecording, DEFAULT_CLIP_HIGH_PCT, DEFAULT_CLIP_LOW_PCT,
    DEFAULT_DOWNSAMPLE, DEFAULT_DROP,
};
use crate::seed_purpose;

/// Every parameter that shapes a trained model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub dimension: usize,
    pub levels: usize,
    pub ngram: usize,
    pub downsample: usize,
    pub drop: usize,
    pub gate: f64,
    pub seed: Seed,
    pub clip_low_pct: f64,
    pub clip_high_pct: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            dimension: DEFAULT_DIMENSION,
            levels: DEFAULT_LEVELS,
            ngram: DEFAULT_NGRAM,
            downsample: DEFAULT_DOWNSAMPLE,
            drop: DEFAULT_DROP,
            gate: DEFAULT_GATE,
            seed: Seed(0),
            clip_low_pct: DEFAULT_CLIP_LOW_PCT,
            clip_high_pct: DEFAULT_CLIP_HIGH_PCT,
        }
    }
}

impl PipelineParams {
    pub fn preprocess(&self) -> PreprocessParams {
        PreprocessParams {
            drop: self.drop,
            downsample: self.downsample,
            clip_low_pct: self.clip_low_pct,
            clip_high_pct: self.clip_high_pct,
            levels: self.levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 || !self.dimension.is_multiple_of(2) {
            return Err(HdcError::invalid(format!(
                "dimension must be a positive even number, got {}",
                self.dimension
            )));
        }
        if self.ngram == 0 {
            return Err(HdcError::invalid("n-gram length must be at least 1"));
        }
        if !self.gate.is_finite() {
            return Err(HdcError::invalid("gate threshold must be finite"));
        }
        self.preprocess().validate()
    }

    /// Item and level memories for these parameters.
    pub fn build_encoder(&self, channels: &[String]) -> Result<SpatioTemporalEncoder> {
        self.validate()?;
        let im = ItemMemory::build(channels, self.seed.derive(seed_purpose::ITEM_MEMORY), self.dimension)?;
        let cim = ContinuousItemMemory::build(
            self.levels,
            self.seed.derive(seed_purpose::LEVEL_MEMORY),
            self.dimension,
        )?;
        SpatioTemporalEncoder::new(im, cim, self.ngram)
    }
}

/// Which recordings the clipping and quantisation statistics come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsScope {
    /// Training patients only.
    #[default]
    Train,
    /// Every patient in the dataset.
    All,
}

/// Everything inference needs.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub params: PipelineParams,
    pub stats: Vec<ChannelStats>,
    encoder: Arc<SpatioTemporalEncoder>,
    memory: AssociativeMemory,
}

impl TrainedModel {
    pub fn from_parts(
        params: PipelineParams,
        stats: Vec<ChannelStats>,
        encoder: SpatioTemporalEncoder,
        memory: AssociativeMemory,
    ) -> Result<Self> {
        params.validate()?;
        let d = params.dimension;
        if encoder.dimension() != d || memory.dimension() != d {
            return Err(HdcError::Format("model components disagree on the dimension".into()));
        }
        if encoder.level_memory().level_count() != params.levels || encoder.ngram() != params.ngram {
            return Err(HdcError::Format("encoder disagrees with the model parameters".into()));
        }
        if stats.len() != encoder.item_memory().names().len()
            || stats
                .iter()
                .zip(encoder.item_memory().names())
                .any(|(s, n)| &s.channel != n)
        {
            return Err(HdcError::Format(
                "channel statistics disagree with the item memory".into(),
            ));
        }
        Ok(TrainedModel {
            params,
            stats,
            encoder: Arc::new(encoder),
            memory,
        })
    }

    pub fn encoder(&self) -> &SpatioTemporalEncoder {
        &self.encoder
    }

    pub fn memory(&self) -> &AssociativeMemory {
        &self.memory
    }

    pub fn channels(&self) -> &[String] {
        self.encoder.item_memory().names()
    }

    /// Applies the model's preprocessing chain and statistics.
    pub fn quantize(&self, rec: &EegRecording) -> Result<QuantizedRecording> {
        self.params.preprocess().apply(rec, &self.stats)
    }

    pub fn classify_window(&self, f: &EncodedNGram) -> Result<QueryResult> {
        self.memory.query(&f.vector)
    }

    pub fn classify_patient(&self, rec: &QuantizedRecording) -> Result<PatientPrediction> {
        if !self.memory.is_trained() {
            let empty = Class::ALL
                .into_iter()
                .find(|&c| self.memory.bundle_count(c) == 0)
                .unwrap();
            return Err(HdcError::UntrainedMemory(empty));
        }
        let windows = self
            .encoder
            .encode_patient(rec)?
            .iter()
            .map(|f| self.classify_window(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(PatientPrediction::from_windows(&rec.patient_id, rec.label, windows))
    }

    pub fn evaluate(&self, test_set: &[QuantizedRecording]) -> Result<EvalReport> {
        if test_set.is_empty() {
            return Err(HdcError::invalid("test set is empty"));
        }
        let predictions = test_set
            .par_iter()
            .map(|rec| self.classify_patient(rec))
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalReport::from_predictions(predictions))
    }

    /// Quantises raw recordings with the model's statistics, then evaluates.
    pub fn evaluate_raw(&self, test_set: &[EegRecording]) -> Result<EvalReport> {
        let quantized = test_set
            .par_iter()
            .map(|r| self.quantize(r))
            .collect::<Result<Vec<_>>>()?;
        self.evaluate(&quantized)
    }
}

/// Trains a fresh model on already quantised recordings.
pub fn train(
    train_set: &[QuantizedRecording],
    stats: Vec<ChannelStats>,
    params: PipelineParams,
) -> Result<TrainedModel> {
    params.validate()?;
    let first = train_set
        .first()
        .ok_or_else(|| HdcError::invalid("training set is empty"))?;
    let encoder = params.build_encoder(&first.channels)?;
    train_with_encoder(Arc::new(encoder), train_set, stats, params)
}

fn train_with_encoder(
    encoder: Arc<SpatioTemporalEncoder>,
    train_set: &[QuantizedRecording],
    stats: Vec<ChannelStats>,
    params: PipelineParams,
) -> Result<TrainedModel> {
    for class in Class::ALL {
        if !train_set.iter().any(|r| r.label == class) {
            return Err(HdcError::invalid(format!(
                "training set has no {class} patient; both classes are required"
            )));
        }
    }
    if let Some(r) = train_set.iter().find(|r| r.channels != encoder.item_memory().names()) {
        return Err(HdcError::Validation(format!(
            "patient {}: channels {:?} differ from {:?}",
            r.patient_id,
            r.channels,
            encoder.item_memory().names()
        )));
    }
    // Encoding is independent per patient; the gated accumulation is not.
    let encoded = train_set
        .par_iter()
        .map(|r| encoder.encode_patient(r))
        .collect::<Result<Vec<_>>>()?;
    let mut memory = AssociativeMemory::new(params.dimension, params.gate)?;
    for f in encoded.iter().flatten() {
        memory.update(&f.vector, f.label)?;
    }
    let model = TrainedModel {
        params,
        stats,
        encoder,
        memory,
    };
    Ok(model)
}

/// Fits statistics on `stats_source`, quantises `train_set`, and trains.
pub fn fit(train_set: &[EegRecording], stats_source: &[EegRecording], params: PipelineParams) -> Result<TrainedModel> {
    params.validate()?;
    let first = train_set
        .first()
        .ok_or_else(|| HdcError::invalid("training set is empty"))?;
    let encoder = Arc::new(params.build_encoder(first.channels())?);
    fit_with_encoder(encoder, train_set, stats_source, params)
}

fn fit_with_encoder(
    encoder: Arc<SpatioTemporalEncoder>,
    train_set: &[EegRecording],
    stats_source: &[EegRecording],
    params: PipelineParams,
) -> Result<TrainedModel> {
    let pre = params.preprocess();
    let stats = pre.fit_stats(stats_source)?;
    let quantized = train_set
        .par_iter()
        .map(|r| pre.apply(r, &stats))
        .collect::<Result<Vec<_>>>()?;
    train_with_encoder(encoder, &quantized, stats, params)
}

/// Per-window similarities and decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub predicted: Class,
    pub similarity_adhd: f64,
    pub similarity_control: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatientPrediction {
    pub patient_id: String,
    pub true_label: Class,
    pub predicted_label: Class,
    pub correct: bool,
    pub correct_window_count: usize,
    pub total_window_count: usize,
    pub windows: Vec<WindowScore>,
}

impl PatientPrediction {
    /// Applies the strict-majority rule. A patient whose windows split
    /// exactly in half counts as misclassified, so the predicted label is
    /// the window-majority class and, on a tie, the class opposite the
    /// true label.
    pub fn from_windows(patient_id: &str, true_label: Class, windows: Vec<QueryResult>) -> Self {
        let total = windows.len();
        let correct_count = windows.iter().filter(|w| w.class == true_label).count();
        let correct = 2 * correct_count > total;
        PatientPrediction {
            patient_id: patient_id.to_owned(),
            true_label,
            predicted_label: if correct { true_label } else { true_label.other() },
            correct,
            correct_window_count: correct_count,
            total_window_count: total,
            windows: windows
                .into_iter()
                .map(|w| WindowScore {
                    predicted: w.class,
                    similarity_adhd: w.similarity_adhd,
                    similarity_control: w.similarity_control,
                })
                .collect(),
        }
    }
}

/// Confusion counts with ADHD as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, truth: Class, predicted: Class) {
        match (truth, predicted) {
            (Class::Adhd, Class::Adhd) => self.tp += 1,
            (Class::Control, Class::Adhd) => self.fp += 1,
            (Class::Control, Class::Control) => self.tn += 1,
            (Class::Adhd, Class::Control) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy_pct(&self) -> f64 {
        100.0 * (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> Option<f64> {
        let (p, r) = (self.precision()?, self.recall()?);
        if p + r == 0.0 {
            None
        } else {
            Some(2.0 * p * r / (p + r))
        }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Patient-level test metrics. Undefined ratios are omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f1: Option<f64>,
    pub confusion: Confusion,
    pub patients: Vec<PatientPrediction>,
}

impl EvalReport {
    /// Patients are reported in id order.
    pub fn from_predictions(mut patients: Vec<PatientPrediction>) -> Self {
        patients.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));
        let mut confusion = Confusion::default();
        for p in &patients {
            confusion.record(p.true_label, p.predicted_label);
        }
        let correct = patients.iter().filter(|p| p.correct).count();
        EvalReport {
            accuracy_pct: 100.0 * correct as f64 / patients.len() as f64,
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1: confusion.f1(),
            confusion,
            patients,
        }
    }
}

/// Resolves the split for one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub counts: SplitCounts,
    pub stratified: bool,
    pub stats_scope: StatsScope,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            counts: SplitCounts::default(),
            stratified: true,
            stats_scope: StatsScope::Train,
        }
    }
}

impl SplitConfig {
    pub fn split(&self, dataset: &Dataset, seed: Seed) -> Result<Split> {
        let split_seed = seed.derive(seed_purpose::SPLIT);
        if self.stratified {
            split(&dataset.manifest, self.counts, split_seed)
        } else {
            split_uniform(
                &dataset.manifest,
                self.counts.train_total(),
                self.counts.test_total(),
                split_seed,
            )
        }
    }
}

/// Splits with `params.seed`, fits, and evaluates on the held-out patients.
pub fn run_experiment(
    dataset: &Dataset,
    params: PipelineParams,
    cfg: &SplitConfig,
) -> Result<(TrainedModel, EvalReport)> {
    params.validate()?;
    let sp = cfg.split(dataset, params.seed)?;
    if sp.test.is_empty() {
        return Err(HdcError::invalid("test set is empty"));
    }
    let train_set = dataset.select(&sp.train)?;
    let test_set = dataset.select(&sp.test)?;
    let model = match cfg.stats_scope {
        StatsScope::Train => fit(&train_set, &train_set, params)?,
        StatsScope::All => fit(&train_set, &dataset.recordings, params)?,
    };
    let report = model.evaluate_raw(&test_set)?;
    Ok((model, report))
}

/// Seed of run `r` in a multi-run experiment rooted at `root`.
pub fn run_seed(root: Seed, run: usize) -> Seed {
    root.derive(seed_purpose::RUN).derive(run as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldoutRun {
    pub run: usize,
    pub seed: Seed,
    pub accuracy_pct: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f1: Option<f64>,
    pub confusion: Confusion,
}

/// Mean and population standard deviation across runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(MeanStd { mean, std: var.sqrt() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSummary {
    pub accuracy_pct: MeanStd,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recall: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f1: Option<MeanStd>,
    pub runs: Vec<HoldoutRun>,
}

/// `runs` independent split/train/evaluate cycles, run `r` seeded by
/// [`run_seed`]. Precision, recall and F1 are averaged over the runs in
/// which they are defined.
pub fn repeated_holdout(
    dataset: &Dataset,
    params: PipelineParams,
    cfg: &SplitConfig,
    runs: usize,
) -> Result<HoldoutSummary> {
    if runs == 0 {
        return Err(HdcError::invalid("runs must be at least 1"));
    }
    params.validate()?;
    let results = (0..runs)
        .into_par_iter()
        .map(|r| {
            let seed = run_seed(params.seed, r);
            let (_, report) = run_experiment(dataset, PipelineParams { seed, ..params }, cfg)?;
            Ok(HoldoutRun {
                run: r,
                seed,
                accuracy_pct: report.accuracy_pct,
                precision: report.precision,
                recall: report.recall,
                f1: report.f1,
                confusion: report.confusion,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let collect = |f: fn(&HoldoutRun) -> Option<f64>| MeanStd::of(&results.iter().filter_map(f).collect::<Vec<_>>());
    Ok(HoldoutSummary {
        accuracy_pct: collect(|r| Some(r.accuracy_pct)).expect("at least one run"),
        precision: collect(|r| r.precision),
        recall: collect(|r| r.recall),
        f1: collect(|r| r.f1),
        runs: results,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub test_size: usize,
    pub max_train: usize,
    pub runs: usize,
    pub stratified: bool,
    pub stats_scope: StatsScope,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            test_size: 20,
            max_train: 59,
            runs: 10,
            stratified: true,
            stats_scope: StatsScope::Train,
        }
    }
}

/// The fixed test set and training order of one sweep run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub run: usize,
    pub seed: Seed,
    pub test: Vec<String>,
    pub train_order: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub mean_acc: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `accuracies[run][k - 1]`.
    pub accuracies: Vec<Vec<f64>>,
    pub plans: Vec<SweepPlan>,
}

impl SweepTable {
    /// `k,mean_acc,std` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mean_acc,std\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.k, r.mean_acc, r.std));
        }
        out
    }
}

fn check_sweep(dataset: &Dataset, cfg: &SweepConfig) -> Result<()> {
    let total = dataset.recordings.len();
    if cfg.runs == 0 {
        return Err(HdcError::invalid("runs must be at least 1"));
    }
    if cfg.test_size == 0 || cfg.max_train == 0 {
        return Err(HdcError::invalid("test size and max training size must be at least 1"));
    }
    if cfg.test_size + cfg.max_train > total {
        return Err(HdcError::invalid(format!(
            "test size {} + max training size {} exceeds {total} patients",
            cfg.test_size, cfg.max_train
        )));
    }
    if cfg.stratified {
        let m = &dataset.manifest;
        let (ta, tc) = stratified_test_counts(cfg.test_size);
        if ta > m.count(Class::Adhd) || tc > m.count(Class::Control) {
            return Err(HdcError::invalid(format!(
                "a stratified test set of {} needs {ta} ADHD and {tc} CONTROL patients",
                cfg.test_size
            )));
        }
    }
    Ok(())
}

fn stratified_test_counts(test_size: usize) -> (usize, usize) {
    (test_size / 2, test_size - test_size / 2)
}

/// Test set and shuffled training pool for run `run`. Stratified plans
/// draw `test_size / 2` ADHD test patients and the rest CONTROL.
pub fn sweep_plan(dataset: &Dataset, cfg: &SweepConfig, root: Seed, run: usize) -> Result<SweepPlan> {
    check_sweep(dataset, cfg)?;
    let seed = run_seed(root, run);
    let m = &dataset.manifest;
    let split_seed = seed.derive(seed_purpose::SPLIT);
    let sp = if cfg.stratified {
        let (ta, tc) = stratified_test_counts(cfg.test_size);
        split(
            m,
            SplitCounts {
                train_adhd: m.count(Class::Adhd) - ta,
                train_control: m.count(Class::Control) - tc,
                test_adhd: ta,
                test_control: tc,
            },
            split_seed,
        )?
    } else {
        split_uniform(m, m.patients.len() - cfg.test_size, cfg.test_size, split_seed)?
    };
    Ok(SweepPlan {
        run,
        seed,
        test: sp.test,
        train_order: sp.train,
    })
}

/// Accuracy when training on the first `k` patients of the run's training
/// order. A prefix holding a single class leaves the other prototype empty;
/// every window then goes to the one trained class.
fn sweep_point(
    dataset: &Dataset,
    encoder: &Arc<SpatioTemporalEncoder>,
    plan: &SweepPlan,
    test_set: &[EegRecording],
    k: usize,
    params: PipelineParams,
    scope: StatsScope,
) -> Result<f64> {
    let train_set = dataset.select(&plan.train_order[..k])?;
    let first = train_set[0].label;
    if train_set.iter().all(|r| r.label == first) {
        let correct = test_set.iter().filter(|r| r.label == first).count();
        return Ok(100.0 * correct as f64 / test_set.len() as f64);
    }
    let source = match scope {
        StatsScope::Train => &train_set[..],
        StatsScope::All => &dataset.recordings[..],
    };
    let model = fit_with_encoder(Arc::clone(encoder), &train_set, source, params)?;
    Ok(model.evaluate_raw(test_set)?.accuracy_pct)
}

/// Incremental training-set-size experiment.
pub fn incremental_sweep(dataset: &Dataset, params: PipelineParams, cfg: &SweepConfig) -> Result<SweepTable> {
    params.validate()?;
    check_sweep(dataset, cfg)?;
    let channels = &dataset.manifest.channels;
    let mut plans = Vec::with_capacity(cfg.runs);
    let mut accuracies = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let plan = sweep_plan(dataset, cfg, params.seed, run)?;
        let run_params = PipelineParams {
            seed: plan.seed,
            ..params
        };
        let encoder = Arc::new(run_params.build_encoder(channels)?);
        let test_set = dataset.select(&plan.test)?;
        let row = (1..=cfg.max_train)
            .into_par_iter()
            .map(|k| sweep_point(dataset, &encoder, &plan, &test_set, k, run_params, cfg.stats_scope))
            .collect::<Result<Vec<_>>>()?;
        accuracies.push(row);
        plans.push(plan);
    }
    let rows = (0..cfg.max_train)
        .map(|i| {
            let column: Vec<f64> = accuracies.iter().map(|run| run[i]).collect();
            let ms = MeanStd::of(&column).expect("runs >= 1");
            SweepRow {
                k: i + 1,
                mean_acc: ms.mean,
                std: ms.std,
            }
        })
        .collect();
    Ok(SweepTable {
        rows,
        accuracies,
        plans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(class: Class) -> QueryResult {
        QueryResult {
            class,
            similarity_adhd: 0.0,
            similarity_control: 0.0,
        }
    }

    fn votes(correct: usize, total: usize, truth: Class) -> PatientPrediction {
        let windows = (0..total)
            .map(|i| q(if i < correct { truth } else { truth.other() }))
            .collect();
        PatientPrediction::from_windows("p", truth, windows)
    }

    #[test]
    fn strict_majority_rule() {
        assert!(votes(15, 28, Class::Adhd).correct);
        assert!(!votes(14, 28, Class::Adhd).correct);
        assert!(!votes(14, 28, Class::Control).correct);
        assert!(votes(28, 28, Class::Control).correct);
        let tie = votes(14, 28, Class::Control);
        assert_eq!(tie.predicted_label, Class::Adhd);
        assert_eq!(votes(15, 28, Class::Control).predicted_label, Class::Control);
    }

    #[test]
    fn metrics_closed_form() {
        let c = Confusion {
            tp: 9,
            fp: 1,
            tn: 10,
            fn_: 0,
        };
        assert!((c.precision().unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(c.recall().unwrap(), 1.0);
        assert!((c.f1().unwrap() - 18.0 / 19.0).abs() < 1e-15);
        assert!((c.f1().unwrap() - 0.947).abs() < 1e-3);
        assert_eq!(c.accuracy_pct(), 95.0);
    }

    #[test]
    fn undefined_metrics_are_omitted() {
        let report = EvalReport::from_predictions(vec![votes(20, 28, Class::Control)]);
        assert_eq!(report.accuracy_pct, 100.0);
        assert_eq!(report.precision, None);
        assert_eq!(report.recall, None);
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("precision"));
        assert!(json.contains("\"fn\":0"));
    }

    #[test]
    fn report_sorted_and_consistent() {
        let mut preds = vec![
            votes(20, 28, Class::Adhd),
            votes(3, 28, Class::Control),
            votes(14, 28, Class::Adhd),
        ];
        preds[0].patient_id = "b".into();
        preds[1].patient_id = "a".into();
        preds[2].patient_id = "c".into();
        let r = EvalReport::from_predictions(preds);
        let ids: Vec<_> = r.patients.iter().map(|p| p.patient_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert_eq!(r.confusion.total(), 3);
        assert!((r.accuracy_pct - r.confusion.accuracy_pct()).abs() < 1e-12);
        assert_eq!(
            r.confusion,
            Confusion {
                tp: 1,
                fp: 1,
                tn: 0,
                fn_: 1
            }
        );
    }

    #[test]
    fn mean_std_population() {
        let ms = MeanStd::of(&[1.0, 3.0]).unwrap();
        assert_eq!(ms.mean, 2.0);
        assert_eq!(ms.std, 1.0);
        assert!(MeanStd::of(&[]).is_none());
    }

    #[test]
    fn params_validation() {
        assert!(PipelineParams::default().validate().is_ok());
        let odd = PipelineParams {
            dimension: 9999,
            ..Default::default()
        };
        assert!(odd.validate().is_err());
        let bad_pct = PipelineParams {
            clip_low_pct: 60.0,
            clip_high_pct: 50.0,
            ..Default::default()
        };
        assert!(bad_pct.validate().is_err());
    }
}
