use std::fs;
use std::path::Path;

use hdc_eeg::classifier::{fit, repeated_holdout};
use hdc_eeg::dataio::{generate_synthetic, load_dataset, write_dataset, ClassSignal, SyntheticSpec};
use hdc_eeg::snapshot::{read_model, write_model};
use hdc_eeg::{
    cosine_similarity, incremental_sweep, seed_purpose, Class, Dataset, HdcError, Result, Seed, SplitConfig,
    StatsScope, SweepConfig,
};
use serde::Serialize;

use crate::{EvalArgs, GenSynthArgs, HoldoutArgs, InspectArgs, PreprocessArgs, Subset, SweepArgs, TrainArgs};

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|source| HdcError::Io {
        path: path.to_owned(),
        source,
    })
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn gen_synth(a: GenSynthArgs) -> Result<()> {
    let signal = |frequency_hz| ClassSignal {
        frequency_hz,
        amplitude_uv: a.amplitude,
        noise_std_uv: a.noise,
    };
    let spec = SyntheticSpec {
        patients_per_class: a.patients,
        samples_per_channel: a.samples,
        sample_rate_hz: a.sample_rate,
        channels: a.channels,
        adhd: signal(a.adhd_freq),
        control: signal(a.control_freq),
        max_frequency_hz: a.max_freq,
        seed: Seed(a.seed).derive(seed_purpose::SYNTHETIC),
    };
    let (manifest, recordings) = generate_synthetic(&spec)?;
    let path = write_dataset(&a.out, &manifest, &recordings)?;
    println!("wrote {} patients to {}", recordings.len(), path.display());
    Ok(())
}

/// Loads the dataset and resolves the split before anything is written.
fn load_and_split(manifest: &Path, cfg: &SplitConfig, seed: Seed) -> Result<(Dataset, Vec<String>, Vec<String>)> {
    let dataset = load_dataset(manifest)?;
    let sp = cfg.split(&dataset, seed)?;
    Ok((dataset, sp.train, sp.test))
}

pub fn preprocess(a: PreprocessArgs) -> Result<()> {
    let params = a.pipeline.params();
    params.validate()?;
    let cfg = a.split.config();
    let (dataset, train_ids, _) = load_and_split(&a.manifest, &cfg, params.seed)?;
    let pre = params.preprocess();
    let stats = match cfg.stats_scope {
        StatsScope::Train => pre.fit_stats(dataset.select(&train_ids)?.iter())?,
        StatsScope::All => pre.fit_stats(dataset.recordings.iter())?,
    };
    let quantized = dataset
        .recordings
        .iter()
        .map(|r| pre.apply(r, &stats))
        .collect::<Result<Vec<_>>>()?;

    let levels_dir = a.out.join("levels");
    fs::create_dir_all(&levels_dir).map_err(|source| HdcError::Io {
        path: levels_dir.clone(),
        source,
    })?;
    write_file(&a.out.join("stats.json"), to_json(&stats))?;
    for q in &quantized {
        let mut text = q.channels.join(",");
        text.push('\n');
        for i in 0..q.len() {
            let row: Vec<String> = q.levels.iter().map(|ch| ch[i].to_string()).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        write_file(&levels_dir.join(format!("{}.csv", q.patient_id)), text)?;
    }
    println!(
        "wrote statistics and {} level traces to {}",
        quantized.len(),
        a.out.display()
    );
    Ok(())
}

pub fn train(a: TrainArgs) -> Result<()> {
    let params = a.pipeline.params();
    params.validate()?;
    let cfg = a.split.config();
    let (dataset, train_ids, _) = load_and_split(&a.manifest, &cfg, params.seed)?;
    let train_set = dataset.select(&train_ids)?;
    let model = match cfg.stats_scope {
        StatsScope::Train => fit(&train_set, &train_set, params)?,
        StatsScope::All => fit(&train_set, &dataset.recordings, params)?,
    };
    write_model(&a.model_out, &model, &cfg)?;
    let m = model.memory();
    println!(
        "trained on {} patients ({} ADHD and {} CONTROL windows bundled); model written to {}",
        train_set.len(),
        m.bundle_count(Class::Adhd),
        m.bundle_count(Class::Control),
        a.model_out.display()
    );
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let (model, cfg) = read_model(&a.model)?;
    let dataset = load_dataset(&a.manifest)?;
    let ids: Vec<String> = match a.subset {
        Subset::Test => cfg.split(&dataset, model.params.seed)?.test,
        Subset::All => dataset.manifest.patients.iter().map(|p| p.id.clone()).collect(),
    };
    if ids.is_empty() {
        return Err(HdcError::InvalidArgument(
            "the selected evaluation subset is empty".into(),
        ));
    }
    let report = model.evaluate_raw(&dataset.select(&ids)?)?;
    write_file(&a.report_out, to_json(&report))?;
    println!(
        "accuracy {:.2}% on {} patients; report written to {}",
        report.accuracy_pct,
        ids.len(),
        a.report_out.display()
    );
    Ok(())
}

pub fn holdout(a: HoldoutArgs) -> Result<()> {
    let params = a.pipeline.params();
    params.validate()?;
    let dataset = load_dataset(&a.manifest)?;
    let summary = repeated_holdout(&dataset, params, &a.split.config(), a.runs)?;
    write_file(&a.out, to_json(&summary))?;
    println!(
        "accuracy {:.2} ± {:.2}% over {} runs",
        summary.accuracy_pct.mean,
        summary.accuracy_pct.std,
        summary.runs.len()
    );
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let params = a.pipeline.params();
    params.validate()?;
    let cfg = SweepConfig {
        test_size: a.test_size,
        max_train: a.max_train,
        runs: a.runs,
        stratified: !a.uniform,
        stats_scope: a.stats_scope.into(),
    };
    let dataset = load_dataset(&a.manifest)?;
    let table = incremental_sweep(&dataset, params, &cfg)?;
    write_file(&a.out, table.to_csv())?;
    if let Some(details) = &a.details {
        write_file(details, to_json(&table))?;
    }
    println!("wrote {} sweep rows to {}", table.rows.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct PrototypeSummary {
    class: Class,
    bundled_windows: u64,
    norm: f64,
}

#[derive(Serialize)]
struct ModelSummary {
    params: hdc_eeg::PipelineParams,
    split: SplitConfig,
    channels: Vec<String>,
    stats: Vec<hdc_eeg::ChannelStats>,
    prototypes: Vec<PrototypeSummary>,
    /// Absent while either prototype is empty.
    #[serde(skip_serializing_if = "Option::is_none")]
    prototype_cosine: Option<f64>,
}

pub fn inspect_model(a: InspectArgs) -> Result<()> {
    let (model, split) = read_model(&a.model)?;
    let m = model.memory();
    let summary = ModelSummary {
        params: model.params,
        split,
        channels: model.channels().to_vec(),
        stats: model.stats.clone(),
        prototypes: Class::ALL
            .iter()
            .map(|&class| PrototypeSummary {
                class,
                bundled_windows: m.bundle_count(class),
                norm: m.prototype(class).norm(),
            })
            .collect(),
        prototype_cosine: cosine_similarity(m.prototype(Class::Adhd), m.prototype(Class::Control)).ok(),
    };
    print!("{}", to_json(&summary));
    Ok(())
}
