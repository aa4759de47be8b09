//! Minimal signal chain: drop the settling samples, clip outliers, average
//! down to a lower rate, then quantise each channel linearly onto level
//! indices.
//!
//! Percentiles use the nearest-rank definition on the sorted pooled samples:
//! the `p`-th percentile of `N` values is the value at 1-based rank
//! `ceil(p / 100 * N)`, clamped to `1..=N` (so `p = 0` is the minimum).

use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::memory::Class;

pub const DEFAULT_DROP: usize = 512;
pub const DEFAULT_DOWNSAMPLE: usize = 8;
pub const DEFAULT_CLIP_LOW_PCT: f64 = 0.5;
pub const DEFAULT_CLIP_HIGH_PCT: f64 = 99.5;

/// One patient's raw recording. Samples are stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EegRecording {
    pub patient_id: String,
    pub label: Class,
    channels: Vec<String>,
    samples: Vec<Vec<f64>>,
    sample_rate_hz: f64,
}

impl EegRecording {
    /// Validates that every channel has the same length and only finite values.
    pub fn new(
        patient_id: impl Into<String>,
        label: Class,
        channels: Vec<String>,
        samples: Vec<Vec<f64>>,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        let patient_id = patient_id.into();
        if channels.is_empty() || channels.len() != samples.len() {
            return Err(HdcError::Validation(format!(
                "patient {patient_id}: {} channel names for {} sample columns",
                channels.len(),
                samples.len()
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(HdcError::Validation(format!(
                "patient {patient_id}: sample rate must be positive"
            )));
        }
        let len = samples[0].len();
        for (name, column) in channels.iter().zip(&samples) {
            if column.len() != len {
                return Err(HdcError::Validation(format!(
                    "patient {patient_id}: channel {name} has {} samples, expected {len}",
                    column.len()
                )));
            }
            if let Some(i) = column.iter().position(|x| !x.is_finite()) {
                return Err(HdcError::Validation(format!(
                    "patient {patient_id}: channel {name} has a non-finite sample at index {i}"
                )));
            }
        }
        Ok(EegRecording {
            patient_id,
            label,
            channels,
            samples,
            sample_rate_hz,
        })
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.samples[index]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    fn with_samples(&self, samples: Vec<Vec<f64>>, sample_rate_hz: f64) -> EegRecording {
        EegRecording {
            patient_id: self.patient_id.clone(),
            label: self.label,
            channels: self.channels.clone(),
            samples,
            sample_rate_hz,
        }
    }
}

/// Per-channel clipping bounds and quantisation range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub channel: String,
    pub clip_low: f64,
    pub clip_high: f64,
    pub quant_min: f64,
    pub quant_max: f64,
}

/// Level indices for one patient, channel-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedRecording {
    pub patient_id: String,
    pub label: Class,
    pub channels: Vec<String>,
    pub levels: Vec<Vec<u16>>,
    pub level_count: usize,
}

impl QuantizedRecording {
    pub fn len(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn drop_initial(rec: &EegRecording, n_drop: usize) -> Result<EegRecording> {
    if n_drop >= rec.len() {
        return Err(HdcError::invalid(format!(
            "patient {}: cannot drop {n_drop} of {} samples",
            rec.patient_id,
            rec.len()
        )));
    }
    let samples = rec.samples.iter().map(|c| c[n_drop..].to_vec()).collect();
    Ok(rec.with_samples(samples, rec.sample_rate_hz))
}

/// Nearest-rank percentile of an already sorted slice.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    let rank = (pct * n as f64 / 100.0).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Clip bounds at the given percentiles of each channel's pooled samples,
/// and the quantisation range as the pooled min/max after clipping.
pub fn compute_channel_stats<'a, I>(dataset: I, low_pct: f64, high_pct: f64) -> Result<Vec<ChannelStats>>
where
    I: IntoIterator<Item = &'a EegRecording>,
{
    if !(0.0..=100.0).contains(&low_pct) || !(0.0..=100.0).contains(&high_pct) || low_pct >= high_pct {
        return Err(HdcError::invalid(format!(
            "percentiles must satisfy 0 <= low < high <= 100, got ({low_pct}, {high_pct})"
        )));
    }
    let mut iter = dataset.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| HdcError::invalid("cannot compute statistics of an empty dataset"))?;
    let channels = first.channels.clone();
    let mut pooled: Vec<Vec<f64>> = first.samples.clone();
    for rec in iter {
        if rec.channels != channels {
            return Err(HdcError::Validation(format!(
                "patient {}: channels {:?} differ from {:?}",
                rec.patient_id, rec.channels, channels
            )));
        }
        for (pool, column) in pooled.iter_mut().zip(&rec.samples) {
            pool.extend_from_slice(column);
        }
    }

    channels
        .into_iter()
        .zip(pooled)
        .map(|(channel, mut values)| {
            if values.is_empty() {
                return Err(HdcError::invalid(format!("channel {channel} has no samples")));
            }
            values.sort_unstable_by(f64::total_cmp);
            let clip_low = nearest_rank(&values, low_pct);
            let clip_high = nearest_rank(&values, high_pct);
            // Clipping is monotone, so the post-clip extremes are the clipped
            // pre-clip extremes.
            let quant_min = values[0].clamp(clip_low, clip_high);
            let quant_max = values[values.len() - 1].clamp(clip_low, clip_high);
            Ok(ChannelStats {
                channel,
                clip_low,
                clip_high,
                quant_min,
                quant_max,
            })
        })
        .collect()
}

fn stats_for<'s>(rec: &EegRecording, stats: &'s [ChannelStats]) -> Result<Vec<&'s ChannelStats>> {
    rec.channels
        .iter()
        .map(|name| {
            stats.iter().find(|s| &s.channel == name).ok_or_else(|| {
                HdcError::invalid(format!("patient {}: no statistics for channel {name}", rec.patient_id))
            })
        })
        .collect()
}

pub fn clip(rec: &EegRecording, stats: &[ChannelStats]) -> Result<EegRecording> {
    let per_channel = stats_for(rec, stats)?;
    let samples = rec
        .samples
        .iter()
        .zip(per_channel)
        .map(|(column, s)| column.iter().map(|&x| x.max(s.clip_low).min(s.clip_high)).collect())
        .collect();
    Ok(rec.with_samples(samples, rec.sample_rate_hz))
}

/// Replaces each block of `factor` consecutive samples by its mean.
pub fn downsample_mean(rec: &EegRecording, factor: usize) -> Result<EegRecording> {
    if factor == 0 {
        return Err(HdcError::invalid("downsample factor must be at least 1"));
    }
    if !rec.len().is_multiple_of(factor) {
        return Err(HdcError::invalid(format!(
            "patient {}: {} samples are not divisible by downsample factor {factor}",
            rec.patient_id,
            rec.len()
        )));
    }
    let samples = rec
        .samples
        .iter()
        .map(|column| {
            column
                .chunks_exact(factor)
                .map(|block| block.iter().sum::<f64>() / factor as f64)
                .collect()
        })
        .collect();
    Ok(rec.with_samples(samples, rec.sample_rate_hz / factor as f64))
}

/// `clamp(floor((x - min) / (max - min) * L), 0, L - 1)`; a degenerate
/// range maps everything to level 0.
#[inline]
pub fn quantize_value(x: f64, quant_min: f64, quant_max: f64, level_count: usize) -> u16 {
    if quant_max <= quant_min {
        return 0;
    }
    let scaled = ((x - quant_min) / (quant_max - quant_min) * level_count as f64).floor();
    scaled.clamp(0.0, (level_count - 1) as f64) as u16
}

pub fn quantize(rec: &EegRecording, stats: &[ChannelStats], level_count: usize) -> Result<QuantizedRecording> {
    if !(1..=u16::MAX as usize + 1).contains(&level_count) {
        return Err(HdcError::invalid(format!("unsupported level count {level_count}")));
    }
    let per_channel = stats_for(rec, stats)?;
    let mut levels = Vec::with_capacity(rec.channels.len());
    for (column, s) in rec.samples.iter().zip(per_channel) {
        if s.quant_max.partial_cmp(&s.quant_min) != Some(std::cmp::Ordering::Greater) {
            return Err(HdcError::Validation(format!(
                "channel {}: degenerate quantisation range [{}, {}]",
                s.channel, s.quant_min, s.quant_max
            )));
        }
        levels.push(
            column
                .iter()
                .map(|&x| quantize_value(x, s.quant_min, s.quant_max, level_count))
                .collect(),
        );
    }
    Ok(QuantizedRecording {
        patient_id: rec.patient_id.clone(),
        label: rec.label,
        channels: rec.channels.clone(),
        levels,
        level_count,
    })
}

/// Parameters of the full chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessParams {
    pub drop: usize,
    pub downsample: usize,
    pub clip_low_pct: f64,
    pub clip_high_pct: f64,
    pub levels: usize,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        PreprocessParams {
            drop: DEFAULT_DROP,
            downsample: DEFAULT_DOWNSAMPLE,
            clip_low_pct: DEFAULT_CLIP_LOW_PCT,
            clip_high_pct: DEFAULT_CLIP_HIGH_PCT,
            levels: crate::memory::DEFAULT_LEVELS,
        }
    }
}

impl PreprocessParams {
    pub fn validate(&self) -> Result<()> {
        if self.downsample == 0 {
            return Err(HdcError::invalid("downsample factor must be at least 1"));
        }
        if !(0.0..=100.0).contains(&self.clip_low_pct)
            || !(0.0..=100.0).contains(&self.clip_high_pct)
            || self.clip_low_pct >= self.clip_high_pct
        {
            return Err(HdcError::invalid(format!(
                "clip percentiles must satisfy 0 <= low < high <= 100, got ({}, {})",
                self.clip_low_pct, self.clip_high_pct
            )));
        }
        if !(2..=u16::MAX as usize + 1).contains(&self.levels) {
            return Err(HdcError::invalid(format!(
                "level count must be in 2..=65536, got {}",
                self.levels
            )));
        }
        Ok(())
    }

    /// Channel statistics from the given recordings, after the initial drop.
    pub fn fit_stats<'a, I>(&self, recordings: I) -> Result<Vec<ChannelStats>>
    where
        I: IntoIterator<Item = &'a EegRecording>,
    {
        let dropped = recordings
            .into_iter()
            .map(|r| drop_initial(r, self.drop))
            .collect::<Result<Vec<_>>>()?;
        compute_channel_stats(&dropped, self.clip_low_pct, self.clip_high_pct)
    }

    /// drop -> clip -> downsample -> quantise.
    pub fn apply(&self, rec: &EegRecording, stats: &[ChannelStats]) -> Result<QuantizedRecording> {
        let rec = drop_initial(rec, self.drop)?;
        let rec = clip(&rec, stats)?;
        let rec = downsample_mean(&rec, self.downsample)?;
        quantize(&rec, stats, self.levels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(columns: Vec<Vec<f64>>) -> EegRecording {
        let channels = (0..columns.len()).map(|i| format!("ch{i}")).collect();
        EegRecording::new("p", Class::Adhd, channels, columns, 256.0).unwrap()
    }

    fn stats(channel: &str, lo: f64, hi: f64) -> ChannelStats {
        ChannelStats {
            channel: channel.into(),
            clip_low: lo,
            clip_high: hi,
            quant_min: lo,
            quant_max: hi,
        }
    }

    #[test]
    fn recording_validation() {
        let err = EegRecording::new(
            "p1",
            Class::Adhd,
            vec!["F4".into(), "Cz".into()],
            vec![vec![1.0, 2.0], vec![1.0]],
            256.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("Cz"), "{err}");
        let err =
            EegRecording::new("p1", Class::Adhd, vec!["F4".into()], vec![vec![1.0, f64::NAN]], 256.0).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn drop_initial_examples() {
        let r = rec(vec![(0..7680).map(f64::from).collect(); 2]);
        let d = drop_initial(&r, 512).unwrap();
        assert_eq!(d.len(), 7168);
        assert_eq!(d.channel(0)[0], 512.0);
        assert_eq!(drop_initial(&r, 0).unwrap(), r);
        let short = rec(vec![vec![0.0; 10]]);
        assert!(drop_initial(&short, 10).is_err());
    }

    #[test]
    fn percentile_matches_brute_force() {
        let r = rec(vec![(0..=100).map(f64::from).collect()]);
        let s = compute_channel_stats([&r], 1.0, 99.0).unwrap();
        assert_eq!(s[0].clip_low, 1.0);
        assert_eq!(s[0].clip_high, 99.0);
        assert_eq!((s[0].quant_min, s[0].quant_max), (1.0, 99.0));

        let full = compute_channel_stats([&r], 0.0, 100.0).unwrap();
        assert_eq!((full[0].clip_low, full[0].clip_high), (0.0, 100.0));
        assert_eq!(clip(&r, &full).unwrap(), r);
    }

    #[test]
    fn stats_are_per_channel() {
        let r = rec(vec![vec![0.0, 1.0, 2.0], vec![100.0, 200.0, 300.0]]);
        let s = compute_channel_stats([&r], 0.0, 100.0).unwrap();
        assert_eq!((s[0].quant_min, s[0].quant_max), (0.0, 2.0));
        assert_eq!((s[1].quant_min, s[1].quant_max), (100.0, 300.0));
    }

    #[test]
    fn stats_errors() {
        assert!(compute_channel_stats(std::iter::empty(), 0.0, 100.0).is_err());
        let r = rec(vec![vec![0.0, 1.0]]);
        assert!(compute_channel_stats([&r], 50.0, 50.0).is_err());
        assert!(compute_channel_stats([&r], -1.0, 50.0).is_err());
    }

    #[test]
    fn clip_examples() {
        let r = rec(vec![vec![10.0, 0.0, -7.0]]);
        let c = clip(&r, &[stats("ch0", -5.0, 5.0)]).unwrap();
        assert_eq!(c.channel(0), &[5.0, 0.0, -5.0]);
        assert!(clip(&r, &[stats("other", -5.0, 5.0)]).is_err());
    }

    #[test]
    fn downsample_examples() {
        let r = rec(vec![(1..=8).map(f64::from).collect()]);
        let d = downsample_mean(&r, 8).unwrap();
        assert_eq!(d.channel(0), &[4.5]);
        assert_eq!(d.sample_rate_hz(), 32.0);
        assert_eq!(downsample_mean(&r, 1).unwrap(), r);
        assert!(downsample_mean(&r, 3).is_err());
        let long = rec(vec![vec![0.0; 7168]]);
        assert_eq!(downsample_mean(&long, 8).unwrap().len(), 896);
    }

    #[test]
    fn quantize_examples() {
        let r = rec(vec![vec![-10.0, 10.0, 0.0, 50.0, -50.0]]);
        let q = quantize(&r, &[stats("ch0", -10.0, 10.0)], 250).unwrap();
        assert_eq!(q.levels[0], vec![0, 249, 125, 249, 0]);
        assert!(quantize(&r, &[stats("ch0", 1.0, 1.0)], 250).is_err());
    }

    #[test]
    fn quantize_matches_scalar_oracle_on_grid() {
        // Oracle: count how many bin edges min + j (max-min)/L, j = 1..L-1, lie at or below x.
        let (lo, hi, l) = (-3.0, 5.0, 250usize);
        for i in 0..=2000 {
            let x = lo - 1.0 + 10.0 * i as f64 / 2000.0;
            let t = (x - lo) / (hi - lo) * l as f64;
            let oracle = (1..l).filter(|&j| j as f64 <= t).count();
            assert_eq!(quantize_value(x, lo, hi, l) as usize, oracle, "x = {x}");
        }
    }

    #[test]
    fn default_pipeline_shape() {
        let r = rec(vec![
            (0..7680).map(|i| (i as f64 * 0.1).sin() * 40.0).collect(),
            (0..7680).map(|i| (i as f64 * 0.05).cos() * 30.0).collect(),
        ]);
        let p = PreprocessParams::default();
        let s = p.fit_stats([&r]).unwrap();
        let q = p.apply(&r, &s).unwrap();
        assert_eq!(q.levels.len(), 2);
        assert!(q.levels.iter().all(|c| c.len() == 896));
        assert!(q.levels.iter().flatten().all(|&l| l < 250));
    }
}
