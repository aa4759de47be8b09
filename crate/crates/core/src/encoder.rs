//! Spatio-temporal n-gram encoder.
//!
//! For channel `i` and window `j` with level indices `x_1..x_n`:
//!
//! ```text
//! S_ij  = bind_{t=1..n} permute(level(x_t), n - t)
//! SC_ij = bind(S_ij, item(channel_i))
//! F_j   = sum_i SC_ij
//! ```
//!
//! The oldest sample is the most rotated; the newest is unrotated.
//! [`SpatioTemporalEncoder`] evaluates the same expression on bit-packed
//! vectors, where a bipolar product is an XOR.

use crate::error::{HdcError, Result};
use crate::hv::{bind, permute, Hypervector};
use crate::memory::{Class, ContinuousItemMemory, ItemMemory};
use crate::preprocess::QuantizedRecording;

pub const DEFAULT_NGRAM: usize = 32;

/// `n` consecutive level indices from one channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NGramWindow {
    pub channel: usize,
    pub index: usize,
    pub levels: Vec<u16>,
}

/// The bundled vector `F` of one window across all channels.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedNGram {
    pub vector: Hypervector,
    pub patient_id: String,
    pub window: usize,
    pub label: Class,
}

/// Non-overlapping windows of length `n`, per channel, in temporal order.
pub fn segment(rec: &QuantizedRecording, n: usize) -> Result<Vec<Vec<NGramWindow>>> {
    if n == 0 {
        return Err(HdcError::invalid("n-gram length must be at least 1"));
    }
    if rec.is_empty() || !rec.len().is_multiple_of(n) {
        return Err(HdcError::invalid(format!(
            "patient {}: {} samples are not a positive multiple of n = {n}",
            rec.patient_id,
            rec.len()
        )));
    }
    Ok(rec
        .levels
        .iter()
        .enumerate()
        .map(|(channel, column)| {
            column
                .chunks_exact(n)
                .enumerate()
                .map(|(index, chunk)| NGramWindow {
                    channel,
                    index,
                    levels: chunk.to_vec(),
                })
                .collect()
        })
        .collect())
}

/// Temporal n-gram vector of one window, evaluated with plain vector ops.
pub fn encode_temporal(window: &NGramWindow, cim: &ContinuousItemMemory) -> Result<Hypervector> {
    let n = window.levels.len();
    if n == 0 {
        return Err(HdcError::invalid("empty n-gram window"));
    }
    let mut acc = Hypervector::ones(cim.dimension());
    for (t, &level) in window.levels.iter().enumerate() {
        let shift = (n - 1 - t) as i64;
        acc = bind(&acc, &permute(cim.level(level as usize)?, shift))?;
    }
    Ok(acc)
}

/// Binds a temporal vector to its channel's item vector.
pub fn encode_channel(s: &Hypervector, channel_name: &str, im: &ItemMemory) -> Result<Hypervector> {
    bind(s, im.get(channel_name)?)
}

/// Reference evaluation of `F` for one window index across channels.
pub fn encode_window_all_channels(
    windows: &[NGramWindow],
    channel_names: &[String],
    im: &ItemMemory,
    cim: &ContinuousItemMemory,
) -> Result<Hypervector> {
    let first = windows
        .first()
        .ok_or_else(|| HdcError::invalid("need at least one channel window"))?;
    let mut f: Option<Hypervector> = None;
    for w in windows {
        if w.index != first.index {
            return Err(HdcError::invalid(format!(
                "window indices differ across channels ({} vs {})",
                first.index, w.index
            )));
        }
        let name = channel_names
            .get(w.channel)
            .ok_or_else(|| HdcError::invalid(format!("no name for channel {}", w.channel)))?;
        let sc = encode_channel(&encode_temporal(w, cim)?, name, im)?;
        match f.as_mut() {
            Some(acc) => acc.add_assign(&sc)?,
            None => f = Some(sc),
        }
    }
    Ok(f.expect("at least one window"))
}

/// Bipolar vector packed one bit per component; a set bit means `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PackedBipolar {
    words: Vec<u64>,
}

impl PackedBipolar {
    fn pack(components: &[i32]) -> Self {
        let mut words = vec![0u64; components.len().div_ceil(64)];
        for (i, &c) in components.iter().enumerate() {
            if c < 0 {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        PackedBipolar { words }
    }

    #[inline]
    fn xor_assign(&mut self, other: &PackedBipolar) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }
}

/// Every level vector under every rotation `0..n`, packed.
#[derive(Clone, Debug)]
struct LevelTable {
    ngram: usize,
    entries: Vec<PackedBipolar>,
}

impl LevelTable {
    fn build(cim: &ContinuousItemMemory, ngram: usize) -> Self {
        let mut entries = Vec::with_capacity(cim.level_count() * ngram);
        for level in cim.levels() {
            let mut rotated = level.components().to_vec();
            for shift in 0..ngram {
                if shift > 0 {
                    rotated.rotate_right(1);
                }
                entries.push(PackedBipolar::pack(&rotated));
            }
        }
        LevelTable { ngram, entries }
    }

    #[inline]
    fn get(&self, level: usize, shift: usize) -> &PackedBipolar {
        &self.entries[level * self.ngram + shift]
    }
}

/// Encoder owning the item memories and a precomputed rotation table.
#[derive(Clone, Debug)]
pub struct SpatioTemporalEncoder {
    item_memory: ItemMemory,
    level_memory: ContinuousItemMemory,
    ngram: usize,
    channel_keys: Vec<PackedBipolar>,
    table: LevelTable,
}

impl SpatioTemporalEncoder {
    pub fn new(item_memory: ItemMemory, level_memory: ContinuousItemMemory, ngram: usize) -> Result<Self> {
        if ngram == 0 {
            return Err(HdcError::invalid("n-gram length must be at least 1"));
        }
        if item_memory.dimension() != level_memory.dimension() {
            return Err(HdcError::DimensionMismatch {
                expected: level_memory.dimension(),
                got: item_memory.dimension(),
            });
        }
        let channel_keys = item_memory
            .vectors()
            .iter()
            .map(|v| PackedBipolar::pack(v.components()))
            .collect();
        let table = LevelTable::build(&level_memory, ngram);
        Ok(SpatioTemporalEncoder {
            item_memory,
            level_memory,
            ngram,
            channel_keys,
            table,
        })
    }

    pub fn item_memory(&self) -> &ItemMemory {
        &self.item_memory
    }

    pub fn level_memory(&self) -> &ContinuousItemMemory {
        &self.level_memory
    }

    pub fn ngram(&self) -> usize {
        self.ngram
    }

    pub fn dimension(&self) -> usize {
        self.level_memory.dimension()
    }

    /// Maps the recording's channel order onto item-memory slots.
    fn channel_slots(&self, channels: &[String]) -> Result<Vec<usize>> {
        channels
            .iter()
            .map(|name| {
                self.item_memory
                    .names()
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| HdcError::invalid(format!("unknown channel {name:?}")))
            })
            .collect()
    }

    fn temporal_packed(&self, levels: &[u16]) -> Result<PackedBipolar> {
        if levels.len() != self.ngram {
            return Err(HdcError::invalid(format!(
                "window has {} samples, encoder expects {}",
                levels.len(),
                self.ngram
            )));
        }
        let level_count = self.level_memory.level_count();
        let mut acc = PackedBipolar {
            words: vec![0; self.dimension().div_ceil(64)],
        };
        for (t, &level) in levels.iter().enumerate() {
            if level as usize >= level_count {
                return Err(HdcError::invalid(format!(
                    "level index {level} out of range 0..{level_count}"
                )));
            }
            acc.xor_assign(self.table.get(level as usize, self.ngram - 1 - t));
        }
        Ok(acc)
    }

    fn bundle_packed(&self, bound: &[PackedBipolar]) -> Hypervector {
        let dim = self.dimension();
        let ch = bound.len() as i32;
        let components = (0..dim)
            .map(|d| {
                let negatives: i32 = bound.iter().map(|p| ((p.words[d / 64] >> (d % 64)) & 1) as i32).sum();
                ch - 2 * negatives
            })
            .collect();
        Hypervector::from_components(components).expect("dimension is positive")
    }

    /// `F` for one window index given one level window per channel, in the
    /// order of `channels`.
    pub fn encode_windows(&self, channels: &[String], windows: &[&[u16]]) -> Result<Hypervector> {
        if channels.is_empty() || channels.len() != windows.len() {
            return Err(HdcError::invalid("need exactly one window per channel"));
        }
        let slots = self.channel_slots(channels)?;
        let bound = slots
            .iter()
            .zip(windows)
            .map(|(&slot, levels)| {
                let mut s = self.temporal_packed(levels)?;
                s.xor_assign(&self.channel_keys[slot]);
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.bundle_packed(&bound))
    }

    /// One encoded vector per window index, in temporal order.
    pub fn encode_patient(&self, rec: &QuantizedRecording) -> Result<Vec<EncodedNGram>> {
        if rec.level_count > self.level_memory.level_count() {
            return Err(HdcError::invalid(format!(
                "recording uses {} levels but the level memory has {}",
                rec.level_count,
                self.level_memory.level_count()
            )));
        }
        let windows = segment(rec, self.ngram)?;
        let count = windows[0].len();
        (0..count)
            .map(|j| {
                let per_channel: Vec<&[u16]> = windows.iter().map(|w| w[j].levels.as_slice()).collect();
                Ok(EncodedNGram {
                    vector: self.encode_windows(&rec.channels, &per_channel)?,
                    patient_id: rec.patient_id.clone(),
                    window: j,
                    label: rec.label,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::{cosine_similarity, Seed};

    fn memories(dim: usize, levels: usize) -> (ItemMemory, ContinuousItemMemory) {
        (
            ItemMemory::build(&["F4", "Cz"], Seed(1), dim).unwrap(),
            ContinuousItemMemory::build(levels, Seed(2), dim).unwrap(),
        )
    }

    fn quantized(levels: Vec<Vec<u16>>, level_count: usize) -> QuantizedRecording {
        QuantizedRecording {
            patient_id: "p".into(),
            label: Class::Control,
            channels: vec!["F4".into(), "Cz".into()],
            levels,
            level_count,
        }
    }

    fn window(levels: &[u16]) -> NGramWindow {
        NGramWindow {
            channel: 0,
            index: 0,
            levels: levels.to_vec(),
        }
    }

    #[test]
    fn segment_examples() {
        let q = quantized(vec![(0..896).map(|i| (i % 250) as u16).collect(); 2], 250);
        let w = segment(&q, 32).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].len(), 28);
        let joined: Vec<u16> = w[0].iter().flat_map(|x| x.levels.clone()).collect();
        assert_eq!(joined, q.levels[0]);

        let one = quantized(vec![vec![0; 32]; 2], 250);
        assert_eq!(segment(&one, 32).unwrap()[0].len(), 1);
        assert!(segment(&quantized(vec![vec![0; 33]; 2], 250), 32).is_err());
    }

    #[test]
    fn temporal_single_sample_is_the_level() {
        let (_, cim) = memories(256, 8);
        assert_eq!(&encode_temporal(&window(&[5]), &cim).unwrap(), cim.level(5).unwrap());
    }

    #[test]
    fn temporal_two_samples_expand() {
        let (_, cim) = memories(256, 8);
        let expected = bind(&permute(cim.level(3).unwrap(), 1), cim.level(6).unwrap()).unwrap();
        assert_eq!(encode_temporal(&window(&[3, 6]), &cim).unwrap(), expected);
        assert!(encode_temporal(&window(&[3, 8]), &cim).is_err());
    }

    #[test]
    fn temporal_is_order_sensitive() {
        let (_, cim) = memories(10_000, 250);
        let fwd: Vec<u16> = (0..32).map(|i| (i * 7 % 250) as u16).collect();
        let rev: Vec<u16> = fwd.iter().rev().copied().collect();
        let a = encode_temporal(&window(&fwd), &cim).unwrap();
        let b = encode_temporal(&window(&rev), &cim).unwrap();
        assert_ne!(a, b);
        assert!(cosine_similarity(&a, &b).unwrap().abs() < 0.05);
    }

    #[test]
    fn channel_binding_is_invertible() {
        let (im, cim) = memories(10_000, 250);
        let s = encode_temporal(&window(&[1, 2, 3]), &cim).unwrap();
        let sc = encode_channel(&s, "F4", &im).unwrap();
        assert_eq!(bind(&sc, im.get("F4").unwrap()).unwrap(), s);
        let other = encode_channel(&s, "Cz", &im).unwrap();
        assert!(cosine_similarity(&sc, &other).unwrap().abs() < 0.05);
        assert!(encode_channel(&s, "O1", &im).is_err());
    }

    #[test]
    fn all_channel_bundle() {
        let (im, cim) = memories(10_000, 250);
        let names = vec!["F4".to_string(), "Cz".to_string()];
        let a = window(&[10, 20, 30]);
        let mut b = window(&[200, 100, 0]);
        b.channel = 1;
        let single = encode_window_all_channels(std::slice::from_ref(&a), &names, &im, &cim).unwrap();
        assert_eq!(
            single,
            encode_channel(&encode_temporal(&a, &cim).unwrap(), "F4", &im).unwrap()
        );

        let f = encode_window_all_channels(&[a.clone(), b.clone()], &names, &im, &cim).unwrap();
        assert!(f.components().iter().all(|c| [-2, 0, 2].contains(c)));
        assert!(cosine_similarity(&f, &single).unwrap() > 0.5);

        b.index = 1;
        assert!(encode_window_all_channels(&[a, b], &names, &im, &cim).is_err());
    }

    #[test]
    fn packed_encoder_matches_reference() {
        let (im, cim) = memories(1000, 16);
        let enc = SpatioTemporalEncoder::new(im.clone(), cim.clone(), 4).unwrap();
        let q = quantized(
            vec![
                (0..16).map(|i| (i * 5 % 16) as u16).collect(),
                (0..16).map(|i| (i * 3 % 16) as u16).collect(),
            ],
            16,
        );
        let encoded = enc.encode_patient(&q).unwrap();
        assert_eq!(encoded.len(), 4);
        let windows = segment(&q, 4).unwrap();
        for (j, e) in encoded.iter().enumerate() {
            let reference =
                encode_window_all_channels(&[windows[0][j].clone(), windows[1][j].clone()], &q.channels, &im, &cim)
                    .unwrap();
            assert_eq!(e.vector, reference, "window {j}");
            assert_eq!(e.window, j);
        }
    }

    #[test]
    fn encode_patient_is_local_and_deterministic() {
        let (im, cim) = memories(2000, 250);
        let enc = SpatioTemporalEncoder::new(im, cim, 32).unwrap();
        let base: Vec<u16> = (0..896).map(|i| (i * 13 % 250) as u16).collect();
        let q = quantized(vec![base.clone(), base.clone()], 250);
        let a = enc.encode_patient(&q).unwrap();
        assert_eq!(a.len(), 28);
        assert_eq!(a, enc.encode_patient(&q).unwrap());

        let mut changed = q.clone();
        changed.levels[1][5 * 32 + 7] = 3;
        let b = enc.encode_patient(&changed).unwrap();
        for j in 0..28 {
            assert_eq!(a[j] == b[j], j != 5, "window {j}");
        }
    }

    #[test]
    fn encoder_rejects_unknown_channel() {
        let (im, cim) = memories(128, 4);
        let enc = SpatioTemporalEncoder::new(im, cim, 2).unwrap();
        let mut q = quantized(vec![vec![0; 4]; 2], 4);
        q.channels[1] = "O1".into();
        assert!(enc.encode_patient(&q).is_err());
    }
}
