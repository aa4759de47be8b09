//! Binary model snapshot.
//!
//! All integers and floats are little-endian. Strings are a `u32` byte
//! length followed by UTF-8.
//!
//! ```text
//! magic            8 bytes  "HDCEEG\0\x01"
//! dimension        u32
//! levels           u32
//! ngram            u32
//! downsample       u32
//! drop             u32
//! gate             f64
//! seed             u64
//! clip_low_pct     f64
//! clip_high_pct    f64
//! train_adhd, train_control, test_adhd, test_control   u32 each
//! stratified       u8 (0 or 1)
//! stats_scope      u8 (0 = train, 1 = all)
//! channel_count    u32
//! per channel:     name, clip_low f64, clip_high f64, quant_min f64, quant_max f64
//! item memory:     channel_count x dimension i8 (+1 / -1), channel order
//! level memory:    levels x dimension i8 (+1 / -1), level order
//! bundle counts:   u64 ADHD, u64 CONTROL
//! prototypes:      dimension i32 ADHD, then dimension i32 CONTROL
//! trailer          4 bytes  "END\0"
//! ```

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::classifier::{PipelineParams, SplitConfig, StatsScope, TrainedModel};
use crate::dataio::SplitCounts;
use crate::encoder::SpatioTemporalEncoder;
use crate::error::{HdcError, Result};
use crate::hv::{Hypervector, Seed};
use crate::memory::{AssociativeMemory, Class, ContinuousItemMemory, ItemMemory};
use crate::preprocess::ChannelStats;

pub const MAGIC: &[u8; 8] = b"HDCEEG\0\x01";
pub const TRAILER: &[u8; 4] = b"END\0";

/// Encodes the model and the split it was trained under.
pub fn encode_model(model: &TrainedModel, split: &SplitConfig) -> Vec<u8> {
    let mut out = Vec::new();
    write_model_to(&mut out, model, split).expect("writing to a Vec cannot fail");
    out
}

fn write_model_to(w: &mut impl Write, model: &TrainedModel, split: &SplitConfig) -> std::io::Result<()> {
    let p = &model.params;
    w.write_all(MAGIC)?;
    for v in [p.dimension, p.levels, p.ngram, p.downsample, p.drop] {
        w.write_u32::<LittleEndian>(v as u32)?;
    }
    w.write_f64::<LittleEndian>(p.gate)?;
    w.write_u64::<LittleEndian>(p.seed.0)?;
    w.write_f64::<LittleEndian>(p.clip_low_pct)?;
    w.write_f64::<LittleEndian>(p.clip_high_pct)?;
    let c = &split.counts;
    for v in [c.train_adhd, c.train_control, c.test_adhd, c.test_control] {
        w.write_u32::<LittleEndian>(v as u32)?;
    }
    w.write_u8(split.stratified as u8)?;
    w.write_u8(match split.stats_scope {
        StatsScope::Train => 0,
        StatsScope::All => 1,
    })?;

    w.write_u32::<LittleEndian>(model.stats.len() as u32)?;
    for s in &model.stats {
        w.write_u32::<LittleEndian>(s.channel.len() as u32)?;
        w.write_all(s.channel.as_bytes())?;
        for v in [s.clip_low, s.clip_high, s.quant_min, s.quant_max] {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    let enc = model.encoder();
    for v in enc.item_memory().vectors().iter().chain(enc.level_memory().levels()) {
        for &c in v.components() {
            w.write_i8(c as i8)?;
        }
    }
    let am = model.memory();
    for class in Class::ALL {
        w.write_u64::<LittleEndian>(am.bundle_count(class))?;
    }
    for class in Class::ALL {
        for &c in am.prototype(class).components() {
            w.write_i32::<LittleEndian>(c)?;
        }
    }
    w.write_all(TRAILER)
}

pub fn write_model(path: &Path, model: &TrainedModel, split: &SplitConfig) -> Result<()> {
    fs::write(path, encode_model(model, split)).map_err(|e| HdcError::io(path, e))
}

pub fn read_model(path: &Path) -> Result<(TrainedModel, SplitConfig)> {
    let bytes = fs::read(path).map_err(|e| HdcError::io(path, e))?;
    decode_model(&bytes)
}

fn truncated(_: std::io::Error) -> HdcError {
    HdcError::Format("model file is truncated".into())
}

fn read_len(r: &mut Cursor<&[u8]>, limit: usize, what: &str) -> Result<usize> {
    let v = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    if v > limit {
        return Err(HdcError::Format(format!("{what} {v} is implausibly large")));
    }
    Ok(v)
}

fn read_bipolar(r: &mut Cursor<&[u8]>, dimension: usize) -> Result<Hypervector> {
    let mut raw = vec![0u8; dimension];
    r.read_exact(&mut raw).map_err(truncated)?;
    let components = raw.into_iter().map(|b| b as i8 as i32).collect();
    Hypervector::bipolar(components).map_err(|_| HdcError::Format("stored base vector is not bipolar".into()))
}

pub fn decode_model(bytes: &[u8]) -> Result<(TrainedModel, SplitConfig)> {
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(HdcError::Format("not a model file (bad magic)".into()));
    }
    // Generous bounds only guard allocations against corrupt headers.
    let dimension = read_len(&mut r, 1 << 26, "dimension")?;
    let levels = read_len(&mut r, 1 << 16, "level count")?;
    let ngram = read_len(&mut r, 1 << 20, "n-gram length")?;
    let downsample = read_len(&mut r, u32::MAX as usize, "downsample factor")?;
    let drop = read_len(&mut r, u32::MAX as usize, "drop count")?;
    let gate = r.read_f64::<LittleEndian>().map_err(truncated)?;
    let seed = Seed(r.read_u64::<LittleEndian>().map_err(truncated)?);
    let clip_low_pct = r.read_f64::<LittleEndian>().map_err(truncated)?;
    let clip_high_pct = r.read_f64::<LittleEndian>().map_err(truncated)?;
    let params = PipelineParams {
        dimension,
        levels,
        ngram,
        downsample,
        drop,
        gate,
        seed,
        clip_low_pct,
        clip_high_pct,
    };
    params
        .validate()
        .map_err(|e| HdcError::Format(format!("stored parameters are invalid: {e}")))?;

    let mut counts = [0usize; 4];
    for c in &mut counts {
        *c = read_len(&mut r, u32::MAX as usize, "split count")?;
    }
    let stratified = match r.read_u8().map_err(truncated)? {
        0 => false,
        1 => true,
        v => return Err(HdcError::Format(format!("bad stratified flag {v}"))),
    };
    let stats_scope = match r.read_u8().map_err(truncated)? {
        0 => StatsScope::Train,
        1 => StatsScope::All,
        v => return Err(HdcError::Format(format!("bad stats scope {v}"))),
    };
    let split = SplitConfig {
        counts: SplitCounts {
            train_adhd: counts[0],
            train_control: counts[1],
            test_adhd: counts[2],
            test_control: counts[3],
        },
        stratified,
        stats_scope,
    };

    let channel_count = read_len(&mut r, 1 << 16, "channel count")?;
    if channel_count == 0 {
        return Err(HdcError::Format("model has no channels".into()));
    }
    let mut stats = Vec::with_capacity(channel_count);
    for _ in 0..channel_count {
        let len = read_len(&mut r, 1 << 16, "channel name length")?;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name).map_err(truncated)?;
        let channel = String::from_utf8(name).map_err(|_| HdcError::Format("channel name is not UTF-8".into()))?;
        let mut v = [0f64; 4];
        for x in &mut v {
            *x = r.read_f64::<LittleEndian>().map_err(truncated)?;
        }
        stats.push(ChannelStats {
            channel,
            clip_low: v[0],
            clip_high: v[1],
            quant_min: v[2],
            quant_max: v[3],
        });
    }

    let names: Vec<String> = stats.iter().map(|s| s.channel.clone()).collect();
    let item_vectors = (0..channel_count)
        .map(|_| read_bipolar(&mut r, dimension))
        .collect::<Result<Vec<_>>>()?;
    let item_memory = ItemMemory::from_parts(names, item_vectors)?;
    let level_vectors = (0..levels)
        .map(|_| read_bipolar(&mut r, dimension))
        .collect::<Result<Vec<_>>>()?;
    let level_memory = ContinuousItemMemory::from_levels(level_vectors)?;

    let bundle_counts = [
        r.read_u64::<LittleEndian>().map_err(truncated)?,
        r.read_u64::<LittleEndian>().map_err(truncated)?,
    ];
    let mut prototypes = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut comps = vec![0i32; dimension];
        r.read_i32_into::<LittleEndian>(&mut comps).map_err(truncated)?;
        prototypes.push(Hypervector::from_components(comps)?);
    }
    let control = prototypes.pop().expect("two prototypes");
    let adhd = prototypes.pop().expect("two prototypes");
    let memory = AssociativeMemory::from_parts(adhd, control, bundle_counts, gate)?;

    let mut trailer = [0u8; 4];
    r.read_exact(&mut trailer).map_err(truncated)?;
    if &trailer != TRAILER {
        return Err(HdcError::Format("model file has a bad trailer".into()));
    }
    if (r.position() as usize) != bytes.len() {
        return Err(HdcError::Format("model file has trailing bytes".into()));
    }

    let encoder = SpatioTemporalEncoder::new(item_memory, level_memory, ngram)?;
    let model = TrainedModel::from_parts(params, stats, encoder, memory)?;
    Ok((model, split))
}
