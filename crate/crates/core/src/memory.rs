//! Item memory, continuous item memory and the two-class associative memory.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::hv::{bipolar_component, cosine_similarity, Hypervector, Seed};

/// Default number of quantisation levels.
pub const DEFAULT_LEVELS: usize = 250;
/// Default similarity gate for prototype accumulation.
pub const DEFAULT_GATE: f64 = 0.5;

/// The two diagnostic classes. ADHD is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "ADHD")]
    Adhd,
    #[serde(rename = "CONTROL")]
    Control,
}

impl Class {
    pub const ALL: [Class; 2] = [Class::Adhd, Class::Control];

    pub fn other(self) -> Class {
        match self {
            Class::Adhd => Class::Control,
            Class::Control => Class::Adhd,
        }
    }

    fn index(self) -> usize {
        match self {
            Class::Adhd => 0,
            Class::Control => 1,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Adhd => "ADHD",
            Class::Control => "CONTROL",
        })
    }
}

impl std::str::FromStr for Class {
    type Err = HdcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ADHD" => Ok(Class::Adhd),
            "CONTROL" => Ok(Class::Control),
            other => Err(HdcError::Validation(format!("unknown class label {other:?}"))),
        }
    }
}

/// Symbol table mapping channel names to random bipolar vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemMemory {
    names: Vec<String>,
    vectors: Vec<Hypervector>,
}

impl ItemMemory {
    /// One random bipolar vector per name, drawn in name order from `seed`.
    pub fn build<S: AsRef<str>>(names: &[S], seed: Seed, dimension: usize) -> Result<Self> {
        if names.is_empty() {
            return Err(HdcError::invalid("item memory needs at least one symbol"));
        }
        if dimension == 0 {
            return Err(HdcError::invalid("dimension must be at least 1"));
        }
        let names: Vec<String> = names.iter().map(|n| n.as_ref().to_owned()).collect();
        check_names(&names)?;
        let vectors = crate::hv::random_bipolar(seed, names.len(), dimension)?;
        Ok(ItemMemory { names, vectors })
    }

    /// Reassembles a memory from stored vectors (used when loading models).
    pub fn from_parts(names: Vec<String>, vectors: Vec<Hypervector>) -> Result<Self> {
        if names.is_empty() || names.len() != vectors.len() {
            return Err(HdcError::Format("item memory needs one vector per symbol".into()));
        }
        check_names(&names)?;
        let dim = vectors[0].dimension();
        if vectors.iter().any(|v| v.dimension() != dim || !v.is_bipolar()) {
            return Err(HdcError::Format(
                "item memory vectors must be bipolar and share one dimension".into(),
            ));
        }
        Ok(ItemMemory { names, vectors })
    }

    pub fn get(&self, name: &str) -> Result<&Hypervector> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.vectors[i])
            .ok_or_else(|| HdcError::invalid(format!("unknown channel {name:?}")))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vectors(&self) -> &[Hypervector] {
        &self.vectors
    }

    pub fn dimension(&self) -> usize {
        self.vectors[0].dimension()
    }
}

fn check_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if n.is_empty() {
            return Err(HdcError::invalid("symbol names must be non-empty"));
        }
        if !seen.insert(n.as_str()) {
            return Err(HdcError::invalid(format!("duplicate symbol {n:?}")));
        }
    }
    Ok(())
}

/// Ordered level vectors whose similarity decays linearly with level distance.
///
/// Level 0 is random. Level `k` is level 0 with the first
/// `floor(k * (D/2) / (L-1))` positions of one seeded random permutation of
/// `0..D` sign-flipped, so the top level differs from level 0 in exactly
/// `D/2` positions and distances grow monotonically.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousItemMemory {
    levels: Vec<Hypervector>,
}

impl ContinuousItemMemory {
    /// Level 0 takes the first `D` draws of the stream (see [`crate::hv`]);
    /// the flip order is a Fisher-Yates shuffle of `0..D` continuing on the
    /// same stream, swapping position `i` (from `D-1` down to 1) with a
    /// uniform index in `0..=i`.
    pub fn build(level_count: usize, seed: Seed, dimension: usize) -> Result<Self> {
        if level_count < 2 {
            return Err(HdcError::invalid("continuous item memory needs at least 2 levels"));
        }
        if dimension == 0 || !dimension.is_multiple_of(2) {
            return Err(HdcError::invalid(format!(
                "continuous item memory needs a positive even dimension, got {dimension}"
            )));
        }
        let mut rng = seed.rng();
        let base: Vec<i32> = (0..dimension).map(|_| bipolar_component(&mut rng)).collect();
        let order = flip_order(&mut rng, dimension);

        let mut levels = Vec::with_capacity(level_count);
        let mut current = base;
        let mut flipped = 0usize;
        for k in 0..level_count {
            let target = Self::flip_count(k, level_count, dimension);
            for &pos in &order[flipped..target] {
                current[pos] = -current[pos];
            }
            flipped = target;
            levels.push(Hypervector::from_components(current.clone())?);
        }
        Ok(ContinuousItemMemory { levels })
    }

    /// Cumulative number of flipped positions at level `k`.
    pub fn flip_count(k: usize, level_count: usize, dimension: usize) -> usize {
        k * (dimension / 2) / (level_count - 1)
    }

    pub fn from_levels(levels: Vec<Hypervector>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(HdcError::Format(
                "continuous item memory needs at least 2 levels".into(),
            ));
        }
        let dim = levels[0].dimension();
        if levels.iter().any(|v| v.dimension() != dim || !v.is_bipolar()) {
            return Err(HdcError::Format(
                "level vectors must be bipolar and share one dimension".into(),
            ));
        }
        Ok(ContinuousItemMemory { levels })
    }

    pub fn level(&self, index: usize) -> Result<&Hypervector> {
        self.levels
            .get(index)
            .ok_or_else(|| HdcError::invalid(format!("level index {index} out of range 0..{}", self.levels.len())))
    }

    pub fn levels(&self) -> &[Hypervector] {
        &self.levels
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn dimension(&self) -> usize {
        self.levels[0].dimension()
    }
}

fn flip_order(rng: &mut impl RngCore, dimension: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dimension).collect();
    for i in (1..dimension).rev() {
        let j = rng.random_range(0..=i as u64) as usize;
        order.swap(i, j);
    }
    order
}

/// Outcome of querying the associative memory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub class: Class,
    pub similarity_adhd: f64,
    pub similarity_control: f64,
}

/// Two class prototypes with similarity-gated accumulation.
#[derive(Clone, Debug, PartialEq)]
pub struct AssociativeMemory {
    prototypes: [Hypervector; 2],
    bundle_counts: [u64; 2],
    gate_threshold: f64,
}

impl AssociativeMemory {
    pub fn new(dimension: usize, gate_threshold: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(HdcError::invalid("dimension must be at least 1"));
        }
        if !gate_threshold.is_finite() {
            return Err(HdcError::invalid("gate threshold must be finite"));
        }
        Ok(AssociativeMemory {
            prototypes: [Hypervector::zeros(dimension), Hypervector::zeros(dimension)],
            bundle_counts: [0, 0],
            gate_threshold,
        })
    }

    pub fn from_parts(
        adhd: Hypervector,
        control: Hypervector,
        bundle_counts: [u64; 2],
        gate_threshold: f64,
    ) -> Result<Self> {
        if adhd.dimension() != control.dimension() {
            return Err(HdcError::Format("prototype dimensions differ".into()));
        }
        for (proto, count) in [(&adhd, bundle_counts[0]), (&control, bundle_counts[1])] {
            if (count == 0) != proto.is_zero() {
                return Err(HdcError::Format(
                    "prototype contents disagree with its bundle count".into(),
                ));
            }
        }
        Ok(AssociativeMemory {
            prototypes: [adhd, control],
            bundle_counts,
            gate_threshold,
        })
    }

    pub fn prototype(&self, class: Class) -> &Hypervector {
        &self.prototypes[class.index()]
    }

    pub fn bundle_count(&self, class: Class) -> u64 {
        self.bundle_counts[class.index()]
    }

    pub fn gate_threshold(&self) -> f64 {
        self.gate_threshold
    }

    pub fn dimension(&self) -> usize {
        self.prototypes[0].dimension()
    }

    pub fn is_trained(&self) -> bool {
        self.bundle_counts.iter().all(|&c| c > 0)
    }

    /// Offers `f` to the prototype of `label`. An empty prototype always
    /// accepts; otherwise `f` is bundled only when its cosine similarity to
    /// the prototype is below the gate. Returns whether `f` was bundled.
    pub fn update(&mut self, f: &Hypervector, label: Class) -> Result<bool> {
        if f.dimension() != self.dimension() {
            return Err(HdcError::DimensionMismatch {
                expected: self.dimension(),
                got: f.dimension(),
            });
        }
        if f.is_zero() {
            return Err(HdcError::invalid("cannot train on an all-zero vector"));
        }
        let idx = label.index();
        let accept = self.bundle_counts[idx] == 0 || cosine_similarity(f, &self.prototypes[idx])? < self.gate_threshold;
        if accept {
            self.prototypes[idx].add_assign(f)?;
            self.bundle_counts[idx] += 1;
        }
        Ok(accept)
    }

    /// ADHD iff the similarity to the ADHD prototype is strictly greater;
    /// ties go to CONTROL.
    pub fn query(&self, q: &Hypervector) -> Result<QueryResult> {
        for class in Class::ALL {
            if self.bundle_count(class) == 0 {
                return Err(HdcError::UntrainedMemory(class));
            }
        }
        let similarity_adhd = cosine_similarity(q, self.prototype(Class::Adhd))?;
        let similarity_control = cosine_similarity(q, self.prototype(Class::Control))?;
        let class = if similarity_adhd > similarity_control {
            Class::Adhd
        } else {
            Class::Control
        };
        Ok(QueryResult {
            class,
            similarity_adhd,
            similarity_control,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hv::{hamming_distance, random_bipolar};

    #[test]
    fn item_memory_lookup() {
        let im = ItemMemory::build(&["F4", "Cz"], Seed(3), 10_000).unwrap();
        assert_eq!(im.names().len(), 2);
        assert_eq!(im.get("F4").unwrap(), im.get("F4").unwrap());
        let cos = cosine_similarity(im.get("F4").unwrap(), im.get("Cz").unwrap()).unwrap();
        assert!(cos.abs() < 0.05);
        assert!(im.get("O1").is_err());
    }

    #[test]
    fn item_memory_rejects_duplicates_and_empty_names() {
        assert!(ItemMemory::build(&["F4", "F4"], Seed(1), 16).is_err());
        assert!(ItemMemory::build(&["F4", ""], Seed(1), 16).is_err());
        assert!(ItemMemory::build::<&str>(&[], Seed(1), 16).is_err());
    }

    #[test]
    fn cim_default_structure() {
        let cim = ContinuousItemMemory::build(250, Seed(9), 10_000).unwrap();
        let l0 = cim.level(0).unwrap();
        assert_eq!(hamming_distance(l0, cim.level(249).unwrap()).unwrap(), 5000);
        assert_eq!(cosine_similarity(l0, cim.level(249).unwrap()).unwrap(), 0.0);
        assert_eq!(hamming_distance(l0, cim.level(1).unwrap()).unwrap(), 20);
        assert!(cim.level(250).is_err());
    }

    #[test]
    fn cim_two_levels() {
        let cim = ContinuousItemMemory::build(2, Seed(1), 4).unwrap();
        assert_eq!(
            hamming_distance(cim.level(0).unwrap(), cim.level(1).unwrap()).unwrap(),
            2
        );
    }

    #[test]
    fn cim_rejects_bad_shapes() {
        assert!(ContinuousItemMemory::build(1, Seed(1), 10).is_err());
        assert!(ContinuousItemMemory::build(4, Seed(1), 11).is_err());
    }

    #[test]
    fn cim_odd_split_endpoint() {
        // D/2 = 5 flips over L-1 = 3 steps: 0, 1, 3, 5.
        let cim = ContinuousItemMemory::build(4, Seed(2), 10).unwrap();
        let d: Vec<usize> = (0..4)
            .map(|k| hamming_distance(cim.level(0).unwrap(), cim.level(k).unwrap()).unwrap())
            .collect();
        assert_eq!(d, vec![0, 1, 3, 5]);
    }

    fn am_with(adhd: &Hypervector, control: &Hypervector) -> AssociativeMemory {
        let mut am = AssociativeMemory::new(adhd.dimension(), DEFAULT_GATE).unwrap();
        am.update(adhd, Class::Adhd).unwrap();
        am.update(control, Class::Control).unwrap();
        am
    }

    #[test]
    fn empty_prototype_accepts_unconditionally() {
        let f = &random_bipolar(Seed(5), 1, 1000).unwrap()[0];
        let mut am = AssociativeMemory::new(1000, DEFAULT_GATE).unwrap();
        assert!(am.update(f, Class::Adhd).unwrap());
        assert_eq!(am.prototype(Class::Adhd), f);
        assert!(am.prototype(Class::Control).is_zero());
        assert_eq!(am.bundle_count(Class::Adhd), 1);
    }

    #[test]
    fn gate_rejects_similar_and_accepts_dissimilar() {
        // Prototype p = [1,0,...]: cos(f, p) = f_0 / |f|.
        let dim = 100;
        let mut p = vec![0; dim];
        p[0] = 1;
        let p = Hypervector::from_components(p).unwrap();
        let mut am = AssociativeMemory::new(dim, DEFAULT_GATE).unwrap();
        am.update(&p, Class::Adhd).unwrap();

        // |f| = 10 in both probes, so cos = f_0 / 10.
        let mut hi = vec![0; dim];
        hi[0] = 9;
        hi[1] = 3;
        hi[2] = 3;
        hi[3] = 1;
        let hi = Hypervector::from_components(hi).unwrap();
        assert!((cosine_similarity(&hi, &p).unwrap() - 0.9).abs() < 1e-12);
        assert!(!am.update(&hi, Class::Adhd).unwrap());
        assert_eq!(am.prototype(Class::Adhd), &p);

        let mut lo = vec![0; dim];
        lo[0] = 3;
        lo[1] = 9;
        lo[2] = 3;
        lo[3] = 1;
        let lo = Hypervector::from_components(lo).unwrap();
        assert!((cosine_similarity(&lo, &p).unwrap() - 0.3).abs() < 1e-12);
        assert!(am.update(&lo, Class::Adhd).unwrap());
        let expected = crate::hv::bundle([&p, &lo]).unwrap();
        assert_eq!(am.prototype(Class::Adhd), &expected);
        assert!(am.prototype(Class::Control).is_zero());
    }

    #[test]
    fn update_rejects_zero_and_mismatched_vectors() {
        let mut am = AssociativeMemory::new(8, DEFAULT_GATE).unwrap();
        assert!(am.update(&Hypervector::zeros(8), Class::Adhd).is_err());
        assert!(am.update(&Hypervector::ones(4), Class::Adhd).is_err());
    }

    #[test]
    fn query_rules() {
        let v = random_bipolar(Seed(8), 2, 10_000).unwrap();
        let am = am_with(&v[0], &v[1]);
        let r = am.query(&v[0]).unwrap();
        assert_eq!(r.class, Class::Adhd);
        assert_eq!(r.similarity_adhd, 1.0);

        // Identical prototypes tie, which resolves to CONTROL.
        let tie = am_with(&v[0], &v[0]);
        let r = tie.query(&v[1]).unwrap();
        assert_eq!(r.similarity_adhd, r.similarity_control);
        assert_eq!(r.class, Class::Control);
    }

    #[test]
    fn query_prefers_higher_similarity() {
        // q = [4, 1, ...] against unit prototypes e0 and e1: sim_A = 4/|q| > sim_C.
        let dim = 10;
        let mut e0 = vec![0; dim];
        e0[0] = 1;
        let mut e1 = vec![0; dim];
        e1[1] = 1;
        let mut q = vec![0; dim];
        q[0] = 4;
        q[1] = 1;
        let am = am_with(
            &Hypervector::from_components(e0).unwrap(),
            &Hypervector::from_components(e1).unwrap(),
        );
        let r = am.query(&Hypervector::from_components(q).unwrap()).unwrap();
        assert_eq!(r.class, Class::Adhd);
        assert!(r.similarity_adhd > r.similarity_control);
    }

    #[test]
    fn query_on_empty_memory_fails() {
        let mut am = AssociativeMemory::new(16, DEFAULT_GATE).unwrap();
        let q = Hypervector::ones(16);
        assert!(matches!(am.query(&q), Err(HdcError::UntrainedMemory(Class::Adhd))));
        am.update(&q, Class::Adhd).unwrap();
        assert!(matches!(am.query(&q), Err(HdcError::UntrainedMemory(Class::Control))));
    }

    #[test]
    fn class_parsing() {
        assert_eq!("adhd".parse::<Class>().unwrap(), Class::Adhd);
        assert_eq!("CONTROL".parse::<Class>().unwrap(), Class::Control);
        assert!("other".parse::<Class>().is_err());
    }
}
