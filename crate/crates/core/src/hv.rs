//! Dense hypervectors and the four algebraic primitives.
//!
//! A [`Hypervector`] stores signed 32-bit components. Base vectors are
//! bipolar (every component is `+1` or `-1`); bundles and class prototypes
//! are integer accumulators and are never sign-thresholded.
//!
//! Conventions fixed here so that encodings are reproducible bit for bit:
//!
//! - [`permute`] is a cyclic *right* rotation: `permute(a, k)[(i + k) mod D] = a[i]`.
//! - Random components come from SplitMix64 (state initialised to the seed
//!   value). Vectors are sampled in index order, components in index order,
//!   one 64-bit draw per component: the component is `-1` when bit 63 of the
//!   draw is set and `+1` otherwise.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};

/// Default hypervector dimensionality.
pub const DEFAULT_DIMENSION: usize = 10_000;

/// Root of every pseudo-random stream in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// The generator every random draw in the crate goes through.
    pub fn rng(self) -> SplitMix64 {
        SplitMix64::seed_from_u64(self.0)
    }

    /// Derives an independent child seed for a numbered purpose.
    ///
    /// The child is the first SplitMix64 output for state
    /// `seed ^ (purpose * 0x9E3779B97F4A7C15)`.
    pub fn derive(self, purpose: u64) -> Seed {
        let mixed = self.0 ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Seed(SplitMix64::seed_from_u64(mixed).next_u64())
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// A `D`-dimensional signed integer vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypervector {
    components: Vec<i32>,
}

impl Hypervector {
    pub fn from_components(components: Vec<i32>) -> Result<Self> {
        if components.is_empty() {
            return Err(HdcError::invalid("hypervector dimension must be at least 1"));
        }
        Ok(Hypervector { components })
    }

    /// Builds a bipolar vector, rejecting any component outside `{+1, -1}`.
    pub fn bipolar(components: Vec<i32>) -> Result<Self> {
        let hv = Self::from_components(components)?;
        if !hv.is_bipolar() {
            return Err(HdcError::invalid("bipolar vector has a component outside {+1, -1}"));
        }
        Ok(hv)
    }

    pub fn zeros(dimension: usize) -> Self {
        assert!(dimension > 0, "hypervector dimension must be at least 1");
        Hypervector {
            components: vec![0; dimension],
        }
    }

    /// The all-ones vector, identity element of [`bind`].
    pub fn ones(dimension: usize) -> Self {
        assert!(dimension > 0, "hypervector dimension must be at least 1");
        Hypervector {
            components: vec![1; dimension],
        }
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn components(&self) -> &[i32] {
        &self.components
    }

    pub fn into_components(self) -> Vec<i32> {
        self.components
    }

    pub fn is_bipolar(&self) -> bool {
        self.components.iter().all(|&c| c == 1 || c == -1)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|&c| c == 0)
    }

    pub fn negated(&self) -> Hypervector {
        Hypervector {
            components: self.components.iter().map(|&c| -c).collect(),
        }
    }

    /// Multiplies every component by `factor`.
    pub fn scaled(&self, factor: i32) -> Hypervector {
        Hypervector {
            components: self.components.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn dot(&self, other: &Hypervector) -> Result<i64> {
        check_same_dimension(self, other)?;
        Ok(dot_i32(&self.components, &other.components))
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        (dot_i32(&self.components, &self.components) as f64).sqrt()
    }

    /// In-place bundling of `other` into `self`.
    pub fn add_assign(&mut self, other: &Hypervector) -> Result<()> {
        check_same_dimension(self, other)?;
        for (acc, &c) in self.components.iter_mut().zip(&other.components) {
            *acc += c;
        }
        Ok(())
    }
}

fn check_same_dimension(a: &Hypervector, b: &Hypervector) -> Result<()> {
    if a.dimension() != b.dimension() {
        return Err(HdcError::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    Ok(())
}

#[inline]
fn dot_i32(a: &[i32], b: &[i32]) -> i64 {
    // Chunked so the inner loop vectorises; partial sums stay well inside i64.
    const LANES: usize = 8;
    let mut acc = [0i64; LANES];
    let chunks_a = a.chunks_exact(LANES);
    let chunks_b = b.chunks_exact(LANES);
    let tail: i64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(&x, &y)| x as i64 * y as i64)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for lane in 0..LANES {
            acc[lane] += ca[lane] as i64 * cb[lane] as i64;
        }
    }
    acc.iter().sum::<i64>() + tail
}

/// Draws one bipolar component from the stream.
#[inline]
pub(crate) fn bipolar_component(rng: &mut impl RngCore) -> i32 {
    if rng.next_u64() >> 63 == 1 {
        -1
    } else {
        1
    }
}

pub(crate) fn sample_bipolar(rng: &mut impl RngCore, dimension: usize) -> Hypervector {
    Hypervector {
        components: (0..dimension).map(|_| bipolar_component(rng)).collect(),
    }
}

/// `count` independent random bipolar hypervectors, deterministic in `seed`.
pub fn random_bipolar(seed: Seed, count: usize, dimension: usize) -> Result<Vec<Hypervector>> {
    if dimension == 0 {
        return Err(HdcError::invalid("dimension must be at least 1"));
    }
    if count == 0 {
        return Err(HdcError::invalid("count must be at least 1"));
    }
    let mut rng = seed.rng();
    Ok((0..count).map(|_| sample_bipolar(&mut rng, dimension)).collect())
}

/// Component-wise product.
pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    check_same_dimension(a, b)?;
    Ok(Hypervector {
        components: a.components.iter().zip(&b.components).map(|(&x, &y)| x * y).collect(),
    })
}

/// Component-wise integer sum of a non-empty collection.
pub fn bundle<'a, I>(vectors: I) -> Result<Hypervector>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut iter = vectors.into_iter();
    let mut acc = iter
        .next()
        .ok_or_else(|| HdcError::invalid("cannot bundle an empty collection"))?
        .clone();
    for v in iter {
        acc.add_assign(v)?;
    }
    Ok(acc)
}

/// Cyclic right rotation by `shift` positions, reduced modulo `D`.
pub fn permute(a: &Hypervector, shift: i64) -> Hypervector {
    let d = a.dimension();
    let k = shift.rem_euclid(d as i64) as usize;
    let mut components = a.components.clone();
    components.rotate_right(k);
    Hypervector { components }
}

/// `dot(a, b) / (|a| |b|)`.
pub fn cosine_similarity(a: &Hypervector, b: &Hypervector) -> Result<f64> {
    let dot = a.dot(b)?;
    let na = dot_i32(&a.components, &a.components);
    let nb = dot_i32(&b.components, &b.components);
    if na == 0 || nb == 0 {
        return Err(HdcError::UndefinedSimilarity);
    }
    let cos = dot as f64 / (na as f64 * nb as f64).sqrt();
    Ok(cos.clamp(-1.0, 1.0))
}

/// Number of differing positions between two bipolar vectors.
pub fn hamming_distance(a: &Hypervector, b: &Hypervector) -> Result<usize> {
    check_same_dimension(a, b)?;
    if !a.is_bipolar() || !b.is_bipolar() {
        return Err(HdcError::invalid("hamming distance requires bipolar operands"));
    }
    Ok(a.components.iter().zip(&b.components).filter(|(x, y)| x != y).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(c: &[i32]) -> Hypervector {
        Hypervector::from_components(c.to_vec()).unwrap()
    }

    #[test]
    fn random_bipolar_is_bipolar_and_deterministic() {
        let a = random_bipolar(Seed(7), 2, 10_000).unwrap();
        let b = random_bipolar(Seed(7), 2, 10_000).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(Hypervector::is_bipolar));
        assert_eq!(a, b);
        let cos = cosine_similarity(&a[0], &a[1]).unwrap();
        assert!(cos.abs() < 0.05, "cos = {cos}");
    }

    #[test]
    fn random_bipolar_rejects_zero_sizes() {
        assert!(matches!(
            random_bipolar(Seed(1), 0, 10),
            Err(HdcError::InvalidArgument(_))
        ));
        assert!(matches!(
            random_bipolar(Seed(1), 1, 0),
            Err(HdcError::InvalidArgument(_))
        ));
    }

    #[test]
    fn bind_examples() {
        assert_eq!(
            bind(&hv(&[1, -1, 1, 1]), &hv(&[1, 1, -1, 1])).unwrap(),
            hv(&[1, -1, -1, 1])
        );
        let a = &random_bipolar(Seed(3), 1, 64).unwrap()[0];
        assert_eq!(bind(a, a).unwrap(), Hypervector::ones(64));
        assert!(matches!(
            bind(&hv(&[1, 1]), &hv(&[1])),
            Err(HdcError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn bundle_examples() {
        assert_eq!(bundle([&hv(&[1, -1]), &hv(&[1, 1])]).unwrap(), hv(&[2, 0]));
        let a = hv(&[1, -1, 1]);
        assert_eq!(bundle([&a]).unwrap(), a);
        assert!(matches!(
            bundle(std::iter::empty::<&Hypervector>()),
            Err(HdcError::InvalidArgument(_))
        ));
        assert!(bundle([&hv(&[1, 1]), &hv(&[1])]).is_err());
    }

    #[test]
    fn permute_is_right_rotation() {
        assert_eq!(permute(&hv(&[1, 2, 3, 4]), 1), hv(&[4, 1, 2, 3]));
        assert_eq!(permute(&hv(&[1, 2, 3, 4]), 4), hv(&[1, 2, 3, 4]));
        assert_eq!(permute(&hv(&[1, 2, 3, 4]), -1), hv(&[2, 3, 4, 1]));
        assert_eq!(permute(&hv(&[1, 2, 3, 4]), 9), hv(&[4, 1, 2, 3]));
    }

    #[test]
    fn cosine_examples() {
        let a = hv(&[1, 1, -1, -1]);
        assert_eq!(cosine_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&a, &a.negated()).unwrap(), -1.0);
        assert_eq!(cosine_similarity(&a, &hv(&[1, -1, 1, -1])).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&a, &Hypervector::zeros(4)),
            Err(HdcError::UndefinedSimilarity)
        ));
    }

    #[test]
    fn hamming_examples() {
        let a = &random_bipolar(Seed(11), 1, 10_000).unwrap()[0];
        assert_eq!(hamming_distance(a, a).unwrap(), 0);
        assert_eq!(hamming_distance(a, &a.negated()).unwrap(), 10_000);
        assert!(hamming_distance(&hv(&[2, 1]), &hv(&[1, 1])).is_err());
    }

    #[test]
    fn seed_derivation_is_stable_and_distinct() {
        let root = Seed(42);
        assert_eq!(root.derive(1), root.derive(1));
        assert_ne!(root.derive(1), root.derive(2));
        assert_ne!(root.derive(1), Seed(43).derive(1));
    }

    #[test]
    fn dot_handles_tails() {
        let a = hv(&(1..=13).collect::<Vec<_>>());
        let expected: i64 = (1..=13).map(|x: i64| x * x).sum();
        assert_eq!(a.dot(&a).unwrap(), expected);
    }
}
