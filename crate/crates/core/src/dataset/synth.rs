//! Seeded generators for datasets with known structure.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Two classes in `d` dimensions separated by a random affine hyperplane.
/// Every point lies at least `margin` from the hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableBlobs {
    pub n: usize,
    pub d: usize,
    pub margin: f64,
}

/// Binary attributes, each active with probability `p_active`; the label is
/// the OR of attributes `0..relevant`.
#[derive(Debug, Clone, PartialEq)]
pub struct KOfNDisjunction {
    pub n: usize,
    pub attributes: usize,
    pub relevant: usize,
    pub p_active: f64,
}

/// `k` equiprobable classes, each owning `features_per_class` binary
/// features. A feature is active with probability `p_hit` when its owner is
/// the instance's class and `p_miss` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedAssociation {
    pub n: usize,
    pub k: usize,
    pub features_per_class: usize,
    pub p_hit: f64,
    pub p_miss: f64,
}

impl PlantedAssociation {
    /// Owner class of feature `j`.
    pub fn owner(&self, feature: usize) -> usize {
        feature / self.features_per_class
    }

    /// Population ΔP′ of a feature against its owner class, treating the
    /// class as the real variable: `P(f | c) − P(f | ¬c)`.
    pub fn population_delta_p_prime(&self) -> f64 {
        self.p_hit - self.p_miss
    }

    /// Population ΔP of a feature predicting its owner class:
    /// `P(c | f) − P(c | ¬f)`.
    pub fn population_delta_p(&self) -> f64 {
        let prior = 1.0 / self.k as f64;
        let active = prior * self.p_hit + (1.0 - prior) * self.p_miss;
        let given_active = prior * self.p_hit / active;
        let given_inactive = prior * (1.0 - self.p_hit) / (1.0 - active);
        given_active - given_inactive
    }
}

/// Binary features drawn independently of uniformly random labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Independence {
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

/// Balanced classes scattered around random integer-grid prototypes.
///
/// Features are rounded, clipped draws from `N(prototype, spread²)` on
/// `0..=levels-1`. With `k = 26`, `d = 16`, `levels = 16` this has the shape
/// of the UCI letter-recognition data and stands in for it when the file is
/// unavailable.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeClasses {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub levels: u32,
    pub spread: f64,
}

impl PrototypeClasses {
    pub fn letter_surrogate() -> Self {
        Self {
            n: 20_000,
            k: 26,
            d: 16,
            levels: 16,
            spread: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticKind {
    SeparableBlobs(SeparableBlobs),
    KOfNDisjunction(KOfNDisjunction),
    PlantedAssociation(PlantedAssociation),
    Independence(Independence),
    PrototypeClasses(PrototypeClasses),
}

fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidConfig(message.into())
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a probability, got {p}")))
    }
}

pub fn gen_synthetic(kind: &SyntheticKind, seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SyntheticKind::SeparableBlobs(p) => separable_blobs(p, &mut rng),
        SyntheticKind::KOfNDisjunction(p) => disjunction(p, &mut rng),
        SyntheticKind::PlantedAssociation(p) => planted(p, &mut rng),
        SyntheticKind::Independence(p) => independence(p, &mut rng),
        SyntheticKind::PrototypeClasses(p) => prototypes(p, &mut rng),
    }
}

fn separable_blobs(p: &SeparableBlobs, rng: &mut ChaCha8Rng) -> Result<LabeledDataset> {
    if p.n == 0 || p.d == 0 {
        return Err(invalid("separable_blobs needs n > 0 and d > 0"));
    }
    const HALF_WIDTH: f64 = 5.0;
    if !(p.margin >= 0.0 && p.margin < HALF_WIDTH / 2.0) {
        return Err(invalid(format!("margin {} outside [0, {})", p.margin, HALF_WIDTH / 2.0)));
    }
    let mut normal: Vec<f64> = (0..p.d).map(|_| StandardNormal.sample(rng)).collect();
    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
    normal.iter_mut().for_each(|v| *v /= norm);
    let offset = rng.random_range(-1.0..1.0);

    let mut x = Array2::zeros((p.n, p.d));
    let mut y = Vec::with_capacity(p.n);
    let mut point = vec![0.0; p.d];
    for i in 0..p.n {
        // Alternate target sides so both classes are populated.
        let want_positive = i % 2 == 0;
        let signed = loop {
            point.iter_mut().for_each(|v| *v = rng.random_range(-HALF_WIDTH..HALF_WIDTH));
            let s: f64 = point.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>() + offset;
            if s.abs() >= p.margin && (s > 0.0) == want_positive {
                break s;
            }
        };
        x.row_mut(i).iter_mut().zip(&point).for_each(|(dst, &v)| *dst = v);
        y.push(usize::from(signed > 0.0));
    }
    LabeledDataset::new(x, y, LabeledDataset::numbered_classes(2))
}

fn disjunction(p: &KOfNDisjunction, rng: &mut ChaCha8Rng) -> Result<LabeledDataset> {
    if p.n == 0 || p.relevant == 0 || p.relevant > p.attributes {
        return Err(invalid("k_of_n_disjunction needs n > 0 and 0 < relevant <= attributes"));
    }
    probability("p_active", p.p_active)?;
    let mut x = Array2::zeros((p.n, p.attributes));
    let mut y = Vec::with_capacity(p.n);
    for i in 0..p.n {
        for j in 0..p.attributes {
            if rng.random_bool(p.p_active) {
                x[[i, j]] = 1.0;
            }
        }
        let label = (0..p.relevant).any(|j| x[[i, j]] == 1.0);
        y.push(usize::from(label));
    }
    LabeledDataset::new(x, y, LabeledDataset::numbered_classes(2))
}

fn planted(p: &PlantedAssociation, rng: &mut ChaCha8Rng) -> Result<LabeledDataset> {
    if p.n == 0 || p.k < 2 || p.features_per_class == 0 {
        return Err(invalid("planted_association needs n > 0, k >= 2, features_per_class > 0"));
    }
    probability("p_hit", p.p_hit)?;
    probability("p_miss", p.p_miss)?;
    let d = p.k * p.features_per_class;
    let mut x = Array2::zeros((p.n, d));
    let mut y = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let class = rng.random_range(0..p.k);
        for j in 0..d {
            let rate = if p.owner(j) == class { p.p_hit } else { p.p_miss };
            if rng.random_bool(rate) {
                x[[i, j]] = 1.0;
            }
        }
        y.push(class);
    }
    LabeledDataset::new(x, y, LabeledDataset::numbered_classes(p.k))
}

fn independence(p: &Independence, rng: &mut ChaCha8Rng) -> Result<LabeledDataset> {
    if p.n == 0 || p.k < 2 || p.d == 0 {
        return Err(invalid("independence needs n > 0, k >= 2, d > 0"));
    }
    let x = Array2::from_shape_fn((p.n, p.d), |_| f64::from(u8::from(rng.random_bool(0.5))));
    let y = (0..p.n).map(|_| rng.random_range(0..p.k)).collect();
    LabeledDataset::new(x, y, LabeledDataset::numbered_classes(p.k))
}

fn prototypes(p: &PrototypeClasses, rng: &mut ChaCha8Rng) -> Result<LabeledDataset> {
    if p.n == 0 || p.k < 2 || p.d == 0 || p.levels < 2 {
        return Err(invalid("prototype_classes needs n > 0, k >= 2, d > 0, levels >= 2"));
    }
    if !(p.spread > 0.0 && p.spread.is_finite()) {
        return Err(invalid(format!("spread must be positive, got {}", p.spread)));
    }
    let top = f64::from(p.levels - 1);
    let centres = Array2::from_shape_fn((p.k, p.d), |_| rng.random_range(0.15 * top..0.85 * top));
    let noise = Normal::new(0.0, p.spread).expect("positive spread");

    let mut y: Vec<usize> = (0..p.n).map(|i| i % p.k).collect();
    y.shuffle(rng);
    let mut x = Array2::zeros((p.n, p.d));
    for (i, &class) in y.iter().enumerate() {
        for j in 0..p.d {
            let v: f64 = centres[[class, j]] + noise.sample(rng);
            x[[i, j]] = v.round().clamp(0.0, top);
        }
    }
    let names = if p.k <= 26 {
        (0..p.k).map(|c| char::from(b'A' + c as u8).to_string()).collect()
    } else {
        LabeledDataset::numbered_classes(p.k)
    };
    LabeledDataset::new(x, y, names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_respect_margin() {
        let kind = SyntheticKind::SeparableBlobs(SeparableBlobs {
            n: 200,
            d: 2,
            margin: 1.0,
        });
        let ds = gen_synthetic(&kind, 4).unwrap();
        assert_eq!(ds.n(), 200);
        assert_eq!(ds.class_counts(), [100, 100]);
        assert_eq!(ds, gen_synthetic(&kind, 4).unwrap());
    }

    #[test]
    fn disjunction_labels() {
        let p = KOfNDisjunction {
            n: 500,
            attributes: 100,
            relevant: 3,
            p_active: 0.1,
        };
        let ds = gen_synthetic(&SyntheticKind::KOfNDisjunction(p), 1).unwrap();
        assert!(ds.is_binary());
        for (row, label) in ds.rows() {
            let expected = row[0] == 1.0 || row[1] == 1.0 || row[2] == 1.0;
            assert_eq!(label == 1, expected);
        }
    }

    #[test]
    fn planted_closed_form() {
        let p = PlantedAssociation {
            n: 1,
            k: 2,
            features_per_class: 1,
            p_hit: 0.9,
            p_miss: 0.1,
        };
        assert!((p.population_delta_p_prime() - 0.8).abs() < 1e-15);
        // symmetric two-class case: ΔP = ΔP′
        assert!((p.population_delta_p() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn prototype_shape() {
        let p = PrototypeClasses {
            n: 260,
            ..PrototypeClasses::letter_surrogate()
        };
        let ds = gen_synthetic(&SyntheticKind::PrototypeClasses(p), 2).unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (260, 16, 26));
        assert!(ds.class_counts().iter().all(|&c| c == 10));
        assert!(ds.x().iter().all(|&v| (0.0..=15.0).contains(&v) && v.fract() == 0.0));
        assert_eq!(ds.class_names()[25], "Z");
    }

    #[test]
    fn invalid_params() {
        let bad = SyntheticKind::PlantedAssociation(PlantedAssociation {
            n: 10,
            k: 2,
            features_per_class: 1,
            p_hit: 1.5,
            p_miss: 0.1,
        });
        assert!(gen_synthetic(&bad, 0).is_err());
        let bad = SyntheticKind::Independence(Independence { n: 10, k: 1, d: 2 });
        assert!(gen_synthetic(&bad, 0).is_err());
    }
}
