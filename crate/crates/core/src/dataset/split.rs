use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};

fn train_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n - 1)
}

/// Seeded shuffle-and-split into `(train, test)`.
///
/// Both sides are nonempty. In stratified mode each class contributes
/// `round(fraction · n_c)` instances to train (at least one, and leaving at
/// least one for test), so every class needs two or more instances.
pub fn split(
    dataset: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::OutOfRange {
            name: "train fraction",
            value: train_fraction,
        });
    }
    let n = dataset.n();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("cannot split {n} instance(s)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = if stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.k()];
        for (i, &c) in dataset.y().iter().enumerate() {
            by_class[c].push(i);
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (class, mut members) in by_class.into_iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            if members.len() < 2 {
                return Err(Error::InvalidConfig(format!(
                    "class {:?} has a single instance; stratification needs two",
                    dataset.class_names()[class]
                )));
            }
            members.shuffle(&mut rng);
            let cut = train_size(members.len(), train_fraction);
            train.extend_from_slice(&members[..cut]);
            test.extend_from_slice(&members[cut..]);
        }
        (train, test)
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let test = order.split_off(train_size(n, train_fraction));
        (order, test)
    };
    if stratified {
        train.shuffle(&mut rng);
        test.shuffle(&mut rng);
    }
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn indexed(n: usize, k: usize) -> LabeledDataset {
        let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        LabeledDataset::new(x, (0..n).map(|i| i % k).collect(), LabeledDataset::numbered_classes(k)).unwrap()
    }

    fn ids(ds: &LabeledDataset) -> Vec<usize> {
        ds.x().column(0).iter().map(|&v| v as usize).collect()
    }

    #[test]
    fn conventional_letter_split() {
        let (train, test) = split(&indexed(20_000, 26), 0.8, 1, false).unwrap();
        assert_eq!((train.n(), test.n()), (16_000, 4_000));
    }

    #[test]
    fn exact_partition_and_determinism() {
        let ds = indexed(101, 3);
        for stratified in [false, true] {
            let (a, b) = split(&ds, 0.7, 9, stratified).unwrap();
            let mut all: Vec<usize> = ids(&a).into_iter().chain(ids(&b)).collect();
            all.sort_unstable();
            assert_eq!(all, (0..101).collect::<Vec<_>>());
            let (a2, b2) = split(&ds, 0.7, 9, stratified).unwrap();
            assert_eq!((a, b), (a2, b2));
        }
    }

    #[test]
    fn stratified_proportions() {
        let ds = indexed(26 * 50, 26);
        let (train, _) = split(&ds, 0.8, 3, true).unwrap();
        for count in train.class_counts() {
            assert!((39..=41).contains(&count), "{count}");
        }
    }

    #[test]
    fn errors() {
        let ds = indexed(10, 2);
        assert!(split(&ds, 0.0, 1, false).is_err());
        assert!(split(&ds, 1.0, 1, false).is_err());
        let lonely = indexed(3, 3);
        assert!(split(&lonely, 0.5, 1, true).is_err());
    }
}
