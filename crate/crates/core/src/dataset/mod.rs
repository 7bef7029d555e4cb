//! Labeled datasets: CSV loading, synthetic generators, splitting, scaling.

mod csv;
mod split;
mod synth;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

pub use self::csv::{load_csv, read_csv, write_csv, CsvOptions, LabelColumn};
pub use self::split::split;
pub use self::synth::{
    gen_synthetic, Independence, KOfNDisjunction, PlantedAssociation, PrototypeClasses, SeparableBlobs,
    SyntheticKind,
};

/// An n×d feature matrix with one class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    x: Array2<f64>,
    y: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(x: Array2<f64>, y: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if x.ncols() == 0 && x.nrows() > 0 {
            return Err(Error::InvalidConfig("dataset rows have no features".into()));
        }
        let k = class_names.len();
        if let Some(&bad) = y.iter().find(|&&c| c >= k) {
            return Err(Error::ClassOutOfRange { index: bad, k });
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = class_names.iter().find(|name| !seen.insert(name.as_str())) {
            return Err(Error::InvalidConfig(format!("duplicate class name {dup:?}")));
        }
        Ok(Self { x, y, class_names })
    }

    /// Class names `"0"`, `"1"`, … for generated data.
    pub fn numbered_classes(k: usize) -> Vec<String> {
        (0..k).map(|c| c.to_string()).collect()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn k(&self) -> usize {
        self.class_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    pub fn rows(&self) -> impl Iterator<Item = (ArrayView1<'_, f64>, usize)> + '_ {
        self.x.outer_iter().zip(self.y.iter().copied())
    }

    /// Instances per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Rows `indices`, in that order, with the same class vocabulary.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// True when every feature value is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.first_non_binary().is_none()
    }

    /// First `(instance, feature, value)` that is neither 0 nor 1.
    pub fn first_non_binary(&self) -> Option<(usize, usize, f64)> {
        self.x
            .indexed_iter()
            .find(|(_, &v)| v != 0.0 && v != 1.0)
            .map(|((i, j), &v)| (i, j, v))
    }

    pub fn require_binary(&self) -> Result<()> {
        match self.first_non_binary() {
            None => Ok(()),
            Some((instance, feature, value)) => Err(Error::NonBinaryFeature {
                instance,
                feature,
                value,
            }),
        }
    }
}

/// Maps every column affinely onto [0, 1]; constant columns become 0.
pub fn scale_minmax(dataset: &LabeledDataset) -> LabeledDataset {
    let mut x = dataset.x.clone();
    for mut column in x.columns_mut() {
        let (lo, hi) = column
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let range = hi - lo;
        if range > 0.0 {
            column.mapv_inplace(|v| (v - lo) / range);
        } else {
            column.fill(0.0);
        }
    }
    LabeledDataset {
        x,
        y: dataset.y.clone(),
        class_names: dataset.class_names.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn scaling_examples() {
        let x = Array2::from_shape_fn((16, 2), |(i, j)| if j == 0 { i as f64 } else { 7.0 });
        let ds = LabeledDataset::new(x, vec![0; 16], vec!["a".into()]).unwrap();
        let scaled = scale_minmax(&ds);
        assert_eq!(scaled.x()[[0, 0]], 0.0);
        assert_eq!(scaled.x()[[15, 0]], 1.0);
        assert_eq!(scaled.x()[[5, 0]], 5.0 / 15.0);
        assert!(scaled.x().column(1).iter().all(|&v| v == 0.0));
        assert_eq!(scale_minmax(&scaled), scaled);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(LabeledDataset::new(array![[1.0]], vec![1], vec!["a".into()]).is_err());
        assert!(LabeledDataset::new(array![[1.0]], vec![0, 0], vec!["a".into()]).is_err());
        assert!(LabeledDataset::new(array![[1.0]], vec![0], vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn binary_detection() {
        let ds = LabeledDataset::new(array![[0.0, 1.0], [1.0, 0.5]], vec![0, 1], LabeledDataset::numbered_classes(2))
            .unwrap();
        assert_eq!(ds.first_non_binary(), Some((1, 1, 0.5)));
        assert!(matches!(ds.require_binary(), Err(Error::NonBinaryFeature { instance: 1, .. })));
    }
}
