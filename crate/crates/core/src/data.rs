//! Sample containers: raw data matrices and label vectors.

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Raw dataset: `d` feature rows by `n` sample columns.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: Mat,
    feature_names: Option<Vec<String>>,
    sample_ids: Option<Vec<String>>,
}

impl DataMatrix {
    /// Validates finiteness and minimum shape (`n >= 2`, `d >= 1`).
    pub fn new(
        values: Mat,
        feature_names: Option<Vec<String>>,
        sample_ids: Option<Vec<String>>,
    ) -> Result<Self> {
        let (d, n) = (values.rows(), values.cols());
        if d < 1 || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "data matrix must have d >= 1 features and n >= 2 samples, got d={d}, n={n}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(
                "data matrix contains NaN or infinite entries".into(),
            ));
        }
        if let Some(names) = &feature_names {
            if names.len() != d {
                return Err(Error::LengthMismatch {
                    left: names.len(),
                    right: d,
                });
            }
        }
        if let Some(ids) = &sample_ids {
            if ids.len() != n {
                return Err(Error::LengthMismatch {
                    left: ids.len(),
                    right: n,
                });
            }
        }
        Ok(DataMatrix {
            values,
            feature_names,
            sample_ids,
        })
    }

    pub fn from_values(values: Mat) -> Result<Self> {
        Self::new(values, None, None)
    }

    /// Number of features.
    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.values.cols()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 2 by construction
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    /// Sample `j` as an owned column vector.
    pub fn sample(&self, j: usize) -> Vec<f64> {
        self.values.column(j)
    }

    /// Z-scores each feature row in place; constant features are left at
    /// zero offset from their mean.
    pub fn standardize(&mut self) {
        let n = self.len() as f64;
        for i in 0..self.dim() {
            let row = self.values.row_mut(i);
            let mean = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            for v in row.iter_mut() {
                *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
            }
        }
    }
}

/// Integer cluster/class labels for `n` samples, ids in `[0, n_classes)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    n_classes: usize,
}

impl LabelVector {
    /// Wraps raw labels; `n_classes` is inferred as `max + 1`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty label vector".into()));
        }
        let n_classes = labels.iter().max().copied().unwrap_or(0) + 1;
        Ok(LabelVector { labels, n_classes })
    }

    /// Wraps labels with an explicit class count (ids must stay in range).
    pub fn with_classes(labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if n_classes < 1 {
            return Err(Error::InvalidArgument("n_classes must be >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range [0, {n_classes})"
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidArgument("empty label vector".into()));
        }
        Ok(LabelVector { labels, n_classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    /// Sample indices grouped by label id.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }
}
