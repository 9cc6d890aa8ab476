//! In-memory datasets: stratified splitting and feature standardization.
//!
//! File parsing lives in the companion crate; this module only works on
//! flat row-major feature matrices and integer labels.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;

use crate::seed;

/// A train/validation split of one classification task.
///
/// Feature matrices are row-major with `n_features` columns. Labels are
/// class indices in `0..n_classes`.
#[derive(Clone, Debug)]
pub struct Dataset {
    /// Feature count per sample.
    pub n_features: usize,
    /// Number of classes.
    pub n_classes: usize,
    /// Training features, `n_train * n_features`.
    pub train_x: Vec<f64>,
    /// Training labels, `n_train`.
    pub train_y: Vec<usize>,
    /// Validation features, `n_val * n_features`.
    pub val_x: Vec<f64>,
    /// Validation labels, `n_val`.
    pub val_y: Vec<usize>,
}

impl Dataset {
    /// Number of training samples.
    pub fn n_train(&self) -> usize {
        self.train_y.len()
    }

    /// Number of validation samples.
    pub fn n_val(&self) -> usize {
        self.val_y.len()
    }

    /// Training sample `i` as a feature slice.
    pub fn train_row(&self, i: usize) -> &[f64] {
        &self.train_x[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Validation sample `i` as a feature slice.
    pub fn val_row(&self, i: usize) -> &[f64] {
        &self.val_x[i * self.n_features..(i + 1) * self.n_features]
    }
}

/// Errors from malformed inputs to splitting or standardization.
#[derive(Clone, Debug, PartialEq)]
pub enum DataError {
    /// Feature buffer is not `labels * n_features` long, or is empty.
    ShapeMismatch {
        /// Number of feature values provided.
        x_len: usize,
        /// Number of labels provided.
        y_len: usize,
        /// Declared feature count.
        n_features: usize,
    },
    /// A class in `0..n_classes` has fewer than two samples, so it cannot
    /// appear on both sides of the split.
    ClassTooSmall {
        /// The class index.
        class: usize,
        /// How many samples it has.
        count: usize,
    },
    /// `val_fraction` outside the open interval (0, 1).
    BadValFraction(f64),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::ShapeMismatch {
                x_len,
                y_len,
                n_features,
            } => write!(
                f,
                "feature buffer of {x_len} values does not match {y_len} labels x {n_features} features"
            ),
            DataError::ClassTooSmall { class, count } => write!(
                f,
                "class {class} has {count} sample(s); need at least 2 to split"
            ),
            DataError::BadValFraction(v) => {
                write!(f, "validation fraction must be in (0, 1), got {v}")
            }
        }
    }
}

impl core::error::Error for DataError {}

/// Splits samples into train and validation parts, stratified by class.
///
/// Each class contributes `round(count * val_fraction)` validation samples,
/// clamped to `1..=count-1` so both sides see every class. Which samples go
/// where is decided by one seeded shuffle per class, classes in ascending
/// label order; within each side the original sample order is preserved.
/// Labels must cover `0..=max(y)` with at least two samples each.
pub fn stratified_split(
    x: &[f64],
    y: &[usize],
    n_features: usize,
    val_fraction: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(DataError::BadValFraction(val_fraction));
    }
    if y.is_empty() || n_features == 0 || x.len() != y.len() * n_features {
        return Err(DataError::ShapeMismatch {
            x_len: x.len(),
            y_len: y.len(),
            n_features,
        });
    }
    let n_classes = y.iter().max().copied().unwrap_or(0) + 1;

    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_classes];
    for (i, &label) in y.iter().enumerate() {
        by_class[label].push(i);
    }

    let mut rng = seed::stream_rng(seed, &[seed::STREAM_SPLIT]);
    let mut is_val = alloc::vec![false; y.len()];
    for (class, members) in by_class.iter_mut().enumerate() {
        let count = members.len();
        if count < 2 {
            return Err(DataError::ClassTooSmall { class, count });
        }
        let rounded = round_half_up(count as f64 * val_fraction);
        let take = rounded.clamp(1, count - 1);
        members.shuffle(&mut rng);
        for &i in members.iter().take(take) {
            is_val[i] = true;
        }
    }

    let mut out = Dataset {
        n_features,
        n_classes,
        train_x: Vec::new(),
        train_y: Vec::new(),
        val_x: Vec::new(),
        val_y: Vec::new(),
    };
    for (i, &label) in y.iter().enumerate() {
        let row = &x[i * n_features..(i + 1) * n_features];
        if is_val[i] {
            out.val_x.extend_from_slice(row);
            out.val_y.push(label);
        } else {
            out.train_x.extend_from_slice(row);
            out.train_y.push(label);
        }
    }
    Ok(out)
}

fn round_half_up(v: f64) -> usize {
    // v is nonnegative here, so truncation after the shift rounds half up.
    (v + 0.5) as usize
}

/// Standardizes every feature to zero mean and unit variance, with the
/// statistics computed on the training rows only and applied to both sides.
///
/// `variance_floor` bounds the divisor away from zero: the scale for
/// feature j is `sqrt(max(var_j, variance_floor))`. With a floor of zero, a
/// feature that is exactly constant on the training rows is centered and
/// left unscaled. Variances are population variances (divide by n).
pub fn standardize(data: &mut Dataset, variance_floor: f64) {
    let d = data.n_features;
    let n = data.n_train();
    if n == 0 || d == 0 {
        return;
    }
    let mut mean = alloc::vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(data.train_row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut var = alloc::vec![0.0; d];
    for i in 0..n {
        for (j, v) in data.train_row(i).iter().enumerate() {
            let c = v - mean[j];
            var[j] += c * c;
        }
    }
    let mut scale = alloc::vec![1.0; d];
    for (s, v) in scale.iter_mut().zip(var.iter()) {
        let bounded = (v / n as f64).max(variance_floor);
        if bounded > 0.0 {
            *s = crate::fmath::sqrt(bounded);
        }
    }
    for (j, v) in data.train_x.iter_mut().enumerate() {
        *v = (*v - mean[j % d]) / scale[j % d];
    }
    for (j, v) in data.val_x.iter_mut().enumerate() {
        *v = (*v - mean[j % d]) / scale[j % d];
    }
}
