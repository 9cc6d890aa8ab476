//! Dataset loading: checksum-verified CSV files for the four small tasks,
//! IDX files for MNIST, and the standardized train/validation split the
//! engine consumes.
//!
//! Every file read here must appear in `datasets.sha256` inside the data
//! directory (standard `sha256sum` format). The four CSV files ship with
//! the repository; MNIST is optional, lives under an `mnist/` subdirectory,
//! and needs its digests appended to the manifest once downloaded.

use std::path::Path;

use anyhow::{bail, Context, Result};
use qpareto_core::data::{standardize, stratified_split, Dataset};
use sha2::{Digest, Sha256};

/// Validation share used for the CSV datasets.
const VAL_FRACTION: f64 = 0.2;
/// Variance floor applied to MNIST features, many of which are constant
/// zero-ink pixels on the training set.
const MNIST_VARIANCE_FLOOR: f64 = 1e-3;

/// Static shape of a supported dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetInfo {
    /// Canonical name, as given on the command line.
    pub name: &'static str,
    /// Feature count.
    pub n_features: usize,
    /// Class count.
    pub n_classes: usize,
    /// Total sample count (train + validation).
    pub n_samples: usize,
}

/// Every dataset the tool knows, with its expected shape.
pub const DATASETS: [DatasetInfo; 5] = [
    DatasetInfo {
        name: "iris",
        n_features: 4,
        n_classes: 3,
        n_samples: 150,
    },
    DatasetInfo {
        name: "wine",
        n_features: 13,
        n_classes: 3,
        n_samples: 178,
    },
    DatasetInfo {
        name: "breast_cancer",
        n_features: 30,
        n_classes: 2,
        n_samples: 569,
    },
    DatasetInfo {
        name: "digits",
        n_features: 64,
        n_classes: 10,
        n_samples: 1797,
    },
    DatasetInfo {
        name: "mnist",
        n_features: 784,
        n_classes: 10,
        n_samples: 70_000,
    },
];

/// Looks a dataset up by name.
pub fn dataset_info(name: &str) -> Result<DatasetInfo> {
    DATASETS
        .iter()
        .find(|d| d.name == name)
        .copied()
        .with_context(|| {
            let known: Vec<&str> = DATASETS.iter().map(|d| d.name).collect();
            format!(
                "unknown dataset {name:?}; known datasets: {}",
                known.join(", ")
            )
        })
}

/// Loads, verifies, splits, and standardizes a dataset.
///
/// The split and all downstream statistics depend only on `seed` and the
/// file contents, so two runs with equal seeds see byte-identical data.
pub fn load_dataset(name: &str, data_dir: &Path, seed: u64) -> Result<Dataset> {
    let info = dataset_info(name)?;
    if info.name == "mnist" {
        return load_mnist(data_dir);
    }
    let bytes = verified_bytes(data_dir, &format!("{}.csv", info.name))?;
    let (x, y) =
        parse_feature_csv(&bytes, &info).with_context(|| format!("parsing {}.csv", info.name))?;
    let mut data = stratified_split(&x, &y, info.n_features, VAL_FRACTION, seed)?;
    standardize(&mut data, 0.0);
    Ok(data)
}

/// Reads a file and checks it against the manifest in the same data
/// directory. `rel_name` is the path relative to the data directory, which
/// must match the manifest entry exactly.
fn verified_bytes(data_dir: &Path, rel_name: &str) -> Result<Vec<u8>> {
    let manifest_path = data_dir.join("datasets.sha256");
    let manifest = std::fs::read_to_string(&manifest_path).with_context(|| {
        format!(
            "reading checksum manifest {}; data files cannot be trusted without it",
            manifest_path.display()
        )
    })?;
    let mut expected = None;
    for line in manifest.lines() {
        let mut parts = line.split_whitespace();
        if let (Some(digest), Some(file)) = (parts.next(), parts.next()) {
            if file == rel_name {
                expected = Some(digest.to_ascii_lowercase());
                break;
            }
        }
    }
    let Some(expected) = expected else {
        bail!(
            "{} has no entry for {rel_name}; add one with `sha256sum`",
            manifest_path.display()
        );
    };

    let path = data_dir.join(rel_name);
    let bytes =
        std::fs::read(&path).with_context(|| format!("reading data file {}", path.display()))?;
    let actual: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    if actual != expected {
        bail!(
            "checksum mismatch for {}: manifest says {expected}, file hashes to {actual}",
            path.display()
        );
    }
    Ok(bytes)
}

/// Parses a feature CSV: a header row, feature columns, and a final integer
/// `label` column. Shape and label range are checked against `info`.
fn parse_feature_csv(bytes: &[u8], info: &DatasetInfo) -> Result<(Vec<f64>, Vec<usize>)> {
    let text = std::str::from_utf8(bytes).context("file is not UTF-8")?;
    let mut lines = text.lines();
    let header = lines.next().context("file is empty")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() != info.n_features + 1 {
        bail!(
            "header has {} columns, expected {} features plus a label",
            columns.len(),
            info.n_features
        );
    }
    if columns.last() != Some(&"label") {
        bail!("last column must be `label`, found {:?}", columns.last());
    }

    let mut x = Vec::with_capacity(info.n_samples * info.n_features);
    let mut y = Vec::with_capacity(info.n_samples);
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            bail!(
                "row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                columns.len()
            );
        }
        for f in &fields[..fields.len() - 1] {
            let v: f64 = f
                .parse()
                .with_context(|| format!("row {}: bad number {f:?}", lineno + 2))?;
            x.push(v);
        }
        let label: usize = fields[fields.len() - 1]
            .parse()
            .with_context(|| format!("row {}: bad label", lineno + 2))?;
        if label >= info.n_classes {
            bail!(
                "row {}: label {label} out of range for {} classes",
                lineno + 2,
                info.n_classes
            );
        }
        y.push(label);
    }
    if y.len() != info.n_samples {
        bail!("found {} samples, expected {}", y.len(), info.n_samples);
    }
    Ok((x, y))
}

/// Big-endian u32 reader for the IDX header words.
fn read_be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    let slice = bytes
        .get(at..at + 4)
        .context("file truncated inside the header")?;
    Ok(u32::from_be_bytes(slice.try_into().unwrap()))
}

/// Parses an IDX image file (magic 0x00000803) into row-major pixel rows
/// scaled to [0, 1].
fn parse_idx_images(bytes: &[u8], rel_name: &str) -> Result<(usize, usize, Vec<f64>)> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != 0x0000_0803 {
        bail!("{rel_name}: bad magic {magic:#010x}, expected 0x00000803 (u8 images, 3 dims)");
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let rows = read_be_u32(bytes, 8)? as usize;
    let cols = read_be_u32(bytes, 12)? as usize;
    let pixels = count * rows * cols;
    let data = bytes
        .get(16..16 + pixels)
        .with_context(|| format!("{rel_name}: truncated image data"))?;
    if bytes.len() != 16 + pixels {
        bail!("{rel_name}: {} trailing bytes", bytes.len() - 16 - pixels);
    }
    let x = data.iter().map(|&b| b as f64 / 255.0).collect();
    Ok((count, rows * cols, x))
}

/// Parses an IDX label file (magic 0x00000801).
fn parse_idx_labels(bytes: &[u8], rel_name: &str, n_classes: usize) -> Result<Vec<usize>> {
    let magic = read_be_u32(bytes, 0)?;
    if magic != 0x0000_0801 {
        bail!("{rel_name}: bad magic {magic:#010x}, expected 0x00000801 (u8 labels, 1 dim)");
    }
    let count = read_be_u32(bytes, 4)? as usize;
    let data = bytes
        .get(8..8 + count)
        .with_context(|| format!("{rel_name}: truncated label data"))?;
    if bytes.len() != 8 + count {
        bail!("{rel_name}: {} trailing bytes", bytes.len() - 8 - count);
    }
    let labels: Vec<usize> = data.iter().map(|&b| b as usize).collect();
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        bail!("{rel_name}: label {bad} out of range for {n_classes} classes");
    }
    Ok(labels)
}

/// Loads the four MNIST IDX files from `data_dir/mnist/`, using the
/// provided train/test split as the train/validation split.
fn load_mnist(data_dir: &Path) -> Result<Dataset> {
    let info = dataset_info("mnist").expect("registered");
    let load_images = |rel: &str| -> Result<(usize, usize, Vec<f64>)> {
        parse_idx_images(&verified_bytes(data_dir, rel)?, rel)
    };
    let load_labels = |rel: &str| -> Result<Vec<usize>> {
        parse_idx_labels(&verified_bytes(data_dir, rel)?, rel, info.n_classes)
    };

    let (n_train, d_train, train_x) = load_images("mnist/train-images-idx3-ubyte")?;
    let train_y = load_labels("mnist/train-labels-idx1-ubyte")?;
    let (n_val, d_val, val_x) = load_images("mnist/t10k-images-idx3-ubyte")?;
    let val_y = load_labels("mnist/t10k-labels-idx1-ubyte")?;

    if d_train != info.n_features || d_val != info.n_features {
        bail!(
            "mnist images are {d_train}/{d_val} pixels, expected {}",
            info.n_features
        );
    }
    if train_y.len() != n_train || val_y.len() != n_val {
        bail!(
            "mnist image/label counts disagree: {n_train}/{} train, {n_val}/{} test",
            train_y.len(),
            val_y.len()
        );
    }

    let mut data = Dataset {
        n_features: info.n_features,
        n_classes: info.n_classes,
        train_x,
        train_y,
        val_x,
        val_y,
    };
    standardize(&mut data, MNIST_VARIANCE_FLOOR);
    Ok(data)
}
