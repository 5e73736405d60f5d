use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

use super::{read_maybe_gz, LabeledDataset};

const PIXELS: usize = 3 * 32 * 32;

/// Which CIFAR-100 label byte to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LabelGranularity {
    #[default]
    Fine,
    Coarse,
}

fn parse_records(
    path: &Path,
    bytes: &[u8],
    label_bytes: usize,
    label_slot: usize,
    num_classes: usize,
    pixels: &mut Vec<f64>,
    labels: &mut Vec<usize>,
) -> Result<()> {
    let record = label_bytes + PIXELS;
    if !bytes.len().is_multiple_of(record) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: (bytes.len() - bytes.len() % record) as u64,
            msg: format!("length {} is not a multiple of the {record}-byte record size", bytes.len()),
        });
    }
    for (i, rec) in bytes.chunks_exact(record).enumerate() {
        let label = rec[label_slot] as usize;
        if label >= num_classes {
            return Err(Error::Format {
                path: path.to_path_buf(),
                offset: (i * record + label_slot) as u64,
                msg: format!("label {label} outside 0..{num_classes}"),
            });
        }
        labels.push(label);
        pixels.extend(rec[label_bytes..].iter().map(|&p| f64::from(p) / 255.0));
    }
    Ok(())
}

/// Concatenates CIFAR-10 binary batches (3073-byte records).
pub fn load_cifar10<P: AsRef<Path>>(batch_paths: &[P]) -> Result<LabeledDataset> {
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for p in batch_paths {
        let bytes = read_maybe_gz(p.as_ref())?;
        parse_records(p.as_ref(), &bytes, 1, 0, 10, &mut pixels, &mut labels)?;
    }
    let n = labels.len();
    LabeledDataset::new("cifar10", Tensor::new(vec![n, 3, 32, 32], pixels)?, labels, 10)
}

/// Loads a CIFAR-100 binary file (3074-byte records: coarse, fine, pixels).
pub fn load_cifar100(path: impl AsRef<Path>, granularity: LabelGranularity) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let bytes = read_maybe_gz(path)?;
    let (slot, classes) = match granularity {
        LabelGranularity::Coarse => (0, 20),
        LabelGranularity::Fine => (1, 100),
    };
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    parse_records(path, &bytes, 2, slot, classes, &mut pixels, &mut labels)?;
    let n = labels.len();
    LabeledDataset::new("cifar100", Tensor::new(vec![n, 3, 32, 32], pixels)?, labels, classes)
}

/// Writes CIFAR-style records: each entry is (label bytes, 3072 pixel bytes).
pub fn write_cifar_records(path: impl AsRef<Path>, records: &[(Vec<u8>, Vec<u8>)]) -> Result<()> {
    let mut out = Vec::new();
    for (label, pix) in records {
        if pix.len() != PIXELS {
            return Err(Error::shape("cifar record pixels", &[PIXELS], &[pix.len()]));
        }
        out.extend_from_slice(label);
        out.extend_from_slice(pix);
    }
    std::fs::write(path.as_ref(), out).map_err(|e| Error::io(format!("writing {}", path.as_ref().display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cifar10_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.bin");
        let mut second = vec![0u8; PIXELS];
        second[1024] = 51; // first green-plane pixel
        write_cifar_records(&p, &[(vec![7], vec![255; PIXELS]), (vec![2], second)]).unwrap();
        let ds = load_cifar10(&[&p]).unwrap();
        assert_eq!(ds.inputs().shape(), &[2, 3, 32, 32]);
        assert_eq!(ds.labels(), &[7, 2]);
        assert!(ds.inputs().data()[..PIXELS].iter().all(|&v| v == 1.0));
        assert_eq!(ds.inputs().data()[PIXELS + 1024], 0.2);
    }

    #[test]
    fn cifar10_bad_length() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.bin");
        std::fs::write(&p, vec![0u8; 3073 + 10]).unwrap();
        assert!(matches!(load_cifar10(&[&p]), Err(Error::Format { offset: 3073, .. })));
    }

    #[test]
    fn cifar100_granularity() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bin");
        write_cifar_records(&p, &[(vec![3, 42], vec![0; PIXELS])]).unwrap();
        let fine = load_cifar100(&p, LabelGranularity::Fine).unwrap();
        let coarse = load_cifar100(&p, LabelGranularity::Coarse).unwrap();
        assert_eq!((fine.labels()[0], fine.num_classes()), (42, 100));
        assert_eq!((coarse.labels()[0], coarse.num_classes()), (3, 20));
    }

    #[test]
    fn cifar100_bad_length() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bin");
        std::fs::write(&p, vec![0u8; 3073]).unwrap();
        assert!(matches!(load_cifar100(&p, LabelGranularity::Fine), Err(Error::Format { .. })));
    }
}
