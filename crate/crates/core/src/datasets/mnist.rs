use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Tensor;

use super::{read_maybe_gz, LabeledDataset};

const IMAGES_MAGIC: u32 = 2051;
const LABELS_MAGIC: u32 = 2049;

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            offset: bytes.len() as u64,
            msg: "truncated header".into(),
        })
}

fn expect_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            msg: format!("bad IDX magic {magic}, expected {expected}"),
        });
    }
    Ok(())
}

fn payload<'a>(bytes: &'a [u8], start: usize, len: usize, path: &Path) -> Result<&'a [u8]> {
    bytes.get(start..start + len).ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        offset: bytes.len() as u64,
        msg: format!("truncated payload: need {} bytes", start + len),
    })
}

/// Loads an IDX image/label pair (raw or gzip-compressed) as a 10-class dataset.
pub fn load_mnist(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = read_maybe_gz(ip)?;
    let labels = read_maybe_gz(lp)?;

    expect_magic(&images, IMAGES_MAGIC, ip)?;
    let n = be_u32(&images, 4, ip)? as usize;
    let rows = be_u32(&images, 8, ip)? as usize;
    let cols = be_u32(&images, 12, ip)? as usize;
    let pixels = payload(&images, 16, n * rows * cols, ip)?;

    expect_magic(&labels, LABELS_MAGIC, lp)?;
    let nl = be_u32(&labels, 4, lp)? as usize;
    if nl != n {
        return Err(Error::Format {
            path: lp.to_path_buf(),
            offset: 4,
            msg: format!("label count {nl} differs from image count {n}"),
        });
    }
    let label_bytes = payload(&labels, 8, n, lp)?;
    if let Some(pos) = label_bytes.iter().position(|&l| l > 9) {
        return Err(Error::Format {
            path: lp.to_path_buf(),
            offset: 8 + pos as u64,
            msg: format!("label {} outside 0..=9", label_bytes[pos]),
        });
    }

    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let inputs = Tensor::new(vec![n, 1, rows, cols], data)?;
    LabeledDataset::new("mnist", inputs, label_bytes.iter().map(|&l| l as usize).collect(), 10)
}

/// Writes an uncompressed IDX3 image file.
pub fn write_idx_images(path: impl AsRef<Path>, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let n = pixels.len() / (rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IMAGES_MAGIC, n as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    std::fs::write(path.as_ref(), out).map_err(|e| Error::io(format!("writing {}", path.as_ref().display()), e))
}

/// Writes an uncompressed IDX1 label file.
pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    std::fs::write(path.as_ref(), out).map_err(|e| Error::io(format!("writing {}", path.as_ref().display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<u8> = (0..2 * 3 * 4).map(|i| (i * 10) as u8).collect();
        write_idx_images(dir.path().join("img"), 3, 4, &pixels).unwrap();
        write_idx_labels(dir.path().join("lbl"), &[7, 2]).unwrap();
        let ds = load_mnist(dir.path().join("img"), dir.path().join("lbl")).unwrap();
        assert_eq!(ds.inputs().shape(), &[2, 1, 3, 4]);
        assert_eq!(ds.labels(), &[7, 2]);
        for (v, p) in ds.inputs().data().iter().zip(&pixels) {
            assert_eq!(*v, f64::from(*p) / 255.0);
        }
    }

    #[test]
    fn gzip_input_accepted() {
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        write_idx_images(dir.path().join("img"), 2, 2, &[0, 255, 128, 1]).unwrap();
        write_idx_labels(dir.path().join("lbl"), &[3]).unwrap();
        let raw = std::fs::read(dir.path().join("img")).unwrap();
        let mut gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        gz.write_all(&raw).unwrap();
        std::fs::write(dir.path().join("img.gz"), gz.finish().unwrap()).unwrap();
        let ds = load_mnist(dir.path().join("img.gz"), dir.path().join("lbl")).unwrap();
        assert_eq!(ds.inputs().data()[1], 1.0);
    }

    #[test]
    fn bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        write_idx_labels(dir.path().join("lbl"), &[1]).unwrap();
        // a label file where an image file is expected
        let err = load_mnist(dir.path().join("lbl"), dir.path().join("lbl")).unwrap_err();
        assert!(matches!(err, Error::Format { offset: 0, .. }), "{err}");
    }

    #[test]
    fn truncated_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        write_idx_images(dir.path().join("img"), 2, 2, &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        write_idx_labels(dir.path().join("lbl"), &[1, 2]).unwrap();
        let mut raw = std::fs::read(dir.path().join("img")).unwrap();
        raw.truncate(20);
        std::fs::write(dir.path().join("img"), &raw).unwrap();
        match load_mnist(dir.path().join("img"), dir.path().join("lbl")) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 20),
            other => panic!("unexpected {other:?}"),
        }
    }
}
