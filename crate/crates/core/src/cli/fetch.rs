//! Dataset download with SHA-256 verification.
//!
//! Archives are kept under `<dir>/downloads/`; a present archive with a valid
//! checksum is never fetched again. Unpacked files land where the manifests
//! look for them (`<dir>/mnist/`, `<dir>/cifar-10-batches-bin/`,
//! `<dir>/cifar-100-binary/`).

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetId {
    Mnist,
    Cifar10,
    Cifar100,
}

impl std::str::FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<DatasetId> {
        match s {
            "mnist" => Ok(DatasetId::Mnist),
            "cifar10" => Ok(DatasetId::Cifar10),
            "cifar100" => Ok(DatasetId::Cifar100),
            other => Err(Error::Usage(format!("unknown dataset '{other}' (expected mnist, cifar10 or cifar100)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteFile {
    pub url: String,
    pub file_name: String,
    pub sha256: String,
}

fn remote(url: &str, sha256: &str) -> RemoteFile {
    RemoteFile {
        url: url.to_string(),
        file_name: url.rsplit('/').next().expect("url has a path").to_string(),
        sha256: sha256.to_string(),
    }
}

const MNIST_BASE: &str = "https://storage.googleapis.com/cvdf-datasets/mnist";

pub fn remote_files(id: DatasetId) -> Vec<RemoteFile> {
    match id {
        DatasetId::Mnist => [
            ("train-images-idx3-ubyte.gz", "440fcabf73cc546fa21475e81ea370265605f56be210a4024d2ca8f203523609"),
            ("train-labels-idx1-ubyte.gz", "3552534a0a558bbed6aed32b30c495cca23d567ec52cac8be1a0730e8010255c"),
            ("t10k-images-idx3-ubyte.gz", "8d422c7b0a1c1c79245a5bcf07fe86e33eeafee792b84584aec276f5a2dbc4e6"),
            ("t10k-labels-idx1-ubyte.gz", "f7ae60f92e00ec6debd23a6088c31dbd2371eca3ffa0defaefb259924204aec6"),
        ]
        .iter()
        .map(|(f, h)| remote(&format!("{MNIST_BASE}/{f}"), h))
        .collect(),
        DatasetId::Cifar10 => vec![remote(
            "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
            "c4a38c50a1bc5f3a1c5537f2155ab9d68f9f25eb1ed8d9ddda3db29a59bca1dd",
        )],
        DatasetId::Cifar100 => vec![remote(
            "https://www.cs.toronto.edu/~kriz/cifar-100-binary.tar.gz",
            "58a81ae192c23a4be8b1804d68e518ed807d710a4eb253b1f2a199162a40d8ec",
        )],
    }
}

pub trait Downloader {
    /// Writes the body at `url` to `dest`.
    fn fetch(&self, url: &str, dest: &Path) -> Result<()>;
}

pub struct HttpDownloader;

impl Downloader for HttpDownloader {
    fn fetch(&self, url: &str, dest: &Path) -> Result<()> {
        let download = |msg: String| Error::Download { url: url.to_string(), msg };
        let resp = ureq::get(url).call().map_err(|e| download(e.to_string()))?;
        let mut reader = resp.into_body().into_reader();
        let mut out = std::fs::File::create(dest).map_err(|e| Error::io(format!("creating {}", dest.display()), e))?;
        std::io::copy(&mut reader, &mut out).map_err(|e| download(e.to_string()))?;
        out.flush().map_err(|e| Error::io(format!("writing {}", dest.display()), e))
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchReport {
    pub downloaded: Vec<PathBuf>,
    pub reused: Vec<PathBuf>,
}

/// Ensures every file is present in `dir` with its checksum. A mismatching
/// download is deleted and reported as [`Error::Checksum`].
pub fn fetch_files(files: &[RemoteFile], dir: &Path, downloader: &dyn Downloader) -> Result<FetchReport> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut report = FetchReport::default();
    for file in files {
        let dest = dir.join(&file.file_name);
        if dest.is_file() && sha256_file(&dest)? == file.sha256 {
            report.reused.push(dest);
            continue;
        }
        let partial = dir.join(format!("{}.part", file.file_name));
        let fetched = downloader.fetch(&file.url, &partial).and_then(|()| sha256_file(&partial));
        let actual = match fetched {
            Ok(actual) => actual,
            Err(e) => {
                let _ = std::fs::remove_file(&partial);
                return Err(e);
            }
        };
        if actual != file.sha256 {
            let _ = std::fs::remove_file(&partial);
            return Err(Error::Checksum { file: file.file_name.clone(), expected: file.sha256.clone(), actual });
        }
        std::fs::rename(&partial, &dest).map_err(|e| Error::io(format!("moving {}", dest.display()), e))?;
        report.downloaded.push(dest);
    }
    Ok(report)
}

fn gunzip(src: &Path, dest: &Path) -> Result<()> {
    let input = std::fs::File::open(src).map_err(|e| Error::io(format!("opening {}", src.display()), e))?;
    let mut dec = flate2::read::GzDecoder::new(input);
    let tmp = PathBuf::from(format!("{}.part", dest.display()));
    let mut out = std::fs::File::create(&tmp).map_err(|e| Error::io(format!("creating {}", tmp.display()), e))?;
    std::io::copy(&mut dec, &mut out).map_err(|e| Error::io(format!("decompressing {}", src.display()), e))?;
    std::fs::rename(&tmp, dest).map_err(|e| Error::io(format!("moving {}", dest.display()), e))
}

fn untar_gz(src: &Path, dir: &Path) -> Result<()> {
    let input = std::fs::File::open(src).map_err(|e| Error::io(format!("opening {}", src.display()), e))?;
    tar::Archive::new(flate2::read::GzDecoder::new(input))
        .unpack(dir)
        .map_err(|e| Error::io(format!("unpacking {}", src.display()), e))
}

/// Downloads (if needed) and unpacks `id` under `dir`.
pub fn fetch_dataset(id: DatasetId, dir: &Path, downloader: &dyn Downloader) -> Result<FetchReport> {
    let downloads = dir.join("downloads");
    let files = remote_files(id);
    let report = fetch_files(&files, &downloads, downloader)?;
    match id {
        DatasetId::Mnist => {
            let out = dir.join("mnist");
            std::fs::create_dir_all(&out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
            for f in &files {
                let plain = out.join(f.file_name.trim_end_matches(".gz"));
                if !plain.is_file() {
                    gunzip(&downloads.join(&f.file_name), &plain)?;
                }
            }
        }
        DatasetId::Cifar10 | DatasetId::Cifar100 => {
            let marker = dir.join(if id == DatasetId::Cifar10 { "cifar-10-batches-bin/test_batch.bin" } else { "cifar-100-binary/test.bin" });
            if !marker.is_file() {
                untar_gz(&downloads.join(&files[0].file_name), dir)?;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    struct Fake {
        body: Vec<u8>,
        calls: Cell<usize>,
    }

    impl Downloader for Fake {
        fn fetch(&self, _url: &str, dest: &Path) -> Result<()> {
            self.calls.set(self.calls.get() + 1);
            std::fs::write(dest, &self.body).map_err(|e| Error::io("fake", e))
        }
    }

    fn file_for(body: &[u8]) -> RemoteFile {
        RemoteFile {
            url: "https://example.invalid/x.bin".into(),
            file_name: "x.bin".into(),
            sha256: hex::encode(Sha256::digest(body)),
        }
    }

    #[test]
    fn download_then_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let fake = Fake { body: b"payload".to_vec(), calls: Cell::new(0) };
        let files = [file_for(b"payload")];
        let r = fetch_files(&files, dir.path(), &fake).unwrap();
        assert_eq!(r.downloaded.len(), 1);
        let r = fetch_files(&files, dir.path(), &fake).unwrap();
        assert_eq!((r.downloaded.len(), r.reused.len()), (0, 1));
        assert_eq!(fake.calls.get(), 1);
    }

    #[test]
    fn corrupted_download_is_removed() {
        let dir = tempfile::tempdir().unwrap();
        let fake = Fake { body: b"corrupted".to_vec(), calls: Cell::new(0) };
        let err = fetch_files(&[file_for(b"payload")], dir.path(), &fake).unwrap_err();
        assert!(matches!(err, Error::Checksum { .. }));
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(sha256_file(&p).unwrap(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
