//! Loads MNIST or CIFAR from a data directory, downloading it first when
//! `--fetch` is given, and prints basic statistics.
//!
//! cargo run --release --example load_dataset -- mnist data [--fetch]

use std::path::PathBuf;

use pepita::cli::{dataset_files, fetch_dataset, DatasetId, DatasetSource, HttpDownloader};
use pepita::datasets::{load_cifar10, load_cifar100, load_mnist, LabelGranularity, LabeledDataset};

fn main() -> pepita::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("mnist", String::as_str);
    let dir = PathBuf::from(args.get(1).map_or("data", String::as_str));
    let id: DatasetId = name.parse()?;
    if args.iter().any(|a| a == "--fetch") {
        let report = fetch_dataset(id, &dir, &HttpDownloader)?;
        println!("downloaded {:?}, reused {:?}", report.downloaded, report.reused);
    }

    let source = match id {
        DatasetId::Mnist => DatasetSource::Mnist { dir: None },
        DatasetId::Cifar10 => DatasetSource::Cifar10 { dir: None },
        DatasetId::Cifar100 => DatasetSource::Cifar100 { dir: None, coarse: false },
    };
    let (train_files, test_files) = dataset_files(&source, &dir);
    let load = |files: &[PathBuf]| -> pepita::Result<LabeledDataset> {
        match id {
            DatasetId::Mnist => load_mnist(&files[0], &files[1]),
            DatasetId::Cifar10 => load_cifar10(files),
            DatasetId::Cifar100 => load_cifar100(&files[0], LabelGranularity::Fine),
        }
    };
    for ds in [load(&train_files)?, load(&test_files)?] {
        let mut counts = vec![0usize; ds.num_classes()];
        ds.labels().iter().for_each(|&l| counts[l] += 1);
        println!("{}: {} samples of shape {:?}", ds.name(), ds.len(), ds.sample_shape());
        println!("  class counts {counts:?}");
        println!("  channel mean/std {:?}", ds.channel_stats());
    }
    Ok(())
}
