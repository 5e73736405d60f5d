use std::io::{BufWriter, Write};
use std::path::Path;

use crate::datasets::LabeledDataset;
use crate::error::{Error, Result};

use super::{forward_standard, DropoutMasks, Model};

const CHUNK: usize = 500;

/// Writes `h_layer` for every sample (evaluation mode) as CSV:
/// header `unit_0,…,unit_{n-1},label`, one row per sample.
pub fn export_embeddings(model: &Model, dataset: &LabeledDataset, layer_index: usize, out_path: &Path) -> Result<()> {
    if layer_index > model.num_layers() {
        return Err(Error::Usage(format!(
            "layer index {layer_index} out of range (model has {} layers)",
            model.num_layers()
        )));
    }
    let io = |e| Error::io(format!("writing {}", out_path.display()), e);
    let file = std::fs::File::create(out_path).map_err(io)?;
    let mut w = BufWriter::new(file);
    let width = model.size_at(layer_index);
    let header: Vec<String> = (0..width).map(|i| format!("unit_{i}")).chain(["label".to_string()]).collect();
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let masks = DropoutMasks::none(model);
    let indices: Vec<usize> = (0..dataset.len()).collect();
    for chunk in indices.chunks(CHUNK) {
        let (x, _) = dataset.gather(chunk);
        let trace = forward_standard(model, &x, &masks, false)?;
        let h = trace.activation(layer_index);
        for (r, &i) in chunk.iter().enumerate() {
            let row = &h.data()[r * width..(r + 1) * width];
            for v in row {
                write!(w, "{v},").map_err(io)?;
            }
            writeln!(w, "{}", dataset.labels()[i]).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
