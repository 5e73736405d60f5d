//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "PEPITACK"
//! version    u32      (currently 1)
//! meta_len   u64
//! meta       meta_len bytes of UTF-8 JSON ({"model": ModelConfig, ...})
//! count      u32      number of tensors
//! per tensor:
//!   name_len u32, name (UTF-8): "W<l>", "F", "B<l>" or "V<l>"
//!   rank     u32, dims u64 × rank
//!   payload  f64 × prod(dims), row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{Model, ModelConfig};
use crate::numerics::Tensor;

use super::OptimizerState;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PEPITACK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub optimizer: Option<OptimizerState>,
    /// Free-form JSON object; always carries the model config under `"model"`.
    pub meta: serde_json::Value,
}

impl Checkpoint {
    pub fn new(model: Model, optimizer: Option<OptimizerState>, meta: serde_json::Value) -> Self {
        Checkpoint { model, optimizer, meta }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut meta = match &self.meta {
            serde_json::Value::Object(m) => m.clone(),
            serde_json::Value::Null => serde_json::Map::new(),
            other => {
                let mut m = serde_json::Map::new();
                m.insert("extra".into(), other.clone());
                m
            }
        };
        meta.insert("model".into(), serde_json::to_value(self.model.config()).expect("config serializes"));
        let meta = serde_json::to_vec(&meta).expect("meta serializes");

        let mut tensors: Vec<(String, &Tensor)> = Vec::new();
        for (l, w) in self.model.weights().iter().enumerate() {
            if let Some(w) = w {
                tensors.push((format!("W{l}"), w));
            }
        }
        tensors.push(("F".into(), self.model.projection()));
        for (l, b) in self.model.feedbacks().iter().enumerate() {
            if let Some(b) = b {
                tensors.push((format!("B{l}"), b));
            }
        }
        if let Some(opt) = &self.optimizer {
            for (l, v) in opt.velocities().iter().enumerate() {
                if let Some(v) = v {
                    tensors.push((format!("V{l}"), v));
                }
            }
        }

        let mut buf = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        buf.extend_from_slice(&meta);
        buf.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (name, t) in tensors {
            buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
            buf.extend_from_slice(name.as_bytes());
            buf.extend_from_slice(&(t.rank() as u32).to_le_bytes());
            for &d in t.shape() {
                buf.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in t.data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        f.write_all(&buf).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut r = Reader { path, bytes: &bytes, pos: 0 };

        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(r.error(0, "not a checkpoint (bad magic)"));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Version { found: version, expected: CHECKPOINT_VERSION });
        }
        let meta_len = r.u64()? as usize;
        let meta_at = r.pos;
        let meta: serde_json::Value = serde_json::from_slice(r.take(meta_len)?)
            .map_err(|e| Error::Format { path: path.into(), offset: meta_at as u64, msg: format!("meta: {e}") })?;
        let config: ModelConfig = serde_json::from_value(meta.get("model").cloned().unwrap_or_default())
            .map_err(|e| Error::Format { path: path.into(), offset: meta_at as u64, msg: format!("model config: {e}") })?;
        let n_layers = config.layers.len();

        let count = r.u32()?;
        let mut weights = vec![None; n_layers];
        let mut feedback = vec![None; n_layers];
        let mut velocities = vec![None; n_layers];
        let mut projection = None;
        for _ in 0..count {
            let at = r.pos;
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| r.error(at, "tensor name is not UTF-8"))?
                .to_string();
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n: usize = shape.iter().product();
            let payload = r.take(n.checked_mul(8).ok_or_else(|| r.error(at, "tensor too large"))?)?;
            let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
            let t = Tensor::new(shape, data)?;
            let slot = |prefix: &str| -> Result<Option<usize>> {
                match name.strip_prefix(prefix) {
                    Some(rest) => rest
                        .parse::<usize>()
                        .ok()
                        .filter(|&l| l < n_layers)
                        .map(Some)
                        .ok_or_else(|| r.error(at, &format!("bad tensor name '{name}'"))),
                    None => Ok(None),
                }
            };
            if name == "F" {
                projection = Some(t);
            } else if let Some(l) = slot("W")? {
                weights[l] = Some(t);
            } else if let Some(l) = slot("B")? {
                feedback[l] = Some(t);
            } else if let Some(l) = slot("V")? {
                velocities[l] = Some(t);
            } else {
                return Err(r.error(at, &format!("unknown tensor '{name}'")));
            }
        }
        if r.pos != bytes.len() {
            return Err(r.error(r.pos, "trailing bytes"));
        }
        let projection = projection.ok_or_else(|| r.error(0, "missing projection tensor F"))?;
        let model = Model::from_parts(&config, weights, projection, feedback)?;
        let optimizer = if velocities.iter().any(Option::is_some) {
            Some(OptimizerState::from_velocities(&model, velocities)?)
        } else {
            None
        };
        Ok(Checkpoint { model, optimizer, meta })
    }
}

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn error(&self, offset: usize, msg: &str) -> Error {
        Error::Format { path: self.path.into(), offset: offset as u64, msg: msg.into() }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.error(self.bytes.len(), "truncated checkpoint"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{FeedbackKind, InitSpec};

    fn model() -> Model {
        let cfg = ModelConfig::fully_connected([1, 4, 4], &[8], 3, 0.1);
        Model::build(&cfg, &InitSpec { feedback: FeedbackKind::Alignment, ..Default::default() }, 3).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.bin");
        let m = model();
        let opt = OptimizerState::new(&m);
        Checkpoint::new(m.clone(), Some(opt.clone()), serde_json::json!({"epoch": 4})).save(&path).unwrap();
        let ck = Checkpoint::load(&path).unwrap();
        assert_eq!(ck.model, m);
        assert_eq!(ck.optimizer, Some(opt));
        assert_eq!(ck.meta["epoch"], 4);
    }

    #[test]
    fn version_and_magic_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.bin");
        Checkpoint::new(model(), None, serde_json::Value::Null).save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8] = 9;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Version { found: 9, expected: 1 })));
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Format { offset: 0, .. })));
        std::fs::write(&path, &bytes[..20]).unwrap();
        assert!(Checkpoint::load(&path).is_err());
    }
}
