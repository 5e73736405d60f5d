use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Where a non-finite value was detected during training.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DivergenceSite {
    pub layer: Option<usize>,
    pub epoch: Option<usize>,
    pub step: Option<usize>,
}

impl std::fmt::Display for DivergenceSite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(epoch) = self.epoch {
            parts.push(format!("epoch {epoch}"));
        }
        if let Some(step) = self.step {
            parts.push(format!("step {step}"));
        }
        if let Some(layer) = self.layer {
            parts.push(format!("layer {layer}"));
        }
        if parts.is_empty() {
            write!(f, "unknown location")
        } else {
            write!(f, "{}", parts.join(", "))
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("format error in {path}: {msg} (byte offset {offset})")]
    Format {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("non-finite {quantity} at {site}")]
    Divergence {
        quantity: &'static str,
        site: DivergenceSite,
    },

    #[error("angle undefined: operand has zero norm")]
    UndefinedAngle,

    #[error("checksum mismatch for {file}: expected {expected}, got {actual}")]
    Checksum {
        file: String,
        expected: String,
        actual: String,
    },

    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("download failed for {url}: {msg}")]
    Download { url: String, msg: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn shape(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        Error::Shape {
            op,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn divergence(quantity: &'static str, layer: Option<usize>) -> Self {
        Error::Divergence {
            quantity,
            site: DivergenceSite {
                layer,
                ..Default::default()
            },
        }
    }

    /// Attaches the training position to a divergence error; other errors pass through.
    pub fn at_step(self, epoch: usize, step: usize) -> Self {
        match self {
            Error::Divergence { quantity, site } => Error::Divergence {
                quantity,
                site: DivergenceSite {
                    epoch: Some(epoch),
                    step: Some(step),
                    ..site
                },
            },
            other => other,
        }
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. })
    }
}
