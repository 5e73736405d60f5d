use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Activation;

/// One layer of a feed-forward model. There are no bias terms anywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    /// Dense layer on the flattened input of the previous layer.
    FullyConnected {
        units: usize,
        activation: Activation,
        #[serde(default)]
        dropout: f64,
    },
    Conv {
        filters: usize,
        kernel: usize,
        stride: usize,
        activation: Activation,
    },
    Maxpool {
        size: usize,
        stride: usize,
    },
    Flatten,
}

impl LayerSpec {
    pub fn is_trainable(&self) -> bool {
        matches!(self, LayerSpec::FullyConnected { .. } | LayerSpec::Conv { .. })
    }

    pub fn activation(&self) -> Activation {
        match self {
            LayerSpec::FullyConnected { activation, .. } | LayerSpec::Conv { activation, .. } => *activation,
            _ => Activation::Identity,
        }
    }

    pub fn dropout(&self) -> f64 {
        match self {
            LayerSpec::FullyConnected { dropout, .. } => *dropout,
            _ => 0.0,
        }
    }

    fn describe(&self) -> String {
        match self {
            LayerSpec::FullyConnected { units, .. } => format!("fully_connected({units})"),
            LayerSpec::Conv { filters, kernel, stride, .. } => format!("conv({filters},{kernel},{stride})"),
            LayerSpec::Maxpool { size, stride } => format!("maxpool({size},{stride})"),
            LayerSpec::Flatten => "flatten".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `[C, H, W]`
    pub input_shape: [usize; 3],
    pub num_classes: usize,
    pub layers: Vec<LayerSpec>,
}

impl ModelConfig {
    /// Fully connected stack: ReLU hidden layers with dropout, softmax output.
    pub fn fully_connected(input_shape: [usize; 3], hidden: &[usize], num_classes: usize, dropout: f64) -> Self {
        Self::fully_connected_with(input_shape, hidden, num_classes, dropout, Activation::Relu, Activation::Softmax)
    }

    pub fn fully_connected_with(
        input_shape: [usize; 3],
        hidden: &[usize],
        num_classes: usize,
        dropout: f64,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Self {
        let mut layers: Vec<LayerSpec> = hidden
            .iter()
            .map(|&units| LayerSpec::FullyConnected {
                units,
                activation: hidden_activation,
                dropout,
            })
            .collect();
        layers.push(LayerSpec::FullyConnected {
            units: num_classes,
            activation: output_activation,
            dropout: 0.0,
        });
        ModelConfig {
            input_shape,
            num_classes,
            layers,
        }
    }

    /// One conv layer, 2×2/2 max pooling, flatten, dense output.
    pub fn single_conv(
        input_shape: [usize; 3],
        filters: usize,
        kernel: usize,
        stride: usize,
        num_classes: usize,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Self {
        ModelConfig {
            input_shape,
            num_classes,
            layers: vec![
                LayerSpec::Conv {
                    filters,
                    kernel,
                    stride,
                    activation: hidden_activation,
                },
                LayerSpec::Maxpool { size: 2, stride: 2 },
                LayerSpec::Flatten,
                LayerSpec::FullyConnected {
                    units: num_classes,
                    activation: output_activation,
                    dropout: 0.0,
                },
            ],
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_shape.iter().product()
    }

    /// Activation shapes: entry 0 is the input, entry `ℓ` the output of layer `ℓ`.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.contains(&0) || self.num_classes == 0 {
            return Err(Error::Config("input shape and class count must be positive".into()));
        }
        let Some(last) = self.layers.last() else {
            return Err(Error::Config("model has no layers".into()));
        };
        let mut shapes = vec![self.input_shape.to_vec()];
        for (i, layer) in self.layers.iter().enumerate() {
            let prev = shapes.last().unwrap().clone();
            let pair = || {
                let before = if i == 0 {
                    "input".to_string()
                } else {
                    format!("layer {} {}", i - 1, self.layers[i - 1].describe())
                };
                format!("{before} {prev:?} -> layer {i} {}", layer.describe())
            };
            let next = match layer {
                LayerSpec::FullyConnected { units, activation, dropout } => {
                    if *units == 0 {
                        return Err(Error::Config(format!("{}: zero units", pair())));
                    }
                    if !(0.0..1.0).contains(dropout) {
                        return Err(Error::Config(format!("{}: dropout {dropout} outside [0,1)", pair())));
                    }
                    if *activation == Activation::Softmax && i + 1 != self.layers.len() {
                        return Err(Error::Config(format!("{}: softmax only allowed on the final layer", pair())));
                    }
                    vec![*units]
                }
                LayerSpec::Conv { filters, kernel, stride, activation } => {
                    let &[c, h, w] = prev.as_slice() else {
                        return Err(Error::Config(format!("{}: conv needs a C×H×W input", pair())));
                    };
                    if *filters == 0 || *kernel == 0 || *stride == 0 {
                        return Err(Error::Config(format!("{}: filters, kernel and stride must be positive", pair())));
                    }
                    if *kernel > h || *kernel > w {
                        return Err(Error::Config(format!("{}: kernel larger than input map", pair())));
                    }
                    if *activation == Activation::Softmax {
                        return Err(Error::Config(format!("{}: softmax only allowed on the final layer", pair())));
                    }
                    let _ = c;
                    vec![*filters, (h - kernel) / stride + 1, (w - kernel) / stride + 1]
                }
                LayerSpec::Maxpool { size, stride } => {
                    let &[k, h, w] = prev.as_slice() else {
                        return Err(Error::Config(format!("{}: pooling needs a K×H×W input", pair())));
                    };
                    if *size == 0 || *stride == 0 || *size > h || *size > w {
                        return Err(Error::Config(format!("{}: invalid pooling window", pair())));
                    }
                    vec![k, (h - size) / stride + 1, (w - size) / stride + 1]
                }
                LayerSpec::Flatten => vec![prev.iter().product()],
            };
            shapes.push(next);
        }
        match last {
            LayerSpec::FullyConnected { units, dropout, .. } => {
                if *units != self.num_classes {
                    return Err(Error::Config(format!(
                        "final layer has {units} units but the model has {} classes",
                        self.num_classes
                    )));
                }
                if *dropout != 0.0 {
                    return Err(Error::Config("dropout is not allowed on the output layer".into()));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "final layer must be fully connected, found {}",
                    other.describe()
                )))
            }
        }
        Ok(shapes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mnist_fc_shapes() {
        let cfg = ModelConfig::fully_connected([1, 28, 28], &[1024], 10, 0.1);
        assert_eq!(cfg.shapes().unwrap(), vec![vec![1, 28, 28], vec![1024], vec![10]]);
    }

    #[test]
    fn cifar_conv_shapes() {
        let cfg = ModelConfig::single_conv([3, 32, 32], 32, 5, 1, 10, Activation::Relu, Activation::Softmax);
        let shapes = cfg.shapes().unwrap();
        assert_eq!(shapes[1], vec![32, 28, 28]);
        assert_eq!(shapes[2], vec![32, 14, 14]);
        assert_eq!(shapes[3], vec![6272]);
    }

    #[test]
    fn conv_after_dense_names_pair() {
        let cfg = ModelConfig {
            input_shape: [1, 8, 8],
            num_classes: 2,
            layers: vec![
                LayerSpec::FullyConnected { units: 4, activation: Activation::Relu, dropout: 0.0 },
                LayerSpec::Conv { filters: 2, kernel: 3, stride: 1, activation: Activation::Relu },
                LayerSpec::FullyConnected { units: 2, activation: Activation::Softmax, dropout: 0.0 },
            ],
        };
        let msg = cfg.shapes().unwrap_err().to_string();
        assert!(msg.contains("layer 0") && msg.contains("layer 1"), "{msg}");
    }

    #[test]
    fn softmax_must_be_last() {
        let mut cfg = ModelConfig::fully_connected([1, 2, 2], &[3], 2, 0.0);
        cfg.layers[0] = LayerSpec::FullyConnected { units: 3, activation: Activation::Softmax, dropout: 0.0 };
        assert!(cfg.shapes().is_err());
    }

    #[test]
    fn class_count_checked() {
        let mut cfg = ModelConfig::fully_connected([1, 2, 2], &[3], 2, 0.0);
        cfg.num_classes = 5;
        assert!(cfg.shapes().is_err());
    }

    #[test]
    fn json_layer_kinds() {
        let json = r#"{"input_shape":[1,4,4],"num_classes":2,"layers":[
            {"kind":"conv","filters":2,"kernel":3,"stride":1,"activation":"relu"},
            {"kind":"maxpool","size":2,"stride":2},
            {"kind":"flatten"},
            {"kind":"fully_connected","units":2,"activation":"softmax"}]}"#;
        let cfg: ModelConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.shapes().unwrap().last().unwrap(), &vec![2]);
        let bad = json.replace("\"stride\":1,", "\"stride\":1,\"padding\":0,");
        assert!(serde_json::from_str::<ModelConfig>(&bad).is_err());
    }
}
