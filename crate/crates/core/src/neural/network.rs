//! Network configurations: layer descriptors, shape chaining, and the three
//! architecture presets.

use crate::error::{Error, Result};

use super::activation::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Dnn,
    Cnn,
    Rnn,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Dnn, Architecture::Cnn, Architecture::Rnn];

    pub fn label(self) -> &'static str {
        match self {
            Architecture::Dnn => "dnn",
            Architecture::Cnn => "cnn",
            Architecture::Rnn => "rnn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dnn" => Ok(Architecture::Dnn),
            "cnn" => Ok(Architecture::Cnn),
            "rnn" => Ok(Architecture::Rnn),
            other => Err(Error::Parse(format!("unknown architecture: {other}"))),
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Padding {
    Same,
    Valid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Dense {
        input: usize,
        output: usize,
        activation: Activation,
    },
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        padding: Padding,
        activation: Activation,
    },
    MaxPool1d {
        width: usize,
        stride: usize,
    },
    Flatten,
    Lstm {
        input: usize,
        hidden: usize,
    },
}

impl LayerSpec {
    pub fn param_count(&self) -> usize {
        match *self {
            LayerSpec::Dense { input, output, .. } => input * output + output,
            LayerSpec::Conv1d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => out_channels * in_channels * kernel + out_channels,
            LayerSpec::Lstm { input, hidden } => {
                4 * hidden * input + 4 * hidden * hidden + 4 * hidden
            }
            LayerSpec::MaxPool1d { .. } | LayerSpec::Flatten => 0,
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::MaxPool1d { .. } => "maxpool1d",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Lstm { .. } => "lstm",
        }
    }
}

/// Feature shape flowing between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureShape {
    Vector(usize),
    Map { channels: usize, len: usize },
}

/// Architecture preset plus the dimensions tying it to a model:
/// inputs are (n0 x m2) observation windows, outputs are m1-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub architecture: Architecture,
    pub input_window: usize,
    pub input_channels: usize,
    pub output_dim: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkConfig {
    /// The standard preset for an architecture.
    ///
    /// - dnn: five 5-unit sigmoid layers, linear head
    /// - cnn: two conv/pool stages (8 then 16 filters, same padding, relu),
    ///   16-unit sigmoid dense, linear head
    /// - rnn: one LSTM with 16 hidden units, linear head
    pub fn preset(
        architecture: Architecture,
        input_window: usize,
        input_channels: usize,
        output_dim: usize,
    ) -> Result<Self> {
        let n0 = input_window;
        let m2 = input_channels;
        let m1 = output_dim;
        let layers = match architecture {
            Architecture::Dnn => {
                let mut layers = vec![LayerSpec::Flatten];
                let mut input = n0 * m2;
                for _ in 0..5 {
                    layers.push(LayerSpec::Dense {
                        input,
                        output: 5,
                        activation: Activation::Sigmoid,
                    });
                    input = 5;
                }
                layers.push(LayerSpec::Dense {
                    input,
                    output: m1,
                    activation: Activation::Identity,
                });
                layers
            }
            Architecture::Cnn => {
                let pooled1 = pool_out_len(n0, 2, 2)?;
                let pooled2 = pool_out_len(pooled1, 2, 2)?;
                vec![
                    LayerSpec::Conv1d {
                        in_channels: m2,
                        out_channels: 8,
                        kernel: 5,
                        padding: Padding::Same,
                        activation: Activation::Relu,
                    },
                    LayerSpec::MaxPool1d { width: 2, stride: 2 },
                    LayerSpec::Conv1d {
                        in_channels: 8,
                        out_channels: 16,
                        kernel: 3,
                        padding: Padding::Same,
                        activation: Activation::Relu,
                    },
                    LayerSpec::MaxPool1d { width: 2, stride: 2 },
                    LayerSpec::Flatten,
                    LayerSpec::Dense {
                        input: 16 * pooled2,
                        output: 16,
                        activation: Activation::Sigmoid,
                    },
                    LayerSpec::Dense {
                        input: 16,
                        output: m1,
                        activation: Activation::Identity,
                    },
                ]
            }
            Architecture::Rnn => vec![
                LayerSpec::Lstm {
                    input: m2,
                    hidden: 16,
                },
                LayerSpec::Dense {
                    input: 16,
                    output: m1,
                    activation: Activation::Identity,
                },
            ],
        };
        let config = NetworkConfig {
            architecture,
            input_window,
            input_channels,
            output_dim,
            layers,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerSpec::param_count).sum()
    }

    /// Shapes flowing through the chain, starting from the input map.
    pub fn feature_shapes(&self) -> Result<Vec<FeatureShape>> {
        let mut shapes = vec![FeatureShape::Map {
            channels: self.input_channels,
            len: self.input_window,
        }];
        for (idx, layer) in self.layers.iter().enumerate() {
            let current = *shapes.last().unwrap();
            let next = match *layer {
                LayerSpec::Dense {
                    input,
                    output,
                    ..
                } => match current {
                    FeatureShape::Vector(n) if n == input => FeatureShape::Vector(output),
                    other => {
                        return Err(Error::Config(format!(
                            "layer {idx}: dense expects Vector({input}), got {other:?}"
                        )))
                    }
                },
                LayerSpec::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                    padding,
                    ..
                } => match current {
                    FeatureShape::Map { channels, len } if channels == in_channels => {
                        if kernel == 0 || (padding == Padding::Same && kernel % 2 == 0) {
                            return Err(Error::Config(format!(
                                "layer {idx}: same-padded conv needs an odd kernel, got {kernel}"
                            )));
                        }
                        let out_len = match padding {
                            Padding::Same => len,
                            Padding::Valid => {
                                if len < kernel {
                                    return Err(Error::Config(format!(
                                        "layer {idx}: input length {len} shorter than kernel {kernel}"
                                    )));
                                }
                                len - kernel + 1
                            }
                        };
                        FeatureShape::Map {
                            channels: out_channels,
                            len: out_len,
                        }
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "layer {idx}: conv1d expects Map with {in_channels} channels, got {other:?}"
                        )))
                    }
                },
                LayerSpec::MaxPool1d { width, stride } => match current {
                    FeatureShape::Map { channels, len } => FeatureShape::Map {
                        channels,
                        len: pool_out_len_spec(len, width, stride, idx)?,
                    },
                    other => {
                        return Err(Error::Config(format!(
                            "layer {idx}: max-pool expects Map, got {other:?}"
                        )))
                    }
                },
                LayerSpec::Flatten => match current {
                    FeatureShape::Map { channels, len } => FeatureShape::Vector(channels * len),
                    other => {
                        return Err(Error::Config(format!(
                            "layer {idx}: flatten expects Map, got {other:?}"
                        )))
                    }
                },
                LayerSpec::Lstm { input, hidden } => {
                    if idx != 0 {
                        return Err(Error::Config(
                            "lstm must be the first layer, consuming the raw window".into(),
                        ));
                    }
                    match current {
                        FeatureShape::Map { channels, .. } if channels == input => {
                            FeatureShape::Vector(hidden)
                        }
                        other => {
                            return Err(Error::Config(format!(
                                "layer {idx}: lstm expects {input} input channels, got {other:?}"
                            )))
                        }
                    }
                }
            };
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_window == 0 || self.input_channels == 0 || self.output_dim == 0 {
            return Err(Error::Config("network dimensions must be positive".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        let shapes = self.feature_shapes()?;
        match *shapes.last().unwrap() {
            FeatureShape::Vector(n) if n == self.output_dim => Ok(()),
            other => Err(Error::Config(format!(
                "network output is {other:?}, expected Vector({})",
                self.output_dim
            ))),
        }
    }
}

fn pool_out_len(len: usize, width: usize, stride: usize) -> Result<usize> {
    if len < width {
        return Err(Error::Config(format!(
            "cannot pool length {len} with window {width}"
        )));
    }
    Ok((len - width) / stride + 1)
}

fn pool_out_len_spec(len: usize, width: usize, stride: usize, idx: usize) -> Result<usize> {
    if width == 0 || stride == 0 {
        return Err(Error::Config(format!(
            "layer {idx}: pool width/stride must be positive"
        )));
    }
    pool_out_len(len, width, stride)
        .map_err(|_| Error::Config(format!("layer {idx}: input length {len} too short to pool")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dnn_preset_parameter_count() {
        let config = NetworkConfig::preset(Architecture::Dnn, 50, 1, 1).unwrap();
        // 50*5+5 + 4*(5*5+5) + 5*1+1
        assert_eq!(config.param_count(), 381);
    }

    #[test]
    fn cnn_preset_shapes_chain() {
        let config = NetworkConfig::preset(Architecture::Cnn, 50, 1, 1).unwrap();
        let shapes = config.feature_shapes().unwrap();
        assert_eq!(
            shapes[1],
            FeatureShape::Map {
                channels: 8,
                len: 50
            }
        );
        assert_eq!(
            shapes[4],
            FeatureShape::Map {
                channels: 16,
                len: 12
            }
        );
        assert_eq!(shapes[5], FeatureShape::Vector(192));
    }

    #[test]
    fn rnn_preset_validates_for_2d_models() {
        let config = NetworkConfig::preset(Architecture::Rnn, 50, 2, 2).unwrap();
        assert_eq!(
            config.param_count(),
            4 * 16 * 2 + 4 * 16 * 16 + 4 * 16 + (16 * 2 + 2)
        );
    }

    #[test]
    fn misplaced_lstm_rejected() {
        let mut config = NetworkConfig::preset(Architecture::Rnn, 50, 1, 1).unwrap();
        config.layers.insert(0, LayerSpec::Flatten);
        assert!(config.validate().is_err());
    }

    #[test]
    fn mismatched_chain_rejected() {
        let mut config = NetworkConfig::preset(Architecture::Dnn, 50, 1, 1).unwrap();
        config.layers[1] = LayerSpec::Dense {
            input: 49,
            output: 5,
            activation: Activation::Sigmoid,
        };
        assert!(config.validate().is_err());
    }
}
