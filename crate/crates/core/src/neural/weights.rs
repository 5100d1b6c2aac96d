//! Trainable parameter storage and its gradient twin.

use crate::error::{Error, Result};

use super::network::{LayerSpec, NetworkConfig};

/// Parameter blocks of one layer.
///
/// Layouts: dense `w` is out x in row-major; conv `w` is indexed
/// `[out_ch][in_ch][tap]`; LSTM `w_ih` is 4H x in, `w_hh` 4H x H, `b` 4H,
/// with gate order input, forget, candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Dense { w: Vec<f64>, b: Vec<f64> },
    Conv1d { w: Vec<f64>, b: Vec<f64> },
    Lstm { w_ih: Vec<f64>, w_hh: Vec<f64>, b: Vec<f64> },
    Empty,
}

impl LayerParams {
    fn zeros_for(spec: &LayerSpec) -> LayerParams {
        match *spec {
            LayerSpec::Dense { input, output, .. } => LayerParams::Dense {
                w: vec![0.0; output * input],
                b: vec![0.0; output],
            },
            LayerSpec::Conv1d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => LayerParams::Conv1d {
                w: vec![0.0; out_channels * in_channels * kernel],
                b: vec![0.0; out_channels],
            },
            LayerSpec::Lstm { input, hidden } => LayerParams::Lstm {
                w_ih: vec![0.0; 4 * hidden * input],
                w_hh: vec![0.0; 4 * hidden * hidden],
                b: vec![0.0; 4 * hidden],
            },
            LayerSpec::MaxPool1d { .. } | LayerSpec::Flatten => LayerParams::Empty,
        }
    }

    /// Named parameter blocks in canonical order.
    pub fn blocks(&self) -> Vec<(&'static str, &Vec<f64>)> {
        match self {
            LayerParams::Dense { w, b } | LayerParams::Conv1d { w, b } => {
                vec![("w", w), ("b", b)]
            }
            LayerParams::Lstm { w_ih, w_hh, b } => {
                vec![("w_ih", w_ih), ("w_hh", w_hh), ("b", b)]
            }
            LayerParams::Empty => Vec::new(),
        }
    }

    pub fn blocks_mut(&mut self) -> Vec<(&'static str, &mut Vec<f64>)> {
        match self {
            LayerParams::Dense { w, b } | LayerParams::Conv1d { w, b } => {
                vec![("w", w), ("b", b)]
            }
            LayerParams::Lstm { w_ih, w_hh, b } => {
                vec![("w_ih", w_ih), ("w_hh", w_hh), ("b", b)]
            }
            LayerParams::Empty => Vec::new(),
        }
    }
}

/// All trainable parameters of a network, in layer order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkWeights {
    pub(crate) layers: Vec<LayerParams>,
}

impl NetworkWeights {
    pub fn zeros(config: &NetworkConfig) -> Self {
        NetworkWeights {
            layers: config.layers.iter().map(LayerParams::zeros_for).collect(),
        }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.blocks())
            .map(|(_, v)| v.len())
            .sum()
    }

    /// Flat view in canonical block order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for (_, block) in layer.blocks() {
                out.extend_from_slice(block);
            }
        }
        out
    }

    pub fn copy_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Usage(format!(
                "flat parameter vector has {} entries, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            for (_, block) in layer.blocks_mut() {
                block.copy_from_slice(&flat[offset..offset + block.len()]);
                offset += block.len();
            }
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        for (idx, layer) in self.layers.iter().enumerate() {
            for (name, block) in layer.blocks() {
                if block.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numerical(format!(
                        "non-finite weight in layer {idx} block {name}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn matches_structure(&self, other: &NetworkWeights) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| match (a, b) {
                    (LayerParams::Dense { w: w1, b: b1 }, LayerParams::Dense { w: w2, b: b2 })
                    | (LayerParams::Conv1d { w: w1, b: b1 }, LayerParams::Conv1d { w: w2, b: b2 }) => {
                        w1.len() == w2.len() && b1.len() == b2.len()
                    }
                    (
                        LayerParams::Lstm { w_ih: a1, w_hh: a2, b: a3 },
                        LayerParams::Lstm { w_ih: b1, w_hh: b2, b: b3 },
                    ) => a1.len() == b1.len() && a2.len() == b2.len() && a3.len() == b3.len(),
                    (LayerParams::Empty, LayerParams::Empty) => true,
                    _ => false,
                })
    }
}

/// Gradient accumulator, shape-congruent with its weights.
#[derive(Debug, Clone)]
pub struct GradientBuffer {
    pub(crate) layers: Vec<LayerParams>,
    /// Number of per-sample gradients accumulated.
    pub count: usize,
}

impl GradientBuffer {
    pub fn zeros(config: &NetworkConfig) -> Self {
        GradientBuffer {
            layers: config.layers.iter().map(LayerParams::zeros_for).collect(),
            count: 0,
        }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn to_flat(&self) -> Vec<f64> {
        NetworkWeights {
            layers: self.layers.clone(),
        }
        .to_flat()
    }

    pub fn reset(&mut self) {
        for layer in &mut self.layers {
            for (_, block) in layer.blocks_mut() {
                block.fill(0.0);
            }
        }
        self.count = 0;
    }

    pub fn add(&mut self, other: &GradientBuffer) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::Usage("gradient buffers have different shapes".into()));
        }
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            let theirs = theirs.blocks();
            for ((_, dst), (_, src)) in mine.blocks_mut().into_iter().zip(theirs) {
                if dst.len() != src.len() {
                    return Err(Error::Usage("gradient buffers have different shapes".into()));
                }
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        self.count += other.count;
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for (_, block) in layer.blocks_mut() {
                for v in block.iter_mut() {
                    *v *= factor;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .flat_map(|l| l.blocks())
            .all(|(_, block)| block.iter().all(|v| v.is_finite()))
    }
}
