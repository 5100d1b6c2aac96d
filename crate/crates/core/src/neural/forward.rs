//! Forward evaluation with an activation tape for reverse-mode gradients.

use crate::error::{Error, Result};

use super::activation::Activation;
use super::network::{LayerSpec, NetworkConfig, Padding};
use super::tensor::Tensor;
use super::weights::{LayerParams, NetworkWeights};

/// LSTM cell-state clip bound; gradients do not flow through clipped entries.
pub const LSTM_CELL_CLIP: f64 = 50.0;

/// Cached per-layer values required by the backward pass.
#[derive(Debug, Clone)]
pub(crate) enum TapeEntry {
    Dense {
        input: Vec<f64>,
        /// Post-activation outputs.
        output: Vec<f64>,
    },
    Conv1d {
        /// Channel-major input map.
        input: Vec<f64>,
        in_len: usize,
        /// Post-activation channel-major output map.
        output: Vec<f64>,
    },
    MaxPool1d {
        /// Flat input index of each output's winner.
        argmax: Vec<usize>,
        in_size: usize,
    },
    Flatten,
    Lstm(LstmTape),
}

#[derive(Debug, Clone)]
pub(crate) struct LstmTape {
    /// Input sequence, time-major (T x input).
    pub xs: Vec<f64>,
    /// Hidden states, (T+1) x H with hs[0] = 0.
    pub hs: Vec<f64>,
    /// Cell states after clipping, (T+1) x H with cs[0] = 0.
    pub cs: Vec<f64>,
    /// Activated gates, T x 4H in order (input, forget, candidate, output).
    pub gates: Vec<f64>,
    /// False where the cell state was clipped (blocks the gradient).
    pub unclipped: Vec<bool>,
}

/// Activation tape from one forward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    pub(crate) entries: Vec<TapeEntry>,
    pub(crate) output: Vec<f64>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

enum Feature {
    Vector(Vec<f64>),
    Map {
        channels: usize,
        len: usize,
        /// Channel-major: data[c * len + t].
        data: Vec<f64>,
    },
}

#[inline]
fn stable_sigmoid(x: f64) -> f64 {
    Activation::Sigmoid.apply(x)
}

/// Evaluate the network on one (n0 x m2) window, returning the m1-vector
/// output and the tape needed by [`backward`](super::backward).
pub fn forward(
    weights: &NetworkWeights,
    config: &NetworkConfig,
    input: &Tensor,
) -> Result<(Tensor, Tape)> {
    let n0 = config.input_window;
    let m2 = config.input_channels;
    let expected = n0 * m2;
    let shape_ok = input.shape() == [n0, m2] || input.shape() == [expected];
    if !shape_ok || input.len() != expected {
        return Err(Error::Config(format!(
            "input shape {:?} does not match ({n0} x {m2}) window",
            input.shape()
        )));
    }
    if weights.layers.len() != config.layers.len() {
        return Err(Error::Usage("weights do not match network config".into()));
    }

    let raw = input.values();
    // channel-major entry map: map[c * n0 + t] = input[t * m2 + c]
    let mut current = {
        let mut data = vec![0.0; expected];
        for t in 0..n0 {
            for c in 0..m2 {
                data[c * n0 + t] = raw[t * m2 + c];
            }
        }
        Feature::Map {
            channels: m2,
            len: n0,
            data,
        }
    };

    let mut entries = Vec::with_capacity(config.layers.len());

    for (idx, (layer, params)) in config.layers.iter().zip(&weights.layers).enumerate() {
        current = match (layer, params) {
            (
                LayerSpec::Dense {
                    input: in_dim,
                    output: out_dim,
                    activation,
                },
                LayerParams::Dense { w, b },
            ) => {
                let x = match current {
                    Feature::Vector(v) if v.len() == *in_dim => v,
                    _ => return Err(Error::Usage(format!("layer {idx}: dense input mismatch"))),
                };
                let mut y = vec![0.0; *out_dim];
                for o in 0..*out_dim {
                    let row = &w[o * in_dim..(o + 1) * in_dim];
                    let mut acc = b[o];
                    for (wi, xi) in row.iter().zip(&x) {
                        acc += wi * xi;
                    }
                    y[o] = activation.apply(acc);
                }
                check_finite(&y, idx)?;
                entries.push(TapeEntry::Dense {
                    input: x,
                    output: y.clone(),
                });
                Feature::Vector(y)
            }
            (
                LayerSpec::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                    padding,
                    activation,
                },
                LayerParams::Conv1d { w, b },
            ) => {
                let (channels, len, data) = match current {
                    Feature::Map {
                        channels,
                        len,
                        data,
                    } if channels == *in_channels => (channels, len, data),
                    _ => return Err(Error::Usage(format!("layer {idx}: conv input mismatch"))),
                };
                let (out_len, pad) = match padding {
                    Padding::Same => (len, (*kernel - 1) / 2),
                    Padding::Valid => (len - *kernel + 1, 0),
                };
                let mut out = vec![0.0; *out_channels * out_len];
                for oc in 0..*out_channels {
                    let w_oc = &w[oc * channels * kernel..(oc + 1) * channels * kernel];
                    for t in 0..out_len {
                        let mut acc = b[oc];
                        let t0 = t as isize - pad as isize;
                        for ic in 0..channels {
                            let w_row = &w_oc[ic * kernel..(ic + 1) * kernel];
                            let in_row = &data[ic * len..(ic + 1) * len];
                            for (j, wj) in w_row.iter().enumerate() {
                                let s = t0 + j as isize;
                                if s >= 0 && (s as usize) < len {
                                    acc += wj * in_row[s as usize];
                                }
                            }
                        }
                        out[oc * out_len + t] = activation.apply(acc);
                    }
                }
                check_finite(&out, idx)?;
                entries.push(TapeEntry::Conv1d {
                    input: data,
                    in_len: len,
                    output: out.clone(),
                });
                Feature::Map {
                    channels: *out_channels,
                    len: out_len,
                    data: out,
                }
            }
            (LayerSpec::MaxPool1d { width, stride }, LayerParams::Empty) => {
                let (channels, len, data) = match current {
                    Feature::Map {
                        channels,
                        len,
                        data,
                    } => (channels, len, data),
                    _ => return Err(Error::Usage(format!("layer {idx}: pool input mismatch"))),
                };
                let out_len = (len - width) / stride + 1;
                let mut out = vec![0.0; channels * out_len];
                let mut argmax = vec![0usize; channels * out_len];
                for c in 0..channels {
                    let row = &data[c * len..(c + 1) * len];
                    for t in 0..out_len {
                        let start = t * stride;
                        let mut best = row[start];
                        let mut best_idx = start;
                        for j in 1..*width {
                            let v = row[start + j];
                            if v > best {
                                best = v;
                                best_idx = start + j;
                            }
                        }
                        out[c * out_len + t] = best;
                        argmax[c * out_len + t] = c * len + best_idx;
                    }
                }
                entries.push(TapeEntry::MaxPool1d {
                    argmax,
                    in_size: channels * len,
                });
                Feature::Map {
                    channels,
                    len: out_len,
                    data: out,
                }
            }
            (LayerSpec::Flatten, LayerParams::Empty) => {
                let data = match current {
                    Feature::Map { data, .. } => data,
                    _ => return Err(Error::Usage(format!("layer {idx}: flatten input mismatch"))),
                };
                entries.push(TapeEntry::Flatten);
                Feature::Vector(data)
            }
            (
                LayerSpec::Lstm {
                    input: in_dim,
                    hidden,
                },
                LayerParams::Lstm { w_ih, w_hh, b },
            ) => {
                // the LSTM consumes the raw window, oldest step first
                let steps = n0;
                let h = *hidden;
                let mut tape = LstmTape {
                    xs: raw.to_vec(),
                    hs: vec![0.0; (steps + 1) * h],
                    cs: vec![0.0; (steps + 1) * h],
                    gates: vec![0.0; steps * 4 * h],
                    unclipped: vec![true; steps * h],
                };
                let mut z = vec![0.0; 4 * h];
                for t in 0..steps {
                    let x_t = &raw[t * in_dim..(t + 1) * in_dim];
                    let h_prev = tape.hs[t * h..(t + 1) * h].to_vec();
                    for g in 0..4 * h {
                        let mut acc = b[g];
                        let wx = &w_ih[g * in_dim..(g + 1) * in_dim];
                        for (wi, xi) in wx.iter().zip(x_t) {
                            acc += wi * xi;
                        }
                        let wh = &w_hh[g * h..(g + 1) * h];
                        for (wi, hi) in wh.iter().zip(&h_prev) {
                            acc += wi * hi;
                        }
                        z[g] = acc;
                    }
                    let gate_base = t * 4 * h;
                    for u in 0..h {
                        let i_g = stable_sigmoid(z[u]);
                        let f_g = stable_sigmoid(z[h + u]);
                        let g_g = z[2 * h + u].tanh();
                        let o_g = stable_sigmoid(z[3 * h + u]);
                        tape.gates[gate_base + u] = i_g;
                        tape.gates[gate_base + h + u] = f_g;
                        tape.gates[gate_base + 2 * h + u] = g_g;
                        tape.gates[gate_base + 3 * h + u] = o_g;

                        let c_prev = tape.cs[t * h + u];
                        let mut c = f_g * c_prev + i_g * g_g;
                        if c.abs() > LSTM_CELL_CLIP {
                            c = c.clamp(-LSTM_CELL_CLIP, LSTM_CELL_CLIP);
                            tape.unclipped[t * h + u] = false;
                        }
                        tape.cs[(t + 1) * h + u] = c;
                        tape.hs[(t + 1) * h + u] = o_g * c.tanh();
                    }
                }
                let h_last = tape.hs[steps * h..(steps + 1) * h].to_vec();
                check_finite(&h_last, idx)?;
                entries.push(TapeEntry::Lstm(tape));
                Feature::Vector(h_last)
            }
            _ => return Err(Error::Usage(format!("layer {idx}: weights/spec mismatch"))),
        };
    }

    let output = match current {
        Feature::Vector(v) if v.len() == config.output_dim => v,
        _ => return Err(Error::Config("network did not produce the output vector".into())),
    };
    Ok((
        Tensor::from_vec(output.clone()),
        Tape { entries, output },
    ))
}

fn check_finite(values: &[f64], layer_idx: usize) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite activation in layer {layer_idx}"
        )));
    }
    Ok(())
}
