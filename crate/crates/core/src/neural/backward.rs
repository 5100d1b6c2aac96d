//! Reverse-mode gradients through the tape.

use crate::error::{Error, Result};

use super::forward::{Tape, TapeEntry};
use super::network::{LayerSpec, NetworkConfig, Padding};
use super::weights::{GradientBuffer, LayerParams, NetworkWeights};

/// Gradients of a scalar loss w.r.t. every parameter block, given the
/// upstream gradient w.r.t. the network output.
pub fn backward(
    weights: &NetworkWeights,
    config: &NetworkConfig,
    tape: &Tape,
    output_grad: &[f64],
) -> Result<GradientBuffer> {
    let mut grads = GradientBuffer::zeros(config);
    backward_into(weights, config, tape, output_grad, &mut grads)?;
    Ok(grads)
}

/// Accumulating variant used by minibatch loops; adds into `grads`.
pub fn backward_into(
    weights: &NetworkWeights,
    config: &NetworkConfig,
    tape: &Tape,
    output_grad: &[f64],
    grads: &mut GradientBuffer,
) -> Result<()> {
    if output_grad.len() != config.output_dim {
        return Err(Error::Usage(format!(
            "output gradient has {} entries, expected {}",
            output_grad.len(),
            config.output_dim
        )));
    }
    if tape.entries.len() != config.layers.len() {
        return Err(Error::Usage(
            "tape does not match network config (stale tape?)".into(),
        ));
    }

    let mut grad: Vec<f64> = output_grad.to_vec();

    for idx in (0..config.layers.len()).rev() {
        let first = idx == 0;
        match (&config.layers[idx], &weights.layers[idx], &tape.entries[idx], &mut grads.layers[idx]) {
            (
                LayerSpec::Dense {
                    input: in_dim,
                    output: out_dim,
                    activation,
                },
                LayerParams::Dense { w, .. },
                TapeEntry::Dense { input, output },
                LayerParams::Dense { w: gw, b: gb },
            ) => {
                if grad.len() != *out_dim || input.len() != *in_dim {
                    return Err(Error::Usage(format!("layer {idx}: stale tape")));
                }
                let mut dx = if first { Vec::new() } else { vec![0.0; *in_dim] };
                for o in 0..*out_dim {
                    let dz = grad[o] * activation.grad_from_output(output[o]);
                    if dz == 0.0 {
                        continue;
                    }
                    gb[o] += dz;
                    let gw_row = &mut gw[o * in_dim..(o + 1) * in_dim];
                    for (g, xi) in gw_row.iter_mut().zip(input) {
                        *g += dz * xi;
                    }
                    if !first {
                        let w_row = &w[o * in_dim..(o + 1) * in_dim];
                        for (d, wi) in dx.iter_mut().zip(w_row) {
                            *d += dz * wi;
                        }
                    }
                }
                grad = dx;
            }
            (
                LayerSpec::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                    padding,
                    activation,
                },
                LayerParams::Conv1d { w, .. },
                TapeEntry::Conv1d {
                    input,
                    in_len,
                    output,
                },
                LayerParams::Conv1d { w: gw, b: gb },
            ) => {
                let len = *in_len;
                let out_len = match padding {
                    Padding::Same => len,
                    Padding::Valid => len - *kernel + 1,
                };
                if grad.len() != *out_channels * out_len {
                    return Err(Error::Usage(format!("layer {idx}: stale tape")));
                }
                let pad = match padding {
                    Padding::Same => (*kernel - 1) / 2,
                    Padding::Valid => 0,
                };
                let mut dx = if first {
                    Vec::new()
                } else {
                    vec![0.0; in_channels * len]
                };
                for oc in 0..*out_channels {
                    let w_oc = &w[oc * in_channels * kernel..(oc + 1) * in_channels * kernel];
                    let gw_oc =
                        &mut gw[oc * in_channels * kernel..(oc + 1) * in_channels * kernel];
                    for t in 0..out_len {
                        let dz =
                            grad[oc * out_len + t] * activation.grad_from_output(output[oc * out_len + t]);
                        if dz == 0.0 {
                            continue;
                        }
                        gb[oc] += dz;
                        let t0 = t as isize - pad as isize;
                        for ic in 0..*in_channels {
                            let in_row = &input[ic * len..(ic + 1) * len];
                            for j in 0..*kernel {
                                let s = t0 + j as isize;
                                if s >= 0 && (s as usize) < len {
                                    let s = s as usize;
                                    gw_oc[ic * kernel + j] += dz * in_row[s];
                                    if !first {
                                        dx[ic * len + s] += dz * w_oc[ic * kernel + j];
                                    }
                                }
                            }
                        }
                    }
                }
                grad = dx;
            }
            (
                LayerSpec::MaxPool1d { .. },
                LayerParams::Empty,
                TapeEntry::MaxPool1d { argmax, in_size },
                LayerParams::Empty,
            ) => {
                if grad.len() != argmax.len() {
                    return Err(Error::Usage(format!("layer {idx}: stale tape")));
                }
                let mut dx = vec![0.0; *in_size];
                for (g, &src) in grad.iter().zip(argmax) {
                    dx[src] += g;
                }
                grad = dx;
            }
            (LayerSpec::Flatten, LayerParams::Empty, TapeEntry::Flatten, LayerParams::Empty) => {
                // identical flat layout on both sides
            }
            (
                LayerSpec::Lstm {
                    input: in_dim,
                    hidden,
                },
                LayerParams::Lstm { w_hh, .. },
                TapeEntry::Lstm(tape),
                LayerParams::Lstm {
                    w_ih: gw_ih,
                    w_hh: gw_hh,
                    b: gb,
                },
            ) => {
                let h = *hidden;
                if grad.len() != h {
                    return Err(Error::Usage(format!("layer {idx}: stale tape")));
                }
                let steps = tape.xs.len() / in_dim;
                let mut dh = grad.clone();
                let mut dc = vec![0.0; h];
                let mut dz = vec![0.0; 4 * h];
                for t in (0..steps).rev() {
                    let gate = &tape.gates[t * 4 * h..(t + 1) * 4 * h];
                    let c_new = &tape.cs[(t + 1) * h..(t + 2) * h];
                    let c_prev = &tape.cs[t * h..(t + 1) * h];
                    let h_prev = &tape.hs[t * h..(t + 1) * h];
                    let x_t = &tape.xs[t * in_dim..(t + 1) * in_dim];
                    for u in 0..h {
                        let i_g = gate[u];
                        let f_g = gate[h + u];
                        let g_g = gate[2 * h + u];
                        let o_g = gate[3 * h + u];
                        let tau = c_new[u].tanh();
                        let mut dcu = dc[u] + dh[u] * o_g * (1.0 - tau * tau);
                        if !tape.unclipped[t * h + u] {
                            dcu = 0.0;
                        }
                        let do_g = dh[u] * tau;
                        let di = dcu * g_g;
                        let df = dcu * c_prev[u];
                        let dg = dcu * i_g;
                        dz[u] = di * i_g * (1.0 - i_g);
                        dz[h + u] = df * f_g * (1.0 - f_g);
                        dz[2 * h + u] = dg * (1.0 - g_g * g_g);
                        dz[3 * h + u] = do_g * o_g * (1.0 - o_g);
                        dc[u] = dcu * f_g;
                    }
                    // parameter gradients and the carried dh
                    dh.iter_mut().for_each(|v| *v = 0.0);
                    for g in 0..4 * h {
                        let d = dz[g];
                        if d == 0.0 {
                            continue;
                        }
                        gb[g] += d;
                        let gw_row = &mut gw_ih[g * in_dim..(g + 1) * in_dim];
                        for (gv, xv) in gw_row.iter_mut().zip(x_t) {
                            *gv += d * xv;
                        }
                        let gh_row = &mut gw_hh[g * h..(g + 1) * h];
                        for (gv, hv) in gh_row.iter_mut().zip(h_prev) {
                            *gv += d * hv;
                        }
                        let wh_row = &w_hh[g * h..(g + 1) * h];
                        for (dv, wv) in dh.iter_mut().zip(wh_row) {
                            *dv += d * wv;
                        }
                    }
                }
                grad = Vec::new();
            }
            _ => return Err(Error::Usage(format!("layer {idx}: tape/spec mismatch"))),
        }
    }

    grads.count += 1;
    Ok(())
}
