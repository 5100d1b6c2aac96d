//! Text serialization of network configs and weights.
//!
//! Floats are written with 17 significant decimal digits, which round-trips
//! every finite f64 bit-exactly through `str::parse`.

use crate::error::{Error, Result};

use super::activation::Activation;
use super::network::{Architecture, LayerSpec, NetworkConfig, Padding};
use super::weights::{LayerParams, NetworkWeights};

/// Canonical float encoding (17 significant digits).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad float: {s}")))
}

fn layer_line(spec: &LayerSpec) -> String {
    match *spec {
        LayerSpec::Dense {
            input,
            output,
            activation,
        } => format!("layer dense {input} {output} {}", activation.label()),
        LayerSpec::Conv1d {
            in_channels,
            out_channels,
            kernel,
            padding,
            activation,
        } => format!(
            "layer conv1d {in_channels} {out_channels} {kernel} {} {}",
            match padding {
                Padding::Same => "same",
                Padding::Valid => "valid",
            },
            activation.label()
        ),
        LayerSpec::MaxPool1d { width, stride } => format!("layer maxpool1d {width} {stride}"),
        LayerSpec::Flatten => "layer flatten".to_string(),
        LayerSpec::Lstm { input, hidden } => format!("layer lstm {input} {hidden}"),
    }
}

fn parse_layer_line(line: &str) -> Result<LayerSpec> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let parse_n = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad integer in layer line: {line}")))
    };
    match tokens.as_slice() {
        ["layer", "dense", input, output, act] => Ok(LayerSpec::Dense {
            input: parse_n(input)?,
            output: parse_n(output)?,
            activation: Activation::parse(act)?,
        }),
        ["layer", "conv1d", ic, oc, k, pad, act] => Ok(LayerSpec::Conv1d {
            in_channels: parse_n(ic)?,
            out_channels: parse_n(oc)?,
            kernel: parse_n(k)?,
            padding: match *pad {
                "same" => Padding::Same,
                "valid" => Padding::Valid,
                other => return Err(Error::Parse(format!("bad padding: {other}"))),
            },
            activation: Activation::parse(act)?,
        }),
        ["layer", "maxpool1d", w, s] => Ok(LayerSpec::MaxPool1d {
            width: parse_n(w)?,
            stride: parse_n(s)?,
        }),
        ["layer", "flatten"] => Ok(LayerSpec::Flatten),
        ["layer", "lstm", input, hidden] => Ok(LayerSpec::Lstm {
            input: parse_n(input)?,
            hidden: parse_n(hidden)?,
        }),
        _ => Err(Error::Parse(format!("bad layer line: {line}"))),
    }
}

pub fn write_config(out: &mut String, config: &NetworkConfig) {
    out.push_str(&format!("arch {}\n", config.architecture.label()));
    out.push_str(&format!("window {}\n", config.input_window));
    out.push_str(&format!("channels {}\n", config.input_channels));
    out.push_str(&format!("output {}\n", config.output_dim));
    out.push_str(&format!("layers {}\n", config.layers.len()));
    for spec in &config.layers {
        out.push_str(&layer_line(spec));
        out.push('\n');
    }
}

fn expect_kv<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<String> {
    let line = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("missing '{key}' line")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Parse(format!("expected '{key} ...', got '{line}'")))?;
    Ok(rest.to_string())
}

pub fn parse_config<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<NetworkConfig> {
    let arch = Architecture::parse(&expect_kv(lines, "arch")?)?;
    let parse_n = |s: String, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad {what}: {s}")))
    };
    let input_window = parse_n(expect_kv(lines, "window")?, "window")?;
    let input_channels = parse_n(expect_kv(lines, "channels")?, "channels")?;
    let output_dim = parse_n(expect_kv(lines, "output")?, "output")?;
    let n_layers = parse_n(expect_kv(lines, "layers")?, "layer count")?;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse("truncated layer list".into()))?;
        layers.push(parse_layer_line(line)?);
    }
    let config = NetworkConfig {
        architecture: arch,
        input_window,
        input_channels,
        output_dim,
        layers,
    };
    config
        .validate()
        .map_err(|e| Error::StoredShape(e.to_string()))?;
    Ok(config)
}

pub fn write_weights(out: &mut String, weights: &NetworkWeights) {
    for (idx, layer) in weights.layers().iter().enumerate() {
        for (name, block) in layer.blocks() {
            out.push_str(&format!("block {idx} {name} {}\n", block.len()));
            for chunk in block.chunks(8) {
                let line: Vec<String> = chunk.iter().map(|v| format_f64(*v)).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
    }
}

pub fn parse_weights<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    config: &NetworkConfig,
) -> Result<NetworkWeights> {
    let mut weights = NetworkWeights::zeros(config);
    for (idx, layer) in weights.layers.iter_mut().enumerate() {
        for (name, block) in layer.blocks_mut() {
            let header = lines
                .next()
                .ok_or_else(|| Error::StoredShape("truncated weight blocks".into()))?;
            let expected = format!("block {idx} {name} {}", block.len());
            if header != expected {
                return Err(Error::StoredShape(format!(
                    "expected '{expected}', got '{header}'"
                )));
            }
            let mut filled = 0;
            while filled < block.len() {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::StoredShape("truncated weight values".into()))?;
                for tok in line.split_whitespace() {
                    if filled >= block.len() {
                        return Err(Error::StoredShape(format!(
                            "too many values in block {idx} {name}"
                        )));
                    }
                    block[filled] = parse_f64(tok)?;
                    filled += 1;
                }
            }
        }
    }
    weights.check_finite()?;
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::init_weights;

    #[test]
    fn float_encoding_round_trips_bit_exactly() {
        for v in [
            0.0,
            -0.0,
            1.0,
            -1.0 / 3.0,
            6.02e23,
            f64::MIN_POSITIVE,
            5e-324,
            std::f64::consts::PI,
            -1.7976931348623157e308,
        ] {
            let back = parse_f64(&format_f64(v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn config_and_weights_round_trip() {
        for arch in Architecture::ALL {
            let config = NetworkConfig::preset(arch, 50, 2, 2).unwrap();
            let weights = init_weights(&config, 99).unwrap();
            let mut doc = String::new();
            write_config(&mut doc, &config);
            write_weights(&mut doc, &weights);
            let mut lines = doc.lines();
            let config2 = parse_config(&mut lines).unwrap();
            assert_eq!(config2, config);
            let weights2 = parse_weights(&mut lines, &config2).unwrap();
            assert_eq!(weights2, weights);
        }
    }

    #[test]
    fn corrupted_block_header_is_a_shape_error() {
        let config = NetworkConfig::preset(Architecture::Dnn, 10, 1, 1).unwrap();
        let weights = init_weights(&config, 1).unwrap();
        let mut doc = String::new();
        write_weights(&mut doc, &weights);
        let doc = doc.replacen("block 1 w 50", "block 1 w 49", 1);
        let mut lines = doc.lines();
        assert!(matches!(
            parse_weights(&mut lines, &config),
            Err(Error::StoredShape(_))
        ));
    }
}
