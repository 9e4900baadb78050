//! Plain-text genome checkpoints.
//!
//! ```text
//! lisr-genome v1
//! layers 3
//! 4 32 tanh
//! 32 32 tanh
//! 32 2 identity
//! params 1250
//! 1.234e-1
//! ...
//! ```
//!
//! One `inputs outputs activation` line per layer, then the flat parameter
//! vector in canonical order (per layer: weights row-major, then bias), one
//! value per line in shortest round-trip exponent notation.

use std::fmt::Write as _;

use super::{Activation, LayerShape, MlpGenome, NetError};

pub const GENOME_MAGIC: &str = "lisr-genome v1";

pub fn write_genome(net: &MlpGenome) -> String {
    let mut out = String::with_capacity(16 * net.total_params() + 64);
    let _ = writeln!(out, "{GENOME_MAGIC}");
    let _ = writeln!(out, "layers {}", net.layers().len());
    for l in net.layers() {
        let _ = writeln!(out, "{} {} {}", l.inputs, l.outputs, l.activation.name());
    }
    let _ = writeln!(out, "params {}", net.total_params());
    for p in net.params() {
        let _ = writeln!(out, "{p:e}");
    }
    out
}

pub fn read_genome(text: &str) -> Result<MlpGenome, NetError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| NetError::Checkpoint {
            line: 0,
            reason: format!("unexpected end of file, expected {what}"),
        })
    };
    let err = |line: usize, reason: String| NetError::Checkpoint { line, reason };

    let (n, magic) = next("header")?;
    if magic != GENOME_MAGIC {
        return Err(err(n, format!("unsupported header '{magic}'")));
    }
    let (n, count_line) = next("layer count")?;
    let layer_count: usize = count_line
        .strip_prefix("layers ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(n, "expected 'layers <n>'".into()))?;
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let (n, line) = next("layer shape")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let shape = match parts.as_slice() {
            [i, o, a] => i
                .parse()
                .ok()
                .zip(o.parse().ok())
                .zip(Activation::from_name(a))
                .map(|((inputs, outputs), activation)| LayerShape {
                    inputs,
                    outputs,
                    activation,
                }),
            _ => None,
        };
        layers.push(shape.ok_or_else(|| err(n, format!("bad layer line '{line}'")))?);
    }
    let mut net = MlpGenome::zeros(layers).map_err(|e| err(0, e.to_string()))?;
    let (n, params_line) = next("parameter count")?;
    let count: usize = params_line
        .strip_prefix("params ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(n, "expected 'params <n>'".into()))?;
    if count != net.total_params() {
        return Err(err(
            n,
            format!("layers need {} parameters, file declares {count}", net.total_params()),
        ));
    }
    for slot in net.params_mut() {
        let (n, line) = next("parameter")?;
        *slot = line
            .parse()
            .map_err(|_| err(n, format!("bad parameter '{line}'")))?;
    }
    if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(err(n, format!("trailing content '{extra}'")));
    }
    Ok(net)
}
