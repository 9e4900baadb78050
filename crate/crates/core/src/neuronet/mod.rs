//! Small fully connected networks used as actors, critics and Q-heads.
//!
//! All parameters of an [`MlpGenome`] live in one flat vector in canonical
//! order: for each layer, its weight matrix row-major (`out x in`) followed by
//! its bias. Adam, crossover and soft updates work directly on that vector.

mod adam;
mod checkpoint;
mod genetic;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{read_genome, write_genome, GENOME_MAGIC};
pub use genetic::{
    crossover_at, crossover_genomes, mutate_genome, soft_update, MutationBranch, MutationParams, MutationReport,
};

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("architecture mismatch")]
    ArchitectureMismatch,
    #[error("expected input of length {expected}, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("non-finite gradient; step skipped")]
    NonFiniteGradient,
    #[error("invalid network shape: {0}")]
    Shape(String),
    #[error("checkpoint line {line}: {reason}")]
    Checkpoint { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation's output.
    fn slope(self, out: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - out * out,
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Activation::Identity, Activation::Tanh, Activation::Relu]
            .into_iter()
            .find(|a| a.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

impl LayerShape {
    pub fn weight_count(&self) -> usize {
        self.inputs * self.outputs
    }

    pub fn param_count(&self) -> usize {
        self.weight_count() + self.outputs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpGenome {
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Post-activation values of every layer from one forward pass, input first.
#[derive(Debug, Clone)]
pub struct Trace {
    activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace holds the input")
    }
}

impl MlpGenome {
    /// Zero-initialised network with the given layer shapes.
    pub fn zeros(layers: Vec<LayerShape>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::Shape("no layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 {
                return Err(NetError::Shape(format!("layer {i} has a zero dimension")));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(NetError::Shape(format!(
                    "layer {i} emits {} values but layer {} expects {}",
                    pair[0].outputs,
                    i + 1,
                    pair[1].inputs
                )));
            }
        }
        let total = layers.iter().map(LayerShape::param_count).sum();
        Ok(MlpGenome {
            layers,
            params: vec![0.0; total],
        })
    }

    /// Builds `input -> hidden... -> output` with `hidden_act` on hidden layers.
    pub fn build(input: usize, hidden: &[usize], output: usize, hidden_act: Activation, output_act: Activation) -> Result<Self, NetError> {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input);
        dims.extend_from_slice(hidden);
        dims.push(output);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| LayerShape {
                inputs: w[0],
                outputs: w[1],
                activation: if i == last { output_act } else { hidden_act },
            })
            .collect();
        Self::zeros(layers)
    }

    /// Uniform fan-in initialisation, `U(-1/sqrt(in), 1/sqrt(in))` for weights
    /// and biases alike.
    pub fn randomize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut offset = 0;
        for l in &self.layers {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            for p in &mut self.params[offset..offset + l.param_count()] {
                *p = rng.random_range(-bound..=bound);
            }
            offset += l.param_count();
        }
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn total_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn same_architecture(&self, other: &MlpGenome) -> bool {
        self.layers == other.layers
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Offset of each layer's weight block within the flat parameter vector.
    pub fn weight_offsets(&self) -> Vec<usize> {
        self.layers
            .iter()
            .scan(0, |off, l| {
                let here = *off;
                *off += l.param_count();
                Some(here)
            })
            .collect()
    }

    /// # Panics
    ///
    /// Panics if `input.len() != self.input_dim()`.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_dim(), "network input length");
        let mut current = input.to_vec();
        let mut offset = 0;
        for l in &self.layers {
            current = self.layer_forward(l, offset, &current);
            offset += l.param_count();
        }
        current
    }

    /// Forward pass that keeps every intermediate activation for [`Self::backward`].
    pub fn forward_trace(&self, input: &[f64]) -> Trace {
        assert_eq!(input.len(), self.input_dim(), "network input length");
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        let mut offset = 0;
        for l in &self.layers {
            let next = self.layer_forward(l, offset, activations.last().unwrap());
            activations.push(next);
            offset += l.param_count();
        }
        Trace { activations }
    }

    fn layer_forward(&self, l: &LayerShape, offset: usize, x: &[f64]) -> Vec<f64> {
        let w = &self.params[offset..offset + l.weight_count()];
        let b = &self.params[offset + l.weight_count()..offset + l.param_count()];
        w.chunks_exact(l.inputs)
            .zip(b)
            .map(|(row, bias)| {
                let z = row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + bias;
                l.activation.apply(z)
            })
            .collect()
    }

    /// Reverse-mode pass for one sample. Adds `d loss / d params` into
    /// `grads` (same layout as [`Self::params`]) and returns
    /// `d loss / d input`.
    pub fn backward(&self, trace: &Trace, grad_output: &[f64], grads: &mut [f64]) -> Vec<f64> {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer length");
        assert_eq!(grad_output.len(), self.output_dim(), "output gradient length");
        let offsets = self.weight_offsets();
        let mut delta = grad_output.to_vec();
        for (li, l) in self.layers.iter().enumerate().rev() {
            let out = &trace.activations[li + 1];
            let x = &trace.activations[li];
            for (d, o) in delta.iter_mut().zip(out) {
                *d *= l.activation.slope(*o);
            }
            let off = offsets[li];
            let (gw, gb) = grads[off..off + l.param_count()].split_at_mut(l.weight_count());
            let w = &self.params[off..off + l.weight_count()];
            let mut grad_in = vec![0.0; l.inputs];
            for (r, d) in delta.iter().enumerate() {
                gb[r] += d;
                let row_g = &mut gw[r * l.inputs..(r + 1) * l.inputs];
                let row_w = &w[r * l.inputs..(r + 1) * l.inputs];
                for c in 0..l.inputs {
                    row_g[c] += d * x[c];
                    grad_in[c] += d * row_w[c];
                }
            }
            delta = grad_in;
        }
        delta
    }
}

/// One Adam step from a batch of per-sample output gradients.
///
/// `output_grads[i]` is `d loss / d output` for `inputs[i]`, already scaled
/// by whatever batch averaging the loss uses.
pub fn grad_step(net: &mut MlpGenome, optimizer: &mut Adam, inputs: &[Vec<f64>], output_grads: &[Vec<f64>]) -> Result<(), NetError> {
    assert_eq!(inputs.len(), output_grads.len(), "one output gradient per input");
    let mut grads = vec![0.0; net.total_params()];
    for (x, g) in inputs.iter().zip(output_grads) {
        let trace = net.forward_trace(x);
        net.backward(&trace, g, &mut grads);
    }
    optimizer.step(net.params_mut(), &grads)
}
