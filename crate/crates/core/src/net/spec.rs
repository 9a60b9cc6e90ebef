use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    /// Linear pass-through, used to check the affine path in isolation.
    Identity,
}

/// Architecture of the feedforward approximant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_names: Vec<String>,
    pub hidden_widths: Vec<usize>,
    pub output_names: Vec<String>,
    pub activation: Activation,
}

impl NetworkSpec {
    pub fn new<I: Into<String>, O: Into<String>>(
        inputs: impl IntoIterator<Item = I>,
        hidden: &[usize],
        outputs: impl IntoIterator<Item = O>,
    ) -> Result<Self, NetError> {
        let spec = NetworkSpec {
            input_names: inputs.into_iter().map(Into::into).collect(),
            hidden_widths: hidden.to_vec(),
            output_names: outputs.into_iter().map(Into::into).collect(),
            activation: Activation::Tanh,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_names.is_empty() {
            return Err(NetError::InvalidSpec("at least one input is required".into()));
        }
        if self.output_names.is_empty() {
            return Err(NetError::InvalidSpec("at least one output is required".into()));
        }
        if self.hidden_widths.is_empty() {
            return Err(NetError::InvalidSpec("depth must be at least 1".into()));
        }
        if self.hidden_widths.contains(&0) {
            return Err(NetError::InvalidSpec("hidden widths must be positive".into()));
        }
        for names in [&self.input_names, &self.output_names] {
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    return Err(NetError::InvalidSpec(format!("duplicate name `{n}`")));
                }
            }
        }
        Ok(())
    }

    pub fn n_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.output_names.len()
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.output_names.iter().position(|n| n == name)
    }

    /// Layer widths including the input and output layers.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_widths.len() + 2);
        w.push(self.n_inputs());
        w.extend_from_slice(&self.hidden_widths);
        w.push(self.n_outputs());
        w
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.widths())
    }

    pub fn param_count(&self) -> usize {
        self.widths().windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }
}

/// Where a parameter sits inside an affine layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Weight { row: usize, col: usize },
    Bias { row: usize },
}

/// Flat offsets of every layer's weights (row-major, `n_out × n_in`) followed by its biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    widths: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl Layout {
    pub fn new(widths: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for w in widths.windows(2) {
            offsets.push(total);
            total += w[1] * w[0] + w[1];
        }
        Layout {
            widths: widths.to_vec(),
            offsets,
            total,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.offsets.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// (fan_in, fan_out) of layer `l`.
    pub fn shape(&self, l: usize) -> (usize, usize) {
        (self.widths[l], self.widths[l + 1])
    }

    pub fn weights_range(&self, l: usize) -> std::ops::Range<usize> {
        let (n_in, n_out) = self.shape(l);
        self.offsets[l]..self.offsets[l] + n_in * n_out
    }

    pub fn bias_range(&self, l: usize) -> std::ops::Range<usize> {
        let (n_in, n_out) = self.shape(l);
        let start = self.offsets[l] + n_in * n_out;
        start..start + n_out
    }

    pub fn offset(&self, layer: usize, slot: Slot) -> Option<usize> {
        if layer >= self.n_layers() {
            return None;
        }
        let (n_in, n_out) = self.shape(layer);
        match slot {
            Slot::Weight { row, col } if row < n_out && col < n_in => Some(self.offsets[layer] + row * n_in + col),
            Slot::Bias { row } if row < n_out => Some(self.offsets[layer] + n_in * n_out + row),
            _ => None,
        }
    }

    /// Inverse of [`Layout::offset`].
    pub fn locate(&self, index: usize) -> Option<(usize, Slot)> {
        if index >= self.total {
            return None;
        }
        let layer = self.offsets.iter().rposition(|&o| o <= index)?;
        let (n_in, n_out) = self.shape(layer);
        let local = index - self.offsets[layer];
        if local < n_in * n_out {
            Some((
                layer,
                Slot::Weight {
                    row: local / n_in,
                    col: local % n_in,
                },
            ))
        } else {
            Some((layer, Slot::Bias { row: local - n_in * n_out }))
        }
    }
}

/// The flat parameter vector θ together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub values: Vec<f64>,
    layout: Layout,
}

impl ParameterSet {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        let layout = spec.layout();
        ParameterSet {
            values: vec![0.0; layout.total()],
            layout,
        }
    }

    pub fn from_values(spec: &NetworkSpec, values: Vec<f64>) -> Result<Self, NetError> {
        let layout = spec.layout();
        if values.len() != layout.total() {
            return Err(NetError::ParamCount {
                got: values.len(),
                expected: layout.total(),
            });
        }
        Ok(ParameterSet { values, layout })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Glorot-uniform weights and zero biases, reproducible from `seed`.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParameterSet::zeros(spec);
    let layout = p.layout.clone();
    for l in 0..layout.n_layers() {
        let (n_in, n_out) = layout.shape(l);
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        for w in &mut p.values[layout.weights_range(l)] {
            *w = dist.sample(&mut rng);
        }
    }
    p
}
