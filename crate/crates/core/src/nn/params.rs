use std::ops::{Deref, DerefMut};

use rand::Rng;

use super::layers::LayerSpec;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub tensor: Tensor,
}

/// Per-layer named tensors, laid out exactly as [`LayerSpec::param_shapes`]
/// describes. Parameter-free layers hold an empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    layers: Vec<Vec<Param>>,
}

impl ParamSet {
    pub fn zeros_for(spec: &[LayerSpec]) -> Self {
        Self {
            layers: spec
                .iter()
                .map(|l| {
                    l.param_shapes()
                        .into_iter()
                        .map(|(name, shape)| Param { name, tensor: Tensor::zeros(&shape) })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|ps| {
                    ps.iter()
                        .map(|p| Param { name: p.name, tensor: Tensor::zeros(p.tensor.shape()) })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Vec<Param>] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &[Param] {
        &self.layers[i]
    }

    pub fn get(&self, layer: usize, name: &str) -> Option<&Tensor> {
        self.layers.get(layer)?.iter().find(|p| p.name == name).map(|p| &p.tensor)
    }

    pub fn get_mut(&mut self, layer: usize, name: &str) -> Option<&mut Tensor> {
        self.layers.get_mut(layer)?.iter_mut().find(|p| p.name == name).map(|p| &mut p.tensor)
    }

    pub(crate) fn tensor(&self, layer: usize, slot: usize) -> &Tensor {
        &self.layers[layer][slot].tensor
    }

    pub(crate) fn tensor_mut(&mut self, layer: usize, slot: usize) -> &mut Tensor {
        &mut self.layers[layer][slot].tensor
    }

    /// `(layer, name, tensor)` for every parameter in layer order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &'static str, &Tensor)> {
        self.layers.iter().enumerate().flat_map(|(i, ps)| ps.iter().map(move |p| (i, p.name, &p.tensor)))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (usize, &'static str, &mut Tensor)> {
        self.layers
            .iter_mut()
            .enumerate()
            .flat_map(|(i, ps)| ps.iter_mut().map(move |p| (i, p.name, &mut p.tensor)))
    }

    pub fn num_values(&self) -> usize {
        self.iter().map(|(_, _, t)| t.len()).sum()
    }

    /// Same layer count, names and shapes.
    pub fn congruent(&self, other: &ParamSet) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(p, q)| p.name == q.name && p.tensor.shape() == q.tensor.shape())
            })
    }

    pub fn matches_spec(&self, spec: &[LayerSpec]) -> bool {
        self.congruent(&ParamSet::zeros_for(spec))
    }

    pub(crate) fn ensure_congruent(&self, other: &ParamSet, what: &str) -> Result<()> {
        if self.congruent(other) {
            Ok(())
        } else {
            Err(Error::Contract(format!("{what}: parameter structures differ")))
        }
    }

    pub fn add_assign(&mut self, other: &ParamSet) {
        for (a, b) in self.layers.iter_mut().flatten().zip(other.layers.iter().flatten()) {
            for (x, y) in a.tensor.data_mut().iter_mut().zip(b.tensor.data()) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for p in self.layers.iter_mut().flatten() {
            p.tensor.data_mut().iter_mut().for_each(|x| *x *= k);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|(_, _, t)| t.is_finite())
    }

    pub fn from_layers(layers: Vec<Vec<Param>>) -> Self {
        Self { layers }
    }
}

/// Trainable weights of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams(pub ParamSet);

/// Gradients, mirroring [`ModelParams`] entry for entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle(pub ParamSet);

impl Deref for ModelParams {
    type Target = ParamSet;
    fn deref(&self) -> &ParamSet {
        &self.0
    }
}

impl DerefMut for ModelParams {
    fn deref_mut(&mut self) -> &mut ParamSet {
        &mut self.0
    }
}

impl Deref for GradientBundle {
    type Target = ParamSet;
    fn deref(&self) -> &ParamSet {
        &self.0
    }
}

impl DerefMut for GradientBundle {
    fn deref_mut(&mut self) -> &mut ParamSet {
        &mut self.0
    }
}

impl ModelParams {
    /// Seeded initialisation.
    ///
    /// Convolution and dense weights are He-uniform (`±sqrt(6 / fan_in)`),
    /// their biases zero. LSTM weights are uniform `±1/sqrt(hidden)` with the
    /// forget-gate bias set to 1 and the other biases zero.
    pub fn init<R: Rng + ?Sized>(spec: &[LayerSpec], rng: &mut R) -> Self {
        let mut set = ParamSet::zeros_for(spec);
        for (i, layer) in spec.iter().enumerate() {
            match *layer {
                LayerSpec::Conv1D { in_channels, kernel, .. } => {
                    let bound = (6.0 / (in_channels * kernel) as f64).sqrt();
                    uniform(set.tensor_mut(i, 0), bound, rng);
                }
                LayerSpec::Dense { input, .. } => {
                    let bound = (6.0 / input as f64).sqrt();
                    uniform(set.tensor_mut(i, 0), bound, rng);
                }
                LayerSpec::Lstm { hidden_size, .. } => {
                    let bound = 1.0 / (hidden_size as f64).sqrt();
                    uniform(set.tensor_mut(i, 0), bound, rng);
                    uniform(set.tensor_mut(i, 1), bound, rng);
                    let b = set.tensor_mut(i, 2).data_mut();
                    b[hidden_size..2 * hidden_size].fill(1.0);
                }
                _ => {}
            }
        }
        Self(set)
    }

    pub fn zeros(spec: &[LayerSpec]) -> Self {
        Self(ParamSet::zeros_for(spec))
    }
}

impl GradientBundle {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self(params.zeros_like())
    }
}

fn uniform<R: Rng + ?Sized>(t: &mut Tensor, bound: f64, rng: &mut R) {
    for x in t.data_mut() {
        *x = rng.random_range(-bound..bound);
    }
}
