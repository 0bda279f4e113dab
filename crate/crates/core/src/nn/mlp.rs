//! Dense feed-forward network with an explicit backward pass.
//!
//! Each layer computes `z = W x + b` with `W` stored as `(out, in)` row-major, then applies
//! the hidden activation, or the output activation on the last layer. Batched inputs are
//! matrices with one sample per row.

use rand::distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::matrix::{gemm, Matrix};
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Activation applied to the last layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Tanh,
    /// `mid + half * tanh(z)` per output, mapping onto the box `[low, high]`.
    ScaledTanh { low: Vec<f64>, high: Vec<f64> },
}

impl OutputActivation {
    fn validate(&self, out_dim: usize) -> Result<()> {
        if let OutputActivation::ScaledTanh { low, high } = self {
            if low.len() != out_dim || high.len() != out_dim {
                return Err(Error::config(format!(
                    "scaled-tanh bounds have length {}/{}, output dimension is {out_dim}",
                    low.len(),
                    high.len()
                )));
            }
            if low.iter().zip(high).any(|(l, h)| !(l < h)) {
                return Err(Error::config("scaled-tanh needs low < high elementwise"));
            }
        }
        Ok(())
    }
}

/// One affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    fn zeros_like(&self) -> Layer {
        Layer {
            weight: Matrix::zeros(self.weight.rows(), self.weight.cols()),
            bias: vec![0.0; self.bias.len()],
        }
    }
}

/// Parameters of a multi-layer perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    activation: Activation,
    output: OutputActivation,
    // Bumped on every in-place parameter change; caches remember the version they saw.
    version: u64,
}

/// Per-layer gradients shaped like an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Activations recorded by a forward pass, consumed by [`Mlp::backward_batch`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    // inputs[l] is the input of layer l; the final entry is the network output.
    activations: Vec<Matrix>,
    layer_sizes: Vec<usize>,
    version: u64,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("cache holds at least input and output")
    }

    pub fn input(&self) -> &Matrix {
        &self.activations[0]
    }
}

impl Mlp {
    /// Initializes a network with scaled-uniform weights, bound `sqrt(6 / (fan_in + fan_out))`,
    /// and zero biases.
    pub fn new(
        layer_sizes: &[usize],
        activation: Activation,
        output: OutputActivation,
        seed: u64,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::config(format!(
                "an MLP needs at least 2 layer sizes, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::config(format!(
                "layer sizes must be positive: {layer_sizes:?}"
            )));
        }
        output.validate(*layer_sizes.last().unwrap())?;

        let mut rng = rng_from_seed(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound).expect("finite positive bound");
                let data = (0..fan_in * fan_out).map(|_| dist.sample(&mut rng)).collect();
                Layer {
                    weight: Matrix::from_vec(fan_out, fan_in, data).expect("sized above"),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(Self {
            layers,
            activation,
            output,
            version: 0,
        })
    }

    /// Builds a network from explicit `(weight, bias)` pairs.
    pub fn from_layers(
        layers: Vec<Layer>,
        activation: Activation,
        output: OutputActivation,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("an MLP needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(Error::shape(format!(
                    "layer {i}: bias length {} != output dimension {}",
                    l.bias.len(),
                    l.out_dim()
                )));
            }
            if l.in_dim() == 0 || l.out_dim() == 0 {
                return Err(Error::config(format!("layer {i} has a zero dimension")));
            }
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::shape(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    w[0].out_dim(),
                    i + 1,
                    w[1].in_dim()
                )));
            }
        }
        output.validate(layers.last().unwrap().out_dim())?;
        Ok(Self {
            layers,
            activation,
            output,
            version: 0,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn output_activation(&self) -> &OutputActivation {
        &self.output
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// `[in, hidden..., out]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Layer::out_dim))
            .collect()
    }

    /// Σ (in·out + out) over layers.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.in_dim() * l.out_dim() + l.out_dim())
            .sum()
    }

    /// All parameters, layer by layer: weights row-major, then biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weight.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weight.data().len();
            l.weight.data_mut().copy_from_slice(&values[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&values[off..off + nb]);
            off += nb;
        }
        self.touch();
        Ok(())
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        self.touch();
        &mut self.layers
    }

    fn touch(&mut self) {
        self.version = self.version.wrapping_add(1);
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weight.shape() == b.weight.shape())
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        let (out, cache) = self.forward_batch(&Matrix::row_vector(input))?;
        Ok((out.into_vec(), cache))
    }

    /// Single-sample prediction without recording a cache.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict_batch(&Matrix::row_vector(input))?.into_vec())
    }

    pub fn forward_batch(&self, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let next = self.layer_forward(i, layer, activations.last().unwrap());
            activations.push(next);
        }
        let output = activations.last().unwrap().clone();
        Ok((
            output,
            ForwardCache {
                activations,
                layer_sizes: self.layer_sizes(),
                version: self.version,
            },
        ))
    }

    pub fn predict_batch(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let mut x = self.layer_forward(0, &self.layers[0], input);
        for (i, layer) in self.layers.iter().enumerate().skip(1) {
            x = self.layer_forward(i, layer, &x);
        }
        Ok(x)
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.input_dim() {
            return Err(Error::shape(format!(
                "network expects inputs of length {}, got {}",
                self.input_dim(),
                input.cols()
            )));
        }
        Ok(())
    }

    fn layer_forward(&self, index: usize, layer: &Layer, x: &Matrix) -> Matrix {
        let mut z = Matrix::zeros(x.rows(), layer.out_dim());
        for r in 0..z.rows() {
            z.row_mut(r).copy_from_slice(&layer.bias);
        }
        gemm(1.0, x, false, &layer.weight, true, 1.0, &mut z);
        let last = index + 1 == self.layers.len();
        if !last {
            match self.activation {
                Activation::Tanh => z.data_mut().iter_mut().for_each(|v| *v = v.tanh()),
                Activation::Relu => z.data_mut().iter_mut().for_each(|v| *v = v.max(0.0)),
            }
        } else {
            match &self.output {
                OutputActivation::Identity => {}
                OutputActivation::Tanh => z.data_mut().iter_mut().for_each(|v| *v = v.tanh()),
                OutputActivation::ScaledTanh { low, high } => {
                    let cols = z.cols();
                    for (j, v) in z.data_mut().iter_mut().enumerate() {
                        let c = j % cols;
                        let mid = 0.5 * (low[c] + high[c]);
                        let half = 0.5 * (high[c] - low[c]);
                        *v = mid + half * v.tanh();
                    }
                }
            }
        }
        z
    }

    /// Single-sample backward pass.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let (grads, input_grad) = self.backward_batch(cache, &Matrix::row_vector(output_grad))?;
        Ok((grads, input_grad.into_vec()))
    }

    /// Backpropagates `output_grad` (one row per sample) through the recorded pass.
    ///
    /// Parameter gradients are summed over the batch; the input gradient keeps one row per
    /// sample.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        output_grad: &Matrix,
    ) -> Result<(Gradients, Matrix)> {
        if cache.layer_sizes != self.layer_sizes() {
            return Err(Error::Contract(format!(
                "cache recorded for layer sizes {:?}, network has {:?}",
                cache.layer_sizes,
                self.layer_sizes()
            )));
        }
        if cache.version != self.version {
            return Err(Error::Contract(
                "stale forward cache: parameters changed after the forward pass".into(),
            ));
        }
        let out = cache.output();
        if output_grad.shape() != out.shape() {
            return Err(Error::shape(format!(
                "output gradient is {:?}, forward output was {:?}",
                output_grad.shape(),
                out.shape()
            )));
        }

        let n = self.layers.len();
        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        let mut delta = output_grad.clone();
        for l in (0..n).rev() {
            let post = &cache.activations[l + 1];
            self.apply_activation_derivative(l + 1 == n, post, &mut delta);

            let input = &cache.activations[l];
            let g = &mut grads[l];
            gemm(1.0, &delta, true, input, false, 0.0, &mut g.weight);
            for r in 0..delta.rows() {
                for (b, d) in g.bias.iter_mut().zip(delta.row(r)) {
                    *b += d;
                }
            }
            let mut prev = Matrix::zeros(delta.rows(), self.layers[l].in_dim());
            gemm(1.0, &delta, false, &self.layers[l].weight, false, 0.0, &mut prev);
            delta = prev;
        }
        Ok((Gradients { layers: grads }, delta))
    }

    // Multiplies `delta` (grad w.r.t. post-activation) by d(post)/d(pre), in place.
    fn apply_activation_derivative(&self, last: bool, post: &Matrix, delta: &mut Matrix) {
        let pairs = delta.data_mut().iter_mut().zip(post.data());
        if !last {
            match self.activation {
                Activation::Tanh => pairs.for_each(|(d, y)| *d *= 1.0 - y * y),
                Activation::Relu => pairs.for_each(|(d, y)| {
                    if *y <= 0.0 {
                        *d = 0.0
                    }
                }),
            }
            return;
        }
        match &self.output {
            OutputActivation::Identity => {}
            OutputActivation::Tanh => pairs.for_each(|(d, y)| *d *= 1.0 - y * y),
            OutputActivation::ScaledTanh { low, high } => {
                let cols = post.cols();
                for (j, (d, y)) in pairs.enumerate() {
                    let c = j % cols;
                    let mid = 0.5 * (low[c] + high[c]);
                    let half = 0.5 * (high[c] - low[c]);
                    let t = (y - mid) / half;
                    *d *= half * (1.0 - t * t);
                }
            }
        }
    }

    /// `self ← tau * online + (1 - tau) * self`, elementwise.
    pub fn polyak_update(&mut self, online: &Mlp, tau: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::config(format!("polyak tau must lie in [0, 1], got {tau}")));
        }
        if !self.same_shape(online) {
            return Err(Error::shape("polyak update between networks of different shapes"));
        }
        for (t, o) in self.layers.iter_mut().zip(&online.layers) {
            for (tv, ov) in t.weight.data_mut().iter_mut().zip(o.weight.data()) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
            for (tv, ov) in t.bias.iter_mut().zip(&o.bias) {
                *tv = tau * ov + (1.0 - tau) * *tv;
            }
        }
        self.touch();
        Ok(())
    }
}

/// Free-function form of [`Mlp::polyak_update`].
pub fn polyak_update(target: &mut Mlp, online: &Mlp, tau: f64) -> Result<()> {
    target.polyak_update(online, tau)
}

impl Gradients {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            layers: mlp.layers.iter().map(Layer::zeros_like).collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weight.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weight.data_mut().iter_mut().for_each(|v| *v *= factor);
            l.bias.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.data().iter().chain(&l.bias).all(|&v| v == 0.0))
    }

    /// Index of the first layer holding a non-finite value.
    pub fn first_non_finite_layer(&self) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| !l.weight.data().iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    pub(crate) fn matches(&self, mlp: &Mlp) -> bool {
        self.layers.len() == mlp.layers.len()
            && self
                .layers
                .iter()
                .zip(&mlp.layers)
                .all(|(g, p)| g.weight.shape() == p.weight.shape() && g.bias.len() == p.bias.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_1x1(w: f64, b: f64) -> Mlp {
        Mlp::from_layers(
            vec![Layer {
                weight: Matrix::from_vec(1, 1, vec![w]).unwrap(),
                bias: vec![b],
            }],
            Activation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap()
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = Mlp::new(&[2, 4, 1], Activation::Tanh, OutputActivation::Identity, 7).unwrap();
        let b = Mlp::new(&[2, 4, 1], Activation::Tanh, OutputActivation::Identity, 7).unwrap();
        let bytes = |m: &Mlp| -> Vec<u8> {
            m.params_flat().iter().flat_map(|v| v.to_le_bytes()).collect()
        };
        assert_eq!(bytes(&a), bytes(&b));
        let c = Mlp::new(&[2, 4, 1], Activation::Tanh, OutputActivation::Identity, 8).unwrap();
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn init_zero_biases_and_bounded_weights() {
        let m = Mlp::new(&[3, 3], Activation::Relu, OutputActivation::Identity, 11).unwrap();
        assert!(m.layers()[0].bias.iter().all(|&b| b == 0.0));
        let bound = (6.0f64 / 6.0).sqrt();
        assert!(m.layers()[0].weight.data().iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn param_count_for_two_by_256() {
        let m = Mlp::new(&[2, 256, 256, 1], Activation::Tanh, OutputActivation::Identity, 0)
            .unwrap();
        // 2*256+256 + 256*256+256 + 256*1+1
        assert_eq!(m.param_count(), 66_817);
    }

    #[test]
    fn init_rejects_bad_sizes() {
        for sizes in [&[][..], &[3][..], &[2, 0, 1][..]] {
            let err = Mlp::new(sizes, Activation::Tanh, OutputActivation::Identity, 0).unwrap_err();
            assert!(err.is_config(), "{sizes:?} -> {err}");
        }
    }

    #[test]
    fn single_linear_layer_forward() {
        let m = linear_1x1(2.0, 1.0);
        let (y, _) = m.forward(&[3.0]).unwrap();
        assert_eq!(y, vec![7.0]);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut m = Mlp::new(&[3, 5, 2], Activation::Tanh, OutputActivation::Identity, 1).unwrap();
        let zeros = vec![0.0; m.param_count()];
        m.set_params_flat(&zeros).unwrap();
        assert_eq!(m.predict(&[0.3, -1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn forward_rejects_wrong_input_length() {
        let m = Mlp::new(&[3, 2], Activation::Tanh, OutputActivation::Identity, 1).unwrap();
        assert!(matches!(m.forward(&[1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn linear_backward_closed_form() {
        let m = Mlp::from_layers(
            vec![Layer {
                weight: Matrix::from_rows(&[[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]]).unwrap(),
                bias: vec![0.1, -0.2],
            }],
            Activation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap();
        let x = [0.5, -1.0, 2.0];
        let g = [0.3, -0.7];
        let (_, cache) = m.forward(&x).unwrap();
        let (grads, input_grad) = m.backward(&cache, &g).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(grads.layers[0].weight.get(i, j), g[i] * x[j]);
            }
        }
        assert_eq!(grads.layers[0].bias, g.to_vec());
        let want: Vec<f64> = (0..3)
            .map(|j| (0..2).map(|i| m.layers()[0].weight.get(i, j) * g[i]).sum())
            .collect();
        assert_eq!(input_grad, want);
    }

    #[test]
    fn zero_output_grad_gives_zero_gradients() {
        let m = Mlp::new(&[2, 6, 3], Activation::Tanh, OutputActivation::Tanh, 4).unwrap();
        let (_, cache) = m.forward(&[0.2, 0.9]).unwrap();
        let (grads, input_grad) = m.backward(&cache, &[0.0; 3]).unwrap();
        assert!(grads.is_zero());
        assert!(input_grad.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut m = Mlp::new(&[2, 4, 1], Activation::Tanh, OutputActivation::Identity, 4).unwrap();
        let (_, cache) = m.forward(&[0.2, 0.9]).unwrap();
        let p = m.params_flat();
        m.set_params_flat(&p).unwrap();
        assert!(matches!(m.backward(&cache, &[1.0]), Err(Error::Contract(_))));

        let other = Mlp::new(&[2, 3, 1], Activation::Tanh, OutputActivation::Identity, 4).unwrap();
        let (_, cache) = other.forward(&[0.2, 0.9]).unwrap();
        assert!(matches!(m.backward(&cache, &[1.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn scaled_tanh_stays_in_box() {
        let out = OutputActivation::ScaledTanh {
            low: vec![-2.0, 0.0],
            high: vec![1.0, 5.0],
        };
        let m = Mlp::new(&[1, 8, 2], Activation::Relu, out, 3).unwrap();
        for x in [-100.0, -1.0, 0.0, 1.0, 100.0] {
            let y = m.predict(&[x]).unwrap();
            assert!((-2.0..=1.0).contains(&y[0]) && (0.0..=5.0).contains(&y[1]));
        }
    }

    #[test]
    fn polyak_edge_cases() {
        let online = linear_1x1(2.0, 2.0);
        let mut target = linear_1x1(4.0, 4.0);
        target.polyak_update(&online, 0.5).unwrap();
        assert_eq!(target.params_flat(), vec![3.0, 3.0]);

        let mut t = linear_1x1(4.0, 4.0);
        t.polyak_update(&online, 0.0).unwrap();
        assert_eq!(t.params_flat(), vec![4.0, 4.0]);
        t.polyak_update(&online, 1.0).unwrap();
        assert_eq!(t.params_flat(), online.params_flat());

        assert!(t.polyak_update(&online, 1.5).unwrap_err().is_config());
        assert!(t.polyak_update(&online, -0.1).unwrap_err().is_config());
    }
}
