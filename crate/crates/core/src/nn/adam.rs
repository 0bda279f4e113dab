use super::mlp::{Gradients, Mlp};
use crate::{Error, Result};

/// Bias-corrected Adam state for one network.
#[derive(Debug, Clone)]
pub struct Adam {
    first: Gradients,
    second: Gradients,
    step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(params: &Mlp, lr: f64) -> Self {
        Self {
            first: Gradients::zeros_like(params),
            second: Gradients::zeros_like(params),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one Adam update to `params` in place.
    ///
    /// Non-finite gradients are rejected before anything is modified.
    pub fn step(&mut self, params: &mut Mlp, grads: &Gradients) -> Result<()> {
        if !grads.matches(params) || !self.first.matches(params) {
            return Err(Error::shape("gradient / optimizer state shape does not match parameters"));
        }
        if let Some(layer) = grads.first_non_finite_layer() {
            return Err(Error::NonFiniteGradient { layer });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);

        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };
        let layers = params.layers_mut();
        for (l, layer) in layers.iter_mut().enumerate() {
            let g = &grads.layers[l];
            let m = &mut self.first.layers[l];
            let v = &mut self.second.layers[l];
            update(
                layer.weight.data_mut(),
                g.weight.data(),
                m.weight.data_mut(),
                v.weight.data_mut(),
            );
            update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias);
        }
        Ok(())
    }
}
