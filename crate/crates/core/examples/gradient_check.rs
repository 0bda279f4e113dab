//! Compares backpropagated gradients of a small network against central finite differences.
//!
//! `cargo run --example gradient_check`

use zospi::nn::{Activation, Mlp, OutputActivation};

fn main() -> zospi::Result<()> {
    let h = 1e-5;
    let net = Mlp::new(&[3, 8, 8, 2], Activation::Tanh, OutputActivation::Tanh, 42)?;
    let x = [0.3, -0.7, 1.1];
    // Scalar loss L = w . f(x), so dL/df = w.
    let w = [0.8, -1.3];
    let loss = |m: &Mlp, x: &[f64]| -> f64 {
        let y = m.predict(x).unwrap();
        y.iter().zip(&w).map(|(a, b)| a * b).sum()
    };

    let (_, cache) = net.forward(&x)?;
    let (grads, input_grad) = net.backward(&cache, &w)?;
    let analytic = grads.to_flat();

    let mut worst_param: f64 = 0.0;
    let params = net.params_flat();
    let mut probe = net.clone();
    for i in 0..params.len() {
        let mut p = params.clone();
        p[i] += h;
        probe.set_params_flat(&p)?;
        let up = loss(&probe, &x);
        p[i] -= 2.0 * h;
        probe.set_params_flat(&p)?;
        let down = loss(&probe, &x);
        let fd = (up - down) / (2.0 * h);
        worst_param = worst_param.max(rel_err(analytic[i], fd));
    }

    let mut worst_input: f64 = 0.0;
    for i in 0..x.len() {
        let mut xp = x;
        xp[i] += h;
        let mut xm = x;
        xm[i] -= h;
        let fd = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * h);
        worst_input = worst_input.max(rel_err(input_grad[i], fd));
    }

    println!("parameters checked: {}", params.len());
    println!("max relative error, parameters: {worst_param:.3e}");
    println!("max relative error, inputs:     {worst_input:.3e}");
    Ok(())
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}
