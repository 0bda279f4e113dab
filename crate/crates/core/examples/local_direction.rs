//! Best-of-many local samples around an action point along the critic's action gradient.
//!
//! `cargo run --example local_direction`

use zospi::agent::{action_gradients, new_critic};
use zospi::nn::{Activation, Matrix};
use zospi::rng::rng_from_seed;
use zospi::zeroth_order::{sample_local, select_best};

fn main() -> zospi::Result<()> {
    let critic = new_critic(2, 2, &[32, 32], Activation::Tanh, 7)?;
    let s = [0.4, -0.2];
    let a0 = [0.1, 0.3];
    let q = |a: &[f64]| {
        let input: Vec<f64> = s.iter().chain(a).copied().collect();
        critic.predict(&input).unwrap()[0]
    };

    let grad = action_gradients(&critic, &Matrix::row_vector(&s), &Matrix::row_vector(&a0))?;
    let g = grad.row(0);

    let mut rng = rng_from_seed(0);
    for &n in &[10, 100, 1_000, 10_000] {
        let local = sample_local(&a0, 1e-3, n, &mut rng)?;
        let best = select_best(q, &a0, &local, &[])?;
        let step: Vec<f64> = best.action.iter().zip(&a0).map(|(a, b)| a - b).collect();
        println!("{n:>6} samples: cosine to gradient {:.4}", cosine(&step, g));
    }
    Ok(())
}

fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nu * nv)
}
