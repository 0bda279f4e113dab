//! Upper-confidence scoring with a bootstrapped critic ensemble.
//!
//! `cargo run --example ucb_ensemble`

use zospi::bootstrap_ucb::{ucb_from_values, ucb_select_action, CriticEnsemble};
use zospi::nn::{Activation, Matrix};
use zospi::rng::rng_from_seed;
use zospi::zeroth_order::{sample_global, sample_local, ActionSpace};

fn main() -> zospi::Result<()> {
    println!("K=2 closed form: values (1, 3), phi 0.5 -> {}", ucb_from_values(&[1.0, 3.0], 0.5));
    println!("equal members collapse to the mean: {}", ucb_from_values(&[2.5; 4], 3.0));

    let ens = CriticEnsemble::new(2, 2, &[16, 16], Activation::Relu, 3e-4, 5, 11)?;
    let space = ActionSpace::symmetric(2, 1.0)?;
    let mut rng = rng_from_seed(3);
    let s = [0.5, 0.5];
    let a0 = [0.0, 0.0];
    let local = sample_local(&a0, 0.1, 25, &mut rng)?;
    let global = sample_global(&space, 25, &mut rng);

    for phi in [0.0, 1.0, 4.0] {
        let sel = ucb_select_action(&ens, &s, &a0, &local, &global, phi)?;
        let v = ens.member_values(&Matrix::row_vector(&s), &Matrix::row_vector(&sel.action), false)?;
        let members: Vec<String> = v.iter().map(|m| format!("{:.3}", m[0])).collect();
        println!(
            "phi {phi}: chose {:?} from {:?} set, score {:.4}, members [{}]",
            sel.action.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>(),
            sel.source,
            sel.score,
            members.join(", ")
        );
    }
    Ok(())
}
