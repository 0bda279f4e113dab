use std::io::Write;

use crate::agent::fmt_float;
use crate::envs::FsmConfig;
use crate::nn::{Checkpoint, Matrix, Mlp};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
    pub value: f64,
}

pub const GRID_COLUMNS: [&str; 5] = ["x", "y", "action_dx", "action_dy", "value"];

fn scalar_net<'a>(ckpt: &'a Checkpoint, name: &str, in_dim: usize) -> Result<&'a Mlp> {
    let net = ckpt
        .network(name)
        .ok_or_else(|| Error::Format(format!("checkpoint has no network {name:?}")))?;
    if net.input_dim() != in_dim || net.output_dim() != 1 {
        return Err(Error::shape(format!(
            "{name} maps {} -> {}, expected {in_dim} -> 1",
            net.input_dim(),
            net.output_dim()
        )));
    }
    Ok(net)
}

/// Policy action and critic value on an `R × R` lattice over `[0, N]²`, row-major in `y`
/// then `x`.
///
/// The value is `min(Q1, Q2)` at `(s, pi(s))` for double-critic checkpoints and the ensemble
/// mean for ensemble checkpoints.
pub fn dump_policy_grid(ckpt: &Checkpoint, cfg: &FsmConfig, resolution: usize) -> Result<Vec<GridPoint>> {
    if resolution < 2 {
        return Err(Error::config("grid resolution must be >= 2"));
    }
    let policy = ckpt
        .network("policy")
        .ok_or_else(|| Error::Format("checkpoint has no policy network".into()))?;
    if policy.input_dim() != 2 || policy.output_dim() != 2 {
        return Err(Error::shape(format!(
            "maze policy must map 2 -> 2, checkpoint policy maps {} -> {}",
            policy.input_dim(),
            policy.output_dim()
        )));
    }
    let critics: Vec<&Mlp> = if ckpt.network("critic_1").is_some() {
        vec![scalar_net(ckpt, "critic_1", 4)?, scalar_net(ckpt, "critic_2", 4)?]
    } else {
        let members: Vec<String> = ckpt
            .header
            .networks
            .iter()
            .map(|n| n.name.clone())
            .filter(|n| n.starts_with("member_") && !n.starts_with("member_target_"))
            .collect();
        if members.is_empty() {
            return Err(Error::Format("checkpoint has no critics".into()));
        }
        members.iter().map(|n| scalar_net(ckpt, n, 4)).collect::<Result<_>>()?
    };
    let use_min = ckpt.network("critic_1").is_some();

    let n = cfg.side();
    let mut obs = Vec::with_capacity(resolution * resolution);
    let mut pos = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let x = n * i as f64 / (resolution - 1) as f64;
            let y = n * j as f64 / (resolution - 1) as f64;
            pos.push((x, y));
            obs.push(cfg.observe(x, y));
        }
    }
    let states = Matrix::from_rows(&obs)?;
    let actions = policy.predict_batch(&states)?;
    let input = states.hstack(&actions)?;
    let values: Vec<Vec<f64>> = critics
        .iter()
        .map(|c| Ok(c.predict_batch(&input)?.into_vec()))
        .collect::<Result<_>>()?;
    Ok(pos
        .iter()
        .enumerate()
        .map(|(r, &(x, y))| {
            let vs = values.iter().map(|v| v[r]);
            let value = if use_min {
                vs.fold(f64::INFINITY, f64::min)
            } else {
                vs.sum::<f64>() / values.len() as f64
            };
            GridPoint {
                x,
                y,
                dx: actions.get(r, 0),
                dy: actions.get(r, 1),
                value,
            }
        })
        .collect())
}

pub fn write_grid_csv<W: Write>(points: &[GridPoint], mut w: W) -> Result<()> {
    writeln!(w, "{}", GRID_COLUMNS.join(","))?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(p.x),
            fmt_float(p.y),
            fmt_float(p.dx),
            fmt_float(p.dy),
            fmt_float(p.value)
        )?;
    }
    Ok(())
}
