use std::io::Write;

use super::config::UpdateMode;
use super::policy::SourceFractions;
use crate::Result;

/// Formats a float with 17 significant digits so it parses back to the same bits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Statistics of one finished training episode; losses are averaged over the updates made
/// during the episode and are absent when none were made.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub env_step: usize,
    pub episode: usize,
    pub ret: f64,
    /// Two entries for the double critic, one per member for the ensemble.
    pub critic_losses: Vec<f64>,
    pub policy_loss: Option<f64>,
    pub sources: Option<SourceFractions>,
    pub ensemble_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub env_step: usize,
    pub mean_return: f64,
    pub std_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub mode: UpdateMode,
    /// Number of critics whose losses are logged (2, or the ensemble size).
    pub n_critics: usize,
    pub episodes: Vec<EpisodeRecord>,
    pub evals: Vec<EvalRecord>,
}

pub const EPISODE_COLUMNS: [&str; 9] = [
    "env_step",
    "episode",
    "return",
    "critic_loss_1",
    "critic_loss_2",
    "policy_loss",
    "frac_a_plus_local",
    "frac_a_plus_global",
    "frac_a_plus_current",
];

pub const EVAL_COLUMNS: [&str; 3] = ["env_step", "mean_return", "std_return"];

impl TrainLog {
    pub fn new(mode: UpdateMode, n_critics: usize) -> Self {
        Self {
            mode,
            n_critics,
            episodes: Vec::new(),
            evals: Vec::new(),
        }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = EPISODE_COLUMNS.iter().map(|s| s.to_string()).collect();
        if self.mode == UpdateMode::ZospiUcb {
            h.extend((0..self.n_critics).map(|k| format!("member_loss_{k}")));
            h.push("ensemble_std".into());
        }
        h
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        for e in &self.episodes {
            let loss = |i: usize| opt(e.critic_losses.get(i).copied());
            let mut row = vec![
                e.env_step.to_string(),
                e.episode.to_string(),
                fmt_float(e.ret),
                loss(0),
                loss(1),
                opt(e.policy_loss),
                opt(e.sources.map(|s| s.local)),
                opt(e.sources.map(|s| s.global)),
                opt(e.sources.map(|s| s.current)),
            ];
            if self.mode == UpdateMode::ZospiUcb {
                row.extend((0..self.n_critics).map(loss));
                row.push(opt(e.ensemble_std));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_eval_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", EVAL_COLUMNS.join(","))?;
        for e in &self.evals {
            writeln!(w, "{},{},{}", e.env_step, fmt_float(e.mean_return), fmt_float(e.std_return))?;
        }
        Ok(())
    }

    /// Mean of the last `window` evaluation means.
    pub fn final_eval(&self, window: usize) -> Option<f64> {
        if self.evals.is_empty() {
            return None;
        }
        let tail = &self.evals[self.evals.len().saturating_sub(window)..];
        Some(tail.iter().map(|e| e.mean_return).sum::<f64>() / tail.len() as f64)
    }
}
