//! Zeroth-order machinery: candidate sampling, best-candidate selection, the
//! consistent-iteration optimizer, sampling-easy test objectives and range sweeps.
//!
//! Samplers take an explicit RNG; parallel callers derive one stream per worker with
//! [`crate::rng::stream_rng`].

mod consistent;
mod range_sweep;
mod sampling;
mod sampling_easy;

pub use consistent::{zo_consistent_iterate, RestartRecord, Sense, ZoIterConfig, ZoOutcome};
pub use range_sweep::{dense_grid_optimum, range_sweep, sweep_once, RangeSweepConfig, SweepRow, SweepTable, SWEEP_STREAM};
pub use sampling::{
    argmax_candidates, sample_global, sample_local, select_best, ActionSpace, SamplerConfig, Selection,
    Source,
};
pub use sampling_easy::{make_sampling_easy, ConvergenceBudget, SamplingEasyFn, SamplingEasySpec};
