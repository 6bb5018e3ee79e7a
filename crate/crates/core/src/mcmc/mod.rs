//! Slice-within-Gibbs sampling for every model in the lattice.

mod chain;
mod slice;
mod sweep;

pub use chain::{
    initial_state, run_chain, run_multi, ConfigError, MultiChain, PosteriorSamples, SamplerConfig,
    SamplerFault,
};
pub use slice::{slice_sample_scalar, SliceError, Support, MAX_CONTRACTIONS, MAX_STEPS};
pub use sweep::{
    coord_support, coord_value, gibbs_sweep, set_coord, sweep_coordinates, Coord, SliceWidths,
    SweepFault,
};
