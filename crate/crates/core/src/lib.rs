//! Budget-aware sequential experiment selection for scaling-law fitting.
//!
//! Given a finite pool of runnable experiments with heterogeneous costs and a
//! high-cost target region, this crate sequentially picks which experiments to
//! run so that a parametric scaling law fitted on the selected points predicts
//! the target region as accurately as possible under a strict budget.
//!
//! The pieces, bottom to top:
//!
//! * [`law`] — parametric law families, analytic parameter Jacobians, cost models.
//! * [`fitter`] — multi-start bounded nonlinear least squares.
//! * [`posterior`] — turns the multi-start fits into a mixture of local
//!   Gaussians ("basins"): local covariances, prediction-space clustering,
//!   representative selection, mixture weights.
//! * [`acquisition`] — scores candidates by expected reduction of target-region
//!   prediction uncertainty per unit cost, plus D-opt / V-opt baseline scores.
//! * [`engine`] — runs full episodes: warm start, select/observe/refit loop,
//!   budget accounting, checkpoint metrics, baseline policies.
//! * [`bench`] — instance file format, synthetic instance generation, the
//!   shipped instance suite, and report emission.

pub mod acquisition;
pub mod bench;
pub mod engine;
pub mod error;
pub mod fitter;
pub mod law;
pub mod posterior;

pub use error::{Error, Result};

/// Default cost exponent for the acquisition score `(dV_intra + dV_inter) / c^alpha`.
pub const DEFAULT_ALPHA: f64 = 0.4;

/// Default number of random initializations per refit.
pub const DEFAULT_N_STARTS: usize = 64;

/// Default budget checkpoint fractions.
pub const DEFAULT_CHECKPOINTS: [f64; 3] = [0.01, 0.05, 0.10];

/// Number of warm-start points for the model-based policies: `ceil(2.5 p)`.
pub fn warm_start_count(param_count: usize) -> usize {
    // 2.5p rounds up so the linearization is never under-provisioned.
    (5 * param_count).div_ceil(2)
}

/// SplitMix64 finalizer; used to derive independent sub-seeds from
/// (episode seed, round index) pairs so trajectories stay reproducible.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
