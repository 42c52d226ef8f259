//! Correntropy-domain Wiener filtering.
//!
//! The crate implements the functional Wiener filter with nearest-neighbor
//! evaluation ([`fwf`]), the Gaussian-kernel lag statistics it is built
//! from ([`kernel`]), an exact kd-tree ([`neighbors`]), linear and kernel
//! adaptive reference filters ([`baselines`]), benchmark signal generators
//! ([`signal`]) and a cross-validated experiment harness ([`evalbench`]).

// NaN must fail range checks, hence `!(x > 0.0)` style comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod error;
pub mod evalbench;
pub mod fwf;
pub mod kernel;
pub mod linalg;
pub mod neighbors;
pub mod persist;
pub mod signal;

pub use error::{FwfError, Result};
pub use evalbench::{
    kfold, mse, run_experiment, timing_scaling, ExperimentConfig, MethodSpec, ResultTable,
    SignalSpec,
};
pub use fwf::{fit, tune, tune_alpha, AlphaSetting, FwfConfig, FwfModel, WidthSetting};
pub use kernel::{gaussian, gaussian_inverse, KernelWidth, LagKind, LagProfile};
pub use linalg::Matrix;
pub use neighbors::{Neighbor, NeighborIndex};
pub use signal::{embed, embed_pair, standardize, Dataset, LorenzParams, MgParams, Series};

/// Formats a float with 17 significant digits, enough for an exact
/// round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
