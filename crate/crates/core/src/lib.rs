//! Radiation-thermometry error correction for industrial furnaces.
//!
//! The crate is layered bottom-up:
//!
//! * [`radiometry`], [`curve`], [`quadrature`]: Planck radiance, spectral
//!   curves and band integration.
//! * [`models`]: forward measurement models A–D and the irradiance
//!   decomposition.
//! * [`inverse`]: tube-temperature recovery by bisection.
//! * [`sensitivity`]: perturbation sweeps and uncertainty budgets.
//! * [`surrogate`]: the bias-free MLP that replaces per-pixel bisection.
//! * [`frame`] and [`service`]: thermal frames, parameter masks, ROI
//!   statistics, persistence and the HTTP monitoring API.
//! * [`cli`]: the `radtherm` command line.

pub mod cli;
pub mod curve;
pub mod error;
pub mod frame;
pub mod inverse;
pub mod models;
pub mod quadrature;
pub mod radiometry;
pub mod sensitivity;
pub mod service;
pub mod surrogate;

pub use curve::SpectralCurve;
pub use error::{Error, Result};
pub use inverse::{invert_batch, invert_signal, InversionResult, SolverConfig};
pub use models::{
    decompose, forward_signal, FurnaceScene, ModelKind, ParameterRanges, PreparedModel,
    SceneConditions, SceneParameters, SignalDecomposition,
};
pub use quadrature::{integrate_band, QuadratureConfig, QuadratureScheme};
pub use radiometry::{planck_radiance, Band, PhysicalConstants};
