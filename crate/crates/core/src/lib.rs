//! Finite-volume solver for multilane traffic with nonlocal lane changing.
//!
//! Each lane carries a density in `[0, 1]` transported by an LWR flux, either
//! the local Godunov flux or a downstream-nonlocal one. Lanes exchange mass
//! through a source driven by (possibly averaged) velocity differences. A step
//! is a convective update followed by a relaxation update.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod config;
pub mod convolution;
pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod grid;
pub mod kernel;
pub mod output;
pub mod run;
pub mod scalar;
pub mod scenarios;
pub mod scheme;
pub mod source;
pub mod state;
pub mod velocity;

pub use convolution::{convolve, convolve_at, Boundary};
pub use diagnostics::{Check, EntropyReport, VerifyReport};
pub use error::{Error, Result};
pub use flux::FluxMode;
pub use grid::{CflController, CflMode, Grid1D, TimeStep};
pub use kernel::{DiscreteKernel, KernelFamily, KernelSpec};
pub use run::{run, run_with, InitialCondition, RunConfig, RunOutput, SeriesRow, Snapshot};
pub use scalar::Scalar;
pub use scheme::{Scheme, StepRecord};
pub use source::SourceMode;
pub use state::{LaneGridState, Profile};
pub use velocity::{VelocityLaw, VelocityModel};

pub type Grid = Grid1D<f64>;
pub type State = LaneGridState<f64>;
pub type Model = VelocityModel<f64>;
pub type Law = VelocityLaw<f64>;
pub type Kernel = KernelSpec<f64>;
pub type Source = SourceMode<f64>;
pub type Flux = FluxMode<f64>;
pub type Cfl = CflController<f64>;
pub type Config = RunConfig<f64>;
pub type Output = RunOutput<f64>;
pub type Solver = Scheme<f64>;
