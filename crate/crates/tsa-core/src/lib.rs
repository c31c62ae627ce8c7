//! Multi-machine power-system transient stability toolkit.
//!
//! Simulates post-fault rotor dynamics under the classical model (constant
//! EMF behind transient reactance, constant-impedance loads, network reduced
//! to generator internal nodes) and characterizes stability through three
//! machine views of the same trajectory:
//!
//! - **individual machines** in the system center-of-inertia frame (I-SYS),
//! - **equivalent machines** aggregating a critical / non-critical group
//!   split (CR-SYS, NCR-SYS),
//! - **inner-group machines**: each machine's motion relative to its own
//!   group's equivalent (I-CR, I-NCR).
//!
//! Every view is a [`frames::RelativeMachineSeries`] with a genuine equation
//! of motion `M dω/dt = f`, so kinetic/potential energy interchange is exact
//! and equal-area reasoning applies unchanged. The [`stability`] module scans
//! any series for dynamic liberation points (DLP: restraint reaches zero
//! while relative speed persists) and dynamic stationary points (DSP: speed
//! reaches zero first), swing by swing.
//!
//! Entry points: [`model::build_case`] to load a case file,
//! [`simulate::simulate`] to integrate, [`report::run_scenario`] for the
//! whole pipeline.

pub mod cases;
pub mod error;
pub mod frames;
pub mod grouping;
pub mod model;
pub mod numeric;
pub mod report;
pub mod simulate;
pub mod stability;

pub use error::Error;
pub use frames::{GroupPattern, Reference, RelativeMachineSeries, Subject};
pub use model::{MachineParams, ReducedNetworkStage, Stage, SystemCase};
pub use simulate::Trajectory;
pub use stability::{EnergyLedger, KimbarkCurve, SwingEvent, SwingEventKind, SystemVerdict};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
