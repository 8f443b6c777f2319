//! THP-precoded multi-user MISO NOMA: channel generation, superposition and
//! Tomlinson-Harashima precoding, scheduling, rate evaluation, SCA-based
//! beam and power design, a zero-forcing baseline and an experiment harness.

pub mod channel;
pub mod conic;
pub mod constellation;
pub mod error;
pub mod harness;
pub mod rates;
pub mod sca;
pub mod scheduling;
pub mod thp;
pub mod zf;

pub use channel::{generate_population, CVector, ChannelVector, SystemConfig, UserPopulation};
pub use error::{Error, Result};
pub use rates::{Binding, PowerSplit, RateReport};
pub use sca::{BeamPowerSolution, ScaConfig, ScaPoint};
pub use scheduling::{ClusterAssignment, SchedulerTrace};
