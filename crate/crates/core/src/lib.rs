//! Dynamic epistemic logic as a dynamical system on finite pointed Kripke
//! models: bisimulation metrics, product update with multi-pointed action
//! models, orbit analysis, and a Turing machine to action model compiler.

pub mod action;
pub mod bisim;
pub mod dynamics;
pub mod error;
pub mod formula;
pub mod gen;
pub mod kripke;
pub mod metrics;
pub mod turing;

pub use action::{ActionModel, CleanMap};
pub use dynamics::{Orbit, PeriodReport, RecurrenceReport};
pub use error::{Error, Result};
pub use formula::{Formula, Signature};
pub use kripke::{ModelBuilder, PointedModel};
pub use metrics::{Distance, MetricSpec};
pub use turing::{CompiledMachine, TapeConfig, TuringMachine};
