//! Diagnostics for sequences of surfaces and their lifts: the quasi-maximum
//! selection, blow-up rescaling, normal-graph distances between lifts and
//! degeneration experiments on catalog families.

mod blowup;
mod experiment;
mod graph;
mod quasi_max;

pub use blowup::{blowup_rescale, BlowUp};
pub use experiment::{
    degeneration_experiment, verdict, ConvergenceReport, ExperimentOptions, Family, StepRecord, Thresholds,
    Verdict,
};
pub use graph::{graph_distance, GraphDistance, Window};
pub use quasi_max::{quasi_maximum, quasi_maximum_holds, DiscreteMetricSpace, MetricError};

use crate::hyp3::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DegenerationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("the other lift is not a normal graph over the reference near node ({i}, {j})")]
    NotAGraph { i: usize, j: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(&'static str),
}
