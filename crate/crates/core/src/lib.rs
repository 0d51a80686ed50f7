//! Configuration-model toolkit: uniform random multigraphs with a given
//! degree sequence and the probability that they are simple, computed
//! exactly on small instances, estimated by Monte Carlo, and predicted by
//! asymptotic formulas.

pub mod asympt;
pub mod confmodel;
pub mod degseq;
pub mod error;
pub mod exact;
pub mod json;
pub mod mc;

pub use asympt::AsymptoticReport;
pub use confmodel::{Configuration, Multigraph, SampleStatistics, Sampler};
pub use degseq::{DegreeSequence, DegreeSource, DegreeStats};
pub use error::{Error, Result};
pub use exact::ExactReport;
pub use mc::{Histogram, SimplicityEstimate, Statistic};
