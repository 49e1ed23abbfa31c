//! Significance tests, effect sizes, power analysis and sampling-design
//! support for citation-based research assessment.
//!
//! The excellence indicator of a university ranking reports the proportion
//! of an institution's publications among the top-10% most cited. This
//! crate tests such proportions (against the 10% expectation, or between
//! institutions), supplements every test with Cohen's h / w and Cramér's V
//! effect sizes and their qualitative bands, solves for power and sample
//! size, supports two-stage cluster sampling by publication year, and
//! calibrates all analytic results by seeded Monte Carlo simulation.

pub mod cluster;
pub mod effect;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod normal;
pub mod power;
pub mod proportions;
pub mod ranking;

pub use effect::{Band, EffectSize, Measure, TwoByTwoTable};
pub use error::{Error, Result};
pub use proportions::{ConfidenceInterval, InstitutionRecord, Tails, TestResult};
pub use ranking::RankingDataset;
