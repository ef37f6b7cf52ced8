//! Plackett-Luce voting: profile sampling, voting rules, population limits,
//! adversarial instances and distortion measurement.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructions;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod lab;
pub mod population;
pub mod report;
pub mod rules;
pub mod sampling;
pub mod seed;
pub mod sigmoid;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Candidate, Instance, SymmetricSubsetFamily, VoterType};
pub use population::{population_stats, PopulationStats};
pub use rules::{Rule, RuleOutcome, TallyStats, TieBreakOrder};
pub use sampling::{sample_profile, sample_tally, Profile, Ranking};
