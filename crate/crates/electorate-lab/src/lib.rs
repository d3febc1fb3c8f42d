//! A laboratory for spatial voting with abstention.
//!
//! Voters live in a Euclidean policy space and value candidates through a
//! distance-based utility curve drawn from four families (linear, concave,
//! convex, reverse-S). A turnout-aware choice layer turns utility gaps into
//! votes or abstentions, deterministically or through a noise CDF. On top of
//! that sit:
//!
//! - synthetic electorates and elections written as cast-vote-record (CVR)
//!   files ([`electorate`], [`cvr`]),
//! - group diagnostics keyed by ballot-measure agreement: predictability,
//!   polarization, flip effects, and correlations ([`groups`]),
//! - least-squares machinery, trend predictions, and a functional-form
//!   classifier for abstention against polarization ([`regress`]),
//! - two-candidate platform competition on a discretized voter density:
//!   pairwise margins, Condorcet winners, pure equilibria, and best-response
//!   dynamics ([`compete`]).
//!
//! Every random draw flows from one master seed through named, per-voter
//! substreams ([`rng`]), so results are bitwise reproducible at any thread
//! count. The `cli` feature adds a command-line front end over a single JSON
//! configuration ([`config`]).

pub mod choice;
#[cfg(feature = "cli")]
pub mod cli;
pub mod compete;
pub mod config;
pub mod cvr;
pub mod electorate;
pub mod groups;
pub mod loss;
pub mod presets;
pub mod regress;
pub mod rng;
pub mod space;

pub use choice::{Abstention, ChoiceDistribution, ChoiceMode, ChoiceModel, Decision, NoiseCdf};
pub use config::{AnalysisConfig, ExperimentConfig};
pub use electorate::{
    BallotRecord, Choice, ElectorateSpec, IdealDistribution, MeasureResponse, Party, RaceSpec,
    RaceType,
};
pub use loss::{LossFamily, LossSpec};
pub use space::Position;
