//! Statistical uncertainty for league tables built from categorical quality
//! profiles.
//!
//! Groups (for example university departments) are described by the share
//! of their outputs at each of five star levels and by their full-time
//! equivalent staff. The crate provides
//!
//! * deterministic scoring under arbitrary weightings ([`profile`]),
//! * normal-approximation standard errors and intervals, and the count of
//!   groups whose interval overlaps the overall mean ([`uncertainty`]),
//! * Monte Carlo rank distributions under a single-output bootstrap and a
//!   "true score" model, plus an exact enumeration oracle ([`sim`]),
//! * three-way banding by rank interval ([`classify`]),
//! * CSV ingest ([`ingest`]) and the report pipeline used by the
//!   `league-uncertainty` binary ([`report`]).
//!
//! ```
//! use league_uncertainty::{GroupSubmission, QualityProfile, WeightScheme, weighted_score};
//!
//! let profile = QualityProfile::from_percentages([25.0, 40.0, 30.0, 5.0, 0.0])?;
//! let group = GroupSubmission::new("Cambridge", "UOA22", 35.0, profile)?;
//! let funding = weighted_score(&group.profile, &WeightScheme::funding());
//! assert!((funding - 3.25).abs() < 1e-12);
//! # Ok::<(), league_uncertainty::Error>(())
//! ```

pub mod classify;
pub mod error;
pub mod ingest;
pub mod profile;
pub mod ranking;
pub mod report;
pub mod rng;
pub mod sim;
pub mod svg;
pub mod uncertainty;

pub use classify::{classify_by_rank_interval, Band, BandAssignment, Classification};
pub use error::{Error, Result};
pub use ingest::{parse_league_table, read_league_table, validate_groups, write_league_table, IngestReport};
pub use profile::{
    mean_score, pooled_profile, score_variance, weighted_score, GroupSubmission, QualityProfile, StarLevel, WeightScheme,
};
pub use ranking::{rank_with_ties, TiePolicy};
pub use rng::CounterRng;
pub use sim::{
    exact_single_output_rank_distribution, simulate_ranks, simulate_single_output_ranks, simulate_true_score_ranks,
    Model, RankDistribution, RankHistogram, SimulationConfig,
};
pub use uncertainty::{
    confidence_interval, count_overall_mean_overlaps, effective_sample_size, standard_error, BaselineMode, ScoreEstimate,
};

// Code blocks in the guide under `book/` run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/uncertainty.md")]
    mod uncertainty {}
    #[doc = include_str!("../../../book/src/ranks.md")]
    mod ranks {}
    #[doc = include_str!("../../../book/src/bands.md")]
    mod bands {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
