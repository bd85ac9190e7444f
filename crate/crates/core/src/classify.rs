//! Three-way banding of groups by where their rank interval falls.
//!
//! With `N` groups, the top half is ranks `1..=N/2`. A group is `Top` when its
//! interval's upper end is at most `N/2` and `Bottom` when its lower end
//! exceeds `⌈N/2⌉`. For odd `N` the middle rank `(N+1)/2` belongs to neither
//! half. Half-integer midranks are compared as they are, without rounding.

use std::fmt;

use crate::error::{Error, Result};
use crate::sim::RankDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    Top,
    Bottom,
    Uncertain,
}

impl Band {
    pub fn as_str(self) -> &'static str {
        match self {
            Band::Top => "top",
            Band::Bottom => "bottom",
            Band::Uncertain => "uncertain",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandAssignment {
    pub group_id: String,
    pub band: Band,
    pub rank_interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub assignments: Vec<BandAssignment>,
    /// Groups assigned `Top` or `Bottom`.
    pub decided: usize,
}

impl Classification {
    pub fn count(&self, band: Band) -> usize {
        self.assignments.iter().filter(|a| a.band == band).count()
    }
}

/// Band for a rank interval among `n_groups`.
pub fn band_for_interval(low: f64, high: f64, n_groups: usize) -> Band {
    let top_limit = n_groups as f64 / 2.0;
    let bottom_limit = n_groups.div_ceil(2) as f64;
    if high <= top_limit {
        Band::Top
    } else if low > bottom_limit {
        Band::Bottom
    } else {
        Band::Uncertain
    }
}

pub fn classify_by_rank_interval(rank_dists: &[RankDistribution], n_groups: usize) -> Result<Classification> {
    if rank_dists.len() != n_groups {
        return Err(Error::LengthMismatch {
            expected: n_groups,
            actual: rank_dists.len(),
        });
    }
    if n_groups < 2 {
        return Err(Error::TooFewGroups(n_groups));
    }
    let assignments: Vec<BandAssignment> = rank_dists
        .iter()
        .map(|d| BandAssignment {
            group_id: d.group_id.clone(),
            band: band_for_interval(d.interval_low, d.interval_high, n_groups),
            rank_interval: (d.interval_low, d.interval_high),
        })
        .collect();
    let decided = assignments.iter().filter(|a| a.band != Band::Uncertain).count();
    Ok(Classification { assignments, decided })
}
