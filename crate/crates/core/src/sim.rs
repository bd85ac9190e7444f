//! Monte Carlo rank distributions and the exact enumeration oracle.
//!
//! Two models are supported:
//!
//! * [`Model::SingleOutput`]: each group contributes one output per iteration,
//!   drawn from its quality profile, and groups are ranked on the star value
//!   of that output. Ties are frequent because there are only five values.
//! * [`Model::TrueScore`]: each group's score is drawn from
//!   `Normal(estimate, standard_error)` and groups are ranked on the draws.
//!
//! Group `g`'s draw at iteration `t` depends only on `(seed, g, t)`, see
//! [`crate::rng`]. Iterations are processed in fixed-size shards whose
//! integer histograms are summed, so the output is identical for any number
//! of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::{weighted_score, GroupSubmission, QualityProfile, StarLevel, WeightScheme};
use crate::ranking::{half_ranks_into, TiePolicy};
use crate::rng::CounterRng;
use crate::uncertainty::{normal_quantile, standard_error, DEFAULT_LEVEL};

/// Default number of simulation rounds.
pub const DEFAULT_ITERATIONS: u64 = 10_000;

/// Largest instance accepted by [`exact_single_output_rank_distribution`].
pub const MAX_ENUMERATION_GROUPS: usize = 8;

const SHARD_SIZE: u64 = 2048;

/// Relative slack when comparing a cumulative mass against `q · total`.
const QUANTILE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    SingleOutput,
    #[default]
    TrueScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub iterations: u64,
    pub seed: u64,
    pub tie_policy: TiePolicy,
    pub model: Model,
    pub level: f64,
    /// Worker threads; `None` uses the global rayon pool. Results do not
    /// depend on this value.
    pub workers: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            tie_policy: TiePolicy::Midrank,
            model: Model::TrueScore,
            level: DEFAULT_LEVEL,
            workers: None,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::NoIterations);
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidLevel(self.level));
        }
        Ok(())
    }
}

/// Mass assigned to each possible rank of one group among `n` groups.
///
/// Ranks are stored in half units so midranks such as 1.5 index exactly.
/// Monte Carlo histograms hold integer counts; the enumeration oracle holds
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RankHistogram {
    n_groups: usize,
    mass: Vec<f64>,
}

impl RankHistogram {
    pub(crate) fn from_mass(n_groups: usize, mass: Vec<f64>) -> Self {
        debug_assert_eq!(mass.len(), 2 * n_groups + 1);
        Self { n_groups, mass }
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    /// `(rank, mass)` pairs with non-zero mass, in increasing rank.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(half, &m)| (half as f64 / 2.0, m))
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Mass at `rank` (an integer or half-integer).
    pub fn mass_at(&self, rank: f64) -> f64 {
        let half = (rank * 2.0).round();
        if half < 0.0 || (half - rank * 2.0).abs() > 1e-9 {
            return 0.0;
        }
        self.mass.get(half as usize).copied().unwrap_or(0.0)
    }

    pub fn probability(&self, rank: f64) -> f64 {
        self.mass_at(rank) / self.total()
    }

    /// Normalised `(rank, probability)` pairs.
    pub fn probabilities(&self) -> Vec<(f64, f64)> {
        let total = self.total();
        self.iter().map(|(r, m)| (r, m / total)).collect()
    }

    pub fn mean(&self) -> f64 {
        let total = self.total();
        self.iter().map(|(r, m)| r * m).sum::<f64>() / total
    }

    /// Inverse-CDF quantile: the smallest rank whose cumulative mass reaches
    /// `q · total`. For `m` samples this is the `⌈q·m⌉`-th smallest sample;
    /// `q · m` is snapped to an integer when within `1e-9 · m` of one so that
    /// representation error in `q` (e.g. `(1 − 0.95) / 2`) cannot shift the
    /// order statistic.
    pub fn quantile(&self, q: f64) -> f64 {
        let total = self.total();
        let threshold = q * total - QUANTILE_SLACK * total;
        let mut cumulative = 0.0;
        let mut last = 0.0;
        for (half, &m) in self.mass.iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            cumulative += m;
            last = half as f64 / 2.0;
            if cumulative >= threshold {
                return last;
            }
        }
        last
    }

    /// Total variation distance between the normalised histograms.
    pub fn total_variation(&self, other: &RankHistogram) -> f64 {
        let (ta, tb) = (self.total(), other.total());
        let len = self.mass.len().max(other.mass.len());
        (0..len)
            .map(|i| {
                let a = self.mass.get(i).copied().unwrap_or(0.0) / ta;
                let b = other.mass.get(i).copied().unwrap_or(0.0) / tb;
                (a - b).abs()
            })
            .sum::<f64>()
            / 2.0
    }
}

/// Distribution of one group's rank with its median and central interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    pub group_id: String,
    pub histogram: RankHistogram,
    pub median: f64,
    pub interval_low: f64,
    pub interval_high: f64,
}

impl RankDistribution {
    /// Summarises `histogram` with its median and central `level` interval.
    pub fn from_histogram(group_id: impl Into<String>, histogram: RankHistogram, level: f64) -> Self {
        let tail = (1.0 - level) / 2.0;
        Self {
            group_id: group_id.into(),
            median: histogram.quantile(0.5),
            interval_low: histogram.quantile(tail),
            interval_high: histogram.quantile(1.0 - tail),
            histogram,
        }
    }
}

/// Star level drawn for `group` at `iteration` under the single-output model.
pub fn single_output_draw(rng: &CounterRng, group: usize, iteration: u64, profile: &QualityProfile) -> StarLevel {
    let cumulative = cumulative_proportions(profile);
    draw_level(&cumulative, rng.uniform(group as u64, iteration))
}

/// Score drawn for `group` at `iteration` under the true-score model.
#[inline]
pub fn true_score_draw(rng: &CounterRng, group: usize, iteration: u64, estimate: f64, std_error: f64) -> f64 {
    if std_error == 0.0 {
        return estimate;
    }
    estimate + std_error * normal_quantile(rng.uniform(group as u64, iteration))
}

fn cumulative_proportions(profile: &QualityProfile) -> [f64; 5] {
    let mut acc = 0.0;
    let mut cumulative = profile.proportions().map(|p| {
        acc += p;
        acc
    });
    // Any uniform beyond the rounded total falls in the last non-empty level.
    if let Some(last) = profile.proportions().iter().rposition(|&p| p > 0.0) {
        for c in &mut cumulative[last..] {
            *c = f64::INFINITY;
        }
    }
    cumulative
}

#[inline]
fn draw_level(cumulative: &[f64; 5], u: f64) -> StarLevel {
    let idx = cumulative.iter().position(|&c| u < c).unwrap_or(4);
    StarLevel::ALL[idx]
}

/// Per-group score generator used by the simulation loop.
trait Scorer: Sync {
    fn draw(&self, rng: &CounterRng, group: usize, iteration: u64) -> f64;
}

struct SingleOutputScorer {
    cumulative: Vec<[f64; 5]>,
}

impl Scorer for SingleOutputScorer {
    #[inline]
    fn draw(&self, rng: &CounterRng, group: usize, iteration: u64) -> f64 {
        let u = rng.uniform(group as u64, iteration);
        f64::from(draw_level(&self.cumulative[group], u).stars())
    }
}

struct TrueScoreScorer {
    params: Vec<(f64, f64)>,
}

impl Scorer for TrueScoreScorer {
    #[inline]
    fn draw(&self, rng: &CounterRng, group: usize, iteration: u64) -> f64 {
        let (estimate, se) = self.params[group];
        true_score_draw(rng, group, iteration, estimate, se)
    }
}

/// Single-output bootstrap of ranks. `config.model` is ignored.
pub fn simulate_single_output_ranks(groups: &[GroupSubmission], config: &SimulationConfig) -> Result<Vec<RankDistribution>> {
    check_group_count(groups)?;
    let scorer = SingleOutputScorer {
        cumulative: groups.iter().map(|g| cumulative_proportions(&g.profile)).collect(),
    };
    run(groups, config, &scorer)
}

/// Normal-approximation simulation of "true" ranks. `config.model` is ignored.
pub fn simulate_true_score_ranks(
    groups: &[GroupSubmission],
    weights: &WeightScheme,
    config: &SimulationConfig,
) -> Result<Vec<RankDistribution>> {
    check_group_count(groups)?;
    let params = groups
        .iter()
        .map(|g| {
            let se = standard_error(&g.profile, weights, g.fte_staff())?;
            Ok((weighted_score(&g.profile, weights), se))
        })
        .collect::<Result<Vec<_>>>()?;
    run(groups, config, &TrueScoreScorer { params })
}

/// Dispatches on `config.model`.
pub fn simulate_ranks(
    groups: &[GroupSubmission],
    weights: &WeightScheme,
    config: &SimulationConfig,
) -> Result<Vec<RankDistribution>> {
    match config.model {
        Model::SingleOutput => simulate_single_output_ranks(groups, config),
        Model::TrueScore => simulate_true_score_ranks(groups, weights, config),
    }
}

fn check_group_count(groups: &[GroupSubmission]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::TooFewGroups(groups.len()));
    }
    Ok(())
}

fn run(groups: &[GroupSubmission], config: &SimulationConfig, scorer: &dyn Scorer) -> Result<Vec<RankDistribution>> {
    config.validate()?;
    let n = groups.len();
    let rng = CounterRng::new(config.seed);
    let shards = config.iterations.div_ceil(SHARD_SIZE);

    let simulate = || {
        (0..shards)
            .into_par_iter()
            .map(|shard| {
                let start = shard * SHARD_SIZE;
                let end = (start + SHARD_SIZE).min(config.iterations);
                simulate_shard(n, start..end, &rng, scorer, config.tie_policy)
            })
            .reduce(|| vec![0u64; n * (2 * n + 1)], merge_counts)
    };
    let counts = match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?
            .install(simulate),
        None => simulate(),
    };
    Ok(summarise(groups, n, counts.into_iter().map(|c| c as f64).collect(), config.level))
}

/// Counts laid out as `counts[g * (2n + 1) + half_rank]`.
fn simulate_shard(
    n: usize,
    iterations: std::ops::Range<u64>,
    rng: &CounterRng,
    scorer: &dyn Scorer,
    policy: TiePolicy,
) -> Vec<u64> {
    let stride = 2 * n + 1;
    let mut counts = vec![0u64; n * stride];
    let mut scores = vec![0.0; n];
    let mut order = vec![0usize; n];
    let mut half = vec![0u32; n];
    let triangular = (n * (n + 1)) as u32;
    for t in iterations {
        for (g, s) in scores.iter_mut().enumerate() {
            *s = scorer.draw(rng, g, t);
        }
        half_ranks_into(&scores, policy, &mut order, &mut half);
        if policy == TiePolicy::Midrank {
            debug_assert_eq!(half.iter().sum::<u32>(), triangular, "midrank sum at iteration {t}");
        }
        for (g, &h) in half.iter().enumerate() {
            counts[g * stride + h as usize] += 1;
        }
    }
    counts
}

fn merge_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn summarise(groups: &[GroupSubmission], n: usize, mass: Vec<f64>, level: f64) -> Vec<RankDistribution> {
    let stride = 2 * n + 1;
    groups
        .iter()
        .zip(mass.chunks_exact(stride))
        .map(|(g, m)| RankDistribution::from_histogram(g.institution.clone(), RankHistogram::from_mass(n, m.to_vec()), level))
        .collect()
}

/// Exact single-output rank distributions by enumerating every joint outcome.
///
/// Only levels with positive probability are visited, so the cost is the
/// product of the groups' support sizes (at most `5^N`). Intervals use the
/// default 0.95 level; call [`RankDistribution::from_histogram`] to
/// summarise at another level.
pub fn exact_single_output_rank_distribution(groups: &[GroupSubmission], policy: TiePolicy) -> Result<Vec<RankDistribution>> {
    let n = groups.len();
    if !(2..=MAX_ENUMERATION_GROUPS).contains(&n) {
        return Err(Error::EnumerationSize(n));
    }
    let supports: Vec<Vec<(f64, f64)>> = groups
        .iter()
        .map(|g| {
            StarLevel::ALL
                .iter()
                .filter(|&&l| g.profile[l] > 0.0)
                .map(|&l| (f64::from(l.stars()), g.profile[l]))
                .collect()
        })
        .collect();

    let stride = 2 * n + 1;
    let mut mass = vec![0.0; n * stride];
    let mut digits = vec![0usize; n];
    let mut scores = vec![0.0; n];
    let mut order = vec![0usize; n];
    let mut half = vec![0u32; n];
    loop {
        let mut weight = 1.0;
        for (g, &d) in digits.iter().enumerate() {
            let (score, p) = supports[g][d];
            scores[g] = score;
            weight *= p;
        }
        half_ranks_into(&scores, policy, &mut order, &mut half);
        for (g, &h) in half.iter().enumerate() {
            mass[g * stride + h as usize] += weight;
        }

        // Odometer increment over the supports.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(summarise(groups, n, mass, DEFAULT_LEVEL));
            }
            digits[pos] += 1;
            if digits[pos] < supports[pos].len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
