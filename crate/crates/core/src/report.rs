//! End-to-end pipeline behind the command-line tool.
//!
//! [`analyse`] turns a list of submissions into a [`Report`]; [`run_report`]
//! additionally reads the input file and writes `results.csv`,
//! `profiles.svg`, `ranks.svg`, `scores.svg` and `summary.txt`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classify::{classify_by_rank_interval, Band};
use crate::error::Error;
use crate::ingest::{read_league_table, IngestReport};
use crate::profile::{mean_score, GroupSubmission, WeightScheme};
use crate::ranking::TiePolicy;
use crate::sim::{simulate_ranks, Model, RankDistribution, SimulationConfig};
use crate::svg;
use crate::uncertainty::{count_overall_mean_overlaps, BaselineMode, ScoreEstimate};

pub const RESULTS_FILE: &str = "results.csv";
pub const PROFILES_FILE: &str = "profiles.svg";
pub const RANKS_FILE: &str = "ranks.svg";
pub const SCORES_FILE: &str = "scores.svg";
pub const SUMMARY_FILE: &str = "summary.txt";

pub const RESULTS_HEADER: [&str; 13] = [
    "institution",
    "unit",
    "fte",
    "mean_score",
    "score",
    "std_error",
    "ci_low",
    "ci_high",
    "rank_median",
    "rank_low",
    "rank_high",
    "band",
    "overlaps_overall_mean",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub out_dir: PathBuf,
    pub weights: WeightScheme,
    pub iterations: u64,
    pub seed: u64,
    pub model: Model,
    pub tie_policy: TiePolicy,
    pub level: f64,
    pub baseline_mode: BaselineMode,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        let sim = SimulationConfig::default();
        Self {
            input_path: input_path.into(),
            out_dir: out_dir.into(),
            weights: WeightScheme::funding(),
            iterations: sim.iterations,
            seed: sim.seed,
            model: sim.model,
            tie_policy: sim.tie_policy,
            level: sim.level,
            baseline_mode: BaselineMode::FteWeighted,
            workers: None,
        }
    }

    pub fn simulation(&self) -> SimulationConfig {
        SimulationConfig {
            iterations: self.iterations,
            seed: self.seed,
            tie_policy: self.tie_policy,
            model: self.model,
            level: self.level,
            workers: self.workers,
        }
    }
}

/// Failure of [`run_report`], each kind mapping to its own exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read input {path}: {source}")]
    InputNotFound { path: PathBuf, source: io::Error },

    #[error("cannot parse input: {0}")]
    Parse(Error),

    #[error("need at least 2 valid groups, found {0}")]
    TooFewGroups(usize),

    #[error("cannot write output {path}: {source}")]
    Unwritable { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Analysis(Error),
}

impl RunError {
    /// 3 input missing, 4 parse failure, 5 too few groups, 6 output not
    /// writable, 1 anything else. (2 is left to argument errors.)
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::InputNotFound { .. } => 3,
            RunError::Parse(_) => 4,
            RunError::TooFewGroups(_) => 5,
            RunError::Unwritable { .. } => 6,
            RunError::Analysis(_) => 1,
        }
    }
}

/// Everything reported for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupResult {
    pub group: GroupSubmission,
    pub mean_score: f64,
    pub score: ScoreEstimate,
    pub rank: RankDistribution,
    pub band: Band,
    pub overlaps_overall_mean: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// League-table order: descending mean score, then institution, then unit.
    pub rows: Vec<GroupResult>,
    pub weights: WeightScheme,
    pub simulation: SimulationConfig,
    pub baseline_mode: BaselineMode,
    pub overall_mean: f64,
    pub overlap_count: usize,
    pub top: usize,
    pub bottom: usize,
    pub uncertain: usize,
}

pub fn analyse(
    groups: &[GroupSubmission],
    weights: &WeightScheme,
    simulation: &SimulationConfig,
    baseline_mode: BaselineMode,
) -> Result<Report, Error> {
    if groups.len() < 2 {
        return Err(Error::TooFewGroups(groups.len()));
    }
    let overlaps = count_overall_mean_overlaps(groups, weights, simulation.level, baseline_mode)?;
    let ranks = simulate_ranks(groups, weights, simulation)?;
    let bands = classify_by_rank_interval(&ranks, groups.len())?;
    let (top, bottom, uncertain) = (bands.count(Band::Top), bands.count(Band::Bottom), bands.count(Band::Uncertain));

    let mut rows: Vec<GroupResult> = groups
        .iter()
        .zip(overlaps.estimates)
        .zip(overlaps.overlaps)
        .zip(ranks)
        .zip(bands.assignments)
        .map(|((((group, score), overlaps_overall_mean), rank), band)| GroupResult {
            mean_score: mean_score(&group.profile),
            group: group.clone(),
            score,
            rank,
            band: band.band,
            overlaps_overall_mean,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.mean_score
            .total_cmp(&a.mean_score)
            .then_with(|| a.group.institution.cmp(&b.group.institution))
            .then_with(|| a.group.unit.cmp(&b.group.unit))
    });

    Ok(Report {
        rows,
        weights: weights.clone(),
        simulation: simulation.clone(),
        baseline_mode,
        overall_mean: overlaps.overall_mean,
        overlap_count: overlaps.count,
        top,
        bottom,
        uncertain,
    })
}

/// Formats `x` with exactly six significant digits.
///
/// Decimal notation for magnitudes in `[1e-5, 1e6)`, scientific otherwise.
/// Both paths use Rust's correctly rounded formatter, so the text does not
/// depend on the platform's C library. Zero (of either sign) is `0.00000`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let exponent: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..=5).contains(&exponent) {
        let decimals = (5 - exponent) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn results_csv(report: &Report) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(RESULTS_HEADER).expect("in-memory write");
    for row in &report.rows {
        let numbers = [
            row.group.fte_staff(),
            row.mean_score,
            row.score.estimate,
            row.score.std_error,
            row.score.interval_low,
            row.score.interval_high,
            row.rank.median,
            row.rank.interval_low,
            row.rank.interval_high,
        ]
        .map(format_sig6);
        let mut record = vec![row.group.institution.clone(), row.group.unit.clone()];
        record.extend(numbers);
        record.push(row.band.to_string());
        record.push(row.overlaps_overall_mean.to_string());
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

fn model_name(model: Model) -> &'static str {
    match model {
        Model::SingleOutput => "single-output",
        Model::TrueScore => "true-score",
    }
}

fn baseline_name(mode: BaselineMode) -> &'static str {
    match mode {
        BaselineMode::FteWeighted => "fte-weighted",
        BaselineMode::Unweighted => "unweighted",
    }
}

pub fn summary_text(report: &Report) -> String {
    let sim = &report.simulation;
    let weights: Vec<String> = report.weights.weights().iter().map(|w| format!("{w}")).collect();
    let mut out = String::new();
    let _ = writeln!(out, "groups: {}", report.rows.len());
    let _ = writeln!(out, "weights: {} ({})", report.weights.name, weights.join(","));
    let _ = writeln!(out, "model: {}", model_name(sim.model));
    let _ = writeln!(out, "iterations: {}", sim.iterations);
    let _ = writeln!(out, "seed: {}", sim.seed);
    let _ = writeln!(out, "tie_policy: {}", match sim.tie_policy {
        TiePolicy::Midrank => "midrank",
        TiePolicy::Minrank => "minrank",
    });
    let _ = writeln!(out, "level: {}", sim.level);
    let _ = writeln!(out, "baseline: {}", baseline_name(report.baseline_mode));
    let _ = writeln!(out, "overall_mean: {}", format_sig6(report.overall_mean));
    let _ = writeln!(out, "overlapping_overall_mean: {}", report.overlap_count);
    let _ = writeln!(out, "top: {}", report.top);
    let _ = writeln!(out, "bottom: {}", report.bottom);
    let _ = writeln!(out, "uncertain: {}", report.uncertain);
    let _ = writeln!(out, "non_uncertain: {}", report.top + report.bottom);
    out
}

fn label(row: &GroupResult) -> String {
    row.group.institution.clone()
}

pub fn profiles_svg(report: &Report) -> String {
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| (label(r), r.group.fte_staff(), r.group.profile))
        .collect();
    svg::profiles_chart(&rows, "Quality profiles ranked by mean score")
}

pub fn ranks_svg(report: &Report) -> String {
    let n = report.rows.len() as f64;
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| (label(r), r.rank.median, r.rank.interval_low, r.rank.interval_high))
        .collect();
    let title = format!(
        "Rank: median and {}% interval ({}, {} iterations)",
        report.simulation.level * 100.0,
        model_name(report.simulation.model),
        report.simulation.iterations
    );
    svg::interval_chart(&rows, (1.0, n), None, &title, "rank (1 = best)")
}

pub fn scores_svg(report: &Report) -> String {
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| (label(r), r.score.estimate, r.score.interval_low, r.score.interval_high))
        .collect();
    let lo = rows.iter().map(|r| r.2).fold(report.overall_mean, f64::min).min(0.0);
    let hi = rows.iter().map(|r| r.3).fold(report.overall_mean, f64::max);
    let title = format!(
        "{} score: estimate and {}% interval",
        report.weights.name,
        report.simulation.level * 100.0
    );
    svg::interval_chart(&rows, (lo, hi), Some(report.overall_mean), &title, "expected score per output")
}

/// Output of [`run_report`].
#[derive(Debug)]
pub struct RunOutput {
    pub report: Report,
    pub ingest: IngestReport,
    pub files: Vec<PathBuf>,
}

pub fn run_report(config: &RunConfig) -> Result<RunOutput, RunError> {
    let (groups, ingest) = read_league_table(&config.input_path).map_err(|e| match e {
        Error::Io(source) => RunError::InputNotFound {
            path: config.input_path.clone(),
            source,
        },
        other => RunError::Parse(other),
    })?;
    if groups.len() < 2 {
        return Err(RunError::TooFewGroups(groups.len()));
    }
    let report = analyse(&groups, &config.weights, &config.simulation(), config.baseline_mode).map_err(|e| match e {
        Error::TooFewGroups(n) => RunError::TooFewGroups(n),
        other => RunError::Analysis(other),
    })?;

    let unwritable = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Unwritable { path, source }
    };
    fs::create_dir_all(&config.out_dir).map_err(unwritable(&config.out_dir))?;
    let outputs = [
        (RESULTS_FILE, results_csv(&report)),
        (PROFILES_FILE, profiles_svg(&report)),
        (RANKS_FILE, ranks_svg(&report)),
        (SCORES_FILE, scores_svg(&report)),
        (SUMMARY_FILE, summary_text(&report)),
    ];
    let mut files = Vec::with_capacity(outputs.len());
    for (name, contents) in outputs {
        let path = config.out_dir.join(name);
        fs::write(&path, contents).map_err(unwritable(&path))?;
        files.push(path);
    }
    Ok(RunOutput { report, ingest, files })
}
