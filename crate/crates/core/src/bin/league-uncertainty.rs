use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use league_uncertainty::report::{run_report, RunConfig};
use league_uncertainty::{BaselineMode, Model, TiePolicy, WeightScheme};

/// Score intervals, rank distributions and bands for a league table.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// Canonical CSV: institution,unit,fte,pct4,pct3,pct2,pct1,pct0
    #[arg(long)]
    input: PathBuf,

    /// Directory for results.csv, the three SVG charts and summary.txt
    #[arg(long)]
    out_dir: PathBuf,

    /// `funding`, `mean`, or five comma-separated weights for 4*,3*,2*,1*,unclassified
    #[arg(long, default_value = "funding", value_parser = parse_weights)]
    weights: WeightScheme,

    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    iterations: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = ModelArg::TrueScore)]
    model: ModelArg,

    #[arg(long, value_enum, default_value_t = TieArg::Midrank)]
    tie_policy: TieArg,

    /// Two-sided confidence level in (0, 1)
    #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
    level: f64,

    #[arg(long, value_enum, default_value_t = BaselineArg::FteWeighted)]
    baseline: BaselineArg,

    /// Simulation threads (results do not depend on this)
    #[arg(long, value_parser = clap::value_parser!(usize))]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    SingleOutput,
    TrueScore,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    Midrank,
    Minrank,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    FteWeighted,
    Unweighted,
}

fn parse_weights(s: &str) -> Result<WeightScheme, String> {
    match s {
        "funding" => Ok(WeightScheme::funding()),
        "mean" => Ok(WeightScheme::mean()),
        _ => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad weight {p:?}: {e}")))
                .collect::<Result<_, _>>()?;
            let weights: [f64; 5] = parts
                .try_into()
                .map_err(|v: Vec<f64>| format!("expected 5 weights, got {}", v.len()))?;
            WeightScheme::custom("custom", weights).map_err(|e| e.to_string())
        }
    }
}

fn parse_level(s: &str) -> Result<f64, String> {
    let level: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if level > 0.0 && level < 1.0 {
        Ok(level)
    } else {
        Err(format!("level must lie strictly between 0 and 1, got {level}"))
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = RunConfig {
        weights: args.weights,
        iterations: args.iterations,
        seed: args.seed,
        model: match args.model {
            ModelArg::SingleOutput => Model::SingleOutput,
            ModelArg::TrueScore => Model::TrueScore,
        },
        tie_policy: match args.tie_policy {
            TieArg::Midrank => TiePolicy::Midrank,
            TieArg::Minrank => TiePolicy::Minrank,
        },
        level: args.level,
        baseline_mode: match args.baseline {
            BaselineArg::FteWeighted => BaselineMode::FteWeighted,
            BaselineArg::Unweighted => BaselineMode::Unweighted,
        },
        workers: args.workers,
        ..RunConfig::new(args.input, args.out_dir)
    };

    match run_report(&config) {
        Ok(output) => {
            for (row, reason) in &output.ingest.rejections {
                eprintln!("warning: row {row} rejected: {reason}");
            }
            for (row, message) in &output.ingest.warnings {
                eprintln!("warning: row {row}: {message}");
            }
            print!("{}", league_uncertainty::report::summary_text(&output.report));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
