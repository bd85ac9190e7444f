//! Reading and writing the canonical league-table CSV.
//!
//! ```text
//! institution,unit,fte,pct4,pct3,pct2,pct1,pct0
//! Cambridge,UOA22,35.0,25,40,30,5,0
//! ```
//!
//! Percentages are decimals in `[0, 100]`. Rows whose percentages sum to
//! within ±0.5 of 100 are rescaled to sum to exactly 100 with a warning, other
//! bad rows are rejected with a reason. A missing or unexpected header and a
//! repeated `(institution, unit)` pair are fatal.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::{GroupSubmission, QualityProfile};

pub const HEADER: [&str; 8] = ["institution", "unit", "fte", "pct4", "pct3", "pct2", "pct1", "pct0"];

/// Maximum distance, in percentage points, of a row's sum from 100 that is
/// still accepted after rescaling.
pub const RENORMALISE_TOLERANCE: f64 = 0.5;

pub const MSG_SUM_OUT_OF_TOLERANCE: &str = "profile sum out of tolerance";
pub const MSG_NOT_BLOCK_ALIGNED: &str = "proportions not in 5% blocks";
pub const MSG_FTE_BELOW_ONE: &str = "FTE below 1";

/// Outcome counts and messages from parsing or validation. Rows are 1-based
/// data rows (the header is not counted).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub warnings: Vec<(usize, String)>,
    pub rejections: Vec<(usize, String)>,
}

impl IngestReport {
    pub fn total_rows(&self) -> usize {
        self.accepted + self.rejected
    }
}

pub fn read_league_table(path: impl AsRef<Path>) -> Result<(Vec<GroupSubmission>, IngestReport)> {
    let file = std::fs::File::open(path)?;
    parse_league_table(std::io::BufReader::new(file))
}

pub fn parse_league_table<R: Read>(input: R) -> Result<(Vec<GroupSubmission>, IngestReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(input);

    let header = reader.headers().map_err(|e| Error::Header(e.to_string()))?;
    if header.is_empty() {
        return Err(Error::Header("missing header".to_owned()));
    }
    let matches = header.len() == HEADER.len()
        && header
            .iter()
            .zip(HEADER)
            .all(|(got, want)| got.trim_start_matches('\u{feff}').eq_ignore_ascii_case(want));
    if !matches {
        return Err(Error::Header(format!(
            "expected `{}`, found `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut groups = Vec::new();
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let parsed = record
            .map_err(|e| format!("unreadable row: {e}"))
            .and_then(|r| parse_row(&r, row, &mut report.warnings));
        match parsed {
            Ok(group) => {
                if !seen.insert((group.institution.clone(), group.unit.clone())) {
                    return Err(Error::DuplicateSubmission {
                        institution: group.institution,
                        unit: group.unit,
                        row,
                    });
                }
                for msg in group_warnings(&group) {
                    report.warnings.push((row, msg.to_owned()));
                }
                report.accepted += 1;
                groups.push(group);
            }
            Err(reason) => {
                report.rejected += 1;
                report.rejections.push((row, reason));
            }
        }
    }
    Ok((groups, report))
}

fn parse_row(record: &csv::StringRecord, row: usize, warnings: &mut Vec<(usize, String)>) -> Result<GroupSubmission, String> {
    if record.len() != HEADER.len() {
        return Err(format!("expected {} fields, found {}", HEADER.len(), record.len()));
    }
    let institution = &record[0];
    let unit = &record[1];
    if institution.is_empty() {
        return Err("institution is empty".to_owned());
    }
    if unit.is_empty() {
        return Err("unit is empty".to_owned());
    }
    let number = |i: usize| -> Result<f64, String> {
        let v: f64 = record[i]
            .parse()
            .map_err(|_| format!("{} is not a number: {:?}", HEADER[i], &record[i]))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{} is not finite", HEADER[i]))
        }
    };
    let fte = number(2)?;
    if fte <= 0.0 {
        return Err(format!("fte must be positive, got {fte}"));
    }
    let mut pct = [0.0; 5];
    for (k, slot) in pct.iter_mut().enumerate() {
        let v = number(3 + k)?;
        if !(0.0..=100.0).contains(&v) {
            return Err(format!("{} outside [0, 100]: {v}", HEADER[3 + k]));
        }
        *slot = v;
    }
    let sum: f64 = pct.iter().sum();
    if (sum - 100.0).abs() > RENORMALISE_TOLERANCE {
        return Err(MSG_SUM_OUT_OF_TOLERANCE.to_owned());
    }
    if (sum - 100.0).abs() > 1e-9 {
        warnings.push((row, format!("percentages sum to {sum}; rescaled to 100")));
        pct = pct.map(|p| p * 100.0 / sum);
    }
    let profile = QualityProfile::from_percentages(pct).map_err(|e| e.to_string())?;
    GroupSubmission::new(institution, unit, fte, profile).map_err(|e| e.to_string())
}

fn group_warnings(group: &GroupSubmission) -> Vec<&'static str> {
    let mut out = Vec::new();
    if !group.profile.is_block_aligned() {
        out.push(MSG_NOT_BLOCK_ALIGNED);
    }
    if group.fte_staff() < 1.0 {
        out.push(MSG_FTE_BELOW_ONE);
    }
    out
}

/// Advisory checks on already-built groups; rows are 1-based list positions.
pub fn validate_groups(groups: &[GroupSubmission]) -> IngestReport {
    let warnings = groups
        .iter()
        .enumerate()
        .flat_map(|(i, g)| group_warnings(g).into_iter().map(move |m| (i + 1, m.to_owned())))
        .collect();
    IngestReport {
        accepted: groups.len(),
        warnings,
        ..IngestReport::default()
    }
}

/// Shortest decimal percentage that parses back (after `/ 100`) to exactly `p`.
fn percentage_text(p: f64) -> String {
    let mut candidate = p * 100.0;
    let mut best = format!("{candidate}");
    for _ in 0..4 {
        if candidate / 100.0 == p {
            return format!("{candidate}");
        }
        candidate = if candidate / 100.0 < p { candidate.next_up() } else { candidate.next_down() };
        best = format!("{candidate}");
    }
    best
}

pub fn write_league_table<W: Write>(groups: &[GroupSubmission], output: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    writer.write_record(HEADER)?;
    for g in groups {
        let mut record = vec![g.institution.clone(), g.unit.clone(), format!("{}", g.fte_staff())];
        record.extend(g.profile.proportions().iter().map(|&p| percentage_text(p)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_canonical_string(groups: &[GroupSubmission]) -> Result<String> {
    let mut buf = Vec::new();
    write_league_table(groups, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output of UTF-8 fields is UTF-8"))
}
