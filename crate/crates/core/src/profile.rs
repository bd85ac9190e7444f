//! Quality profiles, group submissions and weighted scoring.
//!
//! A [`QualityProfile`] is the share of a group's assessed outputs at each of
//! the five star levels. Arrays indexed by star level always use the canonical
//! descending order `[4*, 3*, 2*, 1*, unclassified]`.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Absolute tolerance on the sum of a profile's proportions.
pub const PROFILE_SUM_TOLERANCE: f64 = 1e-9;

/// Width of one reporting block (5%).
pub const BLOCK: f64 = 0.05;

/// One of the five assessment categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StarLevel {
    FourStar,
    ThreeStar,
    TwoStar,
    OneStar,
    Unclassified,
}

impl StarLevel {
    /// All levels in canonical (descending star value) order.
    pub const ALL: [StarLevel; 5] = [
        StarLevel::FourStar,
        StarLevel::ThreeStar,
        StarLevel::TwoStar,
        StarLevel::OneStar,
        StarLevel::Unclassified,
    ];

    /// Position in canonical order, 0 for 4* through 4 for unclassified.
    pub fn index(self) -> usize {
        self as usize
    }

    /// The integer star value: 4, 3, 2, 1 or 0.
    pub fn stars(self) -> u8 {
        4 - self as u8
    }

    pub fn from_index(index: usize) -> Option<StarLevel> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for StarLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarLevel::Unclassified => f.write_str("unclassified"),
            level => write!(f, "{}*", level.stars()),
        }
    }
}

/// Proportions of outputs at each star level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityProfile {
    proportions: [f64; 5],
}

impl QualityProfile {
    /// Builds a profile from proportions in canonical order.
    ///
    /// Every entry must lie in `[0, 1]` and the entries must sum to 1 within
    /// [`PROFILE_SUM_TOLERANCE`]. Alignment to 5% blocks is not required here;
    /// see [`QualityProfile::is_block_aligned`].
    pub fn new(proportions: [f64; 5]) -> Result<Self> {
        for (level, &p) in StarLevel::ALL.iter().zip(&proportions) {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProfile(format!(
                    "proportion for {level} is {p}, outside [0, 1]"
                )));
            }
        }
        let sum: f64 = proportions.iter().sum();
        if (sum - 1.0).abs() > PROFILE_SUM_TOLERANCE {
            return Err(Error::InvalidProfile(format!(
                "proportions sum to {sum}, not 1"
            )));
        }
        Ok(Self { proportions })
    }

    /// Builds a profile from percentages (0-100) in canonical order.
    pub fn from_percentages(percentages: [f64; 5]) -> Result<Self> {
        Self::new(percentages.map(|pct| pct / 100.0))
    }

    pub fn proportions(&self) -> &[f64; 5] {
        &self.proportions
    }

    pub fn get(&self, level: StarLevel) -> f64 {
        self.proportions[level.index()]
    }

    /// True when every proportion is a multiple of 5% (within 1e-9).
    pub fn is_block_aligned(&self) -> bool {
        self.proportions.iter().all(|&p| {
            let blocks = p / BLOCK;
            (blocks - blocks.round()).abs() * BLOCK <= PROFILE_SUM_TOLERANCE
        })
    }
}

impl Index<StarLevel> for QualityProfile {
    type Output = f64;

    fn index(&self, level: StarLevel) -> &f64 {
        &self.proportions[level.index()]
    }
}

/// One institution's entry in a unit of assessment.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSubmission {
    pub institution: String,
    pub unit: String,
    fte_staff: f64,
    pub profile: QualityProfile,
}

impl GroupSubmission {
    pub fn new(
        institution: impl Into<String>,
        unit: impl Into<String>,
        fte_staff: f64,
        profile: QualityProfile,
    ) -> Result<Self> {
        if !fte_staff.is_finite() || fte_staff <= 0.0 {
            return Err(Error::InvalidFte(fte_staff));
        }
        Ok(Self {
            institution: institution.into(),
            unit: unit.into(),
            fte_staff,
            profile,
        })
    }

    /// Full-time-equivalent staff submitted; always positive.
    pub fn fte_staff(&self) -> f64 {
        self.fte_staff
    }
}

/// Numeric value attached to each star level.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    pub name: String,
    weights: [f64; 5],
}

impl WeightScheme {
    /// Funding weights 7, 3, 1, 0, 0.
    pub fn funding() -> Self {
        Self {
            name: "funding".to_owned(),
            weights: [7.0, 3.0, 1.0, 0.0, 0.0],
        }
    }

    /// Star values 4, 3, 2, 1, 0; scoring with these gives the mean score.
    pub fn mean() -> Self {
        Self {
            name: "mean".to_owned(),
            weights: [4.0, 3.0, 2.0, 1.0, 0.0],
        }
    }

    /// Arbitrary finite weights in canonical order.
    pub fn custom(name: impl Into<String>, weights: [f64; 5]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {w} is not finite")));
        }
        Ok(Self {
            name: name.into(),
            weights,
        })
    }

    pub fn weights(&self) -> &[f64; 5] {
        &self.weights
    }

    pub fn get(&self, level: StarLevel) -> f64 {
        self.weights[level.index()]
    }
}

/// `Σ wᵢ·pᵢ`. With [`WeightScheme::funding`] this is `7p₄ + 3p₃ + p₂`.
pub fn weighted_score(profile: &QualityProfile, weights: &WeightScheme) -> f64 {
    profile
        .proportions
        .iter()
        .zip(&weights.weights)
        .map(|(p, w)| p * w)
        .sum()
}

/// Average number of stars, in `[0, 4]`.
pub fn mean_score(profile: &QualityProfile) -> f64 {
    weighted_score(profile, &WeightScheme::mean())
}

/// Variance of the weight of a single output drawn from `profile`.
///
/// Population form `Σ pᵢwᵢ² − (Σ pᵢwᵢ)²`, evaluated as the centred sum
/// `Σ pᵢ(wᵢ − μ)²` so it can never round below zero.
pub fn score_variance(profile: &QualityProfile, weights: &WeightScheme) -> f64 {
    let mu = weighted_score(profile, weights);
    profile
        .proportions
        .iter()
        .zip(&weights.weights)
        .map(|(p, w)| p * (w - mu) * (w - mu))
        .sum()
}

/// FTE-weighted average of the member profiles.
pub fn pooled_profile(groups: &[GroupSubmission]) -> Result<QualityProfile> {
    if groups.is_empty() {
        return Err(Error::NoData);
    }
    let total_fte: f64 = groups.iter().map(|g| g.fte_staff).sum();
    let mut pooled = [0.0; 5];
    for group in groups {
        let share = group.fte_staff / total_fte;
        for (acc, p) in pooled.iter_mut().zip(&group.profile.proportions) {
            *acc += share * p;
        }
    }
    // Clamp away rounding spill so the result always passes validation.
    for p in &mut pooled {
        *p = p.clamp(0.0, 1.0);
    }
    QualityProfile::new(pooled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn profile(p: [f64; 5]) -> QualityProfile {
        QualityProfile::new(p).unwrap()
    }

    fn group(name: &str, fte: f64, p: [f64; 5]) -> GroupSubmission {
        GroupSubmission::new(name, "UOA22", fte, profile(p)).unwrap()
    }

    #[test]
    fn star_levels_are_descending() {
        let stars: Vec<u8> = StarLevel::ALL.iter().map(|l| l.stars()).collect();
        assert_eq!(stars, vec![4, 3, 2, 1, 0]);
        assert_eq!(StarLevel::from_index(4), Some(StarLevel::Unclassified));
        assert_eq!(StarLevel::from_index(5), None);
        assert_eq!(StarLevel::ThreeStar.to_string(), "3*");
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(QualityProfile::new([0.5, 0.4, 0.0, 0.0, 0.0]).is_err());
        assert!(QualityProfile::new([1.2, -0.2, 0.0, 0.0, 0.0]).is_err());
        assert!(QualityProfile::new([f64::NAN, 1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(QualityProfile::new([0.5, 0.5 + 5e-10, 0.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn block_alignment_is_advisory() {
        assert!(profile([0.25, 0.40, 0.30, 0.05, 0.0]).is_block_aligned());
        let odd = profile([0.23, 0.40, 0.30, 0.07, 0.0]);
        assert!(!odd.is_block_aligned());
    }

    #[test]
    fn rejects_non_positive_fte() {
        let p = profile([1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(GroupSubmission::new("a", "u", 0.0, p).is_err());
        assert!(GroupSubmission::new("a", "u", -1.0, p).is_err());
        assert!(GroupSubmission::new("a", "u", f64::INFINITY, p).is_err());
        assert!(WeightScheme::custom("bad", [f64::NAN, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn weighted_score_examples() {
        let funding = WeightScheme::funding();
        assert_eq!(weighted_score(&profile([1.0, 0.0, 0.0, 0.0, 0.0]), &funding), 7.0);
        assert_eq!(weighted_score(&profile([0.0, 0.0, 0.0, 0.0, 1.0]), &funding), 0.0);
        let p = profile([0.25, 0.40, 0.30, 0.05, 0.0]);
        assert_abs_diff_eq!(weighted_score(&p, &funding), 3.25, epsilon = 1e-12);
    }

    #[test]
    fn mean_score_examples() {
        assert_eq!(mean_score(&profile([1.0, 0.0, 0.0, 0.0, 0.0])), 4.0);
        assert_abs_diff_eq!(mean_score(&profile([0.2; 5])), 2.0, epsilon = 1e-12);
        let p = profile([0.05, 0.45, 0.40, 0.10, 0.0]);
        assert_abs_diff_eq!(mean_score(&p), 2.45, epsilon = 1e-12);
    }

    #[test]
    fn score_variance_examples() {
        let funding = WeightScheme::funding();
        assert_eq!(score_variance(&profile([1.0, 0.0, 0.0, 0.0, 0.0]), &funding), 0.0);
        let half = profile([0.5, 0.0, 0.0, 0.0, 0.5]);
        assert_abs_diff_eq!(score_variance(&half, &funding), 12.25, epsilon = 1e-12);
        assert_abs_diff_eq!(score_variance(&profile([0.2; 5]), &funding), 6.96, epsilon = 1e-12);
    }

    #[test]
    fn pooled_profile_examples() {
        assert!(matches!(pooled_profile(&[]), Err(Error::NoData)));

        let single = group("a", 3.5, [0.25, 0.40, 0.30, 0.05, 0.0]);
        assert_eq!(pooled_profile(std::slice::from_ref(&single)).unwrap(), single.profile);

        let pair = [
            group("a", 2.0, [1.0, 0.0, 0.0, 0.0, 0.0]),
            group("b", 2.0, [0.0, 0.0, 0.0, 0.0, 1.0]),
        ];
        assert_eq!(pooled_profile(&pair).unwrap().proportions(), &[0.5, 0.0, 0.0, 0.0, 0.5]);

        let weighted = [
            group("a", 1.0, [1.0, 0.0, 0.0, 0.0, 0.0]),
            group("b", 3.0, [0.0, 1.0, 0.0, 0.0, 0.0]),
        ];
        assert_eq!(
            pooled_profile(&weighted).unwrap().proportions(),
            &[0.25, 0.75, 0.0, 0.0, 0.0]
        );
    }

    fn arb_profile() -> impl Strategy<Value = QualityProfile> {
        prop::array::uniform5(0.0..1.0f64).prop_filter_map("degenerate", |raw| {
            let sum: f64 = raw.iter().sum();
            (sum > 1e-6).then(|| {
                let mut p = raw.map(|x| x / sum);
                // Fold rounding residue into the largest entry.
                let residue = 1.0 - p.iter().sum::<f64>();
                let (i, _) = p
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .unwrap();
                p[i] = (p[i] + residue).clamp(0.0, 1.0);
                QualityProfile::new(p).unwrap()
            })
        })
    }

    fn arb_weights() -> impl Strategy<Value = WeightScheme> {
        prop::array::uniform5(-10.0..10.0f64)
            .prop_map(|w| WeightScheme::custom("arb", w).unwrap())
    }

    proptest! {
        #[test]
        fn score_is_linear_in_weights(
            p in arb_profile(), w in arb_weights(), v in arb_weights(),
            a in -5.0..5.0f64, b in -5.0..5.0f64,
        ) {
            let mut combined = [0.0; 5];
            for i in 0..5 {
                combined[i] = a * w.weights()[i] + b * v.weights()[i];
            }
            let combined = WeightScheme::custom("combined", combined).unwrap();
            let lhs = weighted_score(&p, &combined);
            let rhs = a * weighted_score(&p, &w) + b * weighted_score(&p, &v);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn positive_scaling_preserves_order(
            profiles in prop::collection::vec(arb_profile(), 2..12),
            w in arb_weights(),
            c in 0.01..100.0f64,
        ) {
            let scaled = WeightScheme::custom("scaled", w.weights().map(|x| x * c)).unwrap();
            let order = |ws: &WeightScheme| {
                let scores: Vec<f64> = profiles.iter().map(|p| weighted_score(p, ws)).collect();
                let mut idx: Vec<usize> = (0..scores.len()).collect();
                idx.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
                (idx, scores)
            };
            let (base_order, base_scores) = order(&w);
            let (scaled_order, _) = order(&scaled);
            // Near-ties can legitimately swap under rounding; only compare
            // when all gaps are resolvable.
            let mut sorted = base_scores.clone();
            sorted.sort_by(f64::total_cmp);
            let resolvable = sorted.windows(2).all(|pair| pair[1] - pair[0] > 1e-9);
            if resolvable {
                prop_assert_eq!(base_order, scaled_order);
            }
        }

        #[test]
        fn variance_is_non_negative(p in arb_profile(), w in arb_weights()) {
            prop_assert!(score_variance(&p, &w) >= 0.0);
        }

        #[test]
        fn variance_vanishes_on_equal_weights(
            p in arb_profile(), c in -10.0..10.0f64,
        ) {
            let flat = WeightScheme::custom("flat", [c; 5]).unwrap();
            prop_assert!(score_variance(&p, &flat) < 1e-12);
        }

        #[test]
        fn moving_mass_upward_never_lowers_score(
            p in arb_profile(), from in 0usize..5, to in 0usize..5, frac in 0.0..=1.0f64,
        ) {
            let funding = WeightScheme::funding();
            let (lo, hi) = if funding.weights()[from] <= funding.weights()[to] {
                (from, to)
            } else {
                (to, from)
            };
            let mut moved = *p.proportions();
            let amount = moved[lo] * frac;
            moved[lo] -= amount;
            moved[hi] += amount;
            let moved = QualityProfile::new(moved.map(|x| x.clamp(0.0, 1.0))).unwrap();
            prop_assert!(weighted_score(&moved, &funding) >= weighted_score(&p, &funding) - 1e-12);
        }

        #[test]
        fn pooling_identical_profiles_is_identity(
            p in arb_profile(), ftes in prop::collection::vec(0.1..100.0f64, 1..10),
        ) {
            let groups: Vec<GroupSubmission> = ftes
                .iter()
                .enumerate()
                .map(|(i, &fte)| GroupSubmission::new(format!("g{i}"), "u", fte, p).unwrap())
                .collect();
            let pooled = pooled_profile(&groups).unwrap();
            for (a, b) in pooled.proportions().iter().zip(p.proportions()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
