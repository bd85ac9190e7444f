//! Standard errors and normal-approximation intervals for weighted scores.

use crate::error::{Error, Result};
use crate::profile::{pooled_profile, score_variance, weighted_score, GroupSubmission, QualityProfile, WeightScheme};

/// Effective number of outputs contributed by each FTE staff member.
pub const OUTPUTS_PER_STAFF: f64 = 6.0;

/// Default two-sided confidence level.
pub const DEFAULT_LEVEL: f64 = 0.95;

/// A weighted score with its standard error and confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Effective number of outputs behind the estimate. `NAN` when the
    /// estimate was built directly from a standard error.
    pub effective_n: f64,
    pub interval_low: f64,
    pub interval_high: f64,
    pub level: f64,
}

impl ScoreEstimate {
    /// Whether `value` lies in the closed interval.
    pub fn contains(&self, value: f64) -> bool {
        self.interval_low <= value && value <= self.interval_high
    }

    pub fn width(&self) -> f64 {
        self.interval_high - self.interval_low
    }
}

/// `6 · fte_staff`.
pub fn effective_sample_size(fte_staff: f64) -> Result<f64> {
    if !fte_staff.is_finite() || fte_staff <= 0.0 {
        return Err(Error::InvalidFte(fte_staff));
    }
    Ok(OUTPUTS_PER_STAFF * fte_staff)
}

/// `sqrt(score_variance / (6 · fte_staff))`.
pub fn standard_error(profile: &QualityProfile, weights: &WeightScheme, fte_staff: f64) -> Result<f64> {
    let n = effective_sample_size(fte_staff)?;
    Ok((score_variance(profile, weights) / n).sqrt())
}

/// Two-sided standard normal quantile for `level`, e.g. 1.959964 at 0.95.
pub fn z_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidLevel(level));
    }
    Ok(normal_quantile(0.5 + level / 2.0))
}

/// `estimate ± z(level) · std_error`.
pub fn confidence_interval(estimate: f64, std_error: f64, level: f64) -> Result<ScoreEstimate> {
    if !std_error.is_finite() || std_error < 0.0 {
        return Err(Error::InvalidStdError(std_error));
    }
    let half_width = z_value(level)? * std_error;
    Ok(ScoreEstimate {
        estimate,
        std_error,
        effective_n: f64::NAN,
        interval_low: estimate - half_width,
        interval_high: estimate + half_width,
        level,
    })
}

/// Score, standard error and interval for one group.
pub fn estimate_group(group: &GroupSubmission, weights: &WeightScheme, level: f64) -> Result<ScoreEstimate> {
    let estimate = weighted_score(&group.profile, weights);
    let se = standard_error(&group.profile, weights, group.fte_staff())?;
    let mut out = confidence_interval(estimate, se, level)?;
    out.effective_n = effective_sample_size(group.fte_staff())?;
    Ok(out)
}

/// How the "overall mean for all groups" baseline is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineMode {
    /// Score of the FTE-weighted pooled profile.
    #[default]
    FteWeighted,
    /// Plain average of the group scores.
    Unweighted,
}

/// Result of [`count_overall_mean_overlaps`].
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSummary {
    pub overall_mean: f64,
    pub estimates: Vec<ScoreEstimate>,
    /// Per group, in input order: does its interval contain the overall mean?
    pub overlaps: Vec<bool>,
    pub count: usize,
}

pub fn overall_mean(groups: &[GroupSubmission], weights: &WeightScheme, mode: BaselineMode) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::NoData);
    }
    Ok(match mode {
        BaselineMode::FteWeighted => weighted_score(&pooled_profile(groups)?, weights),
        BaselineMode::Unweighted => {
            groups.iter().map(|g| weighted_score(&g.profile, weights)).sum::<f64>() / groups.len() as f64
        }
    })
}

/// Counts the groups whose interval (closed) contains the overall mean.
pub fn count_overall_mean_overlaps(
    groups: &[GroupSubmission],
    weights: &WeightScheme,
    level: f64,
    mode: BaselineMode,
) -> Result<OverlapSummary> {
    let overall_mean = overall_mean(groups, weights, mode)?;
    let estimates = groups
        .iter()
        .map(|g| estimate_group(g, weights, level))
        .collect::<Result<Vec<_>>>()?;
    let overlaps: Vec<bool> = estimates.iter().map(|e| e.contains(overall_mean)).collect();
    let count = overlaps.iter().filter(|&&o| o).count();
    Ok(OverlapSummary {
        overall_mean,
        estimates,
        overlaps,
        count,
    })
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation (relative error below 1.2e-9 over the
/// whole open unit interval). Returns ±∞ at 0 and 1 and NaN outside `[0, 1]`.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn group(name: &str, fte: f64, p: [f64; 5]) -> GroupSubmission {
        GroupSubmission::new(name, "UOA22", fte, QualityProfile::new(p).unwrap()).unwrap()
    }

    /// Standard normal CDF by composite Simpson quadrature of the density.
    fn phi_by_quadrature(z: f64) -> f64 {
        let steps = 20_000;
        let h = z.abs() / steps as f64;
        let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = density(0.0) + density(z.abs());
        for i in 1..steps {
            let x = i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * density(x);
        }
        let half = acc * h / 3.0;
        if z >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }

    #[test]
    fn effective_sample_size_examples() {
        assert_eq!(effective_sample_size(1.0).unwrap(), 6.0);
        assert_eq!(effective_sample_size(10.0).unwrap(), 60.0);
        assert_eq!(effective_sample_size(0.5).unwrap(), 3.0);
        assert!(effective_sample_size(0.0).is_err());
        assert!(effective_sample_size(-2.0).is_err());
    }

    #[test]
    fn standard_error_examples() {
        let funding = WeightScheme::funding();
        let top = QualityProfile::new([1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(standard_error(&top, &funding, 3.0).unwrap(), 0.0);

        let uniform = QualityProfile::new([0.2; 5]).unwrap();
        let se10 = standard_error(&uniform, &funding, 10.0).unwrap();
        assert_abs_diff_eq!(se10, (6.96f64 / 60.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(se10, 0.34059, epsilon = 1e-5);
        let se40 = standard_error(&uniform, &funding, 40.0).unwrap();
        assert_abs_diff_eq!(se40, se10 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(se40, 0.170294, epsilon = 1e-6);
    }

    #[test]
    fn confidence_interval_examples() {
        let zero = confidence_interval(3.25, 0.0, 0.95).unwrap();
        assert_eq!((zero.interval_low, zero.interval_high), (3.25, 3.25));

        let ci = confidence_interval(3.25, 0.34059, 0.95).unwrap();
        assert_abs_diff_eq!(ci.interval_low, 2.58246, epsilon = 1e-4);
        assert_abs_diff_eq!(ci.interval_high, 3.91754, epsilon = 1e-4);

        let unit = confidence_interval(0.0, 1.0, 0.95).unwrap();
        assert_abs_diff_eq!(unit.interval_low, -1.959964, epsilon = 1e-6);
        assert_abs_diff_eq!(unit.interval_high, 1.959964, epsilon = 1e-6);

        assert!(confidence_interval(0.0, 1.0, 0.0).is_err());
        assert!(confidence_interval(0.0, 1.0, 1.0).is_err());
        assert!(confidence_interval(0.0, 1.0, f64::NAN).is_err());
        assert!(confidence_interval(0.0, -1.0, 0.95).is_err());
    }

    #[test]
    fn quantile_matches_quadrature_and_statrs() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let reference = Normal::new(0.0, 1.0).unwrap();
        for &p in &[1e-10, 1e-6, 0.001, 0.01, 0.02425, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999, 1.0 - 1e-7] {
            let z = normal_quantile(p);
            assert!((z - reference.inverse_cdf(p)).abs() < 1e-8 * z.abs().max(1.0), "p = {p}");
            if (0.001..=0.999).contains(&p) {
                assert!((phi_by_quadrature(z) - p).abs() < 1e-9, "p = {p}");
            }
        }
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert_eq!(normal_quantile(1.0), f64::INFINITY);
        assert!(normal_quantile(1.5).is_nan());
    }

    #[test]
    fn overlap_examples() {
        let funding = WeightScheme::funding();
        assert!(matches!(
            count_overall_mean_overlaps(&[], &funding, 0.95, BaselineMode::FteWeighted),
            Err(Error::NoData)
        ));

        let one = [group("a", 4.0, [0.25, 0.40, 0.30, 0.05, 0.0])];
        for mode in [BaselineMode::FteWeighted, BaselineMode::Unweighted] {
            let summary = count_overall_mean_overlaps(&one, &funding, 0.95, mode).unwrap();
            assert_abs_diff_eq!(summary.overall_mean, summary.estimates[0].estimate, epsilon = 1e-12);
            assert_eq!(summary.overlaps, vec![true]);
            assert_eq!(summary.count, 1);
        }

        let pair = [
            group("a", 2.0, [1.0, 0.0, 0.0, 0.0, 0.0]),
            group("b", 2.0, [0.0, 0.0, 0.0, 0.0, 1.0]),
        ];
        for mode in [BaselineMode::FteWeighted, BaselineMode::Unweighted] {
            let summary = count_overall_mean_overlaps(&pair, &funding, 0.95, mode).unwrap();
            assert_eq!(summary.overall_mean, 3.5);
            assert_eq!(summary.overlaps, vec![false, false]);
            assert_eq!(summary.count, 0);
        }
    }

    #[test]
    fn baseline_modes_differ_with_unequal_fte() {
        let funding = WeightScheme::funding();
        let groups = [
            group("a", 1.0, [1.0, 0.0, 0.0, 0.0, 0.0]),
            group("b", 3.0, [0.0, 1.0, 0.0, 0.0, 0.0]),
        ];
        assert_abs_diff_eq!(
            overall_mean(&groups, &funding, BaselineMode::FteWeighted).unwrap(),
            0.25 * 7.0 + 0.75 * 3.0,
            epsilon = 1e-12
        );
        assert_eq!(overall_mean(&groups, &funding, BaselineMode::Unweighted).unwrap(), 5.0);
    }

    #[test]
    fn boundary_touch_counts_as_overlap() {
        let est = confidence_interval(2.0, 0.5, 0.95).unwrap();
        assert!(est.contains(est.interval_low));
        assert!(est.contains(est.interval_high));
    }

    fn arb_block_profile() -> impl Strategy<Value = QualityProfile> {
        prop::collection::vec(0usize..5, 20).prop_map(|blocks| {
            let mut counts = [0u32; 5];
            for b in blocks {
                counts[b] += 1;
            }
            QualityProfile::from_percentages(counts.map(|c| c as f64 * 5.0)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn se_scales_with_inverse_root_fte(p in arb_block_profile(), fte in 0.1..200.0f64, c in 0.1..50.0f64) {
            let w = WeightScheme::funding();
            let base = standard_error(&p, &w, fte).unwrap();
            let scaled = standard_error(&p, &w, c * fte).unwrap();
            prop_assert!((scaled - base / c.sqrt()).abs() <= 1e-12 * base.max(1e-300));
        }

        #[test]
        fn width_is_monotone(se in 0.0..5.0f64, extra in 0.0..5.0f64, l1 in 0.01..0.98f64, dl in 0.0..0.01f64) {
            let narrow = confidence_interval(1.0, se, l1).unwrap();
            let wider_level = confidence_interval(1.0, se, l1 + dl).unwrap();
            let wider_se = confidence_interval(1.0, se + extra, l1).unwrap();
            prop_assert!(wider_level.width() >= narrow.width());
            prop_assert!(wider_se.width() >= narrow.width());
            prop_assert!(narrow.interval_low <= narrow.estimate && narrow.estimate <= narrow.interval_high);
        }

        #[test]
        fn overlap_set_invariant_under_weight_scaling(
            profiles in prop::collection::vec(arb_block_profile(), 1..12),
            ftes in prop::collection::vec(0.5..60.0f64, 12),
            c in 0.1..20.0f64,
            unweighted in any::<bool>(),
        ) {
            let groups: Vec<GroupSubmission> = profiles
                .iter()
                .zip(&ftes)
                .enumerate()
                .map(|(i, (p, &fte))| GroupSubmission::new(format!("g{i}"), "u", fte, *p).unwrap())
                .collect();
            let mode = if unweighted { BaselineMode::Unweighted } else { BaselineMode::FteWeighted };
            let base_w = WeightScheme::funding();
            let scaled_w = WeightScheme::custom("scaled", base_w.weights().map(|w| w * c)).unwrap();
            let base = count_overall_mean_overlaps(&groups, &base_w, 0.95, mode).unwrap();
            let scaled = count_overall_mean_overlaps(&groups, &scaled_w, 0.95, mode).unwrap();
            for (b, s) in base.estimates.iter().zip(&scaled.estimates) {
                prop_assert!((s.estimate - c * b.estimate).abs() < 1e-9 * c.max(1.0));
                prop_assert!((s.std_error - c * b.std_error).abs() < 1e-9 * c.max(1.0));
                prop_assert!((s.interval_low - c * b.interval_low).abs() < 1e-9 * c.max(1.0));
                prop_assert!((s.interval_high - c * b.interval_high).abs() < 1e-9 * c.max(1.0));
            }
            // Compare only groups whose boundary is not within rounding of the baseline.
            for (i, (b, s)) in base.overlaps.iter().zip(&scaled.overlaps).enumerate() {
                let e = &base.estimates[i];
                let margin = (e.interval_low - base.overall_mean).abs().min((e.interval_high - base.overall_mean).abs());
                if margin > 1e-9 {
                    prop_assert_eq!(b, s);
                }
            }
        }
    }
}
