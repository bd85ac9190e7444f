//! Tie-aware ranking, rank 1 = highest score.

/// How tied scores share rank positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Average of the positions spanned by the tie.
    #[default]
    Midrank,
    /// Smallest (best) position spanned by the tie.
    Minrank,
}

/// Ranks `scores` in descending order. Returns one rank per input.
///
/// Scores are compared with `f64::total_cmp`; callers should not pass NaN.
pub fn rank_with_ties(scores: &[f64], policy: TiePolicy) -> Vec<f64> {
    let mut half = vec![0u32; scores.len()];
    let mut order: Vec<usize> = (0..scores.len()).collect();
    half_ranks_into(scores, policy, &mut order, &mut half);
    half.into_iter().map(|h| h as f64 / 2.0).collect()
}

/// Ranks expressed in half units (`2 · rank`) so midranks stay integral.
///
/// `order` is scratch space of the same length as `scores`.
pub(crate) fn half_ranks_into(scores: &[f64], policy: TiePolicy, order: &mut [usize], out: &mut [u32]) {
    debug_assert_eq!(scores.len(), order.len());
    debug_assert_eq!(scores.len(), out.len());
    for (i, slot) in order.iter_mut().enumerate() {
        *slot = i;
    }
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut start = 0;
    while start < order.len() {
        let value = scores[order[start]];
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == value {
            end += 1;
        }
        // Positions start+1 ..= end (1-based).
        let half_rank = match policy {
            TiePolicy::Midrank => (start + 1 + end) as u32,
            TiePolicy::Minrank => 2 * (start + 1) as u32,
        };
        for &idx in &order[start..end] {
            out[idx] = half_rank;
        }
        start = end;
    }
}
