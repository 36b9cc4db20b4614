//! Small numeric helpers shared by the loss kernels and reports.

const PAIRWISE_BLOCK: usize = 8;

/// Sum with pairwise (cascade) accumulation; error grows as O(log n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}
