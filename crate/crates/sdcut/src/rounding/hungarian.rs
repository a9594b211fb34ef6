//! Hungarian algorithm with dual potentials for rectangular min-cost
//! assignment, K rows into L >= K columns. O(K^2 L) via shortest augmenting
//! paths.

/// Returns `assign` of length `k` with `assign[i]` the column matched to row
/// i, minimizing the total cost. `cost` is row-major k x l with finite
/// entries; requires 1 <= k <= l.
pub fn min_cost_assignment(cost: &[f64], k: usize, l: usize) -> Vec<usize> {
    debug_assert!(k >= 1 && k <= l && cost.len() == k * l);
    // 1-based arrays; index 0 is the virtual unmatched slot.
    let mut u = vec![0.0f64; k + 1];
    let mut v = vec![0.0f64; l + 1];
    // match_row[j] = row matched to column j, 0 when free.
    let mut match_row = vec![0usize; l + 1];
    let mut way = vec![0usize; l + 1];
    for i in 1..=k {
        match_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; l + 1];
        let mut used = vec![false; l + 1];
        // Grow the alternating tree until a free column is reached.
        loop {
            used[j0] = true;
            let i0 = match_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=l {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * l + (j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=l {
                if used[j] {
                    u[match_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if match_row[j0] == 0 {
                break;
            }
        }
        // Flip matched edges along the augmenting path.
        while j0 != 0 {
            let j1 = way[j0];
            match_row[j0] = match_row[j1];
            j0 = j1;
        }
    }
    let mut assign = vec![usize::MAX; k];
    for j in 1..=l {
        if match_row[j] != 0 {
            assign[match_row[j] - 1] = j - 1;
        }
    }
    debug_assert!(assign.iter().all(|&j| j != usize::MAX));
    assign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_costs_match_diagonally() {
        let cost = vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(min_cost_assignment(&cost, 3, 3), vec![0, 1, 2]);
    }

    #[test]
    fn forced_permutation() {
        // Row 0 must avoid its cheap column so row 1 can take it.
        let cost = vec![0.0, 1.0, 0.0, 10.0];
        assert_eq!(min_cost_assignment(&cost, 2, 2), vec![1, 0]);
    }

    #[test]
    fn rectangular_leaves_expensive_columns_free() {
        let cost = vec![5.0, 1.0, 9.0, 2.0, 7.0, 3.0];
        // Optimal: row 0 -> col 1 (1), row 1 -> col 0 (2), total 3.
        assert_eq!(min_cost_assignment(&cost, 2, 3), vec![1, 0]);
    }
}
