use alloc::vec::Vec;

/// Maximum-weight bipartite matching on a non-negative `rows × cols` matrix
/// (Hungarian algorithm with potentials, `O(n²m)`).
///
/// Returns `(row, col)` pairs sorted by row. Pairs with weight 0 are left out.
pub fn max_weight_matching(weights: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let transposed = rows > cols;
    let (n, m) = if transposed { (cols, rows) } else { (rows, cols) };
    let cost = |i: usize, j: usize| -> f64 {
        if transposed {
            -weights[j][i]
        } else {
            -weights[i][j]
        }
    };

    // 1-based potentials; p[j] is the row assigned to column j (0 = none).
    let mut u = alloc::vec![0.0; n + 1];
    let mut v = alloc::vec![0.0; m + 1];
    let mut p = alloc::vec![0usize; m + 1];
    let mut way = alloc::vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = alloc::vec![f64::INFINITY; m + 1];
        let mut used = alloc::vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| p[j] != 0)
        .map(|j| {
            let (i, j) = (p[j] - 1, j - 1);
            if transposed {
                (j, i)
            } else {
                (i, j)
            }
        })
        .filter(|&(r, c)| weights[r][c] > 0.0)
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    /// Best total over every partial matching, by exhaustive search.
    fn brute_force(w: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == w.len() {
            return 0.0;
        }
        let mut best = brute_force(w, row + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(w[row][c] + brute_force(w, row + 1, used));
                used[c] = false;
            }
        }
        best
    }

    fn total(w: &[Vec<f64>], m: &[(usize, usize)]) -> f64 {
        m.iter().map(|&(r, c)| w[r][c]).sum()
    }

    #[test]
    fn diagonal_dominant() {
        let w = vec![vec![0.9, 0.1], vec![0.2, 0.8]];
        assert_eq!(max_weight_matching(&w), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn off_diagonal_wins() {
        let w = vec![vec![0.6, 0.5], vec![0.5, 0.1]];
        assert_eq!(max_weight_matching(&w), vec![(0, 1), (1, 0)]);
        assert!((total(&w, &max_weight_matching(&w)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zeros_and_empty() {
        assert!(max_weight_matching(&[vec![0.0; 3], vec![0.0; 3]]).is_empty());
        assert!(max_weight_matching(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn equals_brute_force(
            rows in 1usize..=6,
            cols in 1usize..=6,
            seed in proptest::collection::vec(0u32..1000, 36),
        ) {
            let w: Vec<Vec<f64>> = (0..rows)
                .map(|r| (0..cols).map(|c| {
                    let x = seed[r * 6 + c];
                    if x < 150 { 0.0 } else { f64::from(x) / 1000.0 }
                }).collect())
                .collect();
            let m = max_weight_matching(&w);
            let mut rows_seen = vec![false; rows];
            let mut cols_seen = vec![false; cols];
            for &(r, c) in &m {
                prop_assert!(!rows_seen[r] && !cols_seen[c]);
                rows_seen[r] = true;
                cols_seen[c] = true;
            }
            let oracle = brute_force(&w, 0, &mut vec![false; cols]);
            prop_assert!((total(&w, &m) - oracle).abs() < 1e-9);
        }
    }
}
