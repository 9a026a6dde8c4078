//! Kuhn-Munkres assignment on dense cost matrices.

/// Minimum-cost perfect matching of a square matrix (`cost[row][col]`).
///
/// Shortest augmenting paths with row/column potentials, O(n^3). Returns
/// the column assigned to every row.
pub fn solve_square(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based with a virtual column 0, following the classic formulation.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1]; // owner[col] = row matched to col
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut next = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[r - 1][col - 1] - u[r] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    next = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = next;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for col in 1..=n {
        assignment[owner[col] - 1] = col - 1;
    }
    assignment
}

/// Optimal one-to-one matching of a rectangular `rows x cols` matrix.
///
/// The matrix is padded to square with `pad_cost`; only pairs between real
/// rows and real columns are returned, `min(rows, cols)` of them, sorted by row.
pub fn solve_rectangular(cost: &[Vec<f64>], cols: usize, pad_cost: f64) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let n = rows.max(cols);
    let square: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| if r < rows && c < cols { cost[r][c] } else { pad_cost })
                .collect()
        })
        .collect();
    solve_square(&square)
        .into_iter()
        .enumerate()
        .filter(|&(r, c)| r < rows && c < cols)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(cost: &[Vec<f64>], a: &[usize]) -> f64 {
        a.iter().enumerate().map(|(r, &c)| cost[r][c]).sum()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn known_three_by_three() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = solve_square(&cost);
        assert_eq!(total(&cost, &a), 5.0);
    }

    #[test]
    fn matches_brute_force_on_small_matrices() {
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) as f64 / (1u64 << 31) as f64
        };
        for n in 1..=6 {
            for _ in 0..50 {
                let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let best = permutations(n)
                    .iter()
                    .map(|p| total(&cost, p))
                    .fold(f64::INFINITY, f64::min);
                let a = solve_square(&cost);
                let mut seen = a.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..n).collect::<Vec<_>>());
                assert!((total(&cost, &a) - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rectangular_returns_min_side_pairs() {
        let cost = vec![vec![0.9, 0.1, 0.5]];
        assert_eq!(solve_rectangular(&cost, 3, 1.0), vec![(0, 1)]);
        let cost = vec![vec![0.9], vec![0.2], vec![0.5]];
        assert_eq!(solve_rectangular(&cost, 1, 1.0), vec![(1, 0)]);
        assert!(solve_rectangular(&[], 3, 1.0).is_empty());
    }
}
