//! Exact linear assignment on square cost matrices (Hungarian method with potentials).

use nalgebra::DMatrix;

/// Sum of `cost[i, perm[i]]` in row order.
pub fn permutation_cost(cost: &DMatrix<f64>, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &m)| cost[(i, m)]).sum()
}

/// Minimum-cost perfect matching. Returns `perm` with row `i` assigned to column `perm[i]`.
pub fn hungarian(cost: &DMatrix<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment cost must be square");
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays, column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
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
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    perm
}

/// Exhaustive minimum over all permutations (Heap's algorithm); first minimizer wins.
pub fn brute_force(cost: &DMatrix<f64>) -> (f64, Vec<usize>) {
    let n = cost.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = (permutation_cost(cost, &perm), perm.clone());
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = permutation_cost(cost, &perm);
            if v < best.0 {
                best = (v, perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_known_instance() {
        let cost = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0]);
        let perm = hungarian(&cost);
        assert_eq!(permutation_cost(&cost, &perm), 5.0);
        assert_eq!(brute_force(&cost).0, 5.0);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=7 {
            for _ in 0..30 {
                let cost = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 10.0 - 3.0);
                let perm = hungarian(&cost);
                let mut sorted = perm.clone();
                sorted.sort();
                assert_eq!(sorted, (0..n).collect::<Vec<_>>());
                assert_eq!(permutation_cost(&cost, &perm), brute_force(&cost).0);
            }
        }
    }

    #[test]
    fn brute_force_visits_all_permutations() {
        // cost with a unique minimum at the reversal
        let n = 5;
        let cost = DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 0.0 } else { 1.0 });
        let (v, perm) = brute_force(&cost);
        assert_eq!(v, 0.0);
        assert_eq!(perm, vec![4, 3, 2, 1, 0]);
    }
}
