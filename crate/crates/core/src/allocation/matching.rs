//! Maximum-weight assignment of rows to distinct columns (Hungarian
//! method, O(n²m)).

/// Best assignment of every row to a distinct column, maximizing the total
/// weight. `weights[i][j] = None` forbids the pair. Returns the total and
/// each row's column, or `None` if no complete assignment exists.
pub(crate) fn max_weight_assignment(weights: &[Vec<Option<f64>>], cols: usize) -> Option<(f64, Vec<usize>)> {
    let n = weights.len();
    if n == 0 {
        return Some((0.0, Vec::new()));
    }
    if cols < n {
        return None;
    }
    let max_abs = weights
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, w| m.max(w.abs()));
    let forbidden = (max_abs + 1.0) * (2 * n + 2) as f64;
    let cost = |i: usize, j: usize| -> f64 {
        match weights[i - 1][j - 1] {
            Some(w) => -w,
            None => forbidden,
        }
    };

    let m = cols;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
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

    let mut row_col = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_col[p[j] - 1] = j - 1;
        }
    }
    let mut total = 0.0;
    for (i, &j) in row_col.iter().enumerate() {
        total += weights[i][j]?;
    }
    Some((total, row_col))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(weights: &[Vec<Option<f64>>], cols: usize) -> Option<f64> {
        fn rec(w: &[Vec<Option<f64>>], i: usize, used: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
            if i == w.len() {
                if best.is_none_or(|b| acc > b) {
                    *best = Some(acc);
                }
                return;
            }
            for j in 0..used.len() {
                if let (false, Some(x)) = (used[j], w[i][j]) {
                    used[j] = true;
                    rec(w, i + 1, used, acc + x, best);
                    used[j] = false;
                }
            }
        }
        let mut best = None;
        rec(weights, 0, &mut vec![false; cols], 0.0, &mut best);
        best
    }

    #[test]
    fn small_cases() {
        let w = vec![vec![Some(1.0), Some(5.0)], vec![Some(4.0), Some(1.0)]];
        let (t, a) = max_weight_assignment(&w, 2).unwrap();
        assert_eq!(t, 9.0);
        assert_eq!(a, vec![1, 0]);
        let w = vec![vec![Some(1.0), None], vec![Some(4.0), None]];
        assert!(max_weight_assignment(&w, 2).is_none());
        assert!(max_weight_assignment(&[vec![Some(1.0)], vec![Some(1.0)]], 1).is_none());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            n in 1usize..5,
            extra in 0usize..3,
            seed in proptest::collection::vec((0.0f64..100.0, 0u8..4), 40),
        ) {
            let m = n + extra;
            let w: Vec<Vec<Option<f64>>> = (0..n)
                .map(|i| (0..m).map(|j| {
                    let (x, f) = seed[(i * m + j) % seed.len()];
                    (f != 0).then_some(x)
                }).collect())
                .collect();
            let fast = max_weight_assignment(&w, m).map(|r| r.0);
            let slow = brute(&w, m);
            match (fast, slow) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9 * b.abs().max(1.0)),
                (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
            }
        }
    }
}
