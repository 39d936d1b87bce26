//! Local-maximum search with a moving window and a Poisson prominence test.

use std::collections::VecDeque;

/// Running extremum over `[i − half, i + half]` (clipped to the slice).
fn sliding(v: &[u64], half: usize, keep: impl Fn(u64, u64) -> bool) -> Vec<u64> {
    let n = v.len();
    let mut out = vec![0; n];
    let mut q: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for (i, o) in out.iter_mut().enumerate() {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while q.back().is_some_and(|&j| !keep(v[j], v[next])) {
                q.pop_back();
            }
            q.push_back(next);
            next += 1;
        }
        while q.front().is_some_and(|&j| j + half < i) {
            q.pop_front();
        }
        *o = v[q[0]];
    }
    out
}

/// `keep(old, new)` is true when `old` should stay ahead of `new` in the queue.
fn sliding_max(v: &[u64], half: usize) -> Vec<u64> {
    sliding(v, half, |old, new| old > new)
}

fn sliding_min(v: &[u64], half: usize) -> Vec<u64> {
    sliding(v, half, |old, new| old < new)
}

fn prominent(value: u64, base: u64, sigmas: f64) -> bool {
    value as f64 - base as f64 >= sigmas * (base.max(1) as f64).sqrt()
}

/// Indices that equal the window maximum and stand `sigmas` Poisson
/// standard deviations above the window minimum.
pub(crate) fn local_maxima_1d(v: &[u64], half: usize, sigmas: f64) -> Vec<usize> {
    if v.is_empty() {
        return Vec::new();
    }
    let mx = sliding_max(v, half);
    let mn = sliding_min(v, half);
    (0..v.len())
        .filter(|&i| v[i] == mx[i] && prominent(v[i], mn[i], sigmas))
        .collect()
}

fn separable(v: &[u64], side: usize, half: usize, f: fn(&[u64], usize) -> Vec<u64>) -> Vec<u64> {
    let mut rows = vec![0u64; v.len()];
    for r in 0..side {
        rows[r * side..(r + 1) * side].copy_from_slice(&f(&v[r * side..(r + 1) * side], half));
    }
    let mut out = vec![0u64; v.len()];
    let mut col = vec![0u64; side];
    for c in 0..side {
        for r in 0..side {
            col[r] = rows[r * side + c];
        }
        for (r, x) in f(&col, half).into_iter().enumerate() {
            out[r * side + c] = x;
        }
    }
    out
}

/// Two-dimensional analogue of [`local_maxima_1d`] over square windows;
/// returns `(row, col)` pairs.
pub(crate) fn local_maxima_2d(v: &[u64], side: usize, half: usize, sigmas: f64) -> Vec<(usize, usize)> {
    if v.is_empty() {
        return Vec::new();
    }
    let mx = separable(v, side, half, sliding_max);
    let mn = separable(v, side, half, sliding_min);
    (0..v.len())
        .filter(|&i| v[i] == mx[i] && prominent(v[i], mn[i], sigmas))
        .map(|i| (i / side, i % side))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(v: &[u64], half: usize, max: bool) -> Vec<u64> {
        (0..v.len())
            .map(|i| {
                let w = &v[i.saturating_sub(half)..(i + half + 1).min(v.len())];
                if max {
                    *w.iter().max().unwrap()
                } else {
                    *w.iter().min().unwrap()
                }
            })
            .collect()
    }

    #[test]
    fn sliding_extrema_match_naive() {
        let v: Vec<u64> = (0..97u64).map(|k| (k * 37 + 11) % 23 + (k % 7) * 3).collect();
        for half in [0, 1, 4, 30, 200] {
            assert_eq!(sliding_max(&v, half), naive(&v, half, true));
            assert_eq!(sliding_min(&v, half), naive(&v, half, false));
        }
    }

    #[test]
    fn finds_periodic_peaks() {
        let mut v = vec![0u64; 100];
        for k in [5, 25, 45, 65, 85] {
            v[k] = 40;
            v[k - 1] = 10;
            v[k + 1] = 12;
        }
        v[30] = 3;
        assert_eq!(local_maxima_1d(&v, 10, 5.0), vec![5, 25, 45, 65, 85]);

        let side = 30;
        let mut g = vec![0u64; side * side];
        g[5 * side + 5] = 50;
        g[15 * side + 25] = 60;
        g[20 * side + 3] = 2;
        assert_eq!(local_maxima_2d(&g, side, 4, 5.0), vec![(5, 5), (15, 25)]);
    }
}
