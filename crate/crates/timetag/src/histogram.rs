//! Two- and three-fold coincidence histograms.
//!
//! Bins are centred on integer multiples of the bin width, so zero delay
//! sits in the middle of bin `half_bins` and the histogram covers
//! `[-(half_bins + ½)·w, (half_bins + ½)·w)`. Delays are compared in doubled
//! integer picoseconds to keep odd bin widths exact.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TagError};
use crate::tags::TagStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binning {
    pub bin_width_ps: i64,
    pub half_bins: usize,
}

impl Binning {
    pub fn new(bin_width_ps: i64, half_bins: usize) -> Result<Self> {
        if bin_width_ps <= 0 {
            return Err(TagError::InvalidConfig("bin width must be positive".into()));
        }
        Ok(Self { bin_width_ps, half_bins })
    }

    /// Smallest symmetric binning reaching at least `range_ps` (rounded to
    /// the nearest whole bin).
    pub fn covering(bin_width_ps: i64, range_ps: f64) -> Result<Self> {
        if !(range_ps.is_finite() && range_ps >= 0.0) {
            return Err(TagError::InvalidConfig("range must be finite and non-negative".into()));
        }
        Self::new(bin_width_ps, 0)?;
        Self::new(bin_width_ps, (range_ps / bin_width_ps as f64).round() as usize)
    }

    pub fn n_bins(&self) -> usize {
        2 * self.half_bins + 1
    }

    /// Half-width `T` of the covered delay interval.
    pub fn range_ps(&self) -> f64 {
        (self.half_bins as f64 + 0.5) * self.bin_width_ps as f64
    }

    /// `2T` in integer ps.
    pub(crate) fn doubled_range(&self) -> i64 {
        self.n_bins() as i64 * self.bin_width_ps
    }

    pub fn center_ps(&self, i: usize) -> f64 {
        (i as f64 - self.half_bins as f64) * self.bin_width_ps as f64
    }

    pub fn index(&self, delay_ps: i64) -> Option<usize> {
        let w2 = self.doubled_range();
        let x = 2 * delay_ps + w2;
        if x < 0 || x >= 2 * w2 {
            return None;
        }
        Some((x / (2 * self.bin_width_ps)) as usize)
    }

    #[inline]
    fn index_unchecked(&self, delay_ps: i64) -> usize {
        ((2 * delay_ps + self.doubled_range()) / (2 * self.bin_width_ps)) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram1D {
    pub binning: Binning,
    pub counts: Vec<u64>,
    pub acquisition_s: f64,
}

impl Histogram1D {
    pub fn new(binning: Binning, counts: Vec<u64>, acquisition_s: f64) -> Result<Self> {
        if counts.len() != binning.n_bins() {
            return Err(TagError::InvalidConfig(format!(
                "{} counts for {} bins",
                counts.len(),
                binning.n_bins()
            )));
        }
        Ok(Self {
            binning,
            counts,
            acquisition_s,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["delay_ps", "counts"])?;
        for (i, c) in self.counts.iter().enumerate() {
            out.serialize((self.binning.center_ps(i), c))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Row index is the `B − A` delay, column index the `C − A` delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub binning: Binning,
    pub counts: Vec<u64>,
    pub acquisition_s: f64,
}

impl Histogram2D {
    pub fn new(binning: Binning, counts: Vec<u64>, acquisition_s: f64) -> Result<Self> {
        let n = binning.n_bins();
        if counts.len() != n * n {
            return Err(TagError::InvalidConfig(format!("{} counts for a {n}×{n} grid", counts.len())));
        }
        Ok(Self {
            binning,
            counts,
            acquisition_s,
        })
    }

    pub fn side(&self) -> usize {
        self.binning.n_bins()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.side() + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero cells only.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["delay_b_ps", "delay_c_ps", "counts"])?;
        let n = self.side();
        for (k, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                out.serialize((self.binning.center_ps(k / n), self.binning.center_ps(k % n), c))?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Partner indices `[lo, hi)` in `b` with `b − a` inside the window, advanced
/// monotonically as `a` increases.
struct Window {
    lo: usize,
    hi: usize,
}

impl Window {
    fn start(b: &[i64], a: i64, w2: i64) -> Self {
        Self {
            lo: b.partition_point(|&x| 2 * (x - a) < -w2),
            hi: b.partition_point(|&x| 2 * (x - a) < w2),
        }
    }

    #[inline]
    fn advance(&mut self, b: &[i64], a: i64, w2: i64) {
        while self.lo < b.len() && 2 * (b[self.lo] - a) < -w2 {
            self.lo += 1;
        }
        self.hi = self.hi.max(self.lo);
        while self.hi < b.len() && 2 * (b[self.hi] - a) < w2 {
            self.hi += 1;
        }
    }
}

pub(crate) fn sweep2(a: &[i64], b: &[i64], binning: &Binning, counts: &mut [u64]) {
    let Some(&first) = a.first() else { return };
    let w2 = binning.doubled_range();
    let mut win = Window::start(b, first, w2);
    for &ta in a {
        win.advance(b, ta, w2);
        for &tb in &b[win.lo..win.hi] {
            counts[binning.index_unchecked(tb - ta)] += 1;
        }
    }
}

pub(crate) fn sweep3(a: &[i64], b: &[i64], c: &[i64], binning: &Binning, counts: &mut [u64]) {
    let Some(&first) = a.first() else { return };
    let w2 = binning.doubled_range();
    let n = binning.n_bins();
    let mut wb = Window::start(b, first, w2);
    let mut wc = Window::start(c, first, w2);
    for &ta in a {
        wb.advance(b, ta, w2);
        wc.advance(c, ta, w2);
        if wc.lo == wc.hi {
            continue;
        }
        for &tb in &b[wb.lo..wb.hi] {
            let row = binning.index_unchecked(tb - ta) * n;
            for &tc in &c[wc.lo..wc.hi] {
                counts[row + binning.index_unchecked(tc - ta)] += 1;
            }
        }
    }
}

/// Runs `sweep` over `pieces` contiguous slices of `a` in parallel and sums
/// the partial histograms. Integer addition makes the result independent of
/// the split.
fn split_sweep(a: &[i64], pieces: usize, len: usize, sweep: impl Fn(&[i64], &mut [u64]) + Sync) -> Vec<u64> {
    let pieces = pieces.clamp(1, a.len().max(1));
    let chunk = a.len().div_ceil(pieces).max(1);
    let partials: Vec<Vec<u64>> = a
        .par_chunks(chunk)
        .map(|part| {
            let mut h = vec![0u64; len];
            sweep(part, &mut h);
            h
        })
        .collect();
    let mut total = vec![0u64; len];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

fn span_s(channels: &[&[i64]]) -> f64 {
    let lo = channels.iter().filter_map(|c| c.first()).min();
    let hi = channels.iter().filter_map(|c| c.last()).max();
    match (lo, hi) {
        (Some(lo), Some(hi)) => (hi - lo) as f64 * 1e-12,
        _ => 0.0,
    }
}

fn nonempty(tags: &TagStream, ch: u8) -> Result<Vec<i64>> {
    let t = tags.channel(ch);
    if t.is_empty() {
        return Err(TagError::EmptyChannel(ch));
    }
    Ok(t)
}

/// Two-fold histogram from sorted timestamp lists.
pub fn histogram_2_sorted(a: &[i64], b: &[i64], binning: Binning, pieces: usize) -> Histogram1D {
    let counts = split_sweep(a, pieces, binning.n_bins(), |part, h| sweep2(part, b, &binning, h));
    Histogram1D {
        binning,
        counts,
        acquisition_s: span_s(&[a, b]),
    }
}

/// Three-fold histogram from sorted timestamp lists.
pub fn histogram_3_sorted(a: &[i64], b: &[i64], c: &[i64], binning: Binning, pieces: usize) -> Histogram2D {
    let n = binning.n_bins();
    let counts = split_sweep(a, pieces, n * n, |part, h| sweep3(part, b, c, &binning, h));
    Histogram2D {
        binning,
        counts,
        acquisition_s: span_s(&[a, b, c]),
    }
}

/// Histogram of `t_B − t_A` over all tag pairs within the binning range.
pub fn coincidence_histogram_2(tags: &TagStream, ch_a: u8, ch_b: u8, binning: Binning) -> Result<Histogram1D> {
    coincidence_histogram_2_with(tags, ch_a, ch_b, binning, rayon::current_num_threads())
}

/// As [`coincidence_histogram_2`] with an explicit number of parallel pieces.
pub fn coincidence_histogram_2_with(
    tags: &TagStream,
    ch_a: u8,
    ch_b: u8,
    binning: Binning,
    pieces: usize,
) -> Result<Histogram1D> {
    let a = nonempty(tags, ch_a)?;
    let b = nonempty(tags, ch_b)?;
    Ok(histogram_2_sorted(&a, &b, binning, pieces))
}

/// Histogram of `(t_B − t_A, t_C − t_A)` over all tag triples.
pub fn coincidence_histogram_3(
    tags: &TagStream,
    ch_a: u8,
    ch_b: u8,
    ch_c: u8,
    binning: Binning,
) -> Result<Histogram2D> {
    coincidence_histogram_3_with(tags, ch_a, ch_b, ch_c, binning, rayon::current_num_threads())
}

pub fn coincidence_histogram_3_with(
    tags: &TagStream,
    ch_a: u8,
    ch_b: u8,
    ch_c: u8,
    binning: Binning,
    pieces: usize,
) -> Result<Histogram2D> {
    let a = nonempty(tags, ch_a)?;
    let b = nonempty(tags, ch_b)?;
    let c = nonempty(tags, ch_c)?;
    Ok(histogram_3_sorted(&a, &b, &c, binning, pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tags::TagRecord;

    fn naive2(a: &[i64], b: &[i64], bin: &Binning) -> Vec<u64> {
        let mut h = vec![0; bin.n_bins()];
        for &x in a {
            for &y in b {
                if let Some(i) = bin.index(y - x) {
                    h[i] += 1;
                }
            }
        }
        h
    }

    #[test]
    fn binning_geometry() {
        let b = Binning::new(100, 2).unwrap();
        assert_eq!(b.n_bins(), 5);
        assert_eq!(b.range_ps(), 250.0);
        assert_eq!(b.index(0), Some(2));
        assert_eq!(b.index(49), Some(2));
        assert_eq!(b.index(50), Some(3));
        assert_eq!(b.index(-50), Some(2));
        assert_eq!(b.index(-51), Some(1));
        assert_eq!(b.index(-250), Some(0));
        assert_eq!(b.index(-251), None);
        assert_eq!(b.index(249), Some(4));
        assert_eq!(b.index(250), None);
        let odd = Binning::new(7, 1).unwrap();
        assert_eq!(odd.index(3), Some(1));
        assert_eq!(odd.index(4), Some(2));
        assert_eq!(odd.index(-4), Some(0));
        assert_eq!(odd.index(-3), Some(1));
        assert_eq!(Binning::covering(100, 1234.0).unwrap().half_bins, 12);
        assert!(Binning::new(0, 3).is_err());
    }

    #[test]
    fn identical_tags_fill_central_bin() {
        let recs: Vec<TagRecord> = (0..50)
            .flat_map(|k| [TagRecord::new(0, k * 1000), TagRecord::new(1, k * 1000)])
            .collect();
        let s = TagStream::new(2, recs).unwrap();
        let bin = Binning::new(100, 3).unwrap();
        let h = coincidence_histogram_2(&s, 0, 1, bin).unwrap();
        assert_eq!(h.counts, vec![0, 0, 0, 50, 0, 0, 0]);
        let h3 = coincidence_histogram_3(&s, 0, 1, 1, bin).unwrap();
        assert_eq!(h3.get(3, 3), 50);
        assert_eq!(h3.total(), 50);
    }

    #[test]
    fn sweep_matches_naive_pairs() {
        let a: Vec<i64> = (0..200).map(|k| (k * 7919) % 5003 - 2000).collect::<Vec<_>>();
        let b: Vec<i64> = (0..150).map(|k| (k * 104_729) % 4001 - 1500).collect::<Vec<_>>();
        let (mut a, mut b) = (a, b);
        a.sort();
        b.sort();
        let bin = Binning::new(37, 9).unwrap();
        for pieces in [1, 3, 64] {
            assert_eq!(histogram_2_sorted(&a, &b, bin, pieces).counts, naive2(&a, &b, &bin));
        }
    }

    #[test]
    fn empty_channel_is_an_error() {
        let s = TagStream::new(2, vec![TagRecord::new(0, 1)]).unwrap();
        let bin = Binning::new(10, 1).unwrap();
        assert!(matches!(
            coincidence_histogram_2(&s, 0, 1, bin),
            Err(TagError::EmptyChannel(1))
        ));
    }

    #[test]
    fn csv_dumps() {
        let bin = Binning::new(10, 1).unwrap();
        let h = Histogram1D::new(bin, vec![1, 2, 3], 1.0).unwrap();
        let mut out = Vec::new();
        h.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "delay_ps,counts\n-10.0,1\n0.0,2\n10.0,3\n");
        let mut c = vec![0; 9];
        c[5] = 4;
        let h = Histogram2D::new(bin, c, 1.0).unwrap();
        let mut out = Vec::new();
        h.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "delay_b_ps,delay_c_ps,counts\n0.0,10.0,4\n");
        assert!(Histogram1D::new(bin, vec![1], 1.0).is_err());
    }
}
