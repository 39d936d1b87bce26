//! Bounded-memory histogramming of time-ordered binary tag files.
//!
//! Records are consumed in timestamp order. A reference tag is swept once
//! the stream has advanced at least one histogram range past it, and partner
//! tags are dropped once no pending reference can reach them, so memory is
//! proportional to the tag rate times the flush interval.

use std::io::Read;

use crate::error::{Result, TagError};
use crate::histogram::{sweep2, sweep3, Binning, Histogram1D, Histogram2D};
use crate::tags::{read_record, Header};

struct Buffers {
    reference: Vec<i64>,
    partners: Vec<Vec<i64>>,
}

impl Buffers {
    /// Sweeps references that can no longer gain partners and trims
    /// partners that no later reference can reach.
    fn flush(&mut self, now: Option<i64>, w2: i64, sweep: &mut impl FnMut(&[i64], &[Vec<i64>])) {
        let ready = match now {
            Some(t) => self.reference.partition_point(|&a| 2 * (t - a) >= w2),
            None => self.reference.len(),
        };
        if ready > 0 {
            sweep(&self.reference[..ready], &self.partners);
            self.reference.drain(..ready);
        }
        let oldest = self.reference.first().copied().or(now);
        for p in &mut self.partners {
            let keep_from = match oldest {
                Some(a) => p.partition_point(|&b| 2 * (b - a) < -w2),
                None => p.len(),
            };
            p.drain(..keep_from);
        }
    }
}

struct Span {
    lo: Option<i64>,
    hi: Option<i64>,
}

impl Span {
    fn note(&mut self, t: i64) {
        self.lo = Some(self.lo.map_or(t, |v| v.min(t)));
        self.hi = Some(self.hi.map_or(t, |v| v.max(t)));
    }

    fn seconds(&self) -> f64 {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => (hi - lo) as f64 * 1e-12,
            _ => 0.0,
        }
    }
}

fn run<R: Read>(
    mut r: R,
    reference: u8,
    partners: &[u8],
    binning: &Binning,
    flush_ps: i64,
    mut sweep: impl FnMut(&[i64], &[Vec<i64>]),
) -> Result<f64> {
    if flush_ps <= 0 {
        return Err(TagError::InvalidConfig("flush interval must be positive".into()));
    }
    let header = Header::read(&mut r)?;
    for &ch in std::iter::once(&reference).chain(partners) {
        if u16::from(ch) >= header.channel_count {
            return Err(TagError::InvalidConfig(format!("channel {ch} not declared")));
        }
    }
    let w2 = binning.doubled_range();
    let mut buf = Buffers {
        reference: Vec::new(),
        partners: vec![Vec::new(); partners.len()],
    };
    let mut seen = vec![false; 1 + partners.len()];
    let mut span = Span { lo: None, hi: None };
    let mut last = i64::MIN;
    let mut next_flush: Option<i64> = None;
    while let Some(rec) = read_record(&mut r)? {
        let t = rec.timestamp_ps;
        if t < last {
            return Err(TagError::Format("records are not in timestamp order".into()));
        }
        last = t;
        if next_flush.is_some_and(|f| t >= f) {
            buf.flush(Some(t), w2, &mut sweep);
            next_flush = Some(t + flush_ps);
        }
        let mut relevant = false;
        if rec.channel == reference {
            buf.reference.push(t);
            seen[0] = true;
            relevant = true;
        }
        for (k, &ch) in partners.iter().enumerate() {
            if rec.channel == ch {
                buf.partners[k].push(t);
                seen[k + 1] = true;
                relevant = true;
            }
        }
        if relevant {
            span.note(t);
            next_flush.get_or_insert(t + flush_ps);
        }
    }
    buf.flush(None, w2, &mut sweep);
    if let Some(k) = seen.iter().position(|s| !s) {
        let ch = if k == 0 { reference } else { partners[k - 1] };
        return Err(TagError::EmptyChannel(ch));
    }
    Ok(span.seconds())
}

/// Two-fold histogram of a time-ordered binary stream.
pub fn stream_histogram_2<R: Read>(r: R, ch_a: u8, ch_b: u8, binning: Binning, flush_ps: i64) -> Result<Histogram1D> {
    let mut counts = vec![0u64; binning.n_bins()];
    let acquisition_s = run(r, ch_a, &[ch_b], &binning, flush_ps, |a, p| {
        sweep2(a, &p[0], &binning, &mut counts)
    })?;
    Ok(Histogram1D {
        binning,
        counts,
        acquisition_s,
    })
}

/// Three-fold histogram of a time-ordered binary stream.
pub fn stream_histogram_3<R: Read>(
    r: R,
    ch_a: u8,
    ch_b: u8,
    ch_c: u8,
    binning: Binning,
    flush_ps: i64,
) -> Result<Histogram2D> {
    let n = binning.n_bins();
    let mut counts = vec![0u64; n * n];
    let acquisition_s = run(r, ch_a, &[ch_b, ch_c], &binning, flush_ps, |a, p| {
        sweep3(a, &p[0], &p[1], &binning, &mut counts)
    })?;
    Ok(Histogram2D {
        binning,
        counts,
        acquisition_s,
    })
}
