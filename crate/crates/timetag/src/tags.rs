//! Tag records and their on-disk forms.
//!
//! Binary layout, little-endian: a 16-byte header (`b"HHGT"`, `u16` version,
//! `u16` channel count, `u64` reserved) followed by 12-byte records
//! (`u8` channel, three zero pad bytes, `i64` timestamp in ps). The CSV form
//! has the header `channel,timestamp_ps`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TagError};

pub const MAGIC: [u8; 4] = *b"HHGT";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TagRecord {
    pub channel: u8,
    pub timestamp_ps: i64,
}

impl TagRecord {
    pub fn new(channel: u8, timestamp_ps: i64) -> Self {
        Self { channel, timestamp_ps }
    }

    pub fn to_bytes(self) -> [u8; RECORD_LEN] {
        let mut b = [0u8; RECORD_LEN];
        b[0] = self.channel;
        b[4..].copy_from_slice(&self.timestamp_ps.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; RECORD_LEN]) -> Result<Self> {
        if b[1..4] != [0, 0, 0] {
            return Err(TagError::Format("nonzero record padding".into()));
        }
        let mut ts = [0u8; 8];
        ts.copy_from_slice(&b[4..]);
        Ok(Self::new(b[0], i64::from_le_bytes(ts)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub version: u16,
    pub channel_count: u16,
}

impl Header {
    pub fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6..8].copy_from_slice(&self.channel_count.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; HEADER_LEN]) -> Result<Self> {
        if b[..4] != MAGIC {
            return Err(TagError::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(TagError::Format(format!("unsupported version {version}")));
        }
        Ok(Self {
            version,
            channel_count: u16::from_le_bytes([b[6], b[7]]),
        })
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut b = [0u8; HEADER_LEN];
        r.read_exact(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => TagError::Format("truncated header".into()),
            _ => TagError::Io(e),
        })?;
        Self::from_bytes(&b)
    }
}

/// Reads one record, `Ok(None)` at a clean end of input.
pub(crate) fn read_record<R: Read>(r: &mut R) -> Result<Option<TagRecord>> {
    let mut b = [0u8; RECORD_LEN];
    let mut filled = 0;
    while filled < RECORD_LEN {
        match r.read(&mut b[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    match filled {
        0 => Ok(None),
        RECORD_LEN => TagRecord::from_bytes(&b).map(Some),
        _ => Err(TagError::Format("truncated record".into())),
    }
}

/// An acquisition: declared channel set plus records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagStream {
    pub channel_count: u16,
    pub records: Vec<TagRecord>,
}

impl TagStream {
    pub fn new(channel_count: u16, records: Vec<TagRecord>) -> Result<Self> {
        let s = Self { channel_count, records };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.records.iter().find(|r| u16::from(r.channel) >= self.channel_count) {
            return Err(TagError::Format(format!(
                "channel {} outside declared set of {}",
                r.channel, self.channel_count
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sorted timestamps of one channel.
    pub fn channel(&self, ch: u8) -> Vec<i64> {
        let mut t: Vec<i64> = self
            .records
            .iter()
            .filter(|r| r.channel == ch)
            .map(|r| r.timestamp_ps)
            .collect();
        t.sort_unstable();
        t
    }

    /// Sorts by timestamp, then channel.
    pub fn sort(&mut self) {
        self.records.sort_unstable_by_key(|r| (r.timestamp_ps, r.channel));
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        let h = Header {
            version: VERSION,
            channel_count: self.channel_count,
        };
        w.write_all(&h.to_bytes())?;
        for r in &self.records {
            w.write_all(&r.to_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let h = Header::read(r)?;
        let mut records = Vec::new();
        while let Some(rec) = read_record(r)? {
            records.push(rec);
        }
        Self::new(h.channel_count, records)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["channel", "timestamp_ps"])?;
        for r in &self.records {
            out.serialize((r.channel, r.timestamp_ps))?;
        }
        out.flush()?;
        Ok(())
    }

    /// The declared channel set of a CSV stream is `0..=max channel`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["channel", "timestamp_ps"] {
            return Err(TagError::Format("expected header `channel,timestamp_ps`".into()));
        }
        let mut records = Vec::new();
        for row in rd.deserialize::<TagRecord>() {
            records.push(row?);
        }
        let channel_count = records.iter().map(|r| u16::from(r.channel) + 1).max().unwrap_or(0);
        Self::new(channel_count, records)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Loads either format, sniffing the binary magic.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        let n = r.read(&mut magic)?;
        let mut r = std::io::Cursor::new(magic[..n].to_vec()).chain(r);
        if n == 4 && magic == MAGIC {
            Self::read_binary(&mut r)
        } else {
            Self::read_csv(r)
        }
    }
}
