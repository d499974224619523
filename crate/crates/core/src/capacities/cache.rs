//! On-disk cache of capacity sequences keyed by `(expansion, count)`.
//!
//! File layout (little endian): magic `TECHCAP\0`, `u32` format version,
//! `u32`-prefixed UTF-8 key, `u64` certified length, `u64` term count, then
//! per term a `u32`-prefixed signed numerator and a `u32`-prefixed
//! denominator, each in two's-complement little-endian bytes.

use super::CapacitySequence;
use crate::error::{Error, Result};
use crate::numeric::{NegativeWeightExpansion, Rational};
use num_bigint::BigInt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"TECHCAP\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct CapacityCache {
    dir: PathBuf,
}

impl CapacityCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CapacityCache { dir: dir.into() }
    }

    fn key(x: &NegativeWeightExpansion, count: usize) -> String {
        format!("{x}#{count}")
    }

    fn path(&self, key: &str) -> PathBuf {
        let safe: String = key
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        self.dir.join(format!("{safe}.cap"))
    }

    /// Returns the cached sequence, or `None` when absent or written by a
    /// different format version.
    pub fn load(&self, x: &NegativeWeightExpansion, count: usize) -> Result<Option<CapacitySequence>> {
        let key = Self::key(x, count);
        let path = self.path(&key);
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path)?;
        decode(&bytes, &key)
    }

    pub fn store(&self, x: &NegativeWeightExpansion, count: usize, seq: &CapacitySequence) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let key = Self::key(x, count);
        let path = self.path(&key);
        let mut f = fs::File::create(&path)?;
        f.write_all(&encode(seq, &key))?;
        Ok(path)
    }

    /// Loads from the cache or computes and stores.
    pub fn get_or_compute(&self, x: &NegativeWeightExpansion, count: usize) -> Result<CapacitySequence> {
        if let Some(seq) = self.load(x, count)? {
            return Ok(seq);
        }
        let seq = super::ech_convex_toric(x, count)?;
        self.store(x, count, &seq)?;
        Ok(seq)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    out.extend_from_slice(&(b.len() as u32).to_le_bytes());
    out.extend_from_slice(b);
}

pub(crate) fn encode(seq: &CapacitySequence, key: &str) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    put_bytes(&mut out, key.as_bytes());
    out.extend_from_slice(&(seq.certified_len() as u64).to_le_bytes());
    out.extend_from_slice(&(seq.len() as u64).to_le_bytes());
    for v in seq.values() {
        put_bytes(&mut out, &v.numer().to_signed_bytes_le());
        put_bytes(&mut out, &v.denom().to_signed_bytes_le());
    }
    out
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(Error::Parse("truncated capacity cache".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn chunk(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }
}

pub(crate) fn decode(bytes: &[u8], key: &str) -> Result<Option<CapacitySequence>> {
    let mut r = Reader(bytes);
    if r.take(8)? != MAGIC {
        return Err(Error::Parse("not a capacity cache file".into()));
    }
    if r.u32()? != FORMAT_VERSION {
        return Ok(None);
    }
    if r.chunk()? != key.as_bytes() {
        return Err(Error::Parse("capacity cache key mismatch".into()));
    }
    let cert = r.u64()? as usize;
    let n = r.u64()? as usize;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let num = BigInt::from_signed_bytes_le(r.chunk()?);
        let den = BigInt::from_signed_bytes_le(r.chunk()?);
        values.push(Rational::new(num, den));
    }
    CapacitySequence::from_rationals(&values, cert).map(Some)
}
