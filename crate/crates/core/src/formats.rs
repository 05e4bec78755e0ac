//! Binary sample stream files.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 8    | magic `RBKWSMPL`               |
//! | 8      | 2    | version (currently 1)          |
//! | 10     | 4    | n                              |
//! | 14     | 8    | q                              |
//! | 22     | 8    | seed                           |
//! | 30     | 8    | sample count                   |
//! | 38     | ...  | samples                        |
//!
//! Each sample is `2n` u32 residues in `[0, q)`: the coefficients of `a` in ζ-basis
//! order, then those of `b`.

use std::io::{BufReader, BufWriter, Read, Write};

use crate::error::{Error, Result};
use crate::fqring::{RingElement, RingParams};
use crate::sampling::{Sample, SampleSource};

pub const STREAM_MAGIC: &[u8; 8] = b"RBKWSMPL";
pub const STREAM_VERSION: u16 = 1;
pub const STREAM_HEADER_LEN: usize = 38;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub ring: RingParams,
    pub seed: u64,
    pub count: u64,
}

impl StreamHeader {
    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(STREAM_MAGIC)?;
        w.write_all(&STREAM_VERSION.to_le_bytes())?;
        w.write_all(&(self.ring.n() as u32).to_le_bytes())?;
        w.write_all(&self.ring.q().to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.count.to_le_bytes())?;
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut buf = [0u8; STREAM_HEADER_LEN];
        r.read_exact(&mut buf)?;
        if &buf[..8] != STREAM_MAGIC {
            return Err(Error::Format("not a sample stream".into()));
        }
        let version = u16::from_le_bytes([buf[8], buf[9]]);
        if version != STREAM_VERSION {
            return Err(Error::Format(format!("unsupported stream version {version}")));
        }
        let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
        let ring = RingParams::new(u32_at(10) as usize, u64_at(14))?;
        Ok(StreamHeader { ring, seed: u64_at(22), count: u64_at(30) })
    }
}

fn write_element<W: Write>(w: &mut W, x: &RingElement) -> Result<()> {
    for r in x.residues() {
        w.write_all(&(r as u32).to_le_bytes())?;
    }
    Ok(())
}

/// Writes a complete stream; `samples` must all live in `header.ring` and number `header.count`.
pub fn write_stream<W: Write>(w: W, header: &StreamHeader, samples: &[Sample]) -> Result<()> {
    if samples.len() as u64 != header.count {
        return Err(Error::InvalidParams(format!(
            "header announces {} samples but {} were given",
            header.count,
            samples.len()
        )));
    }
    let mut w = BufWriter::new(w);
    header.write(&mut w)?;
    for s in samples {
        header.ring.check_same(&s.a.params())?;
        write_element(&mut w, &s.a)?;
        write_element(&mut w, &s.b)?;
    }
    w.flush()?;
    Ok(())
}

/// Streaming reader; yields samples until the announced count is reached.
pub struct StreamReader<R: Read> {
    inner: BufReader<R>,
    header: StreamHeader,
    remaining: u64,
    error: Option<Error>,
}

impl<R: Read> StreamReader<R> {
    pub fn new(r: R) -> Result<Self> {
        let mut inner = BufReader::new(r);
        let header = StreamHeader::read(&mut inner)?;
        Ok(StreamReader { inner, header, remaining: header.count, error: None })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// The error that ended iteration early, if any.
    pub fn take_error(&mut self) -> Option<Error> {
        self.error.take()
    }

    fn element(&mut self) -> Result<RingElement> {
        let ring = self.header.ring;
        let mut buf = vec![0u8; 4 * ring.n()];
        self.inner.read_exact(&mut buf)?;
        let mut coeffs = Vec::with_capacity(ring.n());
        for chunk in buf.chunks_exact(4) {
            let r = u32::from_le_bytes(chunk.try_into().unwrap()) as u64;
            if r >= ring.q() {
                return Err(Error::Format(format!("residue {r} out of range for q = {}", ring.q())));
            }
            coeffs.push(r as i64);
        }
        RingElement::from_coeffs(ring, &coeffs)
    }

    fn read_sample(&mut self) -> Result<Sample> {
        let a = self.element()?;
        let b = self.element()?;
        Ok(Sample::new(a, b))
    }
}

impl<R: Read> Iterator for StreamReader<R> {
    type Item = Sample;

    fn next(&mut self) -> Option<Sample> {
        if self.remaining == 0 || self.error.is_some() {
            return None;
        }
        match self.read_sample() {
            Ok(s) => {
                self.remaining -= 1;
                Some(s)
            }
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }
}

/// Reads a whole stream into memory.
pub fn read_stream<R: Read>(r: R) -> Result<(StreamHeader, Vec<Sample>)> {
    let mut reader = StreamReader::new(r)?;
    let samples: Vec<Sample> = reader.by_ref().collect();
    if let Some(e) = reader.take_error() {
        return Err(e);
    }
    Ok((reader.header, samples))
}

/// Draws `count` samples from `source` into a vector, failing if it runs dry.
pub fn collect_samples(source: &mut dyn SampleSource, count: usize) -> Result<Vec<Sample>> {
    let out: Vec<Sample> = std::iter::from_fn(|| source.next_sample()).take(count).collect();
    if out.len() < count {
        return Err(Error::Starved { got: out.len(), need: count });
    }
    Ok(out)
}
