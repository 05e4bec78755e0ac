//! Binary snapshot of a reducer's tables so a long reduction can be resumed.
//!
//! Layout (little-endian):
//! header `RBKWTBL\0`, version u16, n u32, q u64, B u32, variant u8, mode u8,
//! inputs u64, fed u64; then per active table arrivals u64, hits u64, row count u64,
//! and for each row (sorted by key) an entry count u32 followed by the entries;
//! then terminal arrivals u64, terminal count u64 and the terminal samples.
//! A sample is depth u32 followed by the `2n` residues of `a` and `b` as u32.

use std::io::{Read, Write};

use super::{Mode, ReductionConfig, Reducer, TableKey, Variant};
use crate::error::{Error, Result};
use crate::fqring::{RingElement, RingParams};
use crate::sampling::Sample;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"RBKWTBL\0";
pub const SNAPSHOT_VERSION: u16 = 1;

fn variant_code(v: Variant) -> u8 {
    match v {
        Variant::RingBlind => 0,
        Variant::Traditional => 1,
        Variant::Advanced => 2,
    }
}

fn write_sample<W: Write>(w: &mut W, s: &Sample) -> Result<()> {
    w.write_all(&s.depth.to_le_bytes())?;
    for r in s.a.residues().into_iter().chain(s.b.residues()) {
        w.write_all(&(r as u32).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_snapshot<W: Write>(reducer: &Reducer, w: &mut W) -> Result<()> {
    let c = reducer.config();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(c.ring().n() as u32).to_le_bytes())?;
    w.write_all(&c.ring().q().to_le_bytes())?;
    w.write_all(&(c.block_size() as u32).to_le_bytes())?;
    w.write_all(&[variant_code(c.variant()), matches!(c.mode(), Mode::Ad) as u8])?;
    w.write_all(&(reducer.inputs as u64).to_le_bytes())?;
    w.write_all(&(reducer.fed as u64).to_le_bytes())?;
    for t in &reducer.tables {
        w.write_all(&(t.arrivals as u64).to_le_bytes())?;
        w.write_all(&(t.hits as u64).to_le_bytes())?;
        w.write_all(&(t.rows.len() as u64).to_le_bytes())?;
        let mut keys: Vec<&TableKey> = t.rows.keys().collect();
        keys.sort();
        for k in keys {
            let row = &t.rows[k];
            w.write_all(&(row.len() as u32).to_le_bytes())?;
            for s in row {
                write_sample(w, s)?;
            }
        }
    }
    w.write_all(&(reducer.terminal.arrivals as u64).to_le_bytes())?;
    w.write_all(&(reducer.terminal.len() as u64).to_le_bytes())?;
    for s in reducer.terminal.samples() {
        write_sample(w, s)?;
    }
    Ok(())
}

struct Input<R> {
    inner: R,
}

impl<R: Read> Input<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf)?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn element(&mut self, p: RingParams) -> Result<RingElement> {
        let mut v = Vec::with_capacity(p.n());
        for _ in 0..p.n() {
            let r = self.u32()? as u64;
            if r >= p.q() {
                return Err(Error::Format(format!("residue {r} out of range for q = {}", p.q())));
            }
            v.push(r as i64);
        }
        RingElement::from_coeffs(p, &v)
    }

    fn sample(&mut self, p: RingParams) -> Result<Sample> {
        let depth = self.u32()?;
        let a = self.element(p)?;
        let b = self.element(p)?;
        let mut s = Sample::new(a, b);
        s.depth = depth;
        Ok(s)
    }
}

/// Rebuilds a reducer from a snapshot; table keys are recomputed from the stored samples.
pub fn read_snapshot<R: Read>(r: R) -> Result<Reducer> {
    let mut input = Input { inner: r };
    if &input.bytes::<8>()? != SNAPSHOT_MAGIC {
        return Err(Error::Format("not a table snapshot".into()));
    }
    let version = input.u16()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = input.u32()? as usize;
    let q = input.u64()?;
    let b = input.u32()? as usize;
    let variant = match input.u8()? {
        0 => Variant::RingBlind,
        1 => Variant::Traditional,
        2 => Variant::Advanced,
        v => return Err(Error::Format(format!("unknown variant code {v}"))),
    };
    let mode = match input.u8()? {
        0 => Mode::Od,
        1 => Mode::Ad,
        v => return Err(Error::Format(format!("unknown mode code {v}"))),
    };
    let ring = RingParams::new(n, q)?;
    let config = ReductionConfig::new(ring, b, variant, mode)?;
    let mut reducer = Reducer::new(config);
    reducer.inputs = input.u64()? as usize;
    reducer.fed = input.u64()? as usize;
    for idx in 0..config.active_tables() {
        let arrivals = input.u64()? as usize;
        let hits = input.u64()? as usize;
        let rows = input.u64()?;
        for _ in 0..rows {
            let len = input.u32()?;
            let mut row = Vec::with_capacity(len as usize);
            for _ in 0..len {
                row.push(input.sample(ring)?);
            }
            let first = row.first().ok_or_else(|| Error::Format("empty table row".into()))?;
            let block = reducer.block_of(first, idx);
            let key = super::canonicalize(&block, variant, Some(&reducer.actions[idx]), n);
            if key.applied_rotation != 0 || key.applied_sign != 1 {
                return Err(Error::Format(format!("table {} holds a non-canonical sample", idx + 1)));
            }
            let tk = TableKey::new(&key.key, q, reducer.packable);
            let table = &mut reducer.tables[idx];
            table.stored += row.len();
            table.rows.insert(tk, row);
        }
        reducer.tables[idx].arrivals = arrivals;
        reducer.tables[idx].hits = hits;
    }
    let step = n / b;
    let term_arrivals = input.u64()? as usize;
    let count = input.u64()?;
    for _ in 0..count {
        let s = input.sample(ring)?;
        reducer.terminal.insert(s, step);
    }
    reducer.terminal.arrivals = term_arrivals;
    Ok(reducer)
}
