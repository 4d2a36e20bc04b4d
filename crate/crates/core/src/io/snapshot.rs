//! Binary snapshot layout, all integers and floats little-endian:
//!
//! ```text
//! "MHDL"  version:u32  n1:u32  n2:u32  n3:u32  fd_order:u32  t:f64
//! count:u32  { name_len:u32  name:utf8  len:u64 } × count
//! payload: the arrays in table order, f64 each
//! ```
//!
//! `n3` counts vertical intervals, so field arrays hold `n1·n2·(n3+1)` values
//! with `x₁` fastest. The required arrays are the displacement `eta.1..3`,
//! `v.1..3`, `q`, `b0.1..3`, and the one-element `kappa` and `epsilon`.

use std::fs;
use std::path::Path;

use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::geometry::{FlowMap, MagneticParam};
use crate::grid::{FdOrder, GridSpec, ScalarField, VectorField};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"MHDL";
pub const SNAPSHOT_VERSION: u32 = 1;

const FIELDS: [&str; 10] = ["eta.1", "eta.2", "eta.3", "v.1", "v.2", "v.3", "q", "b0.1", "b0.2", "b0.3"];
const SCALARS: [&str; 2] = ["kappa", "epsilon"];
const MAX_NAME: usize = 64;

fn fields_of(s: &FlowState) -> [&ScalarField; 10] {
    let d = s.eta.displacement().components();
    let v = s.v.components();
    let b = s.b0.field().components();
    [&d[0], &d[1], &d[2], &v[0], &v[1], &v[2], &s.q, &b[0], &b[1], &b[2]]
}

pub fn encode_snapshot(state: &FlowState) -> Vec<u8> {
    let g = state.grid();
    let fields = fields_of(state);
    let mut out = Vec::with_capacity(64 + 8 * (10 * g.len() + 2));
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    for x in [SNAPSHOT_VERSION, g.n1() as u32, g.n2() as u32, g.n3() as u32, g.order().as_usize() as u32] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&((FIELDS.len() + SCALARS.len()) as u32).to_le_bytes());
    for name in FIELDS {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(g.len() as u64).to_le_bytes());
    }
    for name in SCALARS {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&1u64.to_le_bytes());
    }
    for f in fields {
        for x in f.values() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out.extend_from_slice(&state.kappa.to_le_bytes());
    out.extend_from_slice(&state.epsilon.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(e) => {
                let s = &self.buf[self.pos..e];
                self.pos = e;
                Ok(s)
            }
            None => Err(Error::Format(format!("truncated while reading {what} at byte {}", self.pos))),
        }
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

/// Parses a snapshot. Any structural defect is a `Format` error; nothing
/// partial is returned.
pub fn decode_snapshot(bytes: &[u8]) -> Result<FlowState> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "magic")? != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32("version")?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let (n1, n2, n3) = (r.u32("n1")?, r.u32("n2")?, r.u32("n3")?);
    let order = FdOrder::from_usize(r.u32("fd_order")? as usize)
        .ok_or_else(|| Error::Format("fd_order must be 2 or 4".into()))?;
    let grid = GridSpec::with_order(n1 as usize, n2 as usize, n3 as usize, order)
        .map_err(|e| Error::Format(format!("bad dimensions: {e}")))?;
    let t = r.f64("time")?;
    let count = r.u32("array count")? as usize;
    if count != FIELDS.len() + SCALARS.len() {
        return Err(Error::Format(format!("expected {} arrays, found {count}", FIELDS.len() + SCALARS.len())));
    }
    let mut table: Vec<(usize, usize)> = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32("name length")? as usize;
        if len == 0 || len > MAX_NAME {
            return Err(Error::Format(format!("array name length {len} out of range")));
        }
        let name = std::str::from_utf8(r.take(len, "array name")?).map_err(|_| Error::Format("array name is not UTF-8".into()))?;
        let slot = FIELDS
            .iter()
            .chain(SCALARS.iter())
            .position(|n| *n == name)
            .ok_or_else(|| Error::Format(format!("unknown array {name:?}")))?;
        if table.iter().any(|&(s, _)| s == slot) {
            return Err(Error::Format(format!("duplicate array {name:?}")));
        }
        let n = r.u64("array length")?;
        let expect = if slot < FIELDS.len() { grid.len() as u64 } else { 1 };
        if n != expect {
            return Err(Error::Format(format!("array {name:?} has {n} values, expected {expect}")));
        }
        table.push((slot, n as usize));
    }
    let mut fields: Vec<Option<ScalarField>> = vec![None; FIELDS.len()];
    let mut scalars = [0.0; 2];
    for &(slot, n) in &table {
        let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::Format("array too large".into()))?, "payload")?;
        let data: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if slot < FIELDS.len() {
            fields[slot] = Some(ScalarField::from_vec(grid, data));
        } else {
            scalars[slot - FIELDS.len()] = data[0];
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let mut it = fields.into_iter().map(|f| f.expect("table covers every field"));
    let mut vec3 = || VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]);
    let d = vec3();
    let v = vec3();
    let q = it.next().unwrap();
    let b0 = VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]);
    Ok(FlowState {
        t,
        eta: FlowMap::from_displacement(d),
        v,
        q,
        b0: MagneticParam::from_stored(b0),
        kappa: scalars[0],
        epsilon: scalars[1],
    })
}

pub fn write_snapshot(state: &FlowState, path: &Path) -> Result<()> {
    fs::write(path, encode_snapshot(state))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<FlowState> {
    decode_snapshot(&fs::read(path)?)
}
