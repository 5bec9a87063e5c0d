//! Binary map files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic       8 bytes  "SBPGMAP\0"
//! version     u8
//! kind        u8       0 = single map, 1 = stacked map
//! layers      u32
//! dims        u32
//! points      u32      support points per dimension
//! bounds      dims x (f64 lo, f64 hi)
//! init        f64      initialization action
//! cells       layers x points^dims x (f64 action, f64 utility, u64 visits)
//! ```

use std::fs;
use std::path::Path;

use super::grid::SupportGrid;
use super::map::{Cell, PerformanceMap};
use super::stacked::StackedMap;
use crate::error::{Error, Result};
use crate::game::ActionValue;

const MAGIC: &[u8; 8] = b"SBPGMAP\0";
pub const MAP_FORMAT_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum StoredMap {
    Single(PerformanceMap),
    Stacked(StackedMap),
}

pub fn save_map(map: &StoredMap, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(map))?;
    Ok(())
}

pub fn load_map(path: impl AsRef<Path>) -> Result<StoredMap> {
    decode(&fs::read(path)?)
}

pub fn encode(map: &StoredMap) -> Vec<u8> {
    let (kind, layers): (u8, Vec<&PerformanceMap>) = match map {
        StoredMap::Single(m) => (0, vec![m]),
        StoredMap::Stacked(s) => (1, s.layers().iter().collect()),
    };
    let grid = layers[0].grid();
    let mut out = Vec::with_capacity(32 + layers.len() * grid.len() * 24);
    out.extend_from_slice(MAGIC);
    out.push(MAP_FORMAT_VERSION);
    out.push(kind);
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.dims() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points_per_dim() as u32).to_le_bytes());
    for &(lo, hi) in grid.bounds() {
        out.extend_from_slice(&lo.to_le_bytes());
        out.extend_from_slice(&hi.to_le_bytes());
    }
    out.extend_from_slice(&layers[0].init_action().get().to_le_bytes());
    for layer in layers {
        for c in layer.cells() {
            out.extend_from_slice(&c.action.get().to_le_bytes());
            out.extend_from_slice(&c.utility.to_le_bytes());
            out.extend_from_slice(&c.visits.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::MapFormat(format!("truncated file: need {n} bytes at offset {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(buf: &[u8]) -> Result<StoredMap> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::MapFormat("bad magic".into()));
    }
    let version = r.u8()?;
    if version != MAP_FORMAT_VERSION {
        return Err(Error::MapVersion { found: version, expected: MAP_FORMAT_VERSION });
    }
    let kind = r.u8()?;
    let layer_count = r.u32()? as usize;
    let dims = r.u32()? as usize;
    let points = r.u32()? as usize;
    if kind > 1 || layer_count == 0 || (kind == 0 && layer_count != 1) {
        return Err(Error::MapFormat(format!("bad header (kind {kind}, layers {layer_count})")));
    }
    if dims == 0 || dims > 16 {
        return Err(Error::MapFormat(format!("bad dimension count {dims}")));
    }
    let mut bounds = Vec::with_capacity(dims);
    for _ in 0..dims {
        bounds.push((r.f64()?, r.f64()?));
    }
    let grid = SupportGrid::new(bounds, points).map_err(|e| Error::MapFormat(e.to_string()))?;
    let init = ActionValue::new(r.f64()?).map_err(|e| Error::MapFormat(e.to_string()))?;
    let expected = layer_count
        .checked_mul(grid.len())
        .and_then(|n| n.checked_mul(24))
        .ok_or_else(|| Error::MapFormat("size overflow".into()))?;
    if buf.len() - r.pos != expected {
        return Err(Error::MapFormat(format!(
            "cell section is {} bytes, expected {expected}",
            buf.len() - r.pos
        )));
    }
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let mut cells = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let action = ActionValue::new(r.f64()?).map_err(|e| Error::MapFormat(e.to_string()))?;
            let utility = r.f64()?;
            let visits = r.u64()?;
            cells.push(Cell { action, utility, visits });
        }
        layers.push(PerformanceMap::from_parts(grid.clone(), init, cells));
    }
    Ok(if kind == 0 {
        StoredMap::Single(layers.pop().unwrap())
    } else {
        StoredMap::Stacked(StackedMap::from_layers(layers))
    })
}
