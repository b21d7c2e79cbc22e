//! Binary container for dense operator blocks.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `LBIEOPS1` |
//! | 4     | `u32` block count `B` |
//! | 8     | `u64` rows |
//! | 8     | `u64` cols |
//! | 16    | `f64` real and imaginary part of the wavenumber |
//! | 16·B  | block names, NUL-padded ASCII |
//! | B·rows·cols·16 | payload: each block row-major, `(re, im)` as two `f64` |
//!
//! Rows and columns follow the `2 N_v` layout: index `l N_v + n` is the
//! family-`l` current of vertex `n`.

use std::io::{Read, Write};

use crate::linalg::CMat;
use crate::{Error, Result, C64};

const MAGIC: &[u8; 8] = b"LBIEOPS1";

/// Writes named blocks of equal shape.
pub fn write_blocks(w: &mut impl Write, kappa: C64, blocks: &[(&str, &CMat)]) -> Result<()> {
    let (rows, cols) = blocks
        .first()
        .map(|b| (b.1.rows, b.1.cols))
        .unwrap_or((0, 0));
    if blocks.iter().any(|b| b.1.rows != rows || b.1.cols != cols) {
        return Err(Error::InvalidArgument("blocks must share one shape".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    w.write_all(&kappa.re.to_le_bytes())?;
    w.write_all(&kappa.im.to_le_bytes())?;
    for (name, _) in blocks {
        let b = name.as_bytes();
        if b.len() > 16 || !name.is_ascii() {
            return Err(Error::InvalidArgument(format!(
                "block name {name:?} is not ASCII of at most 16 bytes"
            )));
        }
        let mut buf = [0u8; 16];
        buf[..b.len()].copy_from_slice(b);
        w.write_all(&buf)?;
    }
    for (_, m) in blocks {
        let mut buf = Vec::with_capacity(m.data.len() * 16);
        for z in &m.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a container written by [`write_blocks`].
pub fn read_blocks(r: &mut impl Read) -> Result<(C64, Vec<(String, CMat)>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic in operator container".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let kre = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let kim = f64::from_le_bytes(b8);
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        let mut buf = [0u8; 16];
        r.read_exact(&mut buf)?;
        let end = buf.iter().position(|&c| c == 0).unwrap_or(16);
        let name = std::str::from_utf8(&buf[..end])
            .map_err(|_| Error::Format("non-ASCII block name".into()))?;
        names.push(name.to_string());
    }
    let mut out = Vec::with_capacity(count);
    for name in names {
        let mut raw = vec![0u8; rows * cols * 16];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        out.push((name, CMat { rows, cols, data }));
    }
    Ok((C64::new(kre, kim), out))
}
