use std::io::{Read, Write};

use num_complex::Complex64;

use super::wave::WaveState;
use crate::{Error, Result};

/// Spectral snapshot read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub resolution: usize,
    pub extent: Vec<(f64, f64)>,
    pub values: Vec<Complex64>,
}

/// Writes the amplitudes of `w` on the full Nⁿ grid: u32 n, u32 N, then
/// (lo, hi) as f64 per axis, then row-major f32 (re, im) pairs, all
/// little-endian.
pub fn write_snapshot<W: Write>(out: &mut W, w: &WaveState) -> Result<()> {
    let full = w.to_full_grid()?;
    let g = w.grid();
    let io = |e: std::io::Error| Error::Input { op: "freewave::snapshot", detail: e.to_string() };
    out.write_all(&(g.n as u32).to_le_bytes()).map_err(io)?;
    out.write_all(&(g.resolution as u32).to_le_bytes()).map_err(io)?;
    for a in 0..g.n {
        out.write_all(&g.origin[a].to_le_bytes()).map_err(io)?;
        out.write_all(&g.xi(a, g.resolution as i64 - 1).to_le_bytes()).map_err(io)?;
    }
    let mut buf = Vec::with_capacity(full.amplitudes().len() * 8);
    for v in full.amplitudes() {
        buf.extend_from_slice(&(v.re as f32).to_le_bytes());
        buf.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    out.write_all(&buf).map_err(io)
}

pub fn read_snapshot<R: Read>(input: &mut R) -> Result<Snapshot> {
    let io = |e: std::io::Error| Error::Input { op: "freewave::snapshot", detail: e.to_string() };
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4).map_err(io)?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b4).map_err(io)?;
    let resolution = u32::from_le_bytes(b4) as usize;
    if n == 0 || n > 8 || resolution == 0 {
        return Err(Error::Input { op: "freewave::snapshot", detail: "malformed header".into() });
    }
    let mut extent = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut b8).map_err(io)?;
        let lo = f64::from_le_bytes(b8);
        input.read_exact(&mut b8).map_err(io)?;
        extent.push((lo, f64::from_le_bytes(b8)));
    }
    let len = resolution.pow(n as u32);
    let mut raw = vec![0u8; len * 8];
    input.read_exact(&mut raw).map_err(io)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Ok(Snapshot { n, resolution, extent, values })
}
