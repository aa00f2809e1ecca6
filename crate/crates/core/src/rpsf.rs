//! `RPSF1` binary field format.
//!
//! Layout, all little-endian: magic `RPSF`, version `u32 = 1`, `K: u64`,
//! `L: f64`, space flag `u8` (0 physical, 1 frequency), then `K` interleaved
//! `(re, im)` `f64` pairs.

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"RPSF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 1;

pub fn encode(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.size());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.size() as u64).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.push(match field.space() {
        Space::Physical => 0,
        Space::Frequency => 1,
    });
    for z in field.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let end = *at + N;
    let chunk = bytes
        .get(*at..end)
        .ok_or_else(|| Error::Format(format!("truncated at byte {}", *at)))?;
    *at = end;
    Ok(chunk.try_into().expect("slice length checked"))
}

pub fn decode(bytes: &[u8]) -> Result<Field> {
    let mut at = 0;
    let magic: [u8; 4] = take(bytes, &mut at)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, &mut at)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let size = u64::from_le_bytes(take(bytes, &mut at)?) as usize;
    let half_width = f64::from_le_bytes(take(bytes, &mut at)?);
    let space = match take::<1>(bytes, &mut at)?[0] {
        0 => Space::Physical,
        1 => Space::Frequency,
        flag => return Err(Error::Format(format!("unknown space flag {flag}"))),
    };
    let grid = Grid::new(half_width, size)?;
    if bytes.len() != HEADER_LEN + 16 * size {
        return Err(Error::Format(format!(
            "expected {} bytes, found {}",
            HEADER_LEN + 16 * size,
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(size);
    for _ in 0..size {
        let re = f64::from_le_bytes(take(bytes, &mut at)?);
        let im = f64::from_le_bytes(take(bytes, &mut at)?);
        values.push(Complex64::new(re, im));
    }
    Field::new(grid, values, space)
}

pub fn write_to(field: &Field, mut w: impl Write) -> Result<()> {
    w.write_all(&encode(field))?;
    Ok(())
}

pub fn read_from(mut r: impl Read) -> Result<Field> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(field))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_bit_exact() {
        let g = Grid::new(2.5, 16).unwrap();
        let mut f = Field::zeros(g, Space::Frequency);
        f.values_mut()[1] = Complex64::new(1.5, -2.0);
        let bytes = encode(&f);
        assert_eq!(&bytes[0..4], b"RPSF");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..16], &16u64.to_le_bytes());
        assert_eq!(&bytes[16..24], &2.5f64.to_le_bytes());
        assert_eq!(bytes[24], 1);
        assert_eq!(&bytes[25 + 16..25 + 24], &1.5f64.to_le_bytes());
        assert_eq!(&bytes[25 + 24..25 + 32], &(-2.0f64).to_le_bytes());
        assert_eq!(bytes.len(), 25 + 16 * 16);
        assert_eq!(decode(&bytes).unwrap(), f);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::new(1.0, 16).unwrap();
        let bytes = encode(&Field::zeros(g, Space::Physical));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode(&bad).is_err());
        let mut bad = bytes;
        bad[24] = 7;
        assert!(decode(&bad).is_err());
    }
}
