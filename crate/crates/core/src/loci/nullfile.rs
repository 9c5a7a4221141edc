//! Binary persistence of null sample matrices.
//!
//! Layout: the 8-byte magic `MLNULL1\0`, the replicate count and the vertex
//! count as little-endian `u64`, then the samples as row-major little-endian
//! `f64`.

use std::io::{Read, Write};

use super::null::{NullDistribution, NullMode};
use crate::error::{Error, Result};

pub const NULL_FILE_MAGIC: &[u8; 8] = b"MLNULL1\0";

pub fn write_null<W: Write>(null: &NullDistribution, mut out: W) -> Result<()> {
    out.write_all(NULL_FILE_MAGIC)?;
    out.write_all(&(null.replicates() as u64).to_le_bytes())?;
    out.write_all(&(null.n() as u64).to_le_bytes())?;
    for x in null.samples() {
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a sample matrix. The file does not record the seed or how the
/// samples were drawn, so the caller supplies `mode`.
pub fn read_null<R: Read>(mut input: R, mode: NullMode) -> Result<NullDistribution> {
    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .map_err(|_| Error::NullFile("truncated header".into()))?;
    if &magic != NULL_FILE_MAGIC {
        return Err(Error::NullFile("bad magic".into()));
    }
    let mut word = [0u8; 8];
    let mut next_u64 = |input: &mut R| -> Result<u64> {
        input
            .read_exact(&mut word)
            .map_err(|_| Error::NullFile("truncated header".into()))?;
        Ok(u64::from_le_bytes(word))
    };
    let replicates = usize::try_from(next_u64(&mut input)?)
        .map_err(|_| Error::NullFile("replicate count overflows".into()))?;
    let n = usize::try_from(next_u64(&mut input)?)
        .map_err(|_| Error::NullFile("vertex count overflows".into()))?;
    let len = replicates
        .checked_mul(n)
        .ok_or_else(|| Error::NullFile("matrix size overflows".into()))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::NullFile(format!(
            "expected {} payload bytes, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    NullDistribution::from_samples(samples, replicates, n, None, mode)
}
