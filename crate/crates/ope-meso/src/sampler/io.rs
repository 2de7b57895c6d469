//! Flat binary batch files: a little-endian header
//! `magic[8] = "OPEMESO\0"`, `version: u32`, `n: u64`, `count: u64`, `seed: u64`,
//! `spec_len: u32`, `spec: [u8; spec_len]` (ensemble JSON), followed by
//! `count * n` `f64` eigenvalues, one spectrum per row.

use std::io::{Read, Write};

use super::SampleBatch;
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"OPEMESO\0";
const VERSION: u32 = 1;

pub fn write_batch<W: Write>(batch: &SampleBatch, mut out: W) -> Result<()> {
    let spec = batch.ensemble.to_json()?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(batch.n as u64).to_le_bytes())?;
    out.write_all(&(batch.spectra.len() as u64).to_le_bytes())?;
    out.write_all(&batch.seed.to_le_bytes())?;
    out.write_all(&(spec.len() as u32).to_le_bytes())?;
    out.write_all(spec.as_bytes())?;
    for row in &batch.spectra {
        for v in row {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn take<const K: usize, R: Read>(input: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    input.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_batch<R: Read>(mut input: R) -> Result<SampleBatch> {
    if &take::<8, _>(&mut input)? != MAGIC {
        return Err(Error::InvalidInput("not a sample batch file".into()));
    }
    let version = u32::from_le_bytes(take(&mut input)?);
    if version != VERSION {
        return Err(Error::InvalidInput(format!("unsupported batch version {version}")));
    }
    let n = u64::from_le_bytes(take(&mut input)?) as usize;
    let count = u64::from_le_bytes(take(&mut input)?) as usize;
    let seed = u64::from_le_bytes(take(&mut input)?);
    let len = u32::from_le_bytes(take(&mut input)?) as usize;
    let mut spec = vec![0u8; len];
    input.read_exact(&mut spec)?;
    let spec = String::from_utf8(spec).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let ensemble = EnsembleSpec::from_json(&spec)?;
    let mut spectra = Vec::with_capacity(count);
    for _ in 0..count {
        let mut row = Vec::with_capacity(n);
        for _ in 0..n {
            row.push(f64::from_le_bytes(take(&mut input)?));
        }
        spectra.push(row);
    }
    Ok(SampleBatch {
        ensemble,
        n,
        seed,
        spectra,
    })
}
