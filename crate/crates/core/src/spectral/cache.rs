//! Binary cache records for decompositions and wavelet features.
//!
//! Layout, all little-endian: magic `TWCB`, `u32` version, `u32` kind,
//! `u64` rows, `u64` cols, `u32` scalar count + `f64` scalars,
//! `u64` vector length + `f64` vector, then `rows * cols` row-major `f64`.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::SpectralBasis;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TWCB";
const VERSION: u32 = 1;

pub(crate) const KIND_BASIS: u32 = 1;
pub(crate) const KIND_FEATURES: u32 = 2;

pub(crate) struct Record {
    pub kind: u32,
    pub scalars: Vec<f64>,
    pub vector: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<f64>,
}

fn put_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn take<const K: usize, R: Read>(r: &mut R) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn take_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| Ok(f64::from_le_bytes(take::<8, _>(r)?))).collect()
}

pub(crate) fn write_record<W: Write>(mut w: W, rec: &Record) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&rec.kind.to_le_bytes())?;
    w.write_all(&(rec.rows as u64).to_le_bytes())?;
    w.write_all(&(rec.cols as u64).to_le_bytes())?;
    w.write_all(&(rec.scalars.len() as u32).to_le_bytes())?;
    put_f64s(&mut w, &rec.scalars)?;
    w.write_all(&(rec.vector.len() as u64).to_le_bytes())?;
    put_f64s(&mut w, &rec.vector)?;
    put_f64s(&mut w, &rec.data)?;
    Ok(w.flush()?)
}

pub(crate) fn read_record<R: Read>(mut r: R, expected_kind: u32) -> Result<Record> {
    if &take::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Consistency("not a cache file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != VERSION {
        return Err(Error::Consistency(format!("unsupported cache version {version}")));
    }
    let kind = u32::from_le_bytes(take(&mut r)?);
    if kind != expected_kind {
        return Err(Error::Consistency(format!("cache holds record kind {kind}, expected {expected_kind}")));
    }
    let rows = u64::from_le_bytes(take(&mut r)?) as usize;
    let cols = u64::from_le_bytes(take(&mut r)?) as usize;
    let n_scalars = u32::from_le_bytes(take(&mut r)?) as usize;
    let scalars = take_f64s(&mut r, n_scalars)?;
    let n_vec = u64::from_le_bytes(take(&mut r)?) as usize;
    let vector = take_f64s(&mut r, n_vec)?;
    let data = take_f64s(&mut r, rows * cols)?;
    Ok(Record { kind, scalars, vector, rows, cols, data })
}

pub fn write_basis<W: Write>(basis: &SpectralBasis, w: W) -> Result<()> {
    let v = basis.eigenvectors();
    let data = (0..v.nrows()).flat_map(|r| (0..v.ncols()).map(move |c| v[(r, c)])).collect();
    write_record(
        w,
        &Record {
            kind: KIND_BASIS,
            scalars: vec![basis.lambda_max_estimate()],
            vector: basis.eigenvalues().to_vec(),
            rows: v.nrows(),
            cols: v.ncols(),
            data,
        },
    )
}

pub fn read_basis<R: Read>(r: R) -> Result<SpectralBasis> {
    let rec = read_record(r, KIND_BASIS)?;
    if rec.scalars.len() != 1 {
        return Err(Error::Consistency("malformed basis record".into()));
    }
    let vectors = DMatrix::from_row_slice(rec.rows, rec.cols, &rec.data);
    SpectralBasis::from_parts(rec.vector, vectors, rec.scalars[0])
}
