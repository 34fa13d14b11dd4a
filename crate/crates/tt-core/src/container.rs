//! On-disk container for TT tensors and operators.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   4 bytes  "TTK1"
//! kind    u64      0 = tensor, 1 = operator
//! d       u64      number of modes
//! dims    u64 * d          (tensor)      mode sizes
//!         u64 * 2d         (operator)    row sizes, then column sizes
//! ranks   u64 * (d + 1)    bond dimensions including the boundary ones
//! cores   f64 * sum        core entries, last index fastest, core 0 first
//! ```
//!
//! Writing the same train twice produces byte-identical files, which the
//! command-line tools rely on for reproducibility checks.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array3, Array4};

use crate::error::{Result, TtError};
use crate::matrix::TTMatrix;
use crate::tensor::TTTensor;

const MAGIC: [u8; 4] = *b"TTK1";
const KIND_TENSOR: u64 = 0;
const KIND_MATRIX: u64 = 1;

/// What `inspect` reports without loading the cores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerInfo {
    pub kind: ContainerKind,
    /// Mode sizes; for operators the row sizes.
    pub shape: Vec<usize>,
    /// Column sizes for operators, empty for tensors.
    pub col_shape: Vec<usize>,
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainerKind {
    Tensor,
    Matrix,
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_usize(r: &mut impl Read, what: &str) -> Result<usize> {
    let v = read_u64(r)?;
    usize::try_from(v).map_err(|_| TtError::Container(format!("{what} out of range: {v}")))
}

fn write_f64_slice(w: &mut impl Write, data: &[f64]) -> Result<()> {
    for &v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64_vec(r: &mut impl Read, len: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn save_tensor(t: &TTTensor, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    write_u64(&mut w, KIND_TENSOR)?;
    write_u64(&mut w, t.ndim() as u64)?;
    for n in t.shape() {
        write_u64(&mut w, n as u64)?;
    }
    for r in t.ranks() {
        write_u64(&mut w, r as u64)?;
    }
    for core in t.cores() {
        write_f64_slice(&mut w, core.as_slice().expect("cores are contiguous"))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix(a: &TTMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    write_u64(&mut w, KIND_MATRIX)?;
    write_u64(&mut w, a.ndim() as u64)?;
    for n in a.row_shape() {
        write_u64(&mut w, n as u64)?;
    }
    for n in a.col_shape() {
        write_u64(&mut w, n as u64)?;
    }
    for r in a.ranks() {
        write_u64(&mut w, r as u64)?;
    }
    for core in a.cores() {
        write_f64_slice(&mut w, core.as_slice().expect("cores are contiguous"))?;
    }
    w.flush()?;
    Ok(())
}

struct Header {
    kind: u64,
    shape: Vec<usize>,
    col_shape: Vec<usize>,
    ranks: Vec<usize>,
}

fn read_header(r: &mut impl Read) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(TtError::Container(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let kind = read_u64(r)?;
    if kind != KIND_TENSOR && kind != KIND_MATRIX {
        return Err(TtError::Container(format!("unknown kind {kind}")));
    }
    let d = read_usize(r, "mode count")?;
    if d == 0 || d > 1 << 20 {
        return Err(TtError::Container(format!("implausible mode count {d}")));
    }
    let mut shape = Vec::with_capacity(d);
    for _ in 0..d {
        shape.push(read_usize(r, "mode size")?);
    }
    let mut col_shape = Vec::new();
    if kind == KIND_MATRIX {
        for _ in 0..d {
            col_shape.push(read_usize(r, "column size")?);
        }
    }
    let mut ranks = Vec::with_capacity(d + 1);
    for _ in 0..=d {
        ranks.push(read_usize(r, "rank")?);
    }
    if ranks[0] != 1 || ranks[d] != 1 {
        return Err(TtError::Container("boundary ranks must be 1".into()));
    }
    if shape.iter().any(|&n| n == 0) || ranks.iter().any(|&r| r == 0) {
        return Err(TtError::Container("zero mode size or rank".into()));
    }
    Ok(Header {
        kind,
        shape,
        col_shape,
        ranks,
    })
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<TTTensor> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    if h.kind != KIND_TENSOR {
        return Err(TtError::Container(
            "file holds an operator, not a tensor".into(),
        ));
    }
    let d = h.shape.len();
    let mut cores = Vec::with_capacity(d);
    for k in 0..d {
        let len = h.ranks[k] * h.shape[k] * h.ranks[k + 1];
        let data = read_f64_vec(&mut r, len)?;
        cores.push(
            Array3::from_shape_vec((h.ranks[k], h.shape[k], h.ranks[k + 1]), data)
                .expect("sized from header"),
        );
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(TtError::Container("trailing bytes after cores".into()));
    }
    TTTensor::new(cores)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<TTMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    if h.kind != KIND_MATRIX {
        return Err(TtError::Container(
            "file holds a tensor, not an operator".into(),
        ));
    }
    let d = h.shape.len();
    let mut cores = Vec::with_capacity(d);
    for k in 0..d {
        let len = h.ranks[k] * h.shape[k] * h.col_shape[k] * h.ranks[k + 1];
        let data = read_f64_vec(&mut r, len)?;
        cores.push(
            Array4::from_shape_vec(
                (h.ranks[k], h.shape[k], h.col_shape[k], h.ranks[k + 1]),
                data,
            )
            .expect("sized from header"),
        );
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(TtError::Container("trailing bytes after cores".into()));
    }
    TTMatrix::new(cores)
}

/// Reads only the header.
pub fn inspect(path: impl AsRef<Path>) -> Result<ContainerInfo> {
    let mut r = BufReader::new(File::open(path)?);
    let h = read_header(&mut r)?;
    Ok(ContainerInfo {
        kind: if h.kind == KIND_TENSOR {
            ContainerKind::Tensor
        } else {
            ContainerKind::Matrix
        },
        shape: h.shape,
        col_shape: h.col_shape,
        ranks: h.ranks,
    })
}
