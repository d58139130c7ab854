//! JSON interchange formats. Floats are written in shortest round-trip form,
//! so reading back yields bit-identical values.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{ProbVector, StochTensor};
use crate::coherify::{BlockBasisFamily, BlockScheme};
use crate::error::{Error, Result};
use crate::numkit::CMatrix;
use crate::qchannel::{DensityMatrix, DynamicalMatrix};

#[derive(Debug, Serialize, Deserialize)]
pub struct TensorJson {
    pub order: usize,
    pub dim: usize,
    pub entries: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProbJson {
    pub entries: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DensityJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DynamicalJson {
    pub parts: usize,
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BlocksJson {
    pub dim: usize,
    pub scheme: BlockScheme,
    pub blocks: Vec<ComplexJson>,
}

pub fn complex_to_json(m: &CMatrix) -> ComplexJson {
    ComplexJson {
        re: m.row_iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
        im: m.row_iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
    }
}

pub fn complex_from_json(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<CMatrix> {
    let rows = re.len();
    let cols = re.first().map_or(0, Vec::len);
    if im.len() != rows || re.iter().chain(im).any(|r| r.len() != cols) {
        return Err(Error::Parse("re/im arrays must be rectangular and of equal shape".into()));
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| Complex64::new(re[r][c], im[r][c])))
}

fn check_side(m: &CMatrix, side: usize, what: &str) -> Result<()> {
    if m.shape() != (side, side) {
        return Err(Error::Dimension(format!("{what} is {:?}, header says {side}x{side}", m.shape())));
    }
    Ok(())
}

pub fn tensor_to_json(a: &StochTensor) -> TensorJson {
    TensorJson { order: a.order(), dim: a.dim(), entries: a.entries().to_vec() }
}

pub fn tensor_from_json(j: TensorJson) -> Result<StochTensor> {
    StochTensor::new(j.order, j.dim, j.entries)
}

pub fn prob_to_json(p: &ProbVector) -> ProbJson {
    ProbJson { entries: p.entries().to_vec() }
}

pub fn prob_from_json(j: ProbJson) -> Result<ProbVector> {
    ProbVector::new(j.entries)
}

pub fn density_to_json(r: &DensityMatrix) -> DensityJson {
    let c = complex_to_json(r.matrix());
    DensityJson { dim: r.dim(), re: c.re, im: c.im }
}

pub fn density_from_json(j: DensityJson) -> Result<DensityMatrix> {
    let m = complex_from_json(&j.re, &j.im)?;
    check_side(&m, j.dim, "density matrix")?;
    DensityMatrix::new(m)
}

pub fn dynamical_to_json(d: &DynamicalMatrix) -> DynamicalJson {
    let c = complex_to_json(d.matrix());
    DynamicalJson { parts: d.parts(), dim: d.local_dim(), re: c.re, im: c.im }
}

pub fn dynamical_from_json(j: DynamicalJson) -> Result<DynamicalMatrix> {
    let m = complex_from_json(&j.re, &j.im)?;
    DynamicalMatrix::new(j.parts, j.dim, m)
}

pub fn blocks_to_json(b: &BlockBasisFamily) -> BlocksJson {
    BlocksJson { dim: b.dim(), scheme: b.scheme(), blocks: b.blocks().iter().map(complex_to_json).collect() }
}

pub fn blocks_from_json(j: BlocksJson) -> Result<BlockBasisFamily> {
    let blocks = j.blocks.iter().map(|b| complex_from_json(&b.re, &b.im)).collect::<Result<Vec<_>>>()?;
    BlockBasisFamily::new(j.dim, j.scheme, blocks)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serialisable")
}
