//! Quantum channels whose dynamical-matrix diagonal is a given tristochastic
//! tensor, and measures of how coherent they are.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{self, ProbVector, StochTensor};
use crate::error::{Error, Result};
use crate::numkit::{self, shannon_entropy, von_neumann_entropy, CMatrix, Tolerances};
use crate::qchannel::{apply_linear, kraus_to_choi, DynamicalMatrix, KrausSet};
use crate::sample::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockScheme {
    Identity,
    Fourier,
    Mub,
    Custom,
}

impl BlockScheme {
    pub fn name(self) -> &'static str {
        match self {
            BlockScheme::Identity => "identity",
            BlockScheme::Fourier => "fourier",
            BlockScheme::Mub => "mub",
            BlockScheme::Custom => "custom",
        }
    }
}

/// One unitary `B^j` per output symbol `j`; column `n` of `B^j` is the basis
/// vector attached to the `n`-th nonzero input pair of row `j`, so
/// `B^j[(i, n)]` is its `i`-th component.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockBasisFamily {
    dim: usize,
    scheme: BlockScheme,
    blocks: Vec<CMatrix>,
}

impl BlockBasisFamily {
    pub fn new(dim: usize, scheme: BlockScheme, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != dim {
            return Err(Error::Dimension(format!("{} blocks for dimension {dim}", blocks.len())));
        }
        let t = Tolerances::current().recon;
        for (j, b) in blocks.iter().enumerate() {
            if b.shape() != (dim, dim) {
                return Err(Error::Dimension(format!("block {j} is {:?}", b.shape())));
            }
            if !numkit::is_unitary(b, t) {
                return Err(Error::Validation(format!("block {} is not unitary", j + 1)));
            }
        }
        Ok(BlockBasisFamily { dim, scheme, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> BlockScheme {
        self.scheme
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Mutually unbiased blocks for prime dimensions, Fourier blocks otherwise.
pub fn default_scheme(n: usize) -> BlockScheme {
    if is_prime(n) {
        BlockScheme::Mub
    } else {
        BlockScheme::Fourier
    }
}

fn fourier(n: usize) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |i, k| Complex64::from_polar(s, 2.0 * std::f64::consts::PI * (i * k % n) as f64 / n as f64))
}

/// Basis `k` of the quadratic-phase family in prime dimension `p`:
/// vector `n` has components `omega^(k i^2 + n i) / sqrt(p)`.
fn quadratic_phase_basis(p: usize, k: usize) -> CMatrix {
    let s = 1.0 / (p as f64).sqrt();
    CMatrix::from_fn(p, p, |i, n| {
        let e = (k * i * i + n * i) % p;
        Complex64::from_polar(s, 2.0 * std::f64::consts::PI * e as f64 / p as f64)
    })
}

/// Block family with `B^1 = I`; the remaining blocks are `I` (identity),
/// the Fourier matrix (fourier) or successive mutually unbiased bases (mub,
/// prime `n` only).
pub fn default_blocks(n: usize, scheme: BlockScheme) -> Result<BlockBasisFamily> {
    if n == 0 {
        return Err(Error::Dimension("dimension must be positive".into()));
    }
    let blocks = match scheme {
        BlockScheme::Identity => vec![CMatrix::identity(n, n); n],
        BlockScheme::Fourier => {
            std::iter::once(CMatrix::identity(n, n)).chain(std::iter::repeat_n(fourier(n), n - 1)).collect()
        }
        BlockScheme::Mub => {
            if !is_prime(n) {
                return Err(Error::Unsupported(format!("mub blocks need a prime dimension, got {n}")));
            }
            std::iter::once(CMatrix::identity(n, n)).chain((0..n - 1).map(|k| quadratic_phase_basis(n, k))).collect()
        }
        BlockScheme::Custom => return Err(Error::Unsupported("custom blocks must be supplied".into())),
    };
    BlockBasisFamily::new(n, scheme, blocks)
}

/// Haar-random block family.
pub fn random_blocks<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BlockBasisFamily {
    let blocks = (0..n).map(|_| numkit::random_unitary(n, rng)).collect();
    BlockBasisFamily::new(n, BlockScheme::Custom, blocks).expect("Haar blocks are unitary")
}

/// `D = diag(A)`: the incoherent lift of any stochastic tensor.
pub fn coherify_diagonal(a: &StochTensor) -> DynamicalMatrix {
    DynamicalMatrix::from_tensor_diagonal(a)
}

/// Kraus operators of the coherification of an order-3 permutation tensor:
/// `K_i[j, c_n(j)] = B^j[(i, n)]`, where `c_n(j)` is the `n`-th nonzero
/// column (ascending) of row `j` of `A` viewed as an `N x N^2` matrix.
pub fn coherify_permutation(a: &StochTensor, blocks: &BlockBasisFamily) -> Result<KrausSet> {
    if a.order() != 3 {
        return Err(Error::Dimension(format!("permutation coherification needs order 3, got {}", a.order())));
    }
    let n = a.dim();
    if blocks.dim() != n {
        return Err(Error::Dimension(format!("blocks of dimension {} for tensor dimension {n}", blocks.dim())));
    }
    if !classical::validate(a).permutation {
        return Err(Error::Validation("tensor is not a tristochastic permutation tensor".into()));
    }
    let mut ops = vec![CMatrix::zeros(n, n * n); n];
    for j in 0..n {
        let cols: Vec<usize> = (0..n * n).filter(|&c| a.entries()[j * n * n + c] > 0.5).collect();
        for (nn, &c) in cols.iter().enumerate() {
            for (i, op) in ops.iter_mut().enumerate() {
                op[(j, c)] = blocks.blocks()[j][(i, nn)];
            }
        }
    }
    KrausSet::new(3, n, ops)
}

/// `C_2 = (sum_ab |D_ab|^2 - sum_a |D_aa|^2) / N^(2(m-1))`.
pub fn c2_coherence(d: &DynamicalMatrix) -> f64 {
    let m = d.matrix();
    let total: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let diag: f64 = m.diagonal().iter().map(|z| z.norm_sqr()).sum();
    (total - diag) / (d.input_dim() as f64).powi(2)
}

/// `Tr rho^2` of the Choi state `rho = D / N^(m-1)`.
pub fn channel_purity(d: &DynamicalMatrix) -> f64 {
    d.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>() / (d.input_dim() as f64).powi(2)
}

/// Relative entropy of coherence of the Choi state, `S(diag rho) - S(rho)`.
pub fn entropic_coherence(d: &DynamicalMatrix) -> Result<f64> {
    let rho = d.choi_state();
    let diag: Vec<f64> = rho.diagonal().iter().map(|z| z.re.max(0.0)).collect();
    Ok(shannon_entropy(&diag) - von_neumann_entropy(&rho)?)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoherenceReport {
    pub c2: f64,
    pub entropic: f64,
    pub purity: f64,
}

pub fn coherence_report(d: &DynamicalMatrix) -> Result<CoherenceReport> {
    Ok(CoherenceReport { c2: c2_coherence(d), entropic: entropic_coherence(d)?, purity: channel_purity(d) })
}

/// Rotation `[[cos t/2, sin t/2], [sin t/2, -cos t/2]]`.
pub fn reflection(theta: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[Complex64::new(c, 0.0), Complex64::new(s, 0.0), Complex64::new(s, 0.0), Complex64::new(-c, 0.0)])
}

/// Two-Kraus coherification of the qubit tensor with slices
/// `([[x, 1-x], [1-x, x]], [[1-x, x], [x, 1-x]])`.
///
/// Writing `K_i = [[a, b, c, d], [e, f, g, h]]` (entries indexed by `i`),
/// the columns `a, d` and `b, c` are scaled standard bases, and
/// `(e, h) ~ u (a, d)`, `(f, g) ~ -u (b, c)`; `u` defaults to [`reflection`]
/// at `pi/2`.
pub fn coherify_qubit_tristochastic(x: f64, u: Option<&CMatrix>) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Validation(format!("x = {x} outside [0, 1]")));
    }
    let default = reflection(std::f64::consts::FRAC_PI_2);
    let u = u.unwrap_or(&default);
    if u.shape() != (2, 2) || !numkit::is_unitary(u, Tolerances::current().recon) {
        return Err(Error::Validation("free block must be a 2x2 unitary".into()));
    }
    let (sx, sy) = (x.sqrt(), (1.0 - x).sqrt());
    let e0 = numkit::basis_ket(2, 0);
    let e1 = numkit::basis_ket(2, 1);
    let cols = [
        [e0.map(|z| z * sx), e0.map(|z| z * sy), e1.map(|z| z * sy), e1.map(|z| z * sx)],
        [
            (u * &e0).map(|z| z * sy),
            (u * &e0).map(|z| -z * sx),
            (u * &e1).map(|z| -z * sx),
            (u * &e1).map(|z| z * sy),
        ],
    ];
    let ops = (0..2)
        .map(|i| CMatrix::from_fn(2, 4, |row, col| cols[row][col][(i, 0)]))
        .collect();
    KrausSet::new(3, 2, ops)
}

/// `(1 + 2x - 2x^2) / 4`.
pub fn qubit_family_c2(x: f64) -> f64 {
    (1.0 + 2.0 * x - 2.0 * x * x) / 4.0
}

/// Entropic coherence of the qubit family computed from its spectrum:
/// `-x ln(x/4) - (1-x) ln((1-x)/4) - ln 2`.
pub fn qubit_family_entropic(x: f64) -> f64 {
    shannon_entropy(&[x / 4.0; 4]) + shannon_entropy(&[(1.0 - x) / 4.0; 4]) - 2f64.ln()
}

/// The same expression with `+ ln 2`, as it is sometimes quoted; it exceeds
/// the true value by `2 ln 2` everywhere.
pub fn qubit_family_entropic_quoted(x: f64) -> f64 {
    qubit_family_entropic(x) + 2.0 * 2f64.ln()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagonalCheck {
    /// Worst deviation of an output diagonal from the classical action on
    /// the input diagonals, over all trials and perturbations.
    pub max_deviation: f64,
    pub consistent: bool,
}

fn perturb_off_diagonal<R: Rng + ?Sized>(rho: &CMatrix, rng: &mut R) -> CMatrix {
    let n = rho.nrows();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        (0..n).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))),
    ));
    let t: f64 = rng.random();
    let rotated = &phases * rho * phases.adjoint();
    let dephased = CMatrix::from_diagonal(&rho.diagonal());
    rotated.map(|z| z * t) + dephased.map(|z| z * (1.0 - t))
}

/// Output diagonals depend only on input diagonals and equal the classical
/// action of `diag D` on them. Each trial draws random states, changes their
/// off-diagonal parts while keeping the diagonals, and compares.
pub fn diagonal_dependence_check(d: &DynamicalMatrix, trials: usize, seed: u64) -> Result<DiagonalCheck> {
    let a = d.diagonal_tensor()?;
    let n = d.local_dim();
    let mut rng = rng_from_seed(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let states: Vec<CMatrix> = (0..d.parts() - 1).map(|_| numkit::random_density(n, &mut rng)).collect();
        let perturbed: Vec<CMatrix> = states.iter().map(|s| perturb_off_diagonal(s, &mut rng)).collect();
        let diags: Vec<ProbVector> = states
            .iter()
            .map(|s| ProbVector::new(s.diagonal().iter().map(|z| z.re).collect()))
            .collect::<Result<_>>()?;
        let classical = classical::apply_m(&a, &diags)?;
        for inputs in [&states, &perturbed] {
            let refs: Vec<&CMatrix> = inputs.iter().collect();
            let out = apply_linear(d, &refs)?;
            for (z, c) in out.diagonal().iter().zip(classical.entries()) {
                worst = worst.max((z.re - c).abs()).max(z.im.abs());
            }
        }
    }
    Ok(DiagonalCheck { max_deviation: worst, consistent: worst <= numkit::tol() })
}

/// Dynamical matrix of the permutation coherification, for convenience.
pub fn coherified_channel(a: &StochTensor, blocks: &BlockBasisFamily) -> Result<DynamicalMatrix> {
    kraus_to_choi(&coherify_permutation(a, blocks)?)
}

/// Largest `| |<B^j_n | B^k_l>|^2 - 1/N |` over distinct blocks `j != k`.
pub fn unbiasedness_defect(blocks: &BlockBasisFamily) -> f64 {
    let n = blocks.dim();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let g = blocks.blocks()[j].adjoint() * &blocks.blocks()[k];
            for z in g.iter() {
                worst = worst.max((z.norm_sqr() - 1.0 / n as f64).abs());
            }
        }
    }
    worst
}

/// `D` with one forbidden coherence `D[(0,c),(0,d)]`, `c != d`, set to `eps`.
pub fn corrupt_same_output_coherence(d: &DynamicalMatrix, eps: f64) -> Result<DynamicalMatrix> {
    let mut m = d.matrix().clone();
    m[(0, 1)] += Complex64::new(eps, 0.0);
    m[(1, 0)] += Complex64::new(eps, 0.0);
    DynamicalMatrix::new(d.parts(), d.local_dim(), m)
}
