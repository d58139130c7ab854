//! Multi-input quantum channels in dynamical-matrix form.
//!
//! A channel with `m - 1` inputs of dimension `N` and one output of dimension
//! `N` is stored as its dynamical matrix `D` on `N^m` dimensions, output factor
//! first. Its action is
//!
//! ```text
//! Phi(rho_2, ..., rho_m) = Tr_{2..m}[ D (I x rho_2^T x ... x rho_m^T) ]
//! ```
//!
//! and Kraus operators `K_i` (`N x N^(m-1)`) relate through
//! `D[(a,c),(b,d)] = sum_i K_i[a,c] conj(K_i[b,d])`. Trace preservation is
//! `Tr_1 D = I`; the channel is *m-stochastic* when the partial trace over
//! every single factor is the identity.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{
    self, herm_eig, kron_all, max_abs_diff, partial_trace, tol, trace, CMatrix, SubsystemShape,
    Tolerances, C0, C1,
};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension(format!("density matrix must be square, got {:?}", m.shape())));
        }
        let t = Tolerances::current();
        let (vals, _) = herm_eig(&m)?;
        let min = *vals.last().unwrap();
        if min < -t.psd {
            return Err(Error::Validation(format!("density matrix has eigenvalue {min:e}")));
        }
        let tr = trace(&m);
        if (tr - C1).norm() > t.psd.max(t.herm) {
            return Err(Error::Validation(format!("density matrix trace is {tr}")));
        }
        Ok(DensityMatrix { m })
    }

    /// Wraps a matrix produced by a channel from valid inputs.
    /// Hermitian part rescaled to unit trace; channel outputs have unit
    /// trace up to rounding, which would otherwise compound under iteration.
    pub(crate) fn from_channel_output(m: CMatrix) -> Self {
        let tr = trace(&m).re;
        let scale = if tr > 0.0 { 0.5 / tr } else { 0.5 };
        let h = (&m + m.adjoint()).map(|z| z * scale);
        DensityMatrix { m: h }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { m: CMatrix::identity(n, n).map(|z| z / n as f64) }
    }

    pub fn pure(ket: &CMatrix) -> Result<Self> {
        let norm = numkit::frobenius(ket);
        if norm == 0.0 || ket.ncols() != 1 {
            return Err(Error::Validation("pure state needs a nonzero column vector".into()));
        }
        let k = ket.map(|z| z / norm);
        Ok(DensityMatrix { m: numkit::outer(&k) })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        DensityMatrix { m: numkit::projector(n, k) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.m.diagonal().iter().map(|z| z.re).collect()
    }

    /// Hilbert-Schmidt distance.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        numkit::frobenius(&(&self.m - &other.m))
    }
}

/// Channel-validity figures of a dynamical matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelReport {
    pub min_eigenvalue: f64,
    /// `max |Tr_1 D - I|`.
    pub trace_preservation_defect: f64,
    /// `max_k max |Tr_k D - I|`.
    pub m_stochastic_defect: f64,
}

#[derive(Debug, Clone)]
pub struct DynamicalMatrix {
    parts: usize,
    local_dim: usize,
    m: CMatrix,
    report: OnceLock<ChannelReport>,
}

impl PartialEq for DynamicalMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts && self.local_dim == other.local_dim && self.m == other.m
    }
}

impl DynamicalMatrix {
    /// Checks shape and Hermiticity; channel properties are queried with
    /// [`is_channel`] and [`is_m_stochastic`].
    pub fn new(parts: usize, local_dim: usize, m: CMatrix) -> Result<Self> {
        if parts < 2 || local_dim == 0 {
            return Err(Error::Dimension(format!("parts {parts}, local dim {local_dim}")));
        }
        let side = local_dim.pow(parts as u32);
        if m.shape() != (side, side) {
            return Err(Error::Dimension(format!(
                "dynamical matrix is {:?}, expected {side}x{side}",
                m.shape()
            )));
        }
        let defect = numkit::hermiticity_defect(&m);
        if defect > Tolerances::current().herm {
            return Err(Error::Validation(format!("dynamical matrix not Hermitian (defect {defect:e})")));
        }
        Ok(DynamicalMatrix { parts, local_dim, m, report: OnceLock::new() })
    }

    /// Diagonal dynamical matrix of a stochastic tensor: `D[(i..),(i..)] = A[i..]`.
    pub fn from_tensor_diagonal(a: &crate::classical::StochTensor) -> Self {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            a.entries().len(),
            a.entries().iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        DynamicalMatrix::new(a.order(), a.dim(), d).expect("diagonal is Hermitian")
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    /// Input dimension `N^(m-1)`.
    pub fn input_dim(&self) -> usize {
        self.local_dim.pow((self.parts - 1) as u32)
    }

    fn shape(&self) -> SubsystemShape {
        SubsystemShape::uniform(self.local_dim, self.parts).expect("valid shape")
    }

    /// `D / Tr D`, the normalised Choi state.
    pub fn choi_state(&self) -> CMatrix {
        let tr = trace(&self.m).re;
        self.m.map(|z| z / tr)
    }

    /// Diagonal of `D` reshaped as an order-`m` tensor.
    pub fn diagonal_tensor(&self) -> Result<crate::classical::StochTensor> {
        let t = tol();
        let diag: Vec<f64> =
            self.m.diagonal().iter().map(|z| if z.re < 0.0 && z.re >= -t { 0.0 } else { z.re }).collect();
        crate::classical::StochTensor::new(self.parts, self.local_dim, diag)
    }

    pub fn report(&self) -> ChannelReport {
        *self.report.get_or_init(|| {
            let min_eigenvalue = herm_eig(&self.m).map(|(v, _)| *v.last().unwrap()).unwrap_or(f64::NEG_INFINITY);
            let id = CMatrix::identity(self.input_dim(), self.input_dim());
            let shape = self.shape();
            let defects: Vec<f64> = (0..self.parts)
                .map(|k| {
                    let keep: Vec<usize> = (0..self.parts).filter(|&j| j != k).collect();
                    partial_trace(&self.m, &shape, &keep).map(|r| max_abs_diff(&r, &id)).unwrap_or(f64::INFINITY)
                })
                .collect();
            ChannelReport {
                min_eigenvalue,
                trace_preservation_defect: defects[0],
                m_stochastic_defect: defects.iter().copied().fold(0.0, f64::max),
            }
        })
    }

    fn require_channel(&self) -> Result<()> {
        if !is_channel(self) {
            let r = self.report();
            return Err(Error::NotChannel(format!(
                "min eigenvalue {:e}, trace-preservation defect {:e}",
                r.min_eigenvalue, r.trace_preservation_defect
            )));
        }
        Ok(())
    }
}

/// Completely positive and trace preserving.
pub fn is_channel(d: &DynamicalMatrix) -> bool {
    let t = Tolerances::current();
    let r = d.report();
    r.min_eigenvalue >= -t.psd && r.trace_preservation_defect <= t.herm
}

/// A channel whose partial trace over every factor is the identity.
pub fn is_m_stochastic(d: &DynamicalMatrix) -> bool {
    let t = Tolerances::current();
    let r = d.report();
    r.min_eigenvalue >= -t.psd && r.m_stochastic_defect <= t.herm
}

/// Linear action on arbitrary input matrices (not necessarily states).
pub fn apply_linear(d: &DynamicalMatrix, inputs: &[&CMatrix]) -> Result<CMatrix> {
    if inputs.len() + 1 != d.parts {
        return Err(Error::Dimension(format!(
            "{}-part channel takes {} inputs, got {}",
            d.parts,
            d.parts - 1,
            inputs.len()
        )));
    }
    let n = d.local_dim;
    if let Some(x) = inputs.iter().find(|x| x.shape() != (n, n)) {
        return Err(Error::Dimension(format!("input is {:?}, channel expects {n}x{n}", x.shape())));
    }
    let owned: Vec<CMatrix> = inputs.iter().map(|&x| x.clone()).collect();
    let x = kron_all(&owned);
    let mdim = d.input_dim();
    let mut out = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut acc = C0;
            for c in 0..mdim {
                for e in 0..mdim {
                    let xv = x[(c, e)];
                    if xv != C0 {
                        acc += d.m[(a * mdim + c, b * mdim + e)] * xv;
                    }
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// `Phi(rho_2, ..., rho_m)` for a valid channel.
pub fn apply_m_channel(d: &DynamicalMatrix, args: &[DensityMatrix]) -> Result<DensityMatrix> {
    d.require_channel()?;
    let refs: Vec<&CMatrix> = args.iter().map(|r| r.matrix()).collect();
    Ok(DensityMatrix::from_channel_output(apply_linear(d, &refs)?))
}

/// Two-input quantum convolution `rho * sigma`.
pub fn quantum_convolve(d: &DynamicalMatrix, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DensityMatrix> {
    if d.parts != 3 {
        return Err(Error::Dimension(format!("binary convolution needs 3 parts, got {}", d.parts)));
    }
    apply_m_channel(d, &[rho.clone(), sigma.clone()])
}

/// Kraus operators `K_i` of shape `N x N^(m-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    parts: usize,
    local_dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(parts: usize, local_dim: usize, ops: Vec<CMatrix>) -> Result<Self> {
        if parts < 2 || local_dim == 0 || ops.is_empty() {
            return Err(Error::Dimension("Kraus set needs parts >= 2 and at least one operator".into()));
        }
        let shape = (local_dim, local_dim.pow((parts - 1) as u32));
        if let Some(k) = ops.iter().find(|k| k.shape() != shape) {
            return Err(Error::Dimension(format!("Kraus operator is {:?}, expected {shape:?}", k.shape())));
        }
        Ok(KrausSet { parts, local_dim, ops })
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    /// `max |sum_i K_i^dagger K_i - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.ops[0].ncols();
        let s = self.ops.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&s, &CMatrix::identity(n, n))
    }

    /// `sum_i K_i X K_i^dagger`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let n = self.local_dim;
        self.ops.iter().fold(CMatrix::zeros(n, n), |acc, k| acc + k * x * k.adjoint())
    }
}

fn vec_row_major(k: &CMatrix) -> CMatrix {
    CMatrix::from_fn(k.nrows() * k.ncols(), 1, |r, _| k[(r / k.ncols(), r % k.ncols())])
}

pub fn kraus_to_choi(k: &KrausSet) -> Result<DynamicalMatrix> {
    let side = k.local_dim.pow(k.parts as u32);
    let mut d = CMatrix::zeros(side, side);
    for op in &k.ops {
        let v = vec_row_major(op);
        d += &v * v.adjoint();
    }
    DynamicalMatrix::new(k.parts, k.local_dim, d)
}

/// Canonical Kraus operators from the spectral decomposition of `D`,
/// dropping eigenvalues below `1e-10` times the largest.
pub fn choi_to_kraus(d: &DynamicalMatrix) -> Result<KrausSet> {
    let (vals, vecs) = herm_eig(&d.m)?;
    let t = Tolerances::current();
    let min = *vals.last().unwrap();
    if min < -t.psd {
        return Err(Error::NotChannel(format!("dynamical matrix has eigenvalue {min:e}")));
    }
    let lmax = vals[0].max(0.0);
    let cols = d.input_dim();
    let ops: Vec<CMatrix> = vals
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l >= 1e-10 * lmax && l > 0.0)
        .map(|(i, &l)| {
            let s = l.sqrt();
            CMatrix::from_fn(d.local_dim, cols, |a, c| vecs[(a * cols + c, i)] * s)
        })
        .collect();
    if ops.is_empty() {
        return Err(Error::NotChannel("dynamical matrix is zero".into()));
    }
    KrausSet::new(d.parts, d.local_dim, ops)
}

/// Stinespring unitary `U = sum_i K_i x |i>` with rows indexed `(a, i)`.
/// Needs `N * #K = N^(m-1)` so that `U` is square.
pub fn kraus_to_unitary(k: &KrausSet) -> Result<CMatrix> {
    let n = k.local_dim;
    let r = k.ops.len();
    let cols = k.ops[0].ncols();
    if n * r != cols {
        return Err(Error::Dimension(format!(
            "{r} Kraus operators of size {n}x{cols} do not stack into a square unitary"
        )));
    }
    let u = CMatrix::from_fn(n * r, cols, |row, c| k.ops[row % r][(row / r, c)]);
    let defect = max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(cols, cols));
    if defect > Tolerances::current().recon {
        return Err(Error::Validation(format!("stacked Kraus operators not unitary (defect {defect:e})")));
    }
    Ok(u)
}

/// One diagonal block of a Stinespring unitary after column permutation.
#[derive(Debug, Clone)]
pub struct UnitaryBlock {
    /// Output symbol owning the block.
    pub output: usize,
    /// Input columns feeding the block, ascending.
    pub columns: Vec<usize>,
    pub block: CMatrix,
}

/// Splits a Stinespring unitary with `r` Kraus rows per output into blocks
/// whose columns are disjoint, so that `U P^T` is block diagonal. Returns
/// `None` when the column supports overlap or a block is not unitary.
pub fn block_decomposition(u: &CMatrix, n: usize, r: usize) -> Option<Vec<UnitaryBlock>> {
    let t = Tolerances::current().recon;
    let mut seen = vec![false; u.ncols()];
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let columns: Vec<usize> =
            (0..u.ncols()).filter(|&c| (0..r).any(|i| u[(a * r + i, c)].norm() > t)).collect();
        if columns.len() != r || columns.iter().any(|&c| seen[c]) {
            return None;
        }
        for &c in &columns {
            seen[c] = true;
        }
        let block = CMatrix::from_fn(r, r, |i, j| u[(a * r + i, columns[j])]);
        if !numkit::is_unitary(&block, t) {
            return None;
        }
        out.push(UnitaryBlock { output: a, columns, block });
    }
    seen.iter().all(|&s| s).then_some(out)
}

/// Trajectory of `sigma <- Phi(sigma, ..., sigma)`.
#[derive(Debug, Clone)]
pub struct ChannelFixedPointRun {
    pub state: DensityMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Hilbert-Schmidt distance to `I/N` at every step.
    pub distance_to_maximally_mixed: Vec<f64>,
}

pub fn channel_fixed_point_iterate(
    d: &DynamicalMatrix,
    rho0: &DensityMatrix,
    max_iter: usize,
    tol: f64,
) -> Result<ChannelFixedPointRun> {
    d.require_channel()?;
    let star = DensityMatrix::maximally_mixed(d.local_dim);
    let mut s = rho0.clone();
    let mut dist = vec![s.distance(&star)];
    let (mut iterations, mut converged) = (0, false);
    while iterations < max_iter {
        let next = apply_m_channel(d, &vec![s.clone(); d.parts - 1])?;
        iterations += 1;
        let step = next.distance(&s);
        s = next;
        dist.push(s.distance(&star));
        if step <= tol {
            converged = true;
            break;
        }
    }
    Ok(ChannelFixedPointRun { state: s, iterations, converged, distance_to_maximally_mixed: dist })
}

/// Pairs `(|sigma^(n) - I/N|_2, (1-alpha)^((m-1)^n) |rho^(n) - I/N|_2)`, where
/// `sigma^(0) = alpha I/N + (1 - alpha) rho^(0)` with `alpha = N lambda_min`.
/// The columns agree for m-stochastic channels.
pub fn channel_convergence_law(d: &DynamicalMatrix, sigma0: &DensityMatrix, steps: usize) -> Result<Vec<(f64, f64)>> {
    if !is_m_stochastic(d) {
        return Err(Error::Validation("channel is not m-stochastic".into()));
    }
    let n = d.local_dim;
    let (vals, _) = herm_eig(sigma0.matrix())?;
    let alpha = n as f64 * vals.last().unwrap().max(0.0);
    let star = DensityMatrix::maximally_mixed(n);
    let boundary = (sigma0.matrix() - star.matrix().map(|z| z * alpha)).map(|z| z / (1.0 - alpha));
    let mut rho = DensityMatrix::from_channel_output(boundary);
    let mut sigma = sigma0.clone();
    let m1 = (d.parts - 1) as f64;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let f = (1.0 - alpha).powf(m1.powi(k as i32));
        out.push((sigma.distance(&star), f * rho.distance(&star)));
        sigma = apply_m_channel(d, &vec![sigma.clone(); d.parts - 1])?;
        rho = apply_m_channel(d, &vec![rho.clone(); d.parts - 1])?;
    }
    Ok(out)
}

/// Orthogonal projector onto the column span of `basis`.
pub fn projector_onto(basis: &CMatrix) -> Result<CMatrix> {
    if basis.ncols() == 0 {
        return Err(Error::Dimension("empty subspace".into()));
    }
    let (q, r) = basis.clone().qr().unpack();
    let rank_ok = (0..basis.ncols()).all(|i| r[(i, i)].norm() > 1e-12);
    if !rank_ok || basis.ncols() > basis.nrows() {
        return Err(Error::Validation("subspace basis is rank deficient".into()));
    }
    let q = q.columns(0, basis.ncols()).into_owned();
    Ok(&q * q.adjoint())
}

/// `P_{V-perp} / dim V-perp`, the fixed state attached to a reducing subspace.
pub fn eigenstate_from_reducing_subspace(v_perp: &CMatrix) -> Result<DensityMatrix> {
    let p = projector_onto(v_perp)?;
    let dim = v_perp.ncols() as f64;
    Ok(DensityMatrix::from_channel_output(p.map(|z| z / dim)))
}

/// `Tr[D (P_V x conj(P_Vperp) x ... x conj(P_Vperp))]`: the weight a channel
/// sends into `V` when every input is supported on the orthogonal
/// complement. Inputs enter `D` transposed, hence the conjugated projectors;
/// for real subspaces this is the plain projector product. Returns the
/// value and whether it vanishes within tolerance.
pub fn channel_reducing_check(d: &DynamicalMatrix, v: &CMatrix) -> Result<(f64, bool)> {
    let n = d.local_dim;
    if v.nrows() != n {
        return Err(Error::Dimension(format!("subspace lives in C^{}, channel in C^{n}", v.nrows())));
    }
    let pv = projector_onto(v)?;
    let pperp = CMatrix::identity(n, n) - &pv;
    if numkit::frobenius(&pperp) < 1e-12 {
        return Err(Error::Validation("subspace must be proper".into()));
    }
    let mut factors = vec![pv];
    factors.extend(std::iter::repeat_n(pperp.map(|z| z.conj()), d.parts - 1));
    let value = trace(&(d.matrix() * kron_all(&factors))).re;
    Ok((value, value.abs() <= tol()))
}

/// Which inputs an identity or inverse must reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputScope {
    /// A complete operator basis `|c><d|`: the quantum definition.
    Full,
    /// Diagonal basis states only: the lift of the classical definition.
    Diagonal,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub is_identity: bool,
    /// Worst `|rho*X - X|` or `|X*rho - X|` over the basis inputs.
    pub defect: f64,
    pub pure: bool,
    /// Deviation of `Tr_3[(I x I x conj P) D (I x I x conj P)]` from the
    /// identity channel's dynamical matrix, trace taken over the whole factor.
    pub right_marginal_full: f64,
    /// Same marginal contracted with the conjugate leading eigenvector only.
    pub right_marginal_restricted: f64,
    pub left_marginal_full: f64,
    pub left_marginal_restricted: f64,
}

fn identity_channel_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n * n, n * n, |r, c| if r / n == r % n && c / n == c % n { C1 } else { C0 })
}

fn basis_inputs(n: usize, scope: InputScope) -> Vec<CMatrix> {
    let mut out = Vec::new();
    for c in 0..n {
        for e in 0..n {
            if scope == InputScope::Full || c == e {
                let mut x = CMatrix::zeros(n, n);
                x[(c, e)] = C1;
                out.push(x);
            }
        }
    }
    out
}

/// Marginal of a 3-part `D` with slot `slot` (1 or 2) sandwiched by `p`.
fn sandwiched_marginal(d: &DynamicalMatrix, p: &CMatrix, slot: usize) -> Result<CMatrix> {
    let n = d.local_dim;
    let id = CMatrix::identity(n, n);
    let factors: Vec<CMatrix> = (0..3).map(|k| if k == slot { p.clone() } else { id.clone() }).collect();
    let s = kron_all(&factors);
    let keep: Vec<usize> = (0..3).filter(|&k| k != slot).collect();
    partial_trace(&(&s * d.matrix() * &s), &d.shape(), &keep)
}

fn contracted_marginal(d: &DynamicalMatrix, psi: &CMatrix, slot: usize) -> CMatrix {
    let n = d.local_dim;
    let id = CMatrix::identity(n, n);
    let factors: Vec<CMatrix> = (0..3).map(|k| if k == slot { psi.clone() } else { id.clone() }).collect();
    let v = kron_all(&factors);
    v.adjoint() * d.matrix() * v
}

pub fn identity_report(d: &DynamicalMatrix, rho: &DensityMatrix, scope: InputScope) -> Result<IdentityReport> {
    if d.parts != 3 {
        return Err(Error::Dimension("identity check needs a 3-part channel".into()));
    }
    d.require_channel()?;
    let n = d.local_dim;
    if rho.dim() != n {
        return Err(Error::Dimension(format!("state dimension {} against channel dimension {n}", rho.dim())));
    }
    let mut defect: f64 = 0.0;
    for x in basis_inputs(n, scope) {
        let left = apply_linear(d, &[rho.matrix(), &x])?;
        let right = apply_linear(d, &[&x, rho.matrix()])?;
        defect = defect.max(max_abs_diff(&left, &x)).max(max_abs_diff(&right, &x));
    }
    let (vals, vecs) = herm_eig(rho.matrix())?;
    let psi_conj = CMatrix::from_fn(n, 1, |r, _| vecs[(r, 0)].conj());
    let p_conj = rho.matrix().map(|z| z.conj());
    let target = identity_channel_matrix(n);
    Ok(IdentityReport {
        is_identity: defect <= tol(),
        defect,
        pure: (vals[0] - 1.0).abs() <= tol(),
        right_marginal_full: max_abs_diff(&sandwiched_marginal(d, &p_conj, 2)?, &target),
        right_marginal_restricted: max_abs_diff(&contracted_marginal(d, &psi_conj, 2), &target),
        left_marginal_full: max_abs_diff(&sandwiched_marginal(d, &p_conj, 1)?, &target),
        left_marginal_restricted: max_abs_diff(&contracted_marginal(d, &psi_conj, 1), &target),
    })
}

/// `rho * X = X * rho = X` for every input `X` of the chosen basis.
pub fn verify_identity(d: &DynamicalMatrix, rho: &DensityMatrix, scope: InputScope) -> Result<bool> {
    Ok(identity_report(d, rho, scope)?.is_identity)
}

/// First computational basis state that passes [`verify_identity`].
pub fn find_identity_state(d: &DynamicalMatrix, scope: InputScope) -> Result<Option<usize>> {
    for k in 0..d.local_dim {
        if verify_identity(d, &DensityMatrix::basis(d.local_dim, k), scope)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseReport {
    pub is_inverse: bool,
    pub defect: f64,
    /// `Tr[D (P_id x conj P_rho x conj P_sigma)]` and the swapped order; both
    /// equal one for a pure inverse pair.
    pub projector_trace_rho_sigma: f64,
    pub projector_trace_sigma_rho: f64,
}

/// `rho * sigma = sigma * rho = identity`, after confirming `identity` is one.
pub fn verify_inverse(
    d: &DynamicalMatrix,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    identity: &DensityMatrix,
    scope: InputScope,
) -> Result<InverseReport> {
    if !verify_identity(d, identity, scope)? {
        return Err(Error::NoIdentity("the supplied state is not an identity of the channel".into()));
    }
    let a = apply_linear(d, &[rho.matrix(), sigma.matrix()])?;
    let b = apply_linear(d, &[sigma.matrix(), rho.matrix()])?;
    let defect = max_abs_diff(&a, identity.matrix()).max(max_abs_diff(&b, identity.matrix()));
    let conj = |r: &DensityMatrix| r.matrix().map(|z| z.conj());
    let pt = |x: &CMatrix, y: &CMatrix| {
        trace(&(d.matrix() * kron_all(&[identity.matrix().clone(), x.clone(), y.clone()]))).re
    };
    Ok(InverseReport {
        is_inverse: defect <= tol(),
        defect,
        projector_trace_rho_sigma: pt(&conj(rho), &conj(sigma)),
        projector_trace_sigma_rho: pt(&conj(sigma), &conj(rho)),
    })
}

/// Pure-state fidelity `<psi| rho |psi>`.
pub fn fidelity_with_pure(rho: &CMatrix, psi: &CMatrix) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::StochTensor;
    use crate::sample::{random_channel, rng_from_seed};

    fn amplitude_damping(g: f64) -> KrausSet {
        let k0 = CMatrix::from_row_slice(2, 2, &[C1, C0, C0, Complex64::new((1.0 - g).sqrt(), 0.0)]);
        let k1 = CMatrix::from_row_slice(2, 2, &[C0, Complex64::new(g.sqrt(), 0.0), C0, C0]);
        KrausSet::new(2, 2, vec![k0, k1]).unwrap()
    }

    #[test]
    fn diagonal_choi_of_t2_is_a_tristochastic_channel() {
        let d = DynamicalMatrix::from_tensor_diagonal(&StochTensor::t2());
        assert!(is_channel(&d));
        assert!(is_m_stochastic(&d));
    }

    #[test]
    fn zero_matrix_is_not_a_channel() {
        let d = DynamicalMatrix::new(3, 2, CMatrix::zeros(8, 8)).unwrap();
        assert!(!is_channel(&d));
    }

    #[test]
    fn amplitude_damping_is_a_channel_but_not_bistochastic() {
        let d = kraus_to_choi(&amplitude_damping(0.3)).unwrap();
        assert!(is_channel(&d));
        assert!(!is_m_stochastic(&d));
    }

    #[test]
    fn channel_action_matches_kraus_action() {
        let mut rng = rng_from_seed(11);
        let d = random_channel(3, 2, 2, &mut rng);
        let k = choi_to_kraus(&d).unwrap();
        let rho = numkit::random_density(2, &mut rng);
        let sigma = numkit::random_density(2, &mut rng);
        let via_d = apply_linear(&d, &[&rho, &sigma]).unwrap();
        let via_k = k.apply(&numkit::kron(&rho, &sigma));
        assert!(max_abs_diff(&via_d, &via_k) < 1e-12);
    }

    #[test]
    fn t2_diagonal_channel_acts_on_basis_states() {
        let d = DynamicalMatrix::from_tensor_diagonal(&StochTensor::t2());
        let out = quantum_convolve(&d, &DensityMatrix::basis(2, 0), &DensityMatrix::basis(2, 1)).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityMatrix::basis(2, 1).matrix()) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        let out = quantum_convolve(&d, &mixed, &DensityMatrix::basis(2, 1)).unwrap();
        assert!(max_abs_diff(out.matrix(), mixed.matrix()) < 1e-15);
    }

    #[test]
    fn quantum_convolve_rejects_mismatch_and_non_channels() {
        let d = DynamicalMatrix::from_tensor_diagonal(&StochTensor::t2());
        let r = quantum_convolve(&d, &DensityMatrix::maximally_mixed(3), &DensityMatrix::maximally_mixed(2));
        assert!(matches!(r, Err(Error::Dimension(_))));
        let z = DynamicalMatrix::new(3, 2, CMatrix::zeros(8, 8)).unwrap();
        let r = quantum_convolve(&z, &DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(2));
        assert!(matches!(r, Err(Error::NotChannel(_))));
    }

    #[test]
    fn choi_kraus_round_trip() {
        let mut rng = rng_from_seed(12);
        let d = random_channel(3, 3, 4, &mut rng);
        let back = kraus_to_choi(&choi_to_kraus(&d).unwrap()).unwrap();
        assert!(max_abs_diff(back.matrix(), d.matrix()) < 1e-9);
    }

    #[test]
    fn unitary_from_non_square_kraus_is_rejected() {
        let mut rng = rng_from_seed(13);
        let d = random_channel(3, 2, 3, &mut rng);
        assert!(kraus_to_unitary(&choi_to_kraus(&d).unwrap()).is_err());
    }

    #[test]
    fn identity_matrix_of_identity_channel() {
        let k = KrausSet::new(2, 3, vec![CMatrix::identity(3, 3)]).unwrap();
        let d = kraus_to_choi(&k).unwrap();
        assert_eq!(d.matrix(), &identity_channel_matrix(3));
    }

    #[test]
    fn eigenstate_of_coordinate_subspace() {
        let v = CMatrix::from_fn(3, 2, |r, c| if r == c + 1 { C1 } else { C0 });
        let s = eigenstate_from_reducing_subspace(&v).unwrap();
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C0,
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        assert!(max_abs_diff(s.matrix(), &want) < 1e-15);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[Complex64::new(1.5, 0.0), C0, C0, Complex64::new(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg).is_err());
    }
}
