//! Dense complex linear algebra shared by the classical and quantum layers.
//!
//! Composite indices are row-major with subsystem 0 varying slowest, so for
//! shape `[d0, d1, d2]` the basis state `|i j k>` sits at `(i*d1 + j)*d2 + k`.

use std::sync::RwLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);
pub const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Environment variable overriding the Hermiticity/PSD tolerance.
pub const TOL_ENV: &str = "TRISTOCH_TOL";

/// Numerical tolerances used by validation predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub psd: f64,
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { herm: 1e-9, psd: 1e-9, recon: 1e-10 }
    }
}

static TOLERANCES: RwLock<Option<Tolerances>> = RwLock::new(None);

impl Tolerances {
    /// Active tolerances: an explicit [`Tolerances::set`] wins, then
    /// `TRISTOCH_TOL`, then the defaults.
    pub fn current() -> Tolerances {
        if let Some(t) = *TOLERANCES.read().unwrap() {
            return t;
        }
        let mut t = Tolerances::default();
        if let Some(v) = std::env::var(TOL_ENV).ok().and_then(|s| s.parse::<f64>().ok()) {
            if v > 0.0 && v.is_finite() {
                t.herm = v;
                t.psd = v;
            }
        }
        t
    }

    pub fn set(t: Tolerances) {
        *TOLERANCES.write().unwrap() = Some(t);
    }
}

/// Shorthand for the structural predicate tolerance.
pub fn tol() -> f64 {
    Tolerances::current().herm
}

/// Factor dimensions of a composite system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid subsystem dims {dims:?}")));
        }
        Ok(SubsystemShape { dims })
    }

    /// `parts` copies of a `d`-dimensional factor.
    pub fn uniform(d: usize, parts: usize) -> Result<Self> {
        Self::new(vec![d; parts])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Flat offsets of every multi-index over the listed subsystems.
    fn offsets(&self, subs: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &k in subs {
            let mut next = Vec::with_capacity(out.len() * self.dims[k]);
            for &base in &out {
                for d in 0..self.dims[k] {
                    next.push(base + d * strides[k]);
                }
            }
            out = next;
        }
        out
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMatrix]) -> CMatrix {
    ms.iter()
        .fold(CMatrix::from_element(1, 1, C1), |acc, m| kron(&acc, m))
}

/// Trace out every subsystem not listed in `keep`; kept factors stay in
/// ascending order.
pub fn partial_trace(m: &CMatrix, shape: &SubsystemShape, keep: &[usize]) -> Result<CMatrix> {
    let n = shape.total();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, shape {:?} needs {n}x{n}",
            m.nrows(),
            m.ncols(),
            shape.dims()
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= shape.dims().len()) {
        return Err(Error::Dimension(format!("keep {keep:?} out of range")));
    }
    let traced: Vec<usize> = (0..shape.dims().len()).filter(|k| !keep.contains(k)).collect();
    let ko = shape.offsets(&keep);
    let to = shape.offsets(&traced);
    Ok(CMatrix::from_fn(ko.len(), ko.len(), |u, v| {
        to.iter().map(|&t| m[(ko[u] + t, ko[v] + t)]).sum()
    }))
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// Distance between `a` and `b` after removing the best global phase.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C1 };
    max_abs_diff(a, &b.map(|z| z * phase))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(u.nrows(), u.ncols())) <= tol
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending and
/// eigenvectors as the matching columns.
pub fn herm_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let defect = hermiticity_defect(m);
    if defect > tol() {
        return Err(Error::Validation(format!("matrix not Hermitian (defect {defect:e})")));
    }
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Shannon entropy (natural log) of a probability list; `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// `S(rho) = -Tr rho ln rho`, clamping eigenvalues within the PSD tolerance.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let t = Tolerances::current();
    let (vals, _) = herm_eig(rho)?;
    if let Some(&min) = vals.last() {
        if min < -t.psd {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
    }
    let tr: f64 = vals.iter().sum();
    if (tr - 1.0).abs() > t.psd.max(1e-9) {
        return Err(Error::Validation(format!("trace {tr} differs from 1")));
    }
    let clamped: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
    Ok(shannon_entropy(&clamped))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn basis_ket(n: usize, k: usize) -> CMatrix {
    let mut v = CMatrix::zeros(n, 1);
    v[(k, 0)] = C1;
    v
}

pub fn projector(n: usize, k: usize) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    p[(k, k)] = C1;
    p
}

pub fn outer(ket: &CMatrix) -> CMatrix {
    ket * ket.adjoint()
}

/// Normalised complex Gaussian vector, i.e. a Haar-random pure state.
pub fn random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let v = CMatrix::from_fn(n, 1, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = frobenius(&v);
    v.map(|z| z / norm)
}

/// Haar-random unitary from the phase-corrected QR of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q.clone();
    for c in 0..n {
        let d = r[(c, c)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C1 };
        for row in 0..n {
            u[(row, c)] = q[(row, c)] * ph;
        }
    }
    u
}

/// Full-rank random density matrix `G G^† / Tr(G G^†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    m.map(|z| z / tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kron_of_basis_vectors_places_one_in_row_major_slot() {
        let k = kron(&basis_ket(2, 1), &basis_ket(3, 2));
        assert_eq!(k[(5, 0)], C1);
        assert_eq!(k.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn partial_trace_recovers_factors_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let shape = SubsystemShape::new(vec![2, 3]).unwrap();
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, &shape, &[0]).unwrap(), &a) < 1e-14);
        assert!(max_abs_diff(&partial_trace(&ab, &shape, &[1]).unwrap(), &b) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let mut psi = CMatrix::zeros(4, 1);
        psi[(0, 0)] = c(std::f64::consts::FRAC_1_SQRT_2);
        psi[(3, 0)] = c(std::f64::consts::FRAC_1_SQRT_2);
        let shape = SubsystemShape::uniform(2, 2).unwrap();
        let red = partial_trace(&outer(&psi), &shape, &[0]).unwrap();
        let half = CMatrix::identity(2, 2).map(|z| z * 0.5);
        assert!(max_abs_diff(&red, &half) < 1e-15);
    }

    #[test]
    fn partial_trace_three_parties_matches_explicit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_density(12, &mut rng);
        let shape = SubsystemShape::new(vec![2, 3, 2]).unwrap();
        let got = partial_trace(&m, &shape, &[0, 2]).unwrap();
        let mut want = CMatrix::zeros(4, 4);
        for a in 0..2 {
            for c in 0..2 {
                for b in 0..2 {
                    for d in 0..2 {
                        for t in 0..3 {
                            want[(a * 2 + c, b * 2 + d)] += m[((a * 3 + t) * 2 + c, (b * 3 + t) * 2 + d)];
                        }
                    }
                }
            }
        }
        assert!(max_abs_diff(&got, &want) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_wrong_shape() {
        let shape = SubsystemShape::uniform(2, 2).unwrap();
        assert!(matches!(
            partial_trace(&CMatrix::zeros(3, 3), &shape, &[0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn herm_eig_of_pauli_x() {
        let x = CMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0]);
        let (vals, vecs) = herm_eig(&x).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] + 1.0).abs() < 1e-15);
        let v0 = CMatrix::from_fn(2, 1, |r, _| vecs[(r, 0)]);
        assert!(max_abs_diff(&(&x * &v0), &v0) < 1e-14);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[C0, C1, C0, C0]);
        assert!(herm_eig(&m).is_err());
    }

    #[test]
    fn entropy_of_pure_and_maximally_mixed() {
        assert!(von_neumann_entropy(&projector(3, 1)).unwrap().abs() < 1e-14);
        let mixed = CMatrix::identity(3, 3).map(|z| z / 3.0);
        assert!((von_neumann_entropy(&mixed).unwrap() - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(is_unitary(&random_unitary(5, &mut rng), 1e-12));
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary(3, &mut rng);
        let v = u.map(|z| z * Complex64::from_polar(1.0, 0.7));
        assert!(phase_distance(&u, &v) < 1e-14);
    }
}
