//! Stochastic tensors and the multi-argument convolutions they induce.
//!
//! A tensor of order `m` over `N` symbols has entries `A[i1, ..., im]`, stored
//! row-major with `i1` slowest. The first index is the output: the induced
//! `(m-1)`-ary operation is
//!
//! ```text
//! r[i] = sum_{j,k,...} A[i, j, k, ...] p[j] q[k] ...
//! ```
//!
//! so a tensor is *stochastic* when it sums to one along axis 0 for every
//! choice of inputs, and *m-stochastic* when every axis has that property.

use std::fmt;

use itertools::Itertools;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::tol;

/// Largest dimension accepted by [`perm_average_convolve`] (`(N-1)!` terms).
pub const MAX_PERM_AVERAGE_DIM: usize = 7;
/// Largest dimension accepted by the exhaustive reducing-set search.
pub const MAX_REDUCING_SEARCH_DIM: usize = 20;

/// A point of the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    /// Validates nonnegativity and unit sum within the structural tolerance.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Dimension("empty probability vector".into()));
        }
        let t = tol();
        if let Some((i, &v)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -t) {
            return Err(Error::Validation(format!("entry {} is {v}", i + 1)));
        }
        let s: f64 = entries.iter().sum();
        if (s - 1.0).abs() > t {
            return Err(Error::Validation(format!("entries sum to {s}")));
        }
        Ok(ProbVector { entries })
    }

    /// Wraps entries that sum to one up to rounding, removing the rounding
    /// so repeated products do not drift off the simplex.
    pub(crate) fn from_raw(mut entries: Vec<f64>) -> Self {
        let s: f64 = entries.iter().sum();
        if s > 0.0 {
            entries.iter_mut().for_each(|x| *x /= s);
        }
        ProbVector { entries }
    }

    pub fn uniform(n: usize) -> Self {
        ProbVector { entries: vec![1.0 / n as f64; n] }
    }

    /// The vertex `e_k` (0-based `k`).
    pub fn delta(n: usize, k: usize) -> Self {
        let mut entries = vec![0.0; n];
        entries[k] = 1.0;
        ProbVector { entries }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn l1_distance(&self, other: &ProbVector) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn dist_sq(&self, other: &ProbVector) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Index of the unit entry when the vector is a vertex of the simplex.
    pub fn as_vertex(&self, tol: f64) -> Option<usize> {
        let k = self.entries.iter().position(|&v| (v - 1.0).abs() <= tol)?;
        self.entries
            .iter()
            .enumerate()
            .all(|(i, &v)| i == k || v.abs() <= tol)
            .then_some(k)
    }
}

/// Dense nonnegative tensor of order `m` over `N` symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochTensor {
    order: usize,
    dim: usize,
    entries: Vec<f64>,
}

/// Stochasticity class of a tensor, as reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Axis 0 does not sum to one.
    NotStochastic,
    /// Only axis 0 sums to one.
    Stochastic,
    /// Axis 0 and at least one, but not every, other axis sum to one.
    Bistochastic,
    /// Every axis sums to one.
    MStochastic,
}

/// Per-axis marginal deviations and the resulting classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisReport {
    pub order: usize,
    pub dim: usize,
    /// `max |sum over that axis - 1|`, one value per axis.
    pub axis_deviation: Vec<f64>,
    pub min_entry: f64,
    pub stochastic_axes: Vec<usize>,
    pub class: Classification,
    /// Every entry is 0 or 1 (within tolerance) and the tensor is m-stochastic.
    pub permutation: bool,
}

impl AxisReport {
    pub fn class_name(&self) -> String {
        match self.class {
            Classification::NotStochastic => "not stochastic".into(),
            Classification::Stochastic => "stochastic".into(),
            Classification::Bistochastic => "bistochastic".into(),
            Classification::MStochastic => match self.order {
                2 => "bistochastic".into(),
                3 => "tristochastic".into(),
                m => format!("{m}-stochastic"),
            },
        }
    }
}

impl fmt::Display for AxisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order {} dim {}: {}", self.order, self.dim, self.class_name())?;
        for (k, d) in self.axis_deviation.iter().enumerate() {
            writeln!(f, "  axis {} marginal deviation {d:.3e}", k + 1)?;
        }
        writeln!(f, "  min entry {:.3e}", self.min_entry)?;
        write!(f, "  permutation tensor: {}", self.permutation)
    }
}

impl StochTensor {
    /// Checks shape and nonnegativity; stochasticity is reported by [`validate`].
    pub fn new(order: usize, dim: usize, entries: Vec<f64>) -> Result<Self> {
        if order < 2 || dim == 0 {
            return Err(Error::Dimension(format!("order {order}, dim {dim}")));
        }
        let len = dim
            .checked_pow(order as u32)
            .ok_or_else(|| Error::Dimension("tensor too large".into()))?;
        if entries.len() != len {
            return Err(Error::Dimension(format!(
                "{} entries given, order {order} dim {dim} needs {len}",
                entries.len()
            )));
        }
        let t = tol();
        if let Some((i, &v)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -t) {
            return Err(Error::Validation(format!("entry {i} is {v}")));
        }
        Ok(StochTensor { order, dim, entries })
    }

    pub fn from_fn(order: usize, dim: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let len = dim.pow(order as u32);
        let mut idx = vec![0usize; order];
        let entries = (0..len)
            .map(|flat| {
                unflatten(flat, dim, &mut idx);
                f(&idx)
            })
            .collect();
        Self::new(order, dim, entries)
    }

    /// Order-3 tensor from output slices: `slices[i][j][k] = A[i, j, k]`.
    pub fn from_slices(slices: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n = slices.len();
        let entries = slices.iter().flatten().flatten().copied().collect();
        Self::new(3, n, entries)
    }

    /// The two-symbol permutation tensor with slices `(I, X)`; its
    /// convolution is addition mod 2.
    pub fn t2() -> Self {
        Self::cyclic(2)
    }

    /// Slices `(I, P, P^2)` with `P[j][k] = 1` iff `k = j + 1 mod 3`, so
    /// `A[i, j, k] = 1` iff `i = k - j mod 3`.
    pub fn t3() -> Self {
        Self::from_fn(3, 3, |ix| f64::from(u8::from(ix[0] == (ix[2] + 3 - ix[1]) % 3))).unwrap()
    }

    /// Group tensor of `Z_N`: `A[i, j, k] = 1` iff `i = j + k mod N`, i.e.
    /// the slice along the last index `k` is the `k`-th power of the cyclic
    /// shift `e_j -> e_{j+1}`. Its convolution is ordinary cyclic convolution
    /// and `e_0` is its identity.
    pub fn cyclic(n: usize) -> Self {
        Self::from_fn(3, n, |ix| f64::from(u8::from(ix[0] == (ix[1] + ix[2]) % n))).unwrap()
    }

    /// Order-`m` group tensor of `Z_N`: output equals the sum of inputs mod `N`.
    pub fn cyclic_order(order: usize, n: usize) -> Self {
        Self::from_fn(order, n, |ix| {
            f64::from(u8::from(ix[0] == ix[1..].iter().sum::<usize>() % n))
        })
        .unwrap()
    }

    /// Slices `A[i, j, k] = delta_ij delta_jk`: only diagonal entries, not stochastic.
    pub fn diagonal_delta(n: usize) -> Self {
        Self::from_fn(3, n, |ix| f64::from(u8::from(ix[0] == ix[1] && ix[1] == ix[2]))).unwrap()
    }

    /// `A[i, j, k] = r[i - j - k mod N]`: tristochastic, commutative and
    /// associative for any probability vector `r`.
    pub fn circulant(r: &ProbVector) -> Self {
        let n = r.dim();
        Self::from_fn(3, n, |ix| r.entries()[(ix[0] + 2 * n - ix[1] - ix[2]) % n]).unwrap()
    }

    /// The one-parameter family of qubit tristochastic tensors,
    /// slices `([[x, 1-x], [1-x, x]], [[1-x, x], [x, 1-x]])`.
    pub fn qubit_family(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Validation(format!("x = {x} outside [0, 1]")));
        }
        Self::from_fn(3, 2, |ix| if (ix[0] + ix[1] + ix[2]) % 2 == 0 { x } else { 1.0 - x })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn flat_index(&self, ix: &[usize]) -> usize {
        ix.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, ix: &[usize]) -> f64 {
        self.entries[self.flat_index(ix)]
    }

    /// `max |sum_{i_axis} A - 1|` over all choices of the remaining indices.
    pub fn axis_deviation(&self, axis: usize) -> f64 {
        let n = self.dim;
        let stride = n.pow((self.order - 1 - axis) as u32);
        let mut worst: f64 = 0.0;
        for flat in 0..self.entries.len() {
            if !(flat / stride).is_multiple_of(n) {
                continue;
            }
            let s: f64 = (0..n).map(|d| self.entries[flat + d * stride]).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    pub fn is_m_stochastic(&self, tol: f64) -> bool {
        (0..self.order).all(|k| self.axis_deviation(k) <= tol)
    }

    fn require_stochastic(&self) -> Result<()> {
        let dev = self.axis_deviation(0);
        if dev > tol() {
            return Err(Error::Validation(format!(
                "tensor is not stochastic along axis 1 (deviation {dev:e})"
            )));
        }
        Ok(())
    }

    fn require_order(&self, m: usize) -> Result<()> {
        if self.order != m {
            return Err(Error::Dimension(format!("expected order {m}, got {}", self.order)));
        }
        Ok(())
    }

    fn require_m_stochastic(&self) -> Result<()> {
        for k in 0..self.order {
            let dev = self.axis_deviation(k);
            if dev > tol() {
                return Err(Error::Validation(format!(
                    "tensor is not {}-stochastic: axis {} deviates by {dev:e}",
                    self.order,
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

fn unflatten(mut flat: usize, n: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

/// Classifies a tensor by which axes are stochastic.
pub fn validate(a: &StochTensor) -> AxisReport {
    let t = tol();
    let axis_deviation: Vec<f64> = (0..a.order).map(|k| a.axis_deviation(k)).collect();
    let stochastic_axes: Vec<usize> =
        axis_deviation.iter().enumerate().filter(|(_, &d)| d <= t).map(|(k, _)| k).collect();
    let class = if axis_deviation[0] > t {
        Classification::NotStochastic
    } else if stochastic_axes.len() == a.order {
        Classification::MStochastic
    } else if stochastic_axes.len() > 1 {
        Classification::Bistochastic
    } else {
        Classification::Stochastic
    };
    let binary = a.entries.iter().all(|&v| v.abs() <= t || (v - 1.0).abs() <= t);
    AxisReport {
        order: a.order,
        dim: a.dim,
        min_entry: a.entries.iter().copied().fold(f64::INFINITY, f64::min),
        permutation: binary && class == Classification::MStochastic,
        axis_deviation,
        stochastic_axes,
        class,
    }
}

/// Contracts inputs into every index but the first.
fn contract(a: &StochTensor, args: &[&[f64]]) -> Vec<f64> {
    let n = a.dim;
    let mut v = a.entries.clone();
    for arg in args.iter().rev() {
        v = v.chunks_exact(n).map(|row| row.iter().zip(arg.iter()).map(|(x, y)| x * y).sum()).collect();
    }
    v
}

fn check_dims(a: &StochTensor, vs: &[&ProbVector]) -> Result<()> {
    if let Some(v) = vs.iter().find(|v| v.dim() != a.dim) {
        return Err(Error::Dimension(format!(
            "vector of dimension {} against tensor dimension {}",
            v.dim(),
            a.dim
        )));
    }
    Ok(())
}

/// Binary convolution `(p * q)[i] = sum_jk A[i, j, k] p[j] q[k]`.
pub fn convolve(a: &StochTensor, p: &ProbVector, q: &ProbVector) -> Result<ProbVector> {
    a.require_order(3)?;
    apply_m(a, &[p.clone(), q.clone()])
}

/// The `(m-1)`-ary operation of an order-`m` stochastic tensor.
pub fn apply_m(a: &StochTensor, args: &[ProbVector]) -> Result<ProbVector> {
    if args.len() + 1 != a.order {
        return Err(Error::Dimension(format!(
            "order {} tensor takes {} arguments, got {}",
            a.order,
            a.order - 1,
            args.len()
        )));
    }
    check_dims(a, &args.iter().collect::<Vec<_>>())?;
    a.require_stochastic()?;
    let raw: Vec<&[f64]> = args.iter().map(|p| p.entries()).collect();
    Ok(ProbVector::from_raw(contract(a, &raw)))
}

/// `A[i, j, k] = A[i, k, j]` for all indices.
pub fn is_commutative(a: &StochTensor) -> Result<bool> {
    a.require_order(3)?;
    let n = a.dim;
    let t = tol();
    Ok((0..n)
        .cartesian_product(0..n)
        .cartesian_product(0..n)
        .all(|((i, j), k)| (a.get(&[i, j, k]) - a.get(&[i, k, j])).abs() <= t))
}

/// Worst violation of `sum_i A[a,i,l] A[i,j,k] = sum_i A[a,j,i] A[i,k,l]`,
/// the index form of `(p * q) * r = p * (q * r)`.
pub fn associativity_defect(a: &StochTensor) -> Result<f64> {
    a.require_order(3)?;
    let n = a.dim;
    let mut worst: f64 = 0.0;
    for (o, j, k, l) in itertools::iproduct!(0..n, 0..n, 0..n, 0..n) {
        let lhs: f64 = (0..n).map(|i| a.get(&[o, i, l]) * a.get(&[i, j, k])).sum();
        let rhs: f64 = (0..n).map(|i| a.get(&[o, j, i]) * a.get(&[i, k, l])).sum();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

pub fn is_associative(a: &StochTensor) -> Result<bool> {
    Ok(associativity_defect(a)? <= tol())
}

/// Largest `|(p*q)*r - p*(q*r)|` over random simplex triples.
pub fn associativity_defect_sampled<R: Rng + ?Sized>(
    a: &StochTensor,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    a.require_order(3)?;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let p = crate::sample::random_simplex(a.dim, rng);
        let q = crate::sample::random_simplex(a.dim, rng);
        let r = crate::sample::random_simplex(a.dim, rng);
        let left = convolve(a, &convolve(a, &p, &q)?, &r)?;
        let right = convolve(a, &p, &convolve(a, &q, &r)?)?;
        worst = worst.max(left.l1_distance(&right));
    }
    Ok(worst)
}

fn permute(v: &[f64], sigma: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (j, &s) in sigma.iter().enumerate() {
        out[s] = v[j];
    }
    out
}

fn invert(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (j, &s) in sigma.iter().enumerate() {
        inv[s] = j;
    }
    inv
}

/// Permutation-averaged product
/// `(p *_r q) = 1/(N-1)! sum_sigma (p . P_sigma r) P_sigma^{-1} q`,
/// with `P_sigma e_j = e_{sigma(j)}`. Limited to `N <= 7`.
pub fn perm_average_convolve(r: &ProbVector, p: &ProbVector, q: &ProbVector) -> Result<ProbVector> {
    let n = r.dim();
    if p.dim() != n || q.dim() != n {
        return Err(Error::Dimension("vectors must share a dimension".into()));
    }
    if n > MAX_PERM_AVERAGE_DIM {
        return Err(Error::TooLarge(format!(
            "permutation average over {n}! terms (limit N <= {MAX_PERM_AVERAGE_DIM})"
        )));
    }
    let mut out = vec![0.0; n];
    let mut count = 0usize;
    for sigma in (0..n).permutations(n) {
        let pr = permute(r.entries(), &sigma);
        let weight: f64 = p.entries().iter().zip(&pr).map(|(a, b)| a * b).sum();
        let back = permute(q.entries(), &invert(&sigma));
        for (o, b) in out.iter_mut().zip(back) {
            *o += weight * b;
        }
        count += 1;
    }
    let norm = (count / n) as f64;
    Ok(ProbVector::from_raw(out.into_iter().map(|v| v / norm).collect()))
}

/// The tristochastic tensor `A[i, j, k] = (e_j *_r e_k)[i]`.
pub fn perm_average_tensor(r: &ProbVector) -> Result<StochTensor> {
    let n = r.dim();
    let mut entries = vec![0.0; n * n * n];
    for (j, k) in (0..n).cartesian_product(0..n) {
        let v = perm_average_convolve(r, &ProbVector::delta(n, j), &ProbVector::delta(n, k))?;
        for (i, &x) in v.entries().iter().enumerate() {
            entries[(i * n + j) * n + k] = x;
        }
    }
    StochTensor::new(3, n, entries)
}

/// `I` is reducing when `A[i1, ..., im] = 0` whenever `i1` lies in `I` and
/// every other index lies outside it: inputs supported off `I` never leak
/// weight into `I`.
pub fn is_reducing_set(a: &StochTensor, set: &[usize]) -> bool {
    let n = a.dim;
    let inside: Vec<bool> = (0..n).map(|i| set.contains(&i)).collect();
    let outside: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();
    if set.is_empty() || outside.is_empty() {
        return false;
    }
    let t = tol();
    let mut idx = vec![0usize; a.order];
    set.iter().all(|&i1| {
        idx[0] = i1;
        std::iter::repeat_n(outside.iter(), a.order - 1)
            .multi_cartesian_product()
            .all(|rest| {
                for (slot, &v) in idx[1..].iter_mut().zip(rest) {
                    *slot = v;
                }
                a.get(&idx).abs() <= t
            })
    })
}

/// Options for [`find_reducing_sets_with`].
#[derive(Debug, Clone, Copy)]
pub struct ReducingSearch {
    /// Skip candidate sets smaller than `N/2`, which cannot be reducing for
    /// an m-stochastic tensor of order at least 3.
    pub prune_small: bool,
}

/// Every reducing set of an m-stochastic tensor, as sorted 0-based index
/// lists in lexicographic order.
pub fn find_reducing_sets(a: &StochTensor) -> Result<Vec<Vec<usize>>> {
    find_reducing_sets_with(a, ReducingSearch { prune_small: true })
}

pub fn find_reducing_sets_with(a: &StochTensor, opts: ReducingSearch) -> Result<Vec<Vec<usize>>> {
    let n = a.dim;
    if n > MAX_REDUCING_SEARCH_DIM {
        return Err(Error::TooLarge(format!(
            "subset search over 2^{n} sets (limit N <= {MAX_REDUCING_SEARCH_DIM})"
        )));
    }
    a.require_m_stochastic()?;
    let min_size = if opts.prune_small && a.order >= 3 { n.div_ceil(2) } else { 1 };
    let mut found = Vec::new();
    for k in min_size.max(1)..n {
        for set in (0..n).combinations(k) {
            if is_reducing_set(a, &set) {
                found.push(set);
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Restriction of an m-stochastic tensor to the complement of a reducing
/// set. The empty set returns the tensor unchanged.
pub fn truncate(a: &StochTensor, set: &[usize]) -> Result<StochTensor> {
    a.require_m_stochastic()?;
    if set.is_empty() {
        return Ok(a.clone());
    }
    if set.iter().any(|&i| i >= a.dim) {
        return Err(Error::Dimension(format!("index set {set:?} out of range")));
    }
    let keep: Vec<usize> = (0..a.dim).filter(|i| !set.contains(i)).collect();
    if keep.is_empty() {
        return Err(Error::Validation("cannot truncate every symbol".into()));
    }
    let sub = StochTensor::from_fn(a.order, keep.len(), |ix| {
        let full: Vec<usize> = ix.iter().map(|&i| keep[i]).collect();
        a.get(&full)
    })?;
    for k in 0..sub.order {
        let dev = sub.axis_deviation(k);
        if dev > tol() {
            return Err(Error::Validation(format!(
                "set {set:?} is not reducing: truncated marginal along axis {} deviates by {dev:e}",
                k + 1
            )));
        }
    }
    Ok(sub)
}

/// Vector uniform off `set` and zero on it.
pub fn uniform_off(n: usize, set: &[usize]) -> ProbVector {
    let k = n - set.len();
    ProbVector::from_raw((0..n).map(|i| if set.contains(&i) { 0.0 } else { 1.0 / k as f64 }).collect())
}

/// All probability eigenvectors `A[p, ..., p] = p` of an m-stochastic tensor
/// of order at least 3: the uniform vector first, then one vector per
/// reducing set.
pub fn probability_eigenvectors(a: &StochTensor) -> Result<Vec<ProbVector>> {
    if a.order < 3 {
        return Err(Error::Unsupported("eigenvector enumeration needs order >= 3".into()));
    }
    let sets = find_reducing_sets(a)?;
    let mut out = vec![ProbVector::uniform(a.dim)];
    out.extend(sets.iter().map(|s| uniform_off(a.dim, s)));
    let t = tol();
    for p in &out {
        let res = eigen_residual(a, p)?;
        if res > t {
            return Err(Error::Validation(format!("eigenvector residual {res:e}")));
        }
    }
    Ok(out)
}

/// `|A[p, ..., p] - p|_1`.
pub fn eigen_residual(a: &StochTensor, p: &ProbVector) -> Result<f64> {
    let args = vec![p.clone(); a.order - 1];
    Ok(apply_m(a, &args)?.l1_distance(p))
}

/// Trajectory of `q <- A[q, ..., q]`.
#[derive(Debug, Clone)]
pub struct FixedPointRun {
    pub point: ProbVector,
    pub iterations: usize,
    pub converged: bool,
    /// `|q^(n) - e|^2` for `n = 0, 1, ...` where `e` is uniform.
    pub distance_to_uniform: Vec<f64>,
}

pub fn fixed_point_iterate(
    a: &StochTensor,
    q0: &ProbVector,
    max_iter: usize,
    tol: f64,
) -> Result<FixedPointRun> {
    check_dims(a, &[q0])?;
    let e = ProbVector::uniform(a.dim);
    let mut q = q0.clone();
    let mut dist = vec![q.dist_sq(&e)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let next = apply_m(a, &vec![q.clone(); a.order - 1])?;
        iterations += 1;
        let step = next.l1_distance(&q);
        q = next;
        dist.push(q.dist_sq(&e));
        if step <= tol {
            converged = true;
            break;
        }
    }
    Ok(FixedPointRun { point: q, iterations, converged, distance_to_uniform: dist })
}

/// Writes an interior point as `q = alpha e + (1 - alpha) p` with `p` on
/// the boundary of the simplex; `alpha = N min_i q_i`.
pub fn boundary_decomposition(q: &ProbVector) -> (f64, ProbVector) {
    let n = q.dim() as f64;
    let min = q.entries().iter().copied().fold(f64::INFINITY, f64::min);
    let alpha = n * min;
    if (1.0 - alpha).abs() < 1e-15 {
        return (1.0, ProbVector::uniform(q.dim()));
    }
    let p = q.entries().iter().map(|&x| (x - min) / (1.0 - alpha)).collect();
    (alpha, ProbVector::from_raw(p))
}

/// For `n = 0..steps`, the pair `(|q^(n) - e|^2, (1-alpha)^(2 (m-1)^n) (|p^(n)|^2 - 1/N))`
/// where `p^(n)` iterates the boundary part of `q0`. The two columns agree
/// for every m-stochastic tensor.
pub fn convergence_law(a: &StochTensor, q0: &ProbVector, steps: usize) -> Result<Vec<(f64, f64)>> {
    a.require_m_stochastic()?;
    let (alpha, p0) = boundary_decomposition(q0);
    let e = ProbVector::uniform(a.dim);
    let m1 = (a.order - 1) as f64;
    let (mut q, mut p) = (q0.clone(), p0);
    let mut out = Vec::with_capacity(steps + 1);
    for n in 0..=steps {
        let factor = (1.0 - alpha).powf(2.0 * m1.powi(n as i32));
        out.push((q.dist_sq(&e), factor * (p.norm_sq() - 1.0 / a.dim as f64)));
        q = apply_m(a, &vec![q.clone(); a.order - 1])?;
        p = apply_m(a, &vec![p.clone(); a.order - 1])?;
    }
    Ok(out)
}

/// Indices `k` with `A[i, j, k] = A[i, k, j] = delta_ij`.
pub fn identity_candidates(a: &StochTensor) -> Result<Vec<usize>> {
    a.require_order(3)?;
    let n = a.dim;
    let t = tol();
    Ok((0..n)
        .filter(|&k| {
            (0..n).cartesian_product(0..n).all(|(i, j)| {
                let d = if i == j { 1.0 } else { 0.0 };
                (a.get(&[i, j, k]) - d).abs() <= t && (a.get(&[i, k, j]) - d).abs() <= t
            })
        })
        .collect())
}

/// The identity vertex `e_k` of a tristochastic convolution, if any. An
/// identity is unique when it exists.
pub fn find_identity(a: &StochTensor) -> Result<Option<usize>> {
    let c = identity_candidates(a)?;
    debug_assert!(c.len() <= 1, "two identities {c:?}");
    Ok(c.first().copied())
}

/// Inverse of a vertex `p = e_m`: the vertex `e_n` with
/// `A[k, m, n] = A[k, n, m] = 1` where `e_k` is the identity.
pub fn find_inverse(a: &StochTensor, p: &ProbVector) -> Result<Option<ProbVector>> {
    check_dims(a, &[p])?;
    let k = find_identity(a)?
        .ok_or_else(|| Error::NoIdentity("tensor has no identity element".into()))?;
    let t = tol();
    let Some(m) = p.as_vertex(t) else {
        return Ok(None);
    };
    Ok((0..a.dim)
        .find(|&n| (a.get(&[k, m, n]) - 1.0).abs() <= t && (a.get(&[k, n, m]) - 1.0).abs() <= t)
        .map(|n| ProbVector::delta(a.dim, n)))
}
