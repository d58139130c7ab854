//! Seeded random generators for tensors, states and channels.

use itertools::Itertools;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::classical::{ProbVector, StochTensor};
use crate::numkit::{kron_all, random_unitary, CMatrix};
use crate::qchannel::DynamicalMatrix;

/// Seed used when none is given on the command line.
pub const DEFAULT_SEED: u64 = 0x7215_70c4;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Uniform point of the simplex (flat Dirichlet).
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProbVector {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    ProbVector::new(w.into_iter().map(|x| x / s).collect()).expect("normalised weights")
}

/// Random point on a face of the simplex: a random nonempty support, then
/// uniform weights within it.
pub fn random_face_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ProbVector {
    let k = rng.random_range(1..=n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let inner = random_simplex(k, rng);
    let mut v = vec![0.0; n];
    for (slot, &w) in idx[..k].iter().zip(inner.entries()) {
        v[*slot] = w;
    }
    ProbVector::new(v).expect("face point")
}

fn random_perm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Random permutation tensor (Latin hypercube):
/// `A[i1, ...] = 1` iff `pi(i1) = sum_r tau_r(i_r) mod N`.
pub fn random_permutation_tensor<R: Rng + ?Sized>(order: usize, n: usize, rng: &mut R) -> StochTensor {
    let perms: Vec<Vec<usize>> = (0..order).map(|_| random_perm(n, rng)).collect();
    StochTensor::from_fn(order, n, |ix| {
        let s: usize = ix[1..].iter().zip(&perms[1..]).map(|(&i, p)| p[i]).sum();
        f64::from(u8::from(perms[0][ix[0]] == s % n))
    })
    .expect("permutation tensor")
}

/// Convex mixture of `components` random permutation tensors with flat
/// Dirichlet weights; m-stochastic by construction.
pub fn random_mstochastic<R: Rng + ?Sized>(
    order: usize,
    n: usize,
    components: usize,
    rng: &mut R,
) -> StochTensor {
    let w = random_simplex(components.max(1), rng);
    let mut entries = vec![0.0; n.pow(order as u32)];
    for &wk in w.entries() {
        let p = random_permutation_tensor(order, n, rng);
        for (e, v) in entries.iter_mut().zip(p.entries()) {
            *e += wk * v;
        }
    }
    StochTensor::new(order, n, entries).expect("mixture")
}

/// Mixture of `2 N^(m-1)` permutation tensors. Few-component mixtures at
/// small `N` often repeat one permutation tensor (there are only two
/// distinct ones at `N = 2`); this many components makes such coincidences
/// rare, so the draw behaves like a generic point of the polytope.
pub fn random_generic_mstochastic<R: Rng + ?Sized>(order: usize, n: usize, rng: &mut R) -> StochTensor {
    random_mstochastic(order, n, 2 * n.pow(order as u32 - 1), rng)
}

/// A random m-stochastic tensor with a planted reducing set.
#[derive(Debug, Clone)]
pub struct PlantedReducible {
    pub tensor: StochTensor,
    /// Planted reducing set (sorted, 0-based).
    pub set: Vec<usize>,
}

/// Group tensor of `Z_a x Z_b` with the subgroup `H` kept closed, scrambled by
/// per-axis permutations that fix `H` setwise, relabelled by one global
/// permutation and mixed over several such scramblings. The complement of
/// the image of `H` is reducing.
pub fn random_reducible<R: Rng + ?Sized>(order: usize, max_dim: usize, rng: &mut R) -> PlantedReducible {
    let shapes: Vec<(usize, usize)> = (2..=max_dim)
        .flat_map(|n| (1..=n).filter(move |a| n % a == 0).map(move |a| (a, n / a)))
        .collect();
    let &(ga, gb) = shapes.choose(rng).expect("nonempty");
    let n = ga * gb;
    let elem = |x: usize| (x / gb, x % gb);
    let pack = |(p, q): (usize, usize)| p * gb + q;
    // subgroup choices: trivial, Z_a x {0}, {0} x Z_b
    let h: Vec<usize> = match rng.random_range(0..3) {
        0 => vec![0],
        1 => (0..ga).map(|p| pack((p, 0))).collect(),
        _ => (0..gb).map(|q| pack((0, q))).collect(),
    };
    let h = if h.len() == n { vec![0] } else { h };
    let outside: Vec<usize> = (0..n).filter(|x| !h.contains(x)).collect();
    let keep_h_perm = |rng: &mut R| {
        let (mut ph, mut po) = (h.clone(), outside.clone());
        ph.shuffle(rng);
        po.shuffle(rng);
        let mut sigma = vec![0; n];
        for (src, dst) in h.iter().zip(&ph).chain(outside.iter().zip(&po)) {
            sigma[*src] = *dst;
        }
        sigma
    };
    let global = random_perm(n, rng);
    let components = rng.random_range(1..=3);
    let weights = random_simplex(components, rng);
    let mut entries = vec![0.0; n.pow(order as u32)];
    for &w in weights.entries() {
        let axes: Vec<Vec<usize>> = (0..order).map(|_| keep_h_perm(rng)).collect();
        let t = StochTensor::from_fn(order, n, |ix| {
            let mut sum = (0, 0);
            for (&i, s) in ix[1..].iter().zip(&axes[1..]) {
                let (p, q) = elem(s[i]);
                sum = ((sum.0 + p) % ga, (sum.1 + q) % gb);
            }
            f64::from(u8::from(axes[0][ix[0]] == pack(sum)))
        })
        .expect("group tensor");
        let relabelled = StochTensor::from_fn(order, n, |ix| {
            let src: Vec<usize> = ix.iter().map(|&i| global[i]).collect();
            t.get(&src)
        })
        .expect("relabelled");
        for (e, v) in entries.iter_mut().zip(relabelled.entries()) {
            *e += w * v;
        }
    }
    let inv: Vec<usize> = (0..n).map(|x| global.iter().position(|&g| g == x).unwrap()).collect();
    let set = outside.iter().map(|&x| inv[x]).sorted().collect();
    PlantedReducible { tensor: StochTensor::new(order, n, entries).expect("mixture"), set }
}

/// Random channel with `n^(m-1)`-dimensional input and `n`-dimensional
/// output, from `rank` random Kraus operators orthonormalised through a
/// random isometry.
pub fn random_channel<R: Rng + ?Sized>(parts: usize, n: usize, rank: usize, rng: &mut R) -> DynamicalMatrix {
    let din = n.pow((parts - 1) as u32);
    let big = random_unitary(n * rank, rng);
    let kraus: Vec<CMatrix> = (0..rank)
        .map(|i| CMatrix::from_fn(n, din, |a, c| big[(a * rank + i, c)]))
        .collect();
    let total = n * rank;
    assert!(total >= din, "rank too small for an isometry");
    crate::qchannel::kraus_to_choi(&crate::qchannel::KrausSet::new(parts, n, kraus).expect("kraus"))
        .expect("choi")
}

/// Local-unitary conjugation `(U_1 x ... x U_m) D (U_1 x ... x U_m)^dagger` of an
/// m-stochastic dynamical matrix; the result stays m-stochastic.
pub fn locally_rotated<R: Rng + ?Sized>(d: &DynamicalMatrix, rng: &mut R) -> DynamicalMatrix {
    let us: Vec<CMatrix> = (0..d.parts()).map(|_| random_unitary(d.local_dim(), rng)).collect();
    let u = kron_all(&us);
    let m = &u * d.matrix() * u.adjoint();
    DynamicalMatrix::new(d.parts(), d.local_dim(), m).expect("rotated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{is_reducing_set, validate, Classification};

    #[test]
    fn permutation_tensors_are_latin_hypercubes() {
        let mut rng = rng_from_seed(1);
        for order in 2..=4 {
            let t = random_permutation_tensor(order, 4, &mut rng);
            let r = validate(&t);
            assert!(r.permutation, "order {order}");
        }
    }

    #[test]
    fn mixtures_are_m_stochastic() {
        let mut rng = rng_from_seed(2);
        let t = random_mstochastic(3, 5, 4, &mut rng);
        assert_eq!(validate(&t).class, Classification::MStochastic);
    }

    #[test]
    fn planted_sets_are_reducing() {
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            let p = random_reducible(3, 8, &mut rng);
            assert!(p.tensor.is_m_stochastic(1e-12));
            assert!(is_reducing_set(&p.tensor, &p.set), "{:?}", p.set);
        }
    }

    #[test]
    fn face_points_are_valid() {
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let p = random_face_point(5, &mut rng);
            assert!((p.entries().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
