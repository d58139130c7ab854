use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tristoch::classical::{convolve, find_reducing_sets, uniform_off, ProbVector, StochTensor};
use tristoch::coherify::{
    c2_coherence, coherence_report, coherified_channel, coherify_diagonal, entropic_coherence, random_blocks,
};
use tristoch::io::{density_from_json, density_to_json, dynamical_from_json, dynamical_to_json};
use tristoch::numkit::{
    herm_eig, is_unitary, kron, max_abs_diff, partial_trace, random_density, trace, CMatrix, SubsystemShape,
};
use tristoch::qchannel::{
    apply_m_channel, channel_convergence_law, choi_to_kraus, is_channel, kraus_to_choi, kraus_to_unitary,
    quantum_convolve, DensityMatrix,
};
use tristoch::sample::{locally_rotated, random_channel, random_mstochastic, random_simplex, rng_from_seed};

fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn density(rng: &mut ChaCha8Rng, n: usize) -> DensityMatrix {
    DensityMatrix::new(random_density(n, rng)).unwrap()
}

fn diag_density(p: &ProbVector) -> DensityMatrix {
    let n = p.dim();
    DensityMatrix::new(CMatrix::from_fn(n, n, |r, c| {
        Complex64::new(if r == c { p.entries()[r] } else { 0.0 }, 0.0)
    }))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn full_partial_trace_is_the_trace(seed in any::<u64>(), dims in prop::collection::vec(1usize..4, 1..4)) {
        let mut rng = rng_from_seed(seed);
        let shape = SubsystemShape::new(dims).unwrap();
        let m = random_matrix(shape.total(), shape.total(), &mut rng);
        let t = partial_trace(&m, &shape, &[]).unwrap();
        prop_assert!((t[(0, 0)] - trace(&m)).norm() < 1e-12);
        let all: Vec<usize> = (0..shape.dims().len()).collect();
        prop_assert!(max_abs_diff(&partial_trace(&m, &shape, &all).unwrap(), &m) == 0.0);
    }

    #[test]
    fn partial_trace_of_product_is_the_kept_factor(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let x = random_matrix(a, a, &mut rng);
        let y = random_matrix(b, b, &mut rng);
        let shape = SubsystemShape::new(vec![a, b]).unwrap();
        let k = kron(&x, &y);
        let left = partial_trace(&k, &shape, &[0]).unwrap();
        prop_assert!(max_abs_diff(&left, &x.map(|z| z * trace(&y))) < 1e-12);
        let right = partial_trace(&k, &shape, &[1]).unwrap();
        prop_assert!(max_abs_diff(&right, &y.map(|z| z * trace(&x))) < 1e-12);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>(), d in prop::collection::vec(1usize..4, 6)) {
        let mut rng = rng_from_seed(seed);
        let a = random_matrix(d[0], d[1], &mut rng);
        let b = random_matrix(d[2], d[3], &mut rng);
        let c = random_matrix(d[4], d[5], &mut rng);
        prop_assert!(max_abs_diff(&kron(&kron(&a, &b), &c), &kron(&a, &kron(&b, &c))) <= 1e-13);
    }

    #[test]
    fn hermitian_eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..65) {
        let mut rng = rng_from_seed(seed);
        let g = random_matrix(n, n, &mut rng);
        let h = &g + g.adjoint();
        let (vals, vecs) = herm_eig(&h).unwrap();
        prop_assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let lambda = CMatrix::from_fn(n, n, |r, c| if r == c { Complex64::new(vals[r], 0.0) } else { Complex64::new(0.0, 0.0) });
        prop_assert!(max_abs_diff(&(&vecs * lambda * vecs.adjoint()), &h) <= 1e-10);
    }

    #[test]
    fn convolution_output_is_a_state(seed in any::<u64>(), n in 2usize..4, rank in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let d = random_channel(3, n, rank.max(n), &mut rng);
        let out = quantum_convolve(&d, &density(&mut rng, n), &density(&mut rng, n)).unwrap();
        let (vals, _) = herm_eig(out.matrix()).unwrap();
        prop_assert!(*vals.last().unwrap() >= -1e-9);
        prop_assert!((trace(out.matrix()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_lift_reproduces_classical_convolution(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let a = random_mstochastic(3, n, 3, &mut rng);
        let d = coherify_diagonal(&a);
        let p = random_simplex(n, &mut rng);
        let q = random_simplex(n, &mut rng);
        let out = quantum_convolve(&d, &diag_density(&p), &diag_density(&q)).unwrap();
        let r = convolve(&a, &p, &q).unwrap();
        for (x, y) in out.diagonal().iter().zip(r.entries()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn choi_kraus_round_trip(seed in any::<u64>(), n in 2usize..5, rank in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let parts = if n == 4 { 2 } else { 3 };
        let din = n.pow(parts as u32 - 1);
        let rank = rank.max(din.div_ceil(n));
        let d = random_channel(parts, n, rank, &mut rng);
        let k = choi_to_kraus(&d).unwrap();
        prop_assert!(k.completeness_defect() < 1e-9);
        prop_assert!(max_abs_diff(kraus_to_choi(&k).unwrap().matrix(), d.matrix()) <= 1e-9);
    }

    #[test]
    fn maximally_mixed_input_is_absorbing(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = rng_from_seed(seed);
        let base = coherify_diagonal(&random_mstochastic(3, n, 3, &mut rng));
        let d = locally_rotated(&base, &mut rng);
        let star = DensityMatrix::maximally_mixed(n);
        let rho = density(&mut rng, n);
        for args in [[star.clone(), rho.clone()], [rho.clone(), star.clone()]] {
            prop_assert!(apply_m_channel(&d, &args).unwrap().distance(&star) <= 1e-10);
        }
    }

    #[test]
    fn unitary_dilation_reproduces_channel(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = rng_from_seed(seed);
        let d = random_channel(3, n, n, &mut rng);
        let k = choi_to_kraus(&d).unwrap();
        let u = kraus_to_unitary(&k).unwrap();
        prop_assert!(is_unitary(&u, 1e-10));
        let shape = SubsystemShape::new(vec![n, k.ops().len()]).unwrap();
        for _ in 0..50 {
            let rho = density(&mut rng, n);
            let sigma = density(&mut rng, n);
            let big = &u * kron(rho.matrix(), sigma.matrix()) * u.adjoint();
            let out = partial_trace(&big, &shape, &[0]).unwrap();
            prop_assert!(max_abs_diff(&out, quantum_convolve(&d, &rho, &sigma).unwrap().matrix()) <= 1e-10);
        }
    }

    #[test]
    fn decay_follows_double_exponential_envelope(seed in any::<u64>(), n in 2usize..4, parts in 3usize..5) {
        let mut rng = rng_from_seed(seed);
        let base = coherify_diagonal(&random_mstochastic(parts, n, 3, &mut rng));
        let d = locally_rotated(&base, &mut rng);
        let sigma0 = density(&mut rng, n);
        for (lhs, rhs) in channel_convergence_law(&d, &sigma0, 6).unwrap() {
            if lhs < 1e-12 && rhs < 1e-12 {
                break;
            }
            prop_assert!((lhs - rhs).abs() <= 1e-8, "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn coherification_diagonal_is_the_tensor(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = rng_from_seed(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let c = StochTensor::cyclic(n);
        let a = StochTensor::from_fn(3, n, |ix| c.get(&[perm[ix[0]], ix[1], ix[2]])).unwrap();
        let d = coherified_channel(&a, &random_blocks(n, &mut rng)).unwrap();
        prop_assert!(is_channel(&d));
        for (z, v) in d.matrix().diagonal().iter().zip(a.entries()) {
            prop_assert!((z.re - v).abs() <= 1e-12 && z.im.abs() <= 1e-12);
        }
        let nf = n as f64;
        prop_assert!((c2_coherence(&d) - (nf - 1.0) / (nf * nf)).abs() <= 1e-10);
        let (vals, _) = herm_eig(&d.choi_state()).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let want = if k < n { 1.0 / nf } else { 0.0 };
            prop_assert!((v - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn coherified_fixed_points_follow_classical_structure(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6])) {
        let mut rng = rng_from_seed(seed);
        let a = StochTensor::cyclic(n);
        let d = coherified_channel(&a, &random_blocks(n, &mut rng)).unwrap();
        for set in find_reducing_sets(&a).unwrap() {
            let p = uniform_off(n, &set);
            let rho = diag_density(&p);
            let out = apply_m_channel(&d, &[rho.clone(), rho.clone()]).unwrap();
            prop_assert!(out.distance(&rho) <= 1e-9);
            for &i in &set {
                prop_assert!((0..n).all(|j| out.matrix()[(i, j)].norm() <= 1e-12));
            }
        }
    }

    #[test]
    fn coherence_measures_are_in_range(seed in any::<u64>(), n in 2usize..4, rank in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let d = random_channel(3, n, rank.max(n), &mut rng);
        prop_assert!(entropic_coherence(&d).unwrap() >= -1e-9);
        let r = coherence_report(&d).unwrap();
        let floor = 1.0 / (n as f64).powi(4);
        prop_assert!(r.c2 >= -1e-9);
        prop_assert!(r.purity >= floor - 1e-9 && r.purity <= 1.0 + 1e-9);
    }

    #[test]
    fn state_and_channel_json_round_trip(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = rng_from_seed(seed);
        let rho = density(&mut rng, n);
        let text = serde_json::to_string(&density_to_json(&rho)).unwrap();
        prop_assert_eq!(density_from_json(serde_json::from_str(&text).unwrap()).unwrap(), rho);
        let d = random_channel(3, n, n, &mut rng);
        let text = serde_json::to_string(&dynamical_to_json(&d)).unwrap();
        prop_assert_eq!(dynamical_from_json(serde_json::from_str(&text).unwrap()).unwrap(), d);
    }
}

#[test]
fn entropic_coherence_is_nonnegative_on_500_channels() {
    let mut rng = rng_from_seed(77);
    for t in 0..500 {
        let n = 2 + t % 2;
        let d = random_channel(3, n, n + t % 3, &mut rng);
        assert!(entropic_coherence(&d).unwrap() >= -1e-9);
    }
}
