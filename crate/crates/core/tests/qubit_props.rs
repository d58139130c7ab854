use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use tristoch::classical::StochTensor;
use tristoch::coherify::{coherify_permutation, coherify_qubit_tristochastic, reflection};
use tristoch::numkit::{
    basis_ket, is_unitary, max_abs_diff, outer, phase_distance, random_density, random_ket, CMatrix,
};
use tristoch::qchannel::{kraus_to_choi, quantum_convolve, DensityMatrix};
use tristoch::qubitconv::{
    bloch_vector, circuit_to_unitary, Gate, GateCircuit, convolve_states, decompose_u4, emit_qasm, emit_text, entangling_power,
    gate_typicality, identify_gates, local_phase_factors, mitigation_closed_form, mitigation_pipeline,
    operator_entanglement, qubit_blocks, qubit_kraus, swap, u4, ConvParams,
};
use tristoch::sample::rng_from_seed;

fn angles() -> impl Strategy<Value = (f64, f64, f64)> {
    (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
}

fn perm_matrix(images: [usize; 4]) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, c| if images[c] == r { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// `E(U) = 1 - Tr[(R R^dagger)^2] / 16` without any singular value routine.
fn operator_entanglement_by_trace(u: &CMatrix) -> f64 {
    let r = CMatrix::from_fn(4, 4, |row, col| u[((row / 2) * 2 + col / 2, (row % 2) * 2 + col % 2)]);
    let g = &r * r.adjoint();
    1.0 - (&g * &g).trace().re / 16.0
}

fn parse_text(text: &str) -> GateCircuit {
    let mut gates = Vec::new();
    let mut global_phase = 0.0;
    for line in text.lines() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let wires = |s: &str| -> (usize, usize) {
            let (a, b) = s.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        };
        match parts[0] {
            "H" => gates.push(Gate::H(parts[1].parse().unwrap())),
            "CNOT" => {
                let (control, target) = wires(parts[1]);
                gates.push(Gate::Cnot { control, target });
            }
            "PHASE" => gates.push(Gate::Phase { wire: parts[1].parse().unwrap(), angle: parts[2].parse().unwrap() }),
            "CPHASE" => {
                let (control, target) = wires(parts[1]);
                gates.push(Gate::CPhase { control, target, angle: parts[2].parse().unwrap() });
            }
            "CXPHASE" => {
                let (control, target) = wires(parts[1]);
                gates.push(Gate::CXPhase { control, target, angle: parts[2].parse().unwrap() });
            }
            "GPHASE" => global_phase = parts[1].parse().unwrap(),
            other => panic!("unknown gate {other}"),
        }
    }
    GateCircuit { gates, global_phase }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parameters_normalise_without_changing_the_gate((a, t, f) in angles()) {
        let p = ConvParams::new(a, t, f).unwrap();
        prop_assert!((0.0..TAU).contains(&p.alpha) && (0.0..TAU).contains(&p.phi));
        prop_assert!(p.theta >= -PI && p.theta < PI);
        let raw = u4(ConvParams { alpha: a, theta: t, phi: f });
        prop_assert!(max_abs_diff(&raw, &u4(p)) < 1e-12);
        prop_assert!(is_unitary(&raw, 1e-12));
    }

    #[test]
    fn circuit_reproduces_the_gate((a, t, f) in angles()) {
        let p = ConvParams::new(a, t, f).unwrap();
        let c = decompose_u4(p);
        prop_assert!(phase_distance(&circuit_to_unitary(&c), &u4(p)) <= 1e-10);
        prop_assert!(max_abs_diff(&circuit_to_unitary(&c), &u4(p)) <= 1e-10);
        prop_assert!(emit_qasm(&c).lines().count() >= c.gates.len());
        let parsed = parse_text(&emit_text(&c));
        prop_assert!(max_abs_diff(&circuit_to_unitary(&parsed), &u4(p)) <= 1e-10);
    }

    #[test]
    fn local_phases_relate_to_the_real_member((a, t, f) in angles()) {
        let p = ConvParams::new(a, t, f).unwrap();
        let (left, right) = local_phase_factors(p);
        let real = u4(ConvParams::new(0.0, p.theta, 0.0).unwrap());
        prop_assert!(max_abs_diff(&(left * real * right), &u4(p)) <= 1e-12);
    }

    #[test]
    fn dilation_matches_kraus_channel((a, t, f) in angles(), seed in any::<u64>()) {
        let p = ConvParams::new(a, t, f).unwrap();
        let mut rng = rng_from_seed(seed);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(2, &mut rng);
        let d = kraus_to_choi(&qubit_kraus(p)).unwrap();
        let via_d = quantum_convolve(&d, &DensityMatrix::new(rho.clone()).unwrap(), &DensityMatrix::new(sigma.clone()).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&convolve_states(p, &rho, &sigma).unwrap(), via_d.matrix()) <= 1e-12);
    }

    #[test]
    fn kraus_pair_is_the_coherified_two_symbol_tensor((a, t, f) in angles()) {
        let p = ConvParams::new(a, t, f).unwrap();
        let built = kraus_to_choi(&coherify_permutation(&StochTensor::t2(), &qubit_blocks(p)).unwrap()).unwrap();
        let direct = kraus_to_choi(&qubit_kraus(p)).unwrap();
        prop_assert!(max_abs_diff(built.matrix(), direct.matrix()) <= 1e-12);
    }

    #[test]
    fn entanglement_metrics((a, t, f) in angles()) {
        let p = ConvParams::new(a, t, f).unwrap();
        let u = u4(p);
        prop_assert!((entangling_power(&u).unwrap() - 2.0 / 3.0).abs() <= 1e-10);
        prop_assert!((operator_entanglement(&u).unwrap() - operator_entanglement_by_trace(&u)).abs() <= 1e-12);
        let s = swap(2);
        let es = operator_entanglement_by_trace(&s);
        let oracle = (operator_entanglement_by_trace(&u) - operator_entanglement_by_trace(&(&u * &s)) + es) / (2.0 * es);
        let gt = gate_typicality(&u).unwrap();
        prop_assert!((gt - oracle).abs() <= 1e-12);
        prop_assert!((gt - (3.0 + p.theta.cos()) / 6.0).abs() <= 1e-10);
    }

    #[test]
    fn mitigation_matches_closed_forms((a, t, f) in angles(), r in prop::array::uniform3(-1.5..1.5f64)) {
        let p = ConvParams::new(a, t, f).unwrap();
        for k in 0..2 {
            let sim = mitigation_pipeline(p, r, &basis_ket(2, k)).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&sim));
            prop_assert!((sim - mitigation_closed_form(p.theta, r, k).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn outputs_over_theta_lie_in_a_plane(seed in any::<u64>(), a in 0.0..TAU, f in 0.0..TAU) {
        let mut rng = rng_from_seed(seed);
        let rho = outer(&random_ket(2, &mut rng));
        let sigma = outer(&random_ket(2, &mut rng));
        let pts: Vec<[f64; 3]> = (0..24)
            .map(|k| {
                let p = ConvParams::new(a, -PI + TAU * k as f64 / 24.0, f).unwrap();
                bloch_vector(&convolve_states(p, &rho, &sigma).unwrap())
            })
            .collect();
        let spread = nalgebra::DMatrix::from_fn(3, pts.len() - 1, |r, c| pts[c + 1][r] - pts[0][r]);
        let sv = spread.singular_values();
        let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(smallest <= 1e-9, "{:?}", sv);
    }
}

#[test]
fn typicality_of_reference_gates() {
    let s = swap(2);
    assert!((gate_typicality(&s).unwrap() - 1.0).abs() < 1e-12);
    assert!(gate_typicality(&CMatrix::identity(4, 4)).unwrap().abs() < 1e-12);
    assert!(entangling_power(&s).unwrap().abs() < 1e-12);
}

/// Stated closed form for the typicality of the family. It disagrees with
/// the defining combination of operator entanglements by `cos(theta)/3`;
/// kept as an ignored test so the discrepancy stays visible.
#[test]
#[ignore = "known disagreement between the quoted closed form and the definition"]
fn typicality_quoted_closed_form() {
    for theta in [0.0, FRAC_PI_2, PI - 1e-9, -1.0] {
        let u = u4(ConvParams::new(0.0, theta, 0.0).unwrap());
        assert!((gate_typicality(&u).unwrap() - (3.0 - f64::cos(theta)) / 6.0).abs() < 1e-10, "theta = {theta}");
    }
}

#[test]
fn special_members_are_permutation_gates() {
    // |ab> -> |a xor b, a>
    let dcnot = perm_matrix([0b00, 0b10, 0b11, 0b01]);
    // |ab> -> |a xor b, b>
    let cnot_10 = perm_matrix([0b00, 0b11, 0b10, 0b01]);
    let u_a = u4(ConvParams::new(0.0, 0.0, PI).unwrap());
    let u_b = u4(ConvParams::new(0.0, PI, 0.0).unwrap());
    assert!(phase_distance(&u_a, &dcnot) < 1e-12);
    assert!(phase_distance(&u_b, &cnot_10) < 1e-12);
    let names: Vec<&str> = identify_gates([0.0, 0.0, PI]).iter().flat_map(|m| m.matches.clone()).collect();
    assert!(names.iter().any(|n| n.starts_with("DCNOT")));
    let at_half_pi: Vec<&str> = identify_gates([0.0, 0.0, FRAC_PI_2]).iter().flat_map(|m| m.matches.clone()).collect();
    assert!(at_half_pi.is_empty());
}

#[test]
fn qubit_family_block_choice_keeps_diagonal() {
    let mut rng = rng_from_seed(5);
    let x = 0.37;
    let a = StochTensor::qubit_family(x).unwrap();
    for u in [reflection(0.3), tristoch::numkit::random_unitary(2, &mut rng)] {
        let d = kraus_to_choi(&coherify_qubit_tristochastic(x, Some(&u)).unwrap()).unwrap();
        for (z, v) in d.matrix().diagonal().iter().zip(a.entries()) {
            assert!((z.re - v).abs() < 1e-14);
        }
    }
}
