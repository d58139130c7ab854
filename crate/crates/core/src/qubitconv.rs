//! Two-qubit convolution unitaries `U4(alpha, theta, phi)`, their circuits,
//! entangling metrics and the correlated-noise mitigation scheme.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::coherify::{BlockBasisFamily, BlockScheme};
use crate::error::{Error, Result};
use crate::numkit::{self, kron, partial_trace, phase_distance, CMatrix, SubsystemShape, C0, C1};
use crate::qchannel::{fidelity_with_pure, KrausSet};
use crate::sample::rng_from_seed;

/// Angles of the qubit convolution family. `theta` is reduced into
/// `[-pi, pi]` and `alpha`, `phi` into `[0, 2 pi)`; a shift of `theta` by
/// `2 pi` is absorbed into `alpha + pi`, so the matrix is unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvParams {
    pub alpha: f64,
    pub theta: f64,
    pub phi: f64,
}

impl ConvParams {
    pub fn new(alpha: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(alpha.is_finite() && theta.is_finite() && phi.is_finite()) {
            return Err(Error::Validation("angles must be finite".into()));
        }
        let turns = ((theta + PI) / TAU).floor();
        let theta = theta - turns * TAU;
        let alpha = (alpha + turns * PI).rem_euclid(TAU);
        Ok(ConvParams { alpha, theta, phi: phi.rem_euclid(TAU) })
    }
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Rows `|00>, |01>` fixed to `|00>`, `|11>`; the odd-parity pair mixed by
/// a phased `theta/2` rotation.
pub fn u4(p: ConvParams) -> CMatrix {
    let (s, c) = (p.theta / 2.0).sin_cos();
    let ea = cis(p.alpha);
    let eap = cis(p.alpha + p.phi);
    CMatrix::from_row_slice(
        4,
        4,
        &[
            C1, C0, C0, C0, //
            C0, C0, C0, C1, //
            C0, ea * c, ea * s, C0, //
            C0, eap * s, -eap * c, C0,
        ],
    )
}

/// `U4 = K_1 x |1> + K_2 x |2>`.
pub fn qubit_kraus(p: ConvParams) -> KrausSet {
    let u = u4(p);
    let ops = (0..2).map(|i| CMatrix::from_fn(2, 4, |a, c| u[(2 * a + i, c)])).collect();
    KrausSet::new(3, 2, ops).expect("valid shapes")
}

/// Block family `{I, B}` whose permutation coherification of the
/// two-symbol tensor is `qubit_kraus(p)`.
pub fn qubit_blocks(p: ConvParams) -> BlockBasisFamily {
    let u = u4(p);
    let b = CMatrix::from_fn(2, 2, |i, n| u[(2 + i, 1 + n)]);
    BlockBasisFamily::new(2, BlockScheme::Custom, vec![CMatrix::identity(2, 2), b]).expect("unitary blocks")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Gate {
    H(usize),
    Cnot { control: usize, target: usize },
    /// `|0><0| + e^{ia}|1><1|`.
    Phase { wire: usize, angle: f64 },
    /// Controlled `Phase(angle)`.
    CPhase { control: usize, target: usize, angle: f64 },
    /// Controlled `|+><+| + e^{ia}|-><-|`.
    CXPhase { control: usize, target: usize, angle: f64 },
}

/// Two-wire circuit; wire 0 is the most significant qubit. Gates are in
/// time order and the circuit equals its target up to `global_phase`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateCircuit {
    pub gates: Vec<Gate>,
    pub global_phase: f64,
}

fn phase_gate(a: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C1, C0, C0, cis(a)])
}

fn hadamard() -> CMatrix {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

fn x_phase(a: f64) -> CMatrix {
    let h = hadamard();
    &h * phase_gate(a) * &h
}

fn on_wire(g: &CMatrix, wire: usize) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    if wire == 0 {
        kron(g, &id)
    } else {
        kron(&id, g)
    }
}

fn controlled(g: &CMatrix, control: usize) -> CMatrix {
    let p0 = numkit::projector(2, 0);
    let p1 = numkit::projector(2, 1);
    let id = CMatrix::identity(2, 2);
    if control == 0 {
        kron(&p0, &id) + kron(&p1, g)
    } else {
        kron(&id, &p0) + kron(g, &p1)
    }
}

fn not_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0])
}

impl Gate {
    pub fn matrix(&self) -> CMatrix {
        match *self {
            Gate::H(w) => on_wire(&hadamard(), w),
            Gate::Cnot { control, .. } => controlled(&not_gate(), control),
            Gate::Phase { wire, angle } => on_wire(&phase_gate(angle), wire),
            Gate::CPhase { control, angle, .. } => controlled(&phase_gate(angle), control),
            Gate::CXPhase { control, angle, .. } => controlled(&x_phase(angle), control),
        }
    }
}

/// Ordered product of the gates, times the global phase.
pub fn circuit_to_unitary(c: &GateCircuit) -> CMatrix {
    let u = c.gates.iter().fold(CMatrix::identity(4, 4), |acc, g| g.matrix() * acc);
    u.map(|z| z * cis(c.global_phase))
}

/// `H H . CNOT . H H . CNOT` followed by `Phase(alpha - theta/2)` on wire 0
/// and the controlled phases `pi/2`, X-phase `theta`, `phi + pi/2`.
pub fn decompose_u4(p: ConvParams) -> GateCircuit {
    let cn = Gate::Cnot { control: 0, target: 1 };
    let gates = vec![
        Gate::H(0),
        Gate::H(1),
        cn,
        Gate::H(0),
        Gate::H(1),
        cn,
        Gate::Phase { wire: 0, angle: p.alpha - p.theta / 2.0 },
        Gate::CPhase { control: 0, target: 1, angle: FRAC_PI_2 },
        Gate::CXPhase { control: 0, target: 1, angle: p.theta },
        Gate::CPhase { control: 0, target: 1, angle: p.phi + FRAC_PI_2 },
    ];
    let bare = circuit_to_unitary(&GateCircuit { gates: gates.clone(), global_phase: 0.0 });
    let target = u4(p);
    let overlap: Complex64 = bare.iter().zip(target.iter()).map(|(b, t)| b.conj() * t).sum();
    GateCircuit { gates, global_phase: overlap.arg() }
}

/// Local diagonal phases relating the family to its real member:
/// `U4(a, t, f) = (P(a + f/2) x P(f)) U4(0, t, 0) (P(-f/2) x P(-f/2))`.
pub fn local_phase_factors(p: ConvParams) -> (CMatrix, CMatrix) {
    let left = kron(&phase_gate(p.alpha + p.phi / 2.0), &phase_gate(p.phi));
    let right = kron(&phase_gate(-p.phi / 2.0), &phase_gate(-p.phi / 2.0));
    (left, right)
}

pub fn emit_text(c: &GateCircuit) -> String {
    let mut s = String::new();
    for g in &c.gates {
        let _ = match *g {
            Gate::H(w) => writeln!(s, "H {w}"),
            Gate::Cnot { control, target } => writeln!(s, "CNOT {control},{target}"),
            Gate::Phase { wire, angle } => writeln!(s, "PHASE {wire} {angle:.17e}"),
            Gate::CPhase { control, target, angle } => writeln!(s, "CPHASE {control},{target} {angle:.17e}"),
            Gate::CXPhase { control, target, angle } => writeln!(s, "CXPHASE {control},{target} {angle:.17e}"),
        };
    }
    let _ = writeln!(s, "GPHASE {:.17e}", c.global_phase);
    s
}

pub fn emit_qasm(c: &GateCircuit) -> String {
    let mut s = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\nqubit[2] q;\n");
    for g in &c.gates {
        let _ = match *g {
            Gate::H(w) => writeln!(s, "h q[{w}];"),
            Gate::Cnot { control, target } => writeln!(s, "cx q[{control}], q[{target}];"),
            Gate::Phase { wire, angle } => writeln!(s, "p({angle:.17e}) q[{wire}];"),
            Gate::CPhase { control, target, angle } => writeln!(s, "cp({angle:.17e}) q[{control}], q[{target}];"),
            Gate::CXPhase { control, target, angle } => writeln!(
                s,
                "h q[{target}];\ncp({angle:.17e}) q[{control}], q[{target}];\nh q[{target}];"
            ),
        };
    }
    let _ = writeln!(s, "gphase({:.17e});", c.global_phase);
    s
}

fn local_dim(u: &CMatrix) -> Result<usize> {
    let d = u.nrows();
    let n = (d as f64).sqrt().round() as usize;
    if !u.is_square() || n * n != d || n < 2 {
        return Err(Error::Dimension(format!("expected an N^2 x N^2 unitary, got {:?}", u.shape())));
    }
    Ok(n)
}

pub fn swap(n: usize) -> CMatrix {
    CMatrix::from_fn(n * n, n * n, |r, c| if r / n == c % n && r % n == c / n { C1 } else { C0 })
}

/// `E(U) = 1 - sum p_i^2`, `p_i = lambda_i^2 / N^2`, with `lambda_i` the
/// singular values of the realignment `R[(i,j),(k,l)] = U[(i,k),(j,l)]`.
pub fn operator_entanglement(u: &CMatrix) -> Result<f64> {
    let n = local_dim(u)?;
    let r = CMatrix::from_fn(n * n, n * n, |row, col| {
        let (i, j, k, l) = (row / n, row % n, col / n, col % n);
        u[(i * n + k, j * n + l)]
    });
    let nn = (n * n) as f64;
    let sum: f64 = numkit::singular_values(&r).iter().map(|s| (s * s / nn).powi(2)).sum();
    Ok(1.0 - sum)
}

/// `(E(U) + E(SU) - E(S)) / E(S)`.
pub fn entangling_power(u: &CMatrix) -> Result<f64> {
    let s = swap(local_dim(u)?);
    let es = operator_entanglement(&s)?;
    Ok((operator_entanglement(u)? + operator_entanglement(&(&s * u))? - es) / es)
}

/// `(E(U) - E(US) + E(S)) / (2 E(S))`.
pub fn gate_typicality(u: &CMatrix) -> Result<f64> {
    let s = swap(local_dim(u)?);
    let es = operator_entanglement(&s)?;
    Ok((operator_entanglement(u)? - operator_entanglement(&(u * &s))? + es) / (2.0 * es))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// `(N+1)/(N-1)` times the mean linear entropy of `Tr_B U|a>|b>` over Haar
/// product inputs.
pub fn mc_entangling_power(u: &CMatrix, samples: usize, seed: u64) -> Result<McEstimate> {
    let n = local_dim(u)?;
    if samples < 2 {
        return Err(Error::Validation("need at least two samples".into()));
    }
    let mut rng = rng_from_seed(seed);
    let shape = SubsystemShape::uniform(n, 2)?;
    let factor = (n as f64 + 1.0) / (n as f64 - 1.0);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let a = numkit::random_ket(n, &mut rng);
        let b = numkit::random_ket(n, &mut rng);
        let psi = u * kron(&a, &b);
        let red = partial_trace(&numkit::outer(&psi), &shape, &[0])?;
        let lin = 1.0 - red.iter().map(|z| z.norm_sqr()).sum::<f64>();
        sum += lin;
        sum_sq += lin * lin;
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = (sum_sq / k - mean * mean).max(0.0) * k / (k - 1.0);
    Ok(McEstimate { mean: factor * mean, stderr: factor * (var / k).sqrt(), samples })
}

fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0]),
        CMatrix::from_row_slice(2, 2, &[C0, -numkit::CI, numkit::CI, C0]),
        CMatrix::from_row_slice(2, 2, &[C1, C0, C0, -C1]),
    ]
}

/// `cos(pi |r| / 2) I + i sin(pi |r| / 2) (r_hat . sigma)`; `r = 0` gives `I`.
pub fn noise_rotation(r: [f64; 3]) -> CMatrix {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return CMatrix::identity(2, 2);
    }
    let (s, c) = (PI * norm / 2.0).sin_cos();
    let gen = pauli()
        .iter()
        .zip(r)
        .fold(CMatrix::zeros(2, 2), |acc, (p, x)| acc + p.map(|z| z * (x / norm)));
    CMatrix::identity(2, 2).map(|z| z * c) + gen.map(|z| z * numkit::CI * s)
}

/// `<psi| Tr_2[W (|psi><psi| x |0><0|) W^dagger] |psi>` with
/// `W = U4 (R x R) U4^dagger`: encode with `U4^dagger`, suffer identical noise
/// on both qubits, decode with `U4`, discard the ancilla.
pub fn mitigation_pipeline(p: ConvParams, r: [f64; 3], psi: &CMatrix) -> Result<f64> {
    if psi.shape() != (2, 1) {
        return Err(Error::Dimension("input must be a single-qubit ket".into()));
    }
    let psi = psi.map(|z| z / numkit::frobenius(psi));
    let u = u4(p);
    let rot = noise_rotation(r);
    let w = &u * kron(&rot, &rot) * u.adjoint();
    let input = kron(&numkit::outer(&psi), &numkit::projector(2, 0));
    let out = partial_trace(&(&w * input * w.adjoint()), &SubsystemShape::uniform(2, 2)?, &[0])?;
    Ok(fidelity_with_pure(&out, &psi))
}

/// Closed-form fidelity for `|0>` (independent of `theta`) and `|1>`, with
/// `w = 1 - r_hat_3^2`.
pub fn mitigation_closed_form(theta: f64, r: [f64; 3], basis_state: usize) -> Result<f64> {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h3 = if norm == 0.0 { 1.0 } else { r[2] / norm };
    let w = 1.0 - h3 * h3;
    match basis_state {
        0 => Ok(w * w * (PI * norm / 2.0).sin().powi(4) + 0.25 * (w * (PI * norm).cos() + h3 * h3 + 1.0).powi(2)),
        1 => Ok(1.0
            - 0.5 * w * (theta.sin() + 1.0) * (h3 * h3 * ((PI * norm).cos() - 1.0).powi(2) + (PI * norm).sin().powi(2))),
        k => Err(Error::Validation(format!("basis state must be 0 or 1, got {k}"))),
    }
}

/// Bloch vector `(Tr rho X, Tr rho Y, Tr rho Z)`.
pub fn bloch_vector(rho: &CMatrix) -> [f64; 3] {
    let p = pauli();
    [0, 1, 2].map(|k| (rho * &p[k]).trace().re)
}

/// Output of the two-input channel `Tr_2[U (rho x sigma) U^dagger]`.
pub fn convolve_states(p: ConvParams, rho: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    let u = u4(p);
    partial_trace(&(&u * kron(rho, sigma) * u.adjoint()), &SubsystemShape::uniform(2, 2)?, &[0])
}

/// Named two-qubit permutation gates used to identify special members of the family.
pub fn named_gates() -> Vec<(&'static str, CMatrix)> {
    let c01 = controlled(&not_gate(), 0);
    let c10 = controlled(&not_gate(), 1);
    let s = swap(2);
    let d_a = &c10 * &c01;
    let d_b = &c01 * &c10;
    vec![
        ("CNOT(0->1)", c01.clone()),
        ("CNOT(1->0)", c10.clone()),
        ("DCNOT[CNOT(1->0) after CNOT(0->1)]", d_a.clone()),
        ("DCNOT[CNOT(0->1) after CNOT(1->0)]", d_b.clone()),
        ("SWAP*CNOT(0->1)", &s * &c01),
        ("SWAP*CNOT(1->0)", &s * &c10),
        ("CNOT(0->1)*DCNOT[CNOT(1->0) after CNOT(0->1)]", &c01 * &d_a),
        ("CNOT(0->1)*DCNOT[CNOT(0->1) after CNOT(1->0)]", &c01 * &d_b),
        ("CNOT(1->0)*DCNOT[CNOT(1->0) after CNOT(0->1)]", &c10 * &d_a),
        ("CNOT(1->0)*DCNOT[CNOT(0->1) after CNOT(1->0)]", &c10 * &d_b),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct GateMatch {
    pub alpha: f64,
    pub theta: f64,
    pub phi: f64,
    /// Named gates equal to `U4(alpha, theta, phi)` up to a global phase.
    pub matches: Vec<&'static str>,
}

/// Every assignment of the angle triple to `(alpha, theta, phi)`, with the
/// named gates each one reproduces.
pub fn identify_gates(angles: [f64; 3]) -> Vec<GateMatch> {
    let gates = named_gates();
    let mut seen: Vec<[f64; 3]> = Vec::new();
    let mut out = Vec::new();
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let t = perm.map(|i| angles[i]);
        if seen.contains(&t) {
            continue;
        }
        seen.push(t);
        let u = u4(ConvParams::new(t[0], t[1], t[2]).expect("finite"));
        let matches = gates.iter().filter(|(_, g)| phase_distance(&u, g) < 1e-12).map(|(name, _)| *name).collect();
        out.push(GateMatch { alpha: t[0], theta: t[1], phi: t[2], matches });
    }
    out
}
