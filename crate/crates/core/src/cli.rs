//! Command-line front end. Indices in output are 1-based; exit codes are 0
//! on success, 2 on validation errors and 3 on I/O or parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::classical::{self, ProbVector, StochTensor};
use crate::coherify::{self, BlockScheme};
use crate::error::{Error, Result};
use crate::io;
use crate::numkit::{self, Tolerances};
use crate::qchannel::{self, KrausSet};
use crate::qubitconv::{self, ConvParams};
use crate::sample::{self, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "tristoch", version, about = "Tristochastic tensors, convolutions and their quantum coherifications")]
pub struct Cli {
    /// Hermiticity/PSD tolerance (also read from TRISTOCH_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect a stochastic tensor.
    #[command(subcommand)]
    Tensor(TensorCmd),
    /// Apply a classical or quantum convolution.
    #[command(subcommand)]
    Convolve(ConvolveCmd),
    /// Build a coherification of a tensor and report its coherence.
    Coherify(CoherifyArgs),
    /// The two-qubit convolution family.
    #[command(subcommand)]
    Qubit(QubitCmd),
}

#[derive(Subcommand, Debug)]
pub enum TensorCmd {
    /// Per-axis marginals and classification.
    Check { file: PathBuf },
    /// All probability eigenvectors.
    Eigenvectors { file: PathBuf },
    /// Identity element of the convolution.
    Identity { file: PathBuf },
    /// Inverse of a vertex.
    Inverse {
        file: PathBuf,
        /// Probability vector to invert (JSON).
        #[arg(long)]
        vector: PathBuf,
    },
    /// Reducing sets and truncations.
    Reduce {
        file: PathBuf,
        /// Comma-separated 1-based index set to truncate; lists all sets when absent.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
        /// Write the truncated tensor here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ConvolveCmd {
    /// `p * q` through a tristochastic tensor.
    Classical {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
    },
    /// `rho * sigma` through a tripartite dynamical matrix.
    Quantum {
        #[arg(long)]
        choi: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Also confirm output diagonals depend only on input diagonals.
        #[arg(long)]
        check_diagonal: bool,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Mub,
    Fourier,
    Identity,
    Diagonal,
}

#[derive(Args, Debug)]
pub struct CoherifyArgs {
    pub file: PathBuf,
    /// Defaults to mub for prime dimensions, fourier otherwise.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Custom block family (JSON); overrides the scheme.
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    /// Write the dynamical matrix here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Angles {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircuitFormat {
    Qasm,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum QubitCmd {
    /// The 4x4 unitary.
    U4 {
        #[command(flatten)]
        angles: Angles,
    },
    /// Gate decomposition.
    Circuit {
        #[command(flatten)]
        angles: Angles,
        #[arg(long, value_enum, default_value_t = CircuitFormat::Text)]
        format: CircuitFormat,
    },
    /// Entangling power, gate typicality and a Monte Carlo estimate.
    Metrics {
        #[command(flatten)]
        angles: Angles,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Error-mitigation fidelities over random noise vectors.
    Mitigate {
        #[command(flatten)]
        angles: Angles,
        /// Basis state 0 or 1.
        #[arg(long, default_value_t = 1)]
        state: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// CSV sweep `theta,e_p,g_t`.
    Plane {
        #[arg(long, default_value_t = 65)]
        points: usize,
    },
}

/// Parses arguments, runs the command, writes to `out`, returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            let _ = writeln!(err, "error: --tol must be positive");
            return 2;
        }
        Tolerances::set(Tolerances { herm: t, psd: t, ..Tolerances::current() });
    }
    let _ = writeln!(err, "seed: {}", cli.seed);
    match dispatch(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn load_tensor(p: &Path) -> Result<StochTensor> {
    io::tensor_from_json(io::read_json(p)?)
}

fn load_prob(p: &Path) -> Result<ProbVector> {
    io::prob_from_json(io::read_json(p)?)
}

fn one_based(set: &[usize]) -> Vec<usize> {
    set.iter().map(|i| i + 1).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

fn params(a: &Angles) -> Result<ConvParams> {
    ConvParams::new(a.alpha, a.theta, a.phi)
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Tensor(t) => tensor_cmd(t, cli.json),
        Command::Convolve(c) => convolve_cmd(c, cli),
        Command::Coherify(c) => coherify_cmd(c, cli.json),
        Command::Qubit(q) => qubit_cmd(q, cli),
    }
}

fn tensor_cmd(cmd: &TensorCmd, as_json: bool) -> Result<String> {
    match cmd {
        TensorCmd::Check { file } => {
            let r = classical::validate(&load_tensor(file)?);
            Ok(if as_json {
                io::to_string(&json!({
                    "class": r.class_name(),
                    "axis_deviation": r.axis_deviation,
                    "stochastic_axes": one_based(&r.stochastic_axes),
                    "min_entry": r.min_entry,
                    "permutation": r.permutation,
                })) + "\n"
            } else {
                format!("{r}\n")
            })
        }
        TensorCmd::Eigenvectors { file } => {
            let a = load_tensor(file)?;
            let sets = classical::find_reducing_sets(&a)?;
            let vecs = classical::probability_eigenvectors(&a)?;
            let labels: Vec<Vec<usize>> =
                std::iter::once(Vec::new()).chain(sets.iter().map(|s| one_based(s))).collect();
            if as_json {
                let items: Vec<_> = labels
                    .iter()
                    .zip(&vecs)
                    .map(|(l, v)| json!({"zero_on": l, "entries": v.entries()}))
                    .collect();
                return Ok(io::to_string(&items) + "\n");
            }
            let mut s = String::new();
            for (l, v) in labels.iter().zip(&vecs) {
                s += &format!("zero on {l:?}: {}\n", fmt_vec(v.entries()));
            }
            Ok(s)
        }
        TensorCmd::Identity { file } => {
            let a = load_tensor(file)?;
            let id = classical::find_identity(&a)?;
            Ok(match (as_json, id) {
                (true, _) => io::to_string(&json!({"identity": id.map(|k| k + 1)})) + "\n",
                (false, Some(k)) => format!("identity: e_{}\n", k + 1),
                (false, None) => "identity: none\n".into(),
            })
        }
        TensorCmd::Inverse { file, vector } => {
            let a = load_tensor(file)?;
            let p = load_prob(vector)?;
            let inv = classical::find_inverse(&a, &p)?;
            let idx = inv.as_ref().and_then(|v| v.as_vertex(0.0)).map(|k| k + 1);
            Ok(match (as_json, idx) {
                (true, _) => io::to_string(&json!({"inverse": idx})) + "\n",
                (false, Some(k)) => format!("inverse: e_{k}\n"),
                (false, None) => "inverse: none\n".into(),
            })
        }
        TensorCmd::Reduce { file, set, output } => {
            let a = load_tensor(file)?;
            match set {
                None => {
                    let sets = classical::find_reducing_sets(&a)?;
                    let shown: Vec<Vec<usize>> = sets.iter().map(|s| one_based(s)).collect();
                    Ok(if as_json {
                        io::to_string(&json!({"reducing_sets": shown})) + "\n"
                    } else if shown.is_empty() {
                        "no reducing sets\n".into()
                    } else {
                        shown.iter().map(|s| format!("{s:?}\n")).collect()
                    })
                }
                Some(s) => {
                    if s.iter().any(|&i| i == 0 || i > a.dim()) {
                        return Err(Error::Dimension(format!("indices must lie in 1..={}", a.dim())));
                    }
                    let zero: Vec<usize> = s.iter().map(|i| i - 1).collect();
                    let t = classical::truncate(&a, &zero)?;
                    let text = io::to_string(&io::tensor_to_json(&t));
                    if let Some(path) = output {
                        std::fs::write(path, &text).map_err(|e| Error::file(path, e))?;
                    }
                    Ok(text + "\n")
                }
            }
        }
    }
}

fn convolve_cmd(cmd: &ConvolveCmd, cli: &Cli) -> Result<String> {
    match cmd {
        ConvolveCmd::Classical { tensor, p, q } => {
            let r = classical::convolve(&load_tensor(tensor)?, &load_prob(p)?, &load_prob(q)?)?;
            Ok(io::to_string(&io::prob_to_json(&r)) + "\n")
        }
        ConvolveCmd::Quantum { choi, rho, sigma, check_diagonal, trials } => {
            let d = io::dynamical_from_json(io::read_json(choi)?)?;
            let rho = io::density_from_json(io::read_json(rho)?)?;
            let sigma = io::density_from_json(io::read_json(sigma)?)?;
            let out = qchannel::quantum_convolve(&d, &rho, &sigma)?;
            let mut s = io::to_string(&io::density_to_json(&out)) + "\n";
            if *check_diagonal {
                let c = coherify::diagonal_dependence_check(&d, *trials, cli.seed)?;
                s += &if cli.json {
                    io::to_string(&c) + "\n"
                } else {
                    format!(
                        "diagonal dependence: {} (max deviation {:.3e})\n",
                        if c.consistent { "ok" } else { "violated" },
                        c.max_deviation
                    )
                };
            }
            Ok(s)
        }
    }
}

fn coherify_cmd(args: &CoherifyArgs, as_json: bool) -> Result<String> {
    let a = load_tensor(&args.file)?;
    let (d, label) = if let Some(path) = &args.blocks {
        let b = io::blocks_from_json(io::read_json(path)?)?;
        (coherify::coherified_channel(&a, &b)?, "custom")
    } else {
        let scheme = match args.scheme {
            Some(SchemeArg::Diagonal) => None,
            Some(SchemeArg::Mub) => Some(BlockScheme::Mub),
            Some(SchemeArg::Fourier) => Some(BlockScheme::Fourier),
            Some(SchemeArg::Identity) => Some(BlockScheme::Identity),
            None => Some(coherify::default_scheme(a.dim())),
        };
        match scheme {
            None => (coherify::coherify_diagonal(&a), "diagonal"),
            Some(s) => (coherify::coherified_channel(&a, &coherify::default_blocks(a.dim(), s)?)?, s.name()),
        }
    };
    if let Some(path) = &args.output {
        std::fs::write(path, io::to_string(&io::dynamical_to_json(&d))).map_err(|e| Error::file(path, e))?;
    }
    let r = coherify::coherence_report(&d)?;
    Ok(if as_json {
        io::to_string(&json!({"scheme": label, "c2": r.c2, "entropic": r.entropic, "purity": r.purity})) + "\n"
    } else {
        format!(
            "scheme: {label}\nC2: {:.15}\nentropic: {:.15}\npurity: {:.15}\nm-stochastic: {}\n",
            r.c2,
            r.entropic,
            r.purity,
            qchannel::is_m_stochastic(&d)
        )
    })
}

fn qubit_cmd(cmd: &QubitCmd, cli: &Cli) -> Result<String> {
    match cmd {
        QubitCmd::U4 { angles } => {
            let u = qubitconv::u4(params(angles)?);
            let c = io::complex_to_json(&u);
            Ok(if cli.json {
                io::to_string(&c) + "\n"
            } else {
                let mut s = String::new();
                for r in u.row_iter() {
                    let cells: Vec<String> = r.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
                    s += &cells.join("  ");
                    s += "\n";
                }
                s
            })
        }
        QubitCmd::Circuit { angles, format } => {
            let c = qubitconv::decompose_u4(params(angles)?);
            let body = match format {
                CircuitFormat::Qasm => qubitconv::emit_qasm(&c),
                CircuitFormat::Text => qubitconv::emit_text(&c),
            };
            Ok(if cli.json {
                let lines: Vec<&str> = body.lines().collect();
                io::to_string(&json!({"gates": c.gates.len(), "global_phase": c.global_phase, "lines": lines})) + "\n"
            } else {
                body
            })
        }
        QubitCmd::Metrics { angles, trials } => {
            let p = params(angles)?;
            let u = qubitconv::u4(p);
            let ep = qubitconv::entangling_power(&u)?;
            let gt = qubitconv::gate_typicality(&u)?;
            let gt_quoted = (3.0 - p.theta.cos()) / 6.0;
            let mc = qubitconv::mc_entangling_power(&u, *trials, cli.seed)?;
            Ok(if cli.json {
                io::to_string(&json!({
                    "e_p": ep,
                    "g_t": gt,
                    "g_t_quoted_closed_form": gt_quoted,
                    "e_p_mc": mc.mean,
                    "e_p_mc_stderr": mc.stderr,
                })) + "\n"
            } else {
                format!(
                    "e_p: {ep:.12}\ng_t: {gt:.12}\ng_t quoted closed form (3 - cos theta)/6: {gt_quoted:.12} (differs by {:.3e})\ne_p (monte carlo, {} samples): {:.6} +/- {:.6}\n",
                    (gt - gt_quoted).abs(),
                    mc.samples,
                    mc.mean,
                    mc.stderr
                )
            })
        }
        QubitCmd::Mitigate { angles, state, trials } => {
            if *state > 1 {
                return Err(Error::Validation(format!("--state must be 0 or 1, got {state}")));
            }
            let p = params(angles)?;
            let psi = numkit::basis_ket(2, *state);
            let mut rng = sample::rng_from_seed(cli.seed);
            let mut s = String::from("r_x,r_y,r_z,fidelity,closed_form\n");
            for _ in 0..*trials {
                let r = random_noise_vector(&mut rng);
                let f = qubitconv::mitigation_pipeline(p, r, &psi)?;
                let cf = qubitconv::mitigation_closed_form(p.theta, r, *state)?;
                s += &format!("{:.12},{:.12},{:.12},{f:.15},{cf:.15}\n", r[0], r[1], r[2]);
            }
            Ok(s)
        }
        QubitCmd::Plane { points } => {
            if *points < 2 {
                return Err(Error::Validation("--points must be at least 2".into()));
            }
            let mut s = String::from("theta,e_p,g_t\n");
            for k in 0..*points {
                let theta = -std::f64::consts::PI + std::f64::consts::TAU * k as f64 / (*points - 1) as f64;
                let u = qubitconv::u4(ConvParams::new(0.0, theta, 0.0)?);
                s += &format!(
                    "{theta:.12},{:.12},{:.12}\n",
                    qubitconv::entangling_power(&u)?,
                    qubitconv::gate_typicality(&u)?
                );
            }
            Ok(s)
        }
    }
}

/// Noise vector with uniform direction and length in `[0, 1]`.
pub fn random_noise_vector<R: rand::Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let dir = numkit::random_ket(2, rng);
    let b = qubitconv::bloch_vector(&numkit::outer(&dir));
    let len: f64 = rng.random();
    b.map(|x| x * len)
}

/// Kraus set of a tensor's default coherification (used by the FFI layer).
pub fn default_coherification(a: &StochTensor) -> Result<KrausSet> {
    coherify::coherify_permutation(a, &coherify::default_blocks(a.dim(), coherify::default_scheme(a.dim()))?)
}
