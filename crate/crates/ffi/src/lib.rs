//! C ABI over `tristoch`.
//!
//! Objects are opaque handles created by `ts_*_new`/`ts_*_from_*` and released
//! with the matching `ts_*_free`. Every fallible call returns a [`TsStatus`];
//! on failure [`ts_last_error`] describes the most recent error on the calling
//! thread. Matrices cross the boundary as separate row-major real and
//! imaginary `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use tristoch::classical::{self, ProbVector, StochTensor};
use tristoch::coherify::{self, c2_coherence, coherified_channel, default_blocks, default_scheme};
use tristoch::io::{dynamical_from_json, dynamical_to_json, tensor_from_json, tensor_to_json};
use tristoch::numkit::{CMatrix, C1, CI};
use tristoch::qchannel::{self, quantum_convolve, DensityMatrix, DynamicalMatrix};
use tristoch::qubitconv::{self, ConvParams};
use tristoch::Error;

/// Result codes. `TS_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    NotChannel = 4,
    NoIdentity = 5,
    TooLarge = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// Opaque stochastic tensor.
pub struct TsTensor(StochTensor);

/// Opaque channel, stored as its dynamical matrix.
pub struct TsChannel(DynamicalMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::Dimension(_) => TsStatus::Dimension,
        Error::Validation(_) | Error::Unsupported(_) => TsStatus::InvalidArgument,
        Error::NotChannel(_) => TsStatus::NotChannel,
        Error::NoIdentity(_) => TsStatus::NoIdentity,
        Error::TooLarge(_) => TsStatus::TooLarge,
        Error::Parse(_) => TsStatus::Parse,
        Error::Io(_) | Error::File { .. } => TsStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail> + UnwindSafe) -> TsStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            set_error("");
            TsStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TsStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            TsStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            TsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail::Arg(format!("{what}: {e}")))
}

fn complex_matrix(n: usize, re: &[f64], im: &[f64]) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| C1 * re[r * n + c] + CI * im[r * n + c])
}

fn split_matrix(m: &CMatrix, re: &mut [f64], im: &mut [f64]) {
    let n = m.ncols();
    for r in 0..m.nrows() {
        for c in 0..n {
            re[r * n + c] = m[(r, c)].re;
            im[r * n + c] = m[(r, c)].im;
        }
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the most recent failed call on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ts_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a tensor of `order` indices over `dim` symbols from `dim^order`
/// row-major entries. Entries are validated as a probability array.
///
/// # Safety
/// `entries` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_new(
    order: usize,
    dim: usize,
    entries: *const f64,
    len: usize,
    out: *mut *mut TsTensor,
) -> TsStatus {
    guard(|| {
        let e = slice(entries, len, "entries")?;
        let t = StochTensor::new(order, dim, e.to_vec())?;
        put(out, Box::into_raw(Box::new(TsTensor(t))), "out")
    })
}

/// The cyclic group tensor `A[i,j,k] = [i = j + k mod n]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_cyclic(n: usize, out: *mut *mut TsTensor) -> TsStatus {
    guard(|| {
        if n == 0 {
            return Err(Fail::Arg("n must be positive".into()));
        }
        put(out, Box::into_raw(Box::new(TsTensor(StochTensor::cyclic(n)))), "out")
    })
}

/// Parses `{"order", "dim", "entries"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_from_json(json: *const c_char, out: *mut *mut TsTensor) -> TsStatus {
    guard(|| {
        let s = text(json, "json")?;
        let j = serde_json::from_str(s).map_err(|e| Fail::Lib(e.into()))?;
        put(out, Box::into_raw(Box::new(TsTensor(tensor_from_json(j)?))), "out")
    })
}

/// Serialises a tensor; release the result with [`ts_string_free`].
///
/// # Safety
/// `t` must be a live tensor handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_to_json(t: *const TsTensor, out: *mut *mut c_char) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        put(out, owned_string(tristoch::io::to_string(&tensor_to_json(&t.0))), "out")
    })
}

/// # Safety
/// `t` must be null or a live tensor handle.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_free(t: *mut TsTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of symbols per index; zero for a null handle.
///
/// # Safety
/// `t` must be null or a live tensor handle.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_dim(t: *const TsTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.dim())
}

/// Number of indices; zero for a null handle.
///
/// # Safety
/// `t` must be null or a live tensor handle.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_order(t: *const TsTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.order())
}

/// Writes 1 if every axis sums to one within `tol`, else 0.
///
/// # Safety
/// `t` must be a live tensor handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_is_m_stochastic(t: *const TsTensor, tol: f64, out: *mut i32) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        put(out, i32::from(t.0.is_m_stochastic(tol)), "out")
    })
}

/// Convolution `r_i = sum_jk A[i,j,k] p_j q_k` of a 3-index tensor.
///
/// # Safety
/// `p`, `q` and `out` must each hold `n` doubles, `n` the tensor dimension.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_convolve(
    t: *const TsTensor,
    p: *const f64,
    q: *const f64,
    n: usize,
    out: *mut f64,
) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        let p = ProbVector::new(slice(p, n, "p")?.to_vec())?;
        let q = ProbVector::new(slice(q, n, "q")?.to_vec())?;
        let r = classical::convolve(&t.0, &p, &q)?;
        let dst = slice_mut(out, n, "out")?;
        if r.dim() != n {
            return Err(Fail::Lib(Error::Dimension(format!("result has {} entries, buffer {n}", r.dim()))));
        }
        dst.copy_from_slice(r.entries());
        Ok(())
    })
}

/// Writes the 0-based index of the identity vertex, or -1 if there is none.
///
/// # Safety
/// `t` must be a live tensor handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_find_identity(t: *const TsTensor, out: *mut i64) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        let k = classical::find_identity(&t.0)?.map_or(-1, |k| k as i64);
        put(out, k, "out")
    })
}

/// Writes the number of reducing sets found by exhaustive search.
///
/// # Safety
/// `t` must be a live tensor handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_tensor_reducing_set_count(t: *const TsTensor, out: *mut usize) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        put(out, classical::find_reducing_sets(&t.0)?.len(), "out")
    })
}

/// Coherifies a permutation tensor with the default block family for its
/// dimension.
///
/// # Safety
/// `t` must be a live tensor handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_coherify(t: *const TsTensor, out: *mut *mut TsChannel) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        let n = t.0.dim();
        let blocks = default_blocks(n, default_scheme(n))?;
        let d = coherified_channel(&t.0, &blocks)?;
        put(out, Box::into_raw(Box::new(TsChannel(d))), "out")
    })
}

/// Diagonal lift `D = diag(A)` of any tensor.
///
/// # Safety
/// `t` must be a live tensor handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_diagonal(t: *const TsTensor, out: *mut *mut TsChannel) -> TsStatus {
    guard(|| {
        let t = get(t, "tensor")?;
        put(out, Box::into_raw(Box::new(TsChannel(coherify::coherify_diagonal(&t.0)))), "out")
    })
}

/// Parses `{"parts", "dim", "re", "im"}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_from_json(json: *const c_char, out: *mut *mut TsChannel) -> TsStatus {
    guard(|| {
        let s = text(json, "json")?;
        let j = serde_json::from_str(s).map_err(|e| Fail::Lib(e.into()))?;
        put(out, Box::into_raw(Box::new(TsChannel(dynamical_from_json(j)?))), "out")
    })
}

/// Serialises a channel; release the result with [`ts_string_free`].
///
/// # Safety
/// `c` must be a live channel handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_to_json(c: *const TsChannel, out: *mut *mut c_char) -> TsStatus {
    guard(|| {
        let c = get(c, "channel")?;
        put(out, owned_string(tristoch::io::to_string(&dynamical_to_json(&c.0))), "out")
    })
}

/// # Safety
/// `c` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_free(c: *mut TsChannel) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Local dimension of each subsystem; zero for a null handle.
///
/// # Safety
/// `c` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_dim(c: *const TsChannel) -> usize {
    c.as_ref().map_or(0, |c| c.0.local_dim())
}

/// Writes 1 if the dynamical matrix is positive and trace preserving, else 0.
///
/// # Safety
/// `c` must be a live channel handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_is_channel(c: *const TsChannel, out: *mut i32) -> TsStatus {
    guard(|| {
        let c = get(c, "channel")?;
        put(out, i32::from(qchannel::is_channel(&c.0)), "out")
    })
}

/// Writes 1 if every single-subsystem partial trace is the identity, else 0.
///
/// # Safety
/// `c` must be a live channel handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_is_m_stochastic(c: *const TsChannel, out: *mut i32) -> TsStatus {
    guard(|| {
        let c = get(c, "channel")?;
        put(out, i32::from(qchannel::is_m_stochastic(&c.0)), "out")
    })
}

/// Writes the l2 coherence: squared off-diagonal moduli of the dynamical
/// matrix, summed and divided by `N^(2(m-1))`.
///
/// # Safety
/// `c` must be a live channel handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_c2(c: *const TsChannel, out: *mut f64) -> TsStatus {
    guard(|| {
        let c = get(c, "channel")?;
        put(out, c2_coherence(&c.0), "out")
    })
}

/// Writes the entropic coherence of the channel in nats.
///
/// # Safety
/// `c` must be a live channel handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_entropic(c: *const TsChannel, out: *mut f64) -> TsStatus {
    guard(|| {
        let c = get(c, "channel")?;
        put(out, coherify::entropic_coherence(&c.0)?, "out")
    })
}

/// Quantum convolution of two `n x n` density matrices through a
/// three-subsystem channel. All arrays hold `n * n` doubles, row-major.
///
/// # Safety
/// Every pointer must reference `n * n` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_channel_convolve(
    c: *const TsChannel,
    n: usize,
    rho_re: *const f64,
    rho_im: *const f64,
    sigma_re: *const f64,
    sigma_im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> TsStatus {
    guard(|| {
        let c = get(c, "channel")?;
        if n != c.0.local_dim() {
            return Err(Fail::Lib(Error::Dimension(format!("states are {n}x{n}, channel acts on {}", c.0.local_dim()))));
        }
        let len = n * n;
        let rho = DensityMatrix::new(complex_matrix(n, slice(rho_re, len, "rho_re")?, slice(rho_im, len, "rho_im")?))?;
        let sigma =
            DensityMatrix::new(complex_matrix(n, slice(sigma_re, len, "sigma_re")?, slice(sigma_im, len, "sigma_im")?))?;
        let r = quantum_convolve(&c.0, &rho, &sigma)?;
        split_matrix(r.matrix(), slice_mut(out_re, len, "out_re")?, slice_mut(out_im, len, "out_im")?);
        Ok(())
    })
}

fn params(alpha: f64, theta: f64, phi: f64) -> Result<ConvParams, Fail> {
    Ok(ConvParams::new(alpha, theta, phi)?)
}

/// The two-qubit convolution gate `U(alpha, theta, phi)` as 16 + 16 doubles.
///
/// # Safety
/// `out_re` and `out_im` must each hold 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_qubit_gate(alpha: f64, theta: f64, phi: f64, out_re: *mut f64, out_im: *mut f64) -> TsStatus {
    guard(|| {
        let u = qubitconv::u4(params(alpha, theta, phi)?);
        split_matrix(&u, slice_mut(out_re, 16, "out_re")?, slice_mut(out_im, 16, "out_im")?);
        Ok(())
    })
}

/// Entangling power and gate typicality of `U(alpha, theta, phi)`.
///
/// # Safety
/// `e_p` and `g_t` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_qubit_metrics(alpha: f64, theta: f64, phi: f64, e_p: *mut f64, g_t: *mut f64) -> TsStatus {
    guard(|| {
        let u = qubitconv::u4(params(alpha, theta, phi)?);
        put(e_p, qubitconv::entangling_power(&u)?, "e_p")?;
        put(g_t, qubitconv::gate_typicality(&u)?, "g_t")
    })
}

/// Circuit for `U(alpha, theta, phi)` as OpenQASM 3 text; release with
/// [`ts_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ts_qubit_qasm(alpha: f64, theta: f64, phi: f64, out: *mut *mut c_char) -> TsStatus {
    guard(|| {
        let c = qubitconv::decompose_u4(params(alpha, theta, phi)?);
        put(out, owned_string(qubitconv::emit_qasm(&c)), "out")
    })
}
