//! C ABI over `qdiag`.
//!
//! Programs and tensors cross the boundary as opaque handles that the caller
//! releases with the matching `*_free`. Every fallible call returns a
//! [`QdStatus`]; on failure the message is kept per thread and can be read
//! with [`qd_last_error_message`]. Complex data is exchanged as interleaved
//! `(re, im)` doubles.
//!
//! All pointer arguments must be null or valid for the access described on
//! each function; handles must come from this library and be freed once.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdiag::cpm::DensityMatrix;
use qdiag::dsl::{self, Program};
use qdiag::linalg::{c, CMatrix};
use qdiag::{bell, entropy, ComplexTensor, DEFAULT_ATOL};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownName = 4,
    Eval = 5,
    InvalidArgument = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A parsed program.
pub struct QdProgram(Program);

/// A dense tensor; shape lists output dims then input dims, entries row-major.
pub struct QdTensor(ComplexTensor);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: QdStatus, msg: impl Into<String>) -> QdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn guard(f: impl FnOnce() -> QdStatus) -> QdStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(QdStatus::Panic, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, QdStatus> {
    if p.is_null() {
        return Err(fail(QdStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(QdStatus::InvalidUtf8, e.to_string()))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(QdStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn qd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parses DSL source text into a program handle.
#[no_mangle]
pub unsafe extern "C" fn qd_program_parse(src: *const c_char, out: *mut *mut QdProgram) -> QdStatus {
    guard(|| {
        nonnull!(out);
        *out = ptr::null_mut();
        let text = tri!(str_arg(src));
        match dsl::parse(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(QdProgram(p)));
                QdStatus::Ok
            }
            Err(e) => fail(QdStatus::Parse, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn qd_program_free(p: *mut QdProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of declared diagrams.
#[no_mangle]
pub unsafe extern "C" fn qd_program_diagram_count(p: *const QdProgram, out: *mut usize) -> QdStatus {
    guard(|| {
        nonnull!(p, out);
        *out = (*p).0.diagram_names().len();
        QdStatus::Ok
    })
}

/// Evaluates the diagram `name` into a new tensor handle.
#[no_mangle]
pub unsafe extern "C" fn qd_program_eval(
    p: *const QdProgram,
    name: *const c_char,
    out: *mut *mut QdTensor,
) -> QdStatus {
    guard(|| {
        nonnull!(p, out);
        *out = ptr::null_mut();
        let name = tri!(str_arg(name));
        let d = match (*p).0.diagram(name) {
            Ok(d) => d,
            Err(e) => return fail(QdStatus::UnknownName, e.to_string()),
        };
        match qdiag::evaluate(&d) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(QdTensor(t)));
                QdStatus::Ok
            }
            Err(e) => fail(QdStatus::Eval, e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn qd_tensor_free(t: *mut QdTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of legs and how many of them are outputs.
#[no_mangle]
pub unsafe extern "C" fn qd_tensor_rank(t: *const QdTensor, rank: *mut usize, outputs: *mut usize) -> QdStatus {
    guard(|| {
        nonnull!(t, rank, outputs);
        *rank = (*t).0.shape().len();
        *outputs = (*t).0.out_dims().len();
        QdStatus::Ok
    })
}

/// Writes the shape into `dims[0..len]`; `len` must be at least the rank.
#[no_mangle]
pub unsafe extern "C" fn qd_tensor_shape(t: *const QdTensor, dims: *mut usize, len: usize) -> QdStatus {
    guard(|| {
        nonnull!(t, dims);
        let shape = (*t).0.shape();
        if len < shape.len() {
            return fail(QdStatus::BufferTooSmall, format!("need {} dims", shape.len()));
        }
        ptr::copy_nonoverlapping(shape.as_ptr(), dims, shape.len());
        QdStatus::Ok
    })
}

/// Number of complex entries.
#[no_mangle]
pub unsafe extern "C" fn qd_tensor_len(t: *const QdTensor, out: *mut usize) -> QdStatus {
    guard(|| {
        nonnull!(t, out);
        *out = (*t).0.entries().len();
        QdStatus::Ok
    })
}

/// Writes the entries as interleaved `(re, im)` into `data[0..len]`;
/// `len` must be at least twice the entry count.
#[no_mangle]
pub unsafe extern "C" fn qd_tensor_data(t: *const QdTensor, data: *mut f64, len: usize) -> QdStatus {
    guard(|| {
        nonnull!(t, data);
        let entries = (*t).0.entries();
        if len < 2 * entries.len() {
            return fail(QdStatus::BufferTooSmall, format!("need {} doubles", 2 * entries.len()));
        }
        for (i, z) in entries.iter().enumerate() {
            *data.add(2 * i) = z.re;
            *data.add(2 * i + 1) = z.im;
        }
        QdStatus::Ok
    })
}

/// Largest CHSH value over deterministic hidden-variable strategies.
#[no_mangle]
pub unsafe extern "C" fn qd_chsh_lhv_max(out: *mut f64) -> QdStatus {
    guard(|| {
        nonnull!(out);
        *out = bell::lhv_maximum().max;
        QdStatus::Ok
    })
}

/// Largest CHSH value for a two-qubit state over planar measurement settings
/// on a grid of `resolution` angles. `state` is a length-4 interleaved vector.
#[no_mangle]
pub unsafe extern "C" fn qd_chsh_tsirelson_scan(state: *const f64, resolution: usize, out: *mut f64) -> QdStatus {
    guard(|| {
        nonnull!(state, out);
        let amps = std::slice::from_raw_parts(state, 8);
        let psi = qdiag::linalg::CVector::from_fn(4, |i, _| c(amps[2 * i], amps[2 * i + 1]));
        match bell::tsirelson_scan(&psi, resolution, DEFAULT_ATOL) {
            Ok(r) => {
                *out = r.max_chsh;
                QdStatus::Ok
            }
            Err(e) => fail(QdStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Von Neumann entropy in bits of a `dim x dim` density matrix given as
/// interleaved row-major entries.
#[no_mangle]
pub unsafe extern "C" fn qd_von_neumann_entropy(rho: *const f64, dim: usize, out: *mut f64) -> QdStatus {
    guard(|| {
        nonnull!(rho, out);
        if dim == 0 {
            return fail(QdStatus::InvalidArgument, "dim must be positive");
        }
        let raw = std::slice::from_raw_parts(rho, 2 * dim * dim);
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let k = 2 * (i * dim + j);
            c(raw[k], raw[k + 1])
        });
        match DensityMatrix::new(m, DEFAULT_ATOL) {
            Ok(rho) => {
                *out = entropy::von_neumann_entropy(&rho);
                QdStatus::Ok
            }
            Err(e) => fail(QdStatus::InvalidArgument, e.to_string()),
        }
    })
}
