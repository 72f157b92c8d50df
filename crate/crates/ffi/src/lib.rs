//! C interface to `mortar_rbf`.
//!
//! Meshes and assembled operators are opaque handles created and released by
//! the library. Every fallible call returns an [`MrStatus`]; on failure the
//! message is kept per thread and read with [`mr_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mortar_rbf::mesh::generate::{interval_mesh, square_surface, Warp};
use mortar_rbf::mesh::{ElementKind, InterfaceMesh, Mesh, Point, Side};
use mortar_rbf::mortar::{assemble, compute_e, consistency_report, InterfacePair, MortarConfig, MortarOperator, Scheme};
use mortar_rbf::rbf::{default_condition_limit, KernelFamily};
use mortar_rbf::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    IllConditioned = 4,
    SingularD = 5,
    InvalidGeometry = 6,
    SolverFailure = 7,
    Panic = 8,
    Other = 9,
}

/// Interface element kinds, passed as `int`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrElementKind {
    Seg2 = 0,
    Seg3 = 1,
    Quad4 = 2,
    Quad8 = 3,
}

/// Quadrature schemes, passed as `int`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrScheme {
    Rb = 0,
    Eb = 1,
    Sb1d = 2,
}

/// Kernel families for the RB scheme, passed as `int`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrKernel {
    Gaussian = 0,
    InvMultiquadric = 1,
    WendlandC2 = 2,
}

/// Assembly settings. `max_condition <= 0` disables the kernel-matrix condition check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrConfig {
    pub scheme: c_int,
    /// Gauss points per slave element (total, a square number on quadrilaterals).
    pub n_gauss: usize,
    pub kernel: c_int,
    /// Interpolation points per edge.
    pub n_m: usize,
    pub max_condition: f64,
}

/// Interface mesh handle.
pub struct MrMesh {
    mesh: InterfaceMesh,
}

/// Assembled mortar operator `E = D^-1 M` with its diagnostics.
pub struct MrOperator {
    op: MortarOperator,
    row_sum_defect: f64,
    dropped_fraction: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(MrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) | Error::ParameterOutOfRange { .. } | Error::Config(_) | Error::Format { .. } => {
                MrStatus::InvalidArgument
            }
            Error::DimensionMismatch { .. } | Error::IndexMap(_) => MrStatus::DimensionMismatch,
            Error::IllConditionedKernelMatrix { .. } | Error::RescaleBreakdown { .. } => MrStatus::IllConditioned,
            Error::SingularD { .. } => MrStatus::SingularD,
            Error::InvalidGeometry(_) | Error::DegenerateElement { .. } => MrStatus::InvalidGeometry,
            Error::SolverFailure(_) => MrStatus::SolverFailure,
            _ => MrStatus::Other,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: MrStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MrStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err(fail(MrStatus::Panic, "internal panic")));
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            MrStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(fail(MrStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

fn element_kind(kind: c_int) -> Result<ElementKind, Failure> {
    Ok(match kind {
        0 => ElementKind::Seg2,
        1 => ElementKind::Seg3,
        2 => ElementKind::Quad4,
        3 => ElementKind::Quad8,
        k => return Err(fail(MrStatus::InvalidArgument, format!("unknown element kind {k}"))),
    })
}

fn mortar_config(c: &MrConfig) -> Result<MortarConfig, Failure> {
    let scheme = match c.scheme {
        0 => Scheme::Rb,
        1 => Scheme::Eb,
        2 => Scheme::Sb1d,
        s => return Err(fail(MrStatus::InvalidArgument, format!("unknown scheme {s}"))),
    };
    let family = match c.kernel {
        0 => KernelFamily::Gaussian,
        1 => KernelFamily::InvMultiquadric,
        2 => KernelFamily::WendlandC2,
        k => return Err(fail(MrStatus::InvalidArgument, format!("unknown kernel {k}"))),
    };
    let mut cfg = MortarConfig::new(scheme, c.n_gauss).with_kernel(family, c.n_m)?;
    cfg.rbf.max_condition = (c.max_condition > 0.0).then_some(c.max_condition);
    Ok(cfg)
}

unsafe fn emit<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a NUL-terminated string with static lifetime.
#[no_mangle]
pub extern "C" fn mr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of the calling thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`) and returns the full length including the NUL.
/// Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Default settings: RB scheme, Gaussian kernel, `n_M = 6`, 2 Gauss points and
/// the default condition ceiling.
///
/// # Safety
/// `out` must be null or point to writable memory for one `MrConfig`.
#[no_mangle]
pub unsafe extern "C" fn mr_config_default(out: *mut MrConfig) -> MrStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = MrConfig {
            scheme: MrScheme::Rb as c_int,
            n_gauss: 2,
            kernel: MrKernel::Gaussian as c_int,
            n_m: 6,
            max_condition: default_condition_limit(),
        };
        Ok(())
    })
}

/// Builds an interface mesh from `n_nodes` points of `dim` coordinates each
/// (row-major) and `n_connectivity` node indices, `node_count(kind)` per element.
///
/// # Safety
/// `nodes` must hold `n_nodes * dim` values, `connectivity` `n_connectivity`
/// values, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_mesh_new(
    dim: usize,
    nodes: *const f64,
    n_nodes: usize,
    kind: c_int,
    connectivity: *const usize,
    n_connectivity: usize,
    out: *mut *mut MrMesh,
) -> MrStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(nodes, "nodes")?;
        non_null(connectivity, "connectivity")?;
        if !(2..=3).contains(&dim) {
            return Err(fail(MrStatus::InvalidArgument, format!("dim must be 2 or 3 (got {dim})")));
        }
        let kind = element_kind(kind)?;
        let coords = slice::from_raw_parts(nodes, n_nodes * dim);
        let points: Vec<Point> = coords
            .chunks_exact(dim)
            .map(|c| [c[0], c[1], if dim == 3 { c[2] } else { 0.0 }])
            .collect();
        let conn = slice::from_raw_parts(connectivity, n_connectivity).to_vec();
        let mesh = InterfaceMesh::new(Mesh::new(dim, points, kind, conn)?, Side::Master)?;
        emit(out, MrMesh { mesh });
        Ok(())
    })
}

/// Uniform mesh of `[a, b]` on the x-axis with `n` elements.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_mesh_interval(a: f64, b: f64, n: usize, kind: c_int, out: *mut *mut MrMesh) -> MrStatus {
    guard(|| {
        non_null(out, "out")?;
        let mesh = interval_mesh(a, b, n, element_kind(kind)?, Side::Master)?;
        emit(out, MrMesh { mesh });
        Ok(())
    })
}

/// `n x n` mesh of `[-1, 1]^2` lifted by `z = amplitude sin(pi (x+1)/2) sin(pi (y+1)/2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mr_mesh_square(n: usize, kind: c_int, amplitude: f64, out: *mut *mut MrMesh) -> MrStatus {
    guard(|| {
        non_null(out, "out")?;
        let warp = if amplitude == 0.0 {
            Warp::Flat
        } else {
            Warp::SineBump { amplitude }
        };
        let mesh = square_surface(n, element_kind(kind)?, Side::Master, warp)?;
        emit(out, MrMesh { mesh });
        Ok(())
    })
}

/// # Safety
/// `mesh` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_mesh_node_count(mesh: *const MrMesh, out: *mut usize) -> MrStatus {
    guard(|| {
        non_null(mesh, "mesh")?;
        non_null(out, "out")?;
        *out = (*mesh).mesh.n_nodes();
        Ok(())
    })
}

/// Releases a mesh; null is ignored.
///
/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mr_mesh_free(mesh: *mut MrMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Assembles `D` and `M` for the pair and factors `E = D^-1 M`. The meshes are
/// copied, so they may be freed afterwards.
///
/// # Safety
/// `master` and `slave` must be live handles, `config` valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_assemble(
    master: *const MrMesh,
    slave: *const MrMesh,
    config: *const MrConfig,
    out: *mut *mut MrOperator,
) -> MrStatus {
    guard(|| {
        non_null(master, "master")?;
        non_null(slave, "slave")?;
        non_null(config, "config")?;
        non_null(out, "out")?;
        let cfg = mortar_config(&*config)?;
        let pair = InterfacePair::new((*master).mesh.clone(), (*slave).mesh.clone())?;
        let mats = assemble(&pair, &cfg)?;
        let report = consistency_report(&mats)?;
        let op = compute_e(&mats)?;
        emit(
            out,
            MrOperator {
                op,
                row_sum_defect: report.row_sum_defect,
                dropped_fraction: report.dropped_fraction,
            },
        );
        Ok(())
    })
}

/// Rows (slave nodes) and columns (master nodes) of `E`.
///
/// # Safety
/// `op` must be a live handle; `rows` and `cols` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_operator_dims(op: *const MrOperator, rows: *mut usize, cols: *mut usize) -> MrStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(rows, "rows")?;
        non_null(cols, "cols")?;
        *rows = (*op).op.nrows();
        *cols = (*op).op.ncols();
        Ok(())
    })
}

/// `max |sum_k E[i, k] - 1|` over covered slave nodes.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_operator_row_sum_defect(op: *const MrOperator, out: *mut f64) -> MrStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        *out = (*op).row_sum_defect;
        Ok(())
    })
}

/// Fraction of slave Gauss points discarded by support detection.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mr_operator_dropped_fraction(op: *const MrOperator, out: *mut f64) -> MrStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        *out = (*op).dropped_fraction;
        Ok(())
    })
}

/// `u_slave = E u_master`.
///
/// # Safety
/// `u_master` must hold `n_master` values and `u_slave` have room for `n_slave`.
#[no_mangle]
pub unsafe extern "C" fn mr_operator_transfer(
    op: *const MrOperator,
    u_master: *const f64,
    n_master: usize,
    u_slave: *mut f64,
    n_slave: usize,
) -> MrStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(u_master, "u_master")?;
        non_null(u_slave, "u_slave")?;
        let op = &(*op).op;
        if n_slave != op.nrows() {
            return Err(Error::DimensionMismatch {
                expected: op.nrows(),
                found: n_slave,
            }
            .into());
        }
        let us = op.apply(slice::from_raw_parts(u_master, n_master))?;
        slice::from_raw_parts_mut(u_slave, n_slave).copy_from_slice(&us);
        Ok(())
    })
}

/// Writes `E` densely in row-major order into `out`, which holds `len` values.
///
/// # Safety
/// `op` must be a live handle and `out` valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mr_operator_dense(op: *const MrOperator, out: *mut f64, len: usize) -> MrStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        let op = &(*op).op;
        let need = op.nrows() * op.ncols();
        if len != need {
            return Err(Error::DimensionMismatch {
                expected: need,
                found: len,
            }
            .into());
        }
        let dst = slice::from_raw_parts_mut(out, len);
        let e = op.to_dense();
        for i in 0..op.nrows() {
            for k in 0..op.ncols() {
                dst[i * op.ncols() + k] = e[(i, k)];
            }
        }
        Ok(())
    })
}

/// Releases an operator; null is ignored.
///
/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mr_operator_free(op: *mut MrOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}
