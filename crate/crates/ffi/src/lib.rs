//! C interface to `rotsynth`.
//!
//! A rotation is synthesized into an opaque [`RsynthRotation`] handle that
//! owns its parameters and circuit. Every fallible call returns an
//! [`RsynthStatus`]; on anything other than `RSYNTH_STATUS_OK` a description is
//! available from [`rsynth_last_error`] on the same thread. Strings handed
//! out by the library must be released with [`rsynth_string_free`] and
//! handles with [`rsynth_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rotsynth::circuit::{build_rotation_circuit, export_circuit, resources, Circuit, Format};
use rotsynth::rus::monte_carlo;
use rotsynth::sim::DEFAULT_MAX_QUBITS;
use rotsynth::{synthesize, verify_circuit, Error, SynthesisParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsynthStatus {
    Ok = 0,
    InvalidArgument = 1,
    Capacity = 2,
    NullPointer = 3,
    SimulationCap = 4,
    ConstructionBug = 5,
    Runaway = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsynthFormat {
    Text = 0,
    Json = 1,
}

/// Opaque synthesized rotation.
pub struct RsynthRotation {
    params: SynthesisParams,
    circuit: Circuit,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsynthParams {
    pub n: u32,
    pub k: u64,
    /// Power of `S` absorbed by angle reduction; applied by the caller.
    pub clifford_power: i8,
    pub theta_star: f64,
    /// `tan(theta_star / 2) = tan_half_num / 2^tan_half_exp`, reduced.
    pub tan_half_num: i64,
    pub tan_half_exp: u32,
    pub success_probability: f64,
    pub expected_repetitions: f64,
    pub error_bound: f64,
    pub global_phase: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RsynthResources {
    pub toffoli_count: usize,
    pub gate_depth: usize,
    pub control_ancillas: usize,
    pub internal_ancillas: usize,
    pub total_ancillas: usize,
    pub dropped_controls: u32,
    pub num_qubits: usize,
    pub num_gates: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsynthVerification {
    pub passed: bool,
    pub expected_success_probability: f64,
    pub measured_success_probability: f64,
    pub measured_failure_probability: f64,
    pub outcomes_checked: usize,
    pub success_operator_error: f64,
    pub failure_operator_error: f64,
    pub failure_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsynthMonteCarlo {
    pub trials: u64,
    pub seed: u64,
    pub expected_repetitions: f64,
    pub mean_repetitions: f64,
    pub mean_repetitions_sigma: f64,
    pub mean_toffoli: f64,
    pub mean_depth: f64,
    pub toffoli_bound: f64,
    pub depth_bound: f64,
    pub max_repetitions: u64,
    pub operator_checks: u64,
    pub operator_checks_passed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> RsynthStatus {
    match err {
        Error::InvalidArgument(_) | Error::Parse { .. } => RsynthStatus::InvalidArgument,
        Error::Capacity { .. } => RsynthStatus::Capacity,
        Error::SimulationCap { .. } => RsynthStatus::SimulationCap,
        Error::ConstructionBug { .. } => RsynthStatus::ConstructionBug,
        Error::Runaway { .. } => RsynthStatus::Runaway,
    }
}

fn guard(f: impl FnOnce() -> Result<(), RsynthStatus>) -> RsynthStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsynthStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            RsynthStatus::Internal
        }
    }
}

fn fail(err: Error) -> RsynthStatus {
    set_last_error(&err.to_string());
    status_of(&err)
}

fn null(name: &str) -> RsynthStatus {
    set_last_error(&format!("{name} is null"));
    RsynthStatus::NullPointer
}

/// # Safety
/// `ptr` must be null or valid for reads as a `T`.
unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, RsynthStatus> {
    ptr.as_ref().ok_or_else(|| null(name))
}

/// # Safety
/// `ptr` must be null or valid for writes as a `T`.
unsafe fn write<T>(ptr: *mut T, name: &str, value: T) -> Result<(), RsynthStatus> {
    if ptr.is_null() {
        return Err(null(name));
    }
    ptr.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn rsynth_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Synthesizes `R_theta` to accuracy `epsilon` and stores a new handle in
/// `*out`. `theta` outside `[-pi/2, pi/2]` is reduced by a power of `S`,
/// reported in [`RsynthParams::clifford_power`].
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rsynth_synthesize(
    theta: f64,
    epsilon: f64,
    out: *mut *mut RsynthRotation,
) -> RsynthStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let params = synthesize(theta, epsilon).map_err(fail)?;
        let circuit = build_rotation_circuit(&params).map_err(fail)?;
        out.write(Box::into_raw(Box::new(RsynthRotation { params, circuit })));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `rotation` must be null or a handle from [`rsynth_synthesize`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn rsynth_free(rotation: *mut RsynthRotation) {
    if !rotation.is_null() {
        drop(Box::from_raw(rotation));
    }
}

/// # Safety
/// `rotation` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rsynth_params(
    rotation: *const RsynthRotation,
    out: *mut RsynthParams,
) -> RsynthStatus {
    guard(|| {
        let p = &deref(rotation, "rotation")?.params;
        let value = RsynthParams {
            n: p.n,
            k: p.k,
            clifford_power: p.clifford_power,
            theta_star: p.theta_star,
            tan_half_num: p.tan_half_star.num,
            tan_half_exp: p.tan_half_star.exp,
            success_probability: p.success_probability(),
            expected_repetitions: rotsynth::expected_repetitions(p),
            error_bound: p.error_bound(),
            global_phase: p.global_phase(),
        };
        write(out, "out", value)
    })
}

/// # Safety
/// `rotation` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rsynth_resources(
    rotation: *const RsynthRotation,
    out: *mut RsynthResources,
) -> RsynthStatus {
    guard(|| {
        let c = &deref(rotation, "rotation")?.circuit;
        let r = resources(c);
        let value = RsynthResources {
            toffoli_count: r.toffoli_count,
            gate_depth: r.gate_depth,
            control_ancillas: r.control_ancillas,
            internal_ancillas: r.internal_ancillas,
            total_ancillas: r.total_ancillas,
            dropped_controls: r.dropped_controls,
            num_qubits: c.num_qubits,
            num_gates: c.gates.len(),
        };
        write(out, "out", value)
    })
}

/// Serializes the circuit into a new NUL-terminated string stored in
/// `*out`, to be released with [`rsynth_string_free`].
///
/// # Safety
/// `rotation` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn rsynth_export(
    rotation: *const RsynthRotation,
    format: RsynthFormat,
    out: *mut *mut c_char,
) -> RsynthStatus {
    guard(|| {
        let r = deref(rotation, "rotation")?;
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let format = match format {
            RsynthFormat::Text => Format::Text,
            RsynthFormat::Json => Format::Json,
        };
        let bytes = export_circuit(&r.circuit, format);
        let s = CString::new(bytes).map_err(|_| {
            set_last_error("export contains a NUL byte");
            RsynthStatus::Internal
        })?;
        out.write(s.into_raw());
        Ok(())
    })
}

/// Releases a string from [`rsynth_export`]. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rsynth_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulates the circuit and checks every outcome's conditional operator.
/// `max_qubits = 0` selects the default cap. A circuit that simulates but
/// misbehaves returns `RSYNTH_STATUS_OK` with `passed = false`.
///
/// # Safety
/// `rotation` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rsynth_verify(
    rotation: *const RsynthRotation,
    max_qubits: usize,
    out: *mut RsynthVerification,
) -> RsynthStatus {
    guard(|| {
        let r = deref(rotation, "rotation")?;
        let cap = if max_qubits == 0 {
            DEFAULT_MAX_QUBITS
        } else {
            max_qubits
        };
        let v = verify_circuit(&r.circuit, &r.params, cap).map_err(fail)?;
        let value = RsynthVerification {
            passed: v.passed,
            expected_success_probability: v.expected_success_probability,
            measured_success_probability: v.measured_success_probability,
            measured_failure_probability: v.measured_failure_probability,
            outcomes_checked: v.outcomes_checked,
            success_operator_error: v.success_operator_error,
            failure_operator_error: v.failure_operator_error,
            failure_count: v.failures.len(),
        };
        write(out, "out", value)
    })
}

/// Runs `trials` repeat-until-success loops seeded by `seed`.
///
/// # Safety
/// `rotation` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rsynth_monte_carlo(
    rotation: *const RsynthRotation,
    trials: u64,
    seed: u64,
    out: *mut RsynthMonteCarlo,
) -> RsynthStatus {
    guard(|| {
        let r = deref(rotation, "rotation")?;
        let m = monte_carlo(&r.params, trials, seed).map_err(fail)?;
        let value = RsynthMonteCarlo {
            trials: m.trials,
            seed: m.seed,
            expected_repetitions: m.expected_repetitions,
            mean_repetitions: m.mean_repetitions,
            mean_repetitions_sigma: m.mean_repetitions_sigma,
            mean_toffoli: m.mean_toffoli,
            mean_depth: m.mean_depth,
            toffoli_bound: m.toffoli_bound,
            depth_bound: m.depth_bound,
            max_repetitions: m.histogram.keys().next_back().copied().unwrap_or(0),
            operator_checks: m.operator_checks,
            operator_checks_passed: m.operator_checks_passed,
        };
        write(out, "out", value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(rsynth_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn status_mapping() {
        assert_eq!(
            status_of(&Error::Capacity {
                requested: 70,
                max: 62
            }),
            RsynthStatus::Capacity
        );
        assert_eq!(
            status_of(&Error::SimulationCap {
                qubits: 30,
                cap: 26
            }),
            RsynthStatus::SimulationCap
        );
        assert_eq!(
            status_of(&Error::Parse {
                line: 1,
                msg: String::new()
            }),
            RsynthStatus::InvalidArgument
        );
    }

    #[test]
    fn error_message_is_set_and_cleared() {
        let mut h = ptr::null_mut();
        let s = unsafe { rsynth_synthesize(0.1, -1.0, &mut h) };
        assert_eq!(s, RsynthStatus::InvalidArgument);
        assert!(h.is_null());
        assert!(last_error().contains("epsilon"));
        let s = unsafe { rsynth_synthesize(0.1, 0.1, &mut h) };
        assert_eq!(s, RsynthStatus::Ok);
        assert_eq!(last_error(), "");
        unsafe { rsynth_free(h) };
    }
}
