//! C ABI over the simulator.
//!
//! Objects are opaque handles created by the `cfsim_network_*` constructors
//! and `cfsim_simulation_new`, and released with the matching `*_free`.
//! Every fallible call returns a [`CfsimStatus`]; the message for the most
//! recent failure on the calling thread is available through
//! [`cfsim_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cfsim::cig::FrequencyInput;
use cfsim::complex_frequency::{eta_of, ParkVector};
use cfsim::smallsignal::{eigensolve, identify_frequency_mode, linearize, DEFAULT_EPS};
use cfsim::{Error, Event, EventKind, Network, PfSolution, Simulation, SystemModel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    PowerFlow = 4,
    Integration = 5,
    Eigen = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CfsimControl {
    NoCig = 0,
    CigOmega = 1,
    CigOmegaTilde = 2,
}

/// A network case.
pub struct CfsimNetwork {
    net: Network,
}

/// A time-domain simulation with its model and state.
pub struct CfsimSimulation {
    sim: Simulation,
    names: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn status_of(err: &Error) -> CfsimStatus {
    match err {
        Error::Parse { .. } | Error::DuplicateId { .. } | Error::SlackCount(_) | Error::UnknownBus(_) => {
            CfsimStatus::Parse
        }
        Error::PowerFlowDiverged { .. } => CfsimStatus::PowerFlow,
        Error::StepFailure { .. } | Error::AlgebraicSolve(_) => CfsimStatus::Integration,
        Error::Eigen(_) | Error::NoQualifyingMode | Error::AmbiguousMode(_) => CfsimStatus::Eigen,
        _ => CfsimStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (CfsimStatus, String)>) -> CfsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfsimStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CfsimStatus::Panic
        }
    }
}

fn lift<T>(r: cfsim::Result<T>) -> Result<T, (CfsimStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CfsimStatus, String) {
    (CfsimStatus::NullPointer, format!("{what} is null"))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len`) and returns the full message length excluding the terminator.
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cfsim_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Loads the bundled WSCC 9-bus case.
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cfsim_network_wscc9(out: *mut *mut CfsimNetwork) -> CfsimStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = Box::into_raw(Box::new(CfsimNetwork { net: Network::wscc9() }));
        Ok(())
    })
}

/// Parses a case from NUL-terminated text.
/// `text` must be a valid C string and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cfsim_network_parse(text: *const c_char, out: *mut *mut CfsimNetwork) -> CfsimStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (CfsimStatus::InvalidArgument, "case text is not UTF-8".to_string()))?;
        let net = lift(cfsim::parse_case(text))?;
        *out = Box::into_raw(Box::new(CfsimNetwork { net }));
        Ok(())
    })
}

/// `net` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cfsim_network_free(net: *mut CfsimNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of buses, or 0 for a null handle.
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_network_bus_count(net: *const CfsimNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.buses.len())
}

/// Scales the load at `bus` by `factor` in place.
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_network_scale_load(net: *mut CfsimNetwork, bus: i64, factor: f64) -> CfsimStatus {
    guard(|| {
        let n = net.as_mut().ok_or_else(|| null("net"))?;
        n.net = lift(n.net.apply_event(&EventKind::LoadScale { bus, factor }))?;
        Ok(())
    })
}

fn power_flow(net: &Network, tol: f64) -> Result<PfSolution, (CfsimStatus, String)> {
    if !(tol > 0.0) {
        return Err((CfsimStatus::InvalidArgument, format!("tolerance must be positive, got {tol}")));
    }
    lift(cfsim::solve_power_flow(net, tol, 30))
}

/// Solves the power flow; writes magnitudes (pu) and angles (rad) in bus
/// order into arrays of length `len`, which must be at least the bus count.
/// `v_mag` and `v_ang` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cfsim_power_flow(
    net: *const CfsimNetwork,
    tol: f64,
    v_mag: *mut f64,
    v_ang: *mut f64,
    len: usize,
) -> CfsimStatus {
    guard(|| {
        let n = net.as_ref().ok_or_else(|| null("net"))?;
        if v_mag.is_null() || v_ang.is_null() {
            return Err(null("output array"));
        }
        let nb = n.net.buses.len();
        if len < nb {
            return Err((CfsimStatus::BufferTooSmall, format!("need {nb} entries, got {len}")));
        }
        let pf = power_flow(&n.net, tol)?;
        ptr::copy_nonoverlapping(pf.v_mag.as_ptr(), v_mag, nb);
        ptr::copy_nonoverlapping(pf.v_ang.as_ptr(), v_ang, nb);
        Ok(())
    })
}

fn build_model(
    net: &Network,
    control: CfsimControl,
    k: f64,
) -> Result<(SystemModel, cfsim::SystemState), (CfsimStatus, String)> {
    let mut net = match control {
        CfsimControl::NoCig => net.without_cigs(),
        _ => net.clone(),
    };
    if control == CfsimControl::CigOmegaTilde {
        for c in &mut net.cigs {
            c.params.k = k;
        }
    }
    let input = match control {
        CfsimControl::NoCig => FrequencyInput::Off,
        CfsimControl::CigOmega => FrequencyInput::Omega,
        CfsimControl::CigOmegaTilde => FrequencyInput::OmegaTilde,
    };
    let pf = power_flow(&net, 1e-10)?;
    lift(SystemModel::assemble(&net, &pf, input))
}

/// Initializes a simulation at the power-flow equilibrium. `k` is used only
/// with `CFSIM_CONTROL_CIG_OMEGA_TILDE`.
/// `net` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_new(
    net: *const CfsimNetwork,
    control: CfsimControl,
    k: f64,
    out: *mut *mut CfsimSimulation,
) -> CfsimStatus {
    guard(|| {
        let n = net.as_ref().ok_or_else(|| null("net"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (model, state) = build_model(&n.net, control, k)?;
        let names = model.channel_names();
        *out = Box::into_raw(Box::new(CfsimSimulation { sim: Simulation::new(model, state), names }));
        Ok(())
    })
}

/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_free(sim: *mut CfsimSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances the simulation by `h` seconds with one trapezoidal step.
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_step(sim: *mut CfsimSimulation, h: f64) -> CfsimStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        lift(s.sim.step(h))
    })
}

/// Scales the load at `bus` at the current time.
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_scale_load(sim: *mut CfsimSimulation, bus: i64, factor: f64) -> CfsimStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        let t = s.sim.state().t;
        lift(s.sim.apply_event(&Event::new(t, EventKind::LoadScale { bus, factor })))
    })
}

/// Current simulation time in seconds, or NaN for a null handle.
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_time(sim: *const CfsimSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.sim.state().t)
}

/// Number of output channels.
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_channel_count(sim: *const CfsimSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.names.len())
}

/// Copies the name of channel `index` into `buf` as a C string.
/// `sim` must be a live handle and `buf` valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_channel_name(
    sim: *const CfsimSimulation,
    index: usize,
    buf: *mut c_char,
    len: usize,
) -> CfsimStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let name = s
            .names
            .get(index)
            .ok_or_else(|| (CfsimStatus::InvalidArgument, format!("channel index {index} out of range")))?;
        if len <= name.len() {
            return Err((CfsimStatus::BufferTooSmall, format!("need {} bytes", name.len() + 1)));
        }
        ptr::copy_nonoverlapping(name.as_ptr() as *const c_char, buf, name.len());
        *buf.add(name.len()) = 0;
        Ok(())
    })
}

/// Writes the current value of every channel into `values`.
/// `sim` must be a live handle and `values` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cfsim_simulation_channels(
    sim: *const CfsimSimulation,
    values: *mut f64,
    len: usize,
) -> CfsimStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if values.is_null() {
            return Err(null("values"));
        }
        if len < s.names.len() {
            return Err((CfsimStatus::BufferTooSmall, format!("need {} entries, got {len}", s.names.len())));
        }
        let st = s.sim.state();
        let v = lift(s.sim.model().channel_values(&st.x, &st.y))?;
        ptr::copy_nonoverlapping(v.as_ptr(), values, v.len());
        Ok(())
    })
}

/// Eigenvalue of the frequency-control mode with the converter frequency
/// loop disconnected.
/// `net` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cfsim_frequency_mode(net: *const CfsimNetwork, re: *mut f64, im: *mut f64) -> CfsimStatus {
    guard(|| {
        let n = net.as_ref().ok_or_else(|| null("net"))?;
        if re.is_null() || im.is_null() {
            return Err(null("output"));
        }
        let pf = power_flow(&n.net, 1e-10)?;
        let (model, eq) = lift(SystemModel::assemble(&n.net, &pf, FrequencyInput::Off))?;
        let modes = lift(eigensolve(&lift(linearize(&model, &eq, DEFAULT_EPS))?))?;
        let mode = lift(identify_frequency_mode(&modes, &model.speed_indices()))?;
        *re = mode.eigenvalue.re;
        *im = mode.eigenvalue.im;
        Ok(())
    })
}

/// Instantaneous `rho` (1/s) and `omega` (rad/s) of a dq voltage with
/// derivative `(vd_dot, vq_dot)` in a frame rotating at `omega_ref`.
/// `rho` and `omega` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cfsim_complex_frequency(
    vd: f64,
    vq: f64,
    vd_dot: f64,
    vq_dot: f64,
    omega_ref: f64,
    rho: *mut f64,
    omega: *mut f64,
) -> CfsimStatus {
    guard(|| {
        if rho.is_null() || omega.is_null() {
            return Err(null("output"));
        }
        let s = lift(eta_of(ParkVector::new(vd, vq), ParkVector::new(vd_dot, vq_dot), omega_ref))?;
        *rho = s.rho;
        *omega = s.omega;
        Ok(())
    })
}
