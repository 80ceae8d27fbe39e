//! Grid-following converter-interfaced generator.
//!
//! Signal chain: an SRF-PLL estimates the frequency of the bus voltage, a
//! washout on `ln|v|` estimates the radial frequency `rho = d ln v / dt`, and
//! the frequency controller acts on either the PLL frequency or the
//! compensated signal `omega_est - K rho_est`. The controller output (droop
//! plus washout channel) shifts the active power order; a PI voltage loop sets
//! the reactive power order. Both orders become dq current references, are
//! clipped to the current rating with active-power priority and tracked by
//! first-order inner current loops.
//!
//! In the converter's dq frame (aligned with the PLL angle) the injected
//! current is `i_d - j i_q`, so `p = v i_d` and `q = v i_q` at lock.

use num_complex::Complex64;

use crate::complex_frequency::ParkVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PllParams {
    /// Proportional gain, pu frequency per pu q-axis voltage.
    pub kp: f64,
    /// Integral gain, pu frequency per pu voltage per second.
    pub ki: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PllState {
    /// PLL angle relative to the network frame, rad.
    pub theta: f64,
    /// Integrator output, pu frequency.
    pub xi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PllOutput {
    /// q-axis voltage in the PLL frame.
    pub error: f64,
    /// Estimated frequency, pu.
    pub omega_est: f64,
}

/// `omega_coi` is the speed of the network frame (pu), `omega_base` in rad/s.
pub fn pll_derivatives(
    st: &PllState,
    vbus: ParkVector,
    p: &PllParams,
    omega_coi: f64,
    omega_base: f64,
) -> (PllState, PllOutput) {
    let local = crate::complex_frequency::rotate_frame(vbus, st.theta);
    let error = local.q;
    let omega_est = 1.0 + p.kp * error + st.xi;
    let rate = PllState { theta: omega_base * (omega_est - omega_coi), xi: p.ki * error };
    (rate, PllOutput { error, omega_est })
}

/// Washout `s / (1 + s T_f)` applied to `u = ln v`; the state is the
/// low-passed `u`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RhoEstimatorState {
    pub z: f64,
}

/// Returns the state derivative and the estimated radial frequency (1/s).
pub fn estimate_rho(st: &RhoEstimatorState, v_mag: f64, t_f: f64) -> Result<(f64, f64)> {
    if !(v_mag > 0.0) {
        return Err(Error::ZeroMagnitude);
    }
    let rho = (v_mag.ln() - st.z) / t_f;
    Ok((rho, rho))
}

/// Compensated frequency signal `omega_est - K rho_est`.
pub fn modified_signal(omega_est: f64, rho_est: f64, k: f64) -> f64 {
    omega_est - k * rho_est
}

/// Which signal drives the converter's frequency controller.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrequencyInput {
    /// Frequency controller disconnected.
    Off,
    /// PLL frequency estimate.
    #[default]
    Omega,
    /// `omega_est - K rho_est`.
    OmegaTilde,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CigControlParams {
    pub p_ref: f64,
    pub q_ref: f64,
    /// Compensation gain on `rho`; any sign.
    pub k: f64,
    /// Droop, pu frequency per pu power.
    pub r_c: f64,
    /// Washout channel gain (pu power per pu frequency) and time constant.
    pub k_w: f64,
    pub t_w: f64,
    pub kp_v: f64,
    pub ki_v: f64,
    /// Inner current loop time constant.
    pub t_i: f64,
    pub i_max: f64,
    pub pll: PllParams,
    /// Time constant of the rho estimator.
    pub t_f: f64,
}

impl CigControlParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.i_max > 0.0
            && self.t_w > 0.0
            && self.t_i > 0.0
            && self.t_f > 0.0
            && self.r_c > 0.0
            && self.pll.ki > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("inconsistent converter parameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CigState {
    pub pll: PllState,
    pub rho: RhoEstimatorState,
    /// Washout channel state (low-passed frequency signal).
    pub washout: f64,
    /// Voltage PI integrator, pu reactive power.
    pub v_int: f64,
    pub id: f64,
    pub iq: f64,
}

impl CigState {
    pub const LEN: usize = 7;

    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            pll: PllState { theta: x[0], xi: x[1] },
            rho: RhoEstimatorState { z: x[2] },
            washout: x[3],
            v_int: x[4],
            id: x[5],
            iq: x[6],
        }
    }

    pub fn write(&self, out: &mut [f64]) {
        out[..Self::LEN].copy_from_slice(&[
            self.pll.theta,
            self.pll.xi,
            self.rho.z,
            self.washout,
            self.v_int,
            self.id,
            self.iq,
        ]);
    }

    pub fn labels() -> [&'static str; Self::LEN] {
        ["theta_pll", "xi_pll", "z_rho", "w_washout", "xi_v", "i_d", "i_q"]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CigSetpoints {
    pub v_ref: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterLoopOutput {
    pub id_ref: f64,
    pub iq_ref: f64,
    pub p_cmd: f64,
    pub q_cmd: f64,
    pub washout_rate: f64,
    pub v_int_rate: f64,
}

/// Clips `(id, iq)` to the circle of radius `i_max`, giving priority to the
/// active component.
pub fn limit_currents(id: f64, iq: f64, i_max: f64) -> (f64, f64) {
    let id = id.clamp(-i_max, i_max);
    let iq_max = (i_max * i_max - id * id).max(0.0).sqrt();
    (id, iq.clamp(-iq_max, iq_max))
}

/// Outer frequency and voltage controllers. `signal` is the frequency input
/// (pu) or `None` when the frequency loop is switched off.
pub fn outer_loops(
    st: &CigState,
    v_mag: f64,
    p: &CigControlParams,
    set: &CigSetpoints,
    signal: Option<f64>,
) -> OuterLoopOutput {
    let (dp, washout_rate) = match signal {
        Some(s) => {
            let rate = (s - st.washout) / p.t_w;
            (-(s - 1.0) / p.r_c - p.k_w * rate, rate)
        }
        None => (0.0, (1.0 - st.washout) / p.t_w),
    };
    let v_err = set.v_ref - v_mag;
    let p_cmd = p.p_ref + dp;
    let q_cmd = p.q_ref + p.kp_v * v_err + st.v_int;
    let (id_ref, iq_ref) = limit_currents(p_cmd / v_mag, q_cmd / v_mag, p.i_max);
    OuterLoopOutput { id_ref, iq_ref, p_cmd, q_cmd, washout_rate, v_int_rate: p.ki_v * v_err }
}

/// First-order current tracking; returns `(did/dt, diq/dt)` and the current
/// injected into the network frame.
pub fn inner_loop_and_injection(st: &CigState, id_ref: f64, iq_ref: f64, t_i: f64) -> ((f64, f64), Complex64) {
    let rates = ((id_ref - st.id) / t_i, (iq_ref - st.iq) / t_i);
    let current = Complex64::new(st.id, -st.iq) * Complex64::from_polar(1.0, st.pll.theta);
    (rates, current)
}

/// Everything the converter exposes at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CigOutputs {
    pub omega_est: f64,
    pub rho_est: f64,
    pub omega_tilde: f64,
    pub pll_error: f64,
    pub current: Complex64,
}

/// Full converter derivative.
pub fn cig_derivatives(
    st: &CigState,
    vbus: ParkVector,
    p: &CigControlParams,
    set: &CigSetpoints,
    input: FrequencyInput,
    omega_coi: f64,
    omega_base: f64,
) -> Result<(CigState, CigOutputs)> {
    let v_mag = vbus.magnitude();
    let (pll_rate, pll_out) = pll_derivatives(&st.pll, vbus, &p.pll, omega_coi, omega_base);
    let (z_rate, rho_est) = estimate_rho(&st.rho, v_mag, p.t_f)?;
    let omega_tilde = modified_signal(pll_out.omega_est, rho_est, p.k);
    let signal = match input {
        FrequencyInput::Off => None,
        FrequencyInput::Omega => Some(pll_out.omega_est),
        FrequencyInput::OmegaTilde => Some(omega_tilde),
    };
    let outer = outer_loops(st, v_mag, p, set, signal);
    let ((id_rate, iq_rate), current) = inner_loop_and_injection(st, outer.id_ref, outer.iq_ref, p.t_i);
    let rate = CigState {
        pll: pll_rate,
        rho: RhoEstimatorState { z: z_rate },
        washout: outer.washout_rate,
        v_int: outer.v_int_rate,
        id: id_rate,
        iq: iq_rate,
    };
    let out = CigOutputs { omega_est: pll_out.omega_est, rho_est, omega_tilde, pll_error: pll_out.error, current };
    Ok((rate, out))
}

/// Equilibrium state for a converter at terminal voltage `vbus` delivering
/// its scheduled `p_ref + j q_ref`.
pub fn initialize_cig(vbus: Complex64, p: &CigControlParams) -> Result<(CigState, CigSetpoints)> {
    let v = vbus.norm();
    if v == 0.0 {
        return Err(Error::ZeroMagnitude);
    }
    let (id, iq) = (p.p_ref / v, p.q_ref / v);
    let i = id.hypot(iq);
    if i > p.i_max {
        return Err(Error::LimitViolation(format!("converter current {i:.4} exceeds rating {}", p.i_max)));
    }
    let st = CigState {
        pll: PllState { theta: vbus.arg(), xi: 0.0 },
        rho: RhoEstimatorState { z: v.ln() },
        washout: 1.0,
        v_int: 0.0,
        id,
        iq,
    };
    Ok((st, CigSetpoints { v_ref: v }))
}
