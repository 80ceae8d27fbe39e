//! Complex frequency of a dq voltage signal.
//!
//! For a Park vector `v = v_d + j v_q` measured in a frame rotating at
//! `omega_ref`, the logarithmic derivative `dv/dt / v = rho + j (omega - omega_ref)`
//! splits into the radial frequency `rho = d ln|v| / dt` and the
//! instantaneous frequency `omega`. Both are geometric invariants: changing
//! the constant speed of the measuring frame changes the components of `v`
//! but not `rho` or `omega`, provided `omega_ref` is changed accordingly.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// dq components of a voltage (or its time derivative), per unit.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParkVector {
    pub d: f64,
    pub q: f64,
}

impl ParkVector {
    pub const fn new(d: f64, q: f64) -> Self {
        Self { d, q }
    }

    pub fn from_complex(c: Complex64) -> Self {
        Self { d: c.re, q: c.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.d, self.q)
    }

    pub fn magnitude(self) -> f64 {
        self.d.hypot(self.q)
    }

    pub fn angle(self) -> f64 {
        self.q.atan2(self.d)
    }
}

/// The pair `(rho, omega)`; `rho` in 1/s, `omega` in rad/s (or whatever unit
/// `omega_ref` was given in).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexFrequencySample {
    pub rho: f64,
    pub omega: f64,
}

impl ComplexFrequencySample {
    /// `rho + j omega`
    pub fn eta(self) -> Complex64 {
        Complex64::new(self.rho, self.omega)
    }
}

fn squared_magnitude(v: ParkVector) -> Result<f64> {
    let v2 = v.d * v.d + v.q * v.q;
    if v2 == 0.0 || !v2.is_finite() {
        return Err(Error::ZeroMagnitude);
    }
    Ok(v2)
}

/// Instantaneous frequency `(v_d v̇_q - v_q v̇_d) / v^2 + omega_ref`.
pub fn omega_of(v: ParkVector, vdot: ParkVector, omega_ref: f64) -> Result<f64> {
    let v2 = squared_magnitude(v)?;
    Ok((v.d * vdot.q - v.q * vdot.d) / v2 + omega_ref)
}

/// Radial frequency `(v_d v̇_d + v_q v̇_q) / v^2 = v̇ / v`.
pub fn rho_of(v: ParkVector, vdot: ParkVector) -> Result<f64> {
    let v2 = squared_magnitude(v)?;
    Ok((v.d * vdot.d + v.q * vdot.q) / v2)
}

pub fn eta_of(v: ParkVector, vdot: ParkVector, omega_ref: f64) -> Result<ComplexFrequencySample> {
    Ok(ComplexFrequencySample { rho: rho_of(v, vdot)?, omega: omega_of(v, vdot, omega_ref)? })
}

/// Components of `v` in a frame advanced by `delta_theta` with respect to the
/// frame `v` is expressed in, i.e. `v e^{-j delta_theta}`.
pub fn rotate_frame(v: ParkVector, delta_theta: f64) -> ParkVector {
    let (s, c) = delta_theta.sin_cos();
    ParkVector { d: c * v.d + s * v.q, q: c * v.q - s * v.d }
}

/// Decaying oscillation of a bus voltage around a constant phasor, as seen
/// from the centre-of-inertia frame:
///
/// ```text
/// v_d = V - k e^{-αt} cos βt,   v_q = k e^{-αt} sin βt
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticExampleParams {
    pub v: f64,
    pub k: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Exact and first-order values of `(rho, omega - omega_coi)` for the
/// analytic transient at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticSample {
    pub v: ParkVector,
    pub vdot: ParkVector,
    pub exact: ComplexFrequencySample,
    pub approx: ComplexFrequencySample,
}

/// Evaluates the analytic transient at time `t`. The `omega` fields of the
/// returned samples hold the deviation from the frame speed.
pub fn analytic_example(p: &AnalyticExampleParams, t: f64) -> Result<AnalyticSample> {
    if p.v <= 0.0 {
        return Err(Error::InvalidArgument(format!("V must be positive, got {}", p.v)));
    }
    let e = p.k * (-p.alpha * t).exp();
    if p.v - e.abs() <= 0.0 {
        return Err(Error::ZeroMagnitude);
    }
    let (s, c) = (p.beta * t).sin_cos();
    let v = ParkVector::new(p.v - e * c, e * s);
    let vdot = ParkVector::new(e * (p.alpha * c + p.beta * s), e * (p.beta * c - p.alpha * s));
    let exact = eta_of(v, vdot, 0.0)?;
    let approx = ComplexFrequencySample {
        rho: e / p.v * (p.beta * s + p.alpha * c),
        omega: e / p.v * (p.beta * c - p.alpha * s),
    };
    Ok(AnalyticSample { v, vdot, exact, approx })
}
