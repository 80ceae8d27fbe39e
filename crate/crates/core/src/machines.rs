//! Two-axis synchronous machine with an IEEE Type-I exciter and a droop
//! governor (first-order servo plus first-order turbine).
//!
//! Machine quantities are per unit on the system base. The rotor frame is
//! placed so that `(v_d + j v_q) e^{j(δ - π/2)}` is the terminal voltage in
//! the network frame; the network frame itself rotates at the
//! centre-of-inertia speed, so `dδ/dt = ω_b (ω - ω_coi)`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::complex_frequency::ParkVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynMachineParams {
    /// Inertia constant, s, on the system base.
    pub h: f64,
    /// Damping, pu torque per pu speed deviation from nominal.
    pub d: f64,
    pub ra: f64,
    pub xd: f64,
    pub xq: f64,
    pub xd1: f64,
    pub xq1: f64,
    pub td01: f64,
    pub tq01: f64,
    /// MVA rating.
    pub s_rated: f64,
}

impl SynMachineParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.h > 0.0
            && self.xd >= self.xd1
            && self.xd1 > 0.0
            && self.xq >= self.xq1
            && self.xq1 > 0.0
            && self.td01 > 0.0
            && self.tq01 > 0.0
            && self.s_rated > 0.0
            && self.ra >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("inconsistent machine parameters {self:?}")))
        }
    }
}

/// IEEE Type-I exciter without saturation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AvrParams {
    pub ka: f64,
    pub ta: f64,
    pub ke: f64,
    pub te: f64,
    pub kf: f64,
    pub tf: f64,
    pub vr_min: f64,
    pub vr_max: f64,
}

impl AvrParams {
    pub fn validate(&self) -> Result<()> {
        if self.ta > 0.0 && self.te > 0.0 && self.tf > 0.0 && self.vr_min < self.vr_max {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("inconsistent exciter parameters {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GovParams {
    /// Droop, pu speed per pu power.
    pub r: f64,
    pub ts: f64,
    pub tch: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl GovParams {
    pub fn validate(&self) -> Result<()> {
        if self.r > 0.0 && self.ts > 0.0 && self.tch > 0.0 && self.p_min < self.p_max {
            Ok(())
        } else {
            Err(Error::InvalidData(format!("inconsistent governor parameters {self:?}")))
        }
    }
}

/// Differential states of one machine, in the order used by the state vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SynMachineState {
    pub delta: f64,
    pub omega: f64,
    pub eq1: f64,
    pub ed1: f64,
    /// Exciter field voltage.
    pub efd: f64,
    /// Rate feedback.
    pub rf: f64,
    /// Regulator output.
    pub vr: f64,
    /// Servo (valve) position.
    pub psv: f64,
    /// Mechanical power.
    pub pm: f64,
}

impl SynMachineState {
    pub const LEN: usize = 9;
    pub const OMEGA: usize = 1;

    pub fn from_slice(x: &[f64]) -> Self {
        Self { delta: x[0], omega: x[1], eq1: x[2], ed1: x[3], efd: x[4], rf: x[5], vr: x[6], psv: x[7], pm: x[8] }
    }

    pub fn write(&self, out: &mut [f64]) {
        out[..Self::LEN].copy_from_slice(&[
            self.delta, self.omega, self.eq1, self.ed1, self.efd, self.rf, self.vr, self.psv, self.pm,
        ]);
    }

    pub fn labels() -> [&'static str; Self::LEN] {
        ["delta", "omega", "eq1", "ed1", "efd", "rf", "vr", "psv", "pm"]
    }
}

/// References fixed at initialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MachineSetpoints {
    pub v_ref: f64,
    pub p_ref: f64,
}

fn to_rotor(v: ParkVector, delta: f64) -> ParkVector {
    let r = v.to_complex() * Complex64::from_polar(1.0, -(delta - FRAC_PI_2));
    ParkVector::from_complex(r)
}

fn stator_currents(st: &SynMachineState, vm: ParkVector, p: &SynMachineParams) -> Result<(f64, f64)> {
    let det = p.ra * p.ra + p.xd1 * p.xq1;
    if det == 0.0 {
        return Err(Error::SingularStator);
    }
    let a = st.ed1 - vm.d;
    let b = st.eq1 - vm.q;
    let id = (p.ra * a + p.xq1 * b) / det;
    let iq = (p.ra * b - p.xd1 * a) / det;
    Ok((id, iq))
}

/// Current injected into the network by the machine, in the network frame.
pub fn sm_current_injection(st: &SynMachineState, vbus: ParkVector, p: &SynMachineParams) -> Result<Complex64> {
    let (id, iq) = stator_currents(st, to_rotor(vbus, st.delta), p)?;
    Ok(Complex64::new(id, iq) * Complex64::from_polar(1.0, st.delta - FRAC_PI_2))
}

/// Air-gap power `e'_d i_d + e'_q i_q + (x'_q - x'_d) i_d i_q`.
pub fn electrical_power(st: &SynMachineState, vbus: ParkVector, p: &SynMachineParams) -> Result<f64> {
    let (id, iq) = stator_currents(st, to_rotor(vbus, st.delta), p)?;
    Ok(st.ed1 * id + st.eq1 * iq + (p.xq1 - p.xd1) * id * iq)
}

fn limited_rate(value: f64, rate: f64, lo: f64, hi: f64) -> f64 {
    if (value >= hi && rate > 0.0) || (value <= lo && rate < 0.0) {
        0.0
    } else {
        rate
    }
}

/// Time derivatives of the machine, exciter and governor states.
#[allow(clippy::too_many_arguments)]
pub fn sm_derivatives(
    st: &SynMachineState,
    vbus: ParkVector,
    p: &SynMachineParams,
    avr: &AvrParams,
    gov: &GovParams,
    set: &MachineSetpoints,
    omega_coi: f64,
    omega_base: f64,
) -> Result<SynMachineState> {
    let vm = to_rotor(vbus, st.delta);
    let (id, iq) = stator_currents(st, vm, p)?;
    let pe = st.ed1 * id + st.eq1 * iq + (p.xq1 - p.xd1) * id * iq;
    let slip = st.omega - omega_coi;
    let vt = vbus.magnitude();

    let vr_rate = (-st.vr + avr.ka * st.rf - avr.ka * avr.kf / avr.tf * st.efd + avr.ka * (set.v_ref - vt)) / avr.ta;
    let psv_rate = (-st.psv + set.p_ref - (st.omega - 1.0) / gov.r) / gov.ts;

    Ok(SynMachineState {
        delta: omega_base * slip,
        omega: (st.pm - pe - p.d * (st.omega - 1.0)) / (2.0 * p.h),
        eq1: (-st.eq1 - (p.xd - p.xd1) * id + st.efd) / p.td01,
        ed1: (-st.ed1 + (p.xq - p.xq1) * iq) / p.tq01,
        efd: (-avr.ke * st.efd + st.vr) / avr.te,
        rf: (-st.rf + avr.kf / avr.tf * st.efd) / avr.tf,
        vr: limited_rate(st.vr, vr_rate, avr.vr_min, avr.vr_max),
        psv: limited_rate(st.psv, psv_rate, gov.p_min, gov.p_max),
        pm: (-st.pm + st.psv) / gov.tch,
    })
}

/// Inertia-weighted mean speed `Σ H_i ω_i / Σ H_i` (system-base inertia).
pub fn coi_frequency(speeds: &[f64], params: &[SynMachineParams]) -> Result<f64> {
    if speeds.is_empty() || speeds.len() != params.len() {
        return Err(Error::InvalidArgument(format!(
            "COI needs matching non-empty speed and parameter lists ({} vs {})",
            speeds.len(),
            params.len()
        )));
    }
    let (num, den) = speeds.iter().zip(params).fold((0.0, 0.0), |(n, d), (w, p)| (n + p.h * w, d + p.h));
    Ok(num / den)
}

/// Equilibrium state and references for a machine delivering `s_gen`
/// (P + jQ, pu) at terminal voltage `vbus`.
pub fn initialize_sm(
    vbus: Complex64,
    s_gen: Complex64,
    p: &SynMachineParams,
    avr: &AvrParams,
    gov: &GovParams,
) -> Result<(SynMachineState, MachineSetpoints)> {
    if vbus.norm() == 0.0 {
        return Err(Error::ZeroMagnitude);
    }
    let i = (s_gen / vbus).conj();
    let eq_axis = vbus + Complex64::new(p.ra, p.xq) * i;
    let delta = eq_axis.arg();
    let rot = Complex64::from_polar(1.0, -(delta - FRAC_PI_2));
    let vm = vbus * rot;
    let im = i * rot;
    let (id, iq) = (im.re, im.im);

    let ed1 = (p.xq - p.xq1) * iq;
    let eq1 = vm.im + p.ra * iq + p.xd1 * id;
    let efd = eq1 + (p.xd - p.xd1) * id;
    let vr = avr.ke * efd;
    if vr > avr.vr_max || vr < avr.vr_min {
        return Err(Error::LimitViolation(format!("exciter output {vr:.4} outside [{}, {}]", avr.vr_min, avr.vr_max)));
    }
    let pm = ed1 * id + eq1 * iq + (p.xq1 - p.xd1) * id * iq;
    if pm > gov.p_max || pm < gov.p_min {
        return Err(Error::LimitViolation(format!("mechanical power {pm:.4} outside [{}, {}]", gov.p_min, gov.p_max)));
    }
    let st = SynMachineState { delta, omega: 1.0, eq1, ed1, efd, rf: avr.kf / avr.tf * efd, vr, psv: pm, pm };
    let set = MachineSetpoints { v_ref: vbus.norm() + vr / avr.ka, p_ref: pm };
    Ok((st, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const WB: f64 = 376.99111843077515;

    fn gen2() -> (SynMachineParams, AvrParams, GovParams) {
        (
            SynMachineParams {
                h: 4.0,
                d: 2.0,
                ra: 0.0,
                xd: 0.8958,
                xq: 0.8645,
                xd1: 0.1198,
                xq1: 0.1969,
                td01: 6.0,
                tq01: 0.535,
                s_rated: 100.0,
            },
            AvrParams { ka: 20.0, ta: 0.2, ke: 1.0, te: 0.314, kf: 0.063, tf: 0.35, vr_min: -5.0, vr_max: 5.0 },
            GovParams { r: 0.05, ts: 0.5, tch: 8.0, p_min: 0.0, p_max: 2.0 },
        )
    }

    #[test]
    fn initialized_machine_is_at_rest() {
        let (p, avr, gov) = gen2();
        let v = Complex64::from_polar(1.025, 0.16);
        let (st, set) = initialize_sm(v, Complex64::new(1.63, 0.067), &p, &avr, &gov).unwrap();
        let d = sm_derivatives(&st, ParkVector::from_complex(v), &p, &avr, &gov, &set, 1.0, WB).unwrap();
        let mut buf = [0.0; SynMachineState::LEN];
        d.write(&mut buf);
        assert!(buf.iter().all(|r| r.abs() < 1e-12), "{buf:?}");
        let i = sm_current_injection(&st, ParkVector::from_complex(v), &p).unwrap();
        let s = v * i.conj();
        assert_abs_diff_eq!(s.re, 1.63, epsilon = 1e-12);
        assert_abs_diff_eq!(s.im, 0.067, epsilon = 1e-12);
    }

    #[test]
    fn mechanical_step_accelerates_rotor() {
        let (p, avr, gov) = gen2();
        let v = Complex64::from_polar(1.0, 0.0);
        let (mut st, set) = initialize_sm(v, Complex64::new(0.8, 0.1), &p, &avr, &gov).unwrap();
        st.pm += 0.1;
        let d = sm_derivatives(&st, ParkVector::from_complex(v), &p, &avr, &gov, &set, 1.0, WB).unwrap();
        assert_abs_diff_eq!(d.omega, 0.1 / (2.0 * p.h), epsilon = 1e-12);
    }

    #[test]
    fn no_load_angle() {
        let (p, avr, gov) = gen2();
        let (st, _) = initialize_sm(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), &p, &avr, &gov).unwrap();
        assert_eq!(st.delta, 0.0);
        assert_eq!(st.omega, 1.0);
        assert_abs_diff_eq!(st.eq1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn equal_emf_gives_no_current() {
        let (p, _, _) = gen2();
        let st = SynMachineState { delta: 0.3, eq1: 1.05, ..Default::default() };
        let v = ParkVector::from_complex(Complex64::from_polar(1.05, 0.3));
        let i = sm_current_injection(&st, v, &p).unwrap();
        assert!(i.norm() < 1e-12);
    }

    #[test]
    fn pure_reactance_obeys_ohms_law() {
        let x = 0.2;
        let p = SynMachineParams { ra: 0.0, xd1: x, xq1: x, xq: x, ..gen2().0 };
        let st = SynMachineState { delta: 0.4, ed1: 0.1, eq1: 1.1, ..Default::default() };
        let v = Complex64::from_polar(1.0, -0.1);
        let e = Complex64::new(st.ed1, st.eq1) * Complex64::from_polar(1.0, st.delta - FRAC_PI_2);
        let expect = (e - v) / Complex64::new(0.0, x);
        let i = sm_current_injection(&st, ParkVector::from_complex(v), &p).unwrap();
        assert!((i - expect).norm() < 1e-13);
    }

    #[test]
    fn singular_stator() {
        let p = SynMachineParams { ra: 0.0, xd1: 0.0, ..gen2().0 };
        let err = sm_current_injection(&SynMachineState::default(), ParkVector::new(1.0, 0.0), &p).unwrap_err();
        assert!(matches!(err, Error::SingularStator));
    }

    #[test]
    fn coi_examples() {
        let (p, _, _) = gen2();
        let ps = [p, p];
        assert_abs_diff_eq!(coi_frequency(&[1.0, 1.02], &ps).unwrap(), 1.01, epsilon = 1e-15);
        assert_eq!(coi_frequency(&[0.997], &ps[..1]).unwrap(), 0.997);
        let wscc: Vec<SynMachineParams> = [4.0, 4.0, 3.0].iter().map(|&h| SynMachineParams { h, ..p }).collect();
        // (4 + 4 + 3 * 1.011) / 11 = 1.003
        assert_abs_diff_eq!(coi_frequency(&[1.0, 1.0, 1.011], &wscc).unwrap(), 1.003, epsilon = 1e-12);
        assert!(coi_frequency(&[], &[]).is_err());
    }

    #[test]
    fn dispatch_above_pmax_rejected() {
        let (p, avr, gov) = gen2();
        let err = initialize_sm(Complex64::new(1.0, 0.0), Complex64::new(2.5, 0.0), &p, &avr, &gov).unwrap_err();
        assert!(matches!(err, Error::LimitViolation(_)));
    }

    #[test]
    fn governor_limit_holds_valve() {
        let (p, avr, gov) = gen2();
        let v = Complex64::new(1.0, 0.0);
        let (mut st, set) = initialize_sm(v, Complex64::new(0.5, 0.0), &p, &avr, &gov).unwrap();
        st.psv = gov.p_max;
        st.omega = 0.9;
        let d = sm_derivatives(&st, ParkVector::from_complex(v), &p, &avr, &gov, &set, 1.0, WB).unwrap();
        assert_eq!(d.psv, 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn coi_is_convex_combination(
                speeds in proptest::collection::vec(0.9f64..1.1, 1..6),
                hs in proptest::collection::vec(0.5f64..10.0, 6),
            ) {
                let (p, _, _) = gen2();
                let ps: Vec<_> = speeds.iter().zip(&hs).map(|(_, &h)| SynMachineParams { h, ..p }).collect();
                let w = coi_frequency(&speeds, &ps).unwrap();
                let lo = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(w >= lo - 1e-15 && w <= hi + 1e-15);
            }
        }
    }
}
