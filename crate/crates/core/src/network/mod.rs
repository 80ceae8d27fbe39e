//! Static network data: buses, branches, device records, admittance matrix
//! and event mutations.
//!
//! All electrical quantities are per-unit on `s_base`. Bus ids are the
//! external integer labels used in case files; internal arrays are indexed by
//! position in [`Network::buses`].

mod case;
mod powerflow;

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cig::CigControlParams;
use crate::error::{Error, Result};
use crate::machines::{AvrParams, GovParams, SynMachineParams};

pub use case::parse_case;
pub use powerflow::{solve_power_flow, PfSolution};

/// Default conductance of a bolted fault, pu.
pub const DEFAULT_FAULT_CONDUCTANCE: f64 = 1.0e4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BusKind {
    Pq,
    Pv,
    Slack,
}

impl BusKind {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(BusKind::Pq),
            2 => Some(BusKind::Pv),
            3 => Some(BusKind::Slack),
            _ => None,
        }
    }

    pub fn code(self) -> i64 {
        match self {
            BusKind::Pq => 1,
            BusKind::Pv => 2,
            BusKind::Slack => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bus {
    pub id: i64,
    pub kind: BusKind,
    /// Voltage set point for PV and slack buses.
    pub v_set: f64,
    pub p_load: f64,
    pub q_load: f64,
    pub p_gen: f64,
    pub q_gen: f64,
    /// Last solved magnitude (flat 1.0 until a power flow is applied).
    pub v_mag: f64,
    pub v_ang: f64,
    pub shunt_g: f64,
    pub shunt_b: f64,
    /// Fault conductance currently applied at the bus; zero when healthy.
    pub fault_g: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub from: i64,
    pub to: i64,
    pub r: f64,
    pub x: f64,
    pub b_half: f64,
    pub tap: f64,
    pub in_service: bool,
}

/// A synchronous machine attached to a bus, with its exciter and governor.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineRecord {
    pub bus: i64,
    pub params: SynMachineParams,
    pub avr: AvrParams,
    pub gov: GovParams,
}

/// A converter-interfaced generator attached to a bus.
///
/// `redispatch_bus` names the machine bus whose dispatch was reduced to make
/// room for the converter; [`Network::without_cigs`] hands the power back.
#[derive(Clone, Debug, PartialEq)]
pub struct CigRecord {
    pub bus: i64,
    pub redispatch_bus: i64,
    pub params: CigControlParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub machines: Vec<MachineRecord>,
    pub cigs: Vec<CigRecord>,
    pub s_base: f64,
    pub f_base: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    /// Multiply the constant-power load at `bus` by `factor`.
    LoadScale { bus: i64, factor: f64 },
    /// Apply a shunt conductance `admittance` (pu) at `bus`.
    FaultOn { bus: i64, admittance: f64 },
    /// Clear the fault at `bus`.
    FaultOff { bus: i64 },
}

impl EventKind {
    pub fn bus(&self) -> i64 {
        match *self {
            EventKind::LoadScale { bus, .. } | EventKind::FaultOn { bus, .. } | EventKind::FaultOff { bus } => bus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl Event {
    pub fn new(time: f64, kind: EventKind) -> Self {
        Self { time, kind }
    }
}

impl Network {
    /// The bundled low-inertia WSCC 9-bus case with a converter at bus 7.
    pub fn wscc9() -> Network {
        parse_case(WSCC9_CASE).expect("bundled WSCC case is valid")
    }

    pub fn bus_index(&self) -> HashMap<i64, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    pub fn index_of(&self, id: i64) -> Result<usize> {
        self.buses.iter().position(|b| b.id == id).ok_or(Error::UnknownBus(id))
    }

    pub fn slack_index(&self) -> Result<usize> {
        let slacks: Vec<usize> =
            self.buses.iter().enumerate().filter(|(_, b)| b.kind == BusKind::Slack).map(|(i, _)| i).collect();
        match slacks.as_slice() {
            [i] => Ok(*i),
            _ => Err(Error::SlackCount(slacks.len())),
        }
    }

    /// Angular base frequency in rad/s.
    pub fn omega_base(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f_base
    }

    /// Checks the structural invariants that `parse_case` guarantees. Useful
    /// after building a network programmatically.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for b in &self.buses {
            if seen.insert(b.id, ()).is_some() {
                return Err(Error::DuplicateId { what: "bus", id: b.id });
            }
        }
        self.slack_index()?;
        for br in &self.branches {
            self.index_of(br.from)?;
            self.index_of(br.to)?;
            if br.from == br.to {
                return Err(Error::InvalidData(format!("branch {}-{} is a self loop", br.from, br.to)));
            }
            if br.x == 0.0 {
                return Err(Error::InvalidData(format!("branch {}-{} has zero reactance", br.from, br.to)));
            }
            if br.tap <= 0.0 {
                return Err(Error::InvalidData(format!("branch {}-{} has nonpositive tap", br.from, br.to)));
            }
        }
        let mut machine_buses = HashMap::new();
        for m in &self.machines {
            let i = self.index_of(m.bus)?;
            if self.buses[i].kind == BusKind::Pq {
                return Err(Error::InvalidData(format!("machine at PQ bus {}", m.bus)));
            }
            if machine_buses.insert(m.bus, ()).is_some() {
                return Err(Error::DuplicateId { what: "machine bus", id: m.bus });
            }
            m.params.validate()?;
            m.avr.validate()?;
            m.gov.validate()?;
        }
        for c in &self.cigs {
            self.index_of(c.bus)?;
            self.index_of(c.redispatch_bus)?;
            c.params.validate()?;
        }
        Ok(())
    }

    /// Scheduled net (P, Q) injection at each bus from static data and
    /// converter set points.
    pub fn scheduled_injections(&self) -> Vec<Complex64> {
        let idx = self.bus_index();
        let mut s: Vec<Complex64> =
            self.buses.iter().map(|b| Complex64::new(b.p_gen - b.p_load, b.q_gen - b.q_load)).collect();
        for c in &self.cigs {
            s[idx[&c.bus]] += Complex64::new(c.params.p_ref, c.params.q_ref);
        }
        s
    }

    /// Copy of the network with every converter removed and its active power
    /// set point returned to the generator at its redispatch bus.
    pub fn without_cigs(&self) -> Network {
        let mut net = self.clone();
        let idx = net.bus_index();
        for c in &self.cigs {
            if let Some(&i) = idx.get(&c.redispatch_bus) {
                net.buses[i].p_gen += c.params.p_ref;
            }
        }
        net.cigs.clear();
        net
    }

    /// Returns a copy of the network with `event` applied.
    pub fn apply_event(&self, event: &EventKind) -> Result<Network> {
        let mut net = self.clone();
        let i = net.index_of(event.bus())?;
        let bus = &mut net.buses[i];
        match *event {
            EventKind::LoadScale { factor, .. } => {
                bus.p_load *= factor;
                bus.q_load *= factor;
            }
            EventKind::FaultOn { admittance, .. } => bus.fault_g = admittance,
            EventKind::FaultOff { .. } => bus.fault_g = 0.0,
        }
        Ok(net)
    }

    /// Dense bus admittance matrix.
    pub fn build_ybus(&self) -> DMatrix<Complex64> {
        let n = self.buses.len();
        let idx = self.bus_index();
        let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for br in self.branches.iter().filter(|b| b.in_service) {
            let (f, t) = (idx[&br.from], idx[&br.to]);
            let ys = Complex64::new(1.0, 0.0) / Complex64::new(br.r, br.x);
            let ysh = Complex64::new(0.0, br.b_half);
            let tap = br.tap;
            y[(f, f)] += (ys + ysh) / (tap * tap);
            y[(t, t)] += ys + ysh;
            y[(f, t)] -= ys / tap;
            y[(t, f)] -= ys / tap;
        }
        for (i, b) in self.buses.iter().enumerate() {
            y[(i, i)] += Complex64::new(b.shunt_g + b.fault_g, b.shunt_b);
        }
        y
    }

    /// Stores a solved voltage profile in the bus records.
    pub fn with_solution(&self, pf: &PfSolution) -> Network {
        let mut net = self.clone();
        for (b, (&m, &a)) in net.buses.iter_mut().zip(pf.v_mag.iter().zip(&pf.v_ang)) {
            b.v_mag = m;
            b.v_ang = a;
        }
        net
    }
}

pub(crate) const WSCC9_CASE: &str = include_str!("../../data/wscc9.case");

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_bus(x: f64, in_service: bool) -> Network {
        let text = format!(
            "SYSTEM\n100 60\nBUS\n1 3 1.0 0 0 0 0 0 0\n2 1 1.0 0 0 0 0 0 0\nBRANCH\n1 2 0 {x} 0 1 {}\n",
            if in_service { 1 } else { 0 }
        );
        parse_case(&text).unwrap()
    }

    #[test]
    fn single_branch_ybus() {
        let y = two_bus(0.1, true).build_ybus();
        assert_abs_diff_eq!(y[(0, 0)].im, -10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 1)].im, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(1, 0)].im, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(1, 1)].im, -10.0, epsilon = 1e-12);
        assert!(y.iter().all(|c| c.re.abs() < 1e-12));
    }

    #[test]
    fn out_of_service_branch_contributes_nothing() {
        let y = two_bus(0.1, false).build_ybus();
        assert!(y.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn wscc_row_sums_equal_local_shunts() {
        let net = Network::wscc9();
        let y = net.build_ybus();
        let idx = net.bus_index();
        // independent oracle: sum the charging of incident branches
        let mut shunt = vec![Complex64::new(0.0, 0.0); net.buses.len()];
        for br in &net.branches {
            shunt[idx[&br.from]] += Complex64::new(0.0, br.b_half);
            shunt[idx[&br.to]] += Complex64::new(0.0, br.b_half);
        }
        for (i, b) in net.buses.iter().enumerate() {
            shunt[i] += Complex64::new(b.shunt_g, b.shunt_b);
            let row: Complex64 = (0..net.buses.len()).map(|j| y[(i, j)]).sum();
            assert!((row - shunt[i]).norm() < 1e-10, "row {i}: {row} vs {}", shunt[i]);
        }
    }

    #[test]
    fn load_scale_halves_bus5() {
        let net = Network::wscc9();
        let after = net.apply_event(&EventKind::LoadScale { bus: 5, factor: 0.5 }).unwrap();
        let i = net.index_of(5).unwrap();
        assert_eq!(after.buses[i].p_load, 0.5 * net.buses[i].p_load);
        assert_eq!(after.buses[i].q_load, 0.5 * net.buses[i].q_load);
    }

    #[test]
    fn unit_load_scale_is_identity() {
        let net = Network::wscc9();
        let after = net.apply_event(&EventKind::LoadScale { bus: 6, factor: 1.0 }).unwrap();
        assert_eq!(net, after);
    }

    #[test]
    fn fault_on_off_restores_network() {
        let net = Network::wscc9();
        let on = net.apply_event(&EventKind::FaultOn { bus: 4, admittance: DEFAULT_FAULT_CONDUCTANCE }).unwrap();
        assert_ne!(net.build_ybus(), on.build_ybus());
        let off = on.apply_event(&EventKind::FaultOff { bus: 4 }).unwrap();
        assert_eq!(net, off);
    }

    #[test]
    fn event_on_unknown_bus() {
        let net = Network::wscc9();
        let err = net.apply_event(&EventKind::FaultOff { bus: 42 }).unwrap_err();
        assert!(matches!(err, Error::UnknownBus(42)));
    }

    #[test]
    fn without_cigs_returns_power_to_redispatch_bus() {
        let net = Network::wscc9();
        let base = net.without_cigs();
        assert!(base.cigs.is_empty());
        let i = net.index_of(2).unwrap();
        assert_abs_diff_eq!(base.buses[i].p_gen, 1.63, epsilon = 1e-12);
        let total = |n: &Network| n.scheduled_injections().iter().map(|s| s.re).sum::<f64>();
        assert_abs_diff_eq!(total(&net), total(&base), epsilon = 1e-12);
    }
}
