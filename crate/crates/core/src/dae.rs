//! Semi-explicit DAE assembly and implicit trapezoidal integration.
//!
//! The differential vector `x` stacks machine states followed by converter
//! states; the algebraic vector `y` holds `(Re V, Im V)` for every bus in
//! the network frame, which rotates at the centre-of-inertia speed. The
//! algebraic equations are the nodal current balances
//! `I_devices(x, y) - I_loads(y) - Ybus V = 0`.

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;

use crate::cig::{
    cig_derivatives, initialize_cig, CigControlParams, CigOutputs, CigSetpoints, CigState, FrequencyInput,
};
use crate::complex_frequency::ParkVector;
use crate::error::{Error, Result};
use crate::machines::{
    coi_frequency, initialize_sm, sm_current_injection, sm_derivatives, AvrParams, GovParams, MachineSetpoints,
    SynMachineParams, SynMachineState,
};
use crate::network::{Event, Network, PfSolution};

pub const NEWTON_TOL: f64 = 1e-8;
const NEWTON_MAX_ITER: usize = 12;
const MAX_HALVINGS: usize = 4;

#[derive(Clone, Debug)]
pub struct MachineDevice {
    pub bus: usize,
    pub bus_id: i64,
    pub params: SynMachineParams,
    pub avr: AvrParams,
    pub gov: GovParams,
    pub set: MachineSetpoints,
    pub offset: usize,
}

#[derive(Clone, Debug)]
pub struct CigDevice {
    pub bus: usize,
    pub bus_id: i64,
    pub params: CigControlParams,
    pub set: CigSetpoints,
    pub input: FrequencyInput,
    pub offset: usize,
}

/// Differential and algebraic variables at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

#[derive(Clone, Debug)]
pub struct SystemModel {
    net: Network,
    ybus: DMatrix<Complex64>,
    machines: Vec<MachineDevice>,
    cigs: Vec<CigDevice>,
    /// Constant-power injections that are not modelled dynamically.
    static_injection: Vec<Complex64>,
    machine_params: Vec<SynMachineParams>,
    omega_base: f64,
    n_x: usize,
    n_y: usize,
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn bus_voltage(y: &[f64], i: usize) -> Complex64 {
    Complex64::new(y[2 * i], y[2 * i + 1])
}

impl SystemModel {
    /// Builds the model from a solved power flow and initializes every device
    /// at equilibrium. Converters use `input` as frequency-controller signal.
    pub fn assemble(net: &Network, pf: &PfSolution, input: FrequencyInput) -> Result<(SystemModel, SystemState)> {
        let n = net.buses.len();
        if pf.v_mag.len() != n {
            return Err(Error::Assembly(format!("power flow has {} buses, network {n}", pf.v_mag.len())));
        }
        if net.machines.is_empty() && net.cigs.is_empty() {
            return Err(Error::Assembly("network has no dynamic devices".into()));
        }
        if net.machines.is_empty() {
            return Err(Error::Assembly("at least one synchronous machine is needed to define the COI".into()));
        }
        let idx = net.bus_index();
        let load: Vec<Complex64> = net.buses.iter().map(|b| Complex64::new(b.p_load, b.q_load)).collect();
        let mut cig_s = vec![Complex64::new(0.0, 0.0); n];
        for c in &net.cigs {
            cig_s[idx[&c.bus]] += Complex64::new(c.params.p_ref, c.params.q_ref);
        }
        let mut static_injection: Vec<Complex64> = net.buses.iter().map(|b| Complex64::new(b.p_gen, b.q_gen)).collect();

        let mut x = Vec::new();
        let mut machines = Vec::new();
        for m in &net.machines {
            let bus = idx[&m.bus];
            static_injection[bus] = Complex64::new(0.0, 0.0);
            let s_gen = pf.injection(bus) + load[bus] - cig_s[bus];
            let (st, set) = initialize_sm(pf.voltage(bus), s_gen, &m.params, &m.avr, &m.gov)?;
            let offset = x.len();
            x.resize(offset + SynMachineState::LEN, 0.0);
            st.write(&mut x[offset..]);
            machines.push(MachineDevice { bus, bus_id: m.bus, params: m.params, avr: m.avr, gov: m.gov, set, offset });
        }
        let mut cigs = Vec::new();
        for c in &net.cigs {
            let bus = idx[&c.bus];
            let (st, set) = initialize_cig(pf.voltage(bus), &c.params)?;
            let offset = x.len();
            x.resize(offset + CigState::LEN, 0.0);
            st.write(&mut x[offset..]);
            cigs.push(CigDevice { bus, bus_id: c.bus, params: c.params, set, input, offset });
        }
        let y: Vec<f64> = pf.voltages().iter().flat_map(|v| [v.re, v.im]).collect();
        let model = SystemModel {
            ybus: net.build_ybus(),
            machine_params: machines.iter().map(|m| m.params).collect(),
            omega_base: net.omega_base(),
            n_x: x.len(),
            n_y: 2 * n,
            net: net.clone(),
            machines,
            cigs,
            static_injection,
        };
        Ok((model, SystemState { x, y, t: 0.0 }))
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn machines(&self) -> &[MachineDevice] {
        &self.machines
    }

    pub fn cigs(&self) -> &[CigDevice] {
        &self.cigs
    }

    pub fn omega_base(&self) -> f64 {
        self.omega_base
    }

    /// Indices of the machine speed states in `x`.
    pub fn speed_indices(&self) -> Vec<usize> {
        self.machines.iter().map(|m| m.offset + SynMachineState::OMEGA).collect()
    }

    pub fn state_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.n_x);
        for m in &self.machines {
            labels.extend(SynMachineState::labels().iter().map(|l| format!("{l}_sm{}", m.bus_id)));
        }
        for c in &self.cigs {
            labels.extend(CigState::labels().iter().map(|l| format!("{l}_cig{}", c.bus_id)));
        }
        labels
    }

    pub fn set_frequency_input(&mut self, input: FrequencyInput) {
        for c in &mut self.cigs {
            c.input = input;
        }
    }

    /// Sets the compensation gain of every converter.
    pub fn set_compensation_gain(&mut self, k: f64) {
        for c in &mut self.cigs {
            c.params.k = k;
        }
    }

    /// Applies a network event; the admittance matrix is rebuilt.
    pub fn apply_event(&mut self, event: &Event) -> Result<()> {
        self.net = self.net.apply_event(&event.kind)?;
        self.ybus = self.net.build_ybus();
        Ok(())
    }

    pub fn omega_coi(&self, x: &[f64]) -> f64 {
        let speeds: Vec<f64> = self.speed_indices().iter().map(|&i| x[i]).collect();
        coi_frequency(&speeds, &self.machine_params).unwrap_or(1.0)
    }

    /// Differential right-hand side.
    pub fn eval_f(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let w_coi = self.omega_coi(x);
        for m in &self.machines {
            let st = SynMachineState::from_slice(&x[m.offset..]);
            let v = ParkVector::from_complex(bus_voltage(y, m.bus));
            let d = sm_derivatives(&st, v, &m.params, &m.avr, &m.gov, &m.set, w_coi, self.omega_base)?;
            d.write(&mut out[m.offset..]);
        }
        for c in &self.cigs {
            let st = CigState::from_slice(&x[c.offset..]);
            let v = ParkVector::from_complex(bus_voltage(y, c.bus));
            let (d, _) = cig_derivatives(&st, v, &c.params, &c.set, c.input, w_coi, self.omega_base)?;
            d.write(&mut out[c.offset..]);
        }
        Ok(())
    }

    /// Algebraic residual: injected minus network currents at every bus.
    pub fn eval_g(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.net.buses.len();
        let mut inj = vec![Complex64::new(0.0, 0.0); n];
        for (i, b) in self.net.buses.iter().enumerate() {
            let v = bus_voltage(y, i);
            let s = self.static_injection[i] - Complex64::new(b.p_load, b.q_load);
            if s.re != 0.0 || s.im != 0.0 {
                if v.norm_sqr() == 0.0 {
                    return Err(Error::ZeroMagnitude);
                }
                inj[i] += (s / v).conj();
            }
        }
        for m in &self.machines {
            let st = SynMachineState::from_slice(&x[m.offset..]);
            inj[m.bus] += sm_current_injection(&st, ParkVector::from_complex(bus_voltage(y, m.bus)), &m.params)?;
        }
        for c in &self.cigs {
            let st = CigState::from_slice(&x[c.offset..]);
            inj[c.bus] += Complex64::new(st.id, -st.iq) * Complex64::from_polar(1.0, st.pll.theta);
        }
        for i in 0..n {
            let net: Complex64 = (0..n).map(|j| self.ybus[(i, j)] * bus_voltage(y, j)).sum();
            let r = inj[i] - net;
            out[2 * i] = r.re;
            out[2 * i + 1] = r.im;
        }
        Ok(())
    }

    pub fn f(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_x];
        self.eval_f(x, y, &mut out)?;
        Ok(out)
    }

    pub fn g(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_y];
        self.eval_g(x, y, &mut out)?;
        Ok(out)
    }

    /// Converter outputs (PLL frequency, rho estimate, ...) for converter `k`.
    pub fn cig_outputs(&self, k: usize, x: &[f64], y: &[f64]) -> Result<CigOutputs> {
        let c = self.cigs.get(k).ok_or_else(|| Error::InvalidArgument(format!("no converter {k}")))?;
        let st = CigState::from_slice(&x[c.offset..]);
        let v = ParkVector::from_complex(bus_voltage(y, c.bus));
        let (_, out) = cig_derivatives(&st, v, &c.params, &c.set, c.input, self.omega_coi(x), self.omega_base)?;
        Ok(out)
    }

    /// Solves `g(x, y) = 0` for `y` with `x` frozen, starting from `y0`.
    /// Full Newton, iterated until the residual stops improving.
    pub fn solve_algebraic(&self, x: &[f64], y0: &[f64]) -> Result<Vec<f64>> {
        let mut y = y0.to_vec();
        let mut r = self.g(x, &y)?;
        let mut norm = max_abs(&r);
        for _ in 0..20 {
            if norm <= 1e-14 {
                break;
            }
            let dy = self
                .jacobian_gy(x, &y, &r)?
                .lu()
                .solve(&(-DVector::from_column_slice(&r)))
                .ok_or_else(|| Error::AlgebraicSolve("singular g_y".into()))?;
            let trial: Vec<f64> = y.iter().zip(dy.iter()).map(|(a, b)| a + b).collect();
            let r_trial = self.g(x, &trial)?;
            let n_trial = max_abs(&r_trial);
            if !(n_trial < norm) {
                break;
            }
            let converging = n_trial < 0.5 * norm;
            (y, r, norm) = (trial, r_trial, n_trial);
            if !converging && norm <= NEWTON_TOL {
                break;
            }
        }
        if norm <= NEWTON_TOL {
            Ok(y)
        } else {
            Err(Error::AlgebraicSolve(format!("residual {norm:.3e} after re-solve")))
        }
    }

    fn jacobian_gy(&self, x: &[f64], y: &[f64], g0: &[f64]) -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.n_y, self.n_y);
        let mut yp = y.to_vec();
        let mut gp = vec![0.0; self.n_y];
        for c in 0..self.n_y {
            let eps = 1e-7 * (1.0 + y[c].abs());
            yp[c] = y[c] + eps;
            self.eval_g(x, &yp, &mut gp)?;
            yp[c] = y[c];
            for r in 0..self.n_y {
                j[(r, c)] = (gp[r] - g0[r]) / eps;
            }
        }
        Ok(j)
    }

    /// Names of the channels produced by [`SystemModel::channel_values`].
    pub fn channel_names(&self) -> Vec<String> {
        let mut names = vec!["omega_coi".to_string()];
        names.extend(self.machines.iter().map(|m| format!("omega_sm{}", m.bus_id)));
        names.extend(self.net.buses.iter().map(|b| format!("v_bus{}", b.id)));
        let single = self.cigs.len() == 1;
        for c in &self.cigs {
            let suffix = if single { String::new() } else { c.bus_id.to_string() };
            for base in ["p_cig", "q_cig", "omega_est", "rho_est", "omega_tilde", "i_cig", "pll_error"] {
                names.push(format!("{base}{suffix}"));
            }
        }
        names
    }

    pub fn channel_values(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut vals = vec![self.omega_coi(x)];
        vals.extend(self.speed_indices().iter().map(|&i| x[i]));
        vals.extend((0..self.net.buses.len()).map(|i| bus_voltage(y, i).norm()));
        for (k, c) in self.cigs.iter().enumerate() {
            let out = self.cig_outputs(k, x, y)?;
            let s = bus_voltage(y, c.bus) * out.current.conj();
            vals.extend([s.re, s.im, out.omega_est, out.rho_est, out.omega_tilde, out.current.norm(), out.pll_error]);
        }
        Ok(vals)
    }
}

/// A semi-explicit DAE `x' = f(x, y)`, `0 = g(x, y)`.
pub trait Dae {
    fn n_x(&self) -> usize;
    fn n_y(&self) -> usize;
    fn eval_f(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()>;
    fn eval_g(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()>;
}

impl Dae for SystemModel {
    fn n_x(&self) -> usize {
        self.n_x
    }

    fn n_y(&self) -> usize {
        self.n_y
    }

    fn eval_f(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        SystemModel::eval_f(self, x, y, out)
    }

    fn eval_g(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        SystemModel::eval_g(self, x, y, out)
    }
}

/// Free-function form of [`SystemModel::assemble`].
pub fn assemble(net: &Network, pf: &PfSolution, input: FrequencyInput) -> Result<(SystemModel, SystemState)> {
    SystemModel::assemble(net, pf, input)
}

/// Counters collected while integrating.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimStats {
    pub steps: usize,
    pub newton_iterations: usize,
    pub jacobian_updates: usize,
    pub halvings: usize,
    /// Largest nodal current mismatch at any accepted step.
    pub max_algebraic_residual: f64,
    /// Largest converter current magnitude at any accepted step.
    pub max_cig_current: f64,
}

struct JacobianCache {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    h: f64,
}

/// Implicit trapezoidal rule for any [`Dae`], solved by Newton on the
/// stacked `(x, y)` with a cached finite-difference Jacobian. The Jacobian
/// is refreshed when the residual falls by less than a factor of four per
/// iteration; a step that fails to converge is retried as two half steps.
#[derive(Default)]
pub struct Trapezoidal {
    cache: Option<JacobianCache>,
    stats: SimStats,
}

impl Trapezoidal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> &SimStats {
        &self.stats
    }

    /// Drops the cached Jacobian; call after the model changes.
    pub fn invalidate(&mut self) {
        self.cache = None;
    }

    fn residual<M: Dae>(
        model: &M,
        prev: &SystemState,
        f_prev: &[f64],
        z: &[f64],
        h: f64,
        out: &mut [f64],
    ) -> Result<()> {
        let (nx, ny) = (model.n_x(), model.n_y());
        let (x, y) = z.split_at(nx);
        model.eval_f(x, y, &mut out[..nx])?;
        for i in 0..nx {
            out[i] = x[i] - prev.x[i] - 0.5 * h * (out[i] + f_prev[i]);
        }
        model.eval_g(x, y, &mut out[nx..nx + ny])
    }

    #[allow(clippy::too_many_arguments)]
    fn build_jacobian<M: Dae>(
        &mut self,
        model: &M,
        prev: &SystemState,
        f_prev: &[f64],
        z: &[f64],
        r0: &[f64],
        h: f64,
    ) -> Result<()> {
        let n = z.len();
        let mut jac = DMatrix::zeros(n, n);
        let mut zp = z.to_vec();
        let mut rp = vec![0.0; n];
        for c in 0..n {
            let eps = 1e-7 * (1.0 + z[c].abs());
            zp[c] = z[c] + eps;
            Self::residual(model, prev, f_prev, &zp, h, &mut rp)?;
            zp[c] = z[c];
            for r in 0..n {
                jac[(r, c)] = (rp[r] - r0[r]) / eps;
            }
        }
        self.cache = Some(JacobianCache { lu: jac.lu(), h });
        self.stats.jacobian_updates += 1;
        Ok(())
    }

    /// One step of size `h`; `Err(residual)` when Newton fails.
    fn try_step<M: Dae>(
        &mut self,
        model: &M,
        prev: &SystemState,
        h: f64,
    ) -> Result<std::result::Result<SystemState, f64>> {
        let nx = model.n_x();
        let mut f_prev = vec![0.0; nx];
        model.eval_f(&prev.x, &prev.y, &mut f_prev)?;
        let mut z: Vec<f64> = prev.x.iter().chain(prev.y.iter()).copied().collect();
        let mut r = vec![0.0; z.len()];
        if self.cache.as_ref().is_some_and(|c| c.h != h) {
            self.cache = None;
        }
        let mut fresh = false;
        let mut last_norm = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            if Self::residual(model, prev, &f_prev, &z, h, &mut r).is_err() {
                return Ok(Err(f64::INFINITY));
            }
            let norm = max_abs(&r);
            if !norm.is_finite() {
                return Ok(Err(norm));
            }
            if norm <= NEWTON_TOL {
                let (x, y) = z.split_at(nx);
                let alg = max_abs(&r[nx..]);
                self.stats.max_algebraic_residual = self.stats.max_algebraic_residual.max(alg);
                return Ok(Ok(SystemState { x: x.to_vec(), y: y.to_vec(), t: prev.t + h }));
            }
            if self.cache.is_none() || (!fresh && norm > 0.25 * last_norm) {
                self.build_jacobian(model, prev, &f_prev, &z, &r, h)?;
                fresh = true;
            } else {
                fresh = false;
            }
            last_norm = norm;
            let dz = match self.cache.as_ref().unwrap().lu.solve(&(-DVector::from_column_slice(&r))) {
                Some(d) => d,
                None => return Ok(Err(norm)),
            };
            for (zi, d) in z.iter_mut().zip(dz.iter()) {
                *zi += d;
            }
            self.stats.newton_iterations += 1;
        }
        Self::residual(model, prev, &f_prev, &z, h, &mut r)?;
        Ok(Err(max_abs(&r)))
    }

    /// Advances `state` by exactly `h`, calling `accept` after every
    /// accepted (possibly halved) substep.
    pub fn advance<M: Dae>(
        &mut self,
        model: &M,
        state: &mut SystemState,
        h: f64,
        accept: &mut dyn FnMut(&SystemState) -> Result<()>,
    ) -> Result<()> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
        }
        self.advance_depth(model, state, h, 0, accept)
    }

    fn advance_depth<M: Dae>(
        &mut self,
        model: &M,
        state: &mut SystemState,
        h: f64,
        depth: usize,
        accept: &mut dyn FnMut(&SystemState) -> Result<()>,
    ) -> Result<()> {
        match self.try_step(model, state, h)? {
            Ok(next) => {
                *state = next;
                self.stats.steps += 1;
                accept(state)
            }
            Err(residual) => {
                if depth >= MAX_HALVINGS {
                    return Err(Error::StepFailure { t: state.t, halvings: depth, residual });
                }
                self.cache = None;
                self.stats.halvings += 1;
                self.advance_depth(model, state, 0.5 * h, depth + 1, accept)?;
                self.advance_depth(model, state, 0.5 * h, depth + 1, accept)
            }
        }
    }
}

/// Owns a model and its state and advances them in time.
pub struct Simulation {
    model: SystemModel,
    state: SystemState,
    solver: Trapezoidal,
    max_cig_current: f64,
}

impl Simulation {
    pub fn new(model: SystemModel, state: SystemState) -> Self {
        Self { model, state, solver: Trapezoidal::new(), max_cig_current: 0.0 }
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn stats(&self) -> SimStats {
        SimStats { max_cig_current: self.max_cig_current, ..self.solver.stats().clone() }
    }

    /// Applies an event and re-solves the algebraic variables with the
    /// differential states frozen.
    pub fn apply_event(&mut self, event: &Event) -> Result<()> {
        self.model.apply_event(event)?;
        self.solver.invalidate();
        self.state.y = self.model.solve_algebraic(&self.state.x, &self.state.y)?;
        Ok(())
    }

    /// Advances exactly `h` (with automatic halving on Newton failure).
    pub fn step(&mut self, h: f64) -> Result<()> {
        let model = &self.model;
        let max_i = &mut self.max_cig_current;
        self.solver.advance(model, &mut self.state, h, &mut |st| {
            for k in 0..model.cigs.len() {
                *max_i = max_i.max(model.cig_outputs(k, &st.x, &st.y)?.current.norm());
            }
            Ok(())
        })
    }

    /// Integrates to `t_end` honouring `events`, recording every channel
    /// every `output_dt` seconds (and at `t_end`).
    pub fn run(&mut self, events: &[Event], t_end: f64, h: f64, output_dt: f64) -> Result<TimeSeries> {
        let t0 = self.state.t;
        if !(t_end > t0) {
            return Err(Error::InvalidArgument(format!("empty horizon: t_end = {t_end} s")));
        }
        if !(h > 0.0) || !(output_dt > 0.0) {
            return Err(Error::InvalidArgument("step and output interval must be positive".into()));
        }
        let mut events = events.to_vec();
        if let Some(e) = events.iter().find(|e| !(e.time >= t0 && e.time <= t_end)) {
            return Err(Error::InvalidArgument(format!("event at t = {} s outside [{t0}, {t_end}]", e.time)));
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));

        // stop times: output grid, events, horizon
        let n_out = ((t_end - t0) / output_dt - 1e-9).ceil() as usize;
        let mut stops: Vec<(f64, bool)> = (1..=n_out).map(|k| ((t0 + k as f64 * output_dt).min(t_end), true)).collect();
        for e in &events {
            stops.push((e.time, false));
        }
        stops.sort_by(|a, b| a.0.total_cmp(&b.0));
        let time_eps = 1e-9 * output_dt.max(h);

        let mut series = TimeSeries::new(self.model.channel_names());
        let mut next_event = 0;
        while next_event < events.len() && events[next_event].time <= t0 + time_eps {
            self.apply_event(&events[next_event])?;
            next_event += 1;
        }
        series.push(t0, self.model.channel_values(&self.state.x, &self.state.y)?);

        let mut i = 0;
        while i < stops.len() {
            let target = stops[i].0;
            let mut record = false;
            while i < stops.len() && stops[i].0 <= target + time_eps {
                record |= stops[i].1;
                i += 1;
            }
            let span = target - self.state.t;
            if span > time_eps {
                let n = (span / h - 1e-9).ceil().max(1.0) as usize;
                let hs = span / n as f64;
                for _ in 0..n {
                    self.step(hs)?;
                }
            }
            self.state.t = target;
            while next_event < events.len() && events[next_event].time <= target + time_eps {
                self.apply_event(&events[next_event])?;
                next_event += 1;
            }
            if record {
                series.push(target, self.model.channel_values(&self.state.x, &self.state.y)?);
            }
        }
        Ok(series)
    }
}

/// Single trapezoidal step of any [`Dae`] from `state` (fresh Jacobian).
pub fn step_trapezoidal<M: Dae>(model: &M, state: &SystemState, h: f64) -> Result<SystemState> {
    let mut next = state.clone();
    Trapezoidal::new().advance(model, &mut next, h, &mut |_| Ok(()))?;
    Ok(next)
}

/// Runs a scenario from `state` and returns the recorded channels.
pub fn simulate(
    model: &SystemModel,
    state: &SystemState,
    events: &[Event],
    t_end: f64,
    h: f64,
    output_dt: f64,
) -> Result<TimeSeries> {
    let mut sim = Simulation::new(model.clone(), state.clone());
    sim.run(events, t_end, h, output_dt)
}

/// Uniformly sampled named channels.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub time: Vec<f64>,
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Self {
        let data = vec![Vec::new(); names.len()];
        Self { time: Vec::new(), names, data }
    }

    pub fn push(&mut self, t: f64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.names.len());
        self.time.push(t);
        for (ch, v) in self.data.iter_mut().zip(values) {
            ch.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.data[i].as_slice())
    }

    /// Keeps only the named channels, in the given order.
    pub fn select(&self, names: &[String]) -> Result<TimeSeries> {
        let mut out = TimeSeries { time: self.time.clone(), names: Vec::new(), data: Vec::new() };
        for n in names {
            let ch = self.channel(n).ok_or_else(|| Error::InvalidArgument(format!("unknown channel '{n}'")))?;
            out.names.push(n.clone());
            out.data.push(ch.to_vec());
        }
        Ok(out)
    }

    /// CSV with a `t` column followed by every channel, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (k, t) in self.time.iter().enumerate() {
            s.push_str(&crate::report::fmt_sig(*t));
            for ch in &self.data {
                s.push(',');
                s.push_str(&crate::report::fmt_sig(ch[k]));
            }
            s.push('\n');
        }
        s
    }
}
