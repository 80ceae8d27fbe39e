//! Command-line workflows: power flow, time-domain run, eigenanalysis,
//! K-sweep and the analytic complex-frequency example.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::cig::FrequencyInput;
use crate::complex_frequency::{analytic_example, AnalyticExampleParams};
use crate::dae::{Simulation, SystemModel, SystemState};
use crate::network::{solve_power_flow, Network, PfSolution};
use crate::report::{fmt_sig, svg_line_chart};
use crate::scenario::{ControlMode, Scenario, DEFAULT_PF_TOL};
use crate::smallsignal::{
    eigen_table_csv, eigensolve, identify_frequency_mode, is_unstable, k_grid, k_sweep, linearize, mode_shape_csv,
    DEFAULT_EPS, EIG_RESIDUAL_TOL,
};

pub const OUT_DIR_ENV: &str = "CFSIM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "cfsim_out";
pub const PF_MAX_ITER: usize = 30;
/// Reference natural frequency of the frequency-control mode, Hz.
pub const REFERENCE_MODE_HZ: f64 = 0.09;
const ALGEBRAIC_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "cfsim", version, about = "Complex-frequency aware power system simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Case file; overrides the scenario's case.
    #[arg(long, global = true)]
    pub case: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Power flow mismatch tolerance, pu.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Compensation gain K; selects the compensated signal when given.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Simulation horizon, s.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    /// Integration step, s.
    #[arg(long, global = true)]
    pub h: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the power flow and write the bus solution.
    Pf,
    /// Time-domain simulation of the scenario.
    Run,
    /// Eigenvalues of the linearized system.
    Eig {
        /// Also write the machine-speed shape of the frequency mode.
        #[arg(long)]
        mode_shapes: bool,
        /// Keep the converter frequency loop connected.
        #[arg(long)]
        with_loop: bool,
    },
    /// Geometric observability of the frequency mode over a K grid.
    Ksweep {
        #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
        k_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        k_max: f64,
        #[arg(long, default_value_t = 0.05)]
        k_step: f64,
    },
    /// Exact and first-order complex frequency of the analytic transient.
    Analytic {
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        /// Oscillation amplitude relative to `v`.
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
}

/// Result of a workflow: files written and invariant violations found.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub violations: Vec<String>,
    /// Human-readable result lines.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Workflow {
    scenario: Scenario,
    out_dir: PathBuf,
    tol: f64,
    manifest: Table,
    outcome: Outcome,
}

impl Workflow {
    fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.outcome.files.push(path);
        Ok(())
    }

    fn check(&mut self, ok: bool, msg: String) {
        if !ok {
            self.outcome.violations.push(msg);
        }
    }

    fn set(&mut self, section: &str, key: &str, value: impl Into<Value>) {
        let entry = self.manifest.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
        if let Value::Table(t) = entry {
            t.insert(key.to_string(), value.into());
        }
    }

    fn network(&self) -> anyhow::Result<Network> {
        Ok(self.scenario.network()?)
    }

    fn power_flow(&self, net: &Network) -> anyhow::Result<PfSolution> {
        Ok(solve_power_flow(net, self.tol, PF_MAX_ITER)?)
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<(Scenario, PathBuf, f64)> {
    let c = &cli.common;
    let mut sc = match &c.scenario {
        Some(p) => Scenario::load(p).with_context(|| format!("loading scenario {}", p.display()))?,
        None => Scenario::default(),
    };
    if let Some(case) = &c.case {
        sc.case = Some(case.clone());
    }
    if let Some(k) = c.k {
        sc.k = Some(k);
        if sc.control == ControlMode::CigOmega {
            sc.control = ControlMode::CigOmegaTilde;
        }
    }
    if let Some(t) = c.t_end {
        sc.t_end = t;
    }
    if let Some(h) = c.h {
        sc.h = h;
    }
    sc.validate()?;
    let out = c.out.clone().or_else(|| sc.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let tol = c.tol.unwrap_or(DEFAULT_PF_TOL);
    if !(tol > 0.0) {
        bail!("--tol must be positive");
    }
    Ok((sc, out, tol))
}

/// Runs the selected workflow, writing outputs and a `manifest.toml`.
pub fn execute(cli: &Cli) -> anyhow::Result<Outcome> {
    let (scenario, out_dir, tol) = resolve(cli)?;
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let mut manifest = Table::new();
    manifest.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    manifest.insert("scenario_hash".into(), scenario.hash().into());
    let mut defaults = Table::new();
    defaults.insert("pf_tol".into(), tol.into());
    defaults.insert("pf_max_iter".into(), (PF_MAX_ITER as i64).into());
    defaults.insert("linearization_eps".into(), DEFAULT_EPS.into());
    defaults.insert("algebraic_tol".into(), ALGEBRAIC_TOL.into());
    manifest.insert("defaults".into(), Value::Table(defaults));
    manifest.insert("scenario".into(), Value::try_from(&scenario)?);

    let mut ctx = Workflow { scenario, out_dir, tol, manifest, outcome: Outcome::default() };
    let name = match &cli.command {
        Command::Pf => {
            cmd_pf(&mut ctx)?;
            "pf"
        }
        Command::Run => {
            cmd_run(&mut ctx)?;
            "run"
        }
        Command::Eig { mode_shapes, with_loop } => {
            cmd_eig(&mut ctx, *mode_shapes, *with_loop)?;
            "eig"
        }
        Command::Ksweep { k_min, k_max, k_step } => {
            cmd_ksweep(&mut ctx, *k_min, *k_max, *k_step)?;
            "ksweep"
        }
        Command::Analytic { v, ratio, alpha, beta, dt } => {
            cmd_analytic(&mut ctx, AnalyticExampleParams { v: *v, k: ratio * v, alpha: *alpha, beta: *beta }, *dt)?;
            "analytic"
        }
    };
    ctx.manifest.insert("command".into(), name.into());
    let violations: Vec<Value> = ctx.outcome.violations.iter().map(|v| Value::from(v.as_str())).collect();
    ctx.manifest.insert("violations".into(), Value::Array(violations));
    let text = toml::to_string(&ctx.manifest)?;
    ctx.write("manifest.toml", &text)?;
    Ok(ctx.outcome)
}

fn cmd_pf(ctx: &mut Workflow) -> anyhow::Result<()> {
    let net = ctx.network()?;
    let pf = ctx.power_flow(&net)?;
    let mut csv = String::from("bus,kind,v_mag,v_ang_deg,p_inj,q_inj\n");
    for (i, b) in net.buses.iter().enumerate() {
        csv.push_str(&format!(
            "{},{:?},{},{},{},{}\n",
            b.id,
            b.kind,
            fmt_sig(pf.v_mag[i]),
            fmt_sig(pf.v_ang[i].to_degrees()),
            fmt_sig(pf.p_inj[i]),
            fmt_sig(pf.q_inj[i])
        ));
    }
    ctx.write("pf_buses.csv", &csv)?;
    ctx.set("results", "iterations", pf.iterations as i64);
    ctx.set("results", "max_mismatch", pf.max_mismatch);
    let tol = ctx.tol;
    ctx.check(pf.max_mismatch <= tol, format!("power flow mismatch {:.3e} above {tol:.1e}", pf.max_mismatch));
    ctx.outcome
        .summary
        .push(format!("power flow converged in {} iterations, mismatch {:.3e} pu", pf.iterations, pf.max_mismatch));
    Ok(())
}

fn equilibrium(ctx: &Workflow, input: FrequencyInput) -> anyhow::Result<(SystemModel, SystemState)> {
    let net = ctx.network()?;
    let pf = ctx.power_flow(&net)?;
    let input = if net.cigs.is_empty() { FrequencyInput::Off } else { input };
    Ok(SystemModel::assemble(&net, &pf, input)?)
}

fn cmd_run(ctx: &mut Workflow) -> anyhow::Result<()> {
    let sc = ctx.scenario.clone();
    let (model, state) = equilibrium(ctx, sc.control.frequency_input())?;
    let available = model.channel_names();
    let channels = if sc.channels.is_empty() { available.clone() } else { sc.channels.clone() };
    if let Some(bad) = channels.iter().find(|c| !available.contains(c)) {
        bail!("unknown channel '{bad}'; available: {}", available.join(", "));
    }
    let i_max = model.cigs().iter().map(|c| c.params.i_max).fold(f64::INFINITY, f64::min);

    let mut sim = Simulation::new(model, state);
    let series = sim.run(&sc.events(), sc.t_end, sc.h, sc.output_dt)?.select(&channels)?;
    ctx.write("timeseries.csv", &series.to_csv())?;
    for (name, data) in series.names.iter().zip(&series.data) {
        let svg = svg_line_chart(name, &series.time, &[(name.as_str(), data.as_slice())]);
        ctx.write(&format!("{name}.svg"), &svg)?;
    }

    let st = sim.stats().clone();
    ctx.set("results", "steps", st.steps as i64);
    ctx.set("results", "newton_iterations", st.newton_iterations as i64);
    ctx.set("results", "jacobian_updates", st.jacobian_updates as i64);
    ctx.set("results", "step_halvings", st.halvings as i64);
    ctx.set("results", "max_algebraic_residual", st.max_algebraic_residual);
    ctx.check(
        st.max_algebraic_residual <= ALGEBRAIC_TOL,
        format!("algebraic residual {:.3e} above {ALGEBRAIC_TOL:.0e}", st.max_algebraic_residual),
    );
    if i_max.is_finite() {
        ctx.set("results", "max_cig_current", st.max_cig_current);
        ctx.check(
            st.max_cig_current <= i_max * (1.0 + 1e-9),
            format!("converter current {:.6} above limit {i_max}", st.max_cig_current),
        );
    }
    ctx.outcome.summary.push(format!(
        "simulated {} s in {} steps, {} samples written",
        sc.t_end,
        st.steps,
        series.len()
    ));
    Ok(())
}

fn cmd_eig(ctx: &mut Workflow, mode_shapes: bool, with_loop: bool) -> anyhow::Result<()> {
    let input = if with_loop { ctx.scenario.control.frequency_input() } else { FrequencyInput::Off };
    let (model, eq) = equilibrium(ctx, input)?;
    let lm = linearize(&model, &eq, DEFAULT_EPS)?;
    let modes = eigensolve(&lm)?;
    let speeds = model.speed_indices();
    ctx.write("eigenvalues.csv", &eigen_table_csv(&modes, &speeds))?;

    let scale = lm.a.amax().max(1.0);
    let worst = modes.iter().map(|m| m.residual(&lm.a)).fold(0.0, f64::max);
    ctx.set("results", "n_states", lm.a.nrows() as i64);
    ctx.set("results", "max_eigen_residual", worst);
    ctx.check(worst <= EIG_RESIDUAL_TOL * scale, format!("eigenpair residual {worst:.3e}"));
    let unstable = modes.iter().filter(|m| is_unstable(m)).count();
    ctx.set("results", "unstable_modes", unstable as i64);
    ctx.set("results", "frequency_loop", if with_loop { "scenario" } else { "off" });

    match identify_frequency_mode(&modes, &speeds) {
        Ok(mode) => {
            let fz = mode.natural_frequency_hz();
            ctx.set("frequency_mode", "real", mode.eigenvalue.re);
            ctx.set("frequency_mode", "imag", mode.eigenvalue.im);
            ctx.set("frequency_mode", "natural_hz", fz);
            ctx.set("frequency_mode", "damping_ratio", mode.damping_ratio());
            ctx.set("frequency_mode", "reference_hz", REFERENCE_MODE_HZ);
            ctx.set("frequency_mode", "relative_gap", (fz - REFERENCE_MODE_HZ) / REFERENCE_MODE_HZ);
            ctx.set(
                "frequency_mode",
                "note",
                "gap to the reference depends on the governor and exciter gains of the case",
            );
            ctx.outcome.summary.push(format!(
                "frequency mode {:.4} {:+.4}j, {fz:.4} Hz, damping {:.3}",
                mode.eigenvalue.re,
                mode.eigenvalue.im,
                mode.damping_ratio()
            ));
            if mode_shapes {
                let ids: Vec<i64> = model.machines().iter().map(|m| m.bus_id).collect();
                ctx.write("mode_shapes.csv", &mode_shape_csv(&mode, &speeds, &ids))?;
            }
        }
        Err(e) => {
            ctx.outcome.summary.push(format!("no frequency mode identified: {e}"));
            ctx.set("frequency_mode", "error", e.to_string());
            if mode_shapes {
                bail!("--mode-shapes requested but {e}");
            }
        }
    }
    ctx.outcome.summary.push(format!("{} eigenvalues, {unstable} with positive real part", modes.len()));
    Ok(())
}

fn cmd_ksweep(ctx: &mut Workflow, k_min: f64, k_max: f64, k_step: f64) -> anyhow::Result<()> {
    let ks = k_grid(k_min, k_max, k_step)?;
    let (model, eq) = equilibrium(ctx, FrequencyInput::Off)?;
    if model.cigs().is_empty() {
        bail!("K-sweep needs a converter in the case");
    }
    let modes = eigensolve(&linearize(&model, &eq, DEFAULT_EPS)?)?;
    let mode = identify_frequency_mode(&modes, &model.speed_indices())?;
    let rep = k_sweep(&model, &eq, &mode, &ks, DEFAULT_EPS)?;
    ctx.write("ksweep.csv", &rep.to_csv())?;
    ctx.write("ksweep.svg", &svg_line_chart("go ratio vs K", &rep.k, &[("ratio", rep.ratio.as_slice())]))?;
    ctx.set("results", "rows", rep.k.len() as i64);
    ctx.set("results", "go_omega", rep.go_omega);
    ctx.set("results", "go_rho", rep.go_rho);
    if let Some(i) = rep.index_of_k(0.0) {
        let r = rep.ratio[i];
        ctx.check(r == 1.0, format!("ratio at K = 0 is {r}, expected 1"));
    }
    ctx.outcome.summary.push(format!(
        "{} grid points, go(omega) = {:.4}, go(rho) = {:.4}",
        rep.k.len(),
        rep.go_omega,
        rep.go_rho
    ));
    Ok(())
}

fn cmd_analytic(ctx: &mut Workflow, p: AnalyticExampleParams, dt: f64) -> anyhow::Result<()> {
    let t_end = ctx.scenario.t_end;
    if !(t_end > 0.0) || !(dt > 0.0) {
        bail!("t_end and dt must be positive");
    }
    let n = (t_end / dt + 1e-9).floor() as usize;
    let mut csv = String::from("t,v_d,v_q,rho,omega_dev,rho_first_order,omega_dev_first_order\n");
    for i in 0..=n {
        let t = i as f64 * dt;
        let s = analytic_example(&p, t)?;
        let row = [t, s.v.d, s.v.q, s.exact.rho, s.exact.omega, s.approx.rho, s.approx.omega];
        let cells: Vec<String> = row.iter().map(|v| fmt_sig(*v)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    ctx.write("analytic.csv", &csv)?;
    ctx.set("results", "samples", (n + 1) as i64);
    Ok(())
}

/// Path helper used by the binary to report written files relative to cwd.
pub fn display_path(p: &Path) -> String {
    std::env::current_dir()
        .ok()
        .and_then(|cwd| p.strip_prefix(cwd).ok().map(|r| r.display().to_string()))
        .unwrap_or_else(|| p.display().to_string())
}
