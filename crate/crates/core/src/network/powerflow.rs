//! Newton-Raphson power flow in polar coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{BusKind, Network};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PfSolution {
    pub v_mag: Vec<f64>,
    pub v_ang: Vec<f64>,
    /// Net injected active power per bus (generation minus load).
    pub p_inj: Vec<f64>,
    pub q_inj: Vec<f64>,
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl PfSolution {
    pub fn voltage(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.v_mag[i], self.v_ang[i])
    }

    pub fn voltages(&self) -> Vec<Complex64> {
        (0..self.v_mag.len()).map(|i| self.voltage(i)).collect()
    }

    pub fn injection(&self, i: usize) -> Complex64 {
        Complex64::new(self.p_inj[i], self.q_inj[i])
    }

    /// Total series and shunt losses implied by the solution.
    pub fn losses(&self) -> Complex64 {
        Complex64::new(self.p_inj.iter().sum(), self.q_inj.iter().sum())
    }
}

fn power_injections(y: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let cur: Complex64 = (0..n).map(|j| y[(i, j)] * v[j]).sum();
            v[i] * cur.conj()
        })
        .collect()
}

/// Solves the AC power flow from a flat start.
///
/// PV and slack magnitudes start at their set points, every other magnitude
/// at 1.0 pu and every angle at zero. Reactive limits are not enforced.
pub fn solve_power_flow(net: &Network, tol: f64, max_iter: usize) -> Result<PfSolution> {
    let slack = net.slack_index()?;
    let n = net.buses.len();
    let y = net.build_ybus();
    let sched = net.scheduled_injections();

    let pvpq: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| net.buses[i].kind == BusKind::Pq).collect();
    let (npvpq, npq) = (pvpq.len(), pq.len());

    let mut vm: Vec<f64> = net.buses.iter().map(|b| if b.kind == BusKind::Pq { 1.0 } else { b.v_set }).collect();
    let mut va = vec![0.0; n];

    let mismatch = |vm: &[f64], va: &[f64]| -> (DVector<f64>, Vec<Complex64>) {
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
        let s = power_injections(&y, &v);
        let mut f = DVector::zeros(npvpq + npq);
        for (k, &i) in pvpq.iter().enumerate() {
            f[k] = s[i].re - sched[i].re;
        }
        for (k, &i) in pq.iter().enumerate() {
            f[npvpq + k] = s[i].im - sched[i].im;
        }
        (f, v)
    };

    let (mut f, mut v) = mismatch(&vm, &va);
    let mut norm = f.amax();
    let mut iterations = 0;
    while norm > tol {
        if iterations >= max_iter {
            return Err(Error::PowerFlowDiverged { iterations, mismatch: norm });
        }
        iterations += 1;

        // dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
        // dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        let ibus: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| y[(i, j)] * v[j]).sum()).collect();
        let j_unit = Complex64::new(0.0, 1.0);
        let ds_dva = |i: usize, k: usize| -> Complex64 {
            let diag = if i == k { ibus[i] } else { Complex64::new(0.0, 0.0) };
            j_unit * v[i] * (diag - y[(i, k)] * v[k]).conj()
        };
        let ds_dvm = |i: usize, k: usize| -> Complex64 {
            let vn = v[k] / vm[k];
            let mut d = v[i] * (y[(i, k)] * vn).conj();
            if i == k {
                d += ibus[i].conj() * vn;
            }
            d
        };

        let dim = npvpq + npq;
        let mut jac = DMatrix::zeros(dim, dim);
        for (r, &i) in pvpq.iter().enumerate() {
            for (c, &k) in pvpq.iter().enumerate() {
                jac[(r, c)] = ds_dva(i, k).re;
            }
            for (c, &k) in pq.iter().enumerate() {
                jac[(r, npvpq + c)] = ds_dvm(i, k).re;
            }
        }
        for (r, &i) in pq.iter().enumerate() {
            for (c, &k) in pvpq.iter().enumerate() {
                jac[(npvpq + r, c)] = ds_dva(i, k).im;
            }
            for (c, &k) in pq.iter().enumerate() {
                jac[(npvpq + r, npvpq + c)] = ds_dvm(i, k).im;
            }
        }
        let dx = jac.lu().solve(&(-&f)).ok_or(Error::PowerFlowDiverged { iterations, mismatch: norm })?;
        for (k, &i) in pvpq.iter().enumerate() {
            va[i] += dx[k];
        }
        for (k, &i) in pq.iter().enumerate() {
            vm[i] += dx[npvpq + k];
        }
        (f, v) = mismatch(&vm, &va);
        norm = f.amax();
        if !norm.is_finite() {
            return Err(Error::PowerFlowDiverged { iterations, mismatch: norm });
        }
    }

    let s = power_injections(&y, &v);
    Ok(PfSolution {
        v_mag: vm,
        v_ang: va,
        p_inj: s.iter().map(|c| c.re).collect(),
        q_inj: s.iter().map(|c| c.im).collect(),
        iterations,
        max_mismatch: norm,
    })
}
