//! Linearization, eigenanalysis and geometric observability.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dae::{max_abs, Dae, SystemModel, SystemState};
use crate::error::{Error, Result};

/// Default relative perturbation for finite-difference Jacobians.
pub const DEFAULT_EPS: f64 = 1e-6;
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;
/// Real parts up to this value count as zero (the angle reference mode).
pub const ZERO_REAL_TOL: f64 = 1e-8;
const IN_PHASE_DEG: f64 = 30.0;
const MIN_SPEED_PARTICIPATION: f64 = 0.1;
pub const FREQ_BAND_HZ: (f64, f64) = (0.02, 0.1);

/// State matrix after elimination of the algebraic variables.
#[derive(Clone, Debug)]
pub struct LinearModel {
    pub a: DMatrix<f64>,
    pub labels: Vec<String>,
}

fn central_jacobian<F>(n_out: usize, z: &[f64], eps: f64, mut eval: F) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut jac = DMatrix::zeros(n_out, z.len());
    let mut zp = z.to_vec();
    let (mut plus, mut minus) = (vec![0.0; n_out], vec![0.0; n_out]);
    for c in 0..z.len() {
        let h = eps * (1.0 + z[c].abs());
        zp[c] = z[c] + h;
        eval(&zp, &mut plus)?;
        zp[c] = z[c] - h;
        eval(&zp, &mut minus)?;
        zp[c] = z[c];
        for r in 0..n_out {
            jac[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Builds `A = f_x - f_y g_y^{-1} g_x` by central differences at `(x, y)`.
pub fn linearize_dae<M: Dae>(model: &M, x: &[f64], y: &[f64], eps: f64) -> Result<DMatrix<f64>> {
    let (nx, ny) = (model.n_x(), model.n_y());
    let mut f0 = vec![0.0; nx];
    let mut g0 = vec![0.0; ny];
    model.eval_f(x, y, &mut f0)?;
    model.eval_g(x, y, &mut g0)?;
    let res = max_abs(&f0).max(max_abs(&g0));
    if res >= 1e-8 {
        return Err(Error::InvalidArgument(format!("not an equilibrium: residual {res:.3e}")));
    }
    let fx = central_jacobian(nx, x, eps, |xp, out| model.eval_f(xp, y, out))?;
    let fy = central_jacobian(nx, y, eps, |yp, out| model.eval_f(x, yp, out))?;
    let gx = central_jacobian(ny, x, eps, |xp, out| model.eval_g(xp, y, out))?;
    let gy = central_jacobian(ny, y, eps, |yp, out| model.eval_g(x, yp, out))?;
    if ny == 0 {
        return Ok(fx);
    }
    let gy_inv_gx =
        gy.lu().solve(&gx).ok_or_else(|| Error::AlgebraicSolve("singular g_y at the equilibrium".into()))?;
    let a = fx - fy * gy_inv_gx;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite state matrix".into()));
    }
    Ok(a)
}

pub fn linearize(model: &SystemModel, eq: &SystemState, eps: f64) -> Result<LinearModel> {
    Ok(LinearModel { a: linearize_dae(model, &eq.x, &eq.y, eps)?, labels: model.state_labels() })
}

/// An eigenvalue with its right (`A v = λ v`) and left (`wᵀ A = λ wᵀ`)
/// eigenvectors, scaled so that `wᵀ v = 1`.
#[derive(Clone, Debug)]
pub struct Mode {
    pub eigenvalue: Complex64,
    pub right: DVector<Complex64>,
    pub left: DVector<Complex64>,
}

impl Mode {
    pub fn natural_frequency_hz(&self) -> f64 {
        self.eigenvalue.norm() / (2.0 * PI)
    }

    pub fn damped_frequency_hz(&self) -> f64 {
        self.eigenvalue.im / (2.0 * PI)
    }

    pub fn damping_ratio(&self) -> f64 {
        let n = self.eigenvalue.norm();
        if n == 0.0 {
            0.0
        } else {
            -self.eigenvalue.re / n
        }
    }

    /// `|w_k v_k|`, the participation of state `k`.
    pub fn participation(&self, k: usize) -> f64 {
        (self.left[k] * self.right[k]).norm()
    }

    /// Right-eigenvector entries at `indices`, scaled to unit max magnitude.
    pub fn shape(&self, indices: &[usize]) -> Vec<Complex64> {
        let vals: Vec<Complex64> = indices.iter().map(|&i| self.right[i]).collect();
        let big = vals.iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if big == 0.0 {
            return vals;
        }
        let peak = vals.iter().copied().find(|v| v.norm() == big).unwrap();
        let scale = peak.conj() / (big * big);
        vals.into_iter().map(|v| v * scale).collect()
    }

    pub fn conj(&self) -> Mode {
        Mode {
            eigenvalue: self.eigenvalue.conj(),
            right: self.right.map(|c| c.conj()),
            left: self.left.map(|c| c.conj()),
        }
    }

    /// `‖A v - λ v‖ / ‖v‖`
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let ac = a.map(|v| Complex64::new(v, 0.0));
        (&ac * &self.right - &self.right * self.eigenvalue).norm() / self.right.norm()
    }
}

fn inverse_iteration(a: &DMatrix<Complex64>, lambda: Complex64) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.norm()));
    let shift = lambda + Complex64::new(1e-11 * scale, 1e-11 * scale);
    let lu = (a - DMatrix::from_diagonal_element(n, n, shift)).lu();
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * (i % 7) as f64, 0.05 * (i % 3) as f64));
    for _ in 0..4 {
        v = lu.solve(&v).ok_or_else(|| Error::Eigen(format!("inverse iteration failed at {lambda}")))?;
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Eigen(format!("inverse iteration diverged at {lambda}")));
        }
        v /= Complex64::new(norm, 0.0);
    }
    // fix the phase so the largest entry is real and positive
    let (imax, _) =
        v.iter().enumerate().fold((0, 0.0), |(bi, bv), (i, c)| if c.norm() > bv { (i, c.norm()) } else { (bi, bv) });
    let ph = v[imax].conj() / v[imax].norm();
    Ok(v * ph)
}

/// Full spectrum of `lm.a` with right and left eigenvectors, sorted by
/// decreasing real part and then decreasing imaginary part.
pub fn eigensolve(lm: &LinearModel) -> Result<Vec<Mode>> {
    let a = &lm.a;
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::Eigen("state matrix must be square and non-empty".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("state matrix has non-finite entries".into()));
    }
    let eigs = a.clone().complex_eigenvalues();
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let at = ac.transpose();
    let mut modes = Vec::with_capacity(n);
    for lam in eigs.iter() {
        let lam = Complex64::new(lam.re, lam.im);
        let real = lam.im.abs() <= 1e-12 * scale;
        if !real && lam.im < 0.0 {
            continue;
        }
        let lam = if real { Complex64::new(lam.re, 0.0) } else { lam };
        let right = inverse_iteration(&ac, lam)?;
        let mut left = inverse_iteration(&at, lam)?;
        let wv: Complex64 = left.iter().zip(right.iter()).map(|(w, v)| w * v).sum();
        if wv.norm() < 1e-14 {
            return Err(Error::Eigen(format!("defective eigenvalue {lam}")));
        }
        left /= wv;
        let mode = Mode { eigenvalue: lam, right, left };
        let res = mode.residual(a);
        if res > EIG_RESIDUAL_TOL * scale.max(1.0) {
            return Err(Error::Eigen(format!(
                "residual {res:.3e} at {lam} exceeds tolerance (max |a_ij| = {scale:.3e})"
            )));
        }
        if !real {
            modes.push(mode.conj());
        }
        modes.push(mode);
    }
    modes.sort_by(|p, q| q.eigenvalue.re.total_cmp(&p.eigenvalue.re).then(q.eigenvalue.im.total_cmp(&p.eigenvalue.im)));
    Ok(modes)
}

pub fn is_unstable(mode: &Mode) -> bool {
    mode.eigenvalue.re > ZERO_REAL_TOL
}

/// True when every pair of shape entries is within `IN_PHASE_DEG` of each other.
fn in_phase(shape: &[Complex64]) -> bool {
    let tol = IN_PHASE_DEG.to_radians();
    shape.iter().enumerate().all(|(i, a)| {
        shape[i + 1..].iter().all(|b| {
            let d = (a * b.conj()).arg().abs();
            a.norm() > 0.0 && b.norm() > 0.0 && d < tol
        })
    })
}

/// Checks the frequency-mode criteria for one mode.
pub fn is_frequency_mode(mode: &Mode, speed_indices: &[usize]) -> bool {
    if mode.eigenvalue.im <= 0.0 || speed_indices.is_empty() {
        return false;
    }
    let fn_hz = mode.natural_frequency_hz();
    if !(FREQ_BAND_HZ.0..=FREQ_BAND_HZ.1).contains(&fn_hz) {
        return false;
    }
    if !in_phase(&mode.shape(speed_indices)) {
        return false;
    }
    let part: Vec<f64> = speed_indices.iter().map(|&i| mode.participation(i)).collect();
    let max = part.iter().cloned().fold(0.0, f64::max);
    max > 0.0 && part.iter().all(|p| *p >= MIN_SPEED_PARTICIPATION * max)
}

/// Selects the global, in-phase, low-frequency oscillatory mode (upper
/// half-plane member of its conjugate pair).
pub fn identify_frequency_mode(modes: &[Mode], speed_indices: &[usize]) -> Result<Mode> {
    let found: Vec<&Mode> = modes.iter().filter(|m| is_frequency_mode(m, speed_indices)).collect();
    match found.len() {
        0 => Err(Error::NoQualifyingMode),
        1 => Ok(found[0].clone()),
        n => Err(Error::AmbiguousMode(n)),
    }
}

/// Measured converter signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Signal {
    Rho,
    Omega,
    OmegaTilde(f64),
}

impl Signal {
    pub fn name(&self) -> String {
        match self {
            Signal::Rho => "rho".into(),
            Signal::Omega => "omega".into(),
            Signal::OmegaTilde(k) => format!("omega_tilde(K={k})"),
        }
    }
}

fn signal_value(model: &SystemModel, x: &[f64], y: &[f64], signal: Signal) -> Result<f64> {
    let out = model.cig_outputs(0, x, y)?;
    Ok(match signal {
        Signal::Rho => out.rho_est,
        Signal::Omega => out.omega_est,
        Signal::OmegaTilde(k) => out.omega_est - k * out.rho_est,
    })
}

/// `c_i = ∂signal/∂x_i` at the equilibrium, with the algebraic variables
/// re-solved for every perturbed state. Uses the first converter.
pub fn output_row(model: &SystemModel, eq: &SystemState, signal: Signal, eps: f64) -> Result<DVector<f64>> {
    if model.cigs().is_empty() {
        return Err(Error::InvalidArgument("output rows need a converter".into()));
    }
    let mut c = DVector::zeros(model.n_x());
    let mut xp = eq.x.clone();
    for i in 0..model.n_x() {
        let h = eps * (1.0 + eq.x[i].abs());
        let mut eval = |v: f64| -> Result<f64> {
            xp[i] = v;
            let y = model.solve_algebraic(&xp, &eq.y)?;
            signal_value(model, &xp, &y, signal)
        };
        let plus = eval(eq.x[i] + h)?;
        let minus = eval(eq.x[i] - h)?;
        xp[i] = eq.x[i];
        c[i] = (plus - minus) / (2.0 * h);
    }
    Ok(c)
}

/// `|c φ| / (‖c‖ ‖φ‖)`
pub fn geometric_observability(c: &DVector<f64>, phi: &DVector<Complex64>) -> Result<f64> {
    if c.len() != phi.len() {
        return Err(Error::InvalidArgument(format!("length mismatch {} vs {}", c.len(), phi.len())));
    }
    let (nc, np) = (c.norm(), phi.norm());
    if nc == 0.0 || np == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: Complex64 = c.iter().zip(phi.iter()).map(|(a, b)| b * *a).sum();
    Ok((dot.norm() / (nc * np)).min(1.0))
}

/// Observability of the frequency mode in each measured signal.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityReport {
    pub eigenvalue: Complex64,
    pub go_rho: f64,
    pub go_omega: f64,
    pub k: Vec<f64>,
    pub go_omega_tilde: Vec<f64>,
    /// `go(ω̃(K)) / go(ω)` per grid point.
    pub ratio: Vec<f64>,
}

impl ObservabilityReport {
    /// Raw and max-normalized values of `(ω̃(K), ω, ρ)` at grid point `i`.
    pub fn table(&self, i: usize) -> [(f64, f64); 3] {
        let raw = [self.go_omega_tilde[i], self.go_omega, self.go_rho];
        let max = raw.iter().cloned().fold(0.0, f64::max);
        raw.map(|v| (v, v / max))
    }

    pub fn index_of_k(&self, k: f64) -> Option<usize> {
        self.k.iter().position(|v| (v - k).abs() < 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,go_omega_tilde,go_omega,go_rho,ratio\n");
        for i in 0..self.k.len() {
            let row = [self.k[i], self.go_omega_tilde[i], self.go_omega, self.go_rho, self.ratio[i]];
            let cells: Vec<String> = row.iter().map(|v| crate::report::fmt_sig(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Evaluates `go` of `mode` for `ρ`, `ω` and `ω̃(K)` over the grid `ks`.
pub fn k_sweep(
    model: &SystemModel,
    eq: &SystemState,
    mode: &Mode,
    ks: &[f64],
    eps: f64,
) -> Result<ObservabilityReport> {
    let phi = &mode.right;
    let go_rho = geometric_observability(&output_row(model, eq, Signal::Rho, eps)?, phi)?;
    let go_omega = geometric_observability(&output_row(model, eq, Signal::Omega, eps)?, phi)?;
    let mut go_tilde = Vec::with_capacity(ks.len());
    let mut ratio = Vec::with_capacity(ks.len());
    for &k in ks {
        let g = if k == 0.0 {
            go_omega
        } else {
            geometric_observability(&output_row(model, eq, Signal::OmegaTilde(k), eps)?, phi)?
        };
        go_tilde.push(g);
        ratio.push(g / go_omega);
    }
    Ok(ObservabilityReport {
        eigenvalue: mode.eigenvalue,
        go_rho,
        go_omega,
        k: ks.to_vec(),
        go_omega_tilde: go_tilde,
        ratio,
    })
}

/// Inclusive grid `k_min, k_min + step, ...` up to `k_max`, rounded to
/// twelve decimals so that grid points such as 0 and 1 are exact.
pub fn k_grid(k_min: f64, k_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(k_max >= k_min) {
        return Err(Error::InvalidArgument(format!("bad K grid [{k_min}, {k_max}] step {step}")));
    }
    let n = ((k_max - k_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((k_min + i as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Eigenvalue table; `frequency_mode` marks modes passing the criteria.
pub fn eigen_table_csv(modes: &[Mode], speed_indices: &[usize]) -> String {
    let mut s = String::from("index,real,imag,natural_hz,damping_ratio,frequency_mode,unstable\n");
    for (i, m) in modes.iter().enumerate() {
        let f = crate::report::fmt_sig;
        s.push_str(&format!(
            "{i},{},{},{},{},{},{}\n",
            f(m.eigenvalue.re),
            f(m.eigenvalue.im),
            f(m.natural_frequency_hz()),
            f(m.damping_ratio()),
            is_frequency_mode(m, speed_indices) as u8,
            is_unstable(m) as u8
        ));
    }
    s
}

/// Machine-speed mode shape (`machine, magnitude, angle_deg`).
pub fn mode_shape_csv(mode: &Mode, speed_indices: &[usize], machine_ids: &[i64]) -> String {
    let mut s = String::from("machine,magnitude,angle_deg\n");
    for (id, c) in machine_ids.iter().zip(mode.shape(speed_indices)) {
        s.push_str(&format!(
            "{id},{},{}\n",
            crate::report::fmt_sig(c.norm()),
            crate::report::fmt_sig(c.arg().to_degrees())
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    struct LinearDae {
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    }

    impl Dae for LinearDae {
        fn n_x(&self) -> usize {
            self.a.nrows()
        }
        fn n_y(&self) -> usize {
            self.d.nrows()
        }
        fn eval_f(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
            let r = &self.a * DVector::from_column_slice(x) + &self.b * DVector::from_column_slice(y);
            out.copy_from_slice(r.as_slice());
            Ok(())
        }
        fn eval_g(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
            let r = &self.c * DVector::from_column_slice(x) + &self.d * DVector::from_column_slice(y);
            out.copy_from_slice(r.as_slice());
            Ok(())
        }
    }

    fn lm(a: DMatrix<f64>) -> LinearModel {
        let n = a.nrows();
        LinearModel { a, labels: (0..n).map(|i| format!("x{i}")).collect() }
    }

    #[test]
    fn linear_dae_reduces_exactly() {
        let dae = LinearDae {
            a: DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]),
            b: DMatrix::from_row_slice(2, 1, &[1.0, 0.5]),
            c: DMatrix::from_row_slice(1, 2, &[2.0, -1.0]),
            d: DMatrix::from_row_slice(1, 1, &[-4.0]),
        };
        let a = linearize_dae(&dae, &[0.0, 0.0], &[0.0], 1e-6).unwrap();
        // y = (2 x0 - x1) / 4
        let expected = DMatrix::from_row_slice(2, 2, &[-0.5, 1.75, 0.25, -3.125]);
        assert!((a - expected).amax() < 1e-8);
    }

    #[test]
    fn diagonal_spectrum() {
        let modes = eigensolve(&lm(DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0])))).unwrap();
        assert_eq!(modes.len(), 2);
        assert_abs_diff_eq!(modes[0].eigenvalue.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(modes[1].eigenvalue.re, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(modes[0].right[0].norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(modes[0].right[1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_spectrum() {
        let modes = eigensolve(&lm(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]))).unwrap();
        assert_eq!(modes.len(), 2);
        assert_abs_diff_eq!(modes[0].eigenvalue.im, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(modes[1].eigenvalue.im, -1.0, epsilon = 1e-12);
        for m in &modes {
            assert!(m.residual(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])) < 1e-12);
        }
    }

    #[test]
    fn left_right_normalization() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.5, -2.0, -0.3, 0.0, 0.1, 0.4, -4.0]);
        let modes = eigensolve(&lm(a.clone())).unwrap();
        for m in &modes {
            let wv: Complex64 = m.left.iter().zip(m.right.iter()).map(|(w, v)| w * v).sum();
            assert_abs_diff_eq!(wv.re, 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(wv.im, 0.0, epsilon = 1e-10);
            let ac = a.map(|v| Complex64::new(v, 0.0));
            let lhs = ac.transpose() * &m.left;
            assert!((lhs - &m.left * m.eigenvalue).norm() < 1e-10);
            let total: f64 = (0..3).map(|k| (m.left[k] * m.right[k]).re).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }

    fn synthetic_mode(lambda: Complex64, speeds: [Complex64; 3]) -> Mode {
        let right = DVector::from_vec(speeds.to_vec());
        let left = right.map(|c| c.conj() / right.norm_squared());
        Mode { eigenvalue: lambda, right, left }
    }

    #[test]
    fn picks_single_in_phase_low_frequency_mode() {
        let w = 2.0 * PI * 0.05;
        let one = Complex64::new(1.0, 0.0);
        let target = synthetic_mode(
            Complex64::new(-0.05, w),
            [one, Complex64::from_polar(0.8, 0.1), Complex64::from_polar(0.9, -0.2)],
        );
        let local = synthetic_mode(Complex64::new(-0.5, 2.0 * PI * 1.5), [one, -one, Complex64::new(0.1, 0.0)]);
        let antiphase = synthetic_mode(Complex64::new(-0.05, 2.0 * PI * 0.06), [one, -one, one]);
        let modes = vec![local.clone(), target.clone(), target.conj(), antiphase];
        let found = identify_frequency_mode(&modes, &[0, 1, 2]).unwrap();
        assert_eq!(found.eigenvalue, target.eigenvalue);
    }

    #[test]
    fn no_low_frequency_mode() {
        let one = Complex64::new(1.0, 0.0);
        let m = synthetic_mode(Complex64::new(-0.5, 2.0 * PI * 1.5), [one, one, one]);
        assert!(matches!(identify_frequency_mode(&[m], &[0, 1, 2]), Err(Error::NoQualifyingMode)));
    }

    #[test]
    fn two_candidates_are_ambiguous() {
        let one = Complex64::new(1.0, 0.0);
        let a = synthetic_mode(Complex64::new(-0.1, 0.3), [one, one, one]);
        let b = synthetic_mode(Complex64::new(-0.1, 0.4), [one, one, one]);
        assert!(matches!(identify_frequency_mode(&[a, b], &[0, 1, 2]), Err(Error::AmbiguousMode(2))));
    }

    #[test]
    fn local_participation_fails_globality() {
        let one = Complex64::new(1.0, 0.0);
        let m = synthetic_mode(Complex64::new(-0.1, 0.3), [one, Complex64::new(0.2, 0.0), Complex64::new(0.01, 0.0)]);
        assert!(!is_frequency_mode(&m, &[0, 1, 2]));
    }

    #[test]
    fn go_extremes() {
        let phi = DVector::from_vec(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0)]);
        assert_abs_diff_eq!(
            geometric_observability(&DVector::from_vec(vec![3.0, 0.0]), &phi).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(geometric_observability(&DVector::from_vec(vec![0.0, 2.0]), &phi).unwrap(), 0.0);
        assert!(matches!(geometric_observability(&DVector::zeros(2), &phi), Err(Error::ZeroVector)));
    }

    #[test]
    fn grid_arithmetic() {
        let g = k_grid(-0.1, 2.0, 0.05).unwrap();
        assert_eq!(g.len(), 43);
        assert!(g.contains(&0.0));
        assert!(g.contains(&1.0));
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(k_grid(1.0, 0.0, 0.1).is_err());
    }
}
