//! Micro problems: lift macro data to a quadratic polynomial, size the
//! periodic box by finite speed of propagation, and run leap-frog on the
//! deviation `w = u - uhat`.
//!
//! The micro model keeps `u - uhat` periodic on the box, so working in `w`
//! turns the boundary condition into a plain periodic wrap:
//!
//! ```text
//! w_tt = A : D2 w + A : hess(uhat),   w(0) = 0,  w_t(0) = 0.
//! ```
//!
//! The quadratic `uhat` is always evaluated analytically; only `w` is ever
//! differenced. Negative times come for free by mirroring (`u(t) = u(-t)`
//! because the initial velocity is zero), so the solver marches `[0, tau/2]`
//! and the stored field mirrors bitwise.

use crate::coefficient::{CoefficientField, SymMat};
use crate::error::{EfaError, Result};
use nalgebra::{DMatrix, DVector};

/// d-variate polynomial of total degree <= 2 centered at `x_I`:
/// `uhat(x) = c0 + grad . (x - x_I) + (x - x_I)^T hess (x - x_I) / 2`.
#[derive(Debug, Clone)]
pub struct QuadraticPoly {
    pub dim: usize,
    pub center: [f64; 2],
    pub c0: f64,
    pub grad: [f64; 2],
    pub hess: SymMat,
}

impl QuadraticPoly {
    pub fn new(dim: usize, center: [f64; 2], c0: f64, grad: [f64; 2], hess: SymMat) -> Self {
        QuadraticPoly { dim, center, c0, grad, hess }
    }

    /// Pure second-order probe `x_i x_j`-type polynomial with the given
    /// Hessian and no affine part.
    pub fn probe(dim: usize, center: [f64; 2], hess: SymMat) -> Self {
        QuadraticPoly { dim, center, c0: 0.0, grad: [0.0; 2], hess }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut dx = [0.0; 2];
        for i in 0..self.dim {
            dx[i] = x[i] - self.center[i];
        }
        let mut v = self.c0;
        for i in 0..self.dim {
            v += self.grad[i] * dx[i];
        }
        let h = &self.hess;
        v += 0.5 * (h.get(0, 0) * dx[0] * dx[0]);
        if self.dim == 2 {
            v += 0.5 * h.get(1, 1) * dx[1] * dx[1] + h.get(0, 1) * dx[0] * dx[1];
        }
        v
    }

    pub fn trace_hess(&self) -> f64 {
        self.hess.trace()
    }
}

/// Least-squares quadratic over the monomials `{1, x_i, x_i x_j}` fit to a
/// grid patch. `offsets` are node offsets from `x_I` in units of `h`; a full
/// symmetric patch is `(2m+1)^d` points, but clipped one-sided patches near
/// Dirichlet boundaries are fine as long as the normal system keeps rank.
///
/// Data that is itself quadratic is reproduced exactly (up to roundoff); the
/// normal equations are formed in patch coordinates `s = (x - x_I)/h` for
/// conditioning.
pub fn fit_quadratic(
    dim: usize,
    offsets: &[[i64; 2]],
    values: &[f64],
    h: f64,
    x_center: [f64; 2],
) -> Result<QuadraticPoly> {
    assert_eq!(offsets.len(), values.len());
    let n_basis = if dim == 1 { 3 } else { 6 };
    if offsets.len() < n_basis {
        return Err(EfaError::Precondition(format!(
            "quadratic fit needs at least {n_basis} points, got {}",
            offsets.len()
        )));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(EfaError::Precondition("non-finite value in fit patch".into()));
    }
    let rows = offsets.len();
    let mut design = DMatrix::zeros(rows, n_basis);
    for (r, off) in offsets.iter().enumerate() {
        let s = off[0] as f64;
        let t = off[1] as f64;
        design[(r, 0)] = 1.0;
        design[(r, 1)] = s;
        design[(r, 2)] = s * s;
        if dim == 2 {
            design[(r, 3)] = t;
            design[(r, 4)] = t * t;
            design[(r, 5)] = s * t;
        }
    }
    let rhs = DVector::from_column_slice(values);
    let normal = design.transpose() * &design;
    let b = design.transpose() * rhs;
    let sol = normal.lu().solve(&b).ok_or_else(|| {
        EfaError::Degenerate("rank-deficient quadratic fit patch".into())
    })?;
    let (c0, grad, hess);
    if dim == 1 {
        c0 = sol[0];
        grad = [sol[1] / h, 0.0];
        hess = SymMat::new_1d(2.0 * sol[2] / (h * h));
    } else {
        c0 = sol[0];
        grad = [sol[1] / h, sol[3] / h];
        hess = SymMat::new_2d(
            2.0 * sol[2] / (h * h),
            2.0 * sol[4] / (h * h),
            sol[5] / (h * h),
        );
    }
    Ok(QuadraticPoly { dim, center: x_center, c0, grad, hess })
}

/// Half-width of the micro box: the averaging window plus the distance waves
/// can travel over half the averaging time, rounded up to whole micro cells.
/// `sup_norm` already carries the 5% safety inflation, which keeps the
/// periodization seam strictly outside the physical cone of the window.
pub fn size_micro_box(eta: f64, tau: f64, field: &CoefficientField, dx: f64) -> f64 {
    let ell = 0.5 * eta + 0.5 * tau * field.sup_norm().sqrt();
    (ell / dx).ceil() * dx
}

/// Fully specified micro problem.
#[derive(Debug, Clone)]
pub struct MicroProblemSpec<'a> {
    pub field: &'a CoefficientField,
    pub uhat: QuadraticPoly,
    pub eta: f64,
    pub tau: f64,
    /// half-width of the box (multiple of `dx`)
    pub ell: f64,
    pub dx: f64,
    pub dt: f64,
    /// time steps to `tau/2` (`dt * steps == tau/2`)
    pub steps: usize,
    /// window half-width in cells (`n_win * dx == eta/2`)
    pub n_win: usize,
}

impl<'a> MicroProblemSpec<'a> {
    /// Builds a spec with the default resolution policy: at least
    /// `points_per_eps` micro cells per `eps` (adjusted so the averaging
    /// window edge lands on a grid node), time step at 90% of the CFL limit
    /// (adjusted to divide `tau/2` exactly).
    pub fn build(
        field: &'a CoefficientField,
        uhat: QuadraticPoly,
        eta: f64,
        tau: f64,
        points_per_eps: usize,
    ) -> Result<MicroProblemSpec<'a>> {
        if eta <= 0.0 || tau <= 0.0 {
            return Err(EfaError::Config("eta and tau must be positive".into()));
        }
        if points_per_eps < 10 {
            return Err(EfaError::Config(
                "micro resolution below 10 points per eps does not resolve the microstructure"
                    .into(),
            ));
        }
        let eps = field.epsilon();
        let half_win = 0.5 * eta;
        // fuzz-tolerant ceiling keeps dx <= eps/points_per_eps while leaving
        // exactly-commensurate windows untouched
        let n_win = ((half_win / (eps / points_per_eps as f64)) - 1e-9)
            .ceil()
            .max(2.0) as usize;
        let dx = half_win / n_win as f64;
        let ell = size_micro_box(eta, tau, field, dx);
        let d = field.dim() as f64;
        let dt_limit = dx / (d * field.sup_norm()).sqrt();
        let dt_target = 0.9 * dt_limit;
        let steps = ((0.5 * tau) / dt_target).ceil() as usize;
        let dt = 0.5 * tau / steps as f64;
        let spec = MicroProblemSpec { field, uhat, eta, tau, ell, dx, dt, steps, n_win };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.field.dim() as f64;
        let min_ell = 0.5 * self.eta + 0.5 * self.tau * self.field.sup_norm().sqrt();
        if self.ell < min_ell - 1e-12 {
            return Err(EfaError::Config(format!(
                "micro box half-width {} below finite-speed bound {}",
                self.ell, min_ell
            )));
        }
        if self.dt >= 2.0 * self.dx / (d * self.field.upper_bound().sqrt()) {
            return Err(EfaError::Config("micro CFL violated".into()));
        }
        if self.dx > self.field.epsilon() / 10.0 + 1e-15 {
            return Err(EfaError::Config(format!(
                "micro dx {} does not resolve eps {}",
                self.dx,
                self.field.epsilon()
            )));
        }
        if (self.n_win as f64 * self.dx - 0.5 * self.eta).abs() > 1e-9 * self.eta {
            return Err(EfaError::Config("averaging window not grid aligned".into()));
        }
        Ok(())
    }
}

/// Micro solution samples on the space-time averaging window
/// `[-tau/2, tau/2] x omega_eta`, mirrored in time.
#[derive(Debug, Clone)]
pub struct MicroField {
    pub dim: usize,
    /// window half-width in cells per axis
    pub n_win: usize,
    pub dx: f64,
    pub dt: f64,
    /// steps to `tau/2`; stored time samples run `-steps ..= steps`
    pub steps: usize,
    pub center: [f64; 2],
    /// `u` on the window, time-major; slice `m` holds time `(m - steps) * dt`
    pub u: Vec<Vec<f64>>,
    /// `sum_ij A_ij d_ij u` on the window, same layout
    pub flux_integrand: Vec<Vec<f64>>,
}

impl MicroField {
    pub fn window_nodes_per_axis(&self) -> usize {
        2 * self.n_win + 1
    }

    /// Sample index for time `m * dt`, `m` in `-steps ..= steps`.
    pub fn time_slice(&self, m: i64) -> &[f64] {
        let idx = (m + self.steps as i64) as usize;
        &self.u[idx]
    }

    pub fn flux_slice(&self, m: i64) -> &[f64] {
        let idx = (m + self.steps as i64) as usize;
        &self.flux_integrand[idx]
    }
}

/// Workspace handed to step observers: geometry plus the coefficient and
/// source arrays on the box grid.
pub struct MicroWorkspace {
    pub dim: usize,
    pub n_half_box: usize,
    pub n_axis: usize,
    pub n_win: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    /// coefficient entries on box nodes (a22/a12 empty in 1D)
    pub a11: Vec<f64>,
    pub a22: Vec<f64>,
    pub a12: Vec<f64>,
    /// `A(x) : hess(uhat)` on box nodes
    pub source: Vec<f64>,
    /// wrapped neighbor index tables
    ip: Vec<usize>,
    im: Vec<usize>,
}

impl MicroWorkspace {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_axis + j
    }

    /// Flux integrand `A : (D2 w + hess)` at the window nodes of slice `w`,
    /// written to `out` in row-major window order.
    pub fn window_integrand(&self, w: &[f64], hess: &SymMat, out: &mut [f64]) {
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        let lo = self.n_half_box - self.n_win;
        let win = 2 * self.n_win + 1;
        if self.dim == 1 {
            for (k, o) in out.iter_mut().enumerate() {
                let i = lo + k;
                let d2 = (w[self.ip[i]] - 2.0 * w[i] + w[self.im[i]]) * inv_dx2;
                *o = self.a11[i] * (d2 + hess.get(0, 0));
            }
        } else {
            let h11 = hess.get(0, 0);
            let h22 = hess.get(1, 1);
            let h12 = hess.get(0, 1);
            for ki in 0..win {
                let i = lo + ki;
                let (ipi, imi) = (self.ip[i], self.im[i]);
                for kj in 0..win {
                    let j = lo + kj;
                    let (ipj, imj) = (self.ip[j], self.im[j]);
                    let c = self.idx(i, j);
                    let dxx = (w[self.idx(ipi, j)] - 2.0 * w[c] + w[self.idx(imi, j)]) * inv_dx2;
                    let dyy = (w[self.idx(i, ipj)] - 2.0 * w[c] + w[self.idx(i, imj)]) * inv_dx2;
                    let dxy = (w[self.idx(ipi, ipj)] - w[self.idx(ipi, imj)]
                        - w[self.idx(imi, ipj)]
                        + w[self.idx(imi, imj)])
                        * (0.25 * inv_dx2);
                    out[ki * win + kj] = self.a11[c] * (dxx + h11)
                        + self.a22[c] * (dyy + h22)
                        + 2.0 * self.a12[c] * (dxy + h12);
                }
            }
        }
    }

    /// `uhat` evaluated at window nodes, row-major.
    pub fn window_uhat(&self, uhat: &QuadraticPoly) -> Vec<f64> {
        let win = 2 * self.n_win + 1;
        let lo = self.n_half_box as i64 - self.n_win as i64;
        if self.dim == 1 {
            (0..win)
                .map(|k| {
                    let off = (lo + k as i64 - self.n_half_box as i64) as f64 * self.dx;
                    uhat.eval(&[uhat.center[0] + off])
                })
                .collect()
        } else {
            let mut out = Vec::with_capacity(win * win);
            for ki in 0..win {
                let ox = (lo + ki as i64 - self.n_half_box as i64) as f64 * self.dx;
                for kj in 0..win {
                    let oy = (lo + kj as i64 - self.n_half_box as i64) as f64 * self.dx;
                    out.push(uhat.eval(&[uhat.center[0] + ox, uhat.center[1] + oy]));
                }
            }
            out
        }
    }

    /// Window values of `w` copied out (`u = w + uhat` is assembled by the
    /// caller where needed).
    pub fn window_values(&self, w: &[f64], out: &mut [f64]) {
        let lo = self.n_half_box - self.n_win;
        let win = 2 * self.n_win + 1;
        if self.dim == 1 {
            out.copy_from_slice(&w[lo..lo + win]);
        } else {
            for ki in 0..win {
                let row = self.idx(lo + ki, lo);
                out[ki * win..(ki + 1) * win].copy_from_slice(&w[row..row + win]);
            }
        }
    }
}

/// Runs the leap-frog march for `w = u - uhat`, invoking `observe` with every
/// time slice from `m = 0` (initial data) to `m = steps` (`t = tau/2`).
///
/// Streaming through an observer keeps memory at `O(box)` even for very fine
/// sweeps; `solve_micro` stores the window history on top of this.
pub fn run_micro<F>(spec: &MicroProblemSpec, mut observe: F) -> Result<()>
where
    F: FnMut(usize, &[f64], &MicroWorkspace) -> Result<()>,
{
    spec.validate()?;
    let dim = spec.field.dim();
    let n_half_box = (spec.ell / spec.dx).round() as usize;
    if n_half_box <= spec.n_win + 1 {
        return Err(EfaError::Config("micro box does not contain the window".into()));
    }
    let n_axis = 2 * n_half_box;
    let total = if dim == 1 { n_axis } else { n_axis * n_axis };

    let mut ws = MicroWorkspace {
        dim,
        n_half_box,
        n_axis,
        n_win: spec.n_win,
        dx: spec.dx,
        dt: spec.dt,
        steps: spec.steps,
        a11: vec![0.0; total],
        a22: if dim == 2 { vec![0.0; total] } else { Vec::new() },
        a12: if dim == 2 { vec![0.0; total] } else { Vec::new() },
        source: vec![0.0; total],
        ip: (0..n_axis).map(|i| (i + 1) % n_axis).collect(),
        im: (0..n_axis).map(|i| (i + n_axis - 1) % n_axis).collect(),
    };

    let center = spec.uhat.center;
    let hess = spec.uhat.hess;
    if dim == 1 {
        for i in 0..n_axis {
            let x = center[0] + (i as i64 - n_half_box as i64) as f64 * spec.dx;
            let a = spec.field.eval_1d(x);
            ws.a11[i] = a;
            ws.source[i] = a * hess.get(0, 0);
        }
    } else {
        for i in 0..n_axis {
            let x = center[0] + (i as i64 - n_half_box as i64) as f64 * spec.dx;
            for j in 0..n_axis {
                let y = center[1] + (j as i64 - n_half_box as i64) as f64 * spec.dx;
                let m = spec.field.eval(&[x, y]);
                let c = i * n_axis + j;
                ws.a11[c] = m.get(0, 0);
                ws.a22[c] = m.get(1, 1);
                ws.a12[c] = m.get(0, 1);
                ws.source[c] = m.contract(&hess);
            }
        }
    }

    let dt2 = spec.dt * spec.dt;
    let mut w_prev = vec![0.0; total];
    let mut w_curr: Vec<f64> = ws.source.iter().map(|s| 0.5 * dt2 * s).collect();
    let mut w_next = vec![0.0; total];

    observe(0, &w_prev, &ws)?;
    let inv_dx2 = 1.0 / (spec.dx * spec.dx);
    for m in 1..=spec.steps {
        observe(m, &w_curr, &ws)?;
        if m == spec.steps {
            break;
        }
        if dim == 1 {
            for i in 0..n_axis {
                let lap = (w_curr[ws.ip[i]] - 2.0 * w_curr[i] + w_curr[ws.im[i]]) * inv_dx2;
                w_next[i] = 2.0 * w_curr[i] - w_prev[i] + dt2 * (ws.a11[i] * lap + ws.source[i]);
            }
        } else {
            for i in 0..n_axis {
                let (ipi, imi) = (ws.ip[i], ws.im[i]);
                for j in 0..n_axis {
                    let (ipj, imj) = (ws.ip[j], ws.im[j]);
                    let c = i * n_axis + j;
                    let w0 = w_curr[c];
                    let dxx = (w_curr[ipi * n_axis + j] - 2.0 * w0 + w_curr[imi * n_axis + j])
                        * inv_dx2;
                    let dyy = (w_curr[i * n_axis + ipj] - 2.0 * w0 + w_curr[i * n_axis + imj])
                        * inv_dx2;
                    let dxy = (w_curr[ipi * n_axis + ipj] - w_curr[ipi * n_axis + imj]
                        - w_curr[imi * n_axis + ipj]
                        + w_curr[imi * n_axis + imj])
                        * (0.25 * inv_dx2);
                    w_next[c] = 2.0 * w0 - w_prev[c]
                        + dt2
                            * (ws.a11[c] * dxx
                                + ws.a22[c] * dyy
                                + 2.0 * ws.a12[c] * dxy
                                + ws.source[c]);
                }
            }
        }
        if !w_next[0].is_finite() || w_next.iter().any(|v| !v.is_finite()) {
            return Err(EfaError::Instability { step: m + 1, t: (m + 1) as f64 * spec.dt });
        }
        std::mem::swap(&mut w_prev, &mut w_curr);
        std::mem::swap(&mut w_curr, &mut w_next);
    }
    Ok(())
}

/// Solves the micro problem and stores `u` and the flux integrand on the
/// averaging window for `t` in `[-tau/2, tau/2]`; negative times are bitwise
/// mirrors of positive ones.
pub fn solve_micro(spec: &MicroProblemSpec) -> Result<MicroField> {
    let dim = spec.field.dim();
    let win_total = if dim == 1 {
        2 * spec.n_win + 1
    } else {
        (2 * spec.n_win + 1) * (2 * spec.n_win + 1)
    };
    let mut forward_u: Vec<Vec<f64>> = Vec::with_capacity(spec.steps + 1);
    let mut forward_flux: Vec<Vec<f64>> = Vec::with_capacity(spec.steps + 1);
    let mut uhat_window: Option<Vec<f64>> = None;
    run_micro(spec, |_m, w, ws| {
        let uh = uhat_window.get_or_insert_with(|| ws.window_uhat(&spec.uhat));
        let mut uw = vec![0.0; win_total];
        ws.window_values(w, &mut uw);
        for (u, h) in uw.iter_mut().zip(uh.iter()) {
            *u += h;
        }
        let mut fw = vec![0.0; win_total];
        ws.window_integrand(w, &spec.uhat.hess, &mut fw);
        forward_u.push(uw);
        forward_flux.push(fw);
        Ok(())
    })?;

    let mut u = Vec::with_capacity(2 * spec.steps + 1);
    let mut flux = Vec::with_capacity(2 * spec.steps + 1);
    for m in (1..=spec.steps).rev() {
        u.push(forward_u[m].clone());
        flux.push(forward_flux[m].clone());
    }
    u.extend(forward_u);
    flux.extend(forward_flux);

    Ok(MicroField {
        dim,
        n_win: spec.n_win,
        dx: spec.dx,
        dt: spec.dt,
        steps: spec.steps,
        center: spec.uhat.center,
        u,
        flux_integrand: flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fit_reproduces_quadratic_exactly() {
        // g(x) = x^2 on a 5-point patch centered at x_I
        let x_i = 0.7;
        let h = 0.1;
        let offsets: Vec<[i64; 2]> = (-2..=2).map(|s| [s, 0]).collect();
        let values: Vec<f64> = offsets
            .iter()
            .map(|o| {
                let x = x_i + o[0] as f64 * h;
                x * x
            })
            .collect();
        let p = fit_quadratic(1, &offsets, &values, h, [x_i, 0.0]).unwrap();
        assert_abs_diff_eq!(p.c0, x_i * x_i, epsilon = 1e-12);
        assert_abs_diff_eq!(p.grad[0], 2.0 * x_i, epsilon = 1e-11);
        assert_abs_diff_eq!(p.hess.get(0, 0), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn fit_constant_data() {
        let offsets: Vec<[i64; 2]> = (-2..=2).map(|s| [s, 0]).collect();
        let values = vec![7.0; 5];
        let p = fit_quadratic(1, &offsets, &values, 0.05, [0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.c0, 7.0, epsilon = 1e-13);
        assert_abs_diff_eq!(p.grad[0], 0.0, epsilon = 1e-11);
        assert_abs_diff_eq!(p.hess.get(0, 0), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn fit_cubic_matches_normal_equation_oracle() {
        // independent oracle: explicit 3x3 normal equations on the same patch
        let h = 0.1;
        let offsets: Vec<[i64; 2]> = (-2..=2).map(|s| [s, 0]).collect();
        let values: Vec<f64> = offsets.iter().map(|o| (o[0] as f64 * h).powi(3)).collect();
        let p = fit_quadratic(1, &offsets, &values, h, [0.0, 0.0]).unwrap();

        // oracle in s = x/h coordinates: basis {1, s, s^2}
        let mut m = [[0.0f64; 3]; 3];
        let mut b = [0.0f64; 3];
        for (o, &v) in offsets.iter().zip(values.iter()) {
            let s = o[0] as f64;
            let row = [1.0, s, s * s];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += row[i] * row[j];
                }
                b[i] += row[i] * v;
            }
        }
        // solve 3x3 by Cramer
        let det = |a: &[[f64; 3]; 3]| {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let d = det(&m);
        let mut m2 = m;
        for r in 0..3 {
            m2[r][2] = b[r];
        }
        let c2 = det(&m2) / d;
        let oracle_hess = 2.0 * c2 / (h * h);
        assert_abs_diff_eq!(p.hess.get(0, 0), oracle_hess, epsilon = 1e-9);

        // cubic is not in the basis: residual must be nonzero
        let resid: f64 = offsets
            .iter()
            .zip(values.iter())
            .map(|(o, &v)| {
                let x = o[0] as f64 * h;
                (p.eval(&[x]) - v).powi(2)
            })
            .sum();
        assert!(resid > 1e-12);
    }

    #[test]
    fn fit_2d_quadratic_with_cross_term() {
        let h = 0.2;
        let mut offsets = Vec::new();
        for s in -2..=2i64 {
            for t in -2..=2i64 {
                offsets.push([s, t]);
            }
        }
        let f = |x: f64, y: f64| 1.0 - 2.0 * x + y + 3.0 * x * x - x * y + 0.5 * y * y;
        let values: Vec<f64> = offsets
            .iter()
            .map(|o| f(o[0] as f64 * h, o[1] as f64 * h))
            .collect();
        let p = fit_quadratic(2, &offsets, &values, h, [0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.hess.get(0, 0), 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.hess.get(1, 1), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.hess.get(0, 1), -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.grad[0], -2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(p.grad[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn box_sizing_arithmetic() {
        let field = CoefficientField::per_sin_1d(0.01);
        // eta = tau = 0.1, |A|_inf = 2.1 * 1.05: ell >= 0.05 + 0.05 sqrt(2.205)
        let ell = size_micro_box(0.1, 0.1, &field, 0.0005);
        assert!(ell >= 0.1225, "ell = {ell}");
        assert!(ell <= 0.131, "ell = {ell}");
        // tau = 0 -> half the window only
        let ell0 = size_micro_box(0.1, 0.0, &field, 0.0005);
        assert_abs_diff_eq!(ell0, 0.05, epsilon = 1e-12);
        // constant a = 1 with inflation
        let cf = CoefficientField::constant(1, 1.0, 0.01).unwrap();
        let ellc = size_micro_box(0.1, 0.1, &cf, 1e-6);
        assert_abs_diff_eq!(ellc, 0.05 + 0.05 * 1.05f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn constant_medium_quadratic_data_is_exact() {
        // a = c, uhat = x^2: u(t, x) = x^2 + 2 c t^2 / 2 exactly at nodes
        let c = 1.7;
        let field = CoefficientField::constant(1, c, 0.02).unwrap();
        // uhat(x) = x^2 expressed around the box center 0.3
        let uhat = QuadraticPoly::new(1, [0.3, 0.0], 0.09, [0.6, 0.0], SymMat::new_1d(2.0));
        let spec = MicroProblemSpec::build(&field, uhat, 0.1, 0.1, 20).unwrap();
        let mf = solve_micro(&spec).unwrap();
        let m = spec.steps as i64 / 2;
        let t = m as f64 * spec.dt;
        for (k, offset) in [(mf.n_win, 0i64), (mf.n_win + 7, 7)] {
            let x = 0.3 + offset as f64 * spec.dx;
            let u = mf.time_slice(m)[k];
            let expect = x * x + c * t * t;
            assert_abs_diff_eq!(u, expect, epsilon = 1e-11 * expect.abs());
        }
        // flux integrand is c * tr(hess) at every node and sample
        for mm in [-(spec.steps as i64), 0, m, spec.steps as i64] {
            for v in mf.flux_slice(mm) {
                assert_abs_diff_eq!(*v, 2.0 * c, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let field = CoefficientField::per_sin_1d(0.02);
        let uhat = QuadraticPoly::probe(1, [0.0, 0.0], SymMat::new_1d(0.0));
        let spec = MicroProblemSpec::build(&field, uhat, 0.1, 0.1, 20).unwrap();
        let mf = solve_micro(&spec).unwrap();
        for m in [-(spec.steps as i64), 0, spec.steps as i64] {
            assert!(mf.time_slice(m).iter().all(|&v| v == 0.0));
            assert!(mf.flux_slice(m).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn time_mirror_is_bitwise() {
        let field = CoefficientField::per_sin_1d(0.02);
        let uhat = QuadraticPoly::probe(1, [0.11, 0.0], SymMat::new_1d(2.0));
        let spec = MicroProblemSpec::build(&field, uhat, 0.1, 0.1, 20).unwrap();
        let mf = solve_micro(&spec).unwrap();
        for m in 1..=spec.steps as i64 {
            let a = mf.time_slice(m);
            let b = mf.time_slice(-m);
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
            let fa = mf.flux_slice(m);
            let fb = mf.flux_slice(-m);
            assert!(fa.iter().zip(fb).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn solver_is_linear_in_uhat() {
        let field = CoefficientField::per_sin_1d(0.02);
        let h1 = SymMat::new_1d(2.0);
        let h2 = SymMat::new_1d(-0.7);
        let sum = SymMat::new_1d(2.0 - 0.7);
        let run = |h: SymMat| {
            let uhat = QuadraticPoly::probe(1, [0.0, 0.0], h);
            let spec = MicroProblemSpec::build(&field, uhat, 0.1, 0.1, 20).unwrap();
            solve_micro(&spec).unwrap()
        };
        let (f1, f2, fs) = (run(h1), run(h2), run(sum));
        for m in [0i64, 5, 20] {
            for ((a, b), s) in f1
                .flux_slice(m)
                .iter()
                .zip(f2.flux_slice(m))
                .zip(fs.flux_slice(m))
            {
                assert_abs_diff_eq!(a + b, *s, epsilon = 1e-12);
            }
        }
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn quadratics_are_reproduced_exactly(
                c0 in -5.0f64..5.0,
                gx in -5.0f64..5.0,
                hxx in -5.0f64..5.0,
                xc in -2.0f64..2.0,
                h in 0.01f64..0.5,
            ) {
                let offsets: Vec<[i64; 2]> = (-2..=2).map(|s| [s, 0]).collect();
                let values: Vec<f64> = offsets
                    .iter()
                    .map(|o| {
                        let dx = o[0] as f64 * h;
                        c0 + gx * dx + 0.5 * hxx * dx * dx
                    })
                    .collect();
                let p = fit_quadratic(1, &offsets, &values, h, [xc, 0.0]).unwrap();
                let scale = 1.0 + c0.abs() + gx.abs() + hxx.abs();
                prop_assert!((p.c0 - c0).abs() <= 1e-9 * scale);
                prop_assert!((p.grad[0] - gx).abs() <= 1e-9 * scale / h);
                prop_assert!((p.hess.get(0, 0) - hxx).abs() <= 1e-8 * scale / (h * h));
            }
        }
    }

    #[test]
    fn cfl_violation_refuses_to_run() {
        let field = CoefficientField::per_sin_1d(0.02);
        let uhat = QuadraticPoly::probe(1, [0.0, 0.0], SymMat::new_1d(2.0));
        let mut spec = MicroProblemSpec::build(&field, uhat, 0.1, 0.1, 20).unwrap();
        spec.dt = 3.0 * spec.dx; // way over the limit
        assert!(matches!(solve_micro(&spec), Err(EfaError::Config(_))));
    }
}
