//! Ground-truth machinery: effective coefficients (harmonic mean and
//! invariant-measure cell solves), fully resolved direct simulation,
//! constant-coefficient reference solver, and kernel local averaging of
//! resolved fields for fair comparisons.

use crate::coefficient::{CoefficientField, SymMat};
use crate::error::{EfaError, Result};
use crate::kernel::Kernel;
use crate::macroscale::{Bc, MacroGrid};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    HarmonicMean,
    InvariantMeasure,
    LiteratureValue,
}

/// Constant effective tensor with a record of where it came from.
#[derive(Debug, Clone, Copy)]
pub struct HomogenizedTensor {
    pub a0: SymMat,
    pub provenance: Provenance,
}

/// `a0 = (mean of 1/a over the cell)^{-1}` by the periodic rectangle rule,
/// refining the resolution until the relative change drops below `1e-10`.
pub fn harmonic_mean_1d(
    a: impl Fn(f64) -> f64,
    cell: (f64, f64),
    initial_n: usize,
) -> Result<f64> {
    let (lo, hi) = cell;
    let mut n = initial_n.max(16);
    let mut prev = f64::NAN;
    loop {
        let h = (hi - lo) / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let v = a(lo + i as f64 * h);
            if v <= 0.0 {
                return Err(EfaError::Domain(format!("nonpositive coefficient sample {v}")));
            }
            sum += 1.0 / v;
        }
        let val = n as f64 / sum;
        if prev.is_finite() && (val - prev).abs() <= 1e-10 * val.abs() {
            return Ok(val);
        }
        prev = val;
        if n >= 1 << 23 {
            return Ok(val);
        }
        n *= 2;
    }
}

/// Two-dimensional harmonic mean over a rectangular cell, refined in both
/// directions until the relative change drops below `1e-10`.
pub fn harmonic_mean_2d(
    a: impl Fn(f64, f64) -> f64,
    cell_x: (f64, f64),
    cell_y: (f64, f64),
    initial: (usize, usize),
) -> Result<f64> {
    let mut nx = initial.0.max(16);
    let mut ny = initial.1.max(16);
    let mut prev = f64::NAN;
    loop {
        let hx = (cell_x.1 - cell_x.0) / nx as f64;
        let hy = (cell_y.1 - cell_y.0) / ny as f64;
        let mut sum = 0.0;
        for i in 0..nx {
            let x = cell_x.0 + i as f64 * hx;
            for j in 0..ny {
                let v = a(x, cell_y.0 + j as f64 * hy);
                if v <= 0.0 {
                    return Err(EfaError::Domain(format!(
                        "nonpositive coefficient sample {v}"
                    )));
                }
                sum += 1.0 / v;
            }
        }
        let val = (nx * ny) as f64 / sum;
        if prev.is_finite() && (val - prev).abs() <= 1e-10 * val.abs() {
            return Ok(val);
        }
        prev = val;
        if nx >= 1 << 16 || ny >= 4096 {
            return Ok(val);
        }
        nx *= 2;
        ny *= 2;
    }
}

/// Invariant measure on the unit cell: grid samples of `rho`, normalized to
/// discrete mean one.
#[derive(Debug, Clone)]
pub struct InvariantMeasure {
    pub dim: usize,
    pub n: usize,
    pub rho: Vec<f64>,
    /// `|| adjoint_operator(rho) ||_2` after the solve
    pub residual: f64,
}

impl InvariantMeasure {
    pub fn mean(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.rho.len() as f64
    }
}

/// Solves the adjoint cell problem `-sum_ij d_ij (A_ij rho) = 0` on a
/// periodic `n^d` grid with centered differences (the product `A rho` is
/// sampled at nodes and differenced). The one-dimensional nullspace is fixed
/// by a bordered mean-one row instead of an eigenvalue solve.
pub fn solve_invariant_measure(
    dim: usize,
    n: usize,
    a: impl Fn(&[f64]) -> SymMat,
) -> Result<InvariantMeasure> {
    let total = if dim == 1 { n } else { n * n };
    let max_total = 8192;
    if total > max_total {
        return Err(EfaError::Config(format!(
            "invariant-measure grid {total} exceeds the dense-solver cap {max_total}"
        )));
    }
    let h = 1.0 / n as f64;
    let inv_h2 = 1.0 / (h * h);
    // coefficient samples at nodes
    let mut a11 = vec![0.0; total];
    let mut a22 = vec![0.0; total];
    let mut a12 = vec![0.0; total];
    for idx in 0..total {
        let y = if dim == 1 {
            vec![idx as f64 * h]
        } else {
            vec![(idx / n) as f64 * h, (idx % n) as f64 * h]
        };
        let m = a(&y);
        a11[idx] = m.get(0, 0);
        if dim == 2 {
            a22[idx] = m.get(1, 1);
            a12[idx] = m.get(0, 1);
        }
    }

    // op[r][c] = -(sum_kl D_kl)_{r,c} * A_kl(y_c)
    let mut mat = DMatrix::zeros(total + 1, total + 1);
    let wrap = |i: i64| -> usize { ((i % n as i64 + n as i64) % n as i64) as usize };
    for r in 0..total {
        let (ri, rj) = if dim == 1 { (r, 0) } else { (r / n, r % n) };
        let mut add = |c: usize, w: f64, coeff: &[f64]| {
            mat[(r, c)] -= w * coeff[c];
        };
        if dim == 1 {
            add(wrap(ri as i64 + 1), inv_h2, &a11);
            add(ri, -2.0 * inv_h2, &a11);
            add(wrap(ri as i64 - 1), inv_h2, &a11);
        } else {
            let node = |i: usize, j: usize| i * n + j;
            let (ip, im) = (wrap(ri as i64 + 1), wrap(ri as i64 - 1));
            let (jp, jm) = (wrap(rj as i64 + 1), wrap(rj as i64 - 1));
            add(node(ip, rj), inv_h2, &a11);
            add(node(im, rj), inv_h2, &a11);
            add(node(ri, rj), -2.0 * inv_h2, &a11);
            add(node(ri, jp), inv_h2, &a22);
            add(node(ri, jm), inv_h2, &a22);
            add(node(ri, rj), -2.0 * inv_h2, &a22);
            // cross terms count twice (A_12 = A_21)
            let wq = 2.0 * 0.25 * inv_h2;
            add(node(ip, jp), wq, &a12);
            add(node(im, jm), wq, &a12);
            add(node(ip, jm), -wq, &a12);
            add(node(im, jp), -wq, &a12);
        }
    }
    for r in 0..total {
        mat[(r, total)] = 1.0;
        mat[(total, r)] = h.powi(dim as i32);
    }
    let mut rhs = DVector::zeros(total + 1);
    rhs[total] = 1.0;

    // keep the raw operator for the residual check
    let op = mat.view((0, 0), (total, total)).into_owned();

    let lu = mat.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| EfaError::Degenerate("bordered cell system singular".into()))?;
    let rho: Vec<f64> = sol.iter().take(total).copied().collect();
    if rho.iter().any(|&v| v <= 0.0) {
        return Err(EfaError::Degenerate(
            "invariant measure not positive at all nodes".into(),
        ));
    }
    let residual = (&op * DVector::from_column_slice(&rho)).norm();
    Ok(InvariantMeasure { dim, n, rho, residual })
}

/// `A0 = mean of A(y) rho(y)` over the unit cell, entrywise.
pub fn homogenized_coefficient(
    a: impl Fn(&[f64]) -> SymMat,
    rho: &InvariantMeasure,
) -> HomogenizedTensor {
    let n = rho.n;
    let h = 1.0 / n as f64;
    let total = rho.rho.len();
    let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
    for idx in 0..total {
        let y = if rho.dim == 1 {
            vec![idx as f64 * h]
        } else {
            vec![(idx / n) as f64 * h, (idx % n) as f64 * h]
        };
        let m = a(&y);
        s11 += m.get(0, 0) * rho.rho[idx];
        if rho.dim == 2 {
            s22 += m.get(1, 1) * rho.rho[idx];
            s12 += m.get(0, 1) * rho.rho[idx];
        }
    }
    let inv = 1.0 / total as f64;
    let a0 = if rho.dim == 1 {
        SymMat::new_1d(s11 * inv)
    } else {
        SymMat::new_2d(s11 * inv, s22 * inv, s12 * inv)
    };
    HomogenizedTensor { a0, provenance: Provenance::InvariantMeasure }
}

/// Dense time window of slices around one instant, for local averaging.
#[derive(Debug, Clone)]
pub struct WindowRecord {
    pub t_center: f64,
    pub dt: f64,
    pub half_steps: usize,
    /// `2 * half_steps + 1` slices, slice `k` at `t_center + (k - half_steps) dt`
    pub slices: Vec<Vec<f64>>,
}

/// Output of a resolved leap-frog run.
#[derive(Debug, Clone)]
pub struct LeapfrogRun {
    pub grid: MacroGrid,
    pub dt: f64,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    pub window: Option<WindowRecord>,
    /// discrete energies sampled every step (kinetic + gradient form)
    pub energy: Vec<f64>,
}

/// Run controls shared by the DNS and the homogenized solver.
#[derive(Clone)]
pub struct RunSpec {
    pub grid: MacroGrid,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    /// record a dense slice window `[t_center - tau/2, t_center + tau/2]`
    pub window: Option<(f64, f64)>,
    pub cfl_fraction: f64,
    pub track_energy: bool,
}

impl RunSpec {
    pub fn new(grid: MacroGrid, t_final: f64) -> RunSpec {
        RunSpec {
            grid,
            t_final,
            snapshot_times: Vec::new(),
            window: None,
            cfl_fraction: 0.9,
            track_energy: false,
        }
    }
}

fn pick_dt(spec: &RunSpec, sup_norm: f64) -> Result<(f64, usize)> {
    let d = spec.grid.dim as f64;
    let target = spec.cfl_fraction * spec.grid.h() / (d * sup_norm).sqrt();
    let t_end = match spec.window {
        None => spec.t_final,
        Some((tc, tau)) => (tc + 0.5 * tau).max(spec.t_final),
    };
    if t_end <= 0.0 {
        return Err(EfaError::Config("run horizon must be positive".into()));
    }
    if let Some((tc, tau)) = spec.window {
        // dt must divide tau/2, and the window center must land on a step
        let k = ((0.5 * tau) / target).ceil().max(1.0);
        let dt = 0.5 * tau / k;
        let tc_steps = tc / dt;
        if (tc_steps - tc_steps.round()).abs() > 1e-9 * tc_steps.max(1.0) {
            return Err(EfaError::Config(format!(
                "window center {tc} is not a multiple of the aligned step {dt}"
            )));
        }
        let steps = (t_end / dt).round() as usize;
        if ((t_end / dt) - steps as f64).abs() > 1e-9 {
            return Err(EfaError::Config(
                "final time is not commensurate with the averaging window".into(),
            ));
        }
        Ok((dt, steps))
    } else {
        let steps = (t_end / target).ceil().max(1.0) as usize;
        Ok((t_end / steps as f64, steps))
    }
}

/// Shared leap-frog march over tensor samples at grid nodes.
#[allow(clippy::too_many_arguments)]
fn leapfrog_run(
    spec: &RunSpec,
    sup_norm: f64,
    tensor_at: impl Fn([f64; 2]) -> SymMat,
    g: impl Fn(&[f64]) -> f64,
    h: impl Fn(&[f64]) -> f64,
    f: impl Fn(f64, &[f64]) -> f64,
) -> Result<LeapfrogRun> {
    let grid = spec.grid;
    let (dt, steps) = pick_dt(spec, sup_norm)?;
    let total = grid.total_nodes();
    let n = grid.nodes_per_axis();
    let dim = grid.dim;
    let inv_h2 = 1.0 / (grid.h() * grid.h());

    let mut a11 = vec![0.0; total];
    let mut a22 = vec![0.0; total];
    let mut a12 = vec![0.0; total];
    for idx in 0..total {
        let m = tensor_at(grid.coords(idx));
        a11[idx] = m.get(0, 0);
        if dim == 2 {
            a22[idx] = m.get(1, 1);
            a12[idx] = m.get(0, 1);
        }
    }

    let wrap = |i: i64| -> usize {
        match grid.bc {
            Bc::Periodic => ((i % n as i64 + n as i64) % n as i64) as usize,
            Bc::DirichletZero => i.clamp(0, n as i64 - 1) as usize,
        }
    };
    let boundary: Vec<bool> = (0..total).map(|idx| grid.is_boundary(idx)).collect();

    let apply_op = |u: &[f64], out: &mut [f64]| {
        if dim == 1 {
            for i in 0..total {
                if boundary[i] {
                    out[i] = 0.0;
                    continue;
                }
                let (ip, im) = (wrap(i as i64 + 1), wrap(i as i64 - 1));
                out[i] = a11[i] * (u[ip] - 2.0 * u[i] + u[im]) * inv_h2;
            }
        } else {
            for i in 0..n {
                let (ip, im) = (wrap(i as i64 + 1), wrap(i as i64 - 1));
                for j in 0..n {
                    let c = i * n + j;
                    if boundary[c] {
                        out[c] = 0.0;
                        continue;
                    }
                    let (jp, jm) = (wrap(j as i64 + 1), wrap(j as i64 - 1));
                    let uc = u[c];
                    let dxx = (u[ip * n + j] - 2.0 * uc + u[im * n + j]) * inv_h2;
                    let dyy = (u[i * n + jp] - 2.0 * uc + u[i * n + jm]) * inv_h2;
                    let dxy = (u[ip * n + jp] - u[ip * n + jm] - u[im * n + jp]
                        + u[im * n + jm])
                        * (0.25 * inv_h2);
                    out[c] = a11[c] * dxx + a22[c] * dyy + 2.0 * a12[c] * dxy;
                }
            }
        }
    };

    let mut u_prev = vec![0.0; total];
    for idx in 0..total {
        if !boundary[idx] {
            let x = grid.coords(idx);
            u_prev[idx] = g(&x[..dim]);
        }
    }
    let mut op = vec![0.0; total];
    apply_op(&u_prev, &mut op);
    let dt2 = dt * dt;
    let mut u_curr = vec![0.0; total];
    for idx in 0..total {
        if !boundary[idx] {
            let x = grid.coords(idx);
            let xs = &x[..dim];
            u_curr[idx] = u_prev[idx] + dt * h(xs) + 0.5 * dt2 * (op[idx] + f(0.0, xs));
        }
    }

    let window_params = spec.window.map(|(tc, tau)| {
        let k = (0.5 * tau / dt).round() as usize;
        let center_step = (tc / dt).round() as usize;
        (center_step, k)
    });
    let mut window_slices: Vec<Vec<f64>> = Vec::new();

    let mut snaps = vec![(0.0, u_prev.clone())];
    let mut energy = Vec::new();
    let grad_energy = |u: &[f64]| -> f64 {
        let mut s = 0.0;
        if dim == 1 {
            for i in 0..total {
                let ip = wrap(i as i64 + 1);
                s += (u[ip] - u[i]).powi(2) * inv_h2;
            }
        } else {
            for i in 0..n {
                let ip = wrap(i as i64 + 1);
                for j in 0..n {
                    let jp = wrap(j as i64 + 1);
                    s += ((u[ip * n + j] - u[i * n + j]).powi(2)
                        + (u[i * n + jp] - u[i * n + j]).powi(2))
                        * inv_h2;
                }
            }
        }
        s * grid.h().powi(dim as i32)
    };
    let push_energy = |up: &[f64], uc: &[f64]| {
        let hd = grid.h().powi(dim as i32);
        let mut kin = 0.0;
        for idx in 0..total {
            kin += (uc[idx] - up[idx]).powi(2) / (dt2 * a11[idx]) * hd;
        }
        kin + 0.5 * (grad_energy(up) + grad_energy(uc))
    };
    if spec.track_energy {
        energy.push(push_energy(&u_prev, &u_curr));
    }

    let record_snapshot = |t: f64, u: &[f64], snaps: &mut Vec<(f64, Vec<f64>)>| {
        for &ts in &spec.snapshot_times {
            if (t - ts).abs() < 0.5 * dt && snaps.iter().all(|(tt, _)| (tt - ts).abs() > 0.25 * dt)
            {
                snaps.push((t, u.to_vec()));
            }
        }
    };
    let record_window = |step: usize, u: &[f64], slices: &mut Vec<Vec<f64>>| {
        if let Some((cs, k)) = window_params {
            if step + k >= cs && step <= cs + k {
                slices.push(u.to_vec());
            }
        }
    };

    record_snapshot(dt, &u_curr, &mut snaps);
    record_window(0, &u_prev, &mut window_slices);
    record_window(1, &u_curr, &mut window_slices);

    let mut u_next = vec![0.0; total];
    for stepn in 1..steps {
        apply_op(&u_curr, &mut op);
        let t_now = stepn as f64 * dt;
        for idx in 0..total {
            if boundary[idx] {
                u_next[idx] = 0.0;
            } else {
                let x = grid.coords(idx);
                u_next[idx] = 2.0 * u_curr[idx] - u_prev[idx]
                    + dt2 * (op[idx] + f(t_now, &x[..dim]));
            }
        }
        if u_next.iter().any(|v| !v.is_finite()) {
            return Err(EfaError::Instability { step: stepn + 1, t: t_now + dt });
        }
        std::mem::swap(&mut u_prev, &mut u_curr);
        std::mem::swap(&mut u_curr, &mut u_next);
        let t = (stepn + 1) as f64 * dt;
        record_snapshot(t, &u_curr, &mut snaps);
        record_window(stepn + 1, &u_curr, &mut window_slices);
        if spec.track_energy {
            energy.push(push_energy(&u_prev, &u_curr));
        }
    }
    if snaps
        .last()
        .map(|(t, _)| (t - steps as f64 * dt).abs() > 0.25 * dt)
        .unwrap_or(true)
    {
        snaps.push((steps as f64 * dt, u_curr.clone()));
    }

    let window = window_params.map(|(cs, k)| WindowRecord {
        t_center: cs as f64 * dt,
        dt,
        half_steps: k,
        slices: window_slices,
    });
    if let Some(w) = &window {
        if w.slices.len() != 2 * w.half_steps + 1 {
            return Err(EfaError::Precondition(format!(
                "window not fully inside the run: got {} of {} slices",
                w.slices.len(),
                2 * w.half_steps + 1
            )));
        }
    }
    Ok(LeapfrogRun { grid, dt, snapshots: snaps, window, energy })
}

/// Fully resolved simulation of the heterogeneous problem. The grid must
/// resolve the microstructure (10 points per wavelength is the working
/// default; enforced as >= 8).
pub fn solve_dns(
    field: &CoefficientField,
    g: impl Fn(&[f64]) -> f64,
    h: impl Fn(&[f64]) -> f64,
    f: impl Fn(f64, &[f64]) -> f64,
    spec: &RunSpec,
) -> Result<LeapfrogRun> {
    if spec.grid.h() > field.epsilon() / 8.0 {
        return Err(EfaError::Config(format!(
            "DNS grid spacing {} does not resolve eps {}",
            spec.grid.h(),
            field.epsilon()
        )));
    }
    if spec.grid.dim != field.dim() {
        return Err(EfaError::Config("grid/field dimension mismatch".into()));
    }
    leapfrog_run(
        spec,
        field.sup_norm(),
        |x| field.eval(&x[..field.dim()]),
        g,
        h,
        f,
    )
}

/// Constant-coefficient reference solver for the homogenized problem.
pub fn solve_homogenized(
    a0: &HomogenizedTensor,
    g: impl Fn(&[f64]) -> f64,
    h: impl Fn(&[f64]) -> f64,
    f: impl Fn(f64, &[f64]) -> f64,
    spec: &RunSpec,
) -> Result<LeapfrogRun> {
    let tensor = a0.a0;
    leapfrog_run(spec, tensor.spectral_norm(), |_| tensor, g, h, f)
}

/// Space-time kernel average `(K_{tau,eta} * u)(t_center, x)` of a resolved
/// run at the given grid-aligned points, using the recorded slice window.
pub fn local_average_field(
    run: &LeapfrogRun,
    kernel_space: &Kernel,
    kernel_time: &Kernel,
    eta: f64,
    tau: f64,
    points: &[[f64; 2]],
) -> Result<Vec<f64>> {
    let window = run.window.as_ref().ok_or_else(|| {
        EfaError::Precondition("run was recorded without a slice window".into())
    })?;
    if ((window.half_steps as f64) * window.dt - 0.5 * tau).abs() > 1e-9 * tau {
        return Err(EfaError::Precondition(
            "recorded window does not match tau".into(),
        ));
    }
    let grid = run.grid;
    let hx = grid.h();
    let n_win = (0.5 * eta / hx).round() as usize;
    if ((n_win as f64) * hx - 0.5 * eta).abs() > 1e-9 * eta {
        return Err(EfaError::Precondition(
            "averaging window is not aligned with the resolved grid".into(),
        ));
    }
    let wx = kernel_space.axis_weights(0.5 * eta, n_win, hx)?;
    // full trapezoid in time over the recorded slices
    let half_t = 0.5 * tau;
    let m = window.half_steps;
    let tw: Vec<f64> = (0..=2 * m)
        .map(|k| {
            let t = (k as f64 - m as f64) * window.dt;
            let mut w = kernel_time.eval_scaled(half_t, t) * window.dt;
            if k == 0 || k == 2 * m {
                w *= 0.5;
            }
            w
        })
        .collect();

    let n = grid.nodes_per_axis() as i64;
    let wrap = |i: i64| -> Result<usize> {
        match grid.bc {
            Bc::Periodic => Ok(((i % n + n) % n) as usize),
            Bc::DirichletZero => {
                if (0..n).contains(&i) {
                    Ok(i as usize)
                } else {
                    Err(EfaError::Precondition(
                        "averaging window leaves the Dirichlet domain".into(),
                    ))
                }
            }
        }
    };

    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let ci = (p[0] / hx).round() as i64;
        if (p[0] - ci as f64 * hx).abs() > 1e-9 * hx.max(1.0) {
            return Err(EfaError::Precondition(format!(
                "point {:?} is not a resolved grid node",
                p
            )));
        }
        let mut acc = 0.0;
        if grid.dim == 1 {
            for (k, slice) in window.slices.iter().enumerate() {
                let mut s = 0.0;
                for (ii, wxi) in wx.iter().enumerate() {
                    let gi = wrap(ci - n_win as i64 + ii as i64)?;
                    s += wxi * slice[gi];
                }
                acc += tw[k] * s;
            }
        } else {
            let cj = (p[1] / hx).round() as i64;
            if (p[1] - cj as f64 * hx).abs() > 1e-9 * hx.max(1.0) {
                return Err(EfaError::Precondition(format!(
                    "point {:?} is not a resolved grid node",
                    p
                )));
            }
            let nn = grid.nodes_per_axis();
            for (k, slice) in window.slices.iter().enumerate() {
                let mut s = 0.0;
                for (ii, wxi) in wx.iter().enumerate() {
                    let gi = wrap(ci - n_win as i64 + ii as i64)?;
                    let mut srow = 0.0;
                    for (jj, wxj) in wx.iter().enumerate() {
                        let gj = wrap(cj - n_win as i64 + jj as i64)?;
                        srow += wxj * slice[gi * nn + gj];
                    }
                    s += wxi * srow;
                }
                acc += tw[k] * s;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_mean_of_sin_coefficient() {
        let v = harmonic_mean_1d(|y| 1.1 + (2.0 * PI * y).sin(), (0.0, 1.0), 64).unwrap();
        assert_abs_diff_eq!(v, 0.21f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn harmonic_mean_of_constant_is_exact() {
        let v = harmonic_mean_1d(|_| 2.5, (0.0, 1.0), 64).unwrap();
        assert_abs_diff_eq!(v, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn harmonic_mean_rejects_nonpositive() {
        let err = harmonic_mean_1d(|y| y - 0.5, (0.0, 1.0), 64);
        assert!(matches!(err, Err(EfaError::Domain(_))));
    }

    #[test]
    fn harmonic_mean_2d_iso_cell() {
        let field = CoefficientField::iso_2d(1.0);
        let v = harmonic_mean_2d(
            |x, y| field.eval(&[x, y]).get(0, 0),
            (0.0, 1.0),
            (0.0, 1.0),
            (128, 128),
        )
        .unwrap();
        assert_abs_diff_eq!(v, 0.3699698702, epsilon = 1e-8);
    }

    #[test]
    fn invariant_measure_of_identity_is_one() {
        let im = solve_invariant_measure(1, 32, |_| SymMat::new_1d(1.0)).unwrap();
        for v in &im.rho {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
        let im2 = solve_invariant_measure(2, 12, |_| SymMat::scalar(2, 1.0)).unwrap();
        for v in &im2.rho {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn invariant_measure_isotropic_closed_form() {
        // a rho must be constant: rho = a0 / a
        let a = |y: &[f64]| SymMat::new_1d(1.1 + (2.0 * PI * y[0]).sin());
        let im = solve_invariant_measure(1, 128, a).unwrap();
        assert_abs_diff_eq!(im.mean(), 1.0, epsilon = 1e-13);
        assert!(im.residual < 1e-8, "residual {}", im.residual);
        let a0 = 0.21f64.sqrt();
        for (idx, v) in im.rho.iter().enumerate() {
            let y = idx as f64 / 128.0;
            let exact = a0 / (1.1 + (2.0 * PI * y).sin());
            assert_abs_diff_eq!(*v, exact, epsilon = 1e-9);
        }
        let tensor = homogenized_coefficient(a, &im);
        assert_abs_diff_eq!(tensor.a0.get(0, 0), a0, epsilon = 1e-9);
    }

    #[test]
    fn homogenized_coefficient_constant_identity() {
        let im = solve_invariant_measure(1, 32, |_| SymMat::new_1d(3.0)).unwrap();
        let t = homogenized_coefficient(|_| SymMat::new_1d(3.0), &im);
        assert_abs_diff_eq!(t.a0.get(0, 0), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn dns_zero_data_is_zero() {
        let field = CoefficientField::per_sin_1d(0.05);
        let grid = MacroGrid::new(1, 1.0, 200, Bc::Periodic).unwrap();
        let run = solve_dns(
            &field,
            |_| 0.0,
            |_| 0.0,
            |_, _| 0.0,
            &RunSpec::new(grid, 0.2),
        )
        .unwrap();
        assert!(run.snapshots.last().unwrap().1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn homogenized_plane_wave_converges_second_order() {
        // u_tt = u_xx, g = sin(2 pi x): u = sin(2 pi x) cos(2 pi t)
        let a0 = HomogenizedTensor {
            a0: SymMat::new_1d(1.0),
            provenance: Provenance::LiteratureValue,
        };
        let mut errs = Vec::new();
        for cells in [32usize, 64, 128] {
            let grid = MacroGrid::new(1, 1.0, cells, Bc::Periodic).unwrap();
            let t_final = 0.3;
            let run = solve_homogenized(
                &a0,
                |x| (2.0 * PI * x[0]).sin(),
                |_| 0.0,
                |_, _| 0.0,
                &RunSpec::new(grid, t_final),
            )
            .unwrap();
            let (tf, uf) = run.snapshots.last().unwrap();
            let mut err2 = 0.0;
            for (idx, v) in uf.iter().enumerate() {
                let x = idx as f64 * grid.h();
                let exact = (2.0 * PI * x).sin() * (2.0 * PI * tf).cos();
                err2 += (v - exact).powi(2) * grid.h();
            }
            errs.push(err2.sqrt());
        }
        let slope = (errs[0] / errs[2]).ln() / 4.0f64.ln();
        assert!((1.7..=2.3).contains(&slope), "slope {slope}, errs {errs:?}");
    }

    #[test]
    fn dns_energy_stays_bounded() {
        let field = CoefficientField::per_sin_1d(0.02);
        let grid = MacroGrid::new(1, 1.0, 500, Bc::Periodic).unwrap();
        let mut spec = RunSpec::new(grid, 0.5);
        spec.track_energy = true;
        let run = solve_dns(
            &field,
            |x| (2.0 * PI * x[0]).sin(),
            |_| 0.0,
            |_, _| 0.0,
            &spec,
        )
        .unwrap();
        let e0 = run.energy[0];
        for e in &run.energy {
            assert!((e - e0).abs() <= 0.01 * e0, "energy drift {} vs {}", e, e0);
        }
    }

    #[test]
    fn local_average_reproduces_constants_and_linears() {
        let a0 = HomogenizedTensor {
            a0: SymMat::new_1d(1.0),
            provenance: Provenance::LiteratureValue,
        };
        let grid = MacroGrid::new(1, 1.0, 1200, Bc::Periodic).unwrap();
        let mut spec = RunSpec::new(grid, 0.2);
        let (eta, tau) = (0.1, 0.1);
        spec.window = Some((0.2, tau));
        // constant initial data, zero velocity: u stays 1
        let run = solve_homogenized(&a0, |_| 1.0, |_| 0.0, |_, _| 0.0, &spec).unwrap();
        let k = Kernel::build(3, 3).unwrap();
        let pts = [[0.25, 0.0], [0.5, 0.0]];
        let avg = local_average_field(&run, &k, &k, eta, tau, &pts).unwrap();
        for v in avg {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
        }
    }
}
