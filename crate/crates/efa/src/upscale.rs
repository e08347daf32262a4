//! Upscaling: space-time kernel averaging of the micro flux integrand
//! produces the missing macro flux `F(x_I, hess)`, and (for time-independent
//! media) the effective tensor obtained by probing `F` with the elementary
//! quadratic polynomials.

use crate::coefficient::{CoefficientField, SymMat};
use crate::error::{EfaError, Result};
use crate::kernel::Kernel;
use crate::micro::{run_micro, solve_micro, MicroField, MicroProblemSpec, QuadraticPoly};
use rayon::prelude::*;

/// Whether macro stepping re-solves micro problems at every step (the
/// literal algorithm) or reuses the effective tensor probed once per macro
/// point (valid whenever the medium does not depend on time or on the macro
/// state, which covers every builtin here).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReusePolicy {
    PerCall,
    EffectiveTensorCache,
}

/// Averaging configuration for the upscaling step.
///
/// The averaging window is `[-tau/2, tau/2] x (x_I + [-eta/2, eta/2]^d)`;
/// kernels are scaled so their support is exactly that window, which is what
/// the micro-box bound `ell >= eta/2 + (tau/2) sqrt(|A|_inf)` keeps interior.
#[derive(Debug, Clone)]
pub struct UpscaleConfig {
    pub kernel_space: Kernel,
    pub kernel_time: Kernel,
    pub eta: f64,
    pub tau: f64,
    pub points_per_eps: usize,
    pub reuse: ReusePolicy,
}

impl UpscaleConfig {
    /// Same kernel in space and time, default micro resolution.
    pub fn isotropic(p: u32, q: u32, eta: f64, tau: f64) -> Result<UpscaleConfig> {
        let k = Kernel::build(p, q)?;
        Ok(UpscaleConfig {
            kernel_space: k.clone(),
            kernel_time: k,
            eta,
            tau,
            points_per_eps: 20,
            reuse: ReusePolicy::EffectiveTensorCache,
        })
    }

    pub fn with_resolution(mut self, points_per_eps: usize) -> Self {
        self.points_per_eps = points_per_eps;
        self
    }

    pub fn with_reuse(mut self, reuse: ReusePolicy) -> Self {
        self.reuse = reuse;
        self
    }

    pub fn validate(&self, field: &CoefficientField) -> Result<()> {
        if self.eta < field.epsilon() || self.tau < field.epsilon() {
            return Err(EfaError::Config(format!(
                "averaging window (eta={}, tau={}) must not be smaller than eps={}",
                self.eta,
                self.tau,
                field.epsilon()
            )));
        }
        Ok(())
    }
}

/// `sum_i wx[i] * sum_j wy[j] * v[i, j]` (1D: plain dot product).
fn separable_dot(dim: usize, wx: &[f64], wy: &[f64], values: &[f64]) -> f64 {
    if dim == 1 {
        wx.iter().zip(values).map(|(w, v)| w * v).sum()
    } else {
        let n = wy.len();
        wx.iter()
            .enumerate()
            .map(|(i, w)| {
                let row = &values[i * n..(i + 1) * n];
                let inner: f64 = wy.iter().zip(row).map(|(a, b)| a * b).sum();
                w * inner
            })
            .sum()
    }
}

/// Folded time-quadrature weights over `[-tau/2, tau/2]` for mirrored
/// samples: slice `m` of a time-symmetric field enters the full trapezoid
/// sum with weight `dt` (m = 0 and m = M) or `2 dt` (interior).
fn folded_time_weights(kernel: &Kernel, tau: f64, dt: f64, steps: usize) -> Vec<f64> {
    let half_t = 0.5 * tau;
    (0..=steps)
        .map(|m| {
            let k = kernel.eval_scaled(half_t, m as f64 * dt) * dt;
            if m == 0 || m == steps {
                k
            } else {
                2.0 * k
            }
        })
        .collect()
}

/// The upscaled flux `F(x_I, hess(uhat))`: solve the micro problem and
/// average its flux integrand over the space-time window centered at
/// `(0, x_I)`.
///
/// The march streams: each time slice is reduced to its spatial kernel
/// average immediately, so memory stays `O(box)` even for very fine sweeps.
pub fn upscale_flux(
    field: &CoefficientField,
    uhat: &QuadraticPoly,
    cfg: &UpscaleConfig,
) -> Result<f64> {
    cfg.validate(field)?;
    let spec = MicroProblemSpec::build(
        field,
        uhat.clone(),
        cfg.eta,
        cfg.tau,
        cfg.points_per_eps,
    )?;
    flux_from_spec(&spec, cfg)
}

/// Averaging on an explicitly built micro spec. This is the body of
/// [`upscale_flux`]; it exists separately so callers can vary the box size
/// (finite-speed independence checks) without touching the default sizing.
pub fn flux_from_spec(spec: &MicroProblemSpec, cfg: &UpscaleConfig) -> Result<f64> {
    let wx = cfg
        .kernel_space
        .axis_weights(0.5 * cfg.eta, spec.n_win, spec.dx)?;
    let tw = folded_time_weights(&cfg.kernel_time, cfg.tau, spec.dt, spec.steps);
    let dim = spec.field.dim();
    let win_total = if dim == 1 {
        2 * spec.n_win + 1
    } else {
        (2 * spec.n_win + 1) * (2 * spec.n_win + 1)
    };
    let hess = spec.uhat.hess;
    let mut integrand = vec![0.0; win_total];
    let mut acc = 0.0;
    run_micro(spec, |m, w, ws| {
        ws.window_integrand(w, &hess, &mut integrand);
        acc += tw[m] * separable_dot(dim, &wx, &wx, &integrand);
        Ok(())
    })?;
    Ok(acc)
}

/// Upscaled fluxes for several kernel pairs from a single micro solve.
///
/// The micro field does not depend on the kernels, so an `(eps, uhat)` sweep
/// point pays for one march regardless of how many `(p, q)` pairs it reports.
pub fn upscale_flux_multi(
    field: &CoefficientField,
    uhat: &QuadraticPoly,
    kernels: &[(Kernel, Kernel)],
    eta: f64,
    tau: f64,
    points_per_eps: usize,
) -> Result<Vec<f64>> {
    let spec = MicroProblemSpec::build(field, uhat.clone(), eta, tau, points_per_eps)?;
    let mut wx = Vec::with_capacity(kernels.len());
    let mut tw = Vec::with_capacity(kernels.len());
    for (ks, kt) in kernels {
        wx.push(ks.axis_weights(0.5 * eta, spec.n_win, spec.dx)?);
        tw.push(folded_time_weights(kt, tau, spec.dt, spec.steps));
    }
    let dim = field.dim();
    let win_total = if dim == 1 {
        2 * spec.n_win + 1
    } else {
        (2 * spec.n_win + 1) * (2 * spec.n_win + 1)
    };
    let hess = uhat.hess;
    let mut integrand = vec![0.0; win_total];
    let mut acc = vec![0.0; kernels.len()];
    run_micro(&spec, |m, w, ws| {
        ws.window_integrand(w, &hess, &mut integrand);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += tw[k][m] * separable_dot(dim, &wx[k], &wx[k], &integrand);
        }
        Ok(())
    })?;
    Ok(acc)
}

/// Space-time kernel average of a stored micro field over its full window:
/// `(K_{tau,eta} * field)(0, x_I)` by tensor-product trapezoid.
pub fn space_time_average(
    kernel_space: &Kernel,
    kernel_time: &Kernel,
    eta: f64,
    tau: f64,
    field: &MicroField,
    component: MicroComponent,
) -> Result<f64> {
    let wx = kernel_space.axis_weights(0.5 * eta, field.n_win, field.dx)?;
    if ((field.steps as f64) * field.dt - 0.5 * tau).abs() > 1e-9 * tau {
        return Err(EfaError::Precondition(
            "stored time window does not match tau".into(),
        ));
    }
    let tw = folded_time_weights(kernel_time, tau, field.dt, field.steps);
    let mut acc = 0.0;
    for m in 0..=field.steps {
        let slice = match component {
            MicroComponent::Solution => field.time_slice(m as i64),
            MicroComponent::FluxIntegrand => field.flux_slice(m as i64),
        };
        acc += tw[m] * separable_dot(field.dim, &wx, &wx, slice);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy)]
pub enum MicroComponent {
    Solution,
    FluxIntegrand,
}

/// The reference flux `Fhat(x, hess) = sum_ij A0_ij hess_ij`.
pub fn reference_flux(a0: &SymMat, uhat: &QuadraticPoly) -> f64 {
    a0.contract(&uhat.hess)
}

/// Probes `F` with the elementary quadratics `x_i^2 / 2` and `x_i x_j` and
/// assembles the effective tensor `a_eff(x_I)` with
/// `F(x_I, hess) = sum_ij a_eff_ij hess_ij` (micro solves are linear in the
/// Hessian, so d(d+1)/2 probes determine the flux map completely).
pub fn effective_tensor_probe(
    field: &CoefficientField,
    cfg: &UpscaleConfig,
    x_center: [f64; 2],
) -> Result<SymMat> {
    let dim = field.dim();
    if dim == 1 {
        let probe = QuadraticPoly::probe(1, x_center, SymMat::new_1d(1.0));
        let a = upscale_flux(field, &probe, cfg)?;
        Ok(SymMat::new_1d(a))
    } else {
        let p11 = QuadraticPoly::probe(2, x_center, SymMat::new_2d(1.0, 0.0, 0.0));
        let p22 = QuadraticPoly::probe(2, x_center, SymMat::new_2d(0.0, 1.0, 0.0));
        let p12 = QuadraticPoly::probe(2, x_center, SymMat::new_2d(0.0, 0.0, 1.0));
        let a11 = upscale_flux(field, &p11, cfg)?;
        let a22 = upscale_flux(field, &p22, cfg)?;
        // hess_12 = hess_21 = 1 contributes F = 2 a_eff_12
        let f12 = upscale_flux(field, &p12, cfg)?;
        Ok(SymMat::new_2d(a11, a22, 0.5 * f12))
    }
}

/// Effective tensors at many macro points, probed in parallel. Results are
/// ordered like `points`, so the output is deterministic regardless of the
/// worker count.
pub fn effective_tensor_table(
    field: &CoefficientField,
    cfg: &UpscaleConfig,
    points: &[[f64; 2]],
) -> Result<Vec<SymMat>> {
    points
        .par_iter()
        .map(|p| effective_tensor_probe(field, cfg, *p))
        .collect()
}

/// Consistency defect of Definition-style lifting: the space-time kernel
/// average of the micro solution minus `uhat(x_I)`.
pub fn consistency_defect(
    field: &CoefficientField,
    uhat: &QuadraticPoly,
    cfg: &UpscaleConfig,
) -> Result<f64> {
    cfg.validate(field)?;
    let spec = MicroProblemSpec::build(
        field,
        uhat.clone(),
        cfg.eta,
        cfg.tau,
        cfg.points_per_eps,
    )?;
    let mf = solve_micro(&spec)?;
    let avg = space_time_average(
        &cfg.kernel_space,
        &cfg.kernel_time,
        cfg.eta,
        cfg.tau,
        &mf,
        MicroComponent::Solution,
    )?;
    Ok((avg - uhat.eval(&uhat.center[..field.dim()])).abs())
}
