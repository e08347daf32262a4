//! Cross-module equivalence runs: the macro stepper driven by reference
//! tensor fluxes must coincide with the stand-alone reference solvers, and
//! the cached effective-tensor mode must match the literal
//! re-upscale-every-step algorithm.

use efa::coefficient::{CoefficientField, SymMat};
use efa::macroscale::{
    init_macro, macro_step, run_macro, Bc, ConstantTensorFlux, EffectiveTensorFlux, MacroGrid,
    PerCallUpscaleFlux,
};
use efa::reference::{solve_homogenized, HomogenizedTensor, Provenance, RunSpec};
use efa::upscale::{effective_tensor_table, ReusePolicy, UpscaleConfig};
use std::f64::consts::PI;

#[test]
fn macro_stepper_with_reference_flux_matches_homogenized_solver() {
    // constant medium, periodic plane wave: same scheme, same arithmetic
    let a0 = SymMat::new_1d(0.7);
    let grid = MacroGrid::new(1, 1.0, 40, Bc::Periodic).unwrap();
    let t_final = 0.5;
    let g = |x: &[f64]| (2.0 * PI * x[0]).sin() + 0.3 * (4.0 * PI * x[0]).cos();
    let h = |x: &[f64]| 0.5 * (2.0 * PI * x[0]).cos();

    let tensor = HomogenizedTensor { a0, provenance: Provenance::LiteratureValue };
    let run = solve_homogenized(&tensor, g, h, |_, _| 0.0, &RunSpec::new(grid, t_final)).unwrap();
    let (t_ref, u_ref) = run.snapshots.last().unwrap();

    let provider = ConstantTensorFlux { a0 };
    let mut state = init_macro(grid, run.dt, g, h, |_, _| 0.0, &provider).unwrap();
    run_macro(&mut state, &provider, |_, _| 0.0, *t_ref, &[]).unwrap();

    assert_eq!(state.u_curr.len(), u_ref.len());
    for (a, b) in state.u_curr.iter().zip(u_ref) {
        assert!((a - b).abs() <= 1e-12, "trajectories diverge: {a} vs {b}");
    }
}

#[test]
fn macro_stepper_with_reference_flux_matches_homogenized_solver_2d() {
    let a0 = SymMat::new_2d(0.5, 0.8, 0.1);
    let grid = MacroGrid::new(2, 1.0, 16, Bc::Periodic).unwrap();
    let t_final = 0.25;
    let g = |x: &[f64]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos();
    let h = |_: &[f64]| 1.0;

    let tensor = HomogenizedTensor { a0, provenance: Provenance::LiteratureValue };
    let run = solve_homogenized(&tensor, g, h, |_, _| 0.0, &RunSpec::new(grid, t_final)).unwrap();
    let (t_ref, u_ref) = run.snapshots.last().unwrap();

    let provider = ConstantTensorFlux { a0 };
    let mut state = init_macro(grid, run.dt, g, h, |_, _| 0.0, &provider).unwrap();
    run_macro(&mut state, &provider, |_, _| 0.0, *t_ref, &[]).unwrap();

    for (a, b) in state.u_curr.iter().zip(u_ref) {
        assert!((a - b).abs() <= 1e-12, "2d trajectories diverge: {a} vs {b}");
    }
}

#[test]
fn per_call_mode_matches_cached_effective_tensors() {
    // time-independent medium: re-upscaling every step must agree with the
    // probed-tensor table (fluxes are linear in the fitted Hessian)
    let field = CoefficientField::per_sin_1d(0.02);
    let grid = MacroGrid::new(1, 1.0, 20, Bc::Periodic).unwrap();
    let cfg = UpscaleConfig::isotropic(3, 3, 0.1, 0.1)
        .unwrap()
        .with_reuse(ReusePolicy::PerCall);
    let g = |x: &[f64]| (2.0 * PI * x[0]).sin();
    let h = |_: &[f64]| 0.0;
    let dt = 0.01;

    let per_call = PerCallUpscaleFlux { field: &field, cfg: cfg.clone(), fit_halfwidth: 1 };
    let mut st_literal = init_macro(grid, dt, g, h, |_, _| 0.0, &per_call).unwrap();

    let points: Vec<[f64; 2]> = (0..grid.total_nodes()).map(|n| grid.coords(n)).collect();
    let table = effective_tensor_table(&field, &cfg, &points).unwrap();
    let bound = table.iter().map(|m| m.spectral_norm()).fold(0.0f64, f64::max) * 1.1;
    let cached = EffectiveTensorFlux { table, fit_halfwidth: 1, bound };
    let mut st_cached = init_macro(grid, dt, g, h, |_, _| 0.0, &cached).unwrap();

    for _ in 0..5 {
        macro_step(&mut st_literal, &per_call, |_, _| 0.0).unwrap();
        macro_step(&mut st_cached, &cached, |_, _| 0.0).unwrap();
    }
    for (a, b) in st_literal.u_curr.iter().zip(&st_cached.u_curr) {
        assert!((a - b).abs() <= 1e-10, "per-call vs cached: {a} vs {b}");
    }
}
