//! One-dimensional comparison in a locally periodic medium: the multiscale
//! solution on a coarse grid against the homogenized solver and a kernel
//! local average of the fully resolved simulation.
//!
//! A Gaussian pulse (center 1.5, sigma 0.08) splits and propagates through
//! `a(x) = (1.5 + sin 2 pi x)(1.5 + sin 2 pi x/eps)` with eps = 0.01 on
//! `[0, 3]` up to `T = 1` with periodic boundaries. The coarse solvers use
//! 250 points; the resolved run uses 10 points per wavelength (3000 nodes).
//!
//! ```text
//! cargo run --release --example wave_1d [--out out/wave1d]
//! ```

use efa::coefficient::CoefficientField;
use efa::harness::report::{snapshot_csv_1d, write_text};
use efa::kernel::Kernel;
use efa::macroscale::{
    init_macro, run_macro, stable_dt, Bc, EffectiveTensorFlux, MacroGrid, VariableTensorFlux,
};
use efa::reference::{local_average_field, solve_dns, RunSpec};
use efa::upscale::{effective_tensor_table, UpscaleConfig};
use std::f64::consts::PI;
use std::path::PathBuf;

fn main() -> efa::Result<()> {
    let out = std::env::args()
        .skip_while(|a| a != "--out")
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out/wave1d"));

    let eps = 0.01;
    let (eta, tau) = (0.1, 0.1);
    let t_final = 1.0;
    let field = CoefficientField::loc_per_1d(eps);
    let grid = MacroGrid::new(1, 3.0, 250, Bc::Periodic)?;
    let gauss = |x: &[f64]| (-(x[0] - 1.5f64).powi(2) / (2.0 * 0.08 * 0.08)).exp();

    // probe the effective tensor at every macro node (this is the entire
    // micro-scale cost of the method; afterwards stepping is coarse)
    println!("probing effective coefficients at {} macro nodes ...", grid.total_nodes());
    let ucfg = UpscaleConfig::isotropic(3, 5, eta, tau)?;
    let points: Vec<[f64; 2]> = (0..grid.total_nodes()).map(|n| grid.coords(n)).collect();
    let table = effective_tensor_table(&field, &ucfg, &points)?;
    let amax = table.iter().map(|m| m.get(0, 0)).fold(0.0f64, f64::max);
    let amin = table.iter().map(|m| m.get(0, 0)).fold(f64::MAX, f64::min);
    println!("  a_eff(x) ranges over [{amin:.4}, {amax:.4}]");

    let provider = EffectiveTensorFlux { table, fit_halfwidth: 1, bound: amax * 1.1 };
    let dt = {
        let target = stable_dt(&grid, amax * 1.1);
        t_final / (t_final / target).ceil()
    };
    let mut efa_state = init_macro(grid, dt, gauss, |_| 0.0, |_, _| 0.0, &provider)?;
    let efa_traj = run_macro(&mut efa_state, &provider, |_, _| 0.0, t_final, &[0.5])?;

    // homogenized reference: abar(x) = sqrt(1.25) (1.5 + sin 2 pi x)
    let fast = efa::reference::harmonic_mean_1d(|y| 1.5 + (2.0 * PI * y).sin(), (0.0, 1.0), 256)?;
    let hom = VariableTensorFlux {
        tensor: move |x: [f64; 2]| efa::SymMat::new_1d(fast * (1.5 + (2.0 * PI * x[0]).sin())),
        bound: fast * 2.5,
    };
    let mut hom_state = init_macro(grid, dt, gauss, |_| 0.0, |_, _| 0.0, &hom)?;
    run_macro(&mut hom_state, &hom, |_, _| 0.0, t_final, &[])?;

    // resolved simulation + kernel local average at the macro nodes
    let dns_cells = (3.0 / (eps / 10.0)).round() as usize;
    println!("resolved reference on {dns_cells} nodes ...");
    let dns_grid = MacroGrid::new(1, 3.0, dns_cells, Bc::Periodic)?;
    let mut spec = RunSpec::new(dns_grid, t_final);
    spec.window = Some((t_final, tau));
    spec.snapshot_times = vec![0.5, t_final];
    let dns = solve_dns(&field, gauss, |_| 0.0, |_, _| 0.0, &spec)?;
    let kernel = Kernel::build(3, 5)?;
    let kdns = local_average_field(&dns, &kernel, &kernel, eta, tau, &points)?;

    let diff_hom: Vec<f64> = efa_state
        .u_curr
        .iter()
        .zip(&hom_state.u_curr)
        .map(|(a, b)| a - b)
        .collect();
    let diff_kdns: Vec<f64> = efa_state
        .u_curr
        .iter()
        .zip(&kdns)
        .map(|(a, b)| a - b)
        .collect();
    println!(
        "at T = {t_final}: |EFA - homogenized|_L2 = {:.3e},  |EFA - (K*dns)|/|K*dns| = {:.2}%",
        grid.l2_norm(&diff_hom),
        100.0 * grid.l2_norm(&diff_kdns) / grid.l2_norm(&kdns)
    );

    for (t, u) in &efa_traj.snapshots {
        write_text(&out, &format!("efa_t{t:.2}.csv"), &snapshot_csv_1d(grid.h(), u))?;
    }
    write_text(&out, "homogenized_t1.00.csv", &snapshot_csv_1d(grid.h(), &hom_state.u_curr))?;
    write_text(&out, "kdns_t1.00.csv", &snapshot_csv_1d(grid.h(), &kdns))?;
    for (t, u) in &dns.snapshots {
        write_text(&out, &format!("dns_t{t:.2}.csv"), &snapshot_csv_1d(dns_grid.h(), u))?;
    }
    println!("wrote field snapshots to {}", out.display());
    Ok(())
}
