//! Upscaling error `|F - Fhat|` against the scale parameter for kernels of
//! increasing smoothness, in one and two dimensions.
//!
//! The flux `F` is measured by solving the heterogeneous wave equation in a
//! small periodic box with quadratic initial data `x_1^2` and averaging
//! `sum A_ij d_ij u` against the space-time kernel; `Fhat = 2 a0` with `a0`
//! the harmonic mean of the cell. The error decays like `(eps/eta)^(q+2)`.
//!
//! ```text
//! cargo run --release --example upscaling_error [--out out/upscaling]
//! ```

use efa::harness::{homogenized_reference, run_upscaling_sweep, ExperimentConfig, ExperimentKind};
use efa::macroscale::Bc;

fn base_config() -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::Upscaling,
        coefficient: "per1d_sin".into(),
        coefficient_params: Default::default(),
        epsilons: vec![1.0 / 50.0, 1.0 / 80.0, 1.0 / 125.0, 1.0 / 200.0, 1.0 / 320.0],
        eta: 0.1,
        tau: 0.1,
        kernel_pairs: vec![(5, 1), (3, 3), (5, 5)],
        length: 3.0,
        cells: 50,
        dt: None,
        bc: Bc::Periodic,
        t_final: 1.0,
        fit_halfwidth: 1,
        points_per_eps: 80,
        out_dir: None,
        snapshot_times: vec![],
        dns_epsilon: None,
        dns_pair: (3, 5),
    }
}

fn print_report(report: &efa::harness::SweepReport, pairs: &[(u32, u32)], epsilons: &[f64]) {
    print!("{:>12}", "eps");
    for &(p, q) in pairs {
        print!("  (p={p},q={q})");
    }
    println!();
    for &eps in epsilons {
        print!("{eps:>12.5}");
        for &(p, q) in pairs {
            let err = report
                .rows
                .iter()
                .find(|r| r.p == p && r.q == q && (r.epsilon - eps).abs() < 1e-12)
                .map(|r| r.error)
                .unwrap_or(f64::NAN);
            print!("  {err:9.2e}");
        }
        println!();
    }
    for s in &report.slopes {
        println!(
            "  slope (p={}, q={}): {}   [theory q+2 = {}]",
            s.p,
            s.q,
            s.slope.map_or("n/a".into(), |v| format!("{v:.2}")),
            s.q + 2
        );
    }
}

fn main() -> efa::Result<()> {
    let out = std::env::args()
        .skip_while(|a| a != "--out")
        .nth(1)
        .map(std::path::PathBuf::from);

    let mut cfg = base_config();
    cfg.out_dir = out.clone();
    println!("== 1D: a(x) = 1.1 + sin(2 pi x / eps), eta = tau = 0.1 ==");
    let a0 = match homogenized_reference("per1d_sin", &cfg.coefficient_params)? {
        efa::harness::ReferenceTensor::Constant(m) => m.get(0, 0),
        _ => unreachable!(),
    };
    println!("reference a0 = {a0:.12} (sqrt(0.21)), Fhat = {:.12}", 2.0 * a0);
    let report = run_upscaling_sweep(&cfg)?;
    print_report(&report, &cfg.kernel_pairs, &cfg.epsilons);

    println!("\n== 2D: reciprocal-exponential cell, eta = tau = 0.1 ==");
    let mut cfg2 = base_config();
    cfg2.coefficient = "iso2d".into();
    cfg2.epsilons = vec![0.02, 0.01, 0.005];
    cfg2.kernel_pairs = vec![(5, 1), (3, 3)];
    cfg2.points_per_eps = 20;
    cfg2.out_dir = out.map(|p| p.join("2d"));
    let report2 = run_upscaling_sweep(&cfg2)?;
    print_report(&report2, &cfg2.kernel_pairs, &cfg2.epsilons);
    Ok(())
}
