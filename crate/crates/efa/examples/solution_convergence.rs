//! Convergence of the multiscale solution to the homogenized solution as
//! the microstructure wavelength shrinks, in the almost-periodic medium
//! `(1/4) e^{sin(2 pi sqrt(2) x/eps) + sin(2 pi x/eps)}`.
//!
//! Both solvers share the coarse grid and time step, so the measured
//! distance isolates the upscaling error, which decays like
//! `(eps/eta)^(q+2)`.
//!
//! ```text
//! cargo run --release --example solution_convergence [--out out/solution]
//! ```

use efa::harness::{run_solution_comparison_1d, ExperimentConfig, ExperimentKind};
use efa::macroscale::Bc;

fn main() -> efa::Result<()> {
    let out = std::env::args()
        .skip_while(|a| a != "--out")
        .nth(1)
        .map(std::path::PathBuf::from);

    let cfg = ExperimentConfig {
        kind: ExperimentKind::Solution1d,
        coefficient: "almostper1d".into(),
        coefficient_params: Default::default(),
        epsilons: vec![1.0 / 50.0, 1.0 / 80.0, 1.0 / 125.0, 1.0 / 200.0, 1.0 / 320.0],
        eta: 0.1,
        tau: 0.1,
        kernel_pairs: vec![(3, 1), (3, 3)],
        length: 3.0,
        cells: 50,
        dt: Some(0.01),
        bc: Bc::Periodic,
        t_final: 1.0,
        fit_halfwidth: 1,
        points_per_eps: 20,
        out_dir: out,
        snapshot_times: vec![],
        dns_epsilon: None,
        dns_pair: (3, 5),
    };

    println!("Gaussian pulse on [0, 3], 50 macro points, T = 1, eta = tau = 0.1");
    let report = run_solution_comparison_1d(&cfg)?;
    println!("{:>12} {:>10} {:>12}", "eps", "(p,q)", "L2 error");
    for row in &report.sweep.rows {
        println!(
            "{:>12.5} {:>10} {:>12.3e}",
            row.epsilon,
            format!("({},{})", row.p, row.q),
            row.error
        );
    }
    for s in &report.sweep.slopes {
        println!(
            "slope (p={}, q={}): {}   [theory q+2 = {}]",
            s.p,
            s.q,
            s.slope.map_or("n/a".into(), |v| format!("{v:.2}")),
            s.q + 2
        );
    }
    Ok(())
}
