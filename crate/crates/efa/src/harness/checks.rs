//! The acceptance suite behind `efa check`: one self-contained check per
//! criterion, each returning a pass/fail record. The integration test
//! target asserts every record; the CLI prints one line per check and exits
//! nonzero if any fails.

use super::config::{ExperimentConfig, ExperimentKind, RawConfig};
use super::experiments::{
    homogenized_reference, run_solution_comparison_1d, run_solution_comparison_2d,
    run_upscaling_sweep, ReferenceTensor,
};
use super::report::fit_loglog_slope;
use crate::coefficient::{CoefficientField, Params, SymMat};
use crate::error::Result;
use crate::kernel::{weighted_average, Kernel};
use crate::macroscale::{
    init_macro, run_macro, Bc, ConstantTensorFlux, MacroGrid,
};
use crate::micro::{solve_micro, MicroProblemSpec, QuadraticPoly};
use crate::reference::{
    harmonic_mean_1d, harmonic_mean_2d, solve_homogenized, solve_invariant_measure,
    HomogenizedTensor, Provenance, RunSpec,
};
use crate::upscale::{flux_from_spec, upscale_flux, UpscaleConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:02} {:<28} {} ({:.1}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

fn finish(
    id: u32,
    name: &'static str,
    start: Instant,
    outcome: Result<(bool, String)>,
) -> CheckResult {
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok((passed, detail)) => CheckResult { id, name, passed, detail, seconds },
        Err(e) => CheckResult {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
            seconds,
        },
    }
}

const EPS_SWEEP: [f64; 5] = [1.0 / 50.0, 1.0 / 80.0, 1.0 / 125.0, 1.0 / 200.0, 1.0 / 320.0];

/// Criterion 1: harmonic mean of `1.1 + sin(2 pi y)` equals `sqrt(0.21)` to 1e-10.
pub fn check_01_harmonic_mean_1d() -> CheckResult {
    let t0 = Instant::now();
    finish(1, "harmonic-mean-1d", t0, (|| {
        let v = harmonic_mean_1d(|y| 1.1 + (2.0 * PI * y).sin(), (0.0, 1.0), 64)?;
        let target = 0.21f64.sqrt();
        let err = (v - target).abs();
        let secs = t0.elapsed().as_secs_f64();
        Ok((err <= 1e-10 && secs < 1.0, format!("|a0 - sqrt(0.21)| = {err:.2e}")))
    })())
}

/// Criterion 2: 2D harmonic mean matches the 10-digit reference to 1e-8 under
/// refinement, within 30 s.
pub fn check_02_harmonic_mean_2d() -> CheckResult {
    let t0 = Instant::now();
    finish(2, "harmonic-mean-2d", t0, (|| {
        let cell = CoefficientField::iso_2d(1.0);
        let v = harmonic_mean_2d(
            |x, y| cell.eval(&[x, y]).get(0, 0),
            (0.0, 1.0),
            (0.0, 1.0),
            (128, 128),
        )?;
        let err = (v - 0.3699698702).abs();
        let secs = t0.elapsed().as_secs_f64();
        Ok((err <= 1e-8 && secs < 30.0, format!("|a0 - 0.3699698702| = {err:.2e}")))
    })())
}

/// Criterion 3: periodized almost-periodic references. The 2D value
/// `0.485228277332784` is reproduced to 1e-6. The 1D value quoted for the
/// 1D almost-periodic coefficient, `1.302004095265470`, is not attainable
/// for that coefficient: `1/A = 4 exp(-sin - sin)` has cell mean >= 4 by
/// Jensen's inequality (the sines integrate to zero exactly over the
/// 100-cell), so the harmonic mean is <= 1/4; it computes to
/// `1/(4 I0(1)^2) = 0.155965090108017`. The quoted constant is in fact the
/// harmonic mean of the different medium `1.5 + sin(2 pi 1.41 x) sin(2 pi x)`
/// (reproduced to 15 digits below), so the value and the formula belong to
/// different media. The check asserts the criterion as stated and fails
/// honestly on the 1D half, reporting all three numbers.
#[allow(clippy::excessive_precision)]
pub fn check_03_periodized_references() -> CheckResult {
    let t0 = Instant::now();
    finish(3, "periodized-references", t0, (|| {
        let v1 = harmonic_mean_1d(
            |y| 0.25 * ((2.0 * PI * 1.41 * y).sin() + (2.0 * PI * y).sin()).exp(),
            (0.0, 100.0),
            1 << 16,
        )?;
        let err1 = (v1 - 1.302004095265470).abs();
        // the medium the quoted constant actually belongs to
        let v1_product = harmonic_mean_1d(
            |y| 1.5 + (2.0 * PI * 1.41 * y).sin() * (2.0 * PI * y).sin(),
            (0.0, 100.0),
            1 << 16,
        )?;
        let ref2 = homogenized_reference("aniso2d", &Params::new())?;
        let v2 = match ref2 {
            ReferenceTensor::Constant(m) => m.get(0, 0),
            _ => unreachable!(),
        };
        let err2 = (v2 - 0.485228277332784).abs();
        let pass = err1 <= 1e-6 && err2 <= 1e-6;
        Ok((pass, format!(
            "1d: computed {v1:.15} vs quoted 1.302004095265470 (|diff| = {err1:.2e}; \
             the quote matches 1.5 + sin(2 pi 1.41 y) sin(2 pi y): {v1_product:.15}); \
             2d |diff| = {err2:.2e}"
        )))
    })())
}

/// Criterion 4: upscaling rate: fitted slopes of `|F - Fhat|` against eps land in
/// `[q+1.3, q+2.8]` for q in {1, 3, 5}.
pub fn check_04_upscaling_rate(out_dir: Option<&Path>) -> CheckResult {
    let t0 = Instant::now();
    finish(4, "upscaling-rate", t0, (|| {
        let cfg = upscaling_sweep_config(out_dir);
        let report = run_upscaling_sweep(&cfg)?;
        let mut detail = String::new();
        let mut pass = true;
        for &(p, q) in &cfg.kernel_pairs {
            let slope = report.slope_for(p, q);
            let ok = slope
                .map(|s| s >= q as f64 + 1.3 && s <= q as f64 + 2.8)
                .unwrap_or(false);
            pass &= ok;
            let _ = write!(
                detail,
                "q={q}: {} ",
                slope.map_or("n/a".into(), |s| format!("{s:.2}"))
            );
        }
        pass &= t0.elapsed().as_secs_f64() < 300.0;
        Ok((pass, detail))
    })())
}

/// The shared desk-scale upscaling sweep configuration (also used by the
/// determinism check).
pub fn upscaling_sweep_config(out_dir: Option<&Path>) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::Upscaling,
        coefficient: "per1d_sin".into(),
        coefficient_params: Params::new(),
        epsilons: EPS_SWEEP.to_vec(),
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
        out_dir: out_dir.map(|p| p.to_path_buf()),
        snapshot_times: vec![],
        dns_epsilon: None,
        dns_pair: (3, 5),
    }
}

/// Criterion 5: constant-coefficient exactness: `|F - c tr(hess)| <= 1e-9 (1 + |tr|)`
/// over 50 random quadratics and c in {0.5, 1, 2}.
pub fn check_05_constant_exactness() -> CheckResult {
    let t0 = Instant::now();
    finish(5, "constant-exactness", t0, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = UpscaleConfig::isotropic(3, 3, 0.1, 0.1)?.with_resolution(40);
        let mut worst = 0.0f64;
        for case in 0..50 {
            let c = [0.5, 1.0, 2.0][case % 3];
            let field = CoefficientField::constant(1, c, 0.02)?;
            let hess = SymMat::new_1d(rng.gen_range(-4.0..4.0));
            let uhat = QuadraticPoly::new(
                1,
                [rng.gen_range(-1.0..1.0), 0.0],
                rng.gen_range(-2.0..2.0),
                [rng.gen_range(-2.0..2.0), 0.0],
                hess,
            );
            let f = upscale_flux(&field, &uhat, &cfg)?;
            let tr = hess.trace();
            let err = (f - c * tr).abs() / (1.0 + tr.abs());
            worst = worst.max(err);
        }
        Ok((worst <= 1e-9, format!("worst normalized error {worst:.2e}")))
    })())
}

/// Criterion 6: affine invariance: adding a random affine part to `uhat` leaves `F`
/// unchanged (the micro source depends on the Hessian alone).
pub fn check_06_affine_invariance() -> CheckResult {
    let t0 = Instant::now();
    finish(6, "affine-invariance", t0, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let field = CoefficientField::per_sin_1d(0.02);
        let cfg = UpscaleConfig::isotropic(3, 3, 0.1, 0.1)?;
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let hess = SymMat::new_1d(rng.gen_range(0.5..3.0));
            let center = [rng.gen_range(-0.5..0.5), 0.0];
            let base = QuadraticPoly::probe(1, center, hess);
            let shifted = QuadraticPoly::new(
                1,
                center,
                rng.gen_range(-5.0..5.0),
                [rng.gen_range(-5.0..5.0), 0.0],
                hess,
            );
            let f1 = upscale_flux(&field, &base, &cfg)?;
            let f2 = upscale_flux(&field, &shifted, &cfg)?;
            worst = worst.max((f1 - f2).abs() / f1.abs());
        }
        Ok((worst <= 1e-10, format!("worst relative change {worst:.2e}")))
    })())
}

/// Criterion 7: interior independence: doubling the micro box half-width changes `F`
/// by <= 1e-10 relative (finite speed of propagation).
pub fn check_07_interior_independence() -> CheckResult {
    let t0 = Instant::now();
    finish(7, "interior-independence", t0, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let eps = rng.gen_range(0.008..0.02);
            let eta = rng.gen_range(0.08..0.15);
            let field = CoefficientField::per_sin_1d(eps);
            let cfg = UpscaleConfig::isotropic(3, 3, eta, eta)?;
            let uhat = QuadraticPoly::probe(1, [rng.gen_range(-0.3..0.3), 0.0], SymMat::new_1d(2.0));
            let spec = MicroProblemSpec::build(&field, uhat.clone(), eta, eta, 20)?;
            let f1 = flux_from_spec(&spec, &cfg)?;
            let mut doubled = spec.clone();
            doubled.ell = 2.0 * spec.ell;
            let f2 = flux_from_spec(&doubled, &cfg)?;
            worst = worst.max((f1 - f2).abs() / f1.abs());
        }
        Ok((worst <= 1e-10, format!("worst relative change {worst:.2e}")))
    })())
}

/// Criterion 8: time symmetry of the stored micro field is bitwise.
pub fn check_08_time_symmetry() -> CheckResult {
    let t0 = Instant::now();
    finish(8, "time-symmetry", t0, (|| {
        let field = CoefficientField::per_sin_1d(0.01);
        let uhat = QuadraticPoly::probe(1, [0.2, 0.0], SymMat::new_1d(2.0));
        let spec = MicroProblemSpec::build(&field, uhat, 0.1, 0.1, 20)?;
        let mf = solve_micro(&spec)?;
        for m in 1..=spec.steps as i64 {
            let ok_u = mf
                .time_slice(m)
                .iter()
                .zip(mf.time_slice(-m))
                .all(|(a, b)| a.to_bits() == b.to_bits());
            let ok_f = mf
                .flux_slice(m)
                .iter()
                .zip(mf.flux_slice(-m))
                .all(|(a, b)| a.to_bits() == b.to_bits());
            if !ok_u || !ok_f {
                return Ok((false, format!("mismatch at time slice {m}")));
            }
        }
        Ok((true, format!("{} mirrored slices bitwise equal", spec.steps)))
    })())
}

/// Criterion 9: invariant measure: the isotropic closed form `rho = a0/a` is
/// reproduced, the discrete mean is one to 1e-12 and the operator residual
/// is <= 1e-8. The product-form discretization reproduces the closed form
/// to machine precision (`a rho = const` solves the discrete equations
/// exactly), so the O(N^-2) bound holds with errors at the noise floor; the
/// slope is fitted only if at least three errors sit above it.
pub fn check_09_invariant_measure() -> CheckResult {
    let t0 = Instant::now();
    finish(9, "invariant-measure", t0, (|| {
        let afun = |y: &[f64]| SymMat::new_1d(1.1 + (2.0 * PI * y[0]).sin());
        let a0 = 0.21f64.sqrt();
        let ns = [32usize, 64, 128, 256];
        let mut errs = Vec::new();
        let mut pass = true;
        let mut detail = String::new();
        for &n in &ns {
            let im = solve_invariant_measure(1, n, afun)?;
            pass &= (im.mean() - 1.0).abs() <= 1e-12;
            pass &= im.residual <= 1e-8;
            let mut e2 = 0.0;
            for (idx, v) in im.rho.iter().enumerate() {
                let y = idx as f64 / n as f64;
                let exact = a0 / (1.1 + (2.0 * PI * y).sin());
                e2 += (v - exact).powi(2);
            }
            let err = (e2 / n as f64).sqrt();
            pass &= err <= 1.0 / (n as f64 * n as f64);
            errs.push((1.0 / n as f64, err));
        }
        match fit_loglog_slope(&errs) {
            Ok(slope) => {
                pass &= (1.7..=2.3).contains(&slope);
                let _ = write!(detail, "slope {slope:.2}");
            }
            Err(_) => {
                let _ = write!(
                    detail,
                    "errors at machine precision (max {:.1e}); O(N^-2) holds a fortiori",
                    errs.iter().map(|p| p.1).fold(0.0f64, f64::max)
                );
            }
        }
        Ok((pass, detail))
    })())
}

/// Criterion 10: macro scheme order: with the reference tensor flux, both the macro
/// stepper and the reference solver converge at second order under
/// simultaneous `(H, dt)` refinement against the exact plane-wave solution.
pub fn check_10_macro_order() -> CheckResult {
    let t0 = Instant::now();
    finish(10, "macro-scheme-order", t0, (|| {
        let t_final = 0.3;
        let g = |x: &[f64]| (2.0 * PI * x[0]).sin();
        let exact = |x: f64, t: f64| (2.0 * PI * x).sin() * (2.0 * PI * t).cos();
        let mut errs_macro = Vec::new();
        let mut errs_ref = Vec::new();
        for cells in [16usize, 32, 64, 128] {
            let grid = MacroGrid::new(1, 1.0, cells, Bc::Periodic)?;
            let dt = 0.5 * grid.h();
            let steps = (t_final / dt).round() as usize;
            let tend = steps as f64 * dt;

            let provider = ConstantTensorFlux { a0: SymMat::new_1d(1.0) };
            let mut st = init_macro(grid, dt, g, |_| 0.0, |_, _| 0.0, &provider)?;
            run_macro(&mut st, &provider, |_, _| 0.0, tend, &[])?;
            let err = |u: &[f64]| {
                let mut e2 = 0.0;
                for (i, v) in u.iter().enumerate() {
                    e2 += (v - exact(i as f64 * grid.h(), tend)).powi(2) * grid.h();
                }
                e2.sqrt()
            };
            errs_macro.push((grid.h(), err(&st.u_curr)));

            let a0 = HomogenizedTensor {
                a0: SymMat::new_1d(1.0),
                provenance: Provenance::LiteratureValue,
            };
            let mut spec = RunSpec::new(grid, tend);
            spec.cfl_fraction = 0.5; // same fixed dt/h ratio
            let run = solve_homogenized(&a0, g, |_| 0.0, |_, _| 0.0, &spec)?;
            errs_ref.push((grid.h(), err(&run.snapshots.last().unwrap().1)));
        }
        let s1 = fit_loglog_slope(&errs_macro)?;
        let s2 = fit_loglog_slope(&errs_ref)?;
        let pass = (1.7..=2.3).contains(&s1) && (1.7..=2.3).contains(&s2);
        Ok((pass, format!("macro slope {s1:.2}, reference slope {s2:.2}")))
    })())
}

/// Criterion 11: 1D multiscale solution convergence to the homogenized solution for
/// the almost-periodic medium: at least one configured kernel pair fits a
/// slope inside `[q+1.3, q+2.8]`.
pub fn check_11_solution_convergence_1d(out_dir: Option<&Path>) -> CheckResult {
    let t0 = Instant::now();
    finish(11, "solution-convergence-1d", t0, (|| {
        let cfg = ExperimentConfig {
            kind: ExperimentKind::Solution1d,
            coefficient: "almostper1d".into(),
            coefficient_params: Params::new(),
            epsilons: EPS_SWEEP.to_vec(),
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
            out_dir: out_dir.map(|p| p.to_path_buf()),
            snapshot_times: vec![],
            dns_epsilon: None,
            dns_pair: (3, 5),
        };
        let rep = run_solution_comparison_1d(&cfg)?;
        let mut any = false;
        let mut detail = String::new();
        for &(p, q) in &cfg.kernel_pairs {
            let slope = rep.sweep.slope_for(p, q);
            let ok = slope
                .map(|s| s >= q as f64 + 1.3 && s <= q as f64 + 2.8)
                .unwrap_or(false);
            any |= ok;
            let _ = write!(
                detail,
                "(p={p},q={q}): {} ",
                slope.map_or("n/a".into(), |s| format!("{s:.2}"))
            );
        }
        let pass = any && t0.elapsed().as_secs_f64() < 900.0;
        Ok((pass, detail))
    })())
}

/// Criterion 12: qualitative agreement with the resolved simulation: relative L2
/// distance between the multiscale solution and the kernel average of the
/// DNS, 5% in 1D at eps = 0.01 and 10% in 2D at eps = 0.05.
pub fn check_12_dns_agreement(out_dir: Option<&Path>) -> CheckResult {
    let t0 = Instant::now();
    finish(12, "dns-agreement", t0, (|| {
        let cfg1 = ExperimentConfig {
            kind: ExperimentKind::Solution1d,
            coefficient: "locper1d".into(),
            coefficient_params: Params::new(),
            epsilons: vec![0.01],
            eta: 0.1,
            tau: 0.1,
            kernel_pairs: vec![(3, 5)],
            length: 3.0,
            cells: 250,
            dt: None,
            bc: Bc::Periodic,
            t_final: 1.0,
            fit_halfwidth: 1,
            points_per_eps: 20,
            out_dir: out_dir.map(|p| p.join("dns1d")),
            snapshot_times: vec![],
            dns_epsilon: Some(0.01),
            dns_pair: (3, 5),
        };
        let rel1 = run_solution_comparison_1d(&cfg1)?
            .dns_rel_l2
            .expect("dns comparison configured");

        let mut params2 = Params::new();
        params2.insert("c".into(), 0.0);
        let cfg2 = ExperimentConfig {
            kind: ExperimentKind::Solution2d,
            coefficient: "aniso2d".into(),
            coefficient_params: params2,
            epsilons: vec![0.05],
            eta: 0.25,
            tau: 0.25,
            kernel_pairs: vec![(5, 7)],
            length: 1.0,
            cells: 25,
            dt: None,
            bc: Bc::Periodic,
            t_final: 0.5,
            fit_halfwidth: 1,
            points_per_eps: 20,
            out_dir: out_dir.map(|p| p.join("dns2d")),
            snapshot_times: vec![],
            dns_epsilon: Some(0.05),
            dns_pair: (5, 7),
        };
        let rel2 = run_solution_comparison_2d(&cfg2)?
            .dns_rel_l2
            .expect("dns comparison configured");

        let pass = rel1 <= 0.05 && rel2 <= 0.10;
        Ok((pass, format!("1d: {:.2}% (<=5%), 2d: {:.2}% (<=10%)", 100.0 * rel1, 100.0 * rel2)))
    })())
}

/// Criterion 13: averaging rate: the worst-phase oscillation-averaging error
/// decays with slope in `[q+1.5, q+2.8]` for q in {1, 3, 5}.
pub fn check_13_averaging_rate() -> CheckResult {
    let t0 = Instant::now();
    finish(13, "averaging-rate", t0, (|| {
        let scale = 0.05;
        let n = (1 << 15) + 1;
        let step = 2.0 * scale / (n - 1) as f64;
        let phases = [0.0, 0.4 * PI, 0.8 * PI, 1.2 * PI, 1.6 * PI];
        let cases: [(u32, u32, &[f64]); 3] = [
            (7, 1, &[0.16, 0.11, 0.08, 0.055, 0.04, 0.028, 0.02]),
            (7, 3, &[0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.02]),
            (7, 5, &[0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.02]),
        ];
        let mut pass = true;
        let mut detail = String::new();
        for (p, q, ratios) in cases {
            let kernel = Kernel::build(p, q)?;
            let mut pts = Vec::new();
            for &r in ratios {
                let eps = r * scale;
                let mut worst = 0.0f64;
                for &ph in &phases {
                    let vals: Vec<f64> = (0..n)
                        .map(|i| {
                            let x = -scale + i as f64 * step;
                            (2.0 * PI * x / eps + ph).sin()
                        })
                        .collect();
                    let v = weighted_average(&kernel, scale, 0.0, -scale, step, &vals)?;
                    worst = worst.max(v.abs());
                }
                pts.push((eps, worst));
            }
            let slope = fit_loglog_slope(&pts)?;
            let ok = slope >= q as f64 + 1.5 && slope <= q as f64 + 2.8;
            pass &= ok;
            let _ = write!(detail, "q={q}: {slope:.2} ");
        }
        pass &= t0.elapsed().as_secs_f64() < 10.0;
        Ok((pass, detail))
    })())
}

/// Criterion 14: determinism: running the upscaling sweep twice produces
/// byte-identical CSV files.
pub fn check_14_determinism(out_dir: &Path) -> CheckResult {
    let t0 = Instant::now();
    finish(14, "determinism", t0, (|| {
        let mut small = upscaling_sweep_config(None);
        small.epsilons = vec![1.0 / 50.0, 1.0 / 80.0, 1.0 / 125.0];
        small.kernel_pairs = vec![(3, 3)];
        small.points_per_eps = 20;
        let a = out_dir.join("det_a");
        let b = out_dir.join("det_b");
        small.out_dir = Some(a.clone());
        run_upscaling_sweep(&small)?;
        small.out_dir = Some(b.clone());
        run_upscaling_sweep(&small)?;
        for name in ["upscaling_errors.csv", "summary.csv"] {
            let ba = std::fs::read(a.join(name))?;
            let bb = std::fs::read(b.join(name))?;
            if ba != bb {
                return Ok((false, format!("{name} differs between runs")));
            }
        }
        Ok((true, "CSV outputs byte-identical across repeated runs".into()))
    })())
}

/// Runs every acceptance check in order, printing one line per criterion.
pub fn run_all(out_dir: &Path, quiet: bool) -> Result<Vec<CheckResult>> {
    std::fs::create_dir_all(out_dir)?;
    let checks: Vec<Box<dyn FnOnce() -> CheckResult>> = vec![
        Box::new(check_01_harmonic_mean_1d),
        Box::new(check_02_harmonic_mean_2d),
        Box::new(check_03_periodized_references),
        Box::new({
            let d = out_dir.join("upscaling");
            move || check_04_upscaling_rate(Some(&d))
        }),
        Box::new(check_05_constant_exactness),
        Box::new(check_06_affine_invariance),
        Box::new(check_07_interior_independence),
        Box::new(check_08_time_symmetry),
        Box::new(check_09_invariant_measure),
        Box::new(check_10_macro_order),
        Box::new({
            let d = out_dir.join("solution1d");
            move || check_11_solution_convergence_1d(Some(&d))
        }),
        Box::new({
            let d = out_dir.to_path_buf();
            move || check_12_dns_agreement(Some(&d))
        }),
        Box::new(check_13_averaging_rate),
        Box::new({
            let d = out_dir.to_path_buf();
            move || check_14_determinism(&d)
        }),
    ];
    let mut results = Vec::new();
    for c in checks {
        let r = c();
        if !quiet {
            println!("{}", r.line());
        }
        results.push(r);
    }
    Ok(results)
}

/// Parses a config purely for validation (exposed for the CLI).
pub fn validate_config_text(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_raw(&RawConfig::parse(text)?)
}
