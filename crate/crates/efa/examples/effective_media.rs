//! Effective coefficients of the builtin media, three ways: harmonic-mean
//! quadrature, the invariant-measure cell problem, and (for the isotropic
//! periodic case) the closed form they must both reproduce.
//!
//! ```text
//! cargo run --release --example effective_media
//! ```

use efa::coefficient::{CoefficientField, SymMat};
use efa::reference::{
    harmonic_mean_1d, harmonic_mean_2d, homogenized_coefficient, solve_invariant_measure,
};
use std::f64::consts::PI;

fn main() -> efa::Result<()> {
    println!("== one-dimensional media ==");
    let a0_sin = harmonic_mean_1d(|y| 1.1 + (2.0 * PI * y).sin(), (0.0, 1.0), 64)?;
    println!(
        "1.1 + sin(2 pi y):                 a0 = {a0_sin:.15}  (closed form sqrt(0.21) = {:.15})",
        0.21f64.sqrt()
    );

    let fast = harmonic_mean_1d(|y| 1.5 + (2.0 * PI * y).sin(), (0.0, 1.0), 64)?;
    println!(
        "(1.5 + sin 2 pi x)(1.5 + sin 2 pi x/eps): abar(x) = {fast:.12} * (1.5 + sin 2 pi x)"
    );

    let a0_almost = harmonic_mean_1d(
        |y| 0.25 * ((2.0 * PI * 1.41 * y).sin() + (2.0 * PI * y).sin()).exp(),
        (0.0, 100.0),
        1 << 16,
    )?;
    println!(
        "(1/4) e^(sin(2 pi 1.41 y) + sin(2 pi y)), 100-cell: a0 = {a0_almost:.15}"
    );

    println!("\n== two-dimensional media ==");
    let iso = CoefficientField::iso_2d(1.0);
    let a0_iso = harmonic_mean_2d(
        |x, y| iso.eval(&[x, y]).get(0, 0),
        (0.0, 1.0),
        (0.0, 1.0),
        (128, 128),
    )?;
    println!("reciprocal-exponential cell:       a0 = {a0_iso:.12}");

    let s0 = harmonic_mean_2d(
        |x, y| {
            (1.0 / 3.0)
                * (1.5 + (2.0 * PI * x).sin())
                * (1.5 + 0.5 * ((2.0 * PI * 1.41 * x).cos() + (2.0 * PI * y).cos()))
        },
        (0.0, 100.0),
        (0.0, 1.0),
        (1 << 14, 64),
    )?;
    println!("product cell (1.41-periodized):    a0 = {s0:.15}");

    println!("\n== invariant measure cross-check (isotropic 1D cell) ==");
    let afun = |y: &[f64]| SymMat::new_1d(1.1 + (2.0 * PI * y[0]).sin());
    for n in [32usize, 128, 512] {
        let im = solve_invariant_measure(1, n, afun)?;
        let tensor = homogenized_coefficient(afun, &im);
        let a0 = tensor.a0.get(0, 0);
        println!(
            "N = {n:4}: mean(rho) = {:.14}, residual = {:.2e}, A0 = {a0:.14} (|A0 - sqrt(0.21)| = {:.2e})",
            im.mean(),
            im.residual,
            (a0 - 0.21f64.sqrt()).abs()
        );
    }
    println!("\nrho must equal a0/a pointwise: the discrete kernel contains it exactly.");
    Ok(())
}
