//! Averaging kernels with compact support, prescribed smoothness and
//! vanishing moments, plus the weighted trapezoidal quadrature used for
//! local averaging.
//!
//! A kernel is built as `K(t) = P(t^2) * (1 - t^2)^(q+1)` on `[-1, 1]` and
//! zero outside. The factor `(1 - t^2)^(q+1)` makes `K` a `C^q` function
//! whose first `q` derivatives vanish at the support endpoints; the even
//! polynomial `P` is the minimal-degree solution of the moment system
//!
//! ```text
//! ∫ K(t) dt = 1,   ∫ K(t) t^r dt = 0  for 1 <= r <= p.
//! ```
//!
//! Odd moments vanish by symmetry, so only the `floor(p/2) + 1` even
//! constraints are solved for.

use crate::error::{EfaError, Result};
use nalgebra::{DMatrix, DVector};

/// Compactly supported averaging weight on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Kernel {
    p: u32,
    q: u32,
    /// Coefficients of `P` in powers of `t^2`, lowest degree first.
    coeffs: Vec<f64>,
}

/// Exact value of `∫_{-1}^{1} t^(2a) (1 - t^2)^c dt` by binomial expansion.
fn even_monomial_integral(a: u32, c: u32) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=c {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * 2.0 / (2 * a + 2 * j + 1) as f64;
        binom = binom * (c - j) as f64 / (j + 1) as f64;
    }
    sum
}

impl Kernel {
    /// Builds the kernel with `p` vanishing moments and smoothness order `q`.
    ///
    /// An even `p` produces the same kernel as `p + 1`: the symmetric
    /// construction kills all odd moments for free.
    pub fn build(p: u32, q: u32) -> Result<Kernel> {
        if p < 1 {
            return Err(EfaError::Config("kernel requires p >= 1".into()));
        }
        if p > 13 || q > 13 {
            return Err(EfaError::Config(
                "kernel orders above 13 are not supported (ill-conditioned moment system)".into(),
            ));
        }
        let m = (p / 2) as usize;
        let mut mat = DMatrix::zeros(m + 1, m + 1);
        for k in 0..=m {
            for j in 0..=m {
                mat[(k, j)] = even_monomial_integral((k + j) as u32, q + 1);
            }
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[0] = 1.0;
        let lu = mat.lu();
        let sol = lu.solve(&rhs).ok_or_else(|| {
            EfaError::Degenerate(format!("kernel moment system singular for p={p}, q={q}"))
        })?;
        Ok(Kernel {
            p,
            q,
            coeffs: sol.iter().copied().collect(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Evaluates `K(t)`; zero outside `[-1, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let s = t * t;
        if s > 1.0 {
            return 0.0;
        }
        let mut poly = 0.0;
        for &c in self.coeffs.iter().rev() {
            poly = poly * s + c;
        }
        poly * (1.0 - s).powi(self.q as i32 + 1)
    }

    /// Evaluates the scaled kernel `(1/scale) K(x/scale)`, supported on
    /// `|x| <= scale`.
    pub fn eval_scaled(&self, scale: f64, x: f64) -> f64 {
        self.eval(x / scale) / scale
    }

    /// Exact `r`-th moment `∫ K(t) t^r dt` from the polynomial coefficients.
    pub fn moment(&self, r: u32) -> f64 {
        if r % 2 == 1 {
            return 0.0;
        }
        let a = r / 2;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * even_monomial_integral(a + k as u32, self.q + 1))
            .sum()
    }

    /// Quadrature weights `w_i = K_scale(x_i) * trapezoid_i` for a symmetric
    /// window of `2*half_n + 1` nodes `x_i = (i - half_n) * step` covering
    /// exactly `[-scale, scale]`.
    pub fn axis_weights(&self, scale: f64, half_n: usize, step: f64) -> Result<Vec<f64>> {
        if half_n < 1 || step <= 0.0 {
            return Err(EfaError::Precondition(
                "axis_weights needs half_n >= 1 and step > 0".into(),
            ));
        }
        if ((half_n as f64) * step - scale).abs() > 1e-9 * scale {
            return Err(EfaError::Precondition(format!(
                "window [{:.3e}] not aligned with kernel scale {:.3e}",
                half_n as f64 * step,
                scale
            )));
        }
        let n = 2 * half_n + 1;
        let mut w = Vec::with_capacity(n);
        for i in 0..n {
            let x = (i as f64 - half_n as f64) * step;
            let mut wi = self.eval_scaled(scale, x) * step;
            if i == 0 || i == n - 1 {
                wi *= 0.5;
            }
            w.push(wi);
        }
        Ok(w)
    }
}

/// Trapezoidal approximation of `∫ K_scale(x - center) f(x) dx` from uniform
/// samples of `f` on `[center - scale, center + scale]`.
///
/// `values[i]` is the sample at `start + i * step`; the sample range must
/// match the kernel window (the micro solvers construct grids so that the
/// window edges are grid nodes, so no interpolation ever happens).
pub fn weighted_average(
    kernel: &Kernel,
    scale: f64,
    center: f64,
    start: f64,
    step: f64,
    values: &[f64],
) -> Result<f64> {
    if values.len() < 3 {
        return Err(EfaError::Precondition(
            "weighted_average needs at least 3 samples".into(),
        ));
    }
    if step <= 0.0 || scale <= 0.0 {
        return Err(EfaError::Precondition(
            "weighted_average needs positive step and scale".into(),
        ));
    }
    let end = start + (values.len() - 1) as f64 * step;
    let tol = 1e-9 * scale;
    if (start - (center - scale)).abs() > tol || (end - (center + scale)).abs() > tol {
        return Err(EfaError::Precondition(format!(
            "samples [{start:.6e}, {end:.6e}] do not cover the window [{:.6e}, {:.6e}]",
            center - scale,
            center + scale
        )));
    }
    let n = values.len();
    let mut acc = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let x = start + i as f64 * step;
        let mut w = kernel.eval_scaled(scale, x - center) * step;
        if i == 0 || i == n - 1 {
            w *= 0.5;
        }
        acc += w * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn p1_q0_is_three_quarters_bump() {
        let k = Kernel::build(1, 0).unwrap();
        assert_abs_diff_eq!(k.coeffs[0], 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(k.eval(0.0), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(k.moment(0), 1.0, epsilon = 1e-14);
        assert_eq!(k.moment(1), 0.0);
    }

    #[test]
    fn scaled_eval_matches_hand_value() {
        let k = Kernel::build(1, 0).unwrap();
        // (1/2) K(0) = (1/2)(3/4)
        assert_abs_diff_eq!(k.eval_scaled(2.0, 0.0), 0.375, epsilon = 1e-14);
        assert_eq!(k.eval_scaled(2.0, 2.5), 0.0);
        assert_eq!(k.eval_scaled(0.1, 0.11), 0.0);
    }

    #[test]
    fn support_endpoints_vanish() {
        for (p, q) in [(1, 0), (3, 3), (5, 7)] {
            let k = Kernel::build(p, q).unwrap();
            assert_eq!(k.eval(1.0), 0.0);
            assert_eq!(k.eval(-1.0), 0.0);
            // first q derivatives vanish at the endpoints; spot-check by a
            // one-sided difference staying O(h^(q+1))
            let h = 1e-3;
            let d1 = (k.eval(1.0 - h) - k.eval(1.0)) / h;
            if q >= 1 {
                assert!(d1.abs() < 1e-2, "K' near t=1 too large: {d1}");
            }
        }
    }

    #[test]
    fn scaled_mass_is_one_for_any_scale() {
        let k = Kernel::build(3, 3).unwrap();
        for scale in [0.05, 1.0, 7.0] {
            let n = 4001;
            let step = 2.0 * scale / (n - 1) as f64;
            let vals = vec![1.0; n];
            let m = weighted_average(&k, scale, 0.0, -scale, step, &vals).unwrap();
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_and_linear_are_reproduced() {
        let k = Kernel::build(3, 3).unwrap();
        let scale = 0.5;
        let n = 2001;
        let step = 2.0 * scale / (n - 1) as f64;
        let consts: Vec<f64> = (0..n).map(|_| 5.0).collect();
        let v = weighted_average(&k, scale, 0.0, -scale, step, &consts).unwrap();
        assert_abs_diff_eq!(v, 5.0, epsilon = 1e-10);

        // alpha + beta x around center 0 -> alpha (first vanishing moment)
        let lin: Vec<f64> = (0..n)
            .map(|i| {
                let x = -scale + i as f64 * step;
                2.5 + 4.0 * x
            })
            .collect();
        let v = weighted_average(&k, scale, 0.0, -scale, step, &lin).unwrap();
        assert_abs_diff_eq!(v, 2.5, epsilon = 1e-10);
    }

    #[test]
    fn misaligned_window_is_rejected() {
        let k = Kernel::build(1, 1).unwrap();
        let vals = vec![1.0; 11];
        let err = weighted_average(&k, 0.5, 0.0, -0.4, 0.1, &vals);
        assert!(matches!(err, Err(EfaError::Precondition(_))));
    }

    #[test]
    fn oscillation_error_decays_at_kernel_rate() {
        // sin(2 pi x / eps) averages to ~0 at rate (eps/scale)^(q+2)
        let k = Kernel::build(3, 3).unwrap();
        let scale = 0.05;
        let center = 0.0;
        let n = (1 << 15) + 1;
        let step = 2.0 * scale / (n - 1) as f64;
        let mut errs = Vec::new();
        let ratios = [0.2, 0.1, 0.05];
        for r in ratios {
            let eps = r * scale;
            let vals: Vec<f64> = (0..n)
                .map(|i| {
                    let x = center - scale + i as f64 * step;
                    (2.0 * std::f64::consts::PI * x / eps + 0.7).sin()
                })
                .collect();
            let v = weighted_average(&k, scale, center, center - scale, step, &vals).unwrap();
            errs.push(v.abs());
        }
        // two-point slope over the extremes; full banded fit is in the
        // acceptance suite
        let slope = (errs[0] / errs[2]).ln() / (ratios[0] / ratios[2]).ln();
        assert!(slope > 4.5, "averaging rate too low: {slope}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn moments_vanish_for_all_orders(p in 1u32..8, q in 0u32..9) {
            let k = Kernel::build(p, q).unwrap();
            prop_assert!((k.moment(0) - 1.0).abs() < 1e-10);
            for r in 1..=p {
                prop_assert!(k.moment(r).abs() < 1e-10, "moment {} = {}", r, k.moment(r));
            }
        }

        #[test]
        fn kernel_is_exactly_even(p in 1u32..8, q in 0u32..9, t in 0.0f64..1.0) {
            let k = Kernel::build(p, q).unwrap();
            prop_assert_eq!(k.eval(t).to_bits(), k.eval(-t).to_bits());
        }
    }
}
