//! Heterogeneous media models: pure, evaluable coefficient fields with known
//! ellipticity bounds.
//!
//! Every builtin is defined on all of `R^d` (micro boxes near the domain
//! boundary evaluate the medium outside `[0, L]^d`, so no clipping happens
//! here) and evaluation is deterministic and side-effect free; fields can be
//! shared freely across concurrent micro solves.

use crate::error::{EfaError, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub type Params = BTreeMap<String, f64>;

/// Symmetric d x d matrix for d in {1, 2}. Symmetry holds by construction:
/// the off-diagonal entry is stored once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    dim: usize,
    a11: f64,
    a22: f64,
    a12: f64,
}

impl SymMat {
    pub fn scalar(dim: usize, v: f64) -> Self {
        SymMat { dim, a11: v, a22: if dim == 2 { v } else { 0.0 }, a12: 0.0 }
    }

    pub fn new_2d(a11: f64, a22: f64, a12: f64) -> Self {
        SymMat { dim: 2, a11, a22, a12 }
    }

    pub fn new_1d(a: f64) -> Self {
        SymMat { dim: 1, a11: a, a22: 0.0, a12: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.a11,
            (1, 1) => self.a22,
            (0, 1) | (1, 0) => self.a12,
            _ => panic!("SymMat index out of range"),
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Frobenius-style contraction `sum_ij A_ij B_ij`.
    pub fn contract(&self, other: &SymMat) -> f64 {
        self.a11 * other.a11 + self.a22 * other.a22 + 2.0 * self.a12 * other.a12
    }

    /// Largest eigenvalue magnitude (spectral norm for SPD matrices).
    pub fn spectral_norm(&self) -> f64 {
        if self.dim == 1 {
            self.a11.abs()
        } else {
            let mid = 0.5 * (self.a11 + self.a22);
            let rad = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a12).sqrt();
            (mid + rad).abs().max((mid - rad).abs())
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim == 1 {
            self.a11
        } else {
            let mid = 0.5 * (self.a11 + self.a22);
            let rad = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a12).sqrt();
            mid - rad
        }
    }

    pub fn scale(&self, s: f64) -> SymMat {
        SymMat { dim: self.dim, a11: self.a11 * s, a22: self.a22 * s, a12: self.a12 * s }
    }
}

/// Structural classification of a medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    Constant,
    Periodic,
    LocallyPeriodic,
    AlmostPeriodic,
}

#[derive(Debug, Clone)]
enum Medium {
    Constant { value: f64 },
    /// `1.1 + sin(2 pi x / eps)`
    PerSin1d,
    /// `(1.5 + sin(2 pi x)) (1.5 + sin(2 pi x / eps))`
    LocPer1d,
    /// `(1/4) exp(sin(2 pi r x / eps) + sin(2 pi x / eps))`, `r ~ sqrt(2)`
    AlmostPer1d { root: f64 },
    /// `(1.1 + cos(2 pi x1/eps) sin(2 pi x2/eps) + e^{cos(2 pi x1/eps) + sin(2 pi x2/eps)})^{-1} I`
    Iso2d,
    /// `(1/3)(3/2 + sin(2 pi x1/eps))(3/2 + (cos(2 pi r x1/eps) + cos(2 pi x2/eps))/2) D`,
    /// `D = [[1, c], [c, 1]]`
    Aniso2d { c: f64, root: f64 },
}

/// Evaluable medium `A^eps` with scale `eps` and ellipticity bounds.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    dim: usize,
    epsilon: f64,
    kind: CoefficientKind,
    medium: Medium,
    c1: f64,
    c2: f64,
    sup_norm: f64,
}

impl CoefficientField {
    /// Looks a builtin up by name. Extra parameters come from the config
    /// parameter map (`c` for `constant` and `aniso2d`, `sqrt2` to override
    /// the irrational frequency of the almost-periodic media).
    pub fn builtin(name: &str, epsilon: f64, params: &Params) -> Result<CoefficientField> {
        if epsilon <= 0.0 {
            return Err(EfaError::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        let root = params.get("sqrt2").copied().unwrap_or(std::f64::consts::SQRT_2);
        match name {
            "constant" => {
                let c = params.get("c").copied().unwrap_or(1.0);
                let dim = params.get("dim").map(|v| *v as usize).unwrap_or(1);
                Self::constant(dim, c, epsilon)
            }
            "per1d_sin" => Ok(Self::per_sin_1d(epsilon)),
            "locper1d" => Ok(Self::loc_per_1d(epsilon)),
            "almostper1d" => Ok(Self::almost_per_1d(epsilon, root)),
            "iso2d" => Ok(Self::iso_2d(epsilon)),
            "aniso2d" => {
                let c = params.get("c").copied().unwrap_or(0.0);
                Self::aniso_2d(epsilon, c, root)
            }
            other => Err(EfaError::Config(format!("unknown coefficient '{other}'"))),
        }
    }

    pub fn constant(dim: usize, value: f64, epsilon: f64) -> Result<CoefficientField> {
        if value <= 0.0 {
            return Err(EfaError::Config("constant coefficient must be positive".into()));
        }
        if dim != 1 && dim != 2 {
            return Err(EfaError::Config("dim must be 1 or 2".into()));
        }
        Ok(CoefficientField {
            dim,
            epsilon,
            kind: CoefficientKind::Constant,
            medium: Medium::Constant { value },
            c1: value,
            c2: value,
            sup_norm: value * 1.05,
        })
    }

    pub fn per_sin_1d(epsilon: f64) -> CoefficientField {
        let mut f = CoefficientField {
            dim: 1,
            epsilon,
            kind: CoefficientKind::Periodic,
            medium: Medium::PerSin1d,
            c1: 0.1, // 1.1 - 1
            c2: 2.1, // 1.1 + 1
            sup_norm: 0.0,
        };
        f.sup_norm = f.sample_sup_norm();
        f
    }

    pub fn loc_per_1d(epsilon: f64) -> CoefficientField {
        let mut f = CoefficientField {
            dim: 1,
            epsilon,
            kind: CoefficientKind::LocallyPeriodic,
            medium: Medium::LocPer1d,
            c1: 0.25, // 0.5 * 0.5
            c2: 6.25, // 2.5 * 2.5
            sup_norm: 0.0,
        };
        f.sup_norm = f.sample_sup_norm();
        f
    }

    pub fn almost_per_1d(epsilon: f64, root: f64) -> CoefficientField {
        let mut f = CoefficientField {
            dim: 1,
            epsilon,
            kind: CoefficientKind::AlmostPeriodic,
            medium: Medium::AlmostPer1d { root },
            c1: 0.25 * (-2.0f64).exp(),
            c2: 0.25 * (2.0f64).exp(),
            sup_norm: 0.0,
        };
        f.sup_norm = f.sample_sup_norm();
        f
    }

    pub fn iso_2d(epsilon: f64) -> CoefficientField {
        let mut f = CoefficientField {
            dim: 2,
            epsilon,
            kind: CoefficientKind::Periodic,
            medium: Medium::Iso2d,
            // denominator ranges over [1.1, 2.1 + e^2]
            c1: 1.0 / (2.1 + (2.0f64).exp()),
            c2: 1.0 / 1.1,
            sup_norm: 0.0,
        };
        f.sup_norm = f.sample_sup_norm();
        f
    }

    pub fn aniso_2d(epsilon: f64, c: f64, root: f64) -> Result<CoefficientField> {
        if c.abs() >= 1.0 {
            return Err(EfaError::Config(format!(
                "aniso2d needs |c| < 1 for ellipticity, got {c}"
            )));
        }
        let mut f = CoefficientField {
            dim: 2,
            epsilon,
            kind: CoefficientKind::AlmostPeriodic,
            medium: Medium::Aniso2d { c, root },
            c1: (1.0 - c.abs()) / 12.0,
            c2: 25.0 * (1.0 + c.abs()) / 12.0,
            sup_norm: 0.0,
        };
        f.sup_norm = f.sample_sup_norm();
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    /// Lower ellipticity bound `c1`.
    pub fn lower_bound(&self) -> f64 {
        self.c1
    }

    /// Upper ellipticity bound `c2`.
    pub fn upper_bound(&self) -> f64 {
        self.c2
    }

    /// Evaluates `A^eps(x)`; `x` must have `dim` entries.
    pub fn eval(&self, x: &[f64]) -> SymMat {
        debug_assert_eq!(x.len(), self.dim);
        match &self.medium {
            Medium::Constant { value } => SymMat::scalar(self.dim, *value),
            Medium::PerSin1d => SymMat::new_1d(1.1 + (2.0 * PI * x[0] / self.epsilon).sin()),
            Medium::LocPer1d => SymMat::new_1d(
                (1.5 + (2.0 * PI * x[0]).sin()) * (1.5 + (2.0 * PI * x[0] / self.epsilon).sin()),
            ),
            Medium::AlmostPer1d { root } => {
                let u = 2.0 * PI * x[0] / self.epsilon;
                SymMat::new_1d(0.25 * ((root * u).sin() + u.sin()).exp())
            }
            Medium::Iso2d => {
                let u = 2.0 * PI * x[0] / self.epsilon;
                let v = 2.0 * PI * x[1] / self.epsilon;
                let denom = 1.1 + u.cos() * v.sin() + (u.cos() + v.sin()).exp();
                SymMat::scalar(2, 1.0 / denom)
            }
            Medium::Aniso2d { c, root } => {
                let u = 2.0 * PI * x[0] / self.epsilon;
                let v = 2.0 * PI * x[1] / self.epsilon;
                let s = (1.0 / 3.0)
                    * (1.5 + u.sin())
                    * (1.5 + 0.5 * ((root * u).cos() + v.cos()));
                SymMat::new_2d(s, s, c * s)
            }
        }
    }

    /// Scalar fast path for one-dimensional media.
    pub fn eval_1d(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.eval(&[x]).get(0, 0)
    }

    /// `|A|_inf`: the sampled supremum of the spectral norm, inflated by 5%
    /// so that finite-speed box sizing stays conservative.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Dense sampling of the spectral norm. 1D media are sampled over
    /// `[0, 3]` (the largest macro domain used) with spacing `eps/32`; 2D
    /// media over `[0, 1]^2` with spacing `eps/16`. The sample count is
    /// capped, which keeps construction cheap for very small `eps`; the 5%
    /// inflation covers the gap to the true supremum.
    fn sample_sup_norm(&self) -> f64 {
        let mut max = 0.0f64;
        match self.dim {
            1 => {
                let n = ((3.0 / (self.epsilon / 32.0)) as usize).clamp(4096, 1 << 22);
                let h = 3.0 / n as f64;
                for i in 0..=n {
                    let v = self.eval(&[i as f64 * h]).spectral_norm();
                    if v > max {
                        max = v;
                    }
                }
            }
            _ => {
                let n = ((1.0 / (self.epsilon / 16.0)) as usize).clamp(256, 4096);
                let h = 1.0 / n as f64;
                for i in 0..=n {
                    for j in 0..=n {
                        let v = self.eval(&[i as f64 * h, j as f64 * h]).spectral_norm();
                        if v > max {
                            max = v;
                        }
                    }
                }
            }
        }
        max * 1.05
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn no_params() -> Params {
        Params::new()
    }

    #[test]
    fn per_sin_at_origin() {
        let f = CoefficientField::builtin("per1d_sin", 0.01, &no_params()).unwrap();
        assert_abs_diff_eq!(f.eval_1d(0.0), 1.1, epsilon = 1e-15);
    }

    #[test]
    fn constant_returns_scaled_identity() {
        let mut p = Params::new();
        p.insert("c".into(), 2.0);
        p.insert("dim".into(), 2.0);
        let f = CoefficientField::builtin("constant", 0.5, &p).unwrap();
        let m = f.eval(&[0.37, -1.2]);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(1, 1), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_abs_diff_eq!(f.sup_norm(), 2.1, epsilon = 1e-14);
    }

    #[test]
    fn aniso_at_origin_matches_direct_evaluation() {
        // (1/3)(3/2)(3/2 + (1 + 1)/2) = 1.25 at x = 0
        let f = CoefficientField::aniso_2d(0.025, 0.5, std::f64::consts::SQRT_2).unwrap();
        let m = f.eval(&[0.0, 0.0]);
        assert_abs_diff_eq!(m.get(0, 0), 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(m.get(1, 1), 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(m.get(0, 1), 0.625, epsilon = 1e-14);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn unknown_name_is_config_error() {
        let err = CoefficientField::builtin("mystery", 0.1, &no_params());
        assert!(matches!(err, Err(EfaError::Config(_))));
    }

    #[test]
    fn sup_norm_dominates_analytic_sup() {
        let f = CoefficientField::per_sin_1d(0.02);
        assert!(f.sup_norm() >= 2.1, "sup_norm {} < 2.1", f.sup_norm());
        assert!(f.sup_norm() <= 2.1 * 1.06);
    }

    #[test]
    fn sup_norm_dominates_dense_sampling_oracle() {
        let f = CoefficientField::aniso_2d(0.05, 0.5, std::f64::consts::SQRT_2).unwrap();
        // independent oracle: 1e6 raw samples of the max eigenvalue
        let n = 1000;
        let mut oracle = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let x = [i as f64 / n as f64, j as f64 / n as f64];
                let m = f.eval(&x);
                oracle = oracle.max(m.spectral_norm());
            }
        }
        assert!(f.sup_norm() >= oracle, "{} < {}", f.sup_norm(), oracle);
    }

    #[test]
    fn positivity_on_random_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for f in [
            CoefficientField::per_sin_1d(0.013),
            CoefficientField::loc_per_1d(0.013),
            CoefficientField::almost_per_1d(0.013, std::f64::consts::SQRT_2),
        ] {
            for _ in 0..500 {
                let x = rng.gen_range(-2.0..4.0);
                let v = f.eval_1d(x);
                assert!(v >= f.lower_bound() - 1e-12);
                assert!(v <= f.upper_bound() + 1e-12);
            }
        }
        let f = CoefficientField::iso_2d(0.05);
        let g = CoefficientField::aniso_2d(0.05, 0.5, 1.41).unwrap();
        for _ in 0..500 {
            let x = [rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0)];
            for field in [&f, &g] {
                let m = field.eval(&x);
                assert!(m.min_eigenvalue() >= field.lower_bound() - 1e-12);
                assert!(m.spectral_norm() <= field.upper_bound() + 1e-12);
            }
        }
    }

    #[test]
    fn evaluation_is_bit_deterministic() {
        let f = CoefficientField::aniso_2d(0.0317, 0.5, std::f64::consts::SQRT_2).unwrap();
        let x = [0.12345678901, -0.9876543];
        let a = f.eval(&x);
        let b = f.eval(&x);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(a.get(i, j).to_bits(), b.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn periodic_builtins_repeat_with_period_eps() {
        let eps = 0.01;
        let f = CoefficientField::per_sin_1d(eps);
        for k in [-3i64, 1, 7] {
            let a = f.eval_1d(0.0123);
            let b = f.eval_1d(0.0123 + eps * k as f64);
            assert_abs_diff_eq!(a, b, epsilon = 1e-11);
        }
        let g = CoefficientField::iso_2d(eps);
        let a = g.eval(&[0.003, 0.007]);
        let b = g.eval(&[0.003 + 2.0 * eps, 0.007 - eps]);
        assert_abs_diff_eq!(a.get(0, 0), b.get(0, 0), epsilon = 1e-11);
    }
}
