//! Error reports, slope regression and CSV emission.
//!
//! Every float is written as `{:.15e}` so identical runs produce
//! byte-identical files.

use crate::error::{EfaError, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Absolute errors below this are quadrature/roundoff noise and are dropped
/// before slope fitting.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Least-squares slope of `log(error)` against `log(eps)`.
pub fn fit_loglog_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(e, err)| e > 0.0 && err >= NOISE_FLOOR)
        .collect();
    if usable.len() < 3 {
        return Err(EfaError::Regression(format!(
            "only {} of {} points above the noise floor {NOISE_FLOOR:.0e}",
            usable.len(),
            pairs.len()
        )));
    }
    let n = usable.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (e, err) in &usable {
        let x = e.ln();
        let y = err.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-14 {
        return Err(EfaError::Regression("degenerate abscissae".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    if !slope.is_finite() {
        return Err(EfaError::Regression("non-finite slope".into()));
    }
    Ok(slope)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p: u32,
    pub q: u32,
    pub epsilon: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct SlopeFit {
    pub p: u32,
    pub q: u32,
    pub slope: Option<f64>,
}

/// Rows of `(eps, error)` per kernel pair plus fitted slopes.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub experiment: String,
    /// norm the error column is measured in
    pub norm: &'static str,
    pub rows: Vec<SweepRow>,
    pub slopes: Vec<SlopeFit>,
}

impl SweepReport {
    pub fn new(experiment: &str, norm: &'static str, rows: Vec<SweepRow>) -> SweepReport {
        let mut pairs: Vec<(u32, u32)> = rows.iter().map(|r| (r.p, r.q)).collect();
        pairs.dedup();
        pairs.sort_unstable();
        pairs.dedup();
        let slopes = pairs
            .into_iter()
            .map(|(p, q)| {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.p == p && r.q == q)
                    .map(|r| (r.epsilon, r.error))
                    .collect();
                SlopeFit { p, q, slope: fit_loglog_slope(&pts).ok() }
            })
            .collect();
        SweepReport { experiment: experiment.to_string(), norm, rows, slopes }
    }

    pub fn slope_for(&self, p: u32, q: u32) -> Option<f64> {
        self.slopes
            .iter()
            .find(|s| s.p == p && s.q == q)
            .and_then(|s| s.slope)
    }

    /// `epsilon,q,error` rows (the upscaling sweep format).
    pub fn errors_csv(&self) -> String {
        let mut out = String::from("epsilon,q,error\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:.15e},{},{:.15e}", r.epsilon, r.q, r.error);
        }
        out
    }

    /// `epsilon,p,q,error` rows (solution comparisons carry `p` too).
    pub fn errors_csv_with_p(&self) -> String {
        let mut out = String::from("epsilon,p,q,error\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:.15e},{},{},{:.15e}", r.epsilon, r.p, r.q, r.error);
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("experiment,p,q,slope\n");
        for s in &self.slopes {
            match s.slope {
                Some(v) => {
                    let _ = writeln!(out, "{},{},{},{:.15e}", self.experiment, s.p, s.q, v);
                }
                None => {
                    let _ = writeln!(out, "{},{},{},nan", self.experiment, s.p, s.q);
                }
            }
        }
        out
    }
}

/// 1D snapshot: `x,u` columns.
pub fn snapshot_csv_1d(h: f64, values: &[f64]) -> String {
    let mut out = String::from("x,u\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{:.15e},{:.15e}", i as f64 * h, v);
    }
    out
}

/// 2D snapshot: header line `# t=<time> nx=<N> ny=<N>`, then row-major
/// comma-separated rows.
pub fn snapshot_csv_2d(t: f64, nx: usize, ny: usize, values: &[f64]) -> String {
    assert_eq!(values.len(), nx * ny);
    let mut out = format!("# t={t:.12} nx={nx} ny={ny}\n");
    for i in 0..nx {
        let mut row = String::new();
        for j in 0..ny {
            if j > 0 {
                row.push(',');
            }
            let _ = write!(row, "{:.15e}", values[i * ny + j]);
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_laws_fit_exactly() {
        let pairs: Vec<(f64, f64)> = [0.02, 0.01, 0.005, 0.0025]
            .iter()
            .map(|&e: &f64| (e, e * e))
            .collect();
        assert_abs_diff_eq!(fit_loglog_slope(&pairs).unwrap(), 2.0, epsilon = 1e-12);
        let pairs7: Vec<(f64, f64)> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&e: &f64| (e, 3.0 * e.powi(7)))
            .collect();
        assert_abs_diff_eq!(fit_loglog_slope(&pairs7).unwrap(), 7.0, epsilon = 1e-10);
    }

    #[test]
    fn noise_floor_points_are_excluded() {
        let pairs = vec![(0.02, 1e-15), (0.01, 1e-15), (0.005, 1e-15), (0.0025, 1e-15)];
        assert!(matches!(
            fit_loglog_slope(&pairs),
            Err(EfaError::Regression(_))
        ));
        // mixed: only the three usable points enter
        let pairs = vec![(0.02, 1e-4), (0.01, 1.25e-5), (0.005, 1.5625e-6), (0.0025, 1e-15)];
        assert_abs_diff_eq!(fit_loglog_slope(&pairs).unwrap(), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn csv_shapes() {
        let rows = vec![
            SweepRow { p: 3, q: 3, epsilon: 0.02, error: 1e-3 },
            SweepRow { p: 3, q: 3, epsilon: 0.01, error: 1e-4 },
        ];
        let rep = SweepReport::new("upscaling", "abs", rows);
        let csv = rep.errors_csv();
        assert!(csv.starts_with("epsilon,q,error\n"));
        assert_eq!(csv.lines().count(), 3);
        let s2 = snapshot_csv_2d(0.5, 2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(s2.starts_with("# t=0.500000000000 nx=2 ny=3\n"));
        assert_eq!(s2.lines().count(), 3);
    }
}
