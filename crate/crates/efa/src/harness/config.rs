//! Line-based `key = value` config files with `[section]` headers.
//!
//! ```text
//! # upscaling error sweep
//! [experiment]
//! kind = upscaling
//! epsilons = 0.02, 0.0125, 0.008, 0.005, 0.003125
//! eta = 0.1
//!
//! [coefficient]
//! name = per1d_sin
//!
//! [kernel]
//! pairs = (5,1), (3,3), (5,5)
//! ```
//!
//! Unknown keys are rejected nowhere (forward compatibility); missing
//! required keys name the section and key.

use crate::coefficient::Params;
use crate::error::{EfaError, Result};
use crate::macroscale::Bc;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::from("global");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    EfaError::Config(format!("line {}: unterminated section header", lineno + 1))
                })?;
                current = name.trim().to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                EfaError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RawConfig { sections })
    }

    pub fn from_file(path: &Path) -> Result<RawConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| {
            EfaError::Config(format!("missing `{key}` in section [{section}]"))
        })
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| EfaError::Config(format!("[{section}] {key}: bad number `{s}`"))),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str) -> Result<Option<usize>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| EfaError::Config(format!("[{section}] {key}: bad integer `{s}`"))),
        }
    }

    pub fn get_bool(&self, section: &str, key: &str) -> Result<Option<bool>> {
        match self.get(section, key) {
            None => Ok(None),
            Some("true") | Some("yes") | Some("1") => Ok(Some(true)),
            Some("false") | Some("no") | Some("0") => Ok(Some(false)),
            Some(s) => Err(EfaError::Config(format!("[{section}] {key}: bad bool `{s}`"))),
        }
    }

    pub fn get_f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(s) => {
                let mut out = Vec::new();
                for part in s.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    // allow fractions like 1/320
                    let v = if let Some((num, den)) = part.split_once('/') {
                        let n: f64 = num.trim().parse().map_err(|_| {
                            EfaError::Config(format!("[{section}] {key}: bad number `{part}`"))
                        })?;
                        let d: f64 = den.trim().parse().map_err(|_| {
                            EfaError::Config(format!("[{section}] {key}: bad number `{part}`"))
                        })?;
                        n / d
                    } else {
                        part.parse().map_err(|_| {
                            EfaError::Config(format!("[{section}] {key}: bad number `{part}`"))
                        })?
                    };
                    out.push(v);
                }
                Ok(Some(out))
            }
        }
    }

    /// `(p, q)` pair lists like `(5,1), (3,3)`.
    pub fn get_pairs(&self, section: &str, key: &str) -> Result<Option<Vec<(u32, u32)>>> {
        let Some(s) = self.get(section, key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for chunk in s.split(')') {
            let chunk = chunk.trim().trim_start_matches(',').trim();
            if chunk.is_empty() {
                continue;
            }
            let inner = chunk.strip_prefix('(').ok_or_else(|| {
                EfaError::Config(format!("[{section}] {key}: expected `(p,q)` pairs, got `{s}`"))
            })?;
            let (p, q) = inner.split_once(',').ok_or_else(|| {
                EfaError::Config(format!("[{section}] {key}: expected `(p,q)` pairs, got `{s}`"))
            })?;
            let p: u32 = p.trim().parse().map_err(|_| {
                EfaError::Config(format!("[{section}] {key}: bad p in `{chunk})`"))
            })?;
            let q: u32 = q.trim().parse().map_err(|_| {
                EfaError::Config(format!("[{section}] {key}: bad q in `{chunk})`"))
            })?;
            out.push((p, q));
        }
        Ok(Some(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Upscaling,
    Solution1d,
    Solution2d,
}

/// Fully validated experiment description. All runs are seed-free and
/// deterministic: a config maps to byte-identical outputs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub coefficient: String,
    pub coefficient_params: Params,
    pub epsilons: Vec<f64>,
    pub eta: f64,
    pub tau: f64,
    pub kernel_pairs: Vec<(u32, u32)>,
    pub length: f64,
    pub cells: usize,
    pub dt: Option<f64>,
    pub bc: Bc,
    pub t_final: f64,
    pub fit_halfwidth: usize,
    pub points_per_eps: usize,
    pub out_dir: Option<PathBuf>,
    pub snapshot_times: Vec<f64>,
    /// run a resolved simulation and compare against its local average at
    /// this scale parameter
    pub dns_epsilon: Option<f64>,
    pub dns_pair: (u32, u32),
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<ExperimentConfig> {
        let kind = match raw.require("experiment", "kind")? {
            "upscaling" => ExperimentKind::Upscaling,
            "solution1d" => ExperimentKind::Solution1d,
            "solution2d" => ExperimentKind::Solution2d,
            other => {
                return Err(EfaError::Config(format!(
                    "unknown experiment kind `{other}` (expected upscaling | solution1d | solution2d)"
                )))
            }
        };
        let coefficient = raw
            .get("coefficient", "name")
            .unwrap_or(match kind {
                ExperimentKind::Upscaling => "per1d_sin",
                ExperimentKind::Solution1d => "locper1d",
                ExperimentKind::Solution2d => "aniso2d",
            })
            .to_string();
        let mut coefficient_params = Params::new();
        for key in ["c", "sqrt2", "dim"] {
            if let Some(v) = raw.get_f64("coefficient", key)? {
                coefficient_params.insert(key.to_string(), v);
            }
        }
        let epsilons = raw
            .get_f64_list("experiment", "epsilons")?
            .ok_or_else(|| EfaError::Config("missing `epsilons` in [experiment]".into()))?;
        if epsilons.is_empty() || epsilons.iter().any(|&e| e <= 0.0) {
            return Err(EfaError::Config("epsilons must be positive".into()));
        }
        let eta = raw.get_f64("experiment", "eta")?.unwrap_or(0.1);
        let tau = raw.get_f64("experiment", "tau")?.unwrap_or(eta);
        if epsilons.iter().any(|&e| e > eta) {
            return Err(EfaError::Config(
                "every swept epsilon must satisfy eps <= eta".into(),
            ));
        }
        let kernel_pairs = raw
            .get_pairs("kernel", "pairs")?
            .unwrap_or_else(|| vec![(3, 3)]);
        if kernel_pairs.is_empty() {
            return Err(EfaError::Config("kernel pair list is empty".into()));
        }
        let dim = if kind == ExperimentKind::Solution2d {
            2
        } else {
            match coefficient.as_str() {
                "iso2d" | "aniso2d" => 2,
                _ => 1,
            }
        };
        let length = raw.get_f64("macro", "L")?.unwrap_or(if dim == 2 { 1.0 } else { 3.0 });
        let cells = raw.get_usize("macro", "cells")?.unwrap_or(50);
        let dt = raw.get_f64("macro", "dt")?;
        let bc = match raw.get("macro", "bc").unwrap_or("periodic") {
            "periodic" => Bc::Periodic,
            "dirichlet" => Bc::DirichletZero,
            other => return Err(EfaError::Config(format!("unknown bc `{other}`"))),
        };
        let t_final = raw.get_f64("experiment", "T")?.unwrap_or(1.0);
        let fit_halfwidth = raw.get_usize("macro", "fit_halfwidth")?.unwrap_or(1);
        let points_per_eps = raw.get_usize("micro", "points_per_eps")?.unwrap_or(20);
        let out_dir = raw.get("output", "dir").map(PathBuf::from);
        let snapshot_times = raw.get_f64_list("output", "snapshots")?.unwrap_or_default();
        let dns_epsilon = raw.get_f64("experiment", "dns_epsilon")?;
        let dns_pair = raw
            .get_pairs("experiment", "dns_pair")?
            .and_then(|v| v.first().copied())
            .unwrap_or((3, 5));
        Ok(ExperimentConfig {
            kind,
            coefficient,
            coefficient_params,
            epsilons,
            eta,
            tau,
            kernel_pairs,
            length,
            cells,
            dt,
            bc,
            t_final,
            fit_halfwidth,
            points_per_eps,
            out_dir,
            snapshot_times,
            dns_epsilon,
            dns_pair,
        })
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        Self::from_raw(&RawConfig::from_file(path)?)
    }

    pub fn dim(&self) -> usize {
        match self.coefficient.as_str() {
            "iso2d" | "aniso2d" => 2,
            "constant" => self
                .coefficient_params
                .get("dim")
                .map(|v| *v as usize)
                .unwrap_or(1),
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_fractions() {
        let text = "\
# a comment
[experiment]
kind = upscaling
epsilons = 1/50, 1/80, 0.008   # inline comment
eta = 0.1

[kernel]
pairs = (5,1), (3,3)
";
        let raw = RawConfig::parse(text).unwrap();
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Upscaling);
        assert_eq!(cfg.epsilons.len(), 3);
        assert!((cfg.epsilons[0] - 0.02).abs() < 1e-15);
        assert_eq!(cfg.kernel_pairs, vec![(5, 1), (3, 3)]);
        assert_eq!(cfg.tau, cfg.eta);
    }

    #[test]
    fn rejects_eps_above_eta() {
        let text = "[experiment]\nkind = upscaling\nepsilons = 0.2\neta = 0.1\n";
        let raw = RawConfig::parse(text).unwrap();
        assert!(ExperimentConfig::from_raw(&raw).is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(RawConfig::parse("[oops\n").is_err());
        assert!(RawConfig::parse("just words\n").is_err());
    }
}
