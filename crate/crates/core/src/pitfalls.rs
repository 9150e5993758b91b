//! One-dimensional BO failure demos on a fixed toy target. See
//! [`assert_pitfalls`] for the checked orderings.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::acquisition::{expected_improvement, prob_improvement, ucb};
use crate::error::{Error, Result};
use crate::gp::{gp_fit, GpConfig, KernelConfig, PosteriorState};

pub const TRAIN_X: [f64; 6] = [0.06, 0.12, 0.18, 0.24, 0.30, 0.35];
pub const GRID_POINTS: usize = 401;
pub const NOISE: f64 = 1e-4;
pub const PROBE_X: f64 = 0.85;
pub const SWEEP_SIGMAS: [f64; 2] = [0.1, 1.0];
pub const SWEEP_LENGTHSCALES: [f64; 3] = [0.05, 5.0, 50.0];
/// Upper edge of the restricted search domain.
pub const RESTRICTED_MAX: f64 = 0.4;
pub const SEARCH_ITERATIONS: usize = 10;

/// Two bumps: a half-height one at 0.2 and the global maximum at 0.85.
pub fn target_function_1d(x: f64) -> f64 {
    0.5 * (-0.5 * ((x - 0.2) / 0.08).powi(2)).exp() + (-0.5 * ((x - 0.85) / 0.05).powi(2)).exp()
}

#[derive(Debug, Clone)]
pub struct Demo1DProblem {
    pub train_x: Vec<f64>,
    pub train_y: Vec<f64>,
    pub grid: Vec<f64>,
}

impl Default for Demo1DProblem {
    fn default() -> Self {
        Demo1DProblem::new(&TRAIN_X, GRID_POINTS)
    }
}

impl Demo1DProblem {
    pub fn new(train_x: &[f64], grid_points: usize) -> Self {
        assert!(grid_points >= 2);
        Demo1DProblem {
            train_x: train_x.to_vec(),
            train_y: train_x.iter().map(|&x| target_function_1d(x)).collect(),
            grid: (0..grid_points).map(|i| i as f64 / (grid_points - 1) as f64).collect(),
        }
    }

    pub fn y_best(&self) -> f64 {
        self.train_y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gp_config(sigma: f64, ell: f64, noise: f64) -> GpConfig {
        GpConfig {
            kernel: KernelConfig::rbf(sigma, ell),
            noise_variance: noise,
            prior_mean: 0.0,
        }
    }

    pub fn fit(&self, sigma: f64, ell: f64, noise: f64) -> Result<PosteriorState<f64>> {
        gp_fit(&self.train_x, &self.train_y, &Self::gp_config(sigma, ell, noise))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub mean: f64,
    pub std: f64,
    pub pi: f64,
    pub ei: f64,
    pub ucb: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub sigma: f64,
    pub lengthscale: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn file_name(&self) -> String {
        format!("sweep_sigma{}_ell{}.csv", self.sigma, self.lengthscale)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,mean,std,pi,ei,ucb\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{},{}", r.x, r.mean, r.std, r.pi, r.ei, r.ucb).unwrap();
        }
        out
    }

    /// Row nearest to `x`.
    pub fn at(&self, x: f64) -> &SweepRow {
        self.rows
            .iter()
            .min_by(|a, b| (a.x - x).abs().total_cmp(&(b.x - x).abs()))
            .expect("sweep has rows")
    }

    /// Grid point with the largest value of `f`, first one on ties.
    pub fn argmax(&self, f: impl Fn(&SweepRow) -> f64) -> &SweepRow {
        let mut best = &self.rows[0];
        for r in &self.rows[1..] {
            if f(r) > f(best) {
                best = r;
            }
        }
        best
    }
}

/// Posterior and acquisitions on the grid for one (σ, ℓ) pair. UCB uses
/// β = 1 and PI/EI use the best training label.
pub fn sweep_pair(problem: &Demo1DProblem, sigma: f64, ell: f64, noise: f64) -> Result<SweepTable> {
    let post = problem.fit(sigma, ell, noise)?;
    let y_best = problem.y_best();
    let rows = problem
        .grid
        .iter()
        .map(|&x| {
            let (mean, var) = post.predict(&x)?;
            let std = var.sqrt();
            Ok(SweepRow {
                x,
                mean,
                std,
                pi: prob_improvement(mean, std, y_best),
                ei: expected_improvement(mean, std, y_best),
                ucb: ucb(mean, std, 1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        sigma,
        lengthscale: ell,
        rows,
    })
}

pub fn sweep(problem: &Demo1DProblem, sigmas: &[f64], lengthscales: &[f64]) -> Result<Vec<SweepTable>> {
    let mut out = Vec::new();
    for &s in sigmas {
        for &l in lengthscales {
            out.push(sweep_pair(problem, s, l, NOISE)?);
        }
    }
    Ok(out)
}

pub fn write_sweeps(tables: &[SweepTable], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    tables
        .iter()
        .map(|t| {
            let path = dir.join(t.file_name());
            std::fs::write(&path, t.to_csv()).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Sequential EI search restricted to grid points with `x <= domain_max`.
/// Returns the best true value found and the points chosen.
pub fn sequential_search(problem: &Demo1DProblem, sigma: f64, ell: f64, domain_max: f64, iterations: usize) -> Result<(f64, Vec<f64>)> {
    let mut xs = problem.train_x.clone();
    let mut ys = problem.train_y.clone();
    let mut picks = Vec::new();
    let cfg = Demo1DProblem::gp_config(sigma, ell, NOISE);
    for _ in 0..iterations {
        let post = gp_fit(&xs, &ys, &cfg)?;
        let y_best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut best: Option<(f64, f64)> = None;
        for &x in problem.grid.iter().filter(|&&x| x <= domain_max) {
            if xs.contains(&x) {
                continue;
            }
            let (m, v) = post.predict(&x)?;
            let a = expected_improvement(m, v.sqrt(), y_best);
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((x, a));
            }
        }
        let Some((x, _)) = best else { break };
        picks.push(x);
        xs.push(x);
        ys.push(target_function_1d(x));
    }
    let found = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((found, picks))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} {}", self.name, self.details)
    }
}

/// Evaluate the pitfall orderings on `problem`.
pub fn assert_pitfalls(problem: &Demo1DProblem) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();

    let narrow = sweep_pair(problem, 0.1, 0.05, NOISE)?;
    let wide = sweep_pair(problem, 1.0, 0.05, NOISE)?;
    let (pi_narrow, pi_wide) = (narrow.at(PROBE_X).pi, wide.at(PROBE_X).pi);
    checks.push(CheckResult {
        name: "prior_width",
        passed: pi_narrow < pi_wide,
        details: format!("PI(x={PROBE_X}) sigma=0.1: {pi_narrow:.3e} < sigma=1.0: {pi_wide:.3e}"),
    });

    let narrow_argmax = narrow.argmax(|r| r.pi).x;
    let cluster_lo = problem.train_x.iter().copied().fold(f64::INFINITY, f64::min);
    let cluster_hi = problem.train_x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dist = if narrow_argmax < cluster_lo {
        cluster_lo - narrow_argmax
    } else {
        (narrow_argmax - cluster_hi).max(0.0)
    };
    checks.push(CheckResult {
        name: "prior_width_argmax",
        passed: dist <= 0.1,
        details: format!("sigma=0.1 PI argmax x={narrow_argmax:.4} lies {dist:.4} from the training cluster"),
    });

    let std_short = wide.at(PROBE_X).std;
    for ell in [5.0, 50.0] {
        let long = sweep_pair(problem, 1.0, ell, NOISE)?;
        let std_long = long.at(PROBE_X).std;
        checks.push(CheckResult {
            name: if ell == 5.0 { "over_smoothing_ell5" } else { "over_smoothing_ell50" },
            passed: std_long < std_short,
            details: format!("std(x={PROBE_X}) ell={ell}: {std_long:.4e} < ell=0.05: {std_short:.4e}"),
        });
    }

    let (full, full_picks) = sequential_search(problem, 1.0, 0.05, 1.0, SEARCH_ITERATIONS)?;
    let (restricted, _) = sequential_search(problem, 1.0, 0.05, RESTRICTED_MAX, SEARCH_ITERATIONS)?;
    let pi_argmax = wide.argmax(|r| r.pi).x;
    checks.push(CheckResult {
        name: "search_domain",
        passed: restricted < full,
        details: format!(
            "{SEARCH_ITERATIONS} EI steps (sigma=1.0, ell=0.05): best g over [0,{RESTRICTED_MAX}] {restricted:.4} < full grid {full:.4} (full picks {}); one-shot full-grid PI argmax x={pi_argmax:.4}",
            full_picks.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",")
        ),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_values() {
        assert!((target_function_1d(0.85) - 1.0).abs() < 1e-6);
        assert!((target_function_1d(0.2) - 0.5).abs() < 1e-6);
        let p = Demo1DProblem::default();
        let argmax = p
            .grid
            .iter()
            .copied()
            .max_by(|a, b| target_function_1d(*a).total_cmp(&target_function_1d(*b)))
            .unwrap();
        assert!((argmax - 0.85).abs() <= 1.0 / 400.0 + 1e-12);
    }

    #[test]
    fn problem_invariants() {
        let p = Demo1DProblem::default();
        assert!(p.train_x.iter().all(|x| (0.05..=0.35).contains(x)));
        assert_eq!(p.grid.len(), 401);
    }

    #[test]
    fn sweep_shape_and_ranges() {
        let p = Demo1DProblem::default();
        let tables = sweep(&p, &SWEEP_SIGMAS, &SWEEP_LENGTHSCALES).unwrap();
        assert_eq!(tables.len(), 6);
        for t in &tables {
            assert_eq!(t.rows.len(), 401);
            for r in &t.rows {
                assert!((0.0..=1.0).contains(&r.pi));
                assert!(r.ei.is_finite() && r.ucb.is_finite() && r.std >= 0.0);
            }
            assert_eq!(t.to_csv().lines().count(), 402);
        }
        assert_eq!(tables[0].file_name(), "sweep_sigma0.1_ell0.05.csv");
        assert_eq!(tables[5].file_name(), "sweep_sigma1_ell50.csv");
    }

    #[test]
    fn all_checks_pass() {
        for c in assert_pitfalls(&Demo1DProblem::default()).unwrap() {
            assert!(c.passed, "{c}");
        }
    }
}
