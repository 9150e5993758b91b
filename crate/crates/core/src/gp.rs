//! Exact Gaussian process regression.
//!
//! Kernels are chosen per input type through [`KernelInput`]: real vectors
//! use the RBF kernel, fingerprints use the Tanimoto kernel. Fitting is a
//! dense Cholesky factorization of `K + jitter·I`; the jitter starts at
//! `max(noise_variance, 1e-8)` and doubles on failure up to `1e-2`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chem::{Fingerprint, FingerprintMode};
use crate::error::{Error, Result};

pub const MIN_JITTER: f64 = 1e-8;
pub const MAX_JITTER: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    Rbf { lengthscale: f64 },
    Tanimoto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub kind: KernelKind,
    /// Prior standard deviation σ; `k(x, x) = σ²`.
    pub amplitude: f64,
}

impl KernelConfig {
    pub fn rbf(amplitude: f64, lengthscale: f64) -> Self {
        KernelConfig {
            kind: KernelKind::Rbf { lengthscale },
            amplitude,
        }
    }

    pub fn tanimoto(amplitude: f64) -> Self {
        KernelConfig {
            kind: KernelKind::Tanimoto,
            amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::input(format!("kernel amplitude must be positive, got {}", self.amplitude)));
        }
        if let KernelKind::Rbf { lengthscale } = self.kind {
            if !(lengthscale > 0.0 && lengthscale.is_finite()) {
                return Err(Error::input(format!("lengthscale must be positive, got {lengthscale}")));
            }
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

/// σ²·exp(−‖x−x′‖²/(2ℓ²)).
pub fn rbf_kernel(x: &[f64], y: &[f64], cfg: &KernelConfig) -> Result<f64> {
    let KernelKind::Rbf { lengthscale } = cfg.kind else {
        return Err(Error::input("rbf_kernel called with a non-RBF kernel config"));
    };
    if x.len() != y.len() {
        return Err(Error::input(format!("dimension mismatch: {} vs {}", x.len(), y.len())));
    }
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(cfg.variance() * (-sq / (2.0 * lengthscale * lengthscale)).exp())
}

/// σ²·T(a, b), with T the Jaccard (binary) or min/max (count) coefficient.
pub fn tanimoto_kernel(a: &Fingerprint, b: &Fingerprint, cfg: &KernelConfig) -> Result<f64> {
    if cfg.kind != KernelKind::Tanimoto {
        return Err(Error::input("tanimoto_kernel called with a non-Tanimoto kernel config"));
    }
    if a.mode() != b.mode() {
        return Err(Error::input("fingerprint modes differ"));
    }
    Ok(cfg.variance() * a.tanimoto_unchecked(b))
}

/// Types that can be fed to a GP kernel.
pub trait KernelInput {
    fn kernel(&self, other: &Self, cfg: &KernelConfig) -> Result<f64>;
}

impl KernelInput for Vec<f64> {
    fn kernel(&self, other: &Self, cfg: &KernelConfig) -> Result<f64> {
        rbf_kernel(self, other, cfg)
    }
}

impl KernelInput for f64 {
    fn kernel(&self, other: &Self, cfg: &KernelConfig) -> Result<f64> {
        rbf_kernel(std::slice::from_ref(self), std::slice::from_ref(other), cfg)
    }
}

impl KernelInput for Fingerprint {
    fn kernel(&self, other: &Self, cfg: &KernelConfig) -> Result<f64> {
        tanimoto_kernel(self, other, cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub kernel: KernelConfig,
    pub noise_variance: f64,
    /// Constant prior mean function.
    pub prior_mean: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            kernel: KernelConfig::tanimoto(1.0),
            noise_variance: 1e-4,
            prior_mean: 0.0,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::input(format!("noise variance must be >= 0, got {}", self.noise_variance)));
        }
        if !self.prior_mean.is_finite() {
            return Err(Error::input("prior mean must be finite"));
        }
        Ok(())
    }
}

pub fn gram_matrix<X: KernelInput>(inputs: &[X], cfg: &KernelConfig) -> Result<DMatrix<f64>> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = inputs[i].kernel(&inputs[j], cfg)?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// A fitted GP posterior. Immutable once built.
#[derive(Debug, Clone)]
pub struct PosteriorState<X> {
    config: GpConfig,
    train_inputs: Vec<X>,
    train_labels: Vec<f64>,
    /// Lower Cholesky factor of `K + jitter·I`.
    chol: DMatrix<f64>,
    /// `(K + jitter·I)⁻¹ (y − prior_mean)`.
    solve_vec: DVector<f64>,
    jitter: f64,
}

/// Fit the GP posterior to `(inputs, labels)`.
pub fn gp_fit<X: KernelInput + Clone>(inputs: &[X], labels: &[f64], cfg: &GpConfig) -> Result<PosteriorState<X>> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(Error::input("gp_fit needs at least one training point"));
    }
    if inputs.len() != labels.len() {
        return Err(Error::input(format!("{} inputs but {} labels", inputs.len(), labels.len())));
    }
    if let Some(bad) = labels.iter().find(|y| !y.is_finite()) {
        return Err(Error::input(format!("non-finite label {bad}")));
    }
    let n = inputs.len();
    let gram = gram_matrix(inputs, &cfg.kernel)?;
    let mut jitter = cfg.noise_variance.max(MIN_JITTER);
    let chol = loop {
        let mut m = gram.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(c) = m.cholesky() {
            break c;
        }
        if jitter * 2.0 > MAX_JITTER {
            return Err(Error::Numerical {
                context: format!("gp_fit on {n} points"),
                jitter,
            });
        }
        jitter *= 2.0;
    };
    let residual = DVector::from_iterator(n, labels.iter().map(|y| y - cfg.prior_mean));
    let solve_vec = chol.solve(&residual);
    Ok(PosteriorState {
        config: *cfg,
        train_inputs: inputs.to_vec(),
        train_labels: labels.to_vec(),
        chol: chol.unpack(),
        solve_vec,
        jitter,
    })
}

impl<X: KernelInput> PosteriorState<X> {
    pub fn config(&self) -> &GpConfig {
        &self.config
    }

    pub fn train_inputs(&self) -> &[X] {
        &self.train_inputs
    }

    pub fn train_labels(&self) -> &[f64] {
        &self.train_labels
    }

    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn solve_vec(&self) -> &DVector<f64> {
        &self.solve_vec
    }

    /// Diagonal term actually added during factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.train_inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_inputs.is_empty()
    }

    fn cross_kernel(&self, query: &X) -> Result<DVector<f64>> {
        let k = self
            .train_inputs
            .iter()
            .map(|x| query.kernel(x, &self.config.kernel))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(k))
    }

    pub fn predict_mean(&self, query: &X) -> Result<f64> {
        let k = self.cross_kernel(query)?;
        Ok(self.config.prior_mean + k.dot(&self.solve_vec))
    }

    /// Posterior mean and (latent, noise-free) variance at `query`.
    pub fn predict(&self, query: &X) -> Result<(f64, f64)> {
        let k = self.cross_kernel(query)?;
        let mean = self.config.prior_mean + k.dot(&self.solve_vec);
        let v = self
            .chol
            .solve_lower_triangular(&k)
            .expect("Cholesky factor has a nonzero diagonal");
        let prior = query.kernel(query, &self.config.kernel)?;
        Ok((mean, (prior - v.norm_squared()).max(0.0)))
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.len() as f64;
        let residual = DVector::from_iterator(
            self.len(),
            self.train_labels.iter().map(|y| y - self.config.prior_mean),
        );
        let fit = -0.5 * residual.dot(&self.solve_vec);
        let log_det_half: f64 = self.chol.diagonal().iter().map(|d| d.ln()).sum();
        fit - log_det_half - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Score of one grid entry; `None` when it failed to factorize.
pub type GridScores = Vec<Option<f64>>;

/// Pick the grid configuration with the highest log marginal likelihood;
/// ties go to the earliest entry.
pub fn fit_hypers_grid<X: KernelInput + Clone>(
    inputs: &[X],
    labels: &[f64],
    grid: &[GpConfig],
) -> Result<(GpConfig, GridScores)> {
    if grid.is_empty() {
        return Err(Error::input("empty hyperparameter grid"));
    }
    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, cfg) in grid.iter().enumerate() {
        let score = match gp_fit(inputs, labels, cfg) {
            Ok(state) => Some(state.log_marginal_likelihood()),
            Err(Error::Numerical { .. }) => None,
            Err(e) => return Err(e),
        };
        if let Some(s) = score {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        scores.push(score);
    }
    match best {
        Some((i, _)) => Ok((grid[i], scores)),
        None => Err(Error::Numerical {
            context: "every hyperparameter grid entry".into(),
            jitter: MAX_JITTER,
        }),
    }
}

/// Log-spaced amplitude grid crossed with the given noise levels.
pub fn log_amplitude_grid(base: KernelConfig, log10_low: f64, log10_high: f64, steps: usize, noises: &[f64]) -> Vec<GpConfig> {
    let mut grid = Vec::new();
    for s in 0..steps {
        let t = if steps == 1 { 0.0 } else { s as f64 / (steps - 1) as f64 };
        let amplitude = 10f64.powf(log10_low + t * (log10_high - log10_low));
        for &noise in noises {
            grid.push(GpConfig {
                kernel: KernelConfig { amplitude, ..base },
                noise_variance: noise,
                prior_mean: 0.0,
            });
        }
    }
    grid
}

/// Default fingerprint representation for GP features.
pub const DEFAULT_FP_MODE: FingerprintMode = FingerprintMode::Count;
