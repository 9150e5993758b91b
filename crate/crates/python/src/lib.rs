//! Python bindings for `molbo`.

use molbo::chem::{morgan_fingerprint, parse_smiles, FingerprintMode};
use molbo::config::RunConfigFile;
use molbo::ga::{GaConfig, ScoredPool};
use molbo::gp::{gp_fit, GpConfig, KernelConfig, PosteriorState};
use molbo::objectives::{auc_topk_scores, default_objectives, RunHistory};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: molbo::Error) -> PyErr {
    match e {
        molbo::Error::Numerical { .. } | molbo::Error::Io { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse(smiles: &str) -> PyResult<molbo::chem::Molecule> {
    parse_smiles(smiles).map_err(|e| PyValueError::new_err(format!("{smiles:?}: {e}")))
}

/// A parsed molecule.
#[pyclass(frozen, module = "molbo_py")]
struct Molecule {
    inner: molbo::chem::Molecule,
}

#[pymethods]
impl Molecule {
    #[new]
    fn new(smiles: &str) -> PyResult<Self> {
        Ok(Molecule { inner: parse(smiles)? })
    }

    fn smiles(&self) -> String {
        self.inner.to_smiles()
    }

    fn canonical_key(&self) -> String {
        self.inner.canonical_key()
    }

    fn formula(&self) -> String {
        self.inner.formula_string()
    }

    fn heavy_atom_count(&self) -> usize {
        self.inner.heavy_atom_count()
    }

    #[pyo3(signature = (radius = 2, mode = "count"))]
    fn fingerprint(&self, radius: u32, mode: &str) -> PyResult<Fingerprint> {
        fingerprint_of(&self.inner, radius, mode)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner.canonical_key() == other.inner.canonical_key()
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.inner.canonical_key().hash(&mut h);
        h.finish()
    }

    fn __repr__(&self) -> String {
        format!("Molecule({:?})", self.inner.to_smiles())
    }
}

fn fingerprint_of(mol: &molbo::chem::Molecule, radius: u32, mode: &str) -> PyResult<Fingerprint> {
    if radius > 8 {
        return Err(PyValueError::new_err(format!("radius {radius} exceeds 8")));
    }
    let mode: FingerprintMode = mode.parse().map_err(py_err)?;
    Ok(Fingerprint {
        inner: morgan_fingerprint(mol, radius, mode),
    })
}

/// Sparse Morgan fingerprint.
#[pyclass(frozen, from_py_object, module = "molbo_py")]
#[derive(Clone)]
struct Fingerprint {
    inner: molbo::chem::Fingerprint,
}

#[pymethods]
impl Fingerprint {
    /// `(identifier, count)` pairs sorted by identifier.
    fn entries(&self) -> Vec<(u64, u32)> {
        self.inner.entries().to_vec()
    }

    fn to_binary(&self) -> Fingerprint {
        Fingerprint {
            inner: self.inner.to_binary(),
        }
    }

    fn tanimoto(&self, other: &Fingerprint) -> PyResult<f64> {
        molbo::chem::tanimoto(&self.inner, &other.inner).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.entries().len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Fingerprint({:?}, radius={}, {} entries)",
            self.inner.mode(),
            self.inner.radius(),
            self.inner.entries().len()
        )
    }
}

/// Morgan fingerprint of a SMILES string.
#[pyfunction]
#[pyo3(signature = (smiles, radius = 2, mode = "count"))]
fn fingerprint(smiles: &str, radius: u32, mode: &str) -> PyResult<Fingerprint> {
    fingerprint_of(&parse(smiles)?, radius, mode)
}

/// Tanimoto similarity of two SMILES strings' fingerprints.
#[pyfunction]
#[pyo3(signature = (a, b, radius = 2, mode = "count"))]
fn tanimoto(a: &str, b: &str, radius: u32, mode: &str) -> PyResult<f64> {
    fingerprint(a, radius, mode)?.tanimoto(&fingerprint(b, radius, mode)?)
}

enum Posterior {
    Vector(PosteriorState<Vec<f64>>),
    Fingerprint(PosteriorState<molbo::chem::Fingerprint>),
}

/// Exact GP posterior. Use `fit_vectors` (RBF kernel) or
/// `fit_fingerprints` (Tanimoto kernel).
#[pyclass(frozen, module = "molbo_py")]
struct GaussianProcess {
    posterior: Posterior,
}

#[pymethods]
impl GaussianProcess {
    #[staticmethod]
    #[pyo3(signature = (inputs, labels, amplitude = 1.0, lengthscale = 1.0, noise_variance = 1e-4, prior_mean = 0.0))]
    fn fit_vectors(
        inputs: Vec<Vec<f64>>,
        labels: Vec<f64>,
        amplitude: f64,
        lengthscale: f64,
        noise_variance: f64,
        prior_mean: f64,
    ) -> PyResult<Self> {
        let cfg = GpConfig {
            kernel: KernelConfig::rbf(amplitude, lengthscale),
            noise_variance,
            prior_mean,
        };
        let post = gp_fit(&inputs, &labels, &cfg).map_err(py_err)?;
        Ok(GaussianProcess {
            posterior: Posterior::Vector(post),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (inputs, labels, amplitude = 1.0, noise_variance = 1e-4, prior_mean = 0.0))]
    fn fit_fingerprints(
        inputs: Vec<Fingerprint>,
        labels: Vec<f64>,
        amplitude: f64,
        noise_variance: f64,
        prior_mean: f64,
    ) -> PyResult<Self> {
        let cfg = GpConfig {
            kernel: KernelConfig::tanimoto(amplitude),
            noise_variance,
            prior_mean,
        };
        let xs: Vec<_> = inputs.into_iter().map(|f| f.inner).collect();
        let post = gp_fit(&xs, &labels, &cfg).map_err(py_err)?;
        Ok(GaussianProcess {
            posterior: Posterior::Fingerprint(post),
        })
    }

    /// Posterior `(mean, variance)` at a vector or fingerprint.
    fn predict(&self, query: &Bound<'_, PyAny>) -> PyResult<(f64, f64)> {
        match &self.posterior {
            Posterior::Vector(p) => p.predict(&query.extract::<Vec<f64>>()?).map_err(py_err),
            Posterior::Fingerprint(p) => {
                let fp = query.cast::<Fingerprint>()?.get().inner.clone();
                p.predict(&fp).map_err(py_err)
            }
        }
    }

    fn log_marginal_likelihood(&self) -> f64 {
        match &self.posterior {
            Posterior::Vector(p) => p.log_marginal_likelihood(),
            Posterior::Fingerprint(p) => p.log_marginal_likelihood(),
        }
    }

    fn jitter(&self) -> f64 {
        match &self.posterior {
            Posterior::Vector(p) => p.jitter(),
            Posterior::Fingerprint(p) => p.jitter(),
        }
    }
}

#[pyfunction]
fn prob_improvement(mean: f64, std: f64, y_best: f64) -> f64 {
    molbo::acquisition::prob_improvement(mean, std, y_best)
}

#[pyfunction]
fn expected_improvement(mean: f64, std: f64, y_best: f64) -> f64 {
    molbo::acquisition::expected_improvement(mean, std, y_best)
}

#[pyfunction]
fn ucb(mean: f64, std: f64, beta: f64) -> f64 {
    molbo::acquisition::ucb(mean, std, beta)
}

/// Maximize `score(smiles) -> float` with the graph GA starting from
/// `seeds`. Returns every scored `(smiles, score)`, best first.
#[pyfunction]
#[pyo3(signature = (score, seeds, population_size = 100, offspring_size = 200, generations = 5, mutation_rate = 0.5, max_heavy_atoms = 100, rng_seed = 0))]
#[allow(clippy::too_many_arguments)]
fn ga_maximize(
    score: &Bound<'_, PyAny>,
    seeds: Vec<String>,
    population_size: usize,
    offspring_size: usize,
    generations: usize,
    mutation_rate: f64,
    max_heavy_atoms: usize,
    rng_seed: u64,
) -> PyResult<Vec<(String, f64)>> {
    let cfg = GaConfig {
        population_size,
        offspring_size,
        generations,
        mutation_rate,
        max_heavy_atoms,
        rng_seed,
    };
    let mut failure: Option<PyErr> = None;
    let mut call = |m: &molbo::chem::Molecule| -> f64 {
        if failure.is_some() {
            return f64::NEG_INFINITY;
        }
        match score.call1((m.to_smiles(),)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NEG_INFINITY
            }
        }
    };
    let mols = seeds.iter().map(|s| parse(s)).collect::<PyResult<Vec<_>>>()?;
    let seed_pool = ScoredPool::from_scored(mols.into_iter().map(|m| {
        let s = call(&m);
        (m, s)
    }));
    let result = molbo::ga::ga_maximize(&mut call, &seed_pool, &cfg);
    if let Some(e) = failure {
        return Err(e);
    }
    let pool = result.map_err(py_err)?;
    Ok(pool.entries().iter().map(|e| (e.mol.to_smiles(), e.score)).collect())
}

/// Score `smiles` under one of the built-in objectives.
#[pyfunction]
fn objective_score(name: &str, smiles: &str) -> PyResult<f64> {
    let cfg = default_objectives()
        .into_iter()
        .find(|o| o.name == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown objective {name:?}")))?;
    Ok(cfg.build().map_err(py_err)?.evaluate(&parse(smiles)?))
}

#[pyfunction]
fn objective_names() -> Vec<String> {
    default_objectives().into_iter().map(|o| o.name).collect()
}

#[pyfunction]
#[pyo3(signature = (scores, budget, k = 10))]
fn auc_topk(scores: Vec<f64>, budget: usize, k: usize) -> PyResult<f64> {
    auc_topk_scores(&scores, k, budget).map_err(py_err)
}

/// One optimization run configured by TOML text (the same format as
/// `molbo run --config`; empty means all defaults). Returns a dict with
/// `history` (list of `(smiles, score, provenance)`), `auc_top10` and
/// `objective`.
#[pyfunction]
#[pyo3(signature = (config = ""))]
fn bo_run<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let cfg = RunConfigFile::parse(config).map_err(py_err)?;
    let bo = cfg.bo_config().map_err(py_err)?;
    let objective = cfg.run_objective();
    let spec = objective.build().map_err(py_err)?;
    let seeds = cfg.seed_molecules().map_err(py_err)?;
    let outcome = py
        .detach(|| molbo::bo::bo_run(&bo, &spec, &seeds))
        .map_err(py_err)?;
    let history: &RunHistory = &outcome.history;
    let auc = molbo::objectives::auc_topk(history, 10, bo.total_budget).map_err(py_err)?;
    let rows: Vec<(String, f64, String)> = history
        .entries
        .iter()
        .map(|e| (e.smiles.clone(), e.score, format!("{:?}", e.provenance).to_lowercase()))
        .collect();
    let out = pyo3::types::PyDict::new(py);
    out.set_item("objective", objective.name)?;
    out.set_item("history", rows)?;
    out.set_item("auc_top10", auc)?;
    out.set_item("rounds", outcome.rounds.len())?;
    Ok(out)
}

#[pymodule]
fn molbo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Molecule>()?;
    m.add_class::<Fingerprint>()?;
    m.add_class::<GaussianProcess>()?;
    m.add_function(wrap_pyfunction!(fingerprint, m)?)?;
    m.add_function(wrap_pyfunction!(tanimoto, m)?)?;
    m.add_function(wrap_pyfunction!(prob_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(expected_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(ucb, m)?)?;
    m.add_function(wrap_pyfunction!(ga_maximize, m)?)?;
    m.add_function(wrap_pyfunction!(objective_score, m)?)?;
    m.add_function(wrap_pyfunction!(objective_names, m)?)?;
    m.add_function(wrap_pyfunction!(auc_topk, m)?)?;
    m.add_function(wrap_pyfunction!(bo_run, m)?)?;
    Ok(())
}
