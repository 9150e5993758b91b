//! Run configuration files: flat `key = value` sections in TOML syntax.
//!
//! Every section and key is optional; missing ones take the defaults below,
//! and unknown keys are rejected by name. A fully expanded copy is written
//! next to each run's outputs as `config.resolved`.
//!
//! ```toml
//! [run]
//! rng_seed = 0
//! n_init = 10
//! bo_iterations = 200
//! total_budget = 500
//! final_fill = "posterior_mean"   # posterior_mean | random | none
//! output_dir = "runs/default"
//! seeds_file = ""                 # empty: bundled seed molecules
//!
//! [gp]
//! amplitude = 1.0
//! noise_variance = 1e-4
//! prior_mean = 0.0
//!
//! [fingerprint]
//! radius = 2
//! mode = "count"                  # count | binary
//!
//! [acquisition]
//! kind = "ucb_random_beta"        # ucb_random_beta | ucb | pi | ei
//! beta = 1.0                      # ucb only
//! log10_beta_low = -2.0
//! log10_beta_high = 0.0
//!
//! [ga]
//! population_size = 100
//! offspring_size = 200
//! generations = 5
//! mutation_rate = 0.5
//! max_heavy_atoms = 100
//! seed_evaluated = 100
//! seed_pooled = 100
//!
//! [objective]
//! name = "celecoxib_rediscovery"
//! family = "rediscovery"          # rediscovery | similarity | median | isomer
//! targets = ["CC1=CC=C(C=C1)C1=CC(=NN1C1=CC=C(C=C1)S(N)(=O)=O)C(F)(F)F"]
//! radius = 2
//! ```
//!
//! `bench` runs every `[[objectives]]` table, falling back to `[objective]`
//! and then to the built-in suite.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::BetaSchedule;
use crate::bo::{bundled_seeds, AcquisitionChoice, BoConfig, FinalFill};
use crate::chem::{read_smiles_file, FingerprintMode, Molecule};
use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::gp::{GpConfig, KernelConfig};
use crate::objectives::{default_objectives, ObjectiveConfig};

/// Overrides the root that relative output directories resolve against.
pub const OUTPUT_ROOT_ENV: &str = "MOLBO_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub rng_seed: u64,
    pub n_init: usize,
    pub bo_iterations: usize,
    pub total_budget: usize,
    pub final_fill: FinalFill,
    pub output_dir: String,
    pub seeds_file: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            rng_seed: 0,
            n_init: 10,
            bo_iterations: 200,
            total_budget: 500,
            final_fill: FinalFill::PosteriorMean,
            output_dir: "runs/default".into(),
            seeds_file: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpSection {
    pub amplitude: f64,
    pub noise_variance: f64,
    pub prior_mean: f64,
}

impl Default for GpSection {
    fn default() -> Self {
        let d = GpConfig::default();
        GpSection {
            amplitude: d.kernel.amplitude,
            noise_variance: d.noise_variance,
            prior_mean: d.prior_mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FingerprintSection {
    pub radius: u32,
    pub mode: FingerprintMode,
}

impl Default for FingerprintSection {
    fn default() -> Self {
        FingerprintSection {
            radius: 2,
            mode: FingerprintMode::Count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionKind {
    UcbRandomBeta,
    Ucb,
    Pi,
    Ei,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionSection {
    pub kind: AcquisitionKind,
    pub beta: f64,
    pub log10_beta_low: f64,
    pub log10_beta_high: f64,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        let s = BetaSchedule::default();
        AcquisitionSection {
            kind: AcquisitionKind::UcbRandomBeta,
            beta: 1.0,
            log10_beta_low: s.log10_low,
            log10_beta_high: s.log10_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub population_size: usize,
    pub offspring_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub max_heavy_atoms: usize,
    pub seed_evaluated: usize,
    pub seed_pooled: usize,
}

impl Default for GaSection {
    fn default() -> Self {
        let g = GaConfig::default();
        GaSection {
            population_size: g.population_size,
            offspring_size: g.offspring_size,
            generations: g.generations,
            mutation_rate: g.mutation_rate,
            max_heavy_atoms: g.max_heavy_atoms,
            seed_evaluated: 100,
            seed_pooled: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    pub run: RunSection,
    pub gp: GpSection,
    pub fingerprint: FingerprintSection,
    pub acquisition: AcquisitionSection,
    pub ga: GaSection,
    pub objective: Option<ObjectiveConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub objectives: Vec<ObjectiveConfig>,
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.bo_config()?.validate()?;
        for o in cfg.objectives.iter().chain(&cfg.objective) {
            o.build()?;
        }
        Ok(cfg)
    }

    /// Load from `path`; a relative `seeds_file` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if !cfg.run.seeds_file.is_empty() {
            let seeds = Path::new(&cfg.run.seeds_file);
            if seeds.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.run.seeds_file = dir.join(seeds).display().to_string();
                }
            }
        }
        Ok(cfg)
    }

    /// Every key written out, defaults included.
    pub fn resolved(&self) -> String {
        let mut full = self.clone();
        if full.objective.is_none() && full.objectives.is_empty() {
            full.objective = Some(ObjectiveConfig::celecoxib_rediscovery());
        }
        toml::to_string(&full).expect("config serializes")
    }

    pub fn bo_config(&self) -> Result<BoConfig> {
        let acquisition = match self.acquisition.kind {
            AcquisitionKind::UcbRandomBeta => AcquisitionChoice::UcbRandomBeta(
                BetaSchedule::new(self.acquisition.log10_beta_low, self.acquisition.log10_beta_high)
                    .map_err(|e| Error::Config(e.to_string()))?,
            ),
            AcquisitionKind::Ucb => AcquisitionChoice::Ucb {
                beta: self.acquisition.beta,
            },
            AcquisitionKind::Pi => AcquisitionChoice::Pi,
            AcquisitionKind::Ei => AcquisitionChoice::Ei,
        };
        let cfg = BoConfig {
            gp: GpConfig {
                kernel: KernelConfig::tanimoto(self.gp.amplitude),
                noise_variance: self.gp.noise_variance,
                prior_mean: self.gp.prior_mean,
            },
            fp_radius: self.fingerprint.radius,
            fp_mode: self.fingerprint.mode,
            acquisition,
            ga: GaConfig {
                population_size: self.ga.population_size,
                offspring_size: self.ga.offspring_size,
                generations: self.ga.generations,
                mutation_rate: self.ga.mutation_rate,
                max_heavy_atoms: self.ga.max_heavy_atoms,
                rng_seed: 0,
            },
            n_init: self.run.n_init,
            bo_iterations: self.run.bo_iterations,
            total_budget: self.run.total_budget,
            final_fill: self.run.final_fill,
            rng_seed: self.run.rng_seed,
            ga_seed_evaluated: self.ga.seed_evaluated,
            ga_seed_pooled: self.ga.seed_pooled,
        };
        Ok(cfg)
    }

    pub fn run_objective(&self) -> ObjectiveConfig {
        self.objective
            .clone()
            .unwrap_or_else(ObjectiveConfig::celecoxib_rediscovery)
    }

    pub fn bench_objectives(&self) -> Vec<ObjectiveConfig> {
        if !self.objectives.is_empty() {
            self.objectives.clone()
        } else if let Some(o) = &self.objective {
            vec![o.clone()]
        } else {
            default_objectives()
        }
    }

    pub fn seed_molecules(&self) -> Result<Vec<Molecule>> {
        if self.run.seeds_file.is_empty() {
            Ok(bundled_seeds())
        } else {
            read_smiles_file(Path::new(&self.run.seeds_file))
        }
    }

    /// Output directory, under the override root if one is set.
    pub fn output_dir(&self) -> PathBuf {
        resolve_output(Path::new(&self.run.output_dir))
    }
}

pub fn resolve_output(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() => Path::new(&root).join(dir),
        _ => dir.to_path_buf(),
    }
}
