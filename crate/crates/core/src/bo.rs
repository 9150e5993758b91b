//! Bayesian optimization over molecules. Each round fits a GP on count
//! fingerprints and evaluates the GA's best acquisition pick; the final
//! batch spends whatever budget remains.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use log::{debug, info, warn};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionSpec, BetaSchedule};
use crate::chem::{morgan_fingerprint, parse_smiles, read_smiles_lines, Fingerprint, FingerprintMode, Molecule};
use crate::error::{Error, Result};
use crate::ga::{ga_run, GaConfig, PoolEntry, ScoredPool};
use crate::gp::{gp_fit, GpConfig, PosteriorState};
use crate::objectives::{ObjectiveSpec, OracleState, Provenance, RunHistory};
use crate::rng::stream_rng;

/// Bundled drug-like seed molecules standing in for a screening library.
pub const BUNDLED_SEEDS: &str = include_str!("../data/seeds.smi");

pub fn bundled_seeds() -> Vec<Molecule> {
    read_smiles_lines(BUNDLED_SEEDS).expect("bundled seed file parses")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcquisitionChoice {
    /// UCB with β redrawn every round from a log-uniform schedule.
    UcbRandomBeta(BetaSchedule),
    Ucb { beta: f64 },
    Pi,
    Ei,
}

impl Default for AcquisitionChoice {
    fn default() -> Self {
        AcquisitionChoice::UcbRandomBeta(BetaSchedule::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalFill {
    #[default]
    PosteriorMean,
    Random,
    None,
}

impl FromStr for FinalFill {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "posterior_mean" => Ok(FinalFill::PosteriorMean),
            "random" => Ok(FinalFill::Random),
            "none" => Ok(FinalFill::None),
            other => Err(Error::Config(format!("unknown final_fill {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoConfig {
    pub gp: GpConfig,
    pub fp_radius: u32,
    pub fp_mode: FingerprintMode,
    pub acquisition: AcquisitionChoice,
    pub ga: GaConfig,
    pub n_init: usize,
    pub bo_iterations: usize,
    pub total_budget: usize,
    pub final_fill: FinalFill,
    pub rng_seed: u64,
    /// Evaluated molecules seeding the GA each round.
    pub ga_seed_evaluated: usize,
    /// Unevaluated pool molecules seeding the GA each round.
    pub ga_seed_pooled: usize,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            gp: GpConfig::default(),
            fp_radius: 2,
            fp_mode: FingerprintMode::Count,
            acquisition: AcquisitionChoice::default(),
            ga: GaConfig::default(),
            n_init: 10,
            bo_iterations: 200,
            total_budget: 500,
            final_fill: FinalFill::PosteriorMean,
            rng_seed: 0,
            ga_seed_evaluated: 100,
            ga_seed_pooled: 100,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        self.gp.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.ga.validate()?;
        if self.n_init == 0 {
            return Err(Error::Config("n_init must be >= 1".into()));
        }
        if self.n_init + self.bo_iterations > self.total_budget {
            return Err(Error::Config(format!(
                "n_init + bo_iterations = {} exceeds total_budget {}",
                self.n_init + self.bo_iterations,
                self.total_budget
            )));
        }
        if self.fp_radius > 8 {
            return Err(Error::Config(format!("fingerprint radius {} exceeds 8", self.fp_radius)));
        }
        match self.acquisition {
            AcquisitionChoice::UcbRandomBeta(s) => {
                BetaSchedule::new(s.log10_low, s.log10_high).map_err(|e| Error::Config(e.to_string()))?;
            }
            AcquisitionChoice::Ucb { beta } if !(beta >= 0.0) => {
                return Err(Error::Config(format!("UCB beta must be >= 0, got {beta}")));
            }
            _ => {}
        }
        Ok(())
    }

    fn fingerprint(&self, mol: &Molecule) -> Fingerprint {
        morgan_fingerprint(mol, self.fp_radius, self.fp_mode)
    }
}

/// Per-round diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub beta: Option<f64>,
    pub key: String,
    pub smiles: String,
    pub acquisition: f64,
    pub posterior_mean: f64,
    pub posterior_std: f64,
    pub score: f64,
    pub amplitude: f64,
    pub noise_variance: f64,
    pub ga_evaluations: usize,
    /// The GA returned nothing unevaluated and the pick came from the pool.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct BoOutcome {
    pub history: RunHistory,
    pub rounds: Vec<RoundLog>,
    pub gp_fits: usize,
    pub stopped_early: bool,
    /// SMILES of the candidates still unevaluated at the end, in key order.
    pub leftover_pool: Vec<String>,
}

impl BoOutcome {
    pub fn rounds_jsonl(&self) -> String {
        self.rounds
            .iter()
            .map(|r| serde_json::to_string(r).expect("round logs serialize") + "\n")
            .collect()
    }
}

/// A GA-proposed molecule that has not been evaluated.
#[derive(Debug, Clone)]
struct Candidate {
    smiles: String,
    fp: Fingerprint,
    /// Acquisition value from the last round that scored it.
    acquisition: f64,
}

struct Evaluated {
    key: String,
    mol: Molecule,
    fp: Fingerprint,
    score: f64,
}

/// Mutable loop state.
pub struct BoState<'a> {
    cfg: &'a BoConfig,
    spec: &'a ObjectiveSpec,
    oracle: OracleState,
    data: Vec<Evaluated>,
    evaluated: HashSet<String>,
    pool: BTreeMap<String, Candidate>,
    gp_fits: usize,
}

impl<'a> BoState<'a> {
    fn new(cfg: &'a BoConfig, spec: &'a ObjectiveSpec) -> Self {
        BoState {
            cfg,
            spec,
            oracle: OracleState::new(cfg.total_budget),
            data: Vec::new(),
            evaluated: HashSet::new(),
            pool: BTreeMap::new(),
            gp_fits: 0,
        }
    }

    pub fn oracle(&self) -> &OracleState {
        &self.oracle
    }

    pub fn y_best(&self) -> f64 {
        self.data.iter().map(|e| e.score).fold(f64::NEG_INFINITY, f64::max)
    }

    fn evaluate(&mut self, key: String, mol: Molecule, fp: Fingerprint, provenance: Provenance) -> Result<f64> {
        let (score, hit) = self.oracle.call_keyed(self.spec, &mol, key.clone(), provenance)?;
        debug_assert!(!hit, "molecule {key} evaluated twice");
        self.pool.remove(&key);
        self.evaluated.insert(key.clone());
        self.data.push(Evaluated { key, mol, fp, score });
        Ok(score)
    }

    fn fit(&mut self) -> Result<PosteriorState<Fingerprint>> {
        let inputs: Vec<Fingerprint> = self.data.iter().map(|e| e.fp.clone()).collect();
        let labels: Vec<f64> = self.data.iter().map(|e| e.score).collect();
        self.gp_fits += 1;
        gp_fit(&inputs, &labels, &self.cfg.gp)
    }

    /// Keys of the `n` pooled candidates with the highest stored
    /// acquisition, ties by key.
    fn top_pooled(&self, n: usize) -> Vec<&String> {
        let mut all: Vec<(&String, f64)> = self.pool.iter().map(|(k, c)| (k, c.acquisition)).collect();
        let order = |a: &(&String, f64), b: &(&String, f64)| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0));
        if all.len() > n && n > 0 {
            all.select_nth_unstable_by(n - 1, order);
            all.truncate(n);
        } else if n == 0 {
            all.clear();
        }
        all.sort_by(order);
        all.into_iter().map(|(k, _)| k).collect()
    }

    fn round(&mut self, round: usize, beta_rng: &mut crate::rng::Rng, ga_seed: u64) -> Result<Option<RoundLog>> {
        let post = self.fit()?;
        let y_best = self.y_best();
        let (acq, beta) = match self.cfg.acquisition {
            AcquisitionChoice::UcbRandomBeta(s) => {
                let beta = s.sample(beta_rng);
                (AcquisitionSpec::Ucb { beta }, Some(beta))
            }
            AcquisitionChoice::Ucb { beta } => (AcquisitionSpec::Ucb { beta }, Some(beta)),
            AcquisitionChoice::Pi => (AcquisitionSpec::Pi { y_best }, None),
            AcquisitionChoice::Ei => (AcquisitionSpec::Ei { y_best }, None),
        };
        let cfg = self.cfg;
        let score_fp = |fp: &Fingerprint| -> f64 {
            let (m, v) = post.predict(fp).expect("fingerprint modes agree");
            acq.evaluate(m, v)
        };

        let mut by_score: Vec<&Evaluated> = self.data.iter().collect();
        by_score.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key)));
        let mut seeds: Vec<PoolEntry> = by_score
            .iter()
            .take(cfg.ga_seed_evaluated)
            .map(|e| PoolEntry {
                key: e.key.clone(),
                mol: e.mol.clone(),
                score: score_fp(&e.fp),
            })
            .collect();
        for key in self.top_pooled(cfg.ga_seed_pooled) {
            let c = &self.pool[key];
            let mol = parse_smiles(&c.smiles).map_err(|e| Error::input(format!("pool molecule {}: {e}", c.smiles)))?;
            seeds.push(PoolEntry {
                key: key.clone(),
                mol,
                score: score_fp(&c.fp),
            });
        }
        let seed_pool = ScoredPool::from_entries(seeds);

        let ga_cfg = GaConfig {
            rng_seed: ga_seed,
            ..cfg.ga
        };
        let mut score_mol = |m: &Molecule| score_fp(&cfg.fingerprint(m));
        let (proposals, stats) = ga_run(&mut score_mol, &seed_pool, &ga_cfg)?;

        let mut choice: Option<(PoolEntry, Fingerprint)> = None;
        for e in proposals.into_entries() {
            if self.evaluated.contains(&e.key) {
                continue;
            }
            let fp = match self.pool.get_mut(&e.key) {
                Some(c) => {
                    c.acquisition = e.score;
                    c.fp.clone()
                }
                None => {
                    let fp = cfg.fingerprint(&e.mol);
                    self.pool.insert(
                        e.key.clone(),
                        Candidate {
                            smiles: e.mol.to_smiles(),
                            fp: fp.clone(),
                            acquisition: e.score,
                        },
                    );
                    fp
                }
            };
            // Entries arrive best first, so the first unevaluated one wins.
            if choice.is_none() {
                choice = Some((e, fp));
            }
        }

        let fallback = choice.is_none();
        if fallback {
            warn!("round {round}: GA returned no unevaluated molecule, falling back to the pool");
            let Some(key) = self.top_pooled(1).into_iter().next().cloned() else {
                return Ok(None);
            };
            let c = &self.pool[&key];
            let mol = parse_smiles(&c.smiles).map_err(|e| Error::input(format!("pool molecule {}: {e}", c.smiles)))?;
            let fp = c.fp.clone();
            let score = score_fp(&fp);
            choice = Some((PoolEntry { key, mol, score }, fp));
        }
        let (pick, fp) = choice.unwrap();
        let (mean, var) = post.predict(&fp)?;
        let smiles = pick.mol.to_smiles();
        let score = self.evaluate(pick.key.clone(), pick.mol, fp, Provenance::Bo)?;
        debug!("round {round}: picked {smiles} acq {:.4} score {score:.4}", pick.score);
        Ok(Some(RoundLog {
            round,
            beta,
            key: pick.key,
            smiles,
            acquisition: pick.score,
            posterior_mean: mean,
            posterior_std: var.sqrt(),
            score,
            amplitude: cfg.gp.kernel.amplitude,
            noise_variance: cfg.gp.noise_variance,
            ga_evaluations: stats.evaluations,
            fallback,
        }))
    }

    /// Spend the remaining budget on pooled candidates.
    pub fn final_fill(&mut self, rng: &mut crate::rng::Rng) -> Result<usize> {
        let remaining = self.oracle.remaining();
        if remaining == 0 || self.pool.is_empty() || self.cfg.final_fill == FinalFill::None {
            return Ok(0);
        }
        let keys: Vec<String> = match self.cfg.final_fill {
            FinalFill::None => unreachable!(),
            FinalFill::Random => {
                let all: Vec<&String> = self.pool.keys().collect();
                let n = remaining.min(all.len());
                index::sample(rng, all.len(), n).into_iter().map(|i| all[i].clone()).collect()
            }
            FinalFill::PosteriorMean => {
                let post = self.fit()?;
                let mut ranked = self
                    .pool
                    .iter()
                    .map(|(k, c)| Ok((k, post.predict_mean(&c.fp)?)))
                    .collect::<Result<Vec<_>>>()?;
                ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
                ranked.into_iter().take(remaining).map(|(k, _)| k.clone()).collect()
            }
        };
        let n = keys.len();
        for key in keys {
            let c = self.pool.get(&key).expect("fill key is pooled");
            let mol = parse_smiles(&c.smiles).map_err(|e| Error::input(format!("pool molecule {}: {e}", c.smiles)))?;
            let fp = c.fp.clone();
            self.evaluate(key, mol, fp, Provenance::Fill)?;
        }
        Ok(n)
    }
}

/// Unique seed molecules, in input order.
fn dedupe(seeds: &[Molecule]) -> Vec<(String, Molecule)> {
    let mut seen = HashSet::new();
    seeds
        .iter()
        .filter_map(|m| {
            let k = m.canonical_key();
            seen.insert(k.clone()).then(|| (k, m.clone()))
        })
        .collect()
}

const STREAM_INIT: u64 = 1;
const STREAM_BETA: u64 = 2;
const STREAM_GA: u64 = 3;
const STREAM_FILL: u64 = 4;
const STREAM_RANDOM: u64 = 5;

fn init_state<'a>(cfg: &'a BoConfig, spec: &'a ObjectiveSpec, seeds: &[Molecule]) -> Result<BoState<'a>> {
    cfg.validate()?;
    let unique = dedupe(seeds);
    if unique.len() < cfg.n_init {
        return Err(Error::input(format!(
            "{} distinct seed molecules, need n_init = {}",
            unique.len(),
            cfg.n_init
        )));
    }
    let mut state = BoState::new(cfg, spec);
    let mut rng = stream_rng(cfg.rng_seed, STREAM_INIT);
    let mut picks = index::sample(&mut rng, unique.len(), cfg.n_init).into_vec();
    picks.sort_unstable();
    for i in picks {
        let (key, mol) = unique[i].clone();
        let fp = cfg.fingerprint(&mol);
        state.evaluate(key, mol, fp, Provenance::Init)?;
    }
    Ok(state)
}

/// Run the full loop: `n_init` random seeds, `bo_iterations` GA-maximized
/// acquisition picks, then the final fill.
pub fn bo_run(cfg: &BoConfig, spec: &ObjectiveSpec, seeds: &[Molecule]) -> Result<BoOutcome> {
    let mut state = init_state(cfg, spec, seeds)?;
    let mut beta_rng = stream_rng(cfg.rng_seed, STREAM_BETA);
    let mut ga_rng = stream_rng(cfg.rng_seed, STREAM_GA);
    let mut rounds = Vec::new();
    let mut stopped_early = false;
    for r in 1..=cfg.bo_iterations {
        if state.oracle.remaining() == 0 {
            break;
        }
        let ga_seed: u64 = ga_rng.random();
        match state.round(r, &mut beta_rng, ga_seed)? {
            Some(log) => rounds.push(log),
            None => {
                warn!("round {r}: no unevaluated molecule anywhere, stopping early");
                stopped_early = true;
                break;
            }
        }
        if r % 25 == 0 {
            info!(
                "round {r}/{}: best {:.4}, pool {}",
                cfg.bo_iterations,
                state.y_best(),
                state.pool.len()
            );
        }
    }
    let mut fill_rng = stream_rng(cfg.rng_seed, STREAM_FILL);
    let filled = state.final_fill(&mut fill_rng)?;
    info!(
        "{}: {} rounds, {filled} filled, best {:.4}",
        spec.name(),
        rounds.len(),
        state.y_best()
    );
    Ok(BoOutcome {
        leftover_pool: state.pool.values().map(|c| c.smiles.clone()).collect(),
        gp_fits: state.gp_fits,
        history: state.oracle.into_history(),
        rounds,
        stopped_early,
    })
}

/// Baseline: after the same random initial batch, spend the budget on
/// molecules drawn uniformly from what the GA can reach from the evaluated
/// set, with no surrogate guiding it.
pub fn random_search_run(cfg: &BoConfig, spec: &ObjectiveSpec, seeds: &[Molecule]) -> Result<RunHistory> {
    let mut state = init_state(cfg, spec, seeds)?;
    let mut rng = stream_rng(cfg.rng_seed, STREAM_RANDOM);
    let mut stale = 0;
    while state.oracle.remaining() > 0 && stale < 10 {
        let seed_pool = ScoredPool::from_entries(state.data.iter().map(|e| PoolEntry {
            key: e.key.clone(),
            mol: e.mol.clone(),
            score: rng.random(),
        }));
        let ga_cfg = GaConfig {
            rng_seed: rng.random(),
            ..cfg.ga
        };
        let mut score_rng = stream_rng(ga_cfg.rng_seed, STREAM_RANDOM);
        let mut random_score = |_: &Molecule| score_rng.random::<f64>();
        let (proposals, _) = ga_run(&mut random_score, &seed_pool, &ga_cfg)?;
        let mut fresh: Vec<PoolEntry> = proposals
            .into_entries()
            .into_iter()
            .filter(|e| !state.evaluated.contains(&e.key))
            .collect();
        if fresh.is_empty() {
            stale += 1;
            continue;
        }
        stale = 0;
        fresh.sort_by(|a, b| a.key.cmp(&b.key));
        fresh.shuffle(&mut rng);
        // Draw a fraction per batch so later draws can reach further out.
        let take = fresh.len().div_ceil(2).min(state.oracle.remaining());
        for e in fresh.into_iter().take(take) {
            let fp = cfg.fingerprint(&e.mol);
            state.evaluate(e.key, e.mol, fp, Provenance::Bo)?;
        }
    }
    Ok(state.oracle.into_history())
}
