//! Graph genetic algorithm over molecules.
//!
//! Crossover cuts each parent at an acyclic single bond and joins one
//! fragment from each side. Mutation applies one of four local edits. Every
//! child goes back through the same sanitization as parsed SMILES, so a
//! child either satisfies the valence table or is discarded.

use std::cmp::Ordering;
use std::collections::HashSet;

use log::{debug, warn};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chem::{EditAtom, EditMol, Element, Molecule};
use crate::error::{Error, Result};
use crate::rng::stream_rng2;

const MAX_ATTEMPTS: usize = 20;

/// Elements used by substitution and append mutations.
pub const MUTATION_ELEMENTS: [Element; 5] = [Element::C, Element::N, Element::O, Element::S, Element::F];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaConfig {
    pub population_size: usize,
    pub offspring_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub max_heavy_atoms: usize,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            offspring_size: 200,
            generations: 5,
            mutation_rate: 0.5,
            max_heavy_atoms: 100,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    /// Large-population profile: 10⁴ population, 200 offspring, 5
    /// generations.
    pub fn full_scale() -> Self {
        GaConfig {
            population_size: 10_000,
            ..GaConfig::default()
        }
    }

    /// Starved search budget of about six proposals per call.
    pub fn throttled() -> Self {
        GaConfig {
            offspring_size: 6,
            generations: 1,
            ..GaConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.offspring_size == 0 || self.max_heavy_atoms == 0 {
            return Err(Error::Config(
                "population_size, offspring_size and max_heavy_atoms must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config(format!(
                "mutation_rate must lie in [0, 1], got {}",
                self.mutation_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub key: String,
    pub mol: Molecule,
    pub score: f64,
}

fn entry_order(a: &PoolEntry, b: &PoolEntry) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.key.cmp(&b.key))
}

/// Molecules with scores, unique by canonical key, best first.
#[derive(Debug, Clone, Default)]
pub struct ScoredPool {
    entries: Vec<PoolEntry>,
}

impl ScoredPool {
    pub fn new() -> Self {
        ScoredPool::default()
    }

    /// Build from (molecule, score) pairs. Later duplicates of a key are
    /// dropped.
    pub fn from_scored(items: impl IntoIterator<Item = (Molecule, f64)>) -> Self {
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (mol, score) in items {
            let key = mol.canonical_key();
            if seen.insert(key.clone()) {
                entries.push(PoolEntry { key, mol, score });
            }
        }
        entries.sort_by(entry_order);
        ScoredPool { entries }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = PoolEntry>) -> Self {
        let mut seen = HashSet::new();
        let mut entries: Vec<PoolEntry> = entries.into_iter().filter(|e| seen.insert(e.key.clone())).collect();
        entries.sort_by(entry_order);
        ScoredPool { entries }
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<PoolEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&PoolEntry> {
        self.entries.first()
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }
}

/// Rank-weighted roulette: the entry at 1-based rank r has weight 1/r.
struct Roulette {
    cumulative: Vec<f64>,
}

impl Roulette {
    fn new(n: usize) -> Self {
        let mut acc = 0.0;
        let cumulative = (1..=n)
            .map(|r| {
                acc += 1.0 / r as f64;
                acc
            })
            .collect();
        Roulette { cumulative }
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

fn checked(edit: &EditMol, max_heavy_atoms: usize) -> Option<Molecule> {
    if edit.atoms.len() > max_heavy_atoms {
        return None;
    }
    edit.to_molecule().ok()
}

/// Acyclic single bonds: the only places crossover may cut.
fn cuttable_bonds(mol: &Molecule) -> Vec<usize> {
    mol.bonds()
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.in_ring && b.kekule == 1)
        .map(|(i, _)| i)
        .collect()
}

/// One side of `mol` cut at a random acyclic single bond, with the
/// attachment atom's index in the fragment.
fn random_fragment<R: Rng + ?Sized>(mol: &Molecule, cuts: &[usize], rng: &mut R) -> (EditMol, usize) {
    let edit = mol.to_edit();
    let bi = *cuts.choose(rng).unwrap();
    let bond = &mol.bonds()[bi];
    let attach = if rng.random::<bool>() { bond.a } else { bond.b };
    let keep = edit.component(attach, Some(bi));
    let (frag, map) = edit.subgraph(&keep);
    (frag, map[attach].unwrap())
}

/// Join a random fragment of each parent by a new single bond between the
/// cut attachment atoms.
pub fn crossover<R: Rng + ?Sized>(a: &Molecule, b: &Molecule, max_heavy_atoms: usize, rng: &mut R) -> Option<Molecule> {
    let (cuts_a, cuts_b) = (cuttable_bonds(a), cuttable_bonds(b));
    if cuts_a.is_empty() || cuts_b.is_empty() {
        return None;
    }
    for _ in 0..MAX_ATTEMPTS {
        let (mut child, ia) = random_fragment(a, &cuts_a, rng);
        let (frag_b, ib) = random_fragment(b, &cuts_b, rng);
        let offset = child.append(&frag_b);
        child.bonds.push((ia, ib + offset, 1));
        if let Some(m) = checked(&child, max_heavy_atoms) {
            return Some(m);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationOp {
    Substitute,
    BondOrder,
    AppendAtom,
    DeleteAtom,
}

impl MutationOp {
    pub const ALL: [MutationOp; 4] = [
        MutationOp::Substitute,
        MutationOp::BondOrder,
        MutationOp::AppendAtom,
        MutationOp::DeleteAtom,
    ];
}

fn try_mutation<R: Rng + ?Sized>(mol: &Molecule, op: MutationOp, rng: &mut R) -> Option<EditMol> {
    let mut edit = mol.to_edit();
    let n = edit.atoms.len();
    match op {
        MutationOp::Substitute => {
            let i = rng.random_range(0..n);
            let choices: Vec<Element> = MUTATION_ELEMENTS
                .iter()
                .copied()
                .filter(|&e| e != edit.atoms[i].element)
                .collect();
            edit.atoms[i] = EditAtom {
                element: *choices.choose(rng)?,
                charge: 0,
            };
        }
        MutationOp::BondOrder => {
            if edit.bonds.is_empty() {
                return None;
            }
            let k = rng.random_range(0..edit.bonds.len());
            let bond = &mut edit.bonds[k];
            let up = rng.random::<bool>();
            bond.2 = match (bond.2, up) {
                (1 | 2, true) => bond.2 + 1,
                (2 | 3, false) => bond.2 - 1,
                _ => return None,
            };
        }
        MutationOp::AppendAtom => {
            let i = rng.random_range(0..n);
            let j = edit.add_atom(EditAtom {
                element: *MUTATION_ELEMENTS.choose(rng)?,
                charge: 0,
            });
            edit.bonds.push((i, j, 1));
        }
        MutationOp::DeleteAtom => {
            let terminal: Vec<usize> = (0..n).filter(|&i| edit.degree(i) <= 1).collect();
            let i = *terminal.choose(rng)?;
            edit.remove_atom(i);
        }
    }
    Some(edit)
}

/// Apply `op`, retrying up to 20 times until the result is valid.
pub fn mutate_with<R: Rng + ?Sized>(mol: &Molecule, op: MutationOp, max_heavy_atoms: usize, rng: &mut R) -> Option<Molecule> {
    (0..MAX_ATTEMPTS).find_map(|_| checked(&try_mutation(mol, op, rng)?, max_heavy_atoms))
}

/// Apply a uniformly chosen operator, redrawing it on every retry.
pub fn mutate<R: Rng + ?Sized>(mol: &Molecule, max_heavy_atoms: usize, rng: &mut R) -> Option<Molecule> {
    (0..MAX_ATTEMPTS).find_map(|_| {
        let op = *MutationOp::ALL.choose(rng).unwrap();
        checked(&try_mutation(mol, op, rng)?, max_heavy_atoms)
    })
}

/// Counters from one [`ga_run`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GaStats {
    pub evaluations: usize,
    pub duplicates: usize,
    pub failed_offspring: usize,
    /// Best population score after each generation.
    pub best_per_generation: Vec<f64>,
}

/// [`ga_maximize`] plus run counters.
pub fn ga_run<F>(score_fn: &mut F, seed_pool: &ScoredPool, cfg: &GaConfig) -> Result<(ScoredPool, GaStats)>
where
    F: FnMut(&Molecule) -> f64,
{
    cfg.validate()?;
    if seed_pool.is_empty() {
        return Err(Error::input("GA needs a nonempty seed pool"));
    }
    let mut stats = GaStats::default();
    let mut seen: HashSet<String> = seed_pool.entries.iter().map(|e| e.key.clone()).collect();
    let mut everything: Vec<PoolEntry> = seed_pool.entries.clone();
    let mut population: Vec<PoolEntry> = seed_pool.entries.iter().take(cfg.population_size).cloned().collect();

    for gen in 0..cfg.generations {
        let roulette = Roulette::new(population.len());
        let mut fresh = Vec::new();
        for o in 0..cfg.offspring_size {
            let mut rng = stream_rng2(cfg.rng_seed, gen as u64, o as u64);
            let pa = &population[roulette.pick(&mut rng)].mol;
            let pb = &population[roulette.pick(&mut rng)].mol;
            let child = match crossover(pa, pb, cfg.max_heavy_atoms, &mut rng) {
                Some(c) if rng.random::<f64>() < cfg.mutation_rate => {
                    mutate(&c, cfg.max_heavy_atoms, &mut rng).or(Some(c))
                }
                Some(c) => Some(c),
                None => mutate(pa, cfg.max_heavy_atoms, &mut rng),
            };
            let Some(child) = child else {
                stats.failed_offspring += 1;
                continue;
            };
            let key = child.canonical_key();
            if !seen.insert(key.clone()) {
                stats.duplicates += 1;
                continue;
            }
            let score = score_fn(&child);
            stats.evaluations += 1;
            fresh.push(PoolEntry { key, mol: child, score });
        }
        if fresh.is_empty() {
            warn!("GA generation {gen}: no new valid offspring");
        }
        everything.extend(fresh.iter().cloned());
        population.extend(fresh);
        population.sort_by(entry_order);
        population.truncate(cfg.population_size);
        stats.best_per_generation.push(population[0].score);
        debug!(
            "GA generation {gen}: best {:.4}, {} evaluations so far",
            population[0].score, stats.evaluations
        );
    }
    everything.sort_by(entry_order);
    Ok((ScoredPool { entries: everything }, stats))
}

/// Evolve `seed_pool` under `score_fn` and return every molecule scored,
/// seeds included, best first.
pub fn ga_maximize<F>(mut score_fn: F, seed_pool: &ScoredPool, cfg: &GaConfig) -> Result<ScoredPool>
where
    F: FnMut(&Molecule) -> f64,
{
    ga_run(&mut score_fn, seed_pool, cfg).map(|(pool, _)| pool)
}
