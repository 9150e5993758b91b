//! Fingerprint- and formula-based objectives in [0, 1], a budgeted caching
//! oracle, and the top-k AUC metric.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chem::{
    formula_to_string, morgan_fingerprint, parse_formula, parse_smiles, Fingerprint, FingerprintMode,
    Molecule,
};
use crate::error::{Error, Result};

pub const CELECOXIB: &str = "CC1=CC=C(C=C1)C1=CC(=NN1C1=CC=C(C=C1)S(N)(=O)=O)C(F)(F)F";

/// Decay constant of the isomer score exp(−Δ/4).
const ISOMER_SCALE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveFamily {
    Rediscovery,
    Similarity,
    Median,
    Isomer,
}

/// Serializable description of an objective, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub name: String,
    pub family: ObjectiveFamily,
    /// Target SMILES: one for rediscovery/similarity, two for median.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<String>,
    /// Target formula such as "C7H8N2O2", isomer family only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default = "default_radius")]
    pub radius: u32,
}

fn default_radius() -> u32 {
    2
}

impl ObjectiveConfig {
    pub fn celecoxib_rediscovery() -> Self {
        ObjectiveConfig {
            name: "celecoxib_rediscovery".into(),
            family: ObjectiveFamily::Rediscovery,
            targets: vec![CELECOXIB.into()],
            formula: None,
            radius: 2,
        }
    }

    pub fn build(&self) -> Result<ObjectiveSpec> {
        let targets = self
            .targets
            .iter()
            .map(|s| parse_smiles(s).map_err(|e| Error::Config(format!("objective {}: target {s:?}: {e}", self.name))))
            .collect::<Result<Vec<_>>>()?;
        let formula = self.formula.as_deref().map(parse_formula).transpose()?;
        ObjectiveSpec::new(&self.name, self.family, targets, formula, self.radius)
    }
}

#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    name: String,
    family: ObjectiveFamily,
    targets: Vec<Molecule>,
    target_fps: Vec<Fingerprint>,
    formula: BTreeMap<String, u32>,
    radius: u32,
}

impl ObjectiveSpec {
    pub fn new(
        name: &str,
        family: ObjectiveFamily,
        targets: Vec<Molecule>,
        formula: Option<BTreeMap<String, u32>>,
        radius: u32,
    ) -> Result<Self> {
        let want = match family {
            ObjectiveFamily::Rediscovery | ObjectiveFamily::Similarity => 1,
            ObjectiveFamily::Median => 2,
            ObjectiveFamily::Isomer => 0,
        };
        if targets.len() != want {
            return Err(Error::Config(format!(
                "objective {name}: {family:?} needs {want} target molecule(s), got {}",
                targets.len()
            )));
        }
        let formula = match (family, formula) {
            (ObjectiveFamily::Isomer, Some(f)) if !f.is_empty() => f,
            (ObjectiveFamily::Isomer, _) => {
                return Err(Error::Config(format!("objective {name}: isomer needs a target formula")))
            }
            (_, None) => BTreeMap::new(),
            (_, Some(_)) => {
                return Err(Error::Config(format!("objective {name}: only isomer takes a formula")))
            }
        };
        if radius > 8 {
            return Err(Error::Config(format!("objective {name}: radius {radius} exceeds 8")));
        }
        let target_fps = targets
            .iter()
            .map(|m| morgan_fingerprint(m, radius, FingerprintMode::Count))
            .collect();
        Ok(ObjectiveSpec {
            name: name.to_string(),
            family,
            targets,
            target_fps,
            formula,
            radius,
        })
    }

    pub fn rediscovery(name: &str, target: Molecule) -> Self {
        Self::new(name, ObjectiveFamily::Rediscovery, vec![target], None, 2).unwrap()
    }

    pub fn similarity(name: &str, target: Molecule) -> Self {
        Self::new(name, ObjectiveFamily::Similarity, vec![target], None, 2).unwrap()
    }

    pub fn median(name: &str, a: Molecule, b: Molecule) -> Self {
        Self::new(name, ObjectiveFamily::Median, vec![a, b], None, 2).unwrap()
    }

    pub fn isomer(name: &str, formula: BTreeMap<String, u32>) -> Self {
        Self::new(name, ObjectiveFamily::Isomer, vec![], Some(formula), 2).unwrap()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> ObjectiveFamily {
        self.family
    }

    pub fn targets(&self) -> &[Molecule] {
        &self.targets
    }

    pub fn to_config(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            name: self.name.clone(),
            family: self.family,
            targets: self.targets.iter().map(Molecule::to_smiles).collect(),
            formula: (!self.formula.is_empty()).then(|| formula_to_string(&self.formula)),
            radius: self.radius,
        }
    }

    pub fn evaluate(&self, mol: &Molecule) -> f64 {
        match self.family {
            ObjectiveFamily::Isomer => {
                let have = mol.molecular_formula();
                let mut delta = 0u32;
                for (el, &n) in &self.formula {
                    delta += have.get(el).copied().unwrap_or(0).abs_diff(n);
                }
                for (el, &n) in &have {
                    if !self.formula.contains_key(el) {
                        delta += n;
                    }
                }
                (-(delta as f64) / ISOMER_SCALE).exp()
            }
            _ => {
                let fp = morgan_fingerprint(mol, self.radius, FingerprintMode::Count);
                let sims: Vec<f64> = self.target_fps.iter().map(|t| fp.tanimoto_unchecked(t)).collect();
                match self.family {
                    ObjectiveFamily::Median => (sims[0] * sims[1]).sqrt(),
                    _ => sims[0],
                }
            }
        }
    }
}

/// Desk-scale objective suite mirroring the benchmark families.
pub fn default_objectives() -> Vec<ObjectiveConfig> {
    let mk = |name: &str, family, targets: &[&str], formula: Option<&str>| ObjectiveConfig {
        name: name.into(),
        family,
        targets: targets.iter().map(|s| s.to_string()).collect(),
        formula: formula.map(str::to_string),
        radius: 2,
    };
    vec![
        ObjectiveConfig::celecoxib_rediscovery(),
        // Troglitazone
        mk(
            "troglitazone_rediscovery",
            ObjectiveFamily::Rediscovery,
            &["CC1=C(C)C2=C(CCC(C)(COC3=CC=C(CC4SC(=O)NC4=O)C=C3)O2)C(C)=C1O"],
            None,
        ),
        // Aripiprazole
        mk(
            "aripiprazole_similarity",
            ObjectiveFamily::Similarity,
            &["ClC1=CC=CC(N2CCN(CCCCOC3=CC4=C(CCC(=O)N4)C=C3)CC2)=C1Cl"],
            None,
        ),
        // Camphor and menthol
        mk(
            "median1",
            ObjectiveFamily::Median,
            &["CC1(C)C2CCC1(C)C(=O)C2", "CC(C)C1CCC(C)CC1O"],
            None,
        ),
        mk("isomers_c7h8n2o2", ObjectiveFamily::Isomer, &[], Some("C7H8N2O2")),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Init,
    Bo,
    Fill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub call_index: usize,
    pub key: String,
    pub smiles: String,
    pub score: f64,
    pub provenance: Provenance,
    pub top10_mean: f64,
}

/// Ordered log of distinct oracle evaluations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunHistory {
    pub entries: Vec<HistoryEntry>,
}

impl RunHistory {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    pub fn best(&self) -> Option<&HistoryEntry> {
        self.entries.iter().max_by(|a, b| a.score.total_cmp(&b.score))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("history entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::input(format!("history line {}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunHistory { entries })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

/// Running mean of the k largest values seen so far.
#[derive(Debug, Clone)]
pub struct TopK {
    k: usize,
    /// Descending.
    best: Vec<f64>,
}

impl TopK {
    pub fn new(k: usize) -> Self {
        assert!(k > 0);
        TopK {
            k,
            best: Vec::with_capacity(k + 1),
        }
    }

    pub fn push(&mut self, x: f64) {
        let pos = self.best.partition_point(|&b| b >= x);
        if pos < self.k {
            self.best.insert(pos, x);
            self.best.truncate(self.k);
        }
    }

    /// Mean of the retained values, accumulated as offsets from the largest
    /// so that equal values give that value bit for bit.
    pub fn mean(&self) -> f64 {
        match self.best.first() {
            None => 0.0,
            Some(&top) => top + self.best.iter().map(|b| b - top).sum::<f64>() / self.best.len() as f64,
        }
    }
}

/// Budgeted, caching wrapper around the true objective.
#[derive(Debug, Clone)]
pub struct OracleState {
    cache: HashMap<String, f64>,
    budget: usize,
    history: RunHistory,
    top10: TopK,
}

impl OracleState {
    pub fn new(budget: usize) -> Self {
        OracleState {
            cache: HashMap::new(),
            budget,
            history: RunHistory::default(),
            top10: TopK::new(10),
        }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn calls_used(&self) -> usize {
        self.history.len()
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.calls_used()
    }

    pub fn history(&self) -> &RunHistory {
        &self.history
    }

    pub fn into_history(self) -> RunHistory {
        self.history
    }

    pub fn cached(&self, key: &str) -> Option<f64> {
        self.cache.get(key).copied()
    }

    pub fn best_score(&self) -> Option<f64> {
        self.history.entries.iter().map(|e| e.score).max_by(f64::total_cmp)
    }

    /// Score `mol`, consuming one budget unit unless its key is cached.
    /// Returns the score and whether it was a cache hit.
    pub fn call(&mut self, spec: &ObjectiveSpec, mol: &Molecule, provenance: Provenance) -> Result<(f64, bool)> {
        let key = mol.canonical_key();
        self.call_keyed(spec, mol, key, provenance)
    }

    /// [`call`](Self::call) with a precomputed canonical key.
    pub fn call_keyed(
        &mut self,
        spec: &ObjectiveSpec,
        mol: &Molecule,
        key: String,
        provenance: Provenance,
    ) -> Result<(f64, bool)> {
        if let Some(&s) = self.cache.get(&key) {
            return Ok((s, true));
        }
        if self.calls_used() >= self.budget {
            return Err(Error::BudgetExhausted { budget: self.budget });
        }
        let score = spec.evaluate(mol);
        self.top10.push(score);
        self.cache.insert(key.clone(), score);
        self.history.entries.push(HistoryEntry {
            call_index: self.history.len() + 1,
            key,
            smiles: mol.to_smiles(),
            score,
            provenance,
            top10_mean: self.top10.mean(),
        });
        Ok((score, false))
    }
}

/// Budget-normalized area under the running top-k mean curve (rectangle
/// rule), carrying the last value out to `budget`.
pub fn auc_topk_scores(scores: &[f64], k: usize, budget: usize) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::input("AUC of an empty history"));
    }
    if k == 0 {
        return Err(Error::input("k must be >= 1"));
    }
    if budget < scores.len() {
        return Err(Error::input(format!("budget {budget} below {} calls", scores.len())));
    }
    if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::input(format!("score {bad} outside [0, 1]")));
    }
    let mut top = TopK::new(k);
    let curve: Vec<f64> = scores
        .iter()
        .map(|&s| {
            top.push(s);
            top.mean()
        })
        .collect();
    // Offsets from the final value; the carried tail contributes zero.
    let last = *curve.last().unwrap();
    Ok(last + curve.iter().map(|m| m - last).sum::<f64>() / budget as f64)
}

pub fn auc_topk(history: &RunHistory, k: usize, budget: usize) -> Result<f64> {
    auc_topk_scores(&history.scores(), k, budget)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub objective: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub sum: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-objective mean and sample std of per-seed AUCs, plus the sum of
/// means.
pub fn summarize_runs(per_seed: &BTreeMap<String, Vec<f64>>) -> Result<SummaryTable> {
    let mut rows = Vec::new();
    for (name, aucs) in per_seed {
        if aucs.is_empty() {
            return Err(Error::input(format!("objective {name} has no runs")));
        }
        let (mean, std) = mean_std(aucs);
        rows.push(SummaryRow {
            objective: name.clone(),
            mean,
            std,
            n: aucs.len(),
        });
    }
    let sum = rows.iter().map(|r| r.mean).sum();
    Ok(SummaryTable { rows, sum })
}

impl SummaryTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("objective\tmean\tstd\tn\n");
        for r in &self.rows {
            writeln!(out, "{}\t{}\t{}\t{}", r.objective, r.mean, r.std, r.n).unwrap();
        }
        writeln!(out, "Sum\t{}\t\t", self.sum).unwrap();
        out
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.objective.len())
            .chain([9])
            .max()
            .unwrap();
        let mut out = String::new();
        writeln!(out, "{:<width$}  {:>16}  {:>3}", "Objective", "AUC Top-10", "n").unwrap();
        for r in &self.rows {
            writeln!(out, "{:<width$}  {:>7.3} ± {:<6.3}  {:>3}", r.objective, r.mean, r.std, r.n).unwrap();
        }
        writeln!(out, "{:<width$}  {:>7.3}", "Sum", self.sum).unwrap();
        out
    }
}
