use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::Molecule;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FingerprintMode {
    Binary,
    Count,
}

impl std::str::FromStr for FingerprintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(FingerprintMode::Binary),
            "count" => Ok(FingerprintMode::Count),
            other => Err(Error::input(format!("unknown fingerprint mode {other:?}"))),
        }
    }
}

/// Sparse multiset of circular-environment identifiers.
///
/// Entries are sorted by identifier, so similarity is a linear merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    entries: Vec<(u64, u32)>,
    mode: FingerprintMode,
    radius: u32,
}

impl Fingerprint {
    /// Build from arbitrary (id, count) pairs; duplicates are summed and
    /// zero counts dropped. Binary mode clamps every count to 1.
    pub fn from_counts(pairs: impl IntoIterator<Item = (u64, u32)>, mode: FingerprintMode, radius: u32) -> Self {
        let mut entries: Vec<(u64, u32)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by_key(|&(id, _)| id);
        entries.dedup_by(|next, acc| {
            if next.0 == acc.0 {
                acc.1 += next.1;
                true
            } else {
                false
            }
        });
        if mode == FingerprintMode::Binary {
            for e in &mut entries {
                e.1 = 1;
            }
        }
        Fingerprint { entries, mode, radius }
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn mode(&self) -> FingerprintMode {
        self.mode
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total multiplicity.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn to_binary(&self) -> Fingerprint {
        Fingerprint::from_counts(self.entries.iter().copied(), FingerprintMode::Binary, self.radius)
    }

    /// Fold identifiers modulo `nbits`, for diagnostics only (adds collisions).
    pub fn folded(&self, nbits: u64) -> Fingerprint {
        assert!(nbits > 0);
        Fingerprint::from_counts(
            self.entries.iter().map(|&(id, c)| (id % nbits, c)),
            self.mode,
            self.radius,
        )
    }

    /// Min/max sums over the union of identifiers.
    fn min_max_sums(&self, other: &Fingerprint) -> (u64, u64) {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let (mut lo, mut hi) = (0u64, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    hi += a[i].1 as u64;
                    i += 1;
                }
                Ordering::Greater => {
                    hi += b[j].1 as u64;
                    j += 1;
                }
                Ordering::Equal => {
                    lo += a[i].1.min(b[j].1) as u64;
                    hi += a[i].1.max(b[j].1) as u64;
                    i += 1;
                    j += 1;
                }
            }
        }
        hi += a[i..].iter().map(|e| e.1 as u64).sum::<u64>();
        hi += b[j..].iter().map(|e| e.1 as u64).sum::<u64>();
        (lo, hi)
    }

    /// Tanimoto similarity without compatibility checks; two empty
    /// fingerprints count as identical.
    pub(crate) fn tanimoto_unchecked(&self, other: &Fingerprint) -> f64 {
        let (lo, hi) = self.min_max_sums(other);
        if hi == 0 {
            1.0
        } else {
            lo as f64 / hi as f64
        }
    }
}

/// Jaccard similarity for binary fingerprints, min/max ratio for counts.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64> {
    if a.mode != b.mode || a.radius != b.radius {
        return Err(Error::input(format!(
            "fingerprint mismatch: {:?}/r{} vs {:?}/r{}",
            a.mode, a.radius, b.mode, b.radius
        )));
    }
    Ok(a.tanimoto_unchecked(b))
}

const HASH_SEED: u64 = 0x6d6f_6c62_6f5f_6670;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_words(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = HASH_SEED;
    for w in words {
        h = mix64(h.rotate_left(23) ^ w.wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    mix64(h)
}

/// Morgan-style circular fingerprint.
///
/// Round 0 hashes (atomic number, heavy degree, total H, charge, ring flag,
/// aromatic flag); round `r` hashes `r`, the atom's previous identifier and
/// its sorted (bond code, neighbor identifier) list. Every identifier from
/// every round is kept, without de-duplicating environments that cover the
/// same bonds.
pub fn morgan_fingerprint(mol: &Molecule, radius: u32, mode: FingerprintMode) -> Fingerprint {
    assert!(radius <= 8, "fingerprint radius {radius} exceeds 8");
    let n = mol.atom_count();
    let mut ids: Vec<u64> = mol
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            hash_words([
                a.element.atomic_number() as u64,
                mol.heavy_degree(i) as u64,
                a.hydrogens as u64,
                a.charge as i64 as u64,
                a.in_ring as u64,
                a.aromatic as u64,
            ])
        })
        .collect();
    let mut all = Vec::with_capacity(n * (radius as usize + 1));
    all.extend_from_slice(&ids);
    let mut env: Vec<(u8, u64)> = Vec::new();
    for r in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                env.clear();
                env.extend(
                    mol.neighbors(i)
                        .iter()
                        .map(|&(j, bi)| (mol.bonds()[bi].order.code(), ids[j])),
                );
                env.sort_unstable();
                let head = [r as u64, ids[i], env.len() as u64];
                hash_words(
                    head.into_iter()
                        .chain(env.iter().flat_map(|&(code, id)| [code as u64, id])),
                )
            })
            .collect();
        all.extend_from_slice(&next);
        ids = next;
    }
    Fingerprint::from_counts(all.into_iter().map(|id| (id, 1)), mode, radius)
}

#[cfg(test)]
mod tests {
    use super::super::parse_smiles;
    use super::*;

    fn fp(smi: &str, r: u32, mode: FingerprintMode) -> Fingerprint {
        morgan_fingerprint(&parse_smiles(smi).unwrap(), r, mode)
    }

    #[test]
    fn single_carbon_radius_zero() {
        let f = fp("C", 0, FingerprintMode::Count);
        assert_eq!(f.entries().len(), 1);
        assert_eq!(f.entries()[0].1, 1);
    }

    #[test]
    fn hand_evaluated_minmax() {
        let a = Fingerprint::from_counts([(1, 2), (2, 1)], FingerprintMode::Count, 2);
        let b = Fingerprint::from_counts([(1, 1), (3, 3)], FingerprintMode::Count, 2);
        // min-sum 1, max-sum 2 + 1 + 3 = 6
        assert!((tanimoto(&a, &b).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let disjoint = Fingerprint::from_counts([(9, 4)], FingerprintMode::Count, 2);
        assert_eq!(tanimoto(&a, &disjoint).unwrap(), 0.0);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn empty_convention() {
        let e = Fingerprint::from_counts([], FingerprintMode::Binary, 2);
        let x = Fingerprint::from_counts([(5, 1)], FingerprintMode::Binary, 2);
        assert_eq!(tanimoto(&e, &e).unwrap(), 1.0);
        assert_eq!(tanimoto(&e, &x).unwrap(), 0.0);
    }

    #[test]
    fn mode_and_radius_mismatch_rejected() {
        let a = fp("CCO", 2, FingerprintMode::Count);
        assert!(tanimoto(&a, &fp("CCO", 2, FingerprintMode::Binary)).is_err());
        assert!(tanimoto(&a, &fp("CCO", 1, FingerprintMode::Count)).is_err());
    }

    #[test]
    fn alkane_pair_is_distinguished_by_counts() {
        let p = fp("CCCCC", 2, FingerprintMode::Count);
        let i = fp(&"C".repeat(20), 2, FingerprintMode::Count);
        let tc = tanimoto(&p, &i).unwrap();
        let tb = tanimoto(&p.to_binary(), &i.to_binary()).unwrap();
        assert!(tc < 1.0);
        assert!(tb >= tc);
    }

    #[test]
    fn binary_mode_has_unit_counts() {
        let f = fp("CCCCCC", 2, FingerprintMode::Binary);
        assert!(f.entries().iter().all(|e| e.1 == 1));
        assert!(f.total() < fp("CCCCCC", 2, FingerprintMode::Count).total());
    }

    #[test]
    fn folding_keeps_mass() {
        let f = fp("c1ccccc1CCN", 2, FingerprintMode::Count);
        let folded = f.folded(64);
        assert_eq!(folded.total(), f.total());
        assert!(folded.entries().iter().all(|e| e.0 < 64));
    }
}
