//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use molbo::chem::{parse_smiles, Element, Fingerprint, FingerprintMode, Molecule};
use molbo::gp::{gram_matrix, GpConfig, KernelInput};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub const CELECOXIB: &str = "CC1=CC=C(C=C1)C1=CC(=NN1C1=CC=C(C=C1)S(N)(=O)=O)C(F)(F)F";
pub const CELECOXIB_ANALOGUE: &str = "Cc1ccc(-c2cc(C(F)(F)F)nn2-c2ccc(-n3nc(C(F)(F)F)cc3-c3ccc(-n4nc(C(F)(F)F)cc4-c4ccc(S(N)(=O)=O)cc4)cc3)cc2)cc1";
pub const PENTANE: &str = "CCCCC";
pub const ICOSANE: &str = "CCCCCCCCCCCCCCCCCCCC";

/// Smiles used across the chemistry property tests.
pub const CORPUS: &[&str] = &[
    CELECOXIB,
    CELECOXIB_ANALOGUE,
    PENTANE,
    ICOSANE,
    "CC(=O)Oc1ccccc1C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "c1ccc2c(c1)ccc1ccccc12",
    "NCCc1c[nH]c2ccc(O)cc12",
    "CC1=C(C)C2=C(CCC(C)(COC3=CC=C(CC4SC(=O)NC4=O)C=C3)O2)C(C)=C1O",
    "OC(=O)C1=CN(C2CC2)c2cc(N3CCNCC3)c(F)cc2C1=O",
    "CC1=CN(C2CC(N=[N+]=[N-])C(CO)O2)C(=O)NC1=O",
    "Clc1ccc(COC(Cn2ccnc2)c2ccc(Cl)cc2Cl)cc1",
    "CC1(C)C2CCC1(C)C(=O)C2",
    "c1ccsc1",
    "C1CC2CCC1CC2",
    "C[N+](C)(C)C",
    "O=P(O)(O)OCC",
    "OB(O)c1ccccc1",
    "BrC(Br)CI",
    "C#CC(=O)[O-]",
];

pub fn mol(s: &str) -> Molecule {
    parse_smiles(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Dense direct-inverse GP oracle: posterior mean, variance at each query
/// and the log marginal likelihood, all from `(K + jitter·I)⁻¹` and its
/// determinant via LU.
pub fn dense_gp_oracle<X: KernelInput>(
    inputs: &[X],
    labels: &[f64],
    queries: &[X],
    cfg: &GpConfig,
    jitter: f64,
) -> (Vec<(f64, f64)>, f64) {
    let n = inputs.len();
    let mut k = gram_matrix(inputs, &cfg.kernel).unwrap();
    for i in 0..n {
        k[(i, i)] += jitter;
    }
    let lu = k.clone().lu();
    let kinv: DMatrix<f64> = lu.try_inverse().expect("invertible");
    let det = k.determinant();
    let r = DVector::from_iterator(n, labels.iter().map(|y| y - cfg.prior_mean));
    let alpha = &kinv * &r;
    let lml = -0.5 * r.dot(&alpha) - 0.5 * det.ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    let preds = queries
        .iter()
        .map(|q| {
            let kq = DVector::from_iterator(n, inputs.iter().map(|x| q.kernel(x, &cfg.kernel).unwrap()));
            let mean = cfg.prior_mean + kq.dot(&alpha);
            let var = q.kernel(q, &cfg.kernel).unwrap() - kq.dot(&(&kinv * &kq));
            (mean, var.max(0.0))
        })
        .collect();
    (preds, lml)
}

pub fn random_count_fp<R: Rng>(rng: &mut R, ids: u64, max_count: u32, mode: FingerprintMode) -> Fingerprint {
    let n = rng.random_range(1..=12);
    Fingerprint::from_counts(
        (0..n).map(|_| (rng.random_range(0..ids), rng.random_range(1..=max_count))),
        mode,
        2,
    )
}

fn allowed_totals(el: Element, charge: i8) -> Vec<i16> {
    let neutral: &[i16] = match el {
        Element::C => &[4],
        Element::N => &[3],
        Element::O => &[2],
        Element::S => &[2, 4, 6],
        Element::P => &[3, 5],
        Element::B => &[3],
        Element::F | Element::Cl | Element::Br | Element::I => &[1],
    };
    let q = charge as i16;
    neutral
        .iter()
        .map(|&v| match el {
            Element::C => v - q.abs(),
            Element::B => v - q,
            _ => v + q,
        })
        .collect()
}

/// Structural invariants recomputed from scratch. Ring flags are checked
/// against a remove-the-bond reachability test.
pub fn check_invariants(m: &Molecule) -> Result<(), String> {
    let n = m.atom_count();
    let mut pairs = std::collections::HashSet::new();
    for b in m.bonds() {
        if b.a == b.b {
            return Err(format!("self bond on {}", b.a));
        }
        if !pairs.insert((b.a.min(b.b), b.a.max(b.b))) {
            return Err(format!("duplicate bond {}-{}", b.a, b.b));
        }
    }
    let reach = |skip: Option<usize>, from: usize, to: usize| {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for (bi, b) in m.bonds().iter().enumerate() {
                if Some(bi) == skip {
                    continue;
                }
                let w = if b.a == v {
                    b.b
                } else if b.b == v {
                    b.a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    };
    for i in 1..n {
        if !reach(None, 0, i) {
            return Err(format!("atom {i} disconnected"));
        }
    }
    for (i, a) in m.atoms().iter().enumerate() {
        let bonds: i16 = m
            .bonds()
            .iter()
            .filter(|b| b.a == i || b.b == i)
            .map(|b| b.kekule as i16)
            .sum();
        let total = bonds + a.hydrogens as i16;
        if !allowed_totals(a.element, a.charge).contains(&total) {
            return Err(format!("atom {i} {:?}{:+} has valence {total}", a.element, a.charge));
        }
    }
    let mut atom_ring = vec![false; n];
    for (bi, b) in m.bonds().iter().enumerate() {
        let cyclic = reach(Some(bi), b.a, b.b);
        if cyclic != b.in_ring {
            return Err(format!("bond {bi} ring flag {} but cyclic {cyclic}", b.in_ring));
        }
        if cyclic {
            atom_ring[b.a] = true;
            atom_ring[b.b] = true;
        }
    }
    for (i, a) in m.atoms().iter().enumerate() {
        if a.in_ring != atom_ring[i] {
            return Err(format!("atom {i} ring flag {}", a.in_ring));
        }
    }
    Ok(())
}

/// [`check_invariants`] under a heavy-atom cap, with a key that survives
/// write → parse.
pub fn check_offspring(m: &Molecule, cap: usize) -> Result<(), String> {
    check_invariants(m)?;
    if m.heavy_atom_count() > cap {
        return Err(format!("{} heavy atoms over cap {cap}", m.heavy_atom_count()));
    }
    let written = m.to_smiles();
    let back = parse_smiles(&written).map_err(|e| format!("{written}: {e}"))?;
    if back.canonical_key() != m.canonical_key() {
        return Err(format!("key changed through {written}"));
    }
    Ok(())
}

/// Monte-Carlo estimates of P[f > y] and E[max(0, f − y)] for f ~ N(m, s²).
pub fn mc_pi_ei<R: Rng>(rng: &mut R, mean: f64, std: f64, y_best: f64, samples: usize) -> (f64, f64) {
    let normal = Normal::new(mean, std).unwrap();
    let (mut hits, mut gain) = (0usize, 0.0);
    for _ in 0..samples {
        let f: f64 = normal.sample(rng);
        if f > y_best {
            hits += 1;
            gain += f - y_best;
        }
    }
    (hits as f64 / samples as f64, gain / samples as f64)
}
