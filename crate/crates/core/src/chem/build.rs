use std::collections::HashSet;

use super::element::Element;
use super::smiles::{SmilesError, SmilesErrorKind};
use super::{Atom, Bond, BondOrder, Molecule};

#[derive(Debug, Clone)]
pub(crate) struct RawAtom {
    pub element: Element,
    pub charge: i8,
    /// `Some` for bracket atoms (hydrogens exactly as written).
    pub hydrogens: Option<u8>,
    pub aromatic: bool,
    /// Source position, for error reporting.
    pub pos: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

#[derive(Debug, Clone)]
pub(crate) struct RawBond {
    pub a: usize,
    pub b: usize,
    pub order: RawOrder,
}

/// Validate and normalize a raw graph into a [`Molecule`].
pub(crate) fn build_molecule(atoms: Vec<RawAtom>, bonds: Vec<RawBond>) -> Result<Molecule, SmilesError> {
    let n = atoms.len();
    let err_at = |atom: usize, kind| Err(SmilesError::new(atoms[atom].pos, kind));

    let mut seen = HashSet::with_capacity(bonds.len());
    for b in &bonds {
        if b.a == b.b {
            return err_at(b.b, SmilesErrorKind::SelfBond);
        }
        if !seen.insert((b.a.min(b.b), b.a.max(b.b))) {
            return err_at(b.a.max(b.b), SmilesErrorKind::DuplicateBond);
        }
        if b.order == RawOrder::Aromatic && !(atoms[b.a].aromatic && atoms[b.b].aromatic) {
            return err_at(b.b, SmilesErrorKind::Unsupported("aromatic bond to a non-aromatic atom"));
        }
    }

    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, b) in bonds.iter().enumerate() {
        adjacency[b.a].push((b.b, i));
        adjacency[b.b].push((b.a, i));
    }

    let kekule = kekulize(&atoms, &bonds, &adjacency)?;

    // Hydrogens and valence.
    let mut hydrogens = vec![0u8; n];
    for (i, atom) in atoms.iter().enumerate() {
        let bond_sum: u16 = adjacency[i].iter().map(|&(_, bi)| kekule[bi] as u16).sum();
        let bond_sum = bond_sum.min(255) as u8;
        let element = atom.element;
        match atom.hydrogens {
            Some(h) => {
                let total = bond_sum.saturating_add(h);
                if !element.valences(atom.charge).contains(&total) {
                    return err_at(i, SmilesErrorKind::Valence { element, total });
                }
                hydrogens[i] = h;
            }
            None => match element.default_valence(atom.charge, bond_sum) {
                Some(v) => hydrogens[i] = v - bond_sum,
                None => {
                    return err_at(i, SmilesErrorKind::Valence { element, total: bond_sum });
                }
            },
        }
    }

    let ring_bond = ring_bonds(n, &bonds, &adjacency);
    let mut in_ring = vec![false; n];
    for (b, _) in bonds.iter().zip(&ring_bond).filter(|(_, &r)| r) {
        in_ring[b.a] = true;
        in_ring[b.b] = true;
    }

    let (atom_arom, bond_arom) = perceive_aromaticity(&atoms, &bonds, &kekule, &ring_bond, &adjacency, &hydrogens);

    let out_atoms = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| Atom {
            element: a.element,
            charge: a.charge,
            hydrogens: hydrogens[i],
            explicit_h: a.hydrogens.is_some(),
            aromatic: atom_arom[i],
            in_ring: in_ring[i],
        })
        .collect();
    let out_bonds = bonds
        .iter()
        .enumerate()
        .map(|(i, b)| Bond {
            a: b.a,
            b: b.b,
            order: if bond_arom[i] {
                BondOrder::Aromatic
            } else {
                match kekule[i] {
                    1 => BondOrder::Single,
                    2 => BondOrder::Double,
                    _ => BondOrder::Triple,
                }
            },
            kekule: kekule[i],
            in_ring: ring_bond[i],
        })
        .collect();
    Ok(Molecule::from_parts(out_atoms, out_bonds))
}

/// Assign localized orders to aromatic bonds by a perfect matching over the
/// aromatic atoms that still need a double bond.
fn kekulize(atoms: &[RawAtom], bonds: &[RawBond], adjacency: &[Vec<(usize, usize)>]) -> Result<Vec<u8>, SmilesError> {
    let mut kekule: Vec<u8> = bonds
        .iter()
        .map(|b| match b.order {
            RawOrder::Single | RawOrder::Aromatic => 1,
            RawOrder::Double => 2,
            RawOrder::Triple => 3,
        })
        .collect();
    if !bonds.iter().any(|b| b.order == RawOrder::Aromatic) {
        return Ok(kekule);
    }

    let needs: Vec<bool> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if !a.aromatic {
                return false;
            }
            let base: u16 = adjacency[i].iter().map(|&(_, bi)| kekule[bi] as u16).sum::<u16>()
                + a.hydrogens.unwrap_or(0) as u16;
            let min_valence = a.element.valences(a.charge).first().copied().unwrap_or(0) as u16;
            base + 1 <= min_valence
        })
        .collect();

    let mut partner: Vec<Option<usize>> = vec![None; atoms.len()];
    let mut budget = 200_000usize;
    if !match_atoms(&needs, bonds, adjacency, &mut partner, &mut budget) {
        let first = (0..atoms.len()).find(|&i| needs[i] && partner[i].is_none()).unwrap_or(0);
        return Err(SmilesError::new(atoms[first].pos, SmilesErrorKind::Kekulization));
    }
    for (i, p) in partner.iter().enumerate() {
        if let Some(bi) = *p {
            if bonds[bi].a == i {
                kekule[bi] = 2;
            }
        }
    }
    Ok(kekule)
}

fn match_atoms(
    needs: &[bool],
    bonds: &[RawBond],
    adjacency: &[Vec<(usize, usize)>],
    partner: &mut [Option<usize>],
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let options = |i: usize, partner: &[Option<usize>]| {
        adjacency[i]
            .iter()
            .filter(|&&(j, bi)| needs[j] && partner[j].is_none() && bonds[bi].order == RawOrder::Aromatic)
            .count()
    };
    // Most constrained unmatched atom first.
    let mut pick: Option<(usize, usize)> = None;
    for i in 0..needs.len() {
        if needs[i] && partner[i].is_none() {
            let k = options(i, partner);
            if k == 0 {
                return false;
            }
            if pick.is_none_or(|(_, best)| k < best) {
                pick = Some((i, k));
            }
        }
    }
    let Some((i, _)) = pick else {
        return true;
    };
    for &(j, bi) in &adjacency[i] {
        if needs[j] && partner[j].is_none() && bonds[bi].order == RawOrder::Aromatic {
            partner[i] = Some(bi);
            partner[j] = Some(bi);
            if match_atoms(needs, bonds, adjacency, partner, budget) {
                return true;
            }
            partner[i] = None;
            partner[j] = None;
        }
    }
    false
}

/// Bonds lying on at least one cycle (non-bridges).
fn ring_bonds(n: usize, bonds: &[RawBond], adjacency: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let mut in_ring = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    // Iterative DFS: (atom, parent bond, next neighbor index).
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, parent_bond, ref mut next)) = stack.last_mut() {
            if *next < adjacency[v].len() {
                let (w, bi) = adjacency[v][*next];
                *next += 1;
                if Some(bi) == parent_bond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, Some(bi), 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let (Some(bi), Some(&(u, _, _))) = (parent_bond, stack.last()) {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        in_ring[bi] = false;
                    }
                }
            }
        }
    }
    debug_assert_eq!(in_ring.len(), bonds.len());
    in_ring
}

/// Simple cycles of length 5 or 6 through ring bonds, as (atoms, bonds).
fn small_cycles(n: usize, ring_bond: &[bool], adjacency: &[Vec<(usize, usize)>]) -> Vec<(Vec<usize>, Vec<usize>)> {
    fn extend(
        start: usize,
        path: &mut Vec<usize>,
        path_bonds: &mut Vec<usize>,
        ring_bond: &[bool],
        adjacency: &[Vec<(usize, usize)>],
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        let v = *path.last().unwrap();
        for &(w, bi) in &adjacency[v] {
            if !ring_bond[bi] {
                continue;
            }
            if w == start {
                // Keep one of the two traversal directions.
                if (path.len() == 5 || path.len() == 6) && path[1] < v {
                    let mut bonds = path_bonds.clone();
                    bonds.push(bi);
                    out.push((path.clone(), bonds));
                }
            } else if w > start && path.len() < 6 && !path.contains(&w) {
                path.push(w);
                path_bonds.push(bi);
                extend(start, path, path_bonds, ring_bond, adjacency, out);
                path.pop();
                path_bonds.pop();
            }
        }
    }
    let mut out = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut path_bonds = Vec::new();
        extend(start, &mut path, &mut path_bonds, ring_bond, adjacency, &mut out);
    }
    out
}

/// 5/6-ring rule over the Kekulé structure. A six-ring is aromatic when every
/// atom carries an in-ring double bond or is already aromatic; a five-ring
/// additionally allows exactly one lone-pair donor (neutral N, O or S with
/// only single bonds). Applied until no ring changes, so fused systems whose
/// shared atoms were aromatized by a neighbor ring are picked up.
fn perceive_aromaticity(
    atoms: &[RawAtom],
    bonds: &[RawBond],
    kekule: &[u8],
    ring_bond: &[bool],
    adjacency: &[Vec<(usize, usize)>],
    hydrogens: &[u8],
) -> (Vec<bool>, Vec<bool>) {
    let n = atoms.len();
    let mut atom_arom = vec![false; n];
    let mut bond_arom = vec![false; bonds.len()];
    if !ring_bond.iter().any(|&r| r) {
        return (atom_arom, bond_arom);
    }
    let cycles = small_cycles(n, ring_bond, adjacency);
    let mut done = vec![false; cycles.len()];

    let is_donor = |i: usize| {
        let a = &atoms[i];
        let all_single = adjacency[i].iter().all(|&(_, bi)| kekule[bi] == 1);
        let total: u16 = adjacency[i].len() as u16 + hydrogens[i] as u16;
        a.charge == 0
            && all_single
            && match a.element {
                Element::N => total == 3,
                Element::O | Element::S => total == 2,
                _ => false,
            }
    };

    loop {
        let mut changed = false;
        for (ci, (ring_atoms, ring_bonds)) in cycles.iter().enumerate() {
            if done[ci] || ring_bonds.iter().any(|&bi| kekule[bi] == 3) {
                continue;
            }
            let mut pi = 0;
            let mut donors = 0;
            for &a in ring_atoms {
                let in_ring_double = ring_bonds
                    .iter()
                    .any(|&bi| kekule[bi] == 2 && (bonds[bi].a == a || bonds[bi].b == a));
                if in_ring_double || atom_arom[a] {
                    pi += 1;
                } else if is_donor(a) {
                    donors += 1;
                }
            }
            let aromatic = match ring_atoms.len() {
                6 => pi == 6,
                5 => pi == 4 && donors == 1,
                _ => false,
            };
            if aromatic {
                done[ci] = true;
                changed = true;
                for &a in ring_atoms {
                    atom_arom[a] = true;
                }
                for &bi in ring_bonds {
                    bond_arom[bi] = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (atom_arom, bond_arom)
}

/// Heavy atom of an [`EditMol`]; hydrogens are always recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditAtom {
    pub element: Element,
    pub charge: i8,
}

/// Mutable Kekulé graph used by graph operators. Converting back to a
/// [`Molecule`] re-runs the full sanitization, so any edit that breaks the
/// valence table or connectivity is rejected there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditMol {
    pub atoms: Vec<EditAtom>,
    /// (atom, atom, order in 1..=3)
    pub bonds: Vec<(usize, usize, u8)>,
}

impl EditMol {
    pub fn from_molecule(mol: &Molecule) -> EditMol {
        EditMol {
            atoms: mol
                .atoms()
                .iter()
                .map(|a| EditAtom {
                    element: a.element,
                    charge: a.charge,
                })
                .collect(),
            bonds: mol.bonds().iter().map(|b| (b.a, b.b, b.kekule)).collect(),
        }
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.bonds.iter().filter(|b| b.0 == atom || b.1 == atom).count()
    }

    pub fn bond_sum(&self, atom: usize) -> u8 {
        self.bonds
            .iter()
            .filter(|b| b.0 == atom || b.1 == atom)
            .map(|b| b.2)
            .sum()
    }

    pub fn add_atom(&mut self, atom: EditAtom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    /// Remove an atom and its bonds, shifting later indices down.
    pub fn remove_atom(&mut self, atom: usize) {
        self.atoms.remove(atom);
        self.bonds.retain(|b| b.0 != atom && b.1 != atom);
        for b in &mut self.bonds {
            if b.0 > atom {
                b.0 -= 1;
            }
            if b.1 > atom {
                b.1 -= 1;
            }
        }
    }

    /// Atoms reachable from `start` without crossing bond `skip`.
    pub fn component(&self, start: usize, skip: Option<usize>) -> Vec<usize> {
        let mut seen = vec![false; self.atoms.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for (bi, b) in self.bonds.iter().enumerate() {
                if Some(bi) == skip {
                    continue;
                }
                let w = if b.0 == v {
                    b.1
                } else if b.1 == v {
                    b.0
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..self.atoms.len()).filter(|&i| seen[i]).collect()
    }

    /// Induced subgraph on `keep` (sorted), with the old→new index map.
    pub fn subgraph(&self, keep: &[usize]) -> (EditMol, Vec<Option<usize>>) {
        let mut map = vec![None; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = Some(new);
        }
        let atoms = keep.iter().map(|&i| self.atoms[i]).collect();
        let bonds = self
            .bonds
            .iter()
            .filter_map(|&(a, b, o)| Some((map[a]?, map[b]?, o)))
            .collect();
        (EditMol { atoms, bonds }, map)
    }

    /// Disjoint union; returns the index offset of `other`'s atoms.
    pub fn append(&mut self, other: &EditMol) -> usize {
        let offset = self.atoms.len();
        self.atoms.extend_from_slice(&other.atoms);
        self.bonds
            .extend(other.bonds.iter().map(|&(a, b, o)| (a + offset, b + offset, o)));
        offset
    }

    pub fn to_molecule(&self) -> Result<Molecule, SmilesError> {
        if self.atoms.is_empty() {
            return Err(SmilesError::new(0, SmilesErrorKind::Empty));
        }
        if self.component(0, None).len() != self.atoms.len() {
            return Err(SmilesError::new(0, SmilesErrorKind::Disconnected));
        }
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| RawAtom {
                element: a.element,
                charge: a.charge,
                hydrogens: None,
                aromatic: false,
                pos: i,
            })
            .collect();
        let mut bonds = Vec::with_capacity(self.bonds.len());
        for &(a, b, o) in &self.bonds {
            let order = match o {
                1 => RawOrder::Single,
                2 => RawOrder::Double,
                3 => RawOrder::Triple,
                _ => return Err(SmilesError::new(a, SmilesErrorKind::Unsupported("bond order"))),
            };
            bonds.push(RawBond { a, b, order });
        }
        build_molecule(atoms, bonds)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_smiles;
    use super::*;

    #[test]
    fn ring_flags_follow_cycle_space() {
        let m = parse_smiles("CC1CCC(CC1)C(C)C").unwrap();
        let flags: Vec<bool> = m.atoms().iter().map(|a| a.in_ring).collect();
        assert_eq!(flags, vec![false, true, true, true, true, true, true, false, false, false]);
        // Biphenyl: the linking bond is not a ring bond.
        let m = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        let linker = m.bonds().iter().find(|b| b.a == 5 && b.b == 6).unwrap();
        assert!(!linker.in_ring);
        assert_eq!(linker.order, BondOrder::Single);
    }

    #[test]
    fn kekule_and_aromatic_forms_agree() {
        for (kek, arom) in [
            ("C1=CC=CC=C1", "c1ccccc1"),
            ("CC1=CC=C(C=C1)O", "Cc1ccc(O)cc1"),
            ("C1=CC=C2C=CC=CC2=C1", "c1ccc2ccccc2c1"),
            ("C1=CNC=C1", "c1cc[nH]c1"),
            ("C1=CC2=C(N1)C=CC=C2", "c1cc2ccccc2[nH]1"),
            ("C1=CSC=C1", "c1ccsc1"),
            ("C1=CC=NC=C1", "c1ccncc1"),
            ("CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "Cn1cnc2c1c(=O)n(C)c(=O)n2C"),
        ] {
            let a = parse_smiles(kek).unwrap();
            let b = parse_smiles(arom).unwrap();
            assert_eq!(a.canonical_key(), b.canonical_key(), "{kek} vs {arom}");
        }
    }

    #[test]
    fn non_aromatic_rings_stay_localized() {
        let m = parse_smiles("C1=CCCC=C1").unwrap();
        assert!(m.atoms().iter().all(|a| !a.aromatic));
        let m = parse_smiles("C1=CC=CC1").unwrap();
        assert!(m.atoms().iter().all(|a| !a.aromatic));
        // Exocyclic carbonyl prevents the 6-ring rule.
        let m = parse_smiles("O=C1C=CC(=O)C=C1").unwrap();
        assert!(m.atoms().iter().all(|a| !a.aromatic));
    }

    #[test]
    fn edit_roundtrip() {
        let m = parse_smiles("c1ccccc1C(=O)[O-]").unwrap();
        let e = m.to_edit();
        let back = e.to_molecule().unwrap();
        assert_eq!(m.canonical_key(), back.canonical_key());
    }

    #[test]
    fn edit_rejects_disconnected() {
        let mut e = parse_smiles("CCO").unwrap().to_edit();
        e.bonds.pop();
        assert_eq!(e.to_molecule().unwrap_err().kind, SmilesErrorKind::Disconnected);
    }
}
