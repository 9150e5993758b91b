//! Molecular graphs: SMILES in and out, canonical keys, formulas and
//! circular fingerprints.
//!
//! Every [`Molecule`] is built through the same sanitization path, whether it
//! comes from the parser or from a graph edit in the GA. That path fills in
//! implicit hydrogens from the valence table, perceives ring membership from
//! the cycle space, and applies the 5/6-ring aromaticity rule to the Kekulé
//! bond orders, so two notations of the same structure end up identical.

mod build;
mod canon;
mod element;
mod fingerprint;
mod smiles;
mod write;

use std::collections::BTreeMap;
use std::path::Path;

pub use build::{EditAtom, EditMol};
pub use canon::canonical_ranks;
pub use element::Element;
pub use fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, FingerprintMode};
pub use smiles::{parse_smiles, SmilesError, SmilesErrorKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Small integer code used by fingerprints and canonical ranking.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    /// Total attached hydrogens (implicit or bracket-specified).
    pub hydrogens: u8,
    /// Hydrogen count was written explicitly in a bracket atom.
    pub explicit_h: bool,
    pub aromatic: bool,
    pub in_ring: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    /// Localized order (1, 2 or 3) underlying an aromatic bond; equals the
    /// plain order for non-aromatic bonds.
    pub kekule: u8,
    pub in_ring: bool,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// A single-component molecular graph with hydrogens held as atom counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// Per atom: (neighbor, bond index).
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Molecule {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Element counts including hydrogen, keyed by element symbol.
    pub fn molecular_formula(&self) -> BTreeMap<String, u32> {
        let mut formula = BTreeMap::new();
        let mut hydrogens = 0u32;
        for atom in &self.atoms {
            *formula.entry(atom.element.symbol().to_string()).or_insert(0) += 1;
            hydrogens += atom.hydrogens as u32;
        }
        if hydrogens > 0 {
            formula.insert("H".to_string(), hydrogens);
        }
        formula
    }

    /// Hill-order formula string, e.g. `C17H14F3N3O2S`.
    pub fn formula_string(&self) -> String {
        formula_to_string(&self.molecular_formula())
    }

    pub fn to_smiles(&self) -> String {
        write::write_smiles(self)
    }

    pub fn canonical_key(&self) -> String {
        write::canonical_key(self)
    }

    /// Editable Kekulé view for graph operators.
    pub fn to_edit(&self) -> EditMol {
        EditMol::from_molecule(self)
    }

    /// Reorder atoms so that old atom `i` becomes atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len());
        let mut atoms = self.atoms.clone();
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = self.atoms[old].clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                ..b.clone()
            })
            .collect();
        Molecule::from_parts(atoms, bonds)
    }

    pub(crate) fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Molecule {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, b) in bonds.iter().enumerate() {
            adjacency[b.a].push((b.b, i));
            adjacency[b.b].push((b.a, i));
        }
        Molecule {
            atoms,
            bonds,
            adjacency,
        }
    }
}

impl std::str::FromStr for Molecule {
    type Err = SmilesError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse_smiles(s)
    }
}

pub fn write_smiles(mol: &Molecule) -> String {
    mol.to_smiles()
}

pub fn canonical_key(mol: &Molecule) -> String {
    mol.canonical_key()
}

pub fn formula_to_string(formula: &BTreeMap<String, u32>) -> String {
    let mut out = String::new();
    let mut push = |sym: &str, n: u32| {
        out.push_str(sym);
        if n > 1 {
            out.push_str(&n.to_string());
        }
    };
    for sym in ["C", "H"] {
        if let Some(&n) = formula.get(sym) {
            push(sym, n);
        }
    }
    for (sym, &n) in formula {
        if sym != "C" && sym != "H" {
            push(sym, n);
        }
    }
    out
}

/// Parse a formula such as `C7H8N2O2` into element counts.
pub fn parse_formula(text: &str) -> Result<BTreeMap<String, u32>> {
    let mut formula = BTreeMap::new();
    let chars: Vec<char> = text.trim().chars().collect();
    let mut i = 0;
    if chars.is_empty() {
        return Err(Error::input("empty formula"));
    }
    while i < chars.len() {
        if !chars[i].is_ascii_uppercase() {
            return Err(Error::input(format!("bad formula {text:?} at {i}")));
        }
        let mut sym = chars[i].to_string();
        i += 1;
        while i < chars.len() && chars[i].is_ascii_lowercase() {
            sym.push(chars[i]);
            i += 1;
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let n: u32 = if start == i {
            1
        } else {
            chars[start..i].iter().collect::<String>().parse().unwrap()
        };
        *formula.entry(sym).or_insert(0) += n;
    }
    Ok(formula)
}

/// Read SMILES, one per line; blank lines and `#` comments are skipped.
/// Anything after the first whitespace on a line is treated as a name.
pub fn read_smiles_lines(text: &str) -> std::result::Result<Vec<Molecule>, (usize, SmilesError)> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let smi = line.split_whitespace().next().unwrap_or(line);
        out.push(parse_smiles(smi).map_err(|e| (lineno + 1, e))?);
    }
    Ok(out)
}

pub fn read_smiles_file(path: &Path) -> Result<Vec<Molecule>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_smiles_lines(&text).map_err(|(line, e)| {
        Error::input(format!("{}:{line}: {e}", path.display()))
    })
}
