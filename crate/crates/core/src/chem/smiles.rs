use std::collections::BTreeMap;
use std::fmt;

use super::build::{build_molecule, RawAtom, RawBond, RawOrder};
use super::element::Element;
use super::Molecule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmilesErrorKind {
    Empty,
    UnexpectedChar(char),
    UnbalancedParenthesis,
    UnmatchedRingClosure(u32),
    ConflictingRingBond(u32),
    DanglingBond,
    SelfBond,
    DuplicateBond,
    Unsupported(&'static str),
    UnknownElement(String),
    /// Disconnected (dot-separated) input.
    Disconnected,
    /// No Kekulé assignment exists for the aromatic atoms.
    Kekulization,
    Valence { element: Element, total: u8 },
}

/// Parse failure with the byte offset it was detected at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesError {
    pub position: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    pub(crate) fn new(position: usize, kind: SmilesErrorKind) -> Self {
        SmilesError { position, kind }
    }
}

impl fmt::Display for SmilesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SmilesErrorKind::*;
        write!(f, "SMILES error at position {}: ", self.position)?;
        match &self.kind {
            Empty => write!(f, "empty input"),
            UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            UnbalancedParenthesis => write!(f, "unbalanced parenthesis"),
            UnmatchedRingClosure(n) => write!(f, "ring closure {n} is never closed"),
            ConflictingRingBond(n) => write!(f, "ring closure {n} has conflicting bond symbols"),
            DanglingBond => write!(f, "bond symbol without a following atom"),
            SelfBond => write!(f, "atom bonded to itself"),
            DuplicateBond => write!(f, "duplicate bond between the same atoms"),
            Unsupported(what) => write!(f, "unsupported feature: {what}"),
            UnknownElement(sym) => write!(f, "unsupported element {sym:?}"),
            Disconnected => write!(f, "disconnected structures are not supported"),
            Kekulization => write!(f, "aromatic system cannot be kekulized"),
            Valence { element, total } => {
                write!(f, "valence {total} is not allowed for {element}")
            }
        }
    }
}

impl std::error::Error for SmilesError {}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<RawAtom>,
    bonds: Vec<RawBond>,
    prev: Option<usize>,
    branches: Vec<(Option<usize>, usize)>,
    pending: Option<(RawOrder, usize)>,
    rings: BTreeMap<u32, (usize, Option<RawOrder>, usize)>,
}

/// Parse a single-component SMILES string.
///
/// Supports the organic subset, lowercase aromatics, bracket atoms with
/// hydrogen count and charge, branches, ring closures (`1`..`9`, `%nn`) and
/// the bond symbols `- = # :`. Stereo, isotopes, wildcards and `.` are
/// rejected.
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    if text.trim().is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::Empty));
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        branches: Vec::new(),
        pending: None,
        rings: BTreeMap::new(),
    };
    p.run()?;
    build_molecule(p.atoms, p.bonds)
}

impl Parser<'_> {
    fn err<T>(&self, kind: SmilesErrorKind) -> Result<T, SmilesError> {
        Err(SmilesError::new(self.pos, kind))
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    if self.prev.is_none() || self.pending.is_some() {
                        return self.err(SmilesErrorKind::UnexpectedChar('('));
                    }
                    self.branches.push((self.prev, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return self.err(SmilesErrorKind::DanglingBond);
                    }
                    match self.branches.pop() {
                        Some((atom, _)) => self.prev = atom,
                        None => return self.err(SmilesErrorKind::UnbalancedParenthesis),
                    }
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return self.err(SmilesErrorKind::UnexpectedChar(c as char));
                    }
                    let order = match c {
                        b'-' => RawOrder::Single,
                        b'=' => RawOrder::Double,
                        b'#' => RawOrder::Triple,
                        _ => RawOrder::Aromatic,
                    };
                    self.pending = Some((order, self.pos));
                    self.pos += 1;
                }
                b'/' | b'\\' => return self.err(SmilesErrorKind::Unsupported("stereo bond")),
                b'$' => return self.err(SmilesErrorKind::Unsupported("quadruple bond")),
                b'.' => return self.err(SmilesErrorKind::Disconnected),
                b'*' => return self.err(SmilesErrorKind::Unsupported("wildcard atom")),
                b'%' | b'0'..=b'9' => self.ring_closure()?,
                b'[' => self.bracket_atom()?,
                _ if c.is_ascii_alphabetic() => self.organic_atom()?,
                _ => {
                    let ch = std::str::from_utf8(&self.text[self.pos..])
                        .ok()
                        .and_then(|s| s.chars().next())
                        .unwrap_or(c as char);
                    return self.err(SmilesErrorKind::UnexpectedChar(ch));
                }
            }
        }
        if let Some((_, pos)) = self.pending {
            return Err(SmilesError::new(pos, SmilesErrorKind::DanglingBond));
        }
        if let Some(&(_, pos)) = self.branches.last() {
            return Err(SmilesError::new(pos, SmilesErrorKind::UnbalancedParenthesis));
        }
        if let Some((&n, &(_, _, pos))) = self.rings.iter().next() {
            return Err(SmilesError::new(pos, SmilesErrorKind::UnmatchedRingClosure(n)));
        }
        if self.atoms.is_empty() {
            return self.err(SmilesErrorKind::Empty);
        }
        Ok(())
    }

    fn implicit_order(&self, a: usize, b: usize) -> RawOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            RawOrder::Aromatic
        } else {
            RawOrder::Single
        }
    }

    fn add_atom(&mut self, atom: RawAtom) {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let order = match self.pending.take() {
                Some((order, _)) => order,
                None => self.implicit_order(prev, idx),
            };
            self.bonds.push(RawBond { a: prev, b: idx, order });
        }
        self.prev = Some(idx);
    }

    fn ring_closure(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let Some(atom) = self.prev else {
            return self.err(SmilesErrorKind::UnexpectedChar(self.text[start] as char));
        };
        let number = if self.text[start] == b'%' {
            let digits = self.text.get(start + 1..start + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32
                }
                _ => return self.err(SmilesErrorKind::UnexpectedChar('%')),
            }
        } else {
            self.pos += 1;
            (self.text[start] - b'0') as u32
        };
        let here = self.pending.take().map(|(o, _)| o);
        match self.rings.remove(&number) {
            Some((other, there, _)) => {
                if other == atom {
                    return Err(SmilesError::new(start, SmilesErrorKind::SelfBond));
                }
                let order = match (here, there) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(SmilesError::new(
                            start,
                            SmilesErrorKind::ConflictingRingBond(number),
                        ))
                    }
                    (Some(x), _) | (None, Some(x)) => x,
                    (None, None) => self.implicit_order(other, atom),
                };
                self.bonds.push(RawBond { a: other, b: atom, order });
            }
            None => {
                self.rings.insert(number, (atom, here, start));
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let c = self.text[start];
        let next = self.text.get(start + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::Cl, false, 2),
            (b'B', Some(b'r')) => (Element::Br, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            _ => return self.err(SmilesErrorKind::UnexpectedChar(c as char)),
        };
        self.pos += len;
        self.add_atom(RawAtom {
            element,
            charge: 0,
            hydrogens: None,
            aromatic,
            pos: start,
        });
        Ok(())
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            std::str::from_utf8(&self.text[start..self.pos])
                .unwrap()
                .parse()
                .unwrap_or(u32::MAX)
        })
    }

    fn bracket_atom(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        self.pos += 1;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return self.err(SmilesErrorKind::Unsupported("isotope"));
        }
        let (element, aromatic) = match self.peek() {
            Some(b'*') => return self.err(SmilesErrorKind::Unsupported("wildcard atom")),
            Some(c) if c.is_ascii_uppercase() => {
                let mut sym = (c as char).to_string();
                self.pos += 1;
                if let Some(l) = self.peek().filter(|l| l.is_ascii_lowercase()) {
                    sym.push(l as char);
                    self.pos += 1;
                }
                if sym == "H" {
                    return Err(SmilesError::new(start, SmilesErrorKind::Unsupported("explicit hydrogen atom")));
                }
                match Element::from_symbol(&sym) {
                    Some(e) => (e, false),
                    None => return Err(SmilesError::new(start, SmilesErrorKind::UnknownElement(sym))),
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                self.pos += 1;
                let sym = (c as char).to_ascii_uppercase().to_string();
                match Element::from_symbol(&sym).filter(|e| e.can_be_aromatic()) {
                    Some(e) => (e, true),
                    None => {
                        return Err(SmilesError::new(
                            start,
                            SmilesErrorKind::UnknownElement((c as char).to_string()),
                        ))
                    }
                }
            }
            _ => return self.err(SmilesErrorKind::UnexpectedChar(self.peek().map_or(' ', |c| c as char))),
        };
        if self.peek() == Some(b'@') {
            return self.err(SmilesErrorKind::Unsupported("chirality"));
        }
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.read_number().unwrap_or(1).min(255) as u8;
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.read_number() {
                charge = unit * n.min(8) as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }
        if self.peek() == Some(b':') {
            return self.err(SmilesErrorKind::Unsupported("atom class"));
        }
        if self.peek() != Some(b']') {
            return self.err(SmilesErrorKind::UnexpectedChar(self.peek().map_or(' ', |c| c as char)));
        }
        self.pos += 1;
        self.add_atom(RawAtom {
            element,
            charge: charge.clamp(-8, 8) as i8,
            hydrogens: Some(hydrogens),
            aromatic,
            pos: start,
        });
        Ok(())
    }
}
