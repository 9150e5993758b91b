use std::fmt;

/// Elements supported by the valence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    B,
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<Element> {
        Element::ALL.into_iter().find(|e| e.symbol() == sym)
    }

    /// Elements that may be written in lowercase aromatic form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    fn neutral_valences(self) -> &'static [u8] {
        match self {
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
            Element::F | Element::Cl | Element::Br | Element::I => &[1],
        }
    }

    /// Allowed total valences (bond orders plus hydrogens) at a formal charge.
    ///
    /// Carbon loses one per unit of charge of either sign, boron behaves like
    /// its isoelectronic neighbor (B- like C), and groups 15-17 shift with
    /// the charge (N+ like C, O- like F).
    pub fn valences(self, charge: i8) -> Vec<u8> {
        let shift = |v: u8| -> Option<u8> {
            let adjusted = match self {
                Element::C => v as i16 - (charge as i16).abs(),
                Element::B => v as i16 - charge as i16,
                _ => v as i16 + charge as i16,
            };
            (adjusted >= 0).then_some(adjusted as u8)
        };
        self.neutral_valences().iter().filter_map(|&v| shift(v)).collect()
    }

    /// Smallest allowed valence that accommodates `bond_sum`, if any.
    pub fn default_valence(self, charge: i8, bond_sum: u8) -> Option<u8> {
        self.valences(charge).into_iter().find(|&v| v >= bond_sum)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charged_valences() {
        assert_eq!(Element::N.valences(1), vec![4]);
        assert_eq!(Element::O.valences(-1), vec![1]);
        assert_eq!(Element::C.valences(-1), vec![3]);
        assert_eq!(Element::B.valences(-1), vec![4]);
        assert_eq!(Element::S.valences(0), vec![2, 4, 6]);
        assert!(Element::F.valences(-2).is_empty());
    }

    #[test]
    fn default_valence_picks_smallest() {
        assert_eq!(Element::S.default_valence(0, 3), Some(4));
        assert_eq!(Element::P.default_valence(0, 1), Some(3));
        assert_eq!(Element::O.default_valence(0, 3), None);
    }
}
