use std::fmt;

use serde::{Deserialize, Serialize};

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// A chemical element, stored as its atomic number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Element(u8);

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const SI: Element = Element(14);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        (1..=118).contains(&z).then_some(Element(z))
    }

    /// Looks up a symbol with exact capitalization ("Cl", not "CL").
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .position(|s| *s == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize - 1]
    }

    pub fn is_halogen(self) -> bool {
        matches!(self.0, 9 | 17 | 35 | 53)
    }

    /// Neutral-atom valence states used for implicit hydrogens and valence
    /// checks. `None` for elements outside the checked organic set.
    pub fn default_valences(self) -> Option<&'static [u8]> {
        Some(match self.0 {
            5 => &[3],
            6 => &[4],
            7 => &[3, 5],
            8 => &[2],
            9 => &[1],
            14 => &[4],
            15 => &[3, 5],
            16 => &[2, 4, 6],
            17 | 35 | 53 => &[1, 3, 5, 7],
            _ => return None,
        })
    }

    /// Allowed valences after adjusting for a formal charge.
    ///
    /// Pnictogens and chalcogens gain one valence per positive charge and lose
    /// one per negative charge; carbon, silicon and the halogens lose one per
    /// unit of charge of either sign; boron gains one per negative charge.
    pub fn charged_valences(self, charge: i8) -> Option<Vec<u8>> {
        let base = self.default_valences()?;
        let shift = |v: u8| -> Option<u8> {
            let c = i16::from(charge);
            let adjusted = match self.0 {
                7 | 8 | 15 | 16 => i16::from(v) + c,
                5 => i16::from(v) - c,
                _ => i16::from(v) - c.abs(),
            };
            u8::try_from(adjusted).ok()
        };
        let mut out: Vec<u8> = base.iter().filter_map(|&v| shift(v)).collect();
        out.dedup();
        Some(out)
    }

    /// Member of the SMILES organic subset (may be written without brackets).
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// May be written as a lowercase aromatic symbol.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl From<Element> for String {
    fn from(e: Element) -> String {
        e.symbol().to_string()
    }
}

impl TryFrom<String> for Element {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Element::from_symbol(&s).ok_or_else(|| format!("unknown element symbol '{s}'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_lookup_round_trips() {
        for z in 1..=118u8 {
            let e = Element::from_atomic_number(z).unwrap();
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("CL"), None);
        assert_eq!(Element::from_symbol("Xx"), None);
    }

    #[test]
    fn charge_adjusted_valences() {
        assert_eq!(Element::N.charged_valences(1).unwrap(), vec![4, 6]);
        assert_eq!(Element::O.charged_valences(-1).unwrap(), vec![1]);
        assert_eq!(Element::C.charged_valences(-1).unwrap(), vec![3]);
        assert_eq!(Element::B.charged_valences(-1).unwrap(), vec![4]);
        assert_eq!(Element::F.charged_valences(-1).unwrap(), vec![0]);
        assert_eq!(Element::CL.charged_valences(1).unwrap(), vec![0, 2, 4, 6]);
        assert!(Element::from_symbol("Fe").unwrap().charged_valences(2).is_none());
    }
}
