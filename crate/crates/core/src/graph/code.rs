use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of each code digit δ₀…δ₉ in the upper triangle of the 4×4
/// signal/idler block, read row-major.
pub(crate) const DIGIT_POSITIONS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Ten-digit binary name of a candidate graph, `δ₀δ₁…δ₉`.
///
/// Stored as an integer whose most significant of the ten bits is δ₀, so
/// numeric order and string order agree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GraphCode(u16);

impl GraphCode {
    pub const COUNT: u16 = 1 << 10;

    pub fn from_value(value: u16) -> Result<Self> {
        if value >= Self::COUNT {
            return Err(Error::InvalidCode {
                code: value.to_string(),
                reason: "value does not fit in 10 bits".into(),
            });
        }
        Ok(GraphCode(value))
    }

    pub fn value(self) -> u16 {
        self.0
    }

    /// Digit δ_i.
    pub fn digit(self, i: usize) -> u8 {
        assert!(i < 10, "digit index {i} out of range");
        ((self.0 >> (9 - i)) & 1) as u8
    }

    pub fn digits(self) -> [u8; 10] {
        std::array::from_fn(|i| self.digit(i))
    }

    /// All 1024 codes in ascending order.
    pub fn all() -> impl Iterator<Item = GraphCode> {
        (0..Self::COUNT).map(GraphCode)
    }

    pub fn decode(self) -> SymmetricSubMatrix {
        let mut entries = [[0u8; 4]; 4];
        for (i, &(r, c)) in DIGIT_POSITIONS.iter().enumerate() {
            let d = self.digit(i);
            entries[r][c] = d;
            entries[c][r] = d;
        }
        SymmetricSubMatrix { entries }
    }
}

impl FromStr for GraphCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidCode {
            code: s.to_string(),
            reason: reason.to_string(),
        };
        if s.chars().count() != 10 {
            return Err(invalid("expected exactly 10 binary digits"));
        }
        let mut value = 0u16;
        for ch in s.chars() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(invalid(&format!("non-binary digit {ch:?}"))),
            };
            value = (value << 1) | bit;
        }
        Ok(GraphCode(value))
    }
}

impl TryFrom<String> for GraphCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GraphCode> for String {
    fn from(code: GraphCode) -> String {
        code.to_string()
    }
}

impl fmt::Display for GraphCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GraphCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GraphCode({self})")
    }
}

/// The binary symmetric 4×4 block `M` coupling signal mode `i` to idler
/// mode `4 + j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricSubMatrix {
    entries: [[u8; 4]; 4],
}

impl SymmetricSubMatrix {
    pub fn new(entries: [[u8; 4]; 4]) -> Result<Self> {
        for (r, row) in entries.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({r},{c}) = {v} is not binary"
                    )));
                }
                if v != entries[c][r] {
                    return Err(Error::NotSymmetric {
                        row: r,
                        col: c,
                        gap: 1.0,
                    });
                }
            }
        }
        Ok(SymmetricSubMatrix { entries })
    }

    pub fn entries(&self) -> &[[u8; 4]; 4] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row][col]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|&v| v == 0)
    }

    pub fn to_f64(&self) -> [[f64; 4]; 4] {
        self.entries.map(|row| row.map(f64::from))
    }

    pub fn encode(&self) -> GraphCode {
        let value = DIGIT_POSITIONS
            .iter()
            .fold(0u16, |acc, &(r, c)| (acc << 1) | u16::from(self.entries[r][c]));
        GraphCode(value)
    }

    /// Conjugation by a permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        let entries = std::array::from_fn(|i| std::array::from_fn(|j| self.entries[perm[i]][perm[j]]));
        SymmetricSubMatrix { entries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> GraphCode {
        s.parse().unwrap()
    }

    #[test]
    fn zero_code_decodes_to_zero_matrix() {
        assert!(code("0000000000").decode().is_zero());
    }

    #[test]
    fn delta7_sits_on_the_third_diagonal_entry() {
        let m = code("0000000100").decode();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(m.get(r, c), u8::from((r, c) == (2, 2)));
            }
        }
    }

    #[test]
    fn c4_code_layout() {
        let m = code("1100100000").decode();
        assert_eq!(
            *m.entries(),
            [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
        );
    }

    #[test]
    fn every_code_round_trips() {
        for c in GraphCode::all() {
            assert_eq!(c.decode().encode(), c);
            assert_eq!(c.to_string().parse::<GraphCode>().unwrap(), c);
        }
    }

    #[test]
    fn malformed_codes_are_rejected() {
        for bad in ["", "000000000", "00000000000", "000000000a", "00000 00000"] {
            assert!(matches!(
                bad.parse::<GraphCode>(),
                Err(Error::InvalidCode { .. })
            ));
        }
        assert!(GraphCode::from_value(1024).is_err());
    }

    #[test]
    fn non_symmetric_submatrix_rejected() {
        let mut e = [[0u8; 4]; 4];
        e[0][1] = 1;
        assert!(matches!(
            SymmetricSubMatrix::new(e),
            Err(Error::NotSymmetric { .. })
        ));
        e[0][1] = 2;
        e[1][0] = 2;
        assert!(SymmetricSubMatrix::new(e).is_err());
    }

    #[test]
    fn serde_uses_string_form() {
        let c = code("0110000000");
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "\"0110000000\"");
        assert_eq!(serde_json::from_str::<GraphCode>(&json).unwrap(), c);
        assert!(serde_json::from_str::<GraphCode>("\"012\"").is_err());
    }
}
