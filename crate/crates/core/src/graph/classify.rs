use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::adjacency::{connected_components, Graph8};

/// Node count, edge count and degree multiset of one connected component.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentSignature {
    pub node_count: usize,
    pub edge_count: usize,
    /// Nonincreasing.
    pub degrees: Vec<usize>,
}

impl ComponentSignature {
    pub(crate) fn new(mut degrees: Vec<usize>) -> Self {
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        let edge_count = degrees.iter().sum::<usize>() / 2;
        ComponentSignature {
            node_count: degrees.len(),
            edge_count,
            degrees,
        }
    }

    pub fn kind(&self) -> Option<ComponentKind> {
        ComponentKind::ALL
            .into_iter()
            .find(|k| k.signature() == *self)
    }
}

/// The component shapes occurring among embeddable graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    K2,
    P3,
    C4,
    S3,
    K33,
    K44,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 6] = [
        ComponentKind::K2,
        ComponentKind::P3,
        ComponentKind::C4,
        ComponentKind::S3,
        ComponentKind::K33,
        ComponentKind::K44,
    ];

    pub fn signature(self) -> ComponentSignature {
        let degrees = match self {
            ComponentKind::K2 => vec![1, 1],
            ComponentKind::P3 => vec![2, 1, 1],
            ComponentKind::C4 => vec![2; 4],
            ComponentKind::S3 => vec![3, 1, 1, 1],
            ComponentKind::K33 => vec![3; 6],
            ComponentKind::K44 => vec![4; 8],
        };
        ComponentSignature::new(degrees)
    }
}

/// The ten isomorphism classes of embeddable graphs, plus a catch-all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum IsoClass {
    OneK2,
    TwoK2,
    OneC4,
    TwoP3,
    ThreeK2,
    OneK33,
    TwoS3,
    FourK2,
    TwoC4,
    OneK44,
    Other,
}

impl IsoClass {
    /// The ten named classes in catalog order.
    pub const NAMED: [IsoClass; 10] = [
        IsoClass::OneK2,
        IsoClass::TwoK2,
        IsoClass::OneC4,
        IsoClass::TwoP3,
        IsoClass::ThreeK2,
        IsoClass::OneK33,
        IsoClass::TwoS3,
        IsoClass::FourK2,
        IsoClass::TwoC4,
        IsoClass::OneK44,
    ];

    pub fn label(self) -> &'static str {
        match self {
            IsoClass::OneK2 => "1K2",
            IsoClass::TwoK2 => "2K2",
            IsoClass::OneC4 => "1C4",
            IsoClass::TwoP3 => "2P3",
            IsoClass::ThreeK2 => "3K2",
            IsoClass::OneK33 => "1K33",
            IsoClass::TwoS3 => "2S3",
            IsoClass::FourK2 => "4K2",
            IsoClass::TwoC4 => "2C4",
            IsoClass::OneK44 => "1K44",
            IsoClass::Other => "OTHER",
        }
    }

    /// Component shape and how many copies of it the class contains.
    pub fn composition(self) -> Option<(ComponentKind, usize)> {
        use ComponentKind::*;
        Some(match self {
            IsoClass::OneK2 => (K2, 1),
            IsoClass::TwoK2 => (K2, 2),
            IsoClass::OneC4 => (C4, 1),
            IsoClass::TwoP3 => (P3, 2),
            IsoClass::ThreeK2 => (K2, 3),
            IsoClass::OneK33 => (K33, 1),
            IsoClass::TwoS3 => (S3, 2),
            IsoClass::FourK2 => (K2, 4),
            IsoClass::TwoC4 => (C4, 2),
            IsoClass::OneK44 => (K44, 1),
            IsoClass::Other => return None,
        })
    }

    /// Multiplier `n` in `m = n·m₀`, i.e. the expected squeezing rank.
    pub fn rank(self) -> Option<usize> {
        match self {
            IsoClass::OneK2 | IsoClass::OneC4 | IsoClass::OneK33 | IsoClass::OneK44 => Some(1),
            IsoClass::TwoK2 | IsoClass::TwoP3 | IsoClass::TwoS3 | IsoClass::TwoC4 => Some(2),
            IsoClass::ThreeK2 => Some(3),
            IsoClass::FourK2 => Some(4),
            IsoClass::Other => None,
        }
    }
}

impl fmt::Display for IsoClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IsoClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IsoClass::NAMED
            .into_iter()
            .chain([IsoClass::Other])
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown class label {s:?}")))
    }
}

impl TryFrom<String> for IsoClass {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<IsoClass> for String {
    fn from(c: IsoClass) -> String {
        c.label().to_string()
    }
}

/// Class from the multiset of non-singleton component signatures.
pub fn classify(graph: &Graph8) -> IsoClass {
    let mut counts: BTreeMap<ComponentKind, usize> = BTreeMap::new();
    for comp in connected_components(graph) {
        if comp.signature.node_count == 1 {
            continue;
        }
        match comp.signature.kind() {
            Some(kind) => *counts.entry(kind).or_default() += 1,
            None => return IsoClass::Other,
        }
    }
    if counts.len() != 1 {
        return IsoClass::Other;
    }
    let (&kind, &n) = counts.iter().next().expect("one entry");
    IsoClass::NAMED
        .into_iter()
        .find(|c| c.composition() == Some((kind, n)))
        .unwrap_or(IsoClass::Other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_adjacency, GraphCode};

    fn class_of(code: &str) -> IsoClass {
        classify(&build_adjacency(&code.parse::<GraphCode>().unwrap().decode()))
    }

    #[test]
    fn named_examples() {
        assert_eq!(class_of("1111111111"), IsoClass::OneK44);
        assert_eq!(class_of("0110000000"), IsoClass::TwoP3);
        assert_eq!(class_of("0111000000"), IsoClass::TwoS3);
        assert_eq!(class_of("0000000100"), IsoClass::OneK2);
        assert_eq!(class_of("1100100000"), IsoClass::OneC4);
        assert_eq!(class_of("1011000111"), IsoClass::OneK33);
        assert_eq!(class_of("1100100111"), IsoClass::TwoC4);
    }

    #[test]
    fn unrecognized_shapes_fall_back_to_other() {
        assert_eq!(class_of("0000000000"), IsoClass::Other);
        // golden-ratio block: a single P3 plus nothing else
        assert_eq!(class_of("1100000000"), IsoClass::Other);
    }

    #[test]
    fn kind_signatures_are_distinct() {
        let sigs: std::collections::HashSet<_> =
            ComponentKind::ALL.iter().map(|k| k.signature()).collect();
        assert_eq!(sigs.len(), ComponentKind::ALL.len());
        assert_eq!(ComponentKind::S3.signature().edge_count, 3);
        assert_eq!(ComponentKind::K44.signature().edge_count, 16);
    }

    #[test]
    fn labels_round_trip() {
        for c in IsoClass::NAMED.into_iter().chain([IsoClass::Other]) {
            assert_eq!(c.label().parse::<IsoClass>().unwrap(), c);
        }
        assert!("5K2".parse::<IsoClass>().is_err());
    }
}
