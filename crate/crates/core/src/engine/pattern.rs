use std::fmt;

use serde::{Deserialize, Serialize};

/// Photon counts on the 8 modes; 0..4 signal, 4..8 idler.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhotonPattern(pub [u16; 8]);

impl PhotonPattern {
    pub fn vacuum() -> Self {
        PhotonPattern([0; 8])
    }

    pub fn from_halves(signal: [u16; 4], idler: [u16; 4]) -> Self {
        let mut c = [0u16; 8];
        c[..4].copy_from_slice(&signal);
        c[4..].copy_from_slice(&idler);
        PhotonPattern(c)
    }

    pub fn counts(&self) -> &[u16; 8] {
        &self.0
    }

    pub fn signal(&self) -> [u16; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn idler(&self) -> [u16; 4] {
        [self.0[4], self.0[5], self.0[6], self.0[7]]
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&c| usize::from(c)).sum()
    }

    pub fn signal_total(&self) -> usize {
        self.0[..4].iter().map(|&c| usize::from(c)).sum()
    }

    pub fn idler_total(&self) -> usize {
        self.0[4..].iter().map(|&c| usize::from(c)).sum()
    }

    pub fn max_count(&self) -> u16 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for PhotonPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for PhotonPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhotonPattern{self}")
    }
}
