//! Device normalization: which blocks can be embedded, and with what
//! squeezing.
//!
//! A block `M` is embeddable when every nonzero singular value is the same
//! value σ. It is then rescaled by `c = tanh(1)/σ`, so each active
//! signal/idler pair is squeezed at `r = 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GraphCode, SymmetricSubMatrix};

/// Mean photon number per mode of one pair squeezed at `r = 1`, spread over
/// the 8 modes: `sinh²(1) / 4`.
pub const M0: f64 = 0.345_274_461_385_453_87;

/// Squeezing parameter applied to every active pair.
pub const SQUEEZING: f64 = 1.0;

/// Singular values below this are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Nonzero singular values closer than this count as identical.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

const JACOBI_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

pub type Mat4 = [[f64; 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    /// Nonincreasing.
    pub eigenvalues: [f64; 4],
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub basis: Mat4,
}

impl EigenDecomposition {
    /// `basis · diag(eigenvalues) · basisᵀ`.
    pub fn reconstruct(&self) -> Mat4 {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..4)
                    .map(|k| self.basis[i][k] * self.eigenvalues[k] * self.basis[j][k])
                    .sum()
            })
        })
    }

    /// Absolute eigenvalues, nonincreasing. For a real symmetric matrix
    /// these are its singular values.
    pub fn singular_values(&self) -> [f64; 4] {
        let mut s = self.eigenvalues.map(f64::abs);
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// Cyclic Jacobi rotations until every off-diagonal magnitude is below
/// 1e-12.
pub fn symmetric_eigendecomposition(matrix: &Mat4) -> Result<EigenDecomposition> {
    for i in 0..4 {
        for j in i + 1..4 {
            let gap = (matrix[i][j] - matrix[j][i]).abs();
            if !(gap <= SYMMETRY_TOLERANCE) {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    let mut a = *matrix;
    let mut v: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| f64::from(u8::from(i == j))));

    for _ in 0..MAX_SWEEPS {
        let off = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].abs())
            .fold(0.0, f64::max);
        if off < JACOBI_TOLERANCE {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if a[p][q].abs() < JACOBI_TOLERANCE * 1e-3 {
                    continue;
                }
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]));
    Ok(EigenDecomposition {
        eigenvalues: order.map(|k| a[k][k]),
        basis: std::array::from_fn(|i| order.map(|k| v[i][k])),
    })
}

/// One Jacobi rotation zeroing `a[p][q]`.
fn rotate(a: &mut Mat4, v: &mut Mat4, p: usize, q: usize) {
    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..4 {
        let (akp, akq) = (a[k][p], a[k][q]);
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
    }
    for k in 0..4 {
        let (apk, aqk) = (a[p][k], a[q][k]);
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
    }
    a[p][q] = 0.0;
    a[q][p] = 0.0;
    for row in v.iter_mut() {
        let (vp, vq) = (row[p], row[q]);
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Embeddability {
    /// Number of active squeezed pairs.
    Embeddable(usize),
    NotEmbeddable(String),
}

impl Embeddability {
    pub fn is_embeddable(&self) -> bool {
        matches!(self, Embeddability::Embeddable(_))
    }
}

pub fn embeddability_check(block: &SymmetricSubMatrix) -> Embeddability {
    if block.is_zero() {
        return Embeddability::NotEmbeddable("no edges".into());
    }
    let eig = symmetric_eigendecomposition(&block.to_f64()).expect("binary blocks are symmetric");
    classify_singular_values(&eig.singular_values())
}

fn classify_singular_values(sv: &[f64; 4]) -> Embeddability {
    let nonzero: Vec<f64> = sv.iter().copied().filter(|&s| s > RANK_TOLERANCE).collect();
    let (Some(&hi), Some(&lo)) = (nonzero.first(), nonzero.last()) else {
        return Embeddability::NotEmbeddable("no edges".into());
    };
    if hi - lo > EQUALITY_TOLERANCE {
        let list = nonzero
            .iter()
            .map(|s| format!("{s:.6}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Embeddability::NotEmbeddable(format!("unequal nonzero singular values [{list}]"));
    }
    Embeddability::Embeddable(nonzero.len())
}

/// Everything needed to prepare an embedded graph on the device.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingSpec {
    pub code: GraphCode,
    #[serde(skip)]
    pub block: SymmetricSubMatrix,
    /// `scale_c · M`.
    pub scaled_matrix: Mat4,
    pub scale_c: f64,
    /// Singular values of the unscaled block, nonincreasing.
    pub singular_values: [f64; 4],
    pub rank: usize,
    pub squeezing: Vec<f64>,
    pub mean_photon_per_mode: f64,
}

impl EmbeddingSpec {
    /// The common nonzero singular value σ of the unscaled block.
    pub fn sigma(&self) -> f64 {
        self.singular_values[0]
    }
}

pub fn make_embedding(code: GraphCode) -> Result<EmbeddingSpec> {
    let block = code.decode();
    if block.is_zero() {
        return Err(Error::NotEmbeddable {
            code: code.to_string(),
            reason: "no edges".into(),
        });
    }
    let eig = symmetric_eigendecomposition(&block.to_f64())?;
    let singular_values = eig.singular_values();
    let rank = match classify_singular_values(&singular_values) {
        Embeddability::Embeddable(rank) => rank,
        Embeddability::NotEmbeddable(reason) => {
            return Err(Error::NotEmbeddable {
                code: code.to_string(),
                reason,
            })
        }
    };
    let sigma = singular_values[0];
    let scale_c = SQUEEZING.tanh() / sigma;
    let scaled_matrix = block.to_f64().map(|row| row.map(|x| scale_c * x));
    Ok(EmbeddingSpec {
        code,
        block,
        scaled_matrix,
        scale_c,
        singular_values,
        rank,
        squeezing: vec![SQUEEZING; rank],
        mean_photon_per_mode: rank as f64 * m0(),
    })
}

/// `sinh²(1)/4`, computed.
pub fn m0() -> f64 {
    SQUEEZING.sinh().powi(2) / 4.0
}

/// Total mean photon number over the 8 modes.
pub fn mean_photon_total(spec: &EmbeddingSpec) -> f64 {
    8.0 * spec.mean_photon_per_mode
}

/// All embeddable codes in ascending order.
pub fn enumerate_embeddable() -> Vec<(GraphCode, EmbeddingSpec)> {
    let codes: Vec<GraphCode> = GraphCode::all().collect();
    codes
        .par_iter()
        .filter_map(|&c| make_embedding(c).ok().map(|spec| (c, spec)))
        .collect()
}
