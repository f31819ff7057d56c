use crate::error::{Error, Result};

/// Largest matrix accepted by [`permanent`].
pub const MAX_RYSER_SIZE: usize = 16;

fn check_square(matrix: &[Vec<f64>]) -> Result<usize> {
    let n = matrix.len();
    if let Some((bad_row, row)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            bad_row,
            cols: row.len(),
        });
    }
    Ok(n)
}

/// Ryser's inclusion–exclusion formula, visiting column subsets in Gray-code
/// order so each step adds or removes a single column from the row sums.
/// O(2ⁿ·n). The empty matrix has permanent 1.
pub fn permanent(matrix: &[Vec<f64>]) -> Result<f64> {
    let n = check_square(matrix)?;
    if n == 0 {
        return Ok(1.0);
    }
    if n > MAX_RYSER_SIZE {
        return Err(Error::InvalidArgument(format!(
            "permanent of a {n}x{n} matrix exceeds the {MAX_RYSER_SIZE}x{MAX_RYSER_SIZE} limit"
        )));
    }
    let mut row_sums = vec![0.0; n];
    let mut in_subset = vec![false; n];
    let mut size = 0usize;
    let mut total = 0.0;
    for step in 1u32..(1u32 << n) {
        let col = step.trailing_zeros() as usize;
        let sign = if in_subset[col] { -1.0 } else { 1.0 };
        in_subset[col] = !in_subset[col];
        if in_subset[col] {
            size += 1;
        } else {
            size -= 1;
        }
        for (sum, row) in row_sums.iter_mut().zip(matrix) {
            *sum += sign * row[col];
        }
        let prod: f64 = row_sums.iter().product();
        if (n - size).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// Cofactor expansion along the first row. Exponential in the worst way;
/// kept as an independent reference for small matrices.
pub fn permanent_laplace(matrix: &[Vec<f64>]) -> Result<f64> {
    let n = check_square(matrix)?;
    let cols: Vec<usize> = (0..n).collect();
    Ok(laplace(matrix, 0, &cols))
}

fn laplace(m: &[Vec<f64>], row: usize, cols: &[usize]) -> f64 {
    if cols.is_empty() {
        return 1.0;
    }
    let mut total = 0.0;
    for (k, &c) in cols.iter().enumerate() {
        let a = m[row][c];
        if a == 0.0 {
            continue;
        }
        let rest: Vec<usize> = cols.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
        total += a * laplace(m, row + 1, &rest);
    }
    total
}

/// Permanent of the matrix obtained from `base` by repeating row `i`
/// `row_mult[i]` times and column `j` `col_mult[j]` times.
///
/// Ryser's sum grouped by how many copies of each column are in the subset:
/// `Σ_k (-1)^{n-|k|} ∏_j C(s_j, k_j) ∏_i (Σ_j k_j b_ij)^{d_i}`, which costs
/// `∏(s_j + 1)` terms instead of `2ⁿ`.
pub fn permanent_repeated(base: &[Vec<f64>], row_mult: &[usize], col_mult: &[usize]) -> Result<f64> {
    if base.len() != row_mult.len() || base.iter().any(|r| r.len() != col_mult.len()) {
        return Err(Error::InvalidArgument(
            "multiplicity vectors do not match the base matrix shape".into(),
        ));
    }
    let n: usize = row_mult.iter().sum();
    if n != col_mult.iter().sum::<usize>() {
        return Err(Error::InvalidArgument(format!(
            "expanded matrix is not square: {n} rows, {} columns",
            col_mult.iter().sum::<usize>()
        )));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let types = col_mult.len();
    let mut k = vec![0usize; types];
    let mut total = 0.0;
    loop {
        let chosen: usize = k.iter().sum();
        let weight: f64 = k
            .iter()
            .zip(col_mult)
            .map(|(&kj, &sj)| super::probability::binomial(sj as u64, kj as u64))
            .product();
        let mut prod = weight;
        for (row, &d) in base.iter().zip(row_mult) {
            if d == 0 {
                continue;
            }
            let s: f64 = row.iter().zip(&k).map(|(b, &kj)| b * kj as f64).sum();
            prod *= s.powi(d as i32);
        }
        if (n - chosen).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
        // odometer over 0..=col_mult[j]
        let mut j = 0;
        loop {
            if j == types {
                return Ok(total);
            }
            if k[j] < col_mult[j] {
                k[j] += 1;
                break;
            }
            k[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_closed_forms() {
        let id3 = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(permanent(&id3).unwrap(), 1.0);
        assert_eq!(permanent(&vec![vec![1.0; 3]; 3]).unwrap(), 6.0);
        assert_eq!(permanent(&[]).unwrap(), 1.0);
        assert_eq!(permanent_laplace(&[]).unwrap(), 1.0);
        let two = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(permanent(&two).unwrap(), 10.0);
    }

    #[test]
    fn all_ones_permanent_is_factorial() {
        let mut f = 1.0;
        for n in 1..=10 {
            f *= n as f64;
            assert_eq!(permanent(&vec![vec![1.0; n]; n]).unwrap(), f);
        }
    }

    #[test]
    fn rejects_non_square_and_oversized() {
        let bad = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(permanent(&bad), Err(Error::NotSquare { bad_row: 1, .. })));
        assert!(permanent_laplace(&bad).is_err());
        assert!(permanent(&vec![vec![0.0; 17]; 17]).is_err());
        assert!(permanent_repeated(&[vec![1.0]], &[2], &[1]).is_err());
    }

    #[test]
    fn repeated_matches_expanded() {
        let base = vec![
            vec![0.3, -1.2, 0.5],
            vec![0.9, 0.1, -0.4],
            vec![-0.7, 0.8, 1.1],
        ];
        let rows = [2usize, 0, 3];
        let cols = [1usize, 3, 1];
        let expanded: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, &d)| std::iter::repeat_n(i, d))
            .map(|i| {
                cols.iter()
                    .enumerate()
                    .flat_map(|(j, &s)| std::iter::repeat_n(base[i][j], s))
                    .collect()
            })
            .collect();
        let a = permanent_repeated(&base, &rows, &cols).unwrap();
        let b = permanent(&expanded).unwrap();
        let c = permanent_laplace(&expanded).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        assert!((b - c).abs() < 1e-10 * c.abs().max(1.0));
    }
}
