//! Fincke-Pohst enumeration of integer vectors `m` with `|B (m + t)| <= r`.

use crate::error::{Error, Result};

pub const DEFAULT_POINT_BUDGET: u64 = 10_000_000;

/// Relative slack added to the radius so that boundary points are never lost to
/// rounding; callers filter exactly afterwards when they need a sharp boundary.
const SLACK: f64 = 1e-9;

/// Upper-triangular `R` with `B^T B = R^T R`, i.e. Cholesky of the Gram matrix.
fn gram_cholesky(b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = b.len();
    let gram = |i: usize, j: usize| (0..d).map(|r| b[r][i] * b[r][j]).sum::<f64>();
    let mut r = vec![vec![0.0; d]; d];
    for i in 0..d {
        let mut diag = gram(i, i);
        for k in 0..i {
            diag -= r[k][i] * r[k][i];
        }
        r[i][i] = diag.max(0.0).sqrt();
        for j in i + 1..d {
            let mut v = gram(i, j);
            for k in 0..i {
                v -= r[k][i] * r[k][j];
            }
            r[i][j] = v / r[i][i];
        }
    }
    r
}

struct Search<'a> {
    r: &'a [Vec<f64>],
    shift: &'a [f64],
    budget: u64,
    visited: u64,
    current: Vec<i64>,
    out: Vec<Vec<i64>>,
}

impl Search<'_> {
    fn level(&mut self, i: usize, remaining: f64) -> Result<()> {
        let d = self.r.len();
        let rii = self.r[i][i];
        // Coordinate y_i = m_i + t_i must satisfy rii^2 (y_i - c)^2 <= remaining.
        let mut c = 0.0;
        for j in i + 1..d {
            c -= self.r[i][j] / rii * (self.current[j] as f64 + self.shift[j]);
        }
        let half = remaining.max(0.0).sqrt() / rii;
        let lo = (c - half - self.shift[i]).ceil() as i64;
        let hi = (c + half - self.shift[i]).floor() as i64;
        for m in lo..=hi {
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::Budget { what: "lattice point", needed: self.visited, limit: self.budget });
            }
            let y = m as f64 + self.shift[i] - c;
            let rest = remaining - rii * rii * y * y;
            if rest < -SLACK * remaining.abs().max(1e-300) {
                continue;
            }
            self.current[i] = m;
            if i == 0 {
                self.out.push(self.current.clone());
            } else {
                self.level(i - 1, rest)?;
            }
        }
        Ok(())
    }
}

/// All `m in Z^d` with `|B (m + shift)| <= radius` (up to a tiny relative slack),
/// sorted lexicographically. `b[i][j]` is entry `(i, j)` of `B`.
pub fn enumerate_coefficients(b: &[Vec<f64>], shift: &[f64], radius: f64, budget: u64) -> Result<Vec<Vec<i64>>> {
    let d = b.len();
    if shift.len() != d {
        return Err(Error::Dimension { expected: d, got: shift.len() });
    }
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::invalid("enumeration radius must be finite and nonnegative"));
    }
    let r = gram_cholesky(b);
    if r.iter().enumerate().any(|(i, row)| !(row[i] > 0.0)) {
        return Err(Error::SingularBasis);
    }
    let rad = radius * (1.0 + SLACK) + 1e-300;
    let mut search = Search { r: &r, shift, budget, visited: 0, current: vec![0; d], out: Vec::new() };
    search.level(d - 1, rad * rad)?;
    let mut out = search.out;
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(b: &[Vec<f64>], shift: &[f64], radius: f64, box_half: i64) -> Vec<Vec<i64>> {
        let d = b.len();
        let mut out = Vec::new();
        let mut m = vec![-box_half; d];
        loop {
            let norm_sq: f64 = (0..d)
                .map(|i| (0..d).map(|j| b[i][j] * (m[j] as f64 + shift[j])).sum::<f64>().powi(2))
                .sum();
            if norm_sq <= radius * radius * (1.0 + 1e-12) {
                out.push(m.clone());
            }
            let mut i = d;
            loop {
                if i == 0 {
                    out.sort();
                    return out;
                }
                i -= 1;
                if m[i] < box_half {
                    m[i] += 1;
                    break;
                }
                m[i] = -box_half;
            }
        }
    }

    #[test]
    fn matches_brute_force_on_skew_bases() {
        let b = vec![vec![1.0, 0.6, -0.3], vec![0.2, 0.9, 0.5], vec![-0.1, 0.4, 1.3]];
        for &(r, t) in &[(2.5, [0.0, 0.0, 0.0]), (3.1, [0.25, -0.5, 0.1])] {
            assert_eq!(enumerate_coefficients(&b, &t, r, u64::MAX).unwrap(), brute(&b, &t, r, 12));
        }
    }

    #[test]
    fn budget_exceeded() {
        let b = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let err = enumerate_coefficients(&b, &[0.0, 0.0], 100.0, 1000).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn singular_rejected() {
        let b = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(enumerate_coefficients(&b, &[0.0, 0.0], 1.0, 100), Err(Error::SingularBasis));
    }
}
