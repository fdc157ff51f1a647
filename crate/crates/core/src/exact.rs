//! Exact rational and integer helpers shared by the lattice, group and cover models.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Out of f64 range only for absurd inputs; fall back to a ratio of logs.
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact binary expansion of a finite double.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::invalid(format!("non-finite value {x}")))
}

const MAX_DIGITS: usize = 4096;

/// Parses `"3"`, `"-7/2"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if s.len() > MAX_DIGITS {
        return Err(Error::Parse("rational literal too long".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(n / d);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("malformed number {s:?}"));
    let s = s.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    if exponent.unsigned_abs() > 400 {
        return Err(Error::Parse(format!("exponent out of range in {s:?}")));
    }
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(numer);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -q } else { q })
}

/// Square matrix of rationals stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Rational::one();
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                data.push(self.get(i, j).clone());
            }
        }
        Self { n, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut data = vec![Rational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Self { n, data }
    }

    pub fn mul_vec_i64(&self, v: &[i64]) -> Vec<Rational> {
        (0..self.n)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0)
                    .fold(Rational::zero(), |acc, (j, c)| acc + self.get(i, j) * rat(*c))
            })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.iter().map(to_f64).collect()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Determinant by Gaussian elimination over the rationals.
    pub fn determinant(&self) -> Rational {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Rational::zero();
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det *= &p;
            for r in col + 1..n {
                let factor = &a[r * n + col] / &p;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = &factor * &a[col * n + j];
                    a[r * n + j] -= v;
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] /= &p;
                inv[col * n + j] /= &p;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    let va = &factor * &a[col * n + j];
                    a[r * n + j] -= va;
                    let vi = &factor * &inv[col * n + j];
                    inv[r * n + j] -= vi;
                }
            }
        }
        Some(Self { n, data: inv })
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
    }
}

/// Row-style Hermite normal form of the lattice spanned by `rows`.
/// Zero rows are dropped; pivots are positive and entries above each pivot
/// are reduced into `[0, pivot)`.
pub fn hermite_normal_form(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows[0].len();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..ncols {
        if pivot_row >= rows.len() {
            break;
        }
        // Euclid on the column below pivot_row.
        loop {
            let nonzero: Vec<usize> = (pivot_row..rows.len()).filter(|&r| !rows[r][col].is_zero()).collect();
            if nonzero.is_empty() {
                break;
            }
            let best = *nonzero.iter().min_by_key(|&&r| rows[r][col].abs()).unwrap();
            rows.swap(pivot_row, best);
            let mut done = true;
            for r in pivot_row + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = rows[r][col].div_floor(&rows[pivot_row][col]);
                let pivot = rows[pivot_row].clone();
                for (x, p) in rows[r].iter_mut().zip(&pivot) {
                    *x -= &q * p;
                }
                if !rows[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[pivot_row][col].is_zero() {
            continue;
        }
        if rows[pivot_row][col].is_negative() {
            for x in rows[pivot_row].iter_mut() {
                *x = -x.clone();
            }
        }
        pivots.push((pivot_row, col));
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    for &(pr, col) in &pivots {
        let p = rows[pr][col].clone();
        for r in 0..pr {
            let q = rows[r][col].div_floor(&p);
            if q.is_zero() {
                continue;
            }
            let pivot = rows[pr].clone();
            for (x, y) in rows[r].iter_mut().zip(&pivot) {
                *x -= &q * y;
            }
        }
    }
    rows
}

/// Integer preimages of the standard basis under a surjective map `Z^k -> Z^m`.
///
/// Returns `u_1..u_m` with `map * u_j = e_j`, or `None` when the map is not onto.
pub fn integer_section(map: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let m = map.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let k = map[0].len();
    if m > k || map.iter().any(|r| r.len() != k) {
        return None;
    }
    let mut a: Vec<Vec<i128>> = map.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    // v is k x k, columns transformed alongside a.
    let mut v: Vec<Vec<i128>> = (0..k).map(|i| (0..k).map(|j| i128::from(i == j)).collect()).collect();
    let swap_cols = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, c1: usize, c2: usize| {
        for row in a.iter_mut() {
            row.swap(c1, c2);
        }
        for row in v.iter_mut() {
            row.swap(c1, c2);
        }
    };
    let sub_col = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        for row in a.iter_mut() {
            row[dst] -= q * row[src];
        }
        for row in v.iter_mut() {
            row[dst] -= q * row[src];
        }
    };
    for i in 0..m {
        loop {
            let nonzero: Vec<usize> = (i..k).filter(|&c| a[i][c] != 0).collect();
            if nonzero.is_empty() {
                return None;
            }
            let best = *nonzero.iter().min_by_key(|&&c| a[i][c].abs()).unwrap();
            swap_cols(&mut a, &mut v, i, best);
            let mut done = true;
            for c in i + 1..k {
                if a[i][c] != 0 {
                    let q = a[i][c].div_euclid(a[i][i]);
                    sub_col(&mut a, &mut v, c, i, q);
                    if a[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[i][i].abs() != 1 {
            return None;
        }
    }
    // Lower-triangular L = a[.., 0..m]; solve L y = e_j.
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut y = vec![0i128; m];
        for i in 0..m {
            let mut rhs = i128::from(i == j);
            for t in 0..i {
                rhs -= a[i][t] * y[t];
            }
            y[i] = rhs / a[i][i];
        }
        let u: Vec<i64> = (0..k)
            .map(|r| (0..m).map(|t| v[r][t] * y[t]).sum::<i128>())
            .map(|x| i64::try_from(x).ok())
            .collect::<Option<_>>()?;
        out.push(u);
    }
    Some(out)
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct AccurateSum {
    sum: f64,
    compensation: f64,
}

impl AccurateSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for AccurateSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = AccurateSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(parse_rational("3").unwrap(), rat(3));
        assert_eq!(parse_rational("-7/2").unwrap(), ratio(-7, 2));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("1.5e-3").unwrap(), ratio(3, 2000));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1e999999").is_err());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = RatMatrix::from_rows(vec![vec![rat(2), rat(1)], vec![rat(1), rat(1)]]).unwrap();
        assert_eq!(m.determinant(), rat(1));
        let inv = m.inverse().unwrap();
        assert_eq!(inv.rows(), vec![vec![rat(1), rat(-1)], vec![rat(-1), rat(2)]]);
        assert_eq!(m.mul(&inv), RatMatrix::identity(2));
        let s = RatMatrix::from_rows(vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]]).unwrap();
        assert!(s.inverse().is_none());
        assert_eq!(s.determinant(), rat(0));
    }

    #[test]
    fn hnf_identifies_equal_lattices() {
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let a = hermite_normal_form(vec![big(&[2, 1]), big(&[1, 1])]);
        let b = hermite_normal_form(vec![big(&[1, 0]), big(&[0, 1])]);
        assert_eq!(a, b);
        let c = hermite_normal_form(vec![big(&[2, 0]), big(&[0, 1])]);
        assert_ne!(a, c);
    }

    #[test]
    fn section_of_projection_and_skew_maps() {
        let chi = vec![vec![0, 1, 0, 0], vec![0, 0, 0, 1]];
        let s = integer_section(&chi).unwrap();
        for (j, u) in s.iter().enumerate() {
            for (i, row) in chi.iter().enumerate() {
                let val: i64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
                assert_eq!(val, i64::from(i == j));
            }
        }
        let skew = vec![vec![3, 5]];
        let s = integer_section(&skew).unwrap();
        assert_eq!(3 * s[0][0] + 5 * s[0][1], 1);
        assert!(integer_section(&[vec![2, 4]]).is_none());
    }

    #[test]
    fn accurate_sum_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let s: AccurateSum = xs.iter().copied().collect();
        assert_eq!(s.value(), 2.0);
    }
}
