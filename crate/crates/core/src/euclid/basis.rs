use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{hermite_normal_form, parse_rational, rat, to_f64, RatMatrix, Rational};

use super::enumerate::{enumerate_coefficients, DEFAULT_POINT_BUDGET};

/// Full-rank rational basis; the columns of `matrix` generate `L = B Z^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    matrix: RatMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePoint {
    pub coeffs: Vec<i64>,
    pub vector: Vec<Rational>,
}

impl LatticePoint {
    pub fn norm_sq(&self) -> Rational {
        self.vector.iter().map(|x| x * x).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortestVector {
    pub coeffs: Vec<i64>,
    pub vector: Vec<Rational>,
    pub norm_sq: Rational,
    pub norm: f64,
}

impl LatticeBasis {
    /// `rows[i][j]` is entry `(i, j)` of `B`.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let matrix = RatMatrix::from_rows(rows)?;
        if matrix.dim() > crate::testfn::MAX_DIM {
            return Err(Error::invalid("lattice dimension above 8 is not supported"));
        }
        if matrix.determinant().is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(Self { matrix })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect())
    }

    pub fn from_strs(rows: &[&[&str]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?,
        )
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: RatMatrix::identity(d) }
    }

    pub fn diagonal(entries: &[Rational]) -> Result<Self> {
        let d = entries.len();
        Self::new(
            (0..d)
                .map(|i| (0..d).map(|j| if i == j { entries[i].clone() } else { rat(0) }).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.matrix.rows()
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.is_diagonal()
    }

    /// `|det B|`, the volume of the parallelepiped fundamental domain.
    pub fn covolume(&self) -> Rational {
        self.matrix.determinant().abs()
    }

    /// `(B^-1)^T`, whose columns generate `L* = {xi : <xi, gamma> in Z}`.
    pub fn dual(&self) -> LatticeBasis {
        let inv = self.matrix.inverse().expect("basis is full rank by construction");
        LatticeBasis { matrix: inv.transpose() }
    }

    pub fn scaled(&self, factor: &Rational) -> Result<LatticeBasis> {
        LatticeBasis::new(self.rows().into_iter().map(|r| r.into_iter().map(|x| x * factor).collect()).collect())
    }

    pub fn vector(&self, coeffs: &[i64]) -> Vec<Rational> {
        self.matrix.mul_vec_i64(coeffs)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.matrix.to_f64()
    }

    pub fn vector_f64(&self, coeffs: &[i64]) -> Vec<f64> {
        let m = self.to_f64();
        m.iter().map(|row| row.iter().zip(coeffs).map(|(b, c)| b * *c as f64).sum()).collect()
    }

    /// Complete list of lattice vectors with Euclidean norm `<= radius`,
    /// sorted lexicographically by integer coefficients.
    pub fn enumerate_points(&self, radius: f64) -> Result<Vec<LatticePoint>> {
        if !(radius >= 0.0) {
            return Err(Error::invalid("radius must be nonnegative"));
        }
        // The exact filter needs a rational bound; the float radius is exact in binary.
        let r = crate::exact::from_f64(radius)?;
        self.enumerate_within_sq(&(&r * &r))
    }

    /// Lattice vectors with squared norm `<= radius_sq`, decided exactly.
    pub fn enumerate_within_sq(&self, radius_sq: &Rational) -> Result<Vec<LatticePoint>> {
        self.enumerate_within_sq_budget(radius_sq, DEFAULT_POINT_BUDGET)
    }

    pub fn enumerate_within_sq_budget(&self, radius_sq: &Rational, budget: u64) -> Result<Vec<LatticePoint>> {
        let radius = to_f64(radius_sq).sqrt();
        let shift = vec![0.0; self.dim()];
        let coeffs = enumerate_coefficients(&self.to_f64(), &shift, radius, budget)?;
        Ok(coeffs
            .into_iter()
            .filter_map(|c| {
                let vector = self.vector(&c);
                let p = LatticePoint { coeffs: c, vector };
                (p.norm_sq() <= *radius_sq).then_some(p)
            })
            .collect())
    }

    /// A nonzero vector of minimal norm; ties go to the lexicographically smallest
    /// coefficient vector.
    pub fn shortest_vector(&self) -> ShortestVector {
        let bound = (0..self.dim())
            .map(|j| (0..self.dim()).map(|i| self.matrix.get(i, j) * self.matrix.get(i, j)).sum::<Rational>())
            .min()
            .expect("nonempty basis");
        let points = self
            .enumerate_within_sq_budget(&bound, u64::MAX)
            .expect("an unlimited budget cannot overflow");
        let best = points
            .into_iter()
            .filter(|p| !p.is_zero())
            .map(|p| (p.norm_sq(), p))
            .min_by(|(na, pa), (nb, pb)| na.cmp(nb).then_with(|| pa.coeffs.cmp(&pb.coeffs)))
            .expect("the shortest basis column lies within its own norm");
        let (norm_sq, p) = best;
        ShortestVector { norm: to_f64(&norm_sq).sqrt(), coeffs: p.coeffs, vector: p.vector, norm_sq }
    }

    /// Hermite normal form of an integer multiple of the basis; equal forms mean
    /// the two bases generate the same lattice (when scaled by the same factor).
    fn integer_hnf(&self, scale: &BigInt) -> Vec<Vec<BigInt>> {
        let d = self.dim();
        let rows: Vec<Vec<BigInt>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| {
                        let v = self.matrix.get(i, j) * Rational::from_integer(scale.clone());
                        debug_assert!(v.is_integer());
                        v.to_integer()
                    })
                    .collect()
            })
            .collect();
        hermite_normal_form(rows)
    }

    pub fn same_lattice(&self, other: &LatticeBasis) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let scale = num_integer::Integer::lcm(&self.matrix.common_denominator(), &other.matrix.common_denominator());
        self.integer_hnf(&scale) == other.integer_hnf(&scale)
    }
}

impl fmt::Display for LatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn covolume_examples() {
        assert_eq!(LatticeBasis::identity(2).covolume(), rat(1));
        let d = LatticeBasis::diagonal(&[rat(4), ratio(1, 2)]).unwrap();
        assert_eq!(d.covolume(), rat(2));
        let s = LatticeBasis::from_i64(&[&[2, 1], &[1, 1]]).unwrap();
        assert_eq!(s.covolume(), rat(1));
        assert_eq!(LatticeBasis::from_i64(&[&[1, 2], &[2, 4]]), Err(Error::SingularBasis));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(LatticeBasis::identity(2).dual(), LatticeBasis::identity(2));
        let d = LatticeBasis::diagonal(&[rat(4), ratio(1, 2)]).unwrap();
        assert_eq!(d.dual(), LatticeBasis::diagonal(&[ratio(1, 4), rat(2)]).unwrap());
        let s = LatticeBasis::from_i64(&[&[2, 1], &[1, 1]]).unwrap();
        assert_eq!(s.dual(), LatticeBasis::from_i64(&[&[1, -1], &[-1, 2]]).unwrap());
        assert_eq!(s.dual().dual(), s);
    }

    #[test]
    fn dual_pairs_to_identity() {
        let b = LatticeBasis::from_strs(&[&["3", "1/2", "0"], &["-1", "2", "1/3"], &["0", "5/4", "1"]]).unwrap();
        let d = b.dual();
        let prod = d.matrix().transpose().mul(b.matrix());
        assert_eq!(prod, RatMatrix::identity(3));
    }

    #[test]
    fn enumeration_examples() {
        let z2 = LatticeBasis::identity(2);
        let pts = z2.enumerate_points(1.0).unwrap();
        let coeffs: Vec<_> = pts.iter().map(|p| p.coeffs.clone()).collect();
        assert_eq!(coeffs, vec![vec![-1, 0], vec![0, -1], vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(z2.enumerate_points(1.5).unwrap().len(), 9);
        let d = LatticeBasis::diagonal(&[rat(4), ratio(1, 2)]).unwrap();
        let v: Vec<_> = d.enumerate_points(1.0).unwrap().into_iter().map(|p| p.vector).collect();
        assert_eq!(
            v,
            vec![
                vec![rat(0), rat(-1)],
                vec![rat(0), ratio(-1, 2)],
                vec![rat(0), rat(0)],
                vec![rat(0), ratio(1, 2)],
                vec![rat(0), rat(1)]
            ]
        );
    }

    #[test]
    fn shortest_vector_examples() {
        assert_eq!(LatticeBasis::identity(2).shortest_vector().norm, 1.0);
        let n = 5;
        let c = LatticeBasis::diagonal(&[rat(n * n), ratio(1, n)]).unwrap();
        assert_eq!(c.shortest_vector().norm_sq, ratio(1, 25));
        let s = LatticeBasis::from_i64(&[&[2, 1], &[1, 1]]).unwrap();
        let sv = s.shortest_vector();
        assert_eq!(sv.norm_sq, rat(1));
        // Lexicographically smallest coefficient vector among the four unit vectors.
        assert_eq!(sv.coeffs, vec![-1, 1]);
    }

    #[test]
    fn same_lattice_detects_basis_changes() {
        let s = LatticeBasis::from_i64(&[&[2, 1], &[1, 1]]).unwrap();
        assert!(s.same_lattice(&LatticeBasis::identity(2)));
        let t = LatticeBasis::from_i64(&[&[2, 0], &[0, 1]]).unwrap();
        assert!(!t.same_lattice(&LatticeBasis::identity(2)));
        let q = LatticeBasis::from_strs(&[&["1/2", "1/2"], &["0", "1"]]).unwrap();
        let q2 = LatticeBasis::from_strs(&[&["1/2", "1"], &["0", "1"]]).unwrap();
        assert!(q.same_lattice(&q2));
    }
}
