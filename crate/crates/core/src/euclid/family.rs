use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rat, ratio, to_f64, Rational};
use crate::testfn::TestFunction;

use super::basis::LatticeBasis;
use super::sums::{geometric_sum, plancherel_defect};

/// A sequence `n -> L_n` of lattices.
#[derive(Clone, Debug, PartialEq)]
pub enum LatticeFamily {
    /// `n^2 Z x (1/n) Z`: covolume `n`, but the second axis gets denser.
    Counterexample,
    /// `n L_0`.
    Dilation(LatticeBasis),
    /// `B_0 diag(1, .., n, .., 1) Z^d`: index-`n` sublattice along one basis vector.
    Sublattice { base: LatticeBasis, axis: usize },
}

impl LatticeFamily {
    pub fn member(&self, n: u64) -> Result<LatticeBasis> {
        if n == 0 {
            return Err(Error::invalid("family index starts at 1"));
        }
        let n = i64::try_from(n).map_err(|_| Error::invalid("family index too large"))?;
        match self {
            LatticeFamily::Counterexample => LatticeBasis::diagonal(&[rat(n * n), ratio(1, n)]),
            LatticeFamily::Dilation(base) => base.scaled(&rat(n)),
            LatticeFamily::Sublattice { base, axis } => {
                if *axis >= base.dim() {
                    return Err(Error::invalid(format!("sublattice axis {axis} out of range")));
                }
                let rows = base
                    .rows()
                    .into_iter()
                    .map(|row| row.into_iter().enumerate().map(|(j, x)| if j == *axis { x * rat(n) } else { x }).collect())
                    .collect();
                LatticeBasis::new(rows)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LatticeFamily::Counterexample => 2,
            LatticeFamily::Dilation(b) | LatticeFamily::Sublattice { base: b, .. } => b.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRecord {
    pub radius: f64,
    /// `#(L_n \ 0) within distance radius of the origin`.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectRecord {
    pub function: usize,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub geometric: Rational,
    /// Spectral-side defect, absent when the tail certificate was out of budget.
    pub spectral: Option<f64>,
    pub poisson_residual: Option<f64>,
    pub tail_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberRecord {
    pub n: u64,
    #[serde(serialize_with = "crate::report::serialize_rational")]
    pub covolume: Rational,
    pub systole: f64,
    pub counts: Vec<CountRecord>,
    pub defects: Vec<DefectRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyScan {
    pub tail_tol: f64,
    pub members: Vec<MemberRecord>,
}

fn defect_record(index: usize, basis: &LatticeBasis, f: &TestFunction, tail_tol: f64) -> Result<DefectRecord> {
    match plancherel_defect(basis, f, tail_tol) {
        Ok(d) => Ok(DefectRecord {
            function: index,
            poisson_residual: Some(d.discrepancy()),
            spectral: Some(d.spectral),
            tail_bound: Some(d.tail_bound),
            geometric: d.geometric,
        }),
        Err(Error::TailBudget { .. }) => Ok(DefectRecord {
            function: index,
            geometric: geometric_sum(basis, f, true)?,
            spectral: None,
            poisson_residual: None,
            tail_bound: None,
        }),
        Err(e) => Err(e),
    }
}

fn scan_member(
    family: &LatticeFamily,
    n: u64,
    functions: &[TestFunction],
    radii: &[f64],
    tail_tol: f64,
) -> Result<MemberRecord> {
    let basis = family.member(n)?;
    let counts = radii
        .iter()
        .map(|&r| Ok(CountRecord { radius: r, count: basis.enumerate_points(r)?.len() as u64 - 1 }))
        .collect::<Result<_>>()?;
    let defects = functions
        .iter()
        .enumerate()
        .map(|(i, f)| defect_record(i, &basis, f, tail_tol))
        .collect::<Result<_>>()?;
    Ok(MemberRecord { n, covolume: basis.covolume(), systole: basis.shortest_vector().norm, counts, defects })
}

/// Counts, defects and Poisson residuals for every `n` in `ns`; members are
/// computed in parallel and reported in the order of `ns`.
pub fn scan_family(
    family: &LatticeFamily,
    functions: &[TestFunction],
    radii: &[f64],
    ns: &[u64],
    tail_tol: f64,
) -> Result<FamilyScan> {
    if let Some(f) = functions.iter().find(|f| f.dim() != family.dim()) {
        return Err(Error::Dimension { expected: family.dim(), got: f.dim() });
    }
    if radii.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii must be finite and nonnegative"));
    }
    let members = ns
        .par_iter()
        .map(|&n| {
            scan_member(family, n, functions, radii, tail_tol).map_err(|e| Error::AtMember { n, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyScan { tail_tol, members })
}

impl MemberRecord {
    pub fn covolume_f64(&self) -> f64 {
        to_f64(&self.covolume)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn members() {
        assert_eq!(
            LatticeFamily::Counterexample.member(3).unwrap(),
            LatticeBasis::diagonal(&[rat(9), ratio(1, 3)]).unwrap()
        );
        let d = LatticeFamily::Dilation(LatticeBasis::identity(2));
        assert_eq!(d.member(4).unwrap().covolume(), rat(16));
        let s = LatticeFamily::Sublattice { base: LatticeBasis::identity(2), axis: 1 };
        assert_eq!(s.member(5).unwrap(), LatticeBasis::diagonal(&[rat(1), rat(5)]).unwrap());
        assert!(LatticeFamily::Counterexample.member(0).is_err());
    }

    #[test]
    fn dilation_counts() {
        let fam = LatticeFamily::Dilation(LatticeBasis::identity(2));
        let f = TestFunction::from_ints(2, &[1, 1]).unwrap();
        let scan = scan_family(&fam, &[f], &[1.5], &[1, 2, 3, 4, 5, 6], 1e-10).unwrap();
        let counts: Vec<u64> = scan.members.iter().map(|m| m.counts[0].count).collect();
        assert_eq!(counts, vec![8, 0, 0, 0, 0, 0]);
        assert!(scan.members[1..].iter().all(|m| m.defects[0].geometric.is_zero()));
    }

    #[test]
    fn counterexample_defect_grows() {
        let f = TestFunction::from_ints(2, &[1, 1]).unwrap();
        let scan = scan_family(&LatticeFamily::Counterexample, &[f], &[1.0], &[3, 4, 5, 6, 7], 1e-10).unwrap();
        for (m, n) in scan.members.iter().zip(3i64..) {
            assert_eq!(m.defects[0].geometric, rat(n - 1));
            assert!(m.defects[0].poisson_residual.unwrap() <= 1e-9);
        }
    }
}
