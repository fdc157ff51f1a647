use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{to_f64, AccurateSum, Rational};
use crate::series::sinc_power_progression;
use crate::testfn::TestFunction;

use super::basis::LatticeBasis;
use super::enumerate::{enumerate_coefficients, DEFAULT_POINT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMethod {
    /// Diagonal dual basis: product of certified one-dimensional sums.
    Separable,
    /// Dual points in a box plus the cube-packing tail certificate.
    Enumeration,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralSum {
    pub value: f64,
    /// Certified bound on the omitted part of the dual sum.
    pub tail_bound: f64,
    pub terms: u64,
    pub method: SpectralMethod,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlancherelDefect {
    /// `sum_{gamma != 0} f(gamma)`, exact.
    pub geometric: Rational,
    /// `|spectral_sum - f(0)|`.
    pub spectral: f64,
    pub tail_bound: f64,
}

impl PlancherelDefect {
    pub fn geometric_f64(&self) -> f64 {
        to_f64(&self.geometric)
    }

    pub fn discrepancy(&self) -> f64 {
        (self.geometric_f64() - self.spectral).abs()
    }
}

fn check_dim(basis: &LatticeBasis, f: &TestFunction) -> Result<()> {
    if basis.dim() != f.dim() {
        return Err(Error::Dimension { expected: basis.dim(), got: f.dim() });
    }
    Ok(())
}

/// Exact `sum_{gamma in L} f(gamma)`, optionally without `gamma = 0`.
pub fn geometric_sum(basis: &LatticeBasis, f: &TestFunction, exclude_zero: bool) -> Result<Rational> {
    check_dim(basis, f)?;
    let points = basis.enumerate_within_sq(&f.support_radius_sq())?;
    let mut total = Rational::zero();
    for p in points {
        if exclude_zero && p.is_zero() {
            continue;
        }
        if f.in_open_support(&p.vector) {
            total += f.eval_exact(&p.vector);
        }
    }
    Ok(total)
}

/// Floating-point counterpart of [`geometric_sum`] for large point sets.
pub fn geometric_sum_f64(basis: &LatticeBasis, f: &TestFunction, exclude_zero: bool) -> Result<f64> {
    check_dim(basis, f)?;
    let b = basis.to_f64();
    let shift = vec![0.0; b.len()];
    let coeffs = enumerate_coefficients(&b, &shift, f.support_radius(), DEFAULT_POINT_BUDGET)?;
    let mut acc = AccurateSum::default();
    for c in coeffs {
        if exclude_zero && c.iter().all(|&x| x == 0) {
            continue;
        }
        acc.add(f.eval(&basis.vector_f64(&c)));
    }
    Ok(acc.value())
}

/// `sum_{m in Z^d} f^(D (m + shift))` where `D` is the dual basis of `basis`,
/// i.e. the Fourier transform summed over a coset of the dual lattice.
/// The returned tail bound is at most `tol`; no covolume normalisation.
pub fn dual_coset_sum(basis: &LatticeBasis, f: &TestFunction, shift: &[f64], tol: f64) -> Result<SpectralSum> {
    check_dim(basis, f)?;
    if shift.len() != basis.dim() {
        return Err(Error::Dimension { expected: basis.dim(), got: shift.len() });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tail tolerance must be positive"));
    }
    let dual = basis.dual();
    if dual.is_diagonal() {
        separable_sum(&dual, f, shift, tol)
    } else {
        enumerated_sum(&dual, f, shift, tol)
    }
}

fn separable_sum(dual: &LatticeBasis, f: &TestFunction, shift: &[f64], tol: f64) -> Result<SpectralSum> {
    let d = dual.dim();
    let steps: Vec<f64> = (0..d).map(|i| to_f64(dual.matrix().get(i, i)).abs()).collect();
    let mut axis_tol = tol / d as f64;
    for _ in 0..8 {
        let parts = (0..d)
            .map(|i| sinc_power_progression(f.order(), f.scales_f64()[i], steps[i], shift[i], axis_tol, DEFAULT_POINT_BUDGET))
            .collect::<Result<Vec<_>>>()?;
        let value: f64 = parts.iter().map(|p| p.value).product();
        let upper: f64 = parts.iter().map(|p| p.value.abs() + p.error).product();
        let lower: f64 = parts.iter().map(|p| p.value.abs()).product();
        let bound = upper - lower;
        if bound <= tol {
            let terms = parts.iter().map(|p| p.terms).product();
            return Ok(SpectralSum { value, tail_bound: bound, terms, method: SpectralMethod::Separable });
        }
        axis_tol *= 0.5 * tol / bound;
    }
    Err(Error::TailBudget { achieved: f64::NAN, requested: tol })
}

fn enumerated_sum(dual: &LatticeBasis, f: &TestFunction, shift: &[f64], tol: f64) -> Result<SpectralSum> {
    let d = dual.dim();
    let packing = 0.5 * dual.shortest_vector().norm;
    let cube = 2.0 * packing / (d as f64).sqrt();
    let bound_at = |m: f64| f.dual_tail_bound(packing, m);
    let mut hi = 2.0 * cube;
    let mut doublings = 0;
    while bound_at(hi) > tol {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::TailBudget { achieved: bound_at(hi), requested: tol });
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if bound_at(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let half_width = hi;
    let radius = half_width * (d as f64).sqrt();
    let dual_covol = to_f64(&dual.covolume());
    let unit_ball = unit_ball_volume(d);
    let estimate = unit_ball * (radius + packing).powi(d as i32) / dual_covol;
    if estimate > DEFAULT_POINT_BUDGET as f64 {
        return Err(Error::TailBudget { achieved: bound_at(budget_width(d, dual_covol, packing)), requested: tol });
    }
    let b = dual.to_f64();
    let coeffs = enumerate_coefficients(&b, shift, radius, DEFAULT_POINT_BUDGET)?;
    let mut acc = AccurateSum::default();
    let mut xi = vec![0.0; d];
    for c in &coeffs {
        for (i, row) in b.iter().enumerate() {
            xi[i] = row.iter().zip(c).zip(shift).map(|((bij, cj), tj)| bij * (*cj as f64 + tj)).sum();
        }
        acc.add(f.eval_ft(&xi));
    }
    Ok(SpectralSum {
        value: acc.value(),
        tail_bound: bound_at(half_width),
        terms: coeffs.len() as u64,
        method: SpectralMethod::Enumeration,
    })
}

fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Largest box half-width whose enumeration fits the point budget.
fn budget_width(d: usize, dual_covol: f64, packing: f64) -> f64 {
    let r = (DEFAULT_POINT_BUDGET as f64 * dual_covol / unit_ball_volume(d)).powf(1.0 / d as f64) - packing;
    r.max(0.0) / (d as f64).sqrt()
}

/// `covol^-1 sum_{xi in L*} f^(xi)` with a certified tail below `tol`.
pub fn spectral_sum(basis: &LatticeBasis, f: &TestFunction, tol: f64) -> Result<SpectralSum> {
    let covol = to_f64(&basis.covolume());
    let raw = dual_coset_sum(basis, f, &vec![0.0; basis.dim()], tol * covol)?;
    Ok(SpectralSum { value: raw.value / covol, tail_bound: raw.tail_bound / covol, ..raw })
}

/// Defect `|sum_{gamma != 0} f(gamma)|` from both sides of the Poisson identity.
pub fn plancherel_defect(basis: &LatticeBasis, f: &TestFunction, tol: f64) -> Result<PlancherelDefect> {
    let geometric = geometric_sum(basis, f, true)?.abs();
    let spectral = spectral_sum(basis, f, tol)?;
    let origin = to_f64(&f.value_at_origin());
    Ok(PlancherelDefect { geometric, spectral: (spectral.value - origin).abs(), tail_bound: spectral.tail_bound })
}
