//! Z-covers in the abelian model: `chi: Gamma -> Z` surjective,
//! `Gamma_n = chi^-1(n Z)`, `Gamma_inf = ker chi`, characters `gamma -> lambda^chi(gamma)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::euclid::{dual_coset_sum, LatticeBasis};
use crate::exact::{rat, ratio, to_f64, AccurateSum, Rational};
use crate::report::serialize_rational;
use crate::testfn::TestFunction;

#[derive(Clone, Debug, PartialEq)]
pub struct ZCoverScheme {
    basis: LatticeBasis,
    chi: Vec<i64>,
    /// `v = (B^-1)^T chi`, so that `<v, B m> = chi . m`.
    shift: Vec<Rational>,
}

impl ZCoverScheme {
    pub fn new(basis: LatticeBasis, chi: Vec<i64>) -> Result<Self> {
        if chi.len() != basis.dim() {
            return Err(Error::Dimension { expected: basis.dim(), got: chi.len() });
        }
        let g = chi.iter().fold(0i64, |g, &c| g.gcd(&c));
        if g != 1 {
            return Err(Error::invalid("chi must be primitive (coefficient gcd 1) so that it is onto Z"));
        }
        let dual = basis.dual();
        let shift = (0..basis.dim())
            .map(|i| (0..basis.dim()).map(|j| dual.matrix().get(i, j) * rat(chi[j])).sum())
            .collect();
        Ok(Self { basis, chi, shift })
    }

    pub fn basis(&self) -> &LatticeBasis {
        &self.basis
    }

    pub fn chi(&self) -> &[i64] {
        &self.chi
    }

    pub fn dual_shift(&self) -> &[Rational] {
        &self.shift
    }

    pub fn covolume(&self) -> Rational {
        self.basis.covolume()
    }

    /// `covol(Gamma_n) = n covol(Gamma)`.
    pub fn member_covolume(&self, n: u64) -> Rational {
        self.covolume() * Rational::from_integer(BigInt::from(n))
    }

    pub fn chi_of(&self, coeffs: &[i64]) -> i64 {
        self.chi.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }
}

/// `covol * sum_gamma lambda^chi(gamma) f(gamma)` as an exact Laurent polynomial in `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePolynomial {
    #[serde(serialize_with = "serialize_coefficients")]
    pub coefficients: BTreeMap<i64, Rational>,
    #[serde(serialize_with = "serialize_rational")]
    pub covolume: Rational,
}

fn serialize_coefficients<S: serde::Serializer>(c: &BTreeMap<i64, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(c.len()))?;
    for (k, v) in c {
        map.serialize_entry(&k.to_string(), &v.to_string())?;
    }
    map.end()
}

impl TracePolynomial {
    /// `max |m|` over nonzero coefficients.
    pub fn degree(&self) -> u64 {
        self.coefficients.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: i64) -> Rational {
        self.coefficients.get(&m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn evaluate(&self, theta: f64) -> Complex64 {
        let mut re = AccurateSum::default();
        let mut im = AccurateSum::default();
        for (m, c) in &self.coefficients {
            let (s, co) = (TAU * theta * *m as f64).sin_cos();
            let c = to_f64(c);
            re.add(c * co);
            im.add(c * s);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Laurent coefficients `c_m = covol * sum_{chi(gamma) = m} f(gamma)`.
pub fn trace_polynomial(scheme: &ZCoverScheme, f: &TestFunction) -> Result<TracePolynomial> {
    if f.dim() != scheme.basis.dim() {
        return Err(Error::Dimension { expected: scheme.basis.dim(), got: f.dim() });
    }
    let covol = scheme.covolume();
    let mut coefficients: BTreeMap<i64, Rational> = BTreeMap::new();
    for p in scheme.basis.enumerate_within_sq(&f.support_radius_sq())? {
        if !f.in_open_support(&p.vector) {
            continue;
        }
        let v = f.eval_exact(&p.vector);
        if v.is_zero() {
            continue;
        }
        *coefficients.entry(scheme.chi_of(&p.coeffs)).or_insert_with(Rational::zero) += v * &covol;
    }
    Ok(TracePolynomial { coefficients, covolume: covol })
}

pub fn twisted_geometric(scheme: &ZCoverScheme, theta: f64, f: &TestFunction) -> Result<Complex64> {
    Ok(trace_polynomial(scheme, f)?.evaluate(theta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwistedSpectral {
    pub value: f64,
    pub tail_bound: f64,
}

/// `sum_{xi in theta v + Gamma*} f^(xi)`, real for the even test functions used here.
pub fn twisted_spectral(scheme: &ZCoverScheme, theta: f64, f: &TestFunction, tail_tol: f64) -> Result<TwistedSpectral> {
    if !theta.is_finite() {
        return Err(Error::invalid("theta must be finite"));
    }
    let t = theta - theta.floor();
    let shift: Vec<f64> = scheme.chi.iter().map(|&c| t * c as f64).collect();
    let s = dual_coset_sum(&scheme.basis, f, &shift, tail_tol)?;
    Ok(TwistedSpectral { value: s.value, tail_bound: s.tail_bound })
}

/// `sum_{gamma in ker chi} f(gamma)`, exact.
pub fn l2_trace(scheme: &ZCoverScheme, f: &TestFunction) -> Result<Rational> {
    let p = trace_polynomial(scheme, f)?;
    Ok(p.coefficient(0) / p.covolume)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma42Row {
    pub n: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub member_volume: Rational,
    /// `sum_{gamma in Gamma_inf} vol(Gamma_n \ G) f(gamma)`.
    #[serde(serialize_with = "serialize_rational")]
    pub orbital_sum: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub exact: Rational,
    pub float: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma42Report {
    #[serde(serialize_with = "serialize_rational")]
    pub l2_trace: Rational,
    pub rows: Vec<Lemma42Row>,
}

impl Lemma42Report {
    pub fn exact_agreement(&self) -> bool {
        self.rows.iter().all(|r| r.exact == self.l2_trace)
    }

    pub fn float_spread(&self) -> f64 {
        let target = to_f64(&self.l2_trace);
        self.rows.iter().map(|r| (r.float - target).abs()).fold(0.0, f64::max)
    }
}

/// The relative trace computed per member with volume and orbital factors kept separate.
pub fn check_lemma42_independence(scheme: &ZCoverScheme, f: &TestFunction, ns: &[u64]) -> Result<Lemma42Report> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::invalid("n list must be nonempty and positive"));
    }
    let p = trace_polynomial(scheme, f)?;
    let kernel_sum = p.coefficient(0) / &p.covolume;
    let kernel_points: Vec<f64> = kernel_values(scheme, f)?;
    let rows = ns
        .iter()
        .map(|&n| {
            let vol = scheme.member_covolume(n);
            let orbital = &vol * &kernel_sum;
            let vol_f = to_f64(&vol);
            let float: AccurateSum = kernel_points.iter().map(|v| vol_f * v).collect();
            Lemma42Row { n, exact: &orbital / &vol, float: float.value() / vol_f, orbital_sum: orbital, member_volume: vol }
        })
        .collect();
    Ok(Lemma42Report { l2_trace: kernel_sum, rows })
}

/// Float values of `f` at the kernel points in its support.
fn kernel_values(scheme: &ZCoverScheme, f: &TestFunction) -> Result<Vec<f64>> {
    Ok(scheme
        .basis
        .enumerate_within_sq(&f.support_radius_sq())?
        .into_iter()
        .filter(|p| scheme.chi_of(&p.coeffs) == 0)
        .map(|p| f.eval(&p.vector.iter().map(to_f64).collect::<Vec<_>>()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop43Row {
    pub n: u64,
    /// `sum_{Gamma_n} f - sum_{Gamma_inf} f`.
    #[serde(serialize_with = "serialize_rational")]
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop43Report {
    /// `max |chi(gamma)|` over lattice points where `f` is nonzero.
    pub threshold: u64,
    pub rows: Vec<Prop43Row>,
}

impl Prop43Report {
    /// `delta_n = 0` for `n > threshold`, and `delta_threshold != 0` when the threshold is positive.
    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| {
            if r.n > self.threshold {
                r.delta.is_zero()
            } else if r.n == self.threshold && self.threshold > 0 {
                !r.delta.is_zero()
            } else {
                true
            }
        })
    }
}

pub fn check_prop43(scheme: &ZCoverScheme, f: &TestFunction, ns: &[u64]) -> Result<Prop43Report> {
    if ns.contains(&0) {
        return Err(Error::invalid("n must be positive"));
    }
    let p = trace_polynomial(scheme, f)?;
    let rows = ns
        .iter()
        .map(|&n| {
            let delta = p
                .coefficients
                .iter()
                .filter(|(m, _)| **m != 0 && m.unsigned_abs() % n == 0)
                .map(|(_, c)| c)
                .sum::<Rational>()
                / &p.covolume;
            Prop43Row { n, delta }
        })
        .collect();
    Ok(Prop43Report { threshold: p.degree(), rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectIntegralReport {
    pub m: u64,
    pub degree: u64,
    /// `(1/m) sum_j tr R_{lambda_j}(f) / covol` at the m-th roots of unity.
    pub quadrature: f64,
    /// The same quadrature in exact arithmetic.
    #[serde(serialize_with = "serialize_rational")]
    pub quadrature_exact: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub l2_trace: Rational,
    pub theta_grid: Vec<f64>,
}

impl DirectIntegralReport {
    pub fn error(&self) -> f64 {
        (self.quadrature - to_f64(&self.l2_trace)).abs()
    }
}

fn check_quadrature_size(m: u64, degree: u64) -> Result<()> {
    if m == 0 || m <= 2 * degree {
        return Err(Error::invalid(format!("quadrature size {m} must exceed twice the trace degree {degree}")));
    }
    Ok(())
}

pub fn check_direct_integral(scheme: &ZCoverScheme, f: &TestFunction, m: u64) -> Result<DirectIntegralReport> {
    let p = trace_polynomial(scheme, f)?;
    let degree = p.degree();
    check_quadrature_size(m, degree)?;
    let theta_grid: Vec<f64> = (0..m).map(|j| j as f64 / m as f64).collect();
    let values: Vec<f64> = theta_grid.par_iter().map(|&t| p.evaluate(t).re).collect();
    let acc: AccurateSum = values.into_iter().collect();
    let covol = to_f64(&p.covolume);
    // Roots of unity average lambda^k to 1 when m | k and to 0 otherwise.
    let m_i = m as i64;
    let quadrature_exact = p
        .coefficients
        .iter()
        .filter(|(k, _)| k.rem_euclid(m_i) == 0)
        .map(|(_, c)| c)
        .sum::<Rational>()
        / &p.covolume;
    Ok(DirectIntegralReport {
        m,
        degree,
        quadrature: acc.value() / m as f64 / covol,
        quadrature_exact,
        l2_trace: p.coefficient(0) / &p.covolume,
        theta_grid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralIntegral {
    pub value: f64,
    pub tail_bound: f64,
}

/// `int_0^1 twisted_spectral(theta) d theta / covol` by the same exact quadrature.
pub fn spectral_measure_integral(scheme: &ZCoverScheme, f: &TestFunction, m: u64, tail_tol: f64) -> Result<SpectralIntegral> {
    let degree = trace_polynomial(scheme, f)?.degree();
    check_quadrature_size(m, degree)?;
    let covol = to_f64(&scheme.covolume());
    let parts = (0..m)
        .into_par_iter()
        .map(|j| twisted_spectral(scheme, j as f64 / m as f64, f, tail_tol * covol))
        .collect::<Result<Vec<_>>>()?;
    let acc: AccurateSum = parts.iter().map(|p| p.value).collect();
    let tail = parts.iter().map(|p| p.tail_bound).sum::<f64>() / m as f64;
    Ok(SpectralIntegral { value: acc.value() / m as f64 / covol, tail_bound: tail / covol })
}

/// `diag(n^2, 1/n)` with `chi` the first coordinate: the kernel is the dense
/// `(1/n) Z` axis, so the relative trace of `beta_2 (x) beta_2` grows like `n`.
pub fn degenerate_stress(ns: &[u64]) -> Result<Vec<(u64, Rational)>> {
    let f = TestFunction::from_ints(2, &[1, 1])?;
    ns.iter()
        .map(|&n| {
            let n_i = i64::try_from(n).map_err(|_| Error::invalid("n too large"))?;
            if n_i <= 0 {
                return Err(Error::invalid("n must be positive"));
            }
            let basis = LatticeBasis::diagonal(&[rat(n_i * n_i), ratio(1, n_i)])?;
            let scheme = ZCoverScheme::new(basis, vec![1, 0])?;
            Ok((n, l2_trace(&scheme, &f)?.abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> (ZCoverScheme, TestFunction) {
        (
            ZCoverScheme::new(LatticeBasis::identity(2), vec![0, 1]).unwrap(),
            TestFunction::from_ints(2, &[3, 3]).unwrap(),
        )
    }

    #[test]
    fn twisted_examples() {
        let (s, f) = standard();
        let g = twisted_geometric(&s, 0.5, &f).unwrap();
        assert!((g.re - 1.0).abs() < 1e-14 && g.im.abs() < 1e-14);
        let sp = twisted_spectral(&s, 0.5, &f, 1e-10).unwrap();
        assert!((sp.value - 1.0).abs() <= 1e-10);
        let sp1 = twisted_spectral(&s, 1.5, &f, 1e-10).unwrap();
        assert_eq!(sp.value, sp1.value);
        let g0 = twisted_geometric(&s, 0.0, &f).unwrap();
        assert!((g0.re - 9.0).abs() < 1e-13);
    }

    #[test]
    fn trace_examples() {
        let (s, f) = standard();
        assert_eq!(l2_trace(&s, &f).unwrap(), rat(3));
        let s5 = ZCoverScheme::new(LatticeBasis::diagonal(&[rat(1), rat(5)]).unwrap(), vec![0, 1]).unwrap();
        assert_eq!(l2_trace(&s5, &f).unwrap(), rat(3));
        let lemma = check_lemma42_independence(&s, &f, &[1, 2, 3, 4, 5]).unwrap();
        assert!(lemma.exact_agreement());
        assert!(lemma.float_spread() <= 1e-12);
        assert!(ZCoverScheme::new(LatticeBasis::identity(2), vec![0, 0]).is_err());
        assert!(ZCoverScheme::new(LatticeBasis::identity(2), vec![2, 4]).is_err());
    }

    #[test]
    fn prop43_examples() {
        let (s, f) = standard();
        let r = check_prop43(&s, &f, &[1, 2, 3, 4]).unwrap();
        assert_eq!(r.threshold, 2);
        assert_eq!(r.rows[0].delta, rat(6));
        assert!(!r.rows[1].delta.is_zero());
        assert!(r.rows[2].delta.is_zero() && r.rows[3].delta.is_zero());
        assert!(r.consistent());
    }

    #[test]
    fn direct_integral_examples() {
        let (s, f) = standard();
        let a = check_direct_integral(&s, &f, 5).unwrap();
        assert_eq!(a.degree, 2);
        assert_eq!(a.quadrature_exact, rat(3));
        assert!(a.error() <= 1e-12);
        let b = check_direct_integral(&s, &f, 64).unwrap();
        assert_eq!(b.quadrature_exact, a.quadrature_exact);
        assert!(check_direct_integral(&s, &f, 4).is_err());
        let sm = spectral_measure_integral(&s, &f, 5, 1e-11).unwrap();
        assert!((sm.value - 3.0).abs() <= 1e-10);
    }

    #[test]
    fn degenerate_direction_grows() {
        let v = degenerate_stress(&[1, 2, 3, 4, 5, 6]).unwrap();
        for (n, t) in &v {
            assert_eq!(*t, rat(*n as i64));
        }
    }
}
