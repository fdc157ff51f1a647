//! Compactly supported tensor-product B-splines with closed-form Fourier transforms.
//!
//! `f(x) = prod_i beta_k(x_i / a_i)` where `beta_k` is the k-fold convolution of the
//! indicator of `[-1/2, 1/2]`. The transform uses `f^(xi) = int f(x) exp(-2 pi i <xi, x>) dx`,
//! which gives `f^(xi) = prod_i a_i sinc(pi a_i xi_i)^k`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{from_f64, parse_rational, rat, to_f64, Rational};

/// Scales outside `[1/MAX_SCALE, MAX_SCALE]` overflow `a^k` in the Fourier transform.
pub const MAX_SCALE: f64 = 1e6;
pub const MAX_ORDER: u32 = 40;
pub const MAX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    order: u32,
    scales: Vec<Rational>,
    scales_f64: Vec<f64>,
}

impl TestFunction {
    pub fn new(order: u32, scales: Vec<Rational>) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(Error::invalid(format!("B-spline order must lie in 2..={MAX_ORDER}, got {order}")));
        }
        if scales.is_empty() || scales.len() > MAX_DIM {
            return Err(Error::invalid(format!("dimension must lie in 1..={MAX_DIM}")));
        }
        if scales.iter().any(|a| !a.is_positive()) {
            return Err(Error::invalid("scales must be positive"));
        }
        let scales_f64: Vec<f64> = scales.iter().map(to_f64).collect();
        if scales_f64.iter().any(|a| !(1.0 / MAX_SCALE..=MAX_SCALE).contains(a)) {
            return Err(Error::invalid(format!("scales must lie in [1/{MAX_SCALE:e}, {MAX_SCALE:e}]")));
        }
        Ok(Self { order, scales, scales_f64 })
    }

    pub fn from_ints(order: u32, scales: &[i64]) -> Result<Self> {
        Self::new(order, scales.iter().map(|&a| rat(a)).collect())
    }

    pub fn from_f64(order: u32, scales: &[f64]) -> Result<Self> {
        Self::new(order, scales.iter().map(|&a| from_f64(a)).collect::<Result<_>>()?)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[Rational] {
        &self.scales
    }

    pub fn scales_f64(&self) -> &[f64] {
        &self.scales_f64
    }

    /// Half-widths `k a_i / 2` of the support box.
    pub fn support_half_widths(&self) -> Vec<Rational> {
        let k = Rational::new(BigInt::from(self.order), BigInt::from(2));
        self.scales.iter().map(|a| a * &k).collect()
    }

    /// Squared radius of the ball circumscribing the support box.
    pub fn support_radius_sq(&self) -> Rational {
        self.support_half_widths().iter().map(|h| h * h).sum()
    }

    pub fn support_radius(&self) -> f64 {
        to_f64(&self.support_radius_sq()).sqrt()
    }

    /// True when `x` lies in the open support box, i.e. where `f` can be nonzero.
    pub fn in_open_support(&self, x: &[Rational]) -> bool {
        self.support_half_widths().iter().zip(x).all(|(h, xi)| xi.abs() < *h)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut v = 1.0;
        for (xi, a) in x.iter().zip(&self.scales_f64) {
            v *= bspline(self.order, xi / a);
            if v == 0.0 {
                break;
            }
        }
        v
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Rational {
        debug_assert_eq!(x.len(), self.dim());
        let mut v = Rational::one();
        for (xi, a) in x.iter().zip(&self.scales) {
            v *= bspline_exact(self.order, &(xi / a));
            if v.is_zero() {
                break;
            }
        }
        v
    }

    pub fn value_at_origin(&self) -> Rational {
        num_traits::pow(bspline_exact(self.order, &Rational::zero()), self.dim())
    }

    pub fn eval_ft(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim());
        xi.iter()
            .zip(&self.scales_f64)
            .map(|(x, a)| axis_ft(self.order, *a, *x))
            .product()
    }

    /// Upper bound for `sum |f^(xi)|` over any point set whose points are pairwise
    /// at distance at least `2 * packing_radius`, restricted to points outside the box
    /// `max_i |xi_i| <= half_width`.
    ///
    /// Every point owns a disjoint cube of side `s = 2 packing_radius / sqrt(d)`; the
    /// coordinatewise-decreasing envelope `a min(1, (pi a t)^-k)` dominates the sum by the
    /// integral over the union of those cubes. Decays like `half_width^(1-k)` per axis.
    pub fn dual_tail_bound(&self, packing_radius: f64, half_width: f64) -> f64 {
        let d = self.dim() as f64;
        let s = 2.0 * packing_radius / d.sqrt();
        if !(s > 0.0) || half_width <= s {
            return f64::INFINITY;
        }
        let k = self.order as f64;
        let full: Vec<f64> = self
            .scales_f64
            .iter()
            .map(|&a| s * a + 2.0 * envelope_tail_integral(k, a, 0.0))
            .collect();
        let mut total = 0.0;
        for (i, &a) in self.scales_f64.iter().enumerate() {
            let tail = 2.0 * envelope_tail_integral(k, a, half_width - s);
            let others: f64 = full.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).product();
            total += tail * others;
        }
        total / s.powi(self.dim() as i32)
    }

    pub fn spec(&self) -> TestFunctionSpec {
        TestFunctionSpec::Bspline {
            k: self.order,
            a: self.scales.iter().map(ScaleLiteral::from_rational).collect(),
        }
    }
}

/// `int_{u0}^inf a min(1, (pi a u)^-k) du` for `u0 >= 0`.
fn envelope_tail_integral(k: f64, a: f64, u0: f64) -> f64 {
    let c = 1.0 / (PI * a);
    if u0 >= c {
        a * (PI * a).powf(-k) * u0.powf(1.0 - k) / (k - 1.0)
    } else {
        a * (c - u0) + a * c / (k - 1.0)
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// One-dimensional transform `a sinc(pi a xi)^k`.
pub fn axis_ft(order: u32, a: f64, xi: f64) -> f64 {
    a * sinc(PI * a * xi).powi(order as i32)
}

/// Centered cardinal B-spline of order `k` via the Cox-de Boor recursion on knots `0..=k`.
pub fn bspline(k: u32, x: f64) -> f64 {
    let k = k as usize;
    let t = x + k as f64 / 2.0;
    if !(t > 0.0 && t < k as f64) {
        return 0.0;
    }
    let j = (t.floor() as usize).min(k - 1);
    let mut n = vec![0.0f64; k + 1];
    n[j] = 1.0;
    for p in 2..=k {
        let denom = (p - 1) as f64;
        for i in 0..=(k - p) {
            let left = (t - i as f64) * n[i];
            let right = ((i + p) as f64 - t) * n[i + 1];
            n[i] = (left + right) / denom;
        }
    }
    n[0]
}

/// Exact centered B-spline by the truncated-power formula
/// `beta_k(x) = 1/(k-1)! sum_j (-1)^j C(k,j) (x + k/2 - j)_+^(k-1)`.
pub fn bspline_exact(k: u32, x: &Rational) -> Rational {
    let half = Rational::new(BigInt::from(k), BigInt::from(2));
    if x.abs() >= half {
        return Rational::zero();
    }
    let t = x + &half;
    let mut acc = Rational::zero();
    let mut binom = BigInt::one();
    for j in 0..=k {
        let u = &t - rat(j as i64);
        if u.is_positive() {
            let term = Rational::from_integer(binom.clone()) * num_traits::pow(u, (k - 1) as usize);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
    }
    let fact: BigInt = (1..k).map(BigInt::from).product();
    acc / Rational::from_integer(fact)
}

/// Serialized form used in experiment configs, e.g. `{"kind":"bspline","k":2,"a":[3,3]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TestFunctionSpec {
    Bspline { k: u32, a: Vec<ScaleLiteral> },
}

/// A scale given either as a JSON number or as an exact string such as `"1/3"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleLiteral {
    Number(serde_json::Number),
    Text(String),
}

impl ScaleLiteral {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            // Number's Display is the shortest round-trip form, so "0.1" stays exactly 1/10.
            ScaleLiteral::Number(n) => parse_rational(&n.to_string()),
            ScaleLiteral::Text(s) => parse_rational(s),
        }
    }

    fn from_rational(q: &Rational) -> Self {
        if q.is_integer() {
            if let Ok(v) = i64::try_from(q.to_integer()) {
                return ScaleLiteral::Number(v.into());
            }
        }
        ScaleLiteral::Text(q.to_string())
    }
}

impl TestFunctionSpec {
    pub fn build(&self) -> Result<TestFunction> {
        match self {
            TestFunctionSpec::Bspline { k, a } => {
                TestFunction::new(*k, a.iter().map(ScaleLiteral::to_rational).collect::<Result<_>>()?)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<TestFunction> {
        let spec: TestFunctionSpec = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn rejects_scales_outside_float_range() {
        let huge = format!("{}/3", "6".repeat(400));
        assert!(TestFunction::new(2, vec![parse_rational(&huge).unwrap()]).is_err());
        assert!(TestFunction::new(2, vec![ratio(1, 10_000_000)]).is_err());
        assert!(TestFunction::new(2, vec![ratio(1_000_000, 1)]).is_ok());
    }

    #[test]
    fn eval_examples() {
        let f = TestFunction::from_ints(2, &[1]).unwrap();
        assert_eq!(f.eval(&[0.0]), 1.0);
        let g = TestFunction::from_ints(2, &[3]).unwrap();
        assert_eq!(g.eval_exact(&[rat(1)]), ratio(2, 3));
        assert!((g.eval(&[1.0]) - 2.0 / 3.0).abs() < 1e-15);
        let h = TestFunction::from_ints(2, &[1, 1]).unwrap();
        assert_eq!(h.eval_exact(&[ratio(1, 2), ratio(1, 2)]), ratio(1, 4));
        assert_eq!(h.eval(&[0.5, 0.5]), 0.25);
    }

    #[test]
    fn ft_examples() {
        let f = TestFunction::from_ints(2, &[1]).unwrap();
        assert_eq!(f.eval_ft(&[0.0]), 1.0);
        let expected = (2.0 / PI).powi(2);
        assert!((f.eval_ft(&[0.5]) - expected).abs() < 1e-15);
        let g = TestFunction::from_ints(2, &[3]).unwrap();
        for m in [-4i32, -1, 1, 2, 7] {
            assert!(g.eval_ft(&[m as f64 / 3.0]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_and_recursive_evaluations_agree() {
        for k in 2..=12u32 {
            for num in -60..=60 {
                let x = ratio(num, 8);
                let exact = to_f64(&bspline_exact(k, &x));
                let fast = bspline(k, num as f64 / 8.0);
                assert!((exact - fast).abs() <= 1e-14 * exact.abs().max(1e-300) + 1e-16, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn bspline_integrates_to_one() {
        for k in 2..=8u32 {
            let n = 20000;
            let h = k as f64 / n as f64;
            let s: f64 = (0..n).map(|i| bspline(k, -(k as f64) / 2.0 + (i as f64 + 0.5) * h)).sum();
            assert!((s * h - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn fourier_inversion_on_grid() {
        // f(x) = int f^(xi) cos(2 pi xi x) dxi; the k=4 integrand decays like xi^-4.
        let f = TestFunction::from_f64(4, &[1.5]).unwrap();
        let cutoff = 60.0;
        let n = 240_000;
        let h = 2.0 * cutoff / n as f64;
        for x in [0.0, 0.3, 1.1, 2.5] {
            let mut s = crate::exact::AccurateSum::default();
            for i in 0..=n {
                let xi = -cutoff + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                s.add(w * f.eval_ft(&[xi]) * (2.0 * PI * xi * x).cos());
            }
            assert!((s.value() * h - f.eval(&[x])).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn support_and_nonnegativity() {
        let f = TestFunction::from_f64(3, &[0.5, 2.0]).unwrap();
        let h: Vec<f64> = f.support_half_widths().iter().map(to_f64).collect();
        assert_eq!(h, vec![0.75, 3.0]);
        assert_eq!(f.eval(&[0.75, 0.0]), 0.0);
        assert_eq!(f.eval(&[0.0, -3.0]), 0.0);
        assert!(f.eval(&[0.74, 2.9]) > 0.0);
        for i in -50..=50 {
            for j in -50..=50 {
                assert!(f.eval(&[i as f64 / 40.0, j as f64 / 10.0]) >= 0.0);
            }
        }
        assert_eq!(f.value_at_origin(), ratio(9, 16));
    }

    #[test]
    fn spec_round_trip_and_rejections() {
        let f = TestFunctionSpec::from_json(r#"{"kind":"bspline","k":2,"a":[3,3]}"#).unwrap();
        assert_eq!(f, TestFunction::from_ints(2, &[3, 3]).unwrap());
        let g = TestFunctionSpec::from_json(r#"{"kind":"bspline","k":4,"a":[0.1,"1/3"]}"#).unwrap();
        assert_eq!(g.scales(), &[ratio(1, 10), ratio(1, 3)]);
        assert_eq!(g.spec().build().unwrap(), g);
        assert!(TestFunctionSpec::from_json(r#"{"kind":"bspline","k":1,"a":[1]}"#).is_err());
        assert!(TestFunctionSpec::from_json(r#"{"kind":"bspline","k":2,"a":[0]}"#).is_err());
        assert!(TestFunctionSpec::from_json(r#"{"kind":"bspline","k":2,"a":[1],"x":1}"#).is_err());
        assert!(TestFunctionSpec::from_json(r#"{"kind":"gauss","k":2,"a":[1]}"#).is_err());
    }

    #[test]
    fn tail_bound_dominates_empirical_tail() {
        // Z^2 has packing radius 1/2 in its own dual.
        for (k, a) in [(2u32, 1.0), (4, 0.7), (6, 2.0)] {
            let f = TestFunction::from_f64(k, &[a, a]).unwrap();
            for m in [4i64, 8, 16] {
                let mut tail = 0.0;
                let lim = 400;
                for i in -lim..=lim {
                    for j in -lim..=lim {
                        if i.abs() > m || j.abs() > m {
                            tail += f.eval_ft(&[i as f64, j as f64]).abs();
                        }
                    }
                }
                let bound = f.dual_tail_bound(0.5, m as f64);
                assert!(tail <= bound, "k={k} a={a} m={m}: {tail} > {bound}");
            }
            // Decay rate M^(1-k).
            let r = f.dual_tail_bound(0.5, 64.0) / f.dual_tail_bound(0.5, 128.0);
            assert!((r - 2f64.powi(k as i32 - 1)).abs() / r < 0.2);
        }
    }
}
