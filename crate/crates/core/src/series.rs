//! Certified one-dimensional sums `sum_{m in Z} a sinc(pi a s (m + t))^k`.
//!
//! The central block `|m| <= M` is summed directly. The two tails are handled by
//! expanding `sin^k` into exponentials `exp(i nu x)`: the non-oscillating part is a
//! Hurwitz zeta value, every oscillating part is either bounded by Abel summation
//! (`|sum w_m e^{i beta m}| <= w_{M+1} / |sin(beta/2)|`) or, when `beta` is close to a
//! multiple of `2 pi`, summed coherently with an explicit phase-drift bound.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::AccurateSum;
use crate::testfn::axis_ft;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedSum {
    pub value: f64,
    /// Rigorous bound on the truncation error (floating-point rounding excluded).
    pub error: f64,
    pub terms: u64,
}

const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
];

/// Hurwitz zeta `sum_{j >= 0} (q + j)^-s` for integer `s >= 2` and `q > 0`.
pub fn hurwitz_zeta(s: u32, q: f64) -> f64 {
    assert!(s >= 2 && q > 0.0);
    let sf = s as f64;
    let shift_to = 2.0 * sf + 24.0;
    let mut acc = AccurateSum::default();
    let mut x = q;
    while x < shift_to {
        acc.add(x.powf(-sf));
        x += 1.0;
    }
    acc.add(x.powf(1.0 - sf) / (sf - 1.0));
    acc.add(0.5 * x.powf(-sf));
    // sum_j B_2j/(2j)! (s)_{2j-1} x^{-s-2j+1}
    let mut rising = sf;
    let mut pow = x.powf(-sf - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            rising *= (sf + 2.0 * j as f64 - 1.0) * (sf + 2.0 * j as f64);
            pow /= x * x;
        }
        acc.add(c * rising * pow);
    }
    acc.value()
}

/// Coefficients of `sin^k x = sum_l c_l exp(i (2l - k) x)`.
fn sine_power_expansion(k: u32) -> Vec<(i64, Complex64)> {
    let scale = Complex64::new(0.0, 2.0).powi(k as i32).inv();
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut binom = 1.0f64;
    for l in 0..=k {
        let sign = if (k - l) % 2 == 0 { 1.0 } else { -1.0 };
        out.push((2 * l as i64 - k as i64, scale * binom * sign));
        binom = binom * (k - l) as f64 / (l + 1) as f64;
    }
    out
}

fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `int_{lo}^inf u^{-k} min(|beta| u, 1) du`, the coherent phase-drift envelope.
fn drift_integral(k: f64, beta: f64, lo: f64) -> f64 {
    let b = beta.abs();
    if b == 0.0 {
        return 0.0;
    }
    let pivot = (1.0 / b).max(lo);
    let near = if pivot > lo {
        if k == 2.0 {
            b * (pivot / lo).ln()
        } else {
            b * (lo.powf(2.0 - k) - pivot.powf(2.0 - k)) / (k - 2.0)
        }
    } else {
        0.0
    };
    near + pivot.powf(1.0 - k) / (k - 1.0)
}

/// Tail `sum_{m > M} sin^k(alpha (m + c)) (m + c)^{-k}` as (value, error bound).
fn tail(k: u32, alpha: f64, big_m: u64, c: f64, expansion: &[(i64, Complex64)]) -> (f64, f64) {
    let kf = k as f64;
    let start = big_m as f64 + c;
    let first = start + 1.0;
    let zeta = hurwitz_zeta(k, first);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for &(nu, coef) in expansion {
        if nu == 0 {
            value += coef * zeta;
            continue;
        }
        let beta = reduce_angle(nu as f64 * alpha);
        let abel = {
            let sb = (beta / 2.0).sin().abs();
            if sb > 0.0 {
                first.powf(-kf) / sb
            } else {
                f64::INFINITY
            }
        };
        let coherent = 2.0 * drift_integral(kf, beta, start);
        if coherent < abel {
            let phase = Complex64::from_polar(1.0, nu as f64 * alpha * c);
            value += coef * phase * zeta;
            error += coef.norm() * coherent;
        } else {
            error += coef.norm() * abel;
        }
    }
    (value.re, error)
}

/// Certified `sum_{m in Z} a sinc(pi a s (m + t))^k` to within `tol`.
pub fn sinc_power_progression(k: u32, a: f64, s: f64, t: f64, tol: f64, max_terms: u64) -> Result<CertifiedSum> {
    if !(a > 0.0 && s > 0.0 && tol > 0.0 && t.is_finite()) {
        return Err(Error::invalid("progression sum needs a, s, tol > 0 and finite shift"));
    }
    let t0 = t - t.round();
    let alpha = PI * a * s;
    let weight = a * alpha.powi(-(k as i32));
    let expansion = sine_power_expansion(k);
    let mut big_m: u64 = 256;
    let (tail_value, tail_error) = loop {
        let (v1, e1) = tail(k, alpha, big_m, t0, &expansion);
        let (v2, e2) = tail(k, alpha, big_m, -t0, &expansion);
        let err = weight * (e1 + e2);
        if err <= 0.5 * tol {
            break (weight * (v1 + v2), err);
        }
        if 2 * big_m + 1 > max_terms {
            return Err(Error::TailBudget { achieved: err, requested: tol });
        }
        big_m = (big_m * 4).min(max_terms / 2);
    };
    let mut acc = AccurateSum::default();
    let m = big_m as i64;
    for j in -m..=m {
        acc.add(axis_ft(k, a, s * (j as f64 + t0)));
    }
    acc.add(tail_value);
    Ok(CertifiedSum { value: acc.value(), error: tail_error, terms: 2 * big_m + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hurwitz_matches_riemann_and_direct() {
        assert!((hurwitz_zeta(2, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        // zeta(2, 1/2) = 3 zeta(2)
        assert!((hurwitz_zeta(2, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        let direct: f64 = (0..2_000_000).map(|j| (1000.25 + j as f64).powi(-5)).sum();
        let tail_est = (1000.25f64 + 2e6).powi(-4) / 4.0;
        assert!((hurwitz_zeta(5, 1000.25) - direct - tail_est).abs() < 1e-22);
    }

    #[test]
    fn expansion_reconstructs_sine_power() {
        for k in 2..=9 {
            let e = sine_power_expansion(k);
            for x in [0.3, 1.7, -2.2] {
                let v: Complex64 = e.iter().map(|(nu, c)| c * Complex64::from_polar(1.0, *nu as f64 * x)).sum();
                assert!((v.re - f64::sin(x).powi(k as i32)).abs() < 1e-13);
                assert!(v.im.abs() < 1e-13);
            }
        }
    }

    /// Fejer-kernel closed form of `sum_m sinc^2(pi x (m + c))`.
    fn fejer(x: f64, c: f64) -> f64 {
        let kmax = x.ceil() as i64;
        let s: f64 = (-kmax..=kmax)
            .map(|j| (1.0 - (j as f64).abs() / x).max(0.0) * (2.0 * PI * j as f64 * c).cos())
            .sum();
        s / x
    }

    #[test]
    fn order_two_sums_match_fejer_closed_form() {
        for &(a, s, t) in &[(3.0, 1.0, 0.0), (3.0, 1.0, 0.5), (1.0, 1.0, 0.3), (0.7, 1.3, 0.11), (2.5, 0.4, -0.37)] {
            let r = sinc_power_progression(2, a, s, t, 1e-12, 1 << 26).unwrap();
            let expected = a * fejer(a * s, t);
            assert!(r.error <= 1e-12);
            assert!((r.value - expected).abs() < 1e-11, "a={a} s={s} t={t}: {} vs {expected}", r.value);
        }
    }

    #[test]
    fn higher_order_matches_brute_force() {
        for &(k, a, s, t) in &[(3u32, 1.1, 0.9, 0.25), (4, 0.6, 1.7, 0.0), (5, 2.0, 0.3, 0.45)] {
            let r = sinc_power_progression(k, a, s, t, 1e-13, 1 << 26).unwrap();
            let brute: AccurateSum = (-3_000_000i64..=3_000_000).map(|m| axis_ft(k, a, s * (m as f64 + t))).collect();
            assert!((r.value - brute.value()).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            sinc_power_progression(2, 0.77, 1.13, 0.2, 1e-14, 1000),
            Err(Error::TailBudget { .. })
        ));
    }
}
