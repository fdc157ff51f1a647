use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Element of `PSL_2(R)`: a determinant-one real matrix, identified with its negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moebius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub const MATRIX_TOL: f64 = 1e-9;

impl Moebius {
    pub const IDENTITY: Moebius = Moebius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Normalises to determinant one; rejects (near-)singular input.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 1e-300) || !det.is_finite() {
            return Err(Error::invalid("Moebius matrix needs positive determinant"));
        }
        let s = det.sqrt().recip();
        Ok(Self { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn diag(lambda: f64) -> Self {
        Self { a: lambda, b: 0.0, c: 0.0, d: lambda.recip() }
    }

    /// Hyperbolic rotation by `angle` about `i`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Self { a: c, b: s, c: -s, d: c }
    }

    /// The matrix `[[sqrt y, x / sqrt y], [0, 1 / sqrt y]]` mapping `i` to `z`.
    pub fn moving_i_to(z: Complex64) -> Self {
        let s = z.im.sqrt();
        Self { a: s, b: z.re / s, c: 0.0, d: s.recip() }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// `d(i, M i)`, from `cosh d = |M|_F^2 / 2`.
    pub fn displacement_from_i(&self) -> f64 {
        (0.5 * self.frobenius_sq()).max(1.0).acosh()
    }

    /// Frobenius distance up to the sign ambiguity of `PSL_2`.
    pub fn distance(&self, other: &Moebius) -> f64 {
        let plus = (self.a - other.a).powi(2) + (self.b - other.b).powi(2) + (self.c - other.c).powi(2) + (self.d - other.d).powi(2);
        let minus = (self.a + other.a).powi(2) + (self.b + other.b).powi(2) + (self.c + other.c).powi(2) + (self.d + other.d).powi(2);
        plus.min(minus).sqrt()
    }

    pub fn approx_eq(&self, other: &Moebius) -> bool {
        self.distance(other) <= MATRIX_TOL
    }

    /// Rescale to determinant one to stop drift over long products.
    fn renormalized(self) -> Self {
        let det = self.det();
        if (det - 1.0).abs() <= 1e-15 {
            return self;
        }
        let s = det.sqrt().recip();
        Self { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }
}

impl Mul for Moebius {
    type Output = Moebius;

    fn mul(self, o: Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .renormalized()
    }
}

/// Hyperbolic distance in the upper half plane, evaluated as
/// `2 asinh(|z - w| / (2 sqrt(Im z Im w)))`, which equals
/// `arccosh(1 + |z - w|^2 / (2 Im z Im w))` without cancellation near zero.
pub fn hyp_dist(z: Complex64, w: Complex64) -> Result<f64> {
    if !(z.im > 0.0 && w.im > 0.0) {
        return Err(Error::invalid("points must lie in the upper half plane"));
    }
    Ok(dist_unchecked(z, w))
}

pub(crate) fn dist_unchecked(z: Complex64, w: Complex64) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// `2 arccosh(|tr M| / 2)` for hyperbolic `M`.
pub fn translation_length(m: &Moebius) -> Result<f64> {
    let t = m.trace().abs();
    if t <= 2.0 + 1e-12 {
        return Err(Error::invalid(format!("element with |trace| {t} is not hyperbolic")));
    }
    Ok(2.0 * (t / 2.0).acosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

    #[test]
    fn distance_examples() {
        assert!((hyp_dist(I, 2.0 * I).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(hyp_dist(I, I).unwrap(), 0.0);
        let w = Complex64::new(1.0, 1.0);
        assert!((hyp_dist(I, w).unwrap() - 1.5f64.acosh()).abs() < 1e-15);
        assert!(hyp_dist(I, Complex64::new(0.0, -1.0)).is_err());
    }

    #[test]
    fn translation_examples() {
        assert!((translation_length(&Moebius::diag(2.0)).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((translation_length(&Moebius::diag(3.0)).unwrap() - 2.0 * 3f64.ln()).abs() < 1e-14);
        assert!(translation_length(&Moebius::rotation(0.3)).is_err());
    }

    #[test]
    fn rotation_fixes_i_and_turns_by_angle() {
        let r = Moebius::rotation(PI / 2.0);
        assert!((r.apply(I) - I).norm() < 1e-15);
        let z = 3.0 * I;
        let w = r.apply(z);
        assert!((hyp_dist(I, w).unwrap() - 3f64.ln()).abs() < 1e-14);
        assert!((r * r * r * r).approx_eq(&Moebius::IDENTITY));
    }

    #[test]
    fn products_keep_unit_determinant() {
        let mut m = Moebius::IDENTITY;
        let g = Moebius::new(1.1, 0.2, 0.1, 0.95).unwrap();
        for _ in 0..30 {
            m = m * g * Moebius::rotation(0.7);
        }
        assert!((m.det() - 1.0).abs() < 1e-12);
        assert!(m.approx_eq(&Moebius { a: -m.a, b: -m.b, c: -m.c, d: -m.d }));
    }
}
