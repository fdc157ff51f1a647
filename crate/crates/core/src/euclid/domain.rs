use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{band_estimates, fit_band, DomainCheck};

use super::basis::LatticeBasis;

/// Parallelepiped `F = B (0,1)^d` with float inverse for membership tests.
pub struct Parallelepiped {
    b: Vec<Vec<f64>>,
    inv: Vec<Vec<f64>>,
}

impl Parallelepiped {
    pub fn new(basis: &LatticeBasis) -> Self {
        let inv = basis.matrix().inverse().expect("full rank").to_f64();
        Self { b: basis.to_f64(), inv }
    }

    fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        self.inv.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        self.b.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.coords(x).iter().all(|&u| u > 0.0 && u < 1.0)
    }

    /// Euclidean distance from an interior point to the boundary.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let u = self.coords(x);
        self.inv
            .iter()
            .zip(&u)
            .map(|(row, &uj)| {
                let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
                uj.min(1.0 - uj) / norm
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Surface area over volume: `2 sum_j |row_j(B^-1)|`.
    pub fn band_slope(&self) -> f64 {
        2.0 * self.inv.iter().map(|row| row.iter().map(|a| a * a).sum::<f64>().sqrt()).sum::<f64>()
    }

    /// The translate `x - B m` lying in the closure of `F`.
    pub fn reduce(&self, x: &[f64]) -> (Vec<i64>, Vec<f64>) {
        let m: Vec<i64> = self.coords(x).iter().map(|u| u.floor() as i64).collect();
        let shift = self.point(&m.iter().map(|&v| v as f64).collect::<Vec<_>>());
        (m, x.iter().zip(&shift).map(|(a, b)| a - b).collect())
    }
}

/// Disjointness of random nonzero translates, covering of random points, and the
/// boundary band fractions for the given widths.
pub fn check_parallelepiped(basis: &LatticeBasis, trials: u64, band_samples: u64, widths: &[f64], seed: u64) -> DomainCheck {
    let dom = Parallelepiped::new(basis);
    let d = dom.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_interior = |rng: &mut ChaCha8Rng| {
        let u: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        dom.point(&u)
    };

    let mut overlap_violations = 0;
    for _ in 0..trials {
        let m: Vec<i64> = loop {
            let m: Vec<i64> = (0..d).map(|_| rng.gen_range(-3..=3)).collect();
            if m.iter().any(|&v| v != 0) {
                break m;
            }
        };
        let g = dom.point(&m.iter().map(|&v| v as f64).collect::<Vec<_>>());
        for _ in 0..16 {
            let x = sample_interior(&mut rng);
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + b).collect();
            if dom.contains(&y) {
                overlap_violations += 1;
            }
        }
    }

    let extent = 4.0 * dom.b.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let mut cover_failures = 0;
    for _ in 0..trials {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-extent..extent)).collect();
        let (_, r) = dom.reduce(&x);
        if !dom.contains(&r) {
            cover_failures += 1;
        }
    }

    let distances: Vec<f64> = (0..band_samples).map(|_| dom.boundary_distance(&sample_interior(&mut rng))).collect();
    let band = band_estimates(&distances, widths);
    let (fitted_slope, intercept) = fit_band(&band);
    DomainCheck {
        translate_trials: trials,
        overlap_violations,
        cover_trials: trials,
        cover_failures,
        band,
        fitted_slope,
        intercept,
        predicted_slope: dom.band_slope(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_band() {
        let c = check_parallelepiped(&LatticeBasis::identity(2), 200, 20000, &[0.01, 0.02, 0.04], 7);
        assert_eq!(c.overlap_violations, 0);
        assert_eq!(c.cover_failures, 0);
        assert_eq!(c.predicted_slope, 4.0);
        assert!(c.passes(0.1), "{c:?}");
    }
}
