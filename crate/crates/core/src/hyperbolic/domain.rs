use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::domain::{band_estimates, fit_band, DomainCheck};

use super::ball::GroupBall;
use super::injrad::{sample_octagon, sample_rng};
use super::moebius::dist_unchecked;
use super::octagon::{OctagonGroup, I};

/// Uniform point in the hyperbolic disk of radius `r` about `i`.
fn sample_disk(r: f64, rng: &mut impl Rng) -> Complex64 {
    let rad = (1.0 + rng.gen::<f64>() * (r.cosh() - 1.0)).acosh();
    let w = Complex64::from_polar((0.5 * rad).tanh(), rng.gen::<f64>() * std::f64::consts::TAU);
    I * (1.0 + w) / (1.0 - w)
}

/// Disjointness, covering, and boundary-band checks for the octagon.
/// Translates are drawn from `ball`; covering points from a disk of radius 6.
pub fn check_octagon(
    group: &OctagonGroup,
    ball: &GroupBall,
    trials: u64,
    band_samples: u64,
    widths: &[f64],
    seed: u64,
) -> DomainCheck {
    let mut rng = sample_rng(seed, u64::MAX);
    let mut overlap_violations = 0;
    for _ in 0..trials {
        let e = &ball.entries[rng.gen_range(0..ball.entries.len())];
        for _ in 0..16 {
            let z = sample_octagon(group, &mut rng);
            if group.boundary_distance(e.matrix.apply(z)) > 1e-9 {
                overlap_violations += 1;
            }
        }
    }
    let mut cover_failures = 0;
    for _ in 0..trials {
        let z = sample_disk(6.0, &mut rng);
        match group.reduce(z, 10_000) {
            Some((word, w)) if group.boundary_distance(w) >= -1e-9 => {
                if dist_unchecked(group.evaluate(&word).apply(w), z) > 1e-6 {
                    cover_failures += 1;
                }
            }
            _ => cover_failures += 1,
        }
    }
    let distances: Vec<f64> = (0..band_samples)
        .map(|i| group.boundary_distance(sample_octagon(group, &mut sample_rng(seed, i))))
        .collect();
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
        predicted_slope: 8.0 * OctagonGroup::side_length() / (4.0 * std::f64::consts::PI),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnfoldingCheck {
    /// Monte Carlo value of `int_F sum_gamma psi(gamma z) dA`.
    pub folded: f64,
    pub half_width: f64,
    /// `int_H psi dA` in closed form.
    pub exact: f64,
}

/// Folding a compactly supported function onto the octagon preserves its
/// integral. `psi` is the tent `max(0, 1 - d(z, q) / r0)` centred at `q = i`, so
/// only elements with `d(i, gamma z) < r0` contribute.
pub fn check_unfolding(group: &OctagonGroup, ball: &GroupBall, r0: f64, samples: u64, seed: u64) -> UnfoldingCheck {
    let area = 4.0 * std::f64::consts::PI;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..samples {
        let z = sample_octagon(group, &mut sample_rng(seed, i));
        let tent = |w: Complex64| (1.0 - dist_unchecked(w, I) / r0).max(0.0);
        let mut v = tent(z);
        for e in &ball.entries {
            v += tent(e.matrix.apply(z));
        }
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    UnfoldingCheck {
        folded: area * mean,
        half_width: 1.96 * area * (var / n).sqrt(),
        exact: 2.0 * std::f64::consts::PI * (r0.sinh() / r0 - 1.0),
    }
}
