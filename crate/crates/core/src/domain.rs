//! Monte Carlo checks of the fundamental-domain axioms shared by the Euclidean
//! and hyperbolic models.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandEstimate {
    pub width: f64,
    /// Fraction of domain volume within `width` of the boundary.
    pub fraction: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainCheck {
    pub translate_trials: u64,
    /// Sampled interior points that a nontrivial translate mapped back into the domain.
    pub overlap_violations: u64,
    pub cover_trials: u64,
    pub cover_failures: u64,
    pub band: Vec<BandEstimate>,
    /// Least-squares slope of `fraction` against `width` (line through the origin).
    pub fitted_slope: f64,
    /// Intercept of the unconstrained least-squares line.
    pub intercept: f64,
    pub predicted_slope: f64,
}

impl DomainCheck {
    /// Axioms hold on the sample and the band fraction is linear in the width:
    /// intercept indistinguishable from zero, slope within `slope_rel_tol` of the
    /// perimeter-to-volume prediction.
    pub fn passes(&self, slope_rel_tol: f64) -> bool {
        let max_err = self.band.iter().map(|b| b.std_error).fold(0.0, f64::max);
        self.overlap_violations == 0
            && self.cover_failures == 0
            && self.intercept.abs() <= 4.0 * max_err + 1e-12
            && ((self.fitted_slope - self.predicted_slope) / self.predicted_slope).abs() <= slope_rel_tol
    }
}

/// Band fractions from per-sample boundary distances.
pub fn band_estimates(distances: &[f64], widths: &[f64]) -> Vec<BandEstimate> {
    let n = distances.len() as f64;
    widths
        .iter()
        .map(|&w| {
            let hits = distances.iter().filter(|&&d| d < w).count() as f64;
            let p = hits / n;
            BandEstimate { width: w, fraction: p, std_error: (p * (1.0 - p) / n).sqrt() }
        })
        .collect()
}

/// (slope through origin, intercept of free fit).
pub fn fit_band(band: &[BandEstimate]) -> (f64, f64) {
    let sxx: f64 = band.iter().map(|b| b.width * b.width).sum();
    let sxy: f64 = band.iter().map(|b| b.width * b.fraction).sum();
    let through_origin = sxy / sxx;
    let n = band.len() as f64;
    let mx = band.iter().map(|b| b.width).sum::<f64>() / n;
    let my = band.iter().map(|b| b.fraction).sum::<f64>() / n;
    let cov: f64 = band.iter().map(|b| (b.width - mx) * (b.fraction - my)).sum();
    let var: f64 = band.iter().map(|b| (b.width - mx).powi(2)).sum();
    let intercept = if var > 0.0 { my - cov / var * mx } else { 0.0 };
    (through_origin, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let band: Vec<_> = [0.01, 0.02, 0.04]
            .iter()
            .map(|&w| BandEstimate { width: w, fraction: 3.0 * w, std_error: 0.0 })
            .collect();
        let (s, c) = fit_band(&band);
        assert!((s - 3.0).abs() < 1e-12 && c.abs() < 1e-12);
    }

    #[test]
    fn band_counts() {
        let b = band_estimates(&[0.1, 0.2, 0.3, 0.4], &[0.25]);
        assert_eq!(b[0].fraction, 0.5);
    }
}
