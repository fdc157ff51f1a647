use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::moebius::{dist_unchecked, Moebius};

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Inradius of the regular octagon with interior angles `pi/4`: `cosh r = 1 + sqrt 2`.
pub fn inradius() -> f64 {
    (1.0 + 2f64.sqrt()).acosh()
}

/// Circumradius: `cosh R = 3 + 2 sqrt 2`.
pub fn circumradius() -> f64 {
    (3.0 + 2.0 * 2f64.sqrt()).acosh()
}

fn direction(k: usize) -> f64 {
    k as f64 * FRAC_PI_4
}

/// Side-pairing mapping side `j` of the octagon onto side `i`.
fn side_pairing(i: usize, j: usize) -> Moebius {
    let tau = Moebius::diag(inradius().exp());
    Moebius::rotation(direction(i)) * tau * Moebius::rotation(PI - direction(j))
}

/// The genus-two surface group realised by a regular octagon centred at `i`,
/// with sides glued in the pattern `a b a^-1 b^-1 c d c^-1 d^-1`.
#[derive(Clone, Debug)]
pub struct OctagonGroup {
    generators: [Moebius; 4],
    /// `g1, g1^-1, g2, g2^-1, ...`, matching letters `1, -1, 2, -2, ...`.
    pairings: [Moebius; 8],
    /// Isometry taking `i` to the midpoint of side `k` and the unit circle onto side `k`.
    side_frames: [Moebius; 8],
    /// Index into `pairings` of the element moving the tile across side `k` onto `F`.
    across_side: [usize; 8],
    relator_residual: f64,
}

impl OctagonGroup {
    pub fn generators(&self) -> &[Moebius; 4] {
        &self.generators
    }

    pub fn relator_residual(&self) -> f64 {
        self.relator_residual
    }

    pub fn pairing(&self, letter: i8) -> Moebius {
        let g = letter.unsigned_abs() as usize - 1;
        self.pairings[2 * g + usize::from(letter < 0)]
    }

    pub fn letters() -> [i8; 8] {
        [1, -1, 2, -2, 3, -3, 4, -4]
    }

    /// Abelianisation functional: exponent sum of the first generator.
    pub fn chi(word: &[i8]) -> i64 {
        word.iter().map(|&l| if l.abs() == 1 { l.signum() as i64 } else { 0 }).sum()
    }

    pub fn evaluate(&self, word: &[i8]) -> Moebius {
        word.iter().fold(Moebius::IDENTITY, |m, &l| m * self.pairing(l))
    }

    /// Signed distance from `z` to the geodesic carrying side `k`; positive on the
    /// side of the centre.
    pub fn side_distance(&self, k: usize, z: Complex64) -> f64 {
        let w = self.side_frames[k].inverse().apply(z);
        ((1.0 - w.norm_sqr()) / (2.0 * w.im)).asinh()
    }

    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        (0..8).map(|k| self.side_distance(k, z)).fold(f64::INFINITY, f64::min)
    }

    /// Membership in the open octagon (the Dirichlet domain of `i`).
    pub fn contains(&self, z: Complex64) -> bool {
        self.boundary_distance(z) > 0.0
    }

    /// Moves `z` into the closed octagon by repeatedly undoing the most violated
    /// side; returns the word `w` with `w^-1 z` in the octagon, or `None` if the
    /// iteration cap is hit.
    pub fn reduce(&self, mut z: Complex64, max_steps: usize) -> Option<(Vec<i8>, Complex64)> {
        let mut word = Vec::new();
        for _ in 0..max_steps {
            let (k, dist) = (0..8)
                .map(|k| (k, self.side_distance(k, z)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("eight sides");
            if dist >= -1e-12 {
                return Some((word, z));
            }
            let idx = self.across_side[k];
            let letter = Self::letters()[idx];
            word.push(letter);
            z = self.pairings[idx].inverse().apply(z);
        }
        None
    }

    /// Vertex between sides `k` and `k + 1`.
    pub fn vertex(k: usize) -> Complex64 {
        let lift = Moebius::diag((0.5 * circumradius()).exp());
        (Moebius::rotation(direction(k) + FRAC_PI_8) * lift).apply(I)
    }

    pub fn side_midpoint(k: usize) -> Complex64 {
        Self::side_frame(k).apply(I)
    }

    fn side_frame(k: usize) -> Moebius {
        Moebius::rotation(direction(k)) * Moebius::diag((0.5 * inradius()).exp())
    }

    /// Interior angle at vertex `k`, measured between the two sides in the
    /// tangent plane after moving the vertex to `i`.
    pub fn interior_angle(k: usize) -> f64 {
        let v = Self::vertex(k);
        let back = Moebius::moving_i_to(v).inverse();
        let to_disk = |z: Complex64| (z - I) / (z + I);
        let a = to_disk(back.apply(Self::side_midpoint(k))).arg();
        let b = to_disk(back.apply(Self::side_midpoint((k + 1) % 8))).arg();
        let mut diff = (a - b).abs();
        if diff > PI {
            diff = 2.0 * PI - diff;
        }
        diff
    }

    /// `(8 - 2) pi - sum of interior angles`.
    pub fn area_from_angles() -> f64 {
        6.0 * PI - (0..8).map(Self::interior_angle).sum::<f64>()
    }

    pub fn side_length() -> f64 {
        dist_unchecked(Self::vertex(7), Self::vertex(0))
    }
}

/// Builds the group and verifies the relator, the side pairings and the tiling
/// geometry; any residual above `1e-9` is an error.
pub fn build_octagon_group() -> Result<OctagonGroup> {
    let generators = [side_pairing(0, 2), side_pairing(3, 1), side_pairing(4, 6), side_pairing(7, 5)];
    let mut pairings = [Moebius::IDENTITY; 8];
    for (g, m) in generators.iter().enumerate() {
        pairings[2 * g] = *m;
        pairings[2 * g + 1] = m.inverse();
    }
    let [g1, g2, g3, g4] = generators;
    let rel = g1 * g2 * g1.inverse() * g2.inverse() * g3 * g4 * g3.inverse() * g4.inverse();
    let relator_residual = rel.distance(&Moebius::IDENTITY);

    let side_frames: [Moebius; 8] = std::array::from_fn(OctagonGroup::side_frame);
    let neighbour = |k: usize| (Moebius::rotation(direction(k)) * Moebius::diag(inradius().exp())).apply(I);
    let mut across_side = [usize::MAX; 8];
    for (idx, p) in pairings.iter().enumerate() {
        let image = p.apply(I);
        if let Some(k) = (0..8).find(|&k| dist_unchecked(image, neighbour(k)) < 1e-9) {
            across_side[k] = idx;
        }
    }
    let group = OctagonGroup { generators, pairings, side_frames, across_side, relator_residual };

    let mut problems = Vec::new();
    if relator_residual > 1e-9 {
        problems.push(format!("relator residual {relator_residual:e}"));
    }
    if across_side.contains(&usize::MAX) {
        problems.push("side pairings do not reach all eight neighbours".to_string());
    }
    for (idx, p) in pairings.iter().enumerate() {
        // Each pairing maps the midpoint of some side onto the midpoint of another.
        let hits = (0..8)
            .filter(|&j| (0..8).any(|i| dist_unchecked(p.apply(OctagonGroup::side_midpoint(j)), OctagonGroup::side_midpoint(i)) < 1e-9))
            .count();
        if hits != 1 {
            problems.push(format!("pairing {idx} maps {hits} side midpoints onto side midpoints"));
        }
    }
    let area = OctagonGroup::area_from_angles();
    if (area - 4.0 * PI).abs() > 1e-9 {
        problems.push(format!("area {area}"));
    }
    if problems.is_empty() {
        Ok(group)
    } else {
        Err(Error::Invariant(format!("octagon construction failed: {}", problems.join("; "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_invariants() {
        let g = build_octagon_group().unwrap();
        assert!(g.relator_residual() <= 1e-9);
        for k in 0..8 {
            assert!((OctagonGroup::interior_angle(k) - FRAC_PI_4).abs() < 1e-9);
        }
        assert_eq!(OctagonGroup::chi(&[1]), 1);
        assert_eq!(OctagonGroup::chi(&[2, 3, -4]), 0);
        assert_eq!(OctagonGroup::chi(&[1, 2, -1, -1]), -1);
    }

    #[test]
    fn area_by_polar_quadrature() {
        // Radial boundary function on one of 16 congruent sectors: tanh r = tanh(rho) / cos(phi).
        let rho = inradius();
        let f = |phi: f64| ((rho.tanh() / phi.cos()).atanh()).cosh() - 1.0;
        let n = 4000;
        let h = FRAC_PI_8 / n as f64;
        let mut s = f(0.0) + f(FRAC_PI_8);
        for j in 1..n {
            s += f(j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        let area = 16.0 * s * h / 3.0;
        assert!((area - 4.0 * PI).abs() < 1e-9, "{area}");
    }

    #[test]
    fn vertices_are_equidistant_from_centre_and_neighbours() {
        let g = build_octagon_group().unwrap();
        for k in 0..8 {
            let v = OctagonGroup::vertex(k);
            assert!((dist_unchecked(v, I) - circumradius()).abs() < 1e-9);
            assert!(g.side_distance(k, v).abs() < 1e-9);
            assert!(g.side_distance((k + 1) % 8, v).abs() < 1e-9);
        }
        assert!(g.contains(I));
        assert!((g.boundary_distance(I) - inradius()).abs() < 1e-9);
    }

    #[test]
    fn reduction_lands_in_octagon() {
        let g = build_octagon_group().unwrap();
        let z = Complex64::new(3.7, 0.02);
        let (word, w) = g.reduce(z, 1000).unwrap();
        assert!(g.boundary_distance(w) >= -1e-9);
        let back = g.evaluate(&word).apply(w);
        assert!(dist_unchecked(back, z) < 1e-8);
    }
}
