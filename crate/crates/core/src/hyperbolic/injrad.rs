use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::ball::{BallEntry, GroupBall};
use super::moebius::{dist_unchecked, translation_length, Moebius};
use super::octagon::{circumradius, OctagonGroup, I};

/// Subgroups of the octagon group cut out by `chi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypScheme {
    /// `Gamma_n = chi^-1(n Z)`, index `n`.
    Index(u64),
    /// `ker chi`, the limit of the sequence above.
    Kernel,
}

impl HypScheme {
    pub fn contains(&self, chi: i64) -> bool {
        match *self {
            HypScheme::Index(n) => chi.rem_euclid(n as i64) == 0,
            HypScheme::Kernel => chi == 0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            HypScheme::Index(0) => Err(Error::invalid("subgroup index must be positive")),
            HypScheme::Index(n) if n > i64::MAX as u64 => Err(Error::invalid("subgroup index too large")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InjRadius {
    /// Half the minimal displacement of `z`, or a lower bound when uncertified.
    pub value: f64,
    /// True when every element that could beat `value` lies inside the ball.
    pub certified: bool,
}

/// Upper bound on `d(z, gamma z)` deducible without the element: elements with
/// `d(i, gamma i) > bound + 2 d(i, z)` cannot beat `bound`.
fn reach(ball: &GroupBall, z: Complex64) -> f64 {
    ball.cutoff - 2.0 * dist_unchecked(I, z)
}

fn scheme_entries<'a>(ball: &'a GroupBall, scheme: HypScheme) -> impl Iterator<Item = &'a BallEntry> {
    ball.entries.iter().filter(move |e| scheme.contains(e.chi))
}

/// `InjRad(z) = 1/2 min_{gamma != 1} d(z, gamma z)` over the subgroup.
pub fn inj_rad(ball: &GroupBall, scheme: HypScheme, z: Complex64) -> Result<InjRadius> {
    scheme.validate()?;
    if !(z.im > 0.0) {
        return Err(Error::invalid("point must lie in the upper half plane"));
    }
    let dz = dist_unchecked(I, z);
    let mut best = f64::INFINITY;
    for e in scheme_entries(ball, scheme) {
        if e.displacement - 2.0 * dz >= best {
            break;
        }
        best = best.min(dist_unchecked(z, e.matrix.apply(z)));
    }
    let horizon = reach(ball, z);
    let certified = ball.complete() && best <= horizon;
    Ok(InjRadius { value: 0.5 * best.min(horizon.max(0.0)), certified })
}

/// `Some([InjRad(z) <= r])`, or `None` when the ball cannot decide.
pub fn inj_rad_at_most(ball: &GroupBall, scheme: HypScheme, z: Complex64, r: f64) -> Option<bool> {
    let dz = dist_unchecked(I, z);
    let target = 2.0 * r;
    for e in scheme_entries(ball, scheme) {
        if e.displacement - 2.0 * dz > target {
            break;
        }
        if dist_unchecked(z, e.matrix.apply(z)) <= target {
            return Some(true);
        }
    }
    (ball.complete() && target <= reach(ball, z)).then_some(false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Systole {
    pub length: f64,
    pub word: Vec<i8>,
    /// Every conjugacy class of length `<= length` has a representative in the ball.
    pub certified: bool,
}

/// Shortest translation length in the subgroup. Subgroups here are normal, so a
/// conjugate with axis through the octagon moves `i` by at most `length + 2 R_c`.
pub fn systole(ball: &GroupBall, scheme: HypScheme) -> Result<Systole> {
    scheme.validate()?;
    let mut best: Option<(f64, &BallEntry)> = None;
    for e in scheme_entries(ball, scheme) {
        let l = translation_length(&e.matrix)?;
        if best.is_none_or(|(b, _)| l < b - 1e-12) {
            best = Some((l, e));
        }
    }
    let horizon = ball.cutoff - 2.0 * circumradius();
    match best {
        Some((length, e)) => Ok(Systole { length, word: e.word.clone(), certified: ball.complete() && length <= horizon }),
        None => Ok(Systole { length: horizon.max(0.0), word: Vec::new(), certified: false }),
    }
}

/// Uniform sample (hyperbolic area) from the octagon: inverse-CDF polar sampling
/// on the circumscribed disk, `cosh r = 1 + u (cosh R_c - 1)`, then rejection.
pub fn sample_octagon(group: &OctagonGroup, rng: &mut impl Rng) -> Complex64 {
    let ch = circumradius().cosh();
    loop {
        let r = (1.0 + rng.gen::<f64>() * (ch - 1.0)).acosh();
        let phi = rng.gen::<f64>() * std::f64::consts::TAU;
        let w = Complex64::from_polar((0.5 * r).tanh(), phi);
        let z = I * (1.0 + w) / (1.0 - w);
        if group.contains(z) {
            return z;
        }
    }
}

/// Independent stream per sample index, so results do not depend on threading.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn sample_points(group: &OctagonGroup, samples: u64, seed: u64) -> Vec<Complex64> {
    (0..samples).into_par_iter().map(|i| sample_octagon(group, &mut sample_rng(seed, i))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BsEstimate {
    pub estimate: f64,
    /// Wald 95% half-width.
    pub half_width: f64,
    pub hits: u64,
    pub samples: u64,
    /// Samples the ball could not decide; they count as misses in `estimate`.
    pub undecided: u64,
}

impl BsEstimate {
    pub fn from_counts(hits: u64, samples: u64, undecided: u64) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        Self { estimate: p, half_width: 1.96 * (p * (1.0 - p) / n).sqrt(), hits, samples, undecided }
    }
}

/// `P(InjRad <= r)` over precomputed sample points.
pub fn bs_probability_at(ball: &GroupBall, scheme: HypScheme, r: f64, points: &[Complex64]) -> Result<BsEstimate> {
    scheme.validate()?;
    if points.is_empty() {
        return Err(Error::invalid("at least one sample is required"));
    }
    let decisions: Vec<Option<bool>> = points.par_iter().map(|&z| inj_rad_at_most(ball, scheme, z, r)).collect();
    let hits = decisions.iter().filter(|d| **d == Some(true)).count() as u64;
    let undecided = decisions.iter().filter(|d| d.is_none()).count() as u64;
    Ok(BsEstimate::from_counts(hits, points.len() as u64, undecided))
}

pub fn mc_bs_probability(
    group: &OctagonGroup,
    ball: &GroupBall,
    scheme: HypScheme,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<BsEstimate> {
    bs_probability_at(ball, scheme, r, &sample_points(group, samples, seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prop24Outcome {
    /// `InjRad(z) <= R`, from displacements of the point.
    pub side_a: bool,
    /// Some nontrivial `gamma` in the subgroup has `x^-1 gamma x` in
    /// `U_R K U_R^-1`, i.e. `|x^-1 gamma x|_F^2 <= 2 cosh 2R`, with `x i = z`.
    pub side_b: bool,
    pub indeterminate: bool,
    pub certified: bool,
}

pub fn prop24_check(ball: &GroupBall, scheme: HypScheme, z: Complex64, r: f64) -> Result<Prop24Outcome> {
    let inj = inj_rad(ball, scheme, z)?;
    let x = Moebius::moving_i_to(z);
    let xinv = x.inverse();
    let threshold = 2.0 * (2.0 * r).cosh();
    let dz = dist_unchecked(I, z);
    let side_b = scheme_entries(ball, scheme)
        .take_while(|e| e.displacement - 2.0 * dz <= 2.0 * r + 1e-9)
        .any(|e| (xinv * e.matrix * x).frobenius_sq() <= threshold);
    Ok(Prop24Outcome {
        side_a: inj.value <= r,
        side_b,
        indeterminate: (inj.value - r).abs() < 1e-6,
        certified: inj.certified && 2.0 * r <= reach(ball, z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::ball::{group_ball, DEFAULT_ELEMENT_BUDGET};
    use crate::hyperbolic::octagon::{build_octagon_group, inradius};

    fn setup(cutoff: f64) -> (OctagonGroup, GroupBall) {
        let g = build_octagon_group().unwrap();
        let b = group_ball(&g, cutoff, circumradius(), DEFAULT_ELEMENT_BUDGET).unwrap();
        (g, b)
    }

    #[test]
    fn centre_injectivity_radius_is_inradius() {
        let (_, b) = setup(9.0);
        let r = inj_rad(&b, HypScheme::Index(1), I).unwrap();
        assert!(r.certified);
        // The nearest orbit points of the centre are its eight neighbours.
        assert!((r.value - inradius()).abs() < 1e-9);
        let brute = b.entries.iter().map(|e| dist_unchecked(I, e.matrix.apply(I))).fold(f64::INFINITY, f64::min);
        assert!((r.value - 0.5 * brute).abs() < 1e-12);
    }

    #[test]
    fn injectivity_radius_matches_brute_force_and_grows_with_n() {
        let (g, b) = setup(9.5);
        let mut rng = sample_rng(3, 0);
        for _ in 0..50 {
            let z = sample_octagon(&g, &mut rng);
            let mut prev = 0.0;
            for n in [1, 2, 4, 8] {
                let s = HypScheme::Index(n);
                let r = inj_rad(&b, s, z).unwrap();
                let brute = b
                    .entries
                    .iter()
                    .filter(|e| s.contains(e.chi))
                    .map(|e| dist_unchecked(z, e.matrix.apply(z)))
                    .fold(f64::INFINITY, f64::min);
                assert!(r.certified);
                assert!((r.value - 0.5 * brute).abs() < 1e-12);
                assert!(r.value >= prev - 1e-12);
                prev = r.value;
            }
        }
    }

    #[test]
    fn systole_of_full_group_is_certified() {
        let (_, b) = setup(9.0);
        let s = systole(&b, HypScheme::Index(1)).unwrap();
        assert!(s.certified);
        assert!(s.length <= 2.0 * inradius() + 1e-9);
        assert!(s.length > 1.0);
    }

    #[test]
    fn sampling_is_thread_independent_and_inside() {
        let g = build_octagon_group().unwrap();
        let a = sample_points(&g, 200, 11);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_points(&g, 200, 11));
        assert_eq!(a, b);
        assert!(a.iter().all(|z| g.contains(*z)));
    }

    #[test]
    fn prop24_sides_agree() {
        let (g, b) = setup(10.0);
        let mut rng = sample_rng(7, 1);
        for _ in 0..300 {
            let z = sample_octagon(&g, &mut rng);
            let r = rng.gen_range(0.0..2.0);
            let out = prop24_check(&b, HypScheme::Index(2), z, r).unwrap();
            assert!(out.certified);
            if !out.indeterminate {
                assert_eq!(out.side_a, out.side_b);
            }
        }
        let z = sample_octagon(&g, &mut rng);
        let tiny = prop24_check(&b, HypScheme::Index(1), z, 1e-3).unwrap();
        assert!(!tiny.side_a && !tiny.side_b);
    }
}
