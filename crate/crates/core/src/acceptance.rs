//! The acceptance suite: one pass/fail verdict per criterion, each with a time limit.

use std::time::Instant;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::euclid::{check_parallelepiped, geometric_sum, spectral_sum, LatticeBasis, LatticeFamily};
use crate::exact::{ratio, to_f64, Rational};
use crate::hyperbolic::{
    bs_probability_at, build_octagon_group, check_octagon, circumradius, group_ball, prop24_check, sample_octagon,
    sample_points, sample_rng, systole, HypScheme,
};
use crate::schreier::{scan_relative, Budgets, MarkedGroup, SubgroupScheme, LimitSubgroup};
use crate::testfn::TestFunction;
use crate::zcover::{check_direct_integral, check_lemma42_independence, check_prop43, spectral_measure_integral, ZCoverScheme};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2}s / {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(u32, &str, f64, Check); 10] = [
    (1, "Poisson identity on random lattices", 60.0, poisson_identity),
    (2, "counterexample family is not Plancherel", 1.0, counterexample),
    (3, "dilated lattices are Plancherel", 1.0, dilation),
    (4, "relative sums in free and surface groups", 300.0, relative_sums),
    (5, "injectivity radius vs conjugate criterion", 600.0, conjugate_criterion),
    (6, "BS probability monotone in n", 900.0, bs_monotone),
    (7, "relative trace independent of n", 1.0, trace_independence),
    (8, "trace defect vanishes above threshold", 1.0, defect_threshold),
    (9, "direct integral of twisted traces", 5.0, direct_integral),
    (10, "fundamental domain axioms", 120.0, fundamental_domains),
];

/// Runs the selected criteria (all when `only` is empty), in order.
pub fn run_acceptance(only: &[u32]) -> Vec<Criterion> {
    CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.0))
        .map(|&(id, name, limit, check)| {
            let start = Instant::now();
            let outcome = check();
            let seconds = start.elapsed().as_secs_f64();
            let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
            Criterion { id, name, passed: ok && seconds <= limit, detail, seconds, limit_seconds: limit }
        })
        .collect()
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    ratio(rng.gen_range(lo..=hi), den)
}

fn random_pair(rng: &mut ChaCha8Rng) -> Result<(LatticeBasis, TestFunction)> {
    let d = rng.gen_range(1..=3usize);
    let diagonal = rng.gen_bool(0.5);
    let rows: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| match (i == j, diagonal, j > i) {
                    (true, _, _) => random_rational(rng, 3, 8, 4),
                    (false, false, true) => random_rational(rng, -2, 2, 4),
                    _ => Rational::zero(),
                })
                .collect()
        })
        .collect();
    let order = if d == 3 { 8 } else { 6 };
    let scales: Vec<Rational> = (0..d).map(|_| random_rational(rng, 3, 8, 4)).collect();
    Ok((LatticeBasis::new(rows)?, TestFunction::new(order, scales)?))
}

fn poisson_identity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let pairs = (0..100).map(|_| random_pair(&mut rng)).collect::<Result<Vec<_>>>()?;
    let residuals = pairs
        .par_iter()
        .map(|(b, f)| {
            let g = to_f64(&geometric_sum(b, f, false)?);
            let s = spectral_sum(b, f, 1e-11)?;
            Ok((g - s.value).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("100 pairs, max |geometric - spectral| = {worst:.3e}")))
}

fn family_defects(family: &LatticeFamily, ns: impl Iterator<Item = u64>) -> Result<Vec<(u64, Rational, Rational)>> {
    let f = TestFunction::from_ints(2, &[1, 1])?;
    ns.map(|n| {
        let b = family.member(n)?;
        Ok((n, b.covolume(), geometric_sum(&b, &f, true)?))
    })
    .collect()
}

fn counterexample() -> Result<(bool, String)> {
    let rows = family_defects(&LatticeFamily::Counterexample, 3..=40)?;
    let one = ratio(1, 1);
    let ok = rows.iter().all(|(n, covol, d)| *covol == ratio(*n as i64, 1) && *d >= one)
        && rows.windows(2).all(|w| w[1].2 >= w[0].2);
    let last = rows.last().expect("nonempty");
    Ok((ok, format!("n = 3..40: covolume n, defect nondecreasing from {} to {}", rows[0].2, last.2)))
}

fn dilation() -> Result<(bool, String)> {
    let family = LatticeFamily::Dilation(LatticeBasis::identity(2));
    let rows = family_defects(&family, 2..=40)?;
    let zero_defect = rows.iter().all(|(_, _, d)| d.is_zero());
    let mut counts_ok = true;
    for r in [0.5, 1.5, 2.5, 4.0, 7.5] {
        for n in 1..=12u64 {
            let count = family.member(n)?.enumerate_points(r)?.len() - 1;
            if (n as f64) > r && count != 0 {
                counts_ok = false;
            }
        }
    }
    Ok((zero_defect && counts_ok, format!("defect 0 for n = 2..40: {zero_defect}; counts vanish for n > R: {counts_ok}")))
}

fn relative_sums() -> Result<(bool, String)> {
    let ns: Vec<u64> = (1..=16).collect();
    let radii = [1, 2, 3];
    let cases = [
        ("free(2)", MarkedGroup::free(2)?, SubgroupScheme::full_homology(2, LimitSubgroup::Kernel)?),
        ("surface(2)", MarkedGroup::surface(2)?, SubgroupScheme::congruence(4, LimitSubgroup::Kernel)?),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, group, scheme) in cases {
        let scan = scan_relative(&group, &scheme, &ns, &radii, Budgets::default())?;
        let domination = scan.sign_domination_holds();
        let vanish = scan.rows.iter().filter(|r| r.sums.n as usize > r.sums.r).all(|r| r.sums.count_sum.is_zero());
        let bounds: Vec<u64> = scan.rows.iter().take(radii.len()).map(|r| r.bound).collect();
        ok &= domination && vanish;
        detail.push(format!("{label}: domination {domination}, vanishing {vanish}, bounds {bounds:?}"));
    }
    Ok((ok, detail.join("; ")))
}

fn conjugate_criterion() -> Result<(bool, String)> {
    let group = build_octagon_group()?;
    let ball = group_ball(&group, 9.0, circumradius(), crate::hyperbolic::DEFAULT_ELEMENT_BUDGET)?;
    let samples = 10_000u64;
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(5, i);
            let z = sample_octagon(&group, &mut rng);
            let r = rng.gen_range(0.0..2.0);
            prop24_check(&ball, HypScheme::Index(1 + i % 4), z, r)
        })
        .collect::<Result<Vec<_>>>()?;
    let uncertified = outcomes.iter().filter(|o| !o.certified).count();
    let indeterminate = outcomes.iter().filter(|o| o.indeterminate).count();
    let decided: Vec<_> = outcomes.iter().filter(|o| !o.indeterminate).collect();
    let agree = decided.iter().filter(|o| o.side_a == o.side_b).count();
    let frac = indeterminate as f64 / samples as f64;
    Ok((
        ball.complete() && uncertified == 0 && agree == decided.len() && frac < 0.01,
        format!("{agree}/{} decided samples agree, indeterminate fraction {frac:.4}, uncertified {uncertified}", decided.len()),
    ))
}

fn bs_monotone() -> Result<(bool, String)> {
    let group = build_octagon_group()?;
    let ball = group_ball(&group, 11.5, circumradius(), crate::hyperbolic::DEFAULT_ELEMENT_BUDGET)?;
    let base = systole(&ball, HypScheme::Index(1))?;
    let points = sample_points(&group, 10_000, 17);
    let mut ok = ball.complete() && base.certified;
    let mut detail = Vec::new();
    for fraction in [0.3, 0.6] {
        let r = fraction * base.length;
        let mut prev: Option<(f64, f64)> = None;
        let mut estimates = Vec::new();
        for n in 1..=8u64 {
            let scheme = HypScheme::Index(n);
            let est = bs_probability_at(&ball, scheme, r, &points)?;
            let sys = systole(&ball, scheme)?;
            ok &= est.undecided == 0 && sys.certified;
            if r < 0.5 * sys.length {
                ok &= est.hits == 0;
            }
            if let Some((p, hw)) = prev {
                ok &= est.estimate <= p + hw + est.half_width;
            }
            prev = Some((est.estimate, est.half_width));
            estimates.push(format!("{:.4}", est.estimate));
        }
        detail.push(format!("R = {fraction} systole: [{}]", estimates.join(", ")));
    }
    Ok((ok, format!("systole {:.6}; {}", base.length, detail.join("; "))))
}

fn zcover_cases() -> Result<Vec<(ZCoverScheme, TestFunction)>> {
    Ok(vec![
        (ZCoverScheme::new(LatticeBasis::identity(2), vec![0, 1])?, TestFunction::from_ints(2, &[3, 3])?),
        (ZCoverScheme::new(LatticeBasis::from_i64(&[&[1, 0], &[0, 5]])?, vec![0, 1])?, TestFunction::from_ints(2, &[3, 3])?),
        (
            ZCoverScheme::new(LatticeBasis::from_strs(&[&["1", "1/2"], &["0", "3/2"]])?, vec![1, 2])?,
            TestFunction::from_f64(6, &[2.5, 3.0])?,
        ),
        (
            ZCoverScheme::new(LatticeBasis::identity(3), vec![1, 1, 0])?,
            TestFunction::from_ints(3, &[2, 3, 2])?,
        ),
    ])
}

fn trace_independence() -> Result<(bool, String)> {
    let mut ok = true;
    let mut traces = Vec::new();
    for (s, f) in zcover_cases()? {
        let r = check_lemma42_independence(&s, &f, &[1, 2, 3, 4, 5])?;
        ok &= r.exact_agreement() && r.float_spread() <= 1e-12;
        traces.push(r.l2_trace.to_string());
    }
    Ok((ok, format!("L2 traces {traces:?} identical for n = 1..5")))
}

fn defect_threshold() -> Result<(bool, String)> {
    let mut ok = true;
    let mut thresholds = Vec::new();
    for (s, f) in zcover_cases()? {
        let r = check_prop43(&s, &f, &(1..=20).collect::<Vec<_>>())?;
        let below = r.rows.iter().find(|row| row.n == r.threshold).map(|row| !row.delta.is_zero());
        // A nonzero defect at the threshold needs a chi-nonzero point in the support.
        ok &= r.consistent() && (r.threshold == 0 || below == Some(true));
        thresholds.push(r.threshold);
    }
    Ok((ok, format!("thresholds {thresholds:?}, zero above and nonzero at each positive threshold")))
}

fn direct_integral() -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut worst_spectral: f64 = 0.0;
    for (s, f) in zcover_cases()? {
        let a = check_direct_integral(&s, &f, 5.max(2 * check_prop43(&s, &f, &[1])?.threshold + 1))?;
        let b = check_direct_integral(&s, &f, 2 * a.m)?;
        ok &= a.quadrature_exact == a.l2_trace && b.quadrature_exact == a.quadrature_exact;
        worst = worst.max(a.error()).max(b.error()).max((a.quadrature - b.quadrature).abs());
        let sp = spectral_measure_integral(&s, &f, a.m, 1e-11)?;
        worst_spectral = worst_spectral.max((sp.value - a.quadrature).abs());
    }
    ok &= worst <= 1e-12 && worst_spectral <= 1e-10;
    Ok((ok, format!("quadrature error {worst:.2e}, twisted dual coset route {worst_spectral:.2e}")))
}

fn fundamental_domains() -> Result<(bool, String)> {
    let widths = [0.005, 0.01, 0.02];
    let mut ok = true;
    let mut detail = Vec::new();
    let bases = [
        LatticeBasis::identity(2),
        LatticeBasis::from_strs(&[&["1", "1/2"], &["0", "3/2"]])?,
        LatticeBasis::from_strs(&[&["2", "1", "0"], &["0", "1", "1/2"], &["0", "0", "1"]])?,
    ];
    for (i, b) in bases.iter().enumerate() {
        let c = check_parallelepiped(b, 1000, 200_000, &widths, 31 + i as u64);
        ok &= c.passes(0.1);
        detail.push(format!("parallelepiped {i}: slope {:.3}/{:.3}", c.fitted_slope, c.predicted_slope));
    }
    let group = build_octagon_group()?;
    let ball = group_ball(&group, 7.0, circumradius(), crate::hyperbolic::DEFAULT_ELEMENT_BUDGET)?;
    let c = check_octagon(&group, &ball, 1000, 200_000, &widths, 37);
    ok &= c.passes(0.1);
    detail.push(format!(
        "octagon: {} overlaps, {} uncovered, slope {:.3}/{:.3}",
        c.overlap_violations, c.cover_failures, c.fitted_slope, c.predicted_slope
    ));
    Ok((ok, detail.join("; ")))
}
