use bslab_core::euclid::LatticeBasis;
use bslab_core::exact::{ratio, Rational};
use bslab_core::testfn::TestFunction;
use bslab_core::zcover::{
    check_direct_integral, degenerate_stress, trace_polynomial, twisted_geometric, twisted_spectral, ZCoverScheme,
};
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng) -> (ZCoverScheme, TestFunction) {
    let d = rng.gen_range(1..=3usize);
    let diagonal = rng.gen_bool(0.5);
    let rows: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        ratio(rng.gen_range(3..=8), 4)
                    } else if j > i && !diagonal {
                        ratio(rng.gen_range(-2..=2), 4)
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let chi: Vec<i64> = loop {
        let c: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
        if c.iter().fold(0i64, |g, x| g.gcd(x)) == 1 {
            break c;
        }
    };
    let order = if d == 3 { 8 } else { 6 };
    let scales = (0..d).map(|_| ratio(rng.gen_range(3..=8), 4)).collect();
    (ZCoverScheme::new(LatticeBasis::new(rows).unwrap(), chi).unwrap(), TestFunction::new(order, scales).unwrap())
}

#[test]
fn twisted_poisson_on_random_schemes() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let (s, f) = random_case(&mut rng);
        let theta: f64 = rng.gen();
        let g = twisted_geometric(&s, theta, &f).unwrap();
        let sp = twisted_spectral(&s, theta, &f, 1e-11).unwrap();
        assert!((g.re - sp.value).abs() <= 1e-10, "{} vs {} at {theta}", g.re, sp.value);
        assert!(g.im.abs() <= 1e-12);
    }
}

#[test]
fn degenerate_direction_trace_grows() {
    let traces = degenerate_stress(&(1..=12).collect::<Vec<_>>()).unwrap();
    assert!(traces.windows(2).all(|w| w[1].1 > w[0].1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_symmetry(seed in any::<u64>(), theta in -2.0f64..2.0) {
        let (s, f) = random_case(&mut ChaCha8Rng::seed_from_u64(seed));
        let p = trace_polynomial(&s, &f).unwrap();
        for (m, c) in &p.coefficients {
            prop_assert_eq!(c, &p.coefficient(-m));
        }
        let (a, b) = (p.evaluate(theta), p.evaluate(-theta));
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn quadrature_is_exact_above_degree(seed in any::<u64>(), extra in 1u64..20) {
        let (s, f) = random_case(&mut ChaCha8Rng::seed_from_u64(seed));
        let degree = trace_polynomial(&s, &f).unwrap().degree();
        let base = check_direct_integral(&s, &f, 2 * degree + 1).unwrap();
        let more = check_direct_integral(&s, &f, 2 * degree + 1 + extra).unwrap();
        prop_assert_eq!(&base.quadrature_exact, &base.l2_trace);
        prop_assert_eq!(&more.quadrature_exact, &base.quadrature_exact);
        prop_assert!((more.quadrature - base.quadrature).abs() <= 1e-13 * (1.0 + base.quadrature.abs()));
    }
}
