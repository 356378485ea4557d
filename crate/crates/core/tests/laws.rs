//! Property tests for the ring laws of truncated graded series. Each case
//! derives a fresh chart shape and a batch of homogeneous elements from a
//! proptest-supplied seed, then checks the algebra identities exactly.

use proptest::prelude::*;
use rand::Rng;
use z2n_core::{
    enumerate_degrees, rng_from_seed, random_series_of_degree, Chart, ChartRef, Degree,
    DegreeClass, FormalVariable, RandCfg, Series,
};

fn random_chart(rng: &mut impl Rng, tag: u64) -> ChartRef {
    let n = rng.gen_range(1..=3usize);
    let truncation = rng.gen_range(2..=4usize);
    let base_count = rng.gen_range(0..=2usize);
    let formal_count = rng.gen_range(1..=5usize);
    let mut formal = Vec::new();
    for i in 0..formal_count {
        let mut bits = vec![0u8; n];
        while bits.iter().all(|&b| b == 0) {
            for b in &mut bits {
                *b = rng.gen_range(0..=1u8);
            }
        }
        formal.push(FormalVariable {
            name: format!("g{i}"),
            degree: Degree::new(bits).expect("nonempty bits"),
        });
    }
    let base = (0..base_count).map(|i| format!("x{i}")).collect();
    Chart::with_default_domain(format!("P{tag}"), n, truncation, base, formal)
        .expect("valid chart")
}

fn random_homogeneous(rng: &mut impl Rng, chart: &ChartRef) -> (Series, Degree) {
    let degrees = enumerate_degrees(chart.n()).expect("valid n");
    let cfg = RandCfg { max_base_degree: 2, max_formal_total: 3, terms: 3, constant_body: false };
    loop {
        let d = degrees[rng.gen_range(0..degrees.len())].clone();
        let s = random_series_of_degree(rng, chart, &d, &cfg).expect("generation succeeds");
        if !s.is_structural_zero() {
            return (s, d);
        }
    }
}

fn assert_exact_eq(lhs: &Series, rhs: &Series, what: &str) {
    assert_eq!(lhs.exact_eq(rhs), Some(true), "{what}: {lhs} vs {rhs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// a*b equals b*a up to the Koszul sign of the two degrees.
    #[test]
    fn graded_commutativity(seed in 0u64..1_000_000) {
        let mut rng = rng_from_seed(seed);
        let chart = random_chart(&mut rng, seed);
        let (a, da) = random_homogeneous(&mut rng, &chart);
        let (b, db) = random_homogeneous(&mut rng, &chart);
        let sign = da.koszul_sign(&db).expect("same n");
        let lhs = a.mul(&b).unwrap();
        let mut rhs = b.mul(&a).unwrap();
        if sign < 0 {
            rhs = rhs.neg();
        }
        assert_exact_eq(&lhs, &rhs, "graded commutativity");
    }

    /// (a*b)*c equals a*(b*c).
    #[test]
    fn associativity(seed in 0u64..1_000_000) {
        let mut rng = rng_from_seed(seed.wrapping_add(1 << 32));
        let chart = random_chart(&mut rng, seed);
        let (a, _) = random_homogeneous(&mut rng, &chart);
        let (b, _) = random_homogeneous(&mut rng, &chart);
        let (c, _) = random_homogeneous(&mut rng, &chart);
        let lhs = a.mul(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&b.mul(&c).unwrap()).unwrap();
        assert_exact_eq(&lhs, &rhs, "associativity");
    }

    /// a*(b + c) equals a*b + a*c, and the mirrored version.
    #[test]
    fn distributivity(seed in 0u64..1_000_000) {
        let mut rng = rng_from_seed(seed.wrapping_add(2 << 32));
        let chart = random_chart(&mut rng, seed);
        let (a, _) = random_homogeneous(&mut rng, &chart);
        let (b, _) = random_homogeneous(&mut rng, &chart);
        let (c, _) = random_homogeneous(&mut rng, &chart);
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        assert_exact_eq(&lhs, &rhs, "left distributivity");
        let lhs = b.add(&c).unwrap().mul(&a).unwrap();
        let rhs = b.mul(&a).unwrap().add(&c.mul(&a).unwrap()).unwrap();
        assert_exact_eq(&lhs, &rhs, "right distributivity");
    }

    /// The degree of a product of homogeneous elements is the sum of the
    /// degrees (or the product is zero).
    #[test]
    fn degree_additivity(seed in 0u64..1_000_000) {
        let mut rng = rng_from_seed(seed.wrapping_add(3 << 32));
        let chart = random_chart(&mut rng, seed);
        let (a, da) = random_homogeneous(&mut rng, &chart);
        let (b, db) = random_homogeneous(&mut rng, &chart);
        let expected = da.sum(&db).expect("same n");
        let prod = a.mul(&b).unwrap();
        match prod.degree_of() {
            DegreeClass::Zero => {}
            DegreeClass::Homogeneous(d) => prop_assert_eq!(d, expected),
            DegreeClass::Mixed => prop_assert!(false, "product of homogeneous elements is mixed"),
        }
    }

    /// pow agrees with repeated multiplication; odd generators square to zero.
    #[test]
    fn pow_matches_repeated_mul(seed in 0u64..1_000_000) {
        let mut rng = rng_from_seed(seed.wrapping_add(4 << 32));
        let chart = random_chart(&mut rng, seed);
        let (a, da) = random_homogeneous(&mut rng, &chart);
        let sq = a.pow(2).unwrap();
        assert_exact_eq(&sq, &a.mul(&a).unwrap(), "square");
        let cube = a.pow(3).unwrap();
        assert_exact_eq(&cube, &sq.mul(&a).unwrap(), "cube");
        if da.is_odd() {
            // 2 a^2 = 0 over the rationals for any odd homogeneous a
            assert_exact_eq(&sq, &Series::zero(&chart), "odd square");
        }
    }
}
