//! Seeded random generation of degree-respecting data: rationals, polynomial
//! coefficients, homogeneous series, and real sample points. All generation
//! is driven by a caller-supplied RNG so that every check is reproducible
//! from its seed.

use crate::chart::{ChartRef, RealPoint};
use crate::coeff::{rat_int, Coeff, Poly, Rat};
use crate::degree::Degree;
use crate::error::Result;
use crate::series::{Monomial, Series};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape parameters for random series generation.
#[derive(Debug, Clone, Copy)]
pub struct RandCfg {
    /// Degree cap for polynomial coefficients in the degree-0 variables.
    pub max_base_degree: u32,
    /// Cap on the total formal exponent of sampled monomials.
    pub max_formal_total: u32,
    /// How many monomials to draw (duplicates merge, so this is an upper bound).
    pub terms: usize,
    /// Force the coefficient of the empty monomial to be a constant rational
    /// (required wherever a constant, invertible body is needed downstream).
    pub constant_body: bool,
}

impl Default for RandCfg {
    fn default() -> Self {
        RandCfg { max_base_degree: 2, max_formal_total: 3, terms: 3, constant_body: false }
    }
}

/// A small rational with numerator in [-4, 4] and denominator in [1, 3].
pub fn random_rat(rng: &mut impl Rng) -> Rat {
    Rat::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into())
}

pub fn random_nonzero_rat(rng: &mut impl Rng) -> Rat {
    let mut n = 0i64;
    while n == 0 {
        n = rng.gen_range(-4i64..=4);
    }
    Rat::new(n.into(), rng.gen_range(1i64..=3).into())
}

/// A sparse random polynomial in `arity` variables of total degree at most
/// `max_degree`, with `terms` draws.
pub fn random_poly(rng: &mut impl Rng, arity: usize, max_degree: u32, terms: usize) -> Poly {
    let mut out = Poly::zero(arity);
    for _ in 0..terms {
        let mut term = Poly::constant(arity, random_rat(rng));
        if arity > 0 {
            let deg = rng.gen_range(0..=max_degree);
            for _ in 0..deg {
                let i = rng.gen_range(0..arity);
                term = term.mul(&Poly::var(arity, i));
            }
        }
        out = out.add(&term);
    }
    out
}

/// Every admissible monomial of the chart with the given total Z2^n-degree
/// and total exponent at most `max_total` (clamped to the chart truncation).
/// For degree zero this includes the empty monomial.
pub fn monomials_of_degree(chart: &ChartRef, degree: &Degree, max_total: u32) -> Vec<Monomial> {
    let cap = max_total.min(chart.truncation() as u32);
    let q = chart.formal_count();
    let mut out = Vec::new();
    let mut exps = vec![0u16; q];
    fn rec(
        chart: &ChartRef,
        target: &Degree,
        cap: u32,
        i: usize,
        used: u32,
        exps: &mut Vec<u16>,
        out: &mut Vec<Monomial>,
    ) {
        if i == exps.len() {
            let m = Monomial::from_exps(exps.clone());
            if m.degree(chart) == *target {
                out.push(m);
            }
            return;
        }
        let var_odd = chart.formal_var(i).degree.is_odd();
        let max_e = if var_odd { 1.min(cap - used) } else { cap - used };
        for e in 0..=max_e as u16 {
            exps[i] = e;
            rec(chart, target, cap, i + 1, used + e as u32, exps, out);
        }
        exps[i] = 0;
    }
    rec(chart, degree, cap, 0, 0, &mut exps, &mut out);
    out
}

/// A random series over `chart` that is homogeneous of the given degree.
/// Returns the zero series when the chart admits no monomial of that degree.
pub fn random_series_of_degree(
    rng: &mut impl Rng,
    chart: &ChartRef,
    degree: &Degree,
    cfg: &RandCfg,
) -> Result<Series> {
    let candidates = monomials_of_degree(chart, degree, cfg.max_formal_total);
    let mut s = Series::zero(chart);
    if candidates.is_empty() {
        return Ok(s);
    }
    let arity = chart.base_count();
    for _ in 0..cfg.terms {
        let mono = candidates[rng.gen_range(0..candidates.len())].clone();
        let coeff = if cfg.constant_body && mono.is_unit() {
            Coeff::constant(arity, random_rat(rng))
        } else {
            Coeff::Poly(random_poly(rng, arity, cfg.max_base_degree, 2))
        };
        s = s.add(&Series::single(chart, mono, coeff)?)?;
    }
    Ok(s)
}

/// A uniformly random real point in the interior of the chart's box domain
/// (values are kept 10% away from each wall).
pub fn random_point_in_domain(rng: &mut impl Rng, chart: &ChartRef) -> RealPoint {
    let mut p = RealPoint::empty();
    for (i, &(lo, hi)) in chart.base_domain().iter().enumerate() {
        let margin = 0.1 * (hi - lo);
        let v = rng.gen_range(lo + margin..hi - margin);
        p.set(chart.base_name(i), v);
    }
    p
}

/// A random rational near +1 or -1: never zero, handy for unit-like bodies.
pub fn random_unit_rat(rng: &mut impl Rng) -> Rat {
    rat_int(if rng.gen_bool(0.5) { 1 } else { -1 }) + random_rat(rng) * Rat::new(1.into(), 5.into())
}
