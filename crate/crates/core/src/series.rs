//! Truncated Z2^n-graded formal power series over a chart.
//!
//! Generators obey u·v = (-1)^<deg u, deg v> v·u; odd generators square to
//! zero; every series is kept in canonical form (monomials with exponents in
//! declaration order) and truncated at the chart's session order T.

use crate::chart::{Chart, ChartRef, CoordId};
use crate::coeff::{coeff_eq, Coeff, EqOptions, Rat};
use crate::degree::Degree;
use crate::error::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent tuple over the formal coordinates of a chart, ordered by
/// (total formal degree, lexicographic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    exps: Vec<u16>,
}

impl Monomial {
    pub fn unit(formal_count: usize) -> Self {
        Monomial { exps: vec![0; formal_count] }
    }

    pub fn var(formal_count: usize, i: usize) -> Self {
        let mut exps = vec![0; formal_count];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn from_exps(exps: Vec<u16>) -> Self {
        Monomial { exps }
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn total(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn is_unit(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Z2^n degree: XOR of generator degrees with odd multiplicity.
    pub fn degree(&self, chart: &Chart) -> Degree {
        let mut d = Degree::zero(chart.n());
        for (i, &e) in self.exps.iter().enumerate() {
            if e % 2 == 1 {
                d = d.sum(&chart.formal_var(i).degree).expect("chart degrees share n");
            }
        }
        d
    }

    /// Valid in `chart`: odd exponents at most 1, total within truncation.
    fn check(&self, chart: &Chart) -> Result<()> {
        if self.exps.len() != chart.formal_count() {
            return Err(Error::DimensionMismatch {
                expected: chart.formal_count(),
                found: self.exps.len(),
            });
        }
        for (i, &e) in self.exps.iter().enumerate() {
            if e > 1 && chart.formal_var(i).degree.is_odd() {
                return Err(Error::Degree(format!(
                    "odd generator '{}' with exponent {e}",
                    chart.formal_var(i).name
                )));
            }
        }
        if self.total() as usize > chart.truncation() {
            return Err(Error::Domain(format!(
                "monomial of formal degree {} exceeds truncation {}",
                self.total(),
                chart.truncation()
            )));
        }
        Ok(())
    }

    /// Expand into the explicit word of generator indices, canonical order.
    pub fn word(&self) -> Vec<usize> {
        let mut w = Vec::new();
        for (i, &e) in self.exps.iter().enumerate() {
            for _ in 0..e {
                w.push(i);
            }
        }
        w
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.total(), &self.exps).cmp(&(other.total(), &other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical product of two monomials: the Koszul sign collected while
/// merging the right word into the left, or None when an odd generator
/// squares (the product is zero).
pub fn mul_monomials(chart: &Chart, a: &Monomial, b: &Monomial) -> Option<(i8, Monomial)> {
    let mut sign: i8 = 1;
    for (j, &ej) in b.exps.iter().enumerate() {
        if ej == 0 {
            continue;
        }
        let dj = &chart.formal_var(j).degree;
        if dj.is_odd() && a.exps[j] + ej > 1 {
            return None;
        }
        // every copy of generator j in `b` crosses every copy of a later
        // generator in `a`
        for i in (j + 1)..a.exps.len() {
            let ei = a.exps[i];
            if ei == 0 {
                continue;
            }
            let crossings = (ei as u32) * (ej as u32);
            if crossings % 2 == 1
                && chart.formal_var(i).degree.koszul_sign(dj).expect("same n") < 0
            {
                sign = -sign;
            }
        }
    }
    let exps = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
    Some((sign, Monomial { exps }))
}

/// Sort an explicit word of generator indices into canonical order by
/// adjacent transpositions, tracking the sign; sign 0 signals an odd square.
pub fn normalize_word(chart: &Chart, word: &[usize]) -> (i8, Monomial) {
    let mut w = word.to_vec();
    let mut sign: i8 = 1;
    loop {
        let mut swapped = false;
        for k in 1..w.len() {
            if w[k - 1] > w[k] {
                let (di, dj) =
                    (&chart.formal_var(w[k - 1]).degree, &chart.formal_var(w[k]).degree);
                if di.koszul_sign(dj).expect("same n") < 0 {
                    sign = -sign;
                }
                w.swap(k - 1, k);
                swapped = true;
            } else if w[k - 1] == w[k] && chart.formal_var(w[k]).degree.is_odd() {
                return (0, Monomial::unit(chart.formal_count()));
            }
        }
        if !swapped {
            break;
        }
    }
    let mut exps = vec![0u16; chart.formal_count()];
    for i in w {
        exps[i] += 1;
    }
    (sign, Monomial { exps })
}

/// Result of degree inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeClass {
    /// The zero series (degree of every element).
    Zero,
    Homogeneous(Degree),
    Mixed,
}

impl DegreeClass {
    /// Compatible with a required homogeneous degree (zero always is).
    pub fn fits(&self, d: &Degree) -> bool {
        match self {
            DegreeClass::Zero => true,
            DegreeClass::Homogeneous(own) => own == d,
            DegreeClass::Mixed => false,
        }
    }
}

/// A truncated graded formal power series over a fixed chart.
#[derive(Debug, Clone)]
pub struct Series {
    chart: ChartRef,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Series {
    pub fn zero(chart: &ChartRef) -> Series {
        Series { chart: chart.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(chart: &ChartRef, c: Rat) -> Series {
        let mut s = Series::zero(chart);
        s.insert(Monomial::unit(chart.formal_count()), Coeff::constant(chart.base_count(), c));
        s
    }

    pub fn one(chart: &ChartRef) -> Series {
        Series::constant(chart, Rat::from_integer(1.into()))
    }

    pub fn from_coeff(chart: &ChartRef, c: Coeff) -> Series {
        let mut s = Series::zero(chart);
        s.insert(Monomial::unit(chart.formal_count()), c);
        s
    }

    /// The coordinate function u as a series.
    pub fn coord(chart: &ChartRef, id: CoordId) -> Series {
        let mut s = Series::zero(chart);
        match id {
            CoordId::Base(i) => {
                s.insert(
                    Monomial::unit(chart.formal_count()),
                    Coeff::Poly(crate::coeff::Poly::var(chart.base_count(), i)),
                );
            }
            CoordId::Formal(i) => {
                s.insert(Monomial::var(chart.formal_count(), i), Coeff::one(chart.base_count()));
            }
        }
        s
    }

    pub fn single(chart: &ChartRef, mono: Monomial, c: Coeff) -> Result<Series> {
        mono.check(chart)?;
        let mut s = Series::zero(chart);
        s.insert(mono, c);
        Ok(s)
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_structural_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_of(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(|| Coeff::zero(self.chart.base_count()))
    }

    /// Coefficient of the empty monomial: the underlying smooth function.
    pub fn body(&self) -> Coeff {
        self.coefficient_of(&Monomial::unit(self.chart.formal_count()))
    }

    /// Terms with at least one formal generator.
    pub fn formal_part(&self) -> Series {
        let mut s = Series::zero(&self.chart);
        for (m, c) in &self.terms {
            if !m.is_unit() {
                s.insert(m.clone(), c.clone());
            }
        }
        s
    }

    pub fn max_formal_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total()).max().unwrap_or(0)
    }

    fn insert(&mut self, m: Monomial, c: Coeff) {
        if c.is_structural_zero() {
            return;
        }
        if m.total() as usize > self.chart.truncation() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_structural_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_context(&self, other: &Series) -> Result<()> {
        if !self.chart.same_context(&other.chart) {
            return Err(self.chart.context_error(&other.chart));
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Series {
        Series {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Series {
        if c.is_zero() {
            return Series::zero(&self.chart);
        }
        Series {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k.scale(c))).collect(),
        }
    }

    /// Multiply by a degree-0 coefficient (commutes with every generator).
    pub fn scale_coeff(&self, c: &Coeff) -> Series {
        let mut out = Series::zero(&self.chart);
        for (m, k) in &self.terms {
            out.insert(m.clone(), c.mul(k));
        }
        out
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_context(other)?;
        let cap = self.chart.truncation() as u32;
        let mut out = Series::zero(&self.chart);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.total() + mb.total() > cap {
                    continue;
                }
                if let Some((sign, m)) = mul_monomials(&self.chart, ma, mb) {
                    let mut c = ca.mul(cb);
                    if sign < 0 {
                        c = c.neg();
                    }
                    out.insert(m, c);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Series> {
        let mut out = Series::one(&self.chart);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Drop terms of formal degree above `order`; order must not exceed the
    /// session truncation.
    pub fn truncate(&self, order: usize) -> Result<Series> {
        if order > self.chart.truncation() {
            return Err(Error::Domain(format!(
                "truncation order {order} exceeds session order {}",
                self.chart.truncation()
            )));
        }
        let mut out = Series::zero(&self.chart);
        for (m, c) in &self.terms {
            if m.total() as usize <= order {
                out.insert(m.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Inspect homogeneity: zero, a single Z2^n degree, or mixed.
    pub fn degree_of(&self) -> DegreeClass {
        let mut found: Option<Degree> = None;
        for m in self.terms.keys() {
            let d = m.degree(&self.chart);
            match &found {
                None => found = Some(d),
                Some(prev) if *prev == d => {}
                Some(_) => return DegreeClass::Mixed,
            }
        }
        match found {
            None => DegreeClass::Zero,
            Some(d) => DegreeClass::Homogeneous(d),
        }
    }

    /// Equality of truncations at `order`, exact where both sides are
    /// polynomial, sampled on `domain` (default: the chart's base box)
    /// where opaque functions occur.
    pub fn eq_up_to(
        &self,
        other: &Series,
        order: usize,
        domain: Option<&[(f64, f64)]>,
        opts: &EqOptions,
    ) -> Result<bool> {
        self.check_context(other)?;
        let domain = domain.unwrap_or_else(|| self.chart.base_domain());
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        for k in other.terms.keys() {
            if !self.terms.contains_key(k) {
                keys.push(k);
            }
        }
        for m in keys {
            if m.total() as usize > order {
                continue;
            }
            let a = self.coefficient_of(m);
            let b = other.coefficient_of(m);
            if !coeff_eq(&a, &b, domain, opts)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Structural equality for fully exact series.
    pub fn exact_eq(&self, other: &Series) -> Option<bool> {
        if !self.chart.same_context(&other.chart) {
            return Some(false);
        }
        if self.terms.len() != other.terms.len() {
            if self.terms.iter().chain(&other.terms).all(|(_, c)| c.is_exact()) {
                return Some(false);
            }
            return None;
        }
        let mut all = true;
        for ((ma, ca), (mb, cb)) in self.terms.iter().zip(&other.terms) {
            match (ca, cb) {
                (Coeff::Poly(p), Coeff::Poly(q)) => {
                    if ma != mb || p != q {
                        all = false;
                    }
                }
                _ => return None,
            }
        }
        Some(all)
    }

    /// Evaluate every coefficient at a real point, killing formal terms:
    /// the value of the underlying function.
    pub fn body_at(&self, xs: &[f64]) -> Result<f64> {
        self.body().eval(xs)
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Coeff) -> Result<Coeff>) -> Result<Series> {
        let mut out = Series::zero(&self.chart);
        for (m, c) in &self.terms {
            out.insert(m.clone(), f(c)?);
        }
        Ok(out)
    }

    #[cfg(debug_assertions)]
    pub fn check_invariants(&self) {
        for (m, c) in &self.terms {
            m.check(&self.chart).expect("stored monomial valid");
            debug_assert!(!c.is_structural_zero(), "stored zero coefficient");
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let base_names = self.chart.base_names().to_vec();
        let mut first = true;
        for (m, c) in &self.terms {
            let (body, neg) = format_series_term(c, m, &base_names, &self.chart);
            if first {
                if neg {
                    write!(f, "-")?;
                }
                write!(f, "{body}")?;
                first = false;
            } else {
                write!(f, "{}{body}", if neg { " - " } else { " + " })?;
            }
        }
        Ok(())
    }
}

/// Render one term; returns (text without sign, sign-extracted?).
fn format_series_term(
    c: &Coeff,
    m: &Monomial,
    base_names: &[String],
    chart: &Chart,
) -> (String, bool) {
    use num_traits::Signed;
    let mono_str = {
        let mut parts: Vec<String> = Vec::new();
        for (i, &e) in m.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(chart.formal_var(i).name.clone()),
                _ => parts.push(format!("{}^{}", chart.formal_var(i).name, e)),
            }
        }
        parts.join("*")
    };
    let single = match c {
        Coeff::Poly(p) => {
            let terms: Vec<_> = p.terms().collect();
            if terms.len() == 1 {
                let (bm, r) = terms[0];
                let neg = r.is_negative();
                let mag = if neg { -r.clone() } else { r.clone() };
                let coeff_str = {
                    let one_mag = mag == Rat::from_integer(1.into());
                    let mut fac: Vec<String> = Vec::new();
                    if !one_mag || (bm.is_unit() && mono_str.is_empty()) {
                        fac.push(mag.to_string());
                    }
                    for (i, &e) in bm.exps().iter().enumerate() {
                        match e {
                            0 => {}
                            1 => fac.push(base_names[i].clone()),
                            _ => fac.push(format!("{}^{}", base_names[i], e)),
                        }
                    }
                    fac.join("*")
                };
                Some((coeff_str, neg))
            } else {
                None
            }
        }
        Coeff::Opaque(_) => None,
    };
    match single {
        Some((coeff_str, neg)) => {
            let body = match (coeff_str.is_empty(), mono_str.is_empty()) {
                (true, true) => "1".to_string(),
                (true, false) => mono_str,
                (false, true) => coeff_str,
                (false, false) => format!("{coeff_str}*{mono_str}"),
            };
            (body, neg)
        }
        None => {
            let cs = c.format_with(base_names);
            if mono_str.is_empty() {
                (cs, false)
            } else {
                (format!("({cs})*{mono_str}"), false)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::FormalVariable;
    use crate::coeff::{rat, rat_int};

    fn deg(bits: &[u8]) -> Degree {
        Degree::new(bits.to_vec()).unwrap()
    }

    /// One degree-0 coordinate t, formal z (1,1), theta1 (0,1), theta2 (1,0).
    fn chart_t() -> ChartRef {
        Chart::with_default_domain(
            "U",
            2,
            6,
            vec!["t".into()],
            vec![
                FormalVariable { name: "z".into(), degree: deg(&[1, 1]) },
                FormalVariable { name: "theta1".into(), degree: deg(&[0, 1]) },
                FormalVariable { name: "theta2".into(), degree: deg(&[1, 0]) },
            ],
        )
        .unwrap()
    }

    fn coord(chart: &ChartRef, name: &str) -> Series {
        Series::coord(chart, chart.lookup(name).unwrap())
    }

    fn assert_eq_exact(a: &Series, b: &Series) {
        assert_eq!(a.exact_eq(b), Some(true), "{a} != {b}");
    }

    #[test]
    fn odd_generators_square_to_zero() {
        let c = chart_t();
        let th = coord(&c, "theta1");
        assert!(th.mul(&th).unwrap().is_structural_zero());
    }

    #[test]
    fn even_formal_generator_does_not_square_to_zero() {
        let c = chart_t();
        let z = coord(&c, "z");
        let z2 = z.mul(&z).unwrap();
        assert!(!z2.is_structural_zero());
        assert_eq!(z2.to_string(), "z^2");
    }

    #[test]
    fn koszul_exchange_theta_after_z() {
        // theta1 * z = -z*theta1 since <(0,1),(1,1)> = 1
        let c = chart_t();
        let z = coord(&c, "z");
        let th = coord(&c, "theta1");
        let p = th.mul(&z).unwrap();
        assert_eq!(p.to_string(), "-z*theta1");
        // while theta2 * theta1 = +theta1*theta2 (<(1,0),(0,1)> = 0)
        let t1 = coord(&c, "theta1");
        let t2 = coord(&c, "theta2");
        assert_eq!(t2.mul(&t1).unwrap().to_string(), "theta1*theta2");
    }

    #[test]
    fn square_of_t_plus_theta_pair() {
        // (t + theta1*theta2)^2 = t^2 + 2t*theta1*theta2
        let c = chart_t();
        let t = coord(&c, "t");
        let tt = coord(&c, "theta1").mul(&coord(&c, "theta2")).unwrap();
        let f = t.add(&tt).unwrap();
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.to_string(), "t^2 + 2*t*theta1*theta2");
    }

    #[test]
    fn graded_commutativity_for_homogeneous_factors() {
        // f*g = (-1)^<deg f, deg g> g*f for homogeneous f, g
        let c = chart_t();
        let pairs = [
            ("z", "theta1"),   // <(1,1),(0,1)> = 1: anticommute
            ("z", "theta2"),   // <(1,1),(1,0)> = 1: anticommute
            ("theta1", "theta2"), // <(0,1),(1,0)> = 0: commute
            ("t", "z"),        // degree (0,0) commutes with everything
        ];
        for (a, b) in pairs {
            let fa = coord(&c, a);
            let fb = coord(&c, b);
            let da = c.coord_degree(c.lookup(a).unwrap());
            let db = c.coord_degree(c.lookup(b).unwrap());
            let sign = da.koszul_sign(&db).unwrap();
            let lhs = fa.mul(&fb).unwrap();
            let mut rhs = fb.mul(&fa).unwrap();
            if sign < 0 {
                rhs = rhs.neg();
            }
            assert_eq_exact(&lhs, &rhs);
        }
    }

    #[test]
    fn normalize_word_matches_examples() {
        let c = chart_t();
        // theta2 theta1 -> +theta1 theta2
        let (s, m) = normalize_word(&c, &[2, 1]);
        assert_eq!(s, 1);
        assert_eq!(m, Monomial { exps: vec![0, 1, 1] });
        // theta1 z -> -z theta1
        let (s, m) = normalize_word(&c, &[1, 0]);
        assert_eq!(s, -1);
        assert_eq!(m, Monomial { exps: vec![1, 1, 0] });
        // odd square
        let (s, _) = normalize_word(&c, &[1, 0, 1]);
        assert_eq!(s, 0);
    }

    #[test]
    fn normalize_word_agrees_with_mul_monomials() {
        let c = chart_t();
        let words: &[&[usize]] = &[&[0, 1], &[1, 0], &[2, 0, 1], &[0, 0, 1], &[2, 1, 0]];
        for w in words {
            let (split, _) = w.split_at(w.len() / 2);
            let (rest_sign, rest) = normalize_word(&c, &w[split.len()..]);
            let (head_sign, head) = normalize_word(&c, split);
            if head_sign == 0 || rest_sign == 0 {
                continue;
            }
            let direct = normalize_word(&c, w);
            match mul_monomials(&c, &head, &rest) {
                Some((s, m)) => {
                    assert_eq!(direct.0, s * head_sign * rest_sign, "word {w:?}");
                    assert_eq!(direct.1, m, "word {w:?}");
                }
                None => assert_eq!(direct.0, 0, "word {w:?}"),
            }
        }
    }

    #[test]
    fn truncation_drops_high_order_terms() {
        let c = Chart::with_default_domain(
            "V",
            2,
            3,
            vec![],
            vec![
                FormalVariable { name: "z".into(), degree: deg(&[1, 1]) },
                FormalVariable { name: "a".into(), degree: deg(&[0, 1]) },
                FormalVariable { name: "b".into(), degree: deg(&[1, 0]) },
            ],
        )
        .unwrap();
        let z = coord(&c, "z");
        let a = coord(&c, "a");
        let b = coord(&c, "b");
        // z^2 * a * b has formal degree 4 > 3: killed by the session order
        let p = z.mul(&z).unwrap().mul(&a).unwrap().mul(&b).unwrap();
        assert!(p.is_structural_zero());
        // truncate below an existing term
        let q = z.mul(&a).unwrap(); // degree 2
        assert!(q.truncate(1).unwrap().is_structural_zero());
        assert_eq!(q.truncate(2).unwrap().exact_eq(&q), Some(true));
        assert!(matches!(q.truncate(9), Err(Error::Domain(_))));
    }

    #[test]
    fn degree_classification() {
        let c = chart_t();
        let t = coord(&c, "t");
        let tt = coord(&c, "theta1").mul(&coord(&c, "theta2")).unwrap();
        assert_eq!(tt.degree_of(), DegreeClass::Homogeneous(deg(&[1, 1])));
        assert_eq!(t.add(&tt).unwrap().degree_of(), DegreeClass::Mixed);
        assert_eq!(Series::zero(&c).degree_of(), DegreeClass::Zero);
        assert_eq!(t.degree_of(), DegreeClass::Homogeneous(deg(&[0, 0])));
        // degree additivity on a product
        let z = coord(&c, "z");
        let p = z.mul(&tt).unwrap();
        assert_eq!(p.degree_of(), DegreeClass::Homogeneous(deg(&[0, 0])));
    }

    #[test]
    fn display_formats_canonical_order() {
        let c = chart_t();
        let t = coord(&c, "t");
        let f = t
            .mul(&t)
            .unwrap()
            .scale(&rat(3, 2))
            .mul(&coord(&c, "theta1"))
            .unwrap()
            .mul(&coord(&c, "theta2"))
            .unwrap();
        assert_eq!(f.to_string(), "3/2*t^2*theta1*theta2");
        let g = Series::one(&c).add(&coord(&c, "z").neg()).unwrap();
        assert_eq!(g.to_string(), "1 - z");
        assert_eq!(Series::zero(&c).to_string(), "0");
        let mixed = coord(&c, "t").add(&coord(&c, "z")).unwrap();
        assert_eq!(mixed.to_string(), "t + z");
    }

    #[test]
    fn add_cancels_to_structural_zero() {
        let c = chart_t();
        let z = coord(&c, "z");
        assert!(z.sub(&z).unwrap().is_structural_zero());
    }

    #[test]
    fn context_mismatch_is_rejected() {
        let a = chart_t();
        let b = Chart::with_default_domain("W", 2, 6, vec!["t".into()], vec![]).unwrap();
        let res = Series::one(&a).add(&Series::one(&b));
        assert!(matches!(res, Err(Error::ContextMismatch { .. })));
    }

    #[test]
    fn scale_and_eval_body() {
        let c = chart_t();
        let t = coord(&c, "t");
        let f = t.scale(&rat_int(4)).add(&Series::one(&c)).unwrap();
        assert_eq!(f.body_at(&[0.5]).unwrap(), 3.0);
    }

    #[test]
    fn eq_up_to_ignores_higher_order() {
        let c = chart_t();
        let z = coord(&c, "z");
        let f = Series::one(&c).add(&z.mul(&z).unwrap()).unwrap();
        let g = Series::one(&c);
        let opts = EqOptions::default();
        assert!(f.eq_up_to(&g, 1, None, &opts).unwrap());
        assert!(!f.eq_up_to(&g, 2, None, &opts).unwrap());
    }
}
