//! Graded calculus: left partial derivatives, derivations, the Euler
//! field, and homogeneity weights.

use crate::chart::{ChartRef, CoordId};
use crate::coeff::{approx_eq, rat_to_f64, sample_points, Coeff, EqOptions, Rat};
use crate::error::{Error, Result};
use crate::series::{Monomial, Series};
use num_traits::Zero;

/// Left partial derivative with respect to one coordinate.
///
/// For a degree-0 coordinate this differentiates every coefficient function.
/// For a formal generator xi_k acting on a canonical monomial
/// u_1^{e_1}...u_m^{e_m} the generator is commuted to the front across the
/// factors preceding it, giving
///   d/d(xi_k) = e_k * (-1)^<deg xi_k, sum_{i<k} e_i deg u_i> * (monomial / xi_k).
pub fn partial_derivative(f: &Series, id: CoordId) -> Result<Series> {
    let chart = f.chart().clone();
    match id {
        CoordId::Base(i) => {
            if i >= chart.base_count() {
                return Err(Error::InvalidInput(format!(
                    "chart '{}' has no degree-0 coordinate #{i}",
                    chart.name()
                )));
            }
            f.map_coeffs(|c| c.partial(i))
        }
        CoordId::Formal(k) => {
            if k >= chart.formal_count() {
                return Err(Error::InvalidInput(format!(
                    "chart '{}' has no formal coordinate #{k}",
                    chart.name()
                )));
            }
            let dk = &chart.formal_var(k).degree;
            let mut out = Series::zero(&chart);
            for (m, c) in f.terms() {
                let ek = m.exps()[k];
                if ek == 0 {
                    continue;
                }
                // pairing of deg xi_k with the degrees left of position k
                let mut crossings: u32 = 0;
                for i in 0..k {
                    let ei = m.exps()[i] as u32;
                    if ei == 0 {
                        continue;
                    }
                    crossings += ei * dk.pairing(&chart.formal_var(i).degree)?;
                }
                let mut exps = m.exps().to_vec();
                exps[k] -= 1;
                let reduced = Monomial::from_exps(exps);
                let mut coeff = c.scale(&Rat::from_integer(ek.into()));
                if crossings % 2 == 1 {
                    coeff = coeff.neg();
                }
                let term = Series::single(&chart, reduced, coeff)?;
                out = out.add(&term)?;
            }
            Ok(out)
        }
    }
}

/// A derivation X = sum_u X^u d/du with the component functions standing to
/// the left of the partial derivatives.
#[derive(Debug, Clone)]
pub struct Derivation {
    chart: ChartRef,
    components: Vec<Series>,
}

impl Derivation {
    /// Components listed in coordinate order (degree-0 first, then formal).
    pub fn new(chart: &ChartRef, components: Vec<Series>) -> Result<Derivation> {
        if components.len() != chart.coord_count() {
            return Err(Error::DimensionMismatch {
                expected: chart.coord_count(),
                found: components.len(),
            });
        }
        for c in &components {
            if !c.chart().same_context(chart) {
                return Err(chart.context_error(c.chart()));
            }
        }
        Ok(Derivation { chart: chart.clone(), components })
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    pub fn component(&self, id: CoordId) -> &Series {
        let k = match id {
            CoordId::Base(i) => i,
            CoordId::Formal(i) => self.chart.base_count() + i,
        };
        &self.components[k]
    }

    /// The Euler field sum_u u d/du over every coordinate of the chart.
    pub fn euler(chart: &ChartRef) -> Derivation {
        let components = chart.coord_ids().map(|id| Series::coord(chart, id)).collect();
        Derivation { chart: chart.clone(), components }
    }

    /// Euler field restricted to a subset of coordinates (the remaining
    /// components are zero); used for fibre weights.
    pub fn euler_on(chart: &ChartRef, coords: &[CoordId]) -> Derivation {
        let components = chart
            .coord_ids()
            .map(|id| {
                if coords.contains(&id) {
                    Series::coord(chart, id)
                } else {
                    Series::zero(chart)
                }
            })
            .collect();
        Derivation { chart: chart.clone(), components }
    }

    /// Apply to a function: X(f) = sum_u X^u * (df/du).
    pub fn apply(&self, f: &Series) -> Result<Series> {
        if !f.chart().same_context(&self.chart) {
            return Err(self.chart.context_error(f.chart()));
        }
        let mut out = Series::zero(&self.chart);
        for (component, id) in self.components.iter().zip(self.chart.coord_ids()) {
            if component.is_structural_zero() {
                continue;
            }
            let df = partial_derivative(f, id)?;
            out = out.add(&component.mul(&df)?)?;
        }
        Ok(out)
    }
}

/// A homogeneity weight: exact when every coefficient involved is
/// polynomial, numerically sampled otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Exact(Rat),
    Approx(f64),
}

impl Weight {
    pub fn to_f64(&self) -> f64 {
        match self {
            Weight::Exact(r) => rat_to_f64(r),
            Weight::Approx(v) => *v,
        }
    }

    pub fn is_value(&self, k: i64, tol: f64) -> bool {
        match self {
            Weight::Exact(r) => *r == Rat::from_integer(k.into()),
            Weight::Approx(v) => (v - k as f64).abs() <= tol,
        }
    }
}

/// The weight of `f` under the Euler field: Some(w) when E(f) = w * f,
/// None when f is not homogeneous for the scaling action. The zero function
/// reports weight 0.
pub fn weight_of(
    f: &Series,
    domain: Option<&[(f64, f64)]>,
    opts: &EqOptions,
) -> Result<Option<Weight>> {
    let euler = Derivation::euler(f.chart());
    let ef = euler.apply(f)?;
    let all_exact = f.terms().all(|(_, c)| c.is_exact()) && ef.terms().all(|(_, c)| c.is_exact());

    // union of formal monomials carrying either f or E(f)
    let mut monos: Vec<Monomial> = f.terms().map(|(m, _)| m.clone()).collect();
    for (m, _) in ef.terms() {
        if !monos.contains(m) {
            monos.push(m.clone());
        }
    }

    if all_exact {
        let mut w: Option<Rat> = None;
        for m in &monos {
            let cf = f.coefficient_of(m);
            let cg = ef.coefficient_of(m);
            let (pf, pg) = (cf.as_poly().cloned().unwrap(), cg.as_poly().cloned().unwrap());
            // per base monomial: rg = w * rf
            let mut base_monos: Vec<_> = pf.terms().map(|(b, _)| b.clone()).collect();
            for (b, _) in pg.terms() {
                if !base_monos.contains(b) {
                    base_monos.push(b.clone());
                }
            }
            for b in base_monos {
                let rf = pf.terms().find(|(bb, _)| **bb == b).map(|(_, r)| r.clone());
                let rg = pg.terms().find(|(bb, _)| **bb == b).map(|(_, r)| r.clone());
                match (rf, rg) {
                    (None, None) => {}
                    (None, Some(rg)) => {
                        if !rg.is_zero() {
                            return Ok(None);
                        }
                    }
                    (Some(rf), rg) => {
                        let rg = rg.unwrap_or_else(Rat::zero);
                        let cand = rg / rf;
                        match &w {
                            None => w = Some(cand),
                            Some(prev) if *prev == cand => {}
                            Some(_) => return Ok(None),
                        }
                    }
                }
            }
        }
        return Ok(Some(Weight::Exact(w.unwrap_or_else(Rat::zero))));
    }

    // sampled path
    let domain = domain.unwrap_or_else(|| f.chart().base_domain());
    let points = sample_points(domain, opts);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for m in &monos {
        let cf = f.coefficient_of(m);
        let cg = ef.coefficient_of(m);
        for p in &points {
            pairs.push((cf.eval(p)?, cg.eval(p)?));
        }
    }
    let anchor = pairs
        .iter()
        .cloned()
        .max_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
    let w = match anchor {
        Some((vf, vg)) if vf.abs() > opts.tol => vg / vf,
        _ => 0.0,
    };
    for (vf, vg) in pairs {
        if !approx_eq(vg, w * vf, opts.tol) {
            return Ok(None);
        }
    }
    Ok(Some(Weight::Approx(w)))
}

/// Structural test that `f` is linear in the coordinates: every term is
/// either a degree-1 polynomial in the degree-0 coordinates (no constant
/// part) or a single formal generator with a rational constant coefficient.
/// Opaque coefficients never certify as linear.
pub fn is_linear_function(f: &Series) -> bool {
    for (m, c) in f.terms() {
        match m.total() {
            0 => match c {
                Coeff::Poly(p) => {
                    if !p.terms().all(|(b, _)| b.total() == 1) {
                        return false;
                    }
                }
                Coeff::Opaque(_) => return false,
            },
            1 => {
                if c.as_constant().is_none() {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}
