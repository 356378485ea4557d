//! Morphisms between charts, presented through their pullbacks: a morphism
//! from chart X to chart Y assigns to every coordinate of Y a series over X
//! of the same degree. Composition, point maps, tangent data, and Newton
//! inversion are derived from that presentation.

use crate::calculus::partial_derivative;
use crate::chart::{ChartRef, CoordId, RealPoint};
use crate::coeff::{rat, Coeff, EqOptions, OpExpr, Rat};
use crate::degree::{enumerate_degrees, Degree};
use crate::error::{Error, Result};
use crate::series::{Monomial, Series};
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct Morphism {
    source: ChartRef,
    target: ChartRef,
    /// One series over `source` per coordinate of `target`, in the target's
    /// coordinate order (degree-0 coordinates first, then formal).
    images: Vec<Series>,
}

impl Morphism {
    pub fn new(source: &ChartRef, target: &ChartRef, images: Vec<Series>) -> Result<Morphism> {
        if source.n() != target.n() {
            return Err(Error::DimensionMismatch { expected: source.n(), found: target.n() });
        }
        if source.truncation() != target.truncation() {
            return Err(Error::ContextMismatch {
                expected: format!("truncation {}", source.truncation()),
                found: format!("truncation {}", target.truncation()),
            });
        }
        if images.len() != target.coord_count() {
            return Err(Error::DimensionMismatch {
                expected: target.coord_count(),
                found: images.len(),
            });
        }
        for (img, id) in images.iter().zip(target.coord_ids()) {
            if !img.chart().same_context(source) {
                return Err(source.context_error(img.chart()));
            }
            let want = target.coord_degree(id);
            if !img.degree_of().fits(&want) {
                return Err(Error::Degree(format!(
                    "image of '{}' must be homogeneous of degree {want}, got {}",
                    target.coord_name(id),
                    img
                )));
            }
        }
        Ok(Morphism { source: source.clone(), target: target.clone(), images })
    }

    pub fn identity(chart: &ChartRef) -> Morphism {
        let images = chart.coord_ids().map(|id| Series::coord(chart, id)).collect();
        Morphism { source: chart.clone(), target: chart.clone(), images }
    }

    pub fn source(&self) -> &ChartRef {
        &self.source
    }

    pub fn target(&self) -> &ChartRef {
        &self.target
    }

    pub fn images(&self) -> &[Series] {
        &self.images
    }

    pub fn image(&self, id: CoordId) -> &Series {
        let k = match id {
            CoordId::Base(i) => i,
            CoordId::Formal(i) => self.target.base_count() + i,
        };
        &self.images[k]
    }

    /// Pull a function on the target back along this morphism: substitute
    /// every target coordinate by its image. Polynomial coefficients
    /// substitute exactly; opaque coefficients are expanded around the
    /// degree-0 part of the substituted arguments, which is exact at the
    /// session truncation because the corrections are nilpotent.
    pub fn apply_pullback(&self, f: &Series) -> Result<Series> {
        if !f.chart().same_context(&self.target) {
            return Err(self.target.context_error(f.chart()));
        }
        let p = self.target.base_count();
        let mut out = Series::zero(&self.source);
        for (m, c) in f.terms() {
            let mut factor = Series::one(&self.source);
            for (j, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    factor = factor.mul(&self.images[p + j].pow(e as u32)?)?;
                }
            }
            if factor.is_structural_zero() {
                continue;
            }
            let coeff_series = self.substitute_coeff(c)?;
            out = out.add(&coeff_series.mul(&factor)?)?;
        }
        Ok(out)
    }

    /// Substitute the base-coordinate images into a coefficient function.
    fn substitute_coeff(&self, c: &Coeff) -> Result<Series> {
        match c {
            Coeff::Poly(poly) => {
                let mut acc = Series::zero(&self.source);
                for (bm, r) in poly.terms() {
                    let mut term = Series::constant(&self.source, r.clone());
                    for (i, &e) in bm.exps().iter().enumerate() {
                        if e > 0 {
                            term = term.mul(&self.images[i].pow(e)?)?;
                        }
                    }
                    acc = acc.add(&term)?;
                }
                Ok(acc)
            }
            Coeff::Opaque(expr) => {
                let p = self.target.base_count();
                let bodies: Vec<OpExpr> =
                    (0..p).map(|i| self.images[i].body().to_expr()).collect();
                let nils: Vec<Series> =
                    (0..p).map(|i| self.images[i].formal_part()).collect();
                if nils.iter().all(|n| n.is_structural_zero()) {
                    let composed = Coeff::from_expr(expr.subst(&bodies));
                    return Ok(Series::from_coeff(&self.source, composed));
                }
                let mut acc = Series::zero(&self.source);
                let unit = Series::one(&self.source);
                self.taylor_rec(expr, &bodies, &nils, 0, &unit, &mut acc)?;
                Ok(acc)
            }
        }
    }

    /// One branch of the Taylor expansion
    ///   f(b + v) = sum_alpha (d^alpha f)(b) * v^alpha / alpha!
    /// over multi-indices alpha extending the current one with variables
    /// >= `start`; `factor` carries v^alpha / alpha!. Terms die off on their
    /// own because the corrections v are nilpotent at the truncation order.
    fn taylor_rec(
        &self,
        d_expr: &OpExpr,
        bodies: &[OpExpr],
        nils: &[Series],
        start: usize,
        factor: &Series,
        acc: &mut Series,
    ) -> Result<()> {
        let evaluated = Coeff::from_expr(d_expr.subst(bodies));
        *acc = acc.add(&factor.scale_coeff(&evaluated))?;
        for i in start..nils.len() {
            if nils[i].is_structural_zero() {
                continue;
            }
            let mut k: u32 = 0;
            let mut cur = d_expr.clone();
            let mut fac = factor.clone();
            loop {
                k += 1;
                fac = fac.mul(&nils[i])?.scale(&rat(1, k as i64));
                if fac.is_structural_zero() {
                    break;
                }
                cur = cur.diff(i)?;
                if cur.is_structural_zero() {
                    break;
                }
                self.taylor_rec(&cur, bodies, nils, i + 1, &fac, acc)?;
            }
        }
        Ok(())
    }

    /// self after `before`: the geometric composite, whose pullback is
    /// (self . before)^* = before^* . self^*.
    pub fn compose(&self, before: &Morphism) -> Result<Morphism> {
        if !before.target.same_context(&self.source) {
            return Err(self.source.context_error(&before.target));
        }
        let images = self
            .images
            .iter()
            .map(|img| before.apply_pullback(img))
            .collect::<Result<Vec<_>>>()?;
        Morphism::new(&before.source, &self.target, images)
    }

    /// Image-wise equality of truncations at `order`, sampled over the
    /// source chart's box where opaque coefficients occur.
    pub fn eq_up_to(
        &self,
        other: &Morphism,
        order: usize,
        domain: Option<&[(f64, f64)]>,
        opts: &EqOptions,
    ) -> Result<bool> {
        if !self.source.same_context(&other.source) || !self.target.same_context(&other.target) {
            return Ok(false);
        }
        for (a, b) in self.images.iter().zip(&other.images) {
            if !a.eq_up_to(b, order, domain, opts)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Structural equality when every coefficient is exact.
    pub fn exact_eq(&self, other: &Morphism) -> Option<bool> {
        if !self.source.same_context(&other.source) || !self.target.same_context(&other.target) {
            return Some(false);
        }
        let mut all = true;
        for (a, b) in self.images.iter().zip(&other.images) {
            match a.exact_eq(b) {
                Some(true) => {}
                Some(false) => all = false,
                None => return None,
            }
        }
        Some(all)
    }

    /// The underlying map on real points: evaluate the degree-0 part of the
    /// base-coordinate images.
    pub fn map_point(&self, p: &RealPoint) -> Result<RealPoint> {
        let xs = p.coords_for(&self.source)?;
        let mut out = RealPoint::empty();
        for (i, name) in self.target.base_names().iter().enumerate() {
            out.set(name.clone(), self.images[i].body().eval(&xs)?);
        }
        Ok(out)
    }

    /// Per-degree blocks of the tangent map at a real point: for each degree
    /// gamma, the real matrix with rows indexed by target coordinates of
    /// degree gamma, columns by source coordinates of degree gamma, and
    /// entries (d image_B / d x_A) evaluated at the point.
    pub fn tangent_blocks_at(&self, p: &RealPoint) -> Result<Vec<(Degree, Vec<Vec<f64>>)>> {
        let xs = p.coords_for(&self.source)?;
        let mut blocks = Vec::new();
        for gamma in enumerate_degrees(self.source.n())? {
            let rows: Vec<CoordId> = self
                .target
                .coord_ids()
                .filter(|id| self.target.coord_degree(*id) == gamma)
                .collect();
            let cols: Vec<CoordId> = self
                .source
                .coord_ids()
                .filter(|id| self.source.coord_degree(*id) == gamma)
                .collect();
            if rows.is_empty() && cols.is_empty() {
                continue;
            }
            let mut block = Vec::with_capacity(rows.len());
            for r in &rows {
                let img = self.image(*r);
                let mut row = Vec::with_capacity(cols.len());
                for c in &cols {
                    let d = partial_derivative(img, *c)?;
                    row.push(d.body().eval(&xs)?);
                }
                block.push(row);
            }
            blocks.push((gamma, block));
        }
        Ok(blocks)
    }

    /// Submersion test at a point: every degree block of the tangent map has
    /// full row rank (within `tol`).
    pub fn is_submersion_at(&self, p: &RealPoint, tol: f64) -> Result<bool> {
        for (_, block) in self.tangent_blocks_at(p)? {
            if block.is_empty() {
                continue;
            }
            if crate::matrix::rank_f64(&block, tol) < block.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn require_exact(&self) -> Result<()> {
        for img in &self.images {
            if img.terms().any(|(_, c)| !c.is_exact()) {
                return Err(Error::Capability(
                    "inversion requires exact polynomial coefficients".into(),
                ));
            }
        }
        Ok(())
    }

    /// Invert by Newton iteration. The degree-0 part of the degree-0 images
    /// must be affine with an invertible rational linear part, and the
    /// first-order coefficients of the formal images must be rational
    /// constants; the full inverse is then corrected iteratively and both
    /// composites are verified against the identity.
    pub fn invert(&self) -> Result<Morphism> {
        let s = &self.source;
        let t = &self.target;
        if s.signature()? != t.signature()? {
            return Err(Error::DimensionMismatch {
                expected: s.coord_count(),
                found: t.coord_count(),
            });
        }
        self.require_exact()?;
        let p = s.base_count();
        let q = s.formal_count();

        // affine degree-0 part: x'_i = c_i + sum_j M_ij x_j
        let mut mmat = vec![vec![Rat::zero(); p]; p];
        let mut cvec = vec![Rat::zero(); p];
        for i in 0..p {
            let body = self.images[i].body();
            let poly = body.as_poly().expect("checked exact");
            for (bm, r) in poly.terms() {
                match bm.total() {
                    0 => cvec[i] = r.clone(),
                    1 => {
                        let j = bm.exps().iter().position(|&e| e == 1).unwrap();
                        mmat[i][j] = r.clone();
                    }
                    _ => {
                        return Err(Error::Capability(
                            "inversion requires an affine degree-0 part".into(),
                        ))
                    }
                }
            }
        }
        let minv = crate::matrix::invert_rat_matrix(&mmat).ok_or_else(|| {
            Error::SingularBody("degree-0 linear part is not invertible".into())
        })?;

        // constant first-order part of the formal images: xi'_j = sum_k N_jk xi_k + ...
        let mut nmat = vec![vec![Rat::zero(); q]; q];
        for j in 0..q {
            let img = &self.images[p + j];
            for k in 0..q {
                let c = img.coefficient_of(&Monomial::var(q, k));
                if c.is_structural_zero() {
                    continue;
                }
                match c.as_constant() {
                    Some(r) => nmat[j][k] = r,
                    None => {
                        return Err(Error::Capability(
                            "inversion requires constant first-order coefficients on the formal coordinates"
                                .into(),
                        ))
                    }
                }
            }
        }
        let ninv = crate::matrix::invert_rat_matrix(&nmat).ok_or_else(|| {
            Error::SingularBody("formal first-order part is not invertible".into())
        })?;

        // exact inverse of the first-order approximant, a morphism T -> S
        let mut a_inv_images = Vec::with_capacity(t.coord_count());
        for i in 0..p {
            let mut img = Series::zero(t);
            for (j, mj) in minv[i].iter().enumerate() {
                if mj.is_zero() {
                    continue;
                }
                let shifted = Series::coord(t, CoordId::Base(j))
                    .sub(&Series::constant(t, cvec[j].clone()))?;
                img = img.add(&shifted.scale(mj))?;
            }
            a_inv_images.push(img);
        }
        for k in 0..q {
            let mut img = Series::zero(t);
            for (j, nj) in ninv[k].iter().enumerate() {
                if nj.is_zero() {
                    continue;
                }
                img = img.add(&Series::coord(t, CoordId::Formal(j)).scale(nj))?;
            }
            a_inv_images.push(img);
        }
        let a_inv = Morphism::new(t, s, a_inv_images)?;

        // phi_tilde = A^-1 . phi has identity first-order part; iterate
        // psi <- psi . (2 id - phi_tilde . psi), which at least doubles the
        // order of agreement with the identity each round.
        let phi_tilde = a_inv.compose(self)?;
        let id_s = Morphism::identity(s);
        let mut psi = id_s.clone();
        let rounds = s.truncation() + 2;
        for _ in 0..rounds {
            let err = phi_tilde.compose(&psi)?;
            if err.exact_eq(&id_s) == Some(true) {
                break;
            }
            let corr_images = err
                .images
                .iter()
                .zip(s.coord_ids())
                .map(|(e, id)| {
                    Series::coord(s, id).scale(&Rat::from_integer(2.into())).sub(e)
                })
                .collect::<Result<Vec<_>>>()?;
            let corr = Morphism::new(s, s, corr_images)?;
            psi = psi.compose(&corr)?;
        }
        let inverse = psi.compose(&a_inv)?;

        let id_t = Morphism::identity(t);
        if self.compose(&inverse)?.exact_eq(&id_t) != Some(true)
            || inverse.compose(self)?.exact_eq(&id_s) != Some(true)
        {
            return Err(Error::Numeric(
                "Newton iteration did not converge to a two-sided inverse".into(),
            ));
        }
        Ok(inverse)
    }
}

/// The positional projection from a product chart onto a factor whose
/// coordinate blocks start at the given offsets (degree-0 and formal
/// coordinates are counted separately).
pub fn projection(
    big: &ChartRef,
    target: &ChartRef,
    base_offset: usize,
    formal_offset: usize,
) -> Result<Morphism> {
    if base_offset + target.base_count() > big.base_count()
        || formal_offset + target.formal_count() > big.formal_count()
    {
        return Err(Error::DimensionMismatch {
            expected: big.coord_count(),
            found: base_offset + formal_offset + target.coord_count(),
        });
    }
    let images = target
        .coord_ids()
        .map(|id| match id {
            CoordId::Base(i) => Series::coord(big, CoordId::Base(base_offset + i)),
            CoordId::Formal(i) => Series::coord(big, CoordId::Formal(formal_offset + i)),
        })
        .collect();
    Morphism::new(big, target, images)
}

/// A formatting helper used by reports: the images listed as
/// "name = series" lines in target coordinate order.
pub fn describe_images(m: &Morphism) -> Vec<(String, String)> {
    m.target()
        .coord_ids()
        .map(|id| (m.target().coord_name(id).to_string(), m.image(id).to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Chart, FormalVariable};
    use crate::coeff::{rat_int, FnRegistry, Poly};

    fn deg(bits: &[u8]) -> Degree {
        Degree::new(bits.to_vec()).unwrap()
    }

    fn chart_named(name: &str) -> ChartRef {
        Chart::with_default_domain(
            name,
            2,
            6,
            vec!["t".into()],
            vec![
                FormalVariable { name: "z".into(), degree: deg(&[1, 1]) },
                FormalVariable { name: "eta".into(), degree: deg(&[0, 1]) },
                FormalVariable { name: "chi".into(), degree: deg(&[1, 0]) },
            ],
        )
        .unwrap()
    }

    fn coord(chart: &ChartRef, name: &str) -> Series {
        Series::coord(chart, chart.lookup(name).unwrap())
    }

    /// z*eta*chi: the degree-(0,0) product of all three formal generators.
    fn zec(chart: &ChartRef) -> Series {
        coord(chart, "z")
            .mul(&coord(chart, "eta"))
            .unwrap()
            .mul(&coord(chart, "chi"))
            .unwrap()
    }

    /// t' = t + z*eta*chi, z' = z, eta' = eta, chi' = chi  (U -> V)
    fn shear(u: &ChartRef, v: &ChartRef) -> Morphism {
        let t_img = coord(u, "t").add(&zec(u)).unwrap();
        Morphism::new(
            u,
            v,
            vec![t_img, coord(u, "z"), coord(u, "eta"), coord(u, "chi")],
        )
        .unwrap()
    }

    #[test]
    fn degree_preservation_is_checked() {
        let u = chart_named("U");
        let v = chart_named("V");
        // degree of eta-image wrong: chi has degree (1,0), eta (0,1)
        let bad = Morphism::new(
            &u,
            &v,
            vec![coord(&u, "t"), coord(&u, "z"), coord(&u, "chi"), coord(&u, "eta")],
        );
        assert!(matches!(bad, Err(Error::Degree(_))));
    }

    #[test]
    fn pullback_of_polynomial_coefficients_is_exact() {
        let u = chart_named("U");
        let v = chart_named("V");
        let f = shear(&u, &v);
        // pull back t'^2: (t + z eta chi)^2 = t^2 + 2 t z eta chi, since the
        // correction squares to zero
        let t2 = coord(&v, "t").pow(2).unwrap();
        let got = f.apply_pullback(&t2).unwrap();
        let expect = coord(&u, "t")
            .pow(2)
            .unwrap()
            .add(&coord(&u, "t").scale(&rat_int(2)).mul(&zec(&u)).unwrap())
            .unwrap();
        assert_eq!(got.exact_eq(&expect), Some(true));
    }

    #[test]
    fn pullback_of_opaque_coefficient_taylor_expands() {
        let u = chart_named("U");
        let v = chart_named("V");
        let f = shear(&u, &v);
        // pull back sin(t'): sin(t + z eta chi) = sin(t) + cos(t) z eta chi
        // exactly, because the correction squares to zero
        let reg = FnRegistry::builtins();
        let sin = reg.get("sin").unwrap().clone();
        let cos = reg.get("cos").unwrap().clone();
        let sin_t = Series::from_coeff(
            &v,
            Coeff::from_expr(
                OpExpr::call(sin.clone(), vec![OpExpr::Poly(Poly::var(1, 0))]).unwrap(),
            ),
        );
        let got = f.apply_pullback(&sin_t).unwrap();
        let sin_u = Series::from_coeff(
            &u,
            Coeff::from_expr(OpExpr::call(sin, vec![OpExpr::Poly(Poly::var(1, 0))]).unwrap()),
        );
        let cos_u = Series::from_coeff(
            &u,
            Coeff::from_expr(OpExpr::call(cos, vec![OpExpr::Poly(Poly::var(1, 0))]).unwrap()),
        );
        let expect = sin_u.add(&cos_u.mul(&zec(&u)).unwrap()).unwrap();
        let opts = EqOptions::default();
        assert!(got.eq_up_to(&expect, 6, None, &opts).unwrap());
    }

    #[test]
    fn composition_matches_sequential_pullback() {
        let u = chart_named("U");
        let v = chart_named("V");
        let w = chart_named("W");
        let f = shear(&u, &v); // U -> V
        let g = shear(&v, &w); // V -> W
        let gf = g.compose(&f).unwrap(); // U -> W
        let test_fn = coord(&w, "t").pow(2).unwrap().add(&coord(&w, "z")).unwrap();
        let lhs = gf.apply_pullback(&test_fn).unwrap();
        let rhs = f.apply_pullback(&g.apply_pullback(&test_fn).unwrap()).unwrap();
        assert_eq!(lhs.exact_eq(&rhs), Some(true));
    }

    #[test]
    fn invert_recovers_the_exact_inverse() {
        let u = chart_named("U");
        let v = chart_named("V");
        let f = shear(&u, &v);
        let inv = f.invert().unwrap();
        // the inverse of the shear is the shear with the opposite sign
        let t_img = coord(&v, "t").sub(&zec(&v)).unwrap();
        let expect = Morphism::new(
            &v,
            &u,
            vec![t_img, coord(&v, "z"), coord(&v, "eta"), coord(&v, "chi")],
        )
        .unwrap();
        assert_eq!(inv.exact_eq(&expect), Some(true));
    }

    #[test]
    fn invert_handles_nontrivial_linear_parts_and_nested_corrections() {
        let u = chart_named("U");
        let v = chart_named("V");
        // t' = 2t + 1 + z eta chi, z' = 2z - eta chi + z^3,
        // eta' = 3 eta + z chi, chi' = chi
        // (eta chi and z^3 both have degree (1,1), matching z)
        let t_img = coord(&u, "t")
            .scale(&rat_int(2))
            .add(&Series::one(&u))
            .unwrap()
            .add(&zec(&u))
            .unwrap();
        let z_img = coord(&u, "z")
            .scale(&rat_int(2))
            .sub(&coord(&u, "eta").mul(&coord(&u, "chi")).unwrap())
            .unwrap()
            .add(&coord(&u, "z").pow(3).unwrap())
            .unwrap();
        let eta_img = coord(&u, "eta")
            .scale(&rat_int(3))
            .add(&coord(&u, "z").mul(&coord(&u, "chi")).unwrap())
            .unwrap();
        let chi_img = coord(&u, "chi");
        let f = Morphism::new(&u, &v, vec![t_img, z_img, eta_img, chi_img]).unwrap();
        let inv = f.invert().unwrap();
        let idu = Morphism::identity(&u);
        let idv = Morphism::identity(&v);
        assert_eq!(inv.compose(&f).unwrap().exact_eq(&idu), Some(true));
        assert_eq!(f.compose(&inv).unwrap().exact_eq(&idv), Some(true));
    }

    #[test]
    fn invert_rejects_singular_and_non_affine_maps() {
        let u = chart_named("U");
        let v = chart_named("V");
        // z' = 0 on the formal block: singular first-order part
        let f = Morphism::new(
            &u,
            &v,
            vec![coord(&u, "t"), Series::zero(&u), coord(&u, "eta"), coord(&u, "chi")],
        )
        .unwrap();
        assert!(matches!(f.invert(), Err(Error::SingularBody(_))));
        // t' = t^2: not affine
        let g = Morphism::new(
            &u,
            &v,
            vec![coord(&u, "t").pow(2).unwrap(), coord(&u, "z"), coord(&u, "eta"), coord(&u, "chi")],
        )
        .unwrap();
        assert!(matches!(g.invert(), Err(Error::Capability(_))));
    }

    #[test]
    fn map_point_and_tangent_blocks() {
        let u = chart_named("U");
        let v = chart_named("V");
        // t' = 2t + 1; formal identity
        let f = Morphism::new(
            &u,
            &v,
            vec![
                coord(&u, "t").scale(&rat_int(2)).add(&Series::one(&u)).unwrap(),
                coord(&u, "z"),
                coord(&u, "eta"),
                coord(&u, "chi").scale(&rat_int(5)),
            ],
        )
        .unwrap();
        let mut p = RealPoint::empty();
        p.set("t", 0.25);
        let q = f.map_point(&p).unwrap();
        assert!((q.get("t").unwrap() - 1.5).abs() < 1e-12);
        let blocks = f.tangent_blocks_at(&p).unwrap();
        // four blocks: degrees (0,0), (1,1), (0,1), (1,0)
        assert_eq!(blocks.len(), 4);
        assert_eq!(blocks[0].1, vec![vec![2.0]]);
        assert_eq!(blocks[3].1, vec![vec![5.0]]);
        assert!(f.is_submersion_at(&p, 1e-9).unwrap());
        // collapse one direction: no longer a submersion
        let g = Morphism::new(
            &u,
            &v,
            vec![
                coord(&u, "t"),
                coord(&u, "z"),
                coord(&u, "eta").scale(&rat_int(0)),
                coord(&u, "chi"),
            ],
        )
        .unwrap();
        assert!(!g.is_submersion_at(&p, 1e-9).unwrap());
    }
}
