//! Bundles from atlas data. An atlas is a family of charts with coordinate
//! changes on overlaps; principal bundles add a group-valued cocycle over
//! the overlaps; vector bundles a matrix-valued one. Everything here is
//! verified, not assumed: cocycle identities are checked as morphism
//! identities at the working truncation (exactly for polynomial data,
//! sampled on the overlap boxes where opaque functions occur), and the
//! reduced degree-0 data is cross-checked at sampled real points.

use crate::calculus::Derivation;
use crate::chart::{Chart, ChartRef, CoordId, FormalVariable, RealPoint};
use crate::coeff::{approx_eq, rat_to_f64, sample_points, EqOptions};
use crate::degree::{enumerate_degrees, Degree};
use crate::error::{Error, Result};
use crate::group::{GroupAction, GroupLaw};
use crate::matrix::GradedMatrix;
use crate::morphism::{projection, Morphism};
use crate::report::Report;
use crate::series::Series;
use std::collections::BTreeMap;

/// One directed overlap U_i -> U_j of an atlas.
#[derive(Debug, Clone)]
pub struct Overlap {
    /// Box inside chart i's degree-0 domain where the two charts overlap.
    pub domain_in_i: Vec<(f64, f64)>,
    /// The coordinate change, presented as a pullback: a series over chart i
    /// for every coordinate of chart j.
    pub transition: Morphism,
    /// How many leading degree-0 image coordinates carry the containment
    /// claim "sampled overlap points land in the partner chart's box".
    /// Product charts of constructed total spaces limit this to the
    /// underlying base block: fibre coordinates are linear directions whose
    /// boxes are sampling windows, not bounded chart domains.
    pub checked_range: usize,
}

/// A triple overlap U_i ∩ U_j ∩ U_k with its box in chart i.
#[derive(Debug, Clone)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub domain_in_i: Vec<(f64, f64)>,
}

/// Charts plus directed transitions on overlaps, with optional triple
/// overlap data for cocycle verification.
#[derive(Debug, Clone)]
pub struct Atlas {
    charts: Vec<ChartRef>,
    overlaps: BTreeMap<(usize, usize), Overlap>,
    triples: Vec<Triple>,
}

impl Atlas {
    /// All charts must share n, truncation, and dimension signature.
    pub fn new(charts: Vec<ChartRef>) -> Result<Atlas> {
        if charts.is_empty() {
            return Err(Error::InvalidInput("an atlas needs at least one chart".into()));
        }
        let sig = charts[0].signature()?;
        for c in &charts[1..] {
            if c.n() != charts[0].n() || c.truncation() != charts[0].truncation() {
                return Err(charts[0].context_error(c));
            }
            if c.signature()? != sig {
                return Err(Error::InvalidInput(format!(
                    "chart '{}' has a different dimension signature",
                    c.name()
                )));
            }
        }
        Ok(Atlas { charts, overlaps: BTreeMap::new(), triples: Vec::new() })
    }

    pub fn charts(&self) -> &[ChartRef] {
        &self.charts
    }

    pub fn chart_index(&self, name: &str) -> Option<usize> {
        self.charts.iter().position(|c| c.name() == name)
    }

    pub fn overlaps(&self) -> impl Iterator<Item = (&(usize, usize), &Overlap)> {
        self.overlaps.iter()
    }

    pub fn overlap(&self, i: usize, j: usize) -> Option<&Overlap> {
        self.overlaps.get(&(i, j))
    }

    pub fn transition(&self, i: usize, j: usize) -> Option<&Morphism> {
        self.overlaps.get(&(i, j)).map(|o| &o.transition)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn add_overlap(
        &mut self,
        i: usize,
        j: usize,
        domain_in_i: Vec<(f64, f64)>,
        transition: Morphism,
    ) -> Result<()> {
        if i == j || i >= self.charts.len() || j >= self.charts.len() {
            return Err(Error::InvalidInput(format!("invalid overlap pair ({i}, {j})")));
        }
        if !transition.source().same_context(&self.charts[i]) {
            return Err(self.charts[i].context_error(transition.source()));
        }
        if !transition.target().same_context(&self.charts[j]) {
            return Err(self.charts[j].context_error(transition.target()));
        }
        if domain_in_i.len() != self.charts[i].base_count() {
            return Err(Error::DimensionMismatch {
                expected: self.charts[i].base_count(),
                found: domain_in_i.len(),
            });
        }
        let checked_range = self.charts[j].base_count();
        self.overlaps.insert((i, j), Overlap { domain_in_i, transition, checked_range });
        Ok(())
    }

    /// Restrict the containment claim of an existing overlap to the first
    /// `range` degree-0 coordinates (used by total-space constructions and
    /// when reloading their emitted atlases).
    pub fn restrict_checked_range(&mut self, i: usize, j: usize, range: usize) {
        if let Some(ov) = self.overlaps.get_mut(&(i, j)) {
            ov.checked_range = range;
        }
    }

    pub fn add_triple(
        &mut self,
        i: usize,
        j: usize,
        k: usize,
        domain_in_i: Vec<(f64, f64)>,
    ) -> Result<()> {
        if i >= self.charts.len() || j >= self.charts.len() || k >= self.charts.len() {
            return Err(Error::InvalidInput(format!("invalid triple ({i}, {j}, {k})")));
        }
        if domain_in_i.len() != self.charts[i].base_count() {
            return Err(Error::DimensionMismatch {
                expected: self.charts[i].base_count(),
                found: domain_in_i.len(),
            });
        }
        self.triples.push(Triple { i, j, k, domain_in_i });
        Ok(())
    }

    fn pair_label(&self, i: usize, j: usize) -> String {
        format!("({}, {})", self.charts[i].name(), self.charts[j].name())
    }

    /// Verify the atlas gluing data: every transition composed with its
    /// reverse is the identity on the overlap, every recorded triple
    /// satisfies the two-step/one-step identity, and the degree-0 point
    /// maps send sampled overlap points into the partner chart's box.
    pub fn check_cocycle(&self, opts: &EqOptions) -> Result<Report> {
        let mut report = Report::new();
        let order = self.charts[0].truncation();

        for (&(i, j), ov) in &self.overlaps {
            let label = self.pair_label(i, j);
            let Some(rev) = self.overlaps.get(&(j, i)) else {
                report.push("pair-cocycle", &label, false, "reverse transition missing");
                continue;
            };
            // t_ij ∘ t_ji is a self-map of chart j; compare with the
            // identity on the (j, i) overlap box.
            let round = ov.transition.compose(&rev.transition)?;
            let id = Morphism::identity(&self.charts[j]);
            let ok = match round.exact_eq(&id) {
                Some(v) => v,
                None => round.eq_up_to(&id, order, Some(&rev.domain_in_i), opts)?,
            };
            report.push(
                "pair-cocycle",
                &label,
                ok,
                if ok {
                    format!("round trip is the identity to order {order}")
                } else {
                    "round trip differs from the identity".into()
                },
            );

            // Reduced check: sampled points of the overlap land in the box
            // of the partner chart.
            let mut inside = true;
            let mut detail = String::new();
            for xs in sample_points(&ov.domain_in_i, opts) {
                let p = point_from_coords(&self.charts[i], &xs);
                let q = ov.transition.map_point(&p)?;
                let qs = q.coords_for(&self.charts[j])?;
                for (v, &(lo, hi)) in
                    qs.iter().zip(self.charts[j].base_domain()).take(ov.checked_range)
                {
                    if !(lo - 1e-9 <= *v && *v <= hi + 1e-9) {
                        inside = false;
                        detail = format!("image {v} escapes [{lo}, {hi}]");
                    }
                }
            }
            report.push(
                "overlap-range",
                &label,
                inside,
                if inside { "sampled images stay in the partner box".into() } else { detail },
            );
        }

        for t in &self.triples {
            let label = format!(
                "({}, {}, {})",
                self.charts[t.i].name(),
                self.charts[t.j].name(),
                self.charts[t.k].name()
            );
            let (Some(tij), Some(tjk), Some(tik)) = (
                self.transition(t.i, t.j),
                self.transition(t.j, t.k),
                self.transition(t.i, t.k),
            ) else {
                report.push("triple-cocycle", &label, false, "a required transition is missing");
                continue;
            };
            let two_step = tjk.compose(tij)?;
            let ok = match two_step.exact_eq(tik) {
                Some(v) => v,
                None => two_step.eq_up_to(tik, order, Some(&t.domain_in_i), opts)?,
            };
            report.push(
                "triple-cocycle",
                &label,
                ok,
                if ok {
                    format!("two-step matches one-step to order {order}")
                } else {
                    "two-step transition differs from the direct one".into()
                },
            );
        }
        Ok(report)
    }
}

fn point_from_coords(chart: &ChartRef, xs: &[f64]) -> RealPoint {
    let mut p = RealPoint::empty();
    for (i, &v) in xs.iter().enumerate() {
        p.set(chart.base_name(i), v);
    }
    p
}

/// The product chart U x F with fibre coordinates suffixed to avoid clashes.
fn product_with_fibre(u: &ChartRef, fibre: &ChartRef, suffix: &str) -> Result<ChartRef> {
    let w = u.product(fibre, format!("{}x{}", u.name(), fibre.name()), |s| {
        format!("{s}{suffix}")
    })?;
    let mut names: Vec<&str> = w.coord_ids().map(|id| w.coord_name(id)).collect();
    names.sort_unstable();
    if names.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::InvalidInput(format!(
            "coordinate names collide in the product chart '{}'",
            w.name()
        )));
    }
    Ok(w)
}

/// Splice base-part and fibre-part images into the coordinate order of the
/// product chart (base coords of both factors first, then formal ones).
fn splice_images(
    base_part: &Morphism,
    fibre_part: &Morphism,
    u: &ChartRef,
    fibre: &ChartRef,
) -> Vec<Series> {
    let mut images: Vec<Series> = Vec::new();
    images.extend_from_slice(&base_part.images()[..u.base_count()]);
    images.extend_from_slice(&fibre_part.images()[..fibre.base_count()]);
    images.extend_from_slice(&base_part.images()[u.base_count()..]);
    images.extend_from_slice(&fibre_part.images()[fibre.base_count()..]);
    images
}

/// A principal bundle presented by its atlas and a group-valued cocycle:
/// psi_ij is a Lambda-point of the group over chart i, one per overlap.
#[derive(Debug, Clone)]
pub struct PrincipalBundle {
    atlas: Atlas,
    group: GroupLaw,
    cocycle: BTreeMap<(usize, usize), Morphism>,
}

impl PrincipalBundle {
    pub fn new(
        atlas: Atlas,
        group: GroupLaw,
        cocycle: BTreeMap<(usize, usize), Morphism>,
    ) -> Result<PrincipalBundle> {
        for (&(i, j), psi) in &cocycle {
            if atlas.overlap(i, j).is_none() {
                return Err(Error::InvalidInput(format!(
                    "cocycle entry ({i}, {j}) has no matching overlap"
                )));
            }
            if !psi.source().same_context(&atlas.charts[i]) {
                return Err(atlas.charts[i].context_error(psi.source()));
            }
            if !psi.target().same_context(group.chart()) {
                return Err(group.chart().context_error(psi.target()));
            }
        }
        for &(i, j) in atlas.overlaps.keys() {
            if !cocycle.contains_key(&(i, j)) {
                return Err(Error::InvalidInput(format!(
                    "overlap ({i}, {j}) has no cocycle entry"
                )));
            }
        }
        Ok(PrincipalBundle { atlas, group, cocycle })
    }

    pub fn atlas(&self) -> &Atlas {
        &self.atlas
    }

    pub fn group(&self) -> &GroupLaw {
        &self.group
    }

    pub fn transition_point(&self, i: usize, j: usize) -> Option<&Morphism> {
        self.cocycle.get(&(i, j))
    }

    /// Verify the bundle cocycle on top of the atlas cocycle:
    /// psi_ij * (psi_ji ∘ t_ij) is the unit over each overlap, every
    /// recorded triple multiplies to the unit, and the reduced degree-0
    /// cocycle closes at sampled real points under the reduced group law.
    pub fn check_cocycle(&self, opts: &EqOptions) -> Result<Report> {
        let mut report = self.atlas.check_cocycle(opts)?;
        let order = self.atlas.charts[0].truncation();
        let gbc = self.group.chart().base_count();
        let unit_f64: Vec<f64> =
            self.group.unit_values().iter().map(rat_to_f64).collect();

        for (&(i, j), ov) in &self.atlas.overlaps {
            let label = self.atlas.pair_label(i, j);
            let psi_ij = &self.cocycle[&(i, j)];
            let Some(psi_ji) = self.cocycle.get(&(j, i)) else {
                report.push("bundle-pair", &label, false, "reverse cocycle entry missing");
                continue;
            };
            let pulled = psi_ji.compose(&ov.transition)?;
            let prod = self.group.multiply(psi_ij, &pulled)?;
            let unit = self.group.unit_point(&self.atlas.charts[i])?;
            let ok = match prod.exact_eq(&unit) {
                Some(v) => v,
                None => prod.eq_up_to(&unit, order, Some(&ov.domain_in_i), opts)?,
            };
            report.push(
                "bundle-pair",
                &label,
                ok,
                if ok {
                    format!("psi_ij * psi_ji = e to order {order}")
                } else {
                    "psi_ij * (psi_ji ∘ t_ij) differs from the unit".into()
                },
            );

            // Reduced degree-0 cocycle at sampled points of the overlap.
            let mut ok_reduced = true;
            for xs in sample_points(&ov.domain_in_i, opts) {
                let g1: Vec<f64> = psi_ij.images()[..gbc]
                    .iter()
                    .map(|s| s.body_at(&xs))
                    .collect::<Result<_>>()?;
                let p = point_from_coords(&self.atlas.charts[i], &xs);
                let q = ov.transition.map_point(&p)?;
                let ys = q.coords_for(&self.atlas.charts[j])?;
                let g2: Vec<f64> = psi_ji.images()[..gbc]
                    .iter()
                    .map(|s| s.body_at(&ys))
                    .collect::<Result<_>>()?;
                let prod = self.group.multiply_base(&g1, &g2)?;
                if !prod
                    .iter()
                    .zip(&unit_f64)
                    .all(|(a, b)| approx_eq(*a, *b, opts.tol))
                {
                    ok_reduced = false;
                }
            }
            report.push(
                "reduced-pair",
                &label,
                ok_reduced,
                if ok_reduced {
                    "reduced cocycle closes at sampled points"
                } else {
                    "reduced product differs from the unit at a sampled point"
                },
            );
        }

        for t in &self.atlas.triples {
            let label = format!(
                "({}, {}, {})",
                self.atlas.charts[t.i].name(),
                self.atlas.charts[t.j].name(),
                self.atlas.charts[t.k].name()
            );
            let (Some(tij), Some(tik)) =
                (self.atlas.transition(t.i, t.j), self.atlas.transition(t.i, t.k))
            else {
                report.push("bundle-triple", &label, false, "atlas transitions missing");
                continue;
            };
            let (Some(pij), Some(pjk), Some(pki)) = (
                self.cocycle.get(&(t.i, t.j)),
                self.cocycle.get(&(t.j, t.k)),
                self.cocycle.get(&(t.k, t.i)),
            ) else {
                report.push("bundle-triple", &label, false, "cocycle entries missing");
                continue;
            };
            let b = pjk.compose(tij)?;
            let c = pki.compose(tik)?;
            let prod = self.group.multiply(&self.group.multiply(pij, &b)?, &c)?;
            let unit = self.group.unit_point(&self.atlas.charts[t.i])?;
            let ok = match prod.exact_eq(&unit) {
                Some(v) => v,
                None => prod.eq_up_to(&unit, order, Some(&t.domain_in_i), opts)?,
            };
            report.push(
                "bundle-triple",
                &label,
                ok,
                if ok {
                    format!("psi_ij psi_jk psi_ki = e to order {order}")
                } else {
                    "triple product differs from the unit".into()
                },
            );
        }
        Ok(report)
    }

    /// Build the total space as an atlas of product charts W_i = U_i x G,
    /// glued by T_ij(x, g) = (t_ij(x), g * psi_ij(x)): the transition acts
    /// on the fibre by right translation, so the left action of G on itself
    /// survives gluing.
    pub fn glue_total_space(&self) -> Result<Atlas> {
        let g = self.group.chart();
        let charts = self
            .atlas
            .charts
            .iter()
            .map(|u| product_with_fibre(u, g, "_fib"))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Atlas::new(charts.clone())?;
        for (&(i, j), ov) in &self.atlas.overlaps {
            let u_i = &self.atlas.charts[i];
            let u_j = &self.atlas.charts[j];
            let proj_u = projection(&charts[i], u_i, 0, 0)?;
            let base_part = ov.transition.compose(&proj_u)?;
            let g_pt = projection(&charts[i], g, u_i.base_count(), u_i.formal_count())?;
            let psi_pulled = self.cocycle[&(i, j)].compose(&proj_u)?;
            let fibre_part = self.group.multiply(&g_pt, &psi_pulled)?;
            let images = splice_images(&base_part, &fibre_part, u_j, g);
            let t = Morphism::new(&charts[i], &charts[j], images)?;
            let mut domain = ov.domain_in_i.clone();
            domain.extend(g.base_domain().iter().copied());
            out.add_overlap(i, j, domain, t)?;
            out.restrict_checked_range(i, j, u_j.base_count());
        }
        for t in &self.atlas.triples {
            let mut domain = t.domain_in_i.clone();
            domain.extend(g.base_domain().iter().copied());
            out.add_triple(t.i, t.j, t.k, domain)?;
        }
        Ok(out)
    }

    /// Build the associated bundle for a right action of the structure
    /// group on a fibre chart: E_ij(x, f) = (t_ij(x), f . psi_ij(x)).
    pub fn associated_total_space(&self, action: &GroupAction) -> Result<Atlas> {
        if !action.group().chart().same_context(self.group.chart()) {
            return Err(self.group.chart().context_error(action.group().chart()));
        }
        let fibre = action.fibre();
        let charts = self
            .atlas
            .charts
            .iter()
            .map(|u| product_with_fibre(u, fibre, "_fib"))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Atlas::new(charts.clone())?;
        for (&(i, j), ov) in &self.atlas.overlaps {
            let u_i = &self.atlas.charts[i];
            let u_j = &self.atlas.charts[j];
            let proj_u = projection(&charts[i], u_i, 0, 0)?;
            let base_part = ov.transition.compose(&proj_u)?;
            let f_pt = projection(&charts[i], fibre, u_i.base_count(), u_i.formal_count())?;
            let psi_pulled = self.cocycle[&(i, j)].compose(&proj_u)?;
            let fibre_part = action.apply(&f_pt, &psi_pulled)?;
            let images = splice_images(&base_part, &fibre_part, u_j, fibre);
            let t = Morphism::new(&charts[i], &charts[j], images)?;
            let mut domain = ov.domain_in_i.clone();
            domain.extend(fibre.base_domain().iter().copied());
            out.add_overlap(i, j, domain, t)?;
            out.restrict_checked_range(i, j, u_j.base_count());
        }
        for t in &self.atlas.triples {
            let mut domain = t.domain_in_i.clone();
            domain.extend(fibre.base_domain().iter().copied());
            out.add_triple(t.i, t.j, t.k, domain)?;
        }
        Ok(out)
    }

    /// Check a family of local sections (one Lambda-point s_i per chart)
    /// for compatibility: s_j ∘ t_ij = s_i * psi_ij on every overlap. A
    /// compatible family is a global section and exhibits the cocycle as a
    /// coboundary, so the bundle is trivial; the sections themselves are
    /// the trivializing gauge. The first incompatible overlap aborts with
    /// an error naming the chart pair.
    pub fn trivialize_from_sections(
        &self,
        sections: &[Morphism],
        opts: &EqOptions,
    ) -> Result<Report> {
        if sections.len() != self.atlas.charts.len() {
            return Err(Error::DimensionMismatch {
                expected: self.atlas.charts.len(),
                found: sections.len(),
            });
        }
        for (idx, s) in sections.iter().enumerate() {
            if !s.source().same_context(&self.atlas.charts[idx]) {
                return Err(self.atlas.charts[idx].context_error(s.source()));
            }
            if !s.target().same_context(self.group.chart()) {
                return Err(self.group.chart().context_error(s.target()));
            }
        }
        let mut report = Report::new();
        let order = self.atlas.charts[0].truncation();
        for (&(i, j), ov) in &self.atlas.overlaps {
            let lhs = sections[j].compose(&ov.transition)?;
            let rhs = self.group.multiply(&sections[i], &self.cocycle[&(i, j)])?;
            let ok = match lhs.exact_eq(&rhs) {
                Some(v) => v,
                None => lhs.eq_up_to(&rhs, order, Some(&ov.domain_in_i), opts)?,
            };
            if !ok {
                return Err(Error::IncompatibleSection {
                    pair: (
                        self.atlas.charts[i].name().to_string(),
                        self.atlas.charts[j].name().to_string(),
                    ),
                    detail: "s_j ∘ t_ij differs from s_i * psi_ij on the overlap".into(),
                });
            }
            report.push(
                "section-compatibility",
                self.atlas.pair_label(i, j),
                true,
                format!("s_j ∘ t_ij = s_i * psi_ij to order {order}"),
            );
        }
        report.push(
            "trivialization",
            "global",
            true,
            "compatible global section found: the cocycle is a coboundary and the bundle is trivial",
        );
        Ok(report)
    }
}

/// The coboundary cocycle psi_ij = chi_i * (chi_j ∘ t_ij)^{-1} of a gauge
/// family chi_i (one group point per chart). Always satisfies the cocycle
/// identities; useful both as a consistency oracle and to build trivial
/// bundles in explicitly twisted presentations.
pub fn coboundary_cocycle(
    atlas: &Atlas,
    group: &GroupLaw,
    chi: &[Morphism],
) -> Result<BTreeMap<(usize, usize), Morphism>> {
    if chi.len() != atlas.charts().len() {
        return Err(Error::DimensionMismatch {
            expected: atlas.charts().len(),
            found: chi.len(),
        });
    }
    let mut out = BTreeMap::new();
    for (&(i, j), ov) in &atlas.overlaps {
        let pulled = chi[j].compose(&ov.transition)?;
        let psi = group.multiply(&chi[i], &group.invert_point(&pulled)?)?;
        out.insert((i, j), psi);
    }
    Ok(out)
}

/// A vector bundle over an atlas: homogeneous fibre coordinate degrees and
/// one transition matrix per overlap, over the overlap's source chart, with
/// row and column degrees equal to the fibre degrees.
#[derive(Debug, Clone)]
pub struct VectorBundle {
    atlas: Atlas,
    fibre_degrees: Vec<Degree>,
    trans: BTreeMap<(usize, usize), GradedMatrix>,
}

impl VectorBundle {
    pub fn new(
        atlas: Atlas,
        fibre_degrees: Vec<Degree>,
        trans: BTreeMap<(usize, usize), GradedMatrix>,
    ) -> Result<VectorBundle> {
        for (&(i, j), m) in &trans {
            if atlas.overlap(i, j).is_none() {
                return Err(Error::InvalidInput(format!(
                    "transition matrix ({i}, {j}) has no matching overlap"
                )));
            }
            if !m.chart().same_context(&atlas.charts[i]) {
                return Err(atlas.charts[i].context_error(m.chart()));
            }
            if m.row_degrees() != fibre_degrees.as_slice()
                || m.col_degrees() != fibre_degrees.as_slice()
            {
                return Err(Error::Degree(format!(
                    "transition matrix ({i}, {j}) does not carry the fibre degrees"
                )));
            }
        }
        for &(i, j) in atlas.overlaps.keys() {
            if !trans.contains_key(&(i, j)) {
                return Err(Error::InvalidInput(format!(
                    "overlap ({i}, {j}) has no transition matrix"
                )));
            }
        }
        Ok(VectorBundle { atlas, fibre_degrees, trans })
    }

    pub fn atlas(&self) -> &Atlas {
        &self.atlas
    }

    pub fn fibre_degrees(&self) -> &[Degree] {
        &self.fibre_degrees
    }

    pub fn matrix(&self, i: usize, j: usize) -> Option<&GradedMatrix> {
        self.trans.get(&(i, j))
    }

    /// Verify the vector bundle data: entry degrees, invertibility of the
    /// degree-0 body on each overlap, the pair identity
    /// M_ij * t_ij^*(M_ji) = 1, and the triple identity
    /// M_ij * t_ij^*(M_jk) = M_ik.
    pub fn validate(&self, opts: &EqOptions) -> Result<Report> {
        let mut report = self.atlas.check_cocycle(opts)?;
        let order = self.atlas.charts[0].truncation();
        for (&(i, j), m) in &self.trans {
            let label = self.atlas.pair_label(i, j);
            let ov = self.atlas.overlap(i, j).expect("validated");
            let ok = m.check_degrees().is_ok();
            report.push(
                "fibre-degrees",
                &label,
                ok,
                if ok { "all entries homogeneous of block degree" } else { "entry degree violation" },
            );
            let ok = m.body_invertible_on(&ov.domain_in_i, opts)?;
            report.push(
                "fibre-body-invertible",
                &label,
                ok,
                if ok { "degree-0 block invertible on the overlap" } else { "degree-0 block is singular" },
            );
            let Some(rev) = self.trans.get(&(j, i)) else {
                report.push("fibre-pair", &label, false, "reverse matrix missing");
                continue;
            };
            let prod = m.mul(&rev.pullback(&ov.transition)?)?;
            let ok = match prod.is_identity_exact() {
                Some(v) => v,
                None => {
                    let id = GradedMatrix::identity(
                        &self.atlas.charts[i],
                        self.fibre_degrees.clone(),
                    )?;
                    prod.eq_up_to(&id, order, Some(&ov.domain_in_i), opts)?
                }
            };
            report.push(
                "fibre-pair",
                &label,
                ok,
                if ok {
                    format!("M_ij t_ij*(M_ji) = 1 to order {order}")
                } else {
                    "pair product differs from the identity".into()
                },
            );
        }
        for t in &self.atlas.triples {
            let label = format!(
                "({}, {}, {})",
                self.atlas.charts[t.i].name(),
                self.atlas.charts[t.j].name(),
                self.atlas.charts[t.k].name()
            );
            let (Some(mij), Some(mjk), Some(mik), Some(tij)) = (
                self.trans.get(&(t.i, t.j)),
                self.trans.get(&(t.j, t.k)),
                self.trans.get(&(t.i, t.k)),
                self.atlas.transition(t.i, t.j),
            ) else {
                report.push("fibre-triple", &label, false, "required data missing");
                continue;
            };
            let prod = mij.mul(&mjk.pullback(tij)?)?;
            let ok = match prod.exact_eq(mik) {
                Some(v) => v,
                None => prod.eq_up_to(mik, order, Some(&t.domain_in_i), opts)?,
            };
            report.push(
                "fibre-triple",
                &label,
                ok,
                if ok {
                    format!("M_ij t_ij*(M_jk) = M_ik to order {order}")
                } else {
                    "matrix cocycle fails on the triple".into()
                },
            );
        }
        Ok(report)
    }
}

/// The tangent chart TU: every coordinate u of U gains a partner u_dot of
/// the same degree; dotted degree-0 coordinates are real fibre directions.
pub fn tangent_chart(u: &ChartRef) -> Result<ChartRef> {
    let mut base: Vec<(String, (f64, f64))> = u
        .base_names()
        .iter()
        .zip(u.base_domain())
        .map(|(n, d)| (n.clone(), *d))
        .collect();
    for n in u.base_names() {
        base.push((format!("{n}_dot"), (-1.0, 1.0)));
    }
    let mut formal: Vec<FormalVariable> = u.formal_vars().to_vec();
    for v in u.formal_vars() {
        formal.push(FormalVariable { name: format!("{}_dot", v.name), degree: v.degree.clone() });
    }
    Chart::new(format!("T{}", u.name()), u.n(), u.truncation(), base, formal)
}

/// The dotted partner of coordinate `a` (in coordinate order of U) as a
/// series over TU.
fn dotted_coord(tu: &ChartRef, u: &ChartRef, a: usize) -> Series {
    let id = if a < u.base_count() {
        CoordId::Base(u.base_count() + a)
    } else {
        CoordId::Formal(u.formal_count() + (a - u.base_count()))
    };
    Series::coord(tu, id)
}

/// The tangent bundle of an atlas: total-space charts TU_i glued by the
/// base transition together with y_dot^B = sum_A x_dot^A X[A][B], where
/// X = (layout-swapped) Jacobian of the transition — dotted coordinates
/// multiply from the left. The same matrices, read as a matrix cocycle,
/// present the tangent bundle as a vector bundle.
pub struct TangentBundle {
    pub total: Atlas,
    pub vector: VectorBundle,
}

pub fn tangent_bundle(atlas: &Atlas) -> Result<TangentBundle> {
    let tcharts = atlas
        .charts()
        .iter()
        .map(tangent_chart)
        .collect::<Result<Vec<_>>>()?;
    let mut total = Atlas::new(tcharts.clone())?;
    let mut trans = BTreeMap::new();
    for (&(i, j), ov) in &atlas.overlaps {
        let u_i = &atlas.charts[i];
        let u_j = &atlas.charts[j];
        let x = ov.transition.jacobian()?.layout_swapped();
        trans.insert((i, j), x.clone());

        let tu_i = &tcharts[i];
        let proj = projection(tu_i, u_i, 0, 0)?;
        let base_part = ov.transition.compose(&proj)?;
        let rows = u_i.coord_count();
        let cols = u_j.coord_count();
        let mut dot_images = Vec::with_capacity(cols);
        for b in 0..cols {
            let mut sum = Series::zero(tu_i);
            for a in 0..rows {
                let entry = proj.apply_pullback(&x.entries()[a][b])?;
                if entry.is_structural_zero() {
                    continue;
                }
                sum = sum.add(&dotted_coord(tu_i, u_i, a).mul(&entry)?)?;
            }
            dot_images.push(sum);
        }
        let mut images: Vec<Series> = Vec::new();
        images.extend_from_slice(&base_part.images()[..u_j.base_count()]);
        images.extend(dot_images[..u_j.base_count()].iter().cloned());
        images.extend_from_slice(&base_part.images()[u_j.base_count()..]);
        images.extend(dot_images[u_j.base_count()..].iter().cloned());
        let t = Morphism::new(tu_i, &tcharts[j], images)?;
        let mut domain = ov.domain_in_i.clone();
        domain.extend(std::iter::repeat_n((-1.0, 1.0), u_i.base_count()));
        total.add_overlap(i, j, domain, t)?;
        total.restrict_checked_range(i, j, u_j.base_count());
    }
    for t in &atlas.triples {
        let mut domain = t.domain_in_i.clone();
        domain.extend(std::iter::repeat_n((-1.0, 1.0), atlas.charts[t.i].base_count()));
        total.add_triple(t.i, t.j, t.k, domain)?;
    }
    let fibre_degrees: Vec<Degree> = atlas.charts[0]
        .coord_ids()
        .map(|id| atlas.charts[0].coord_degree(id))
        .collect();
    let vector = VectorBundle::new(atlas.clone(), fibre_degrees, trans)?;
    Ok(TangentBundle { total, vector })
}

/// The frame bundle of a vector bundle: the structure group is the general
/// linear group on the fibre degrees brought into canonical order, and the
/// cocycle is the (permuted) transition matrix read as a group point.
pub fn frame_bundle(vb: &VectorBundle) -> Result<PrincipalBundle> {
    let charts = vb.atlas().charts();
    let n = charts[0].n();
    let truncation = charts[0].truncation();
    let canon = enumerate_degrees(n)?;
    let mut counts = vec![0usize; canon.len()];
    for d in vb.fibre_degrees() {
        let k = canon
            .iter()
            .position(|c| c == d)
            .ok_or_else(|| Error::Degree(format!("fibre degree {d} is not enumerable")))?;
        counts[k] += 1;
    }
    // Stable sort of fibre indices by canonical degree position: order[p]
    // is the original fibre index sitting at canonical slot p.
    let mut order: Vec<usize> = (0..vb.fibre_degrees().len()).collect();
    order.sort_by_key(|&a| {
        canon.iter().position(|c| *c == vb.fibre_degrees()[a]).expect("checked")
    });
    let gl = crate::group::builtin_gl(n, truncation, counts[0], &counts[1..])?;
    let shape = gl.matrix_shape().expect("gl is a matrix group").to_vec();

    let mut cocycle = BTreeMap::new();
    for (&(i, j), m) in &vb.trans {
        let entries: Vec<Vec<Series>> = order
            .iter()
            .map(|&a| order.iter().map(|&b| m.entries()[a][b].clone()).collect())
            .collect();
        let permuted =
            GradedMatrix::new(&charts[i], shape.clone(), shape.clone(), entries)?;
        cocycle.insert((i, j), gl.matrix_to_point(&charts[i], &permuted)?);
    }
    PrincipalBundle::new(vb.atlas().clone(), gl, cocycle)
}

/// Check that a product-chart transition is fibre-linear: under the Euler
/// derivation of the source fibre coordinates, fibre images have weight
/// exactly 1 and base images weight 0. `src_fibre` and `tgt_fibre` list
/// the fibre coordinates of the source and target charts.
pub fn fibre_weight_check(
    m: &Morphism,
    src_fibre: &[CoordId],
    tgt_fibre: &[CoordId],
    opts: &EqOptions,
) -> Result<bool> {
    let components: Vec<Series> = m
        .source()
        .coord_ids()
        .map(|id| {
            if src_fibre.contains(&id) {
                Series::coord(m.source(), id)
            } else {
                Series::zero(m.source())
            }
        })
        .collect();
    let euler = Derivation::new(m.source(), components)?;
    let order = m.source().truncation();
    for id in m.target().coord_ids() {
        let f = m.image(id);
        let ef = euler.apply(f)?;
        let expected =
            if tgt_fibre.contains(&id) { f.clone() } else { Series::zero(m.source()) };
        let ok = match ef.exact_eq(&expected) {
            Some(v) => v,
            None => ef.eq_up_to(&expected, order, None, opts)?,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The fibre coordinate ids of a tangent chart TU (the dotted block).
pub fn tangent_fibre_ids(u: &ChartRef) -> Vec<CoordId> {
    let mut ids = Vec::new();
    for a in 0..u.base_count() {
        ids.push(CoordId::Base(u.base_count() + a));
    }
    for f in 0..u.formal_count() {
        ids.push(CoordId::Formal(u.formal_count() + f));
    }
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, rat_int};
    use crate::group::{action_chart, builtin_susy_z22, GroupAction};
    use crate::series::Monomial;

    fn opts() -> EqOptions {
        EqOptions::default()
    }

    fn deg(bits: &[u8]) -> Degree {
        Degree::new(bits.to_vec()).unwrap()
    }

    /// A chart with one even coordinate and the standard three formal
    /// generators z (1,1), eta (0,1), chi (1,0), named per chart.
    fn chart(name: &str, base: &str, formal: [&str; 3], lo: f64, hi: f64) -> ChartRef {
        Chart::new(
            name,
            2,
            6,
            vec![(base.into(), (lo, hi))],
            vec![
                FormalVariable { name: formal[0].into(), degree: deg(&[1, 1]) },
                FormalVariable { name: formal[1].into(), degree: deg(&[0, 1]) },
                FormalVariable { name: formal[2].into(), degree: deg(&[1, 0]) },
            ],
        )
        .unwrap()
    }

    fn coord(c: &ChartRef, name: &str) -> Series {
        Series::coord(c, c.lookup(name).unwrap())
    }

    /// A three-chart atlas over overlapping intervals, glued by unit
    /// shifts on the base and the identity on the formal block.
    fn shift_atlas() -> Atlas {
        let u1 = chart("U1", "x", ["z", "eta", "chi"], -2.0, 2.0);
        let u2 = chart("U2", "y", ["w", "mu", "nu"], -1.0, 3.0);
        let u3 = chart("U3", "v", ["s", "al", "be"], 0.0, 4.0);
        let mut atlas = Atlas::new(vec![u1.clone(), u2.clone(), u3.clone()]).unwrap();
        let shift = |a: &ChartRef, b: &ChartRef, names_a: [&str; 4], c: i64| {
            let images = vec![
                coord(a, names_a[0]).add(&Series::constant(a, rat_int(c))).unwrap(),
                coord(a, names_a[1]),
                coord(a, names_a[2]),
                coord(a, names_a[3]),
            ];
            Morphism::new(a, b, images).unwrap()
        };
        // y = x + 1, v = x + 2 (and inverses); formal coordinates map
        // identically across charts.
        atlas
            .add_overlap(0, 1, vec![(0.0, 2.0)], shift(&u1, &u2, ["x", "z", "eta", "chi"], 1))
            .unwrap();
        atlas
            .add_overlap(1, 0, vec![(1.0, 3.0)], shift(&u2, &u1, ["y", "w", "mu", "nu"], -1))
            .unwrap();
        atlas
            .add_overlap(1, 2, vec![(1.0, 3.0)], shift(&u2, &u3, ["y", "w", "mu", "nu"], 1))
            .unwrap();
        atlas
            .add_overlap(2, 1, vec![(2.0, 4.0)], shift(&u3, &u2, ["v", "s", "al", "be"], -1))
            .unwrap();
        atlas
            .add_overlap(0, 2, vec![(1.0, 2.0)], shift(&u1, &u3, ["x", "z", "eta", "chi"], 2))
            .unwrap();
        atlas
            .add_overlap(2, 0, vec![(3.0, 4.0)], shift(&u3, &u1, ["v", "s", "al", "be"], -2))
            .unwrap();
        atlas.add_triple(0, 1, 2, vec![(1.0, 2.0)]).unwrap();
        atlas
    }

    #[test]
    fn shift_atlas_cocycle_passes() {
        let report = shift_atlas().check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "shift atlas failed:\n{report}");
        // 6 pair + 6 range + 1 triple checks.
        assert_eq!(report.len(), 13);
    }

    #[test]
    fn wrong_inverse_transition_fails_the_pair_check() {
        let mut atlas = shift_atlas();
        let u1 = atlas.charts()[0].clone();
        let u2 = atlas.charts()[1].clone();
        // Deliberately wrong: x = y (instead of y - 1).
        let bad = Morphism::new(
            &u2,
            &u1,
            vec![coord(&u2, "y"), coord(&u2, "w"), coord(&u2, "mu"), coord(&u2, "nu")],
        )
        .unwrap();
        atlas.add_overlap(1, 0, vec![(1.0, 3.0)], bad).unwrap();
        let report = atlas.check_cocycle(&opts()).unwrap();
        assert!(!report.passed());
        let failing: Vec<&str> =
            report.failures().map(|c| c.name.as_str()).collect();
        assert!(failing.contains(&"pair-cocycle"));
    }

    /// A gauge family for the susy group over the shift atlas, with
    /// genuinely chart-dependent bodies and formal parts.
    fn susy_gauge(atlas: &Atlas, group: &GroupLaw) -> Vec<Morphism> {
        let mk = |u: &ChartRef, base: &str, f: [&str; 3], scale: i64| {
            let x = coord(u, base);
            let images = vec![
                // t-image: degree (0,0).
                x.mul(&Series::constant(u, rat(scale, 2))).unwrap(),
                // z-image: degree (1,1).
                coord(u, f[0]).scale(&rat_int(scale)),
                // th1-image: degree (0,1).
                coord(u, f[1]).mul(&x).unwrap(),
                // th2-image: degree (1,0).
                coord(u, f[2]).scale(&rat(1, 3)),
            ];
            Morphism::new(u, group.chart(), images).unwrap()
        };
        vec![
            mk(&atlas.charts()[0], "x", ["z", "eta", "chi"], 1),
            mk(&atlas.charts()[1], "y", ["w", "mu", "nu"], 2),
            mk(&atlas.charts()[2], "v", ["s", "al", "be"], 3),
        ]
    }

    #[test]
    fn coboundary_principal_cocycle_passes_and_glues() {
        let atlas = shift_atlas();
        let group = builtin_susy_z22(6).unwrap();
        let chi = susy_gauge(&atlas, &group);
        let cocycle = coboundary_cocycle(&atlas, &group, &chi).unwrap();
        let bundle = PrincipalBundle::new(atlas, group, cocycle).unwrap();
        let report = bundle.check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "coboundary cocycle failed:\n{report}");

        // The glued total space is itself an atlas with a valid cocycle.
        let total = bundle.glue_total_space().unwrap();
        let report = total.check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "glued total space failed:\n{report}");

        // Its transitions are fibre-linear of weight one... not in general
        // for a group fibre (the action is affine in the odd directions),
        // so instead check the base block is fibre-independent: the glued
        // transition restricted to base coordinates has fibre weight 0.
        let tij = total.transition(0, 1).unwrap();
        let src_fibre: Vec<CoordId> = {
            let u = &bundle.atlas().charts()[0];
            let g = bundle.group().chart();
            let mut ids = Vec::new();
            for a in 0..g.base_count() {
                ids.push(CoordId::Base(u.base_count() + a));
            }
            for f in 0..g.formal_count() {
                ids.push(CoordId::Formal(u.formal_count() + f));
            }
            ids
        };
        let euler_src = src_fibre.clone();
        let comps: Vec<Series> = tij
            .source()
            .coord_ids()
            .map(|id| {
                if euler_src.contains(&id) {
                    Series::coord(tij.source(), id)
                } else {
                    Series::zero(tij.source())
                }
            })
            .collect();
        let e = Derivation::new(tij.source(), comps).unwrap();
        // Base image of U2's y coordinate: no fibre dependence.
        let f = tij.image(CoordId::Base(0));
        assert_eq!(
            e.apply(f).unwrap().exact_eq(&Series::zero(tij.source())),
            Some(true)
        );
    }

    #[test]
    fn perturbed_cocycle_fails_the_pair_check() {
        let atlas = shift_atlas();
        let group = builtin_susy_z22(6).unwrap();
        let chi = susy_gauge(&atlas, &group);
        let mut cocycle = coboundary_cocycle(&atlas, &group, &chi).unwrap();
        // Perturb psi_01 by a formal term in its z-image.
        let u1 = atlas.charts()[0].clone();
        let psi = cocycle.get_mut(&(0, 1)).unwrap();
        let mut images = psi.images().to_vec();
        images[1] = images[1].add(&coord(&u1, "z")).unwrap();
        *psi = Morphism::new(&u1, group.chart(), images).unwrap();
        let bundle = PrincipalBundle::new(atlas, group, cocycle).unwrap();
        let report = bundle.check_cocycle(&opts()).unwrap();
        assert!(!report.passed());
        let failing: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(failing.contains(&"bundle-pair"), "failures: {failing:?}");
        assert!(failing.contains(&"bundle-triple"), "failures: {failing:?}");
    }

    #[test]
    fn perturbed_body_fails_the_reduced_check() {
        let atlas = shift_atlas();
        let group = builtin_susy_z22(6).unwrap();
        let chi = susy_gauge(&atlas, &group);
        let mut cocycle = coboundary_cocycle(&atlas, &group, &chi).unwrap();
        // Shift the t-image body of psi_01 by a constant.
        let u1 = atlas.charts()[0].clone();
        let psi = cocycle.get_mut(&(0, 1)).unwrap();
        let mut images = psi.images().to_vec();
        images[0] = images[0].add(&Series::constant(&u1, rat_int(1))).unwrap();
        *psi = Morphism::new(&u1, group.chart(), images).unwrap();
        let bundle = PrincipalBundle::new(atlas, group, cocycle).unwrap();
        let report = bundle.check_cocycle(&opts()).unwrap();
        let failing: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(failing.contains(&"reduced-pair"), "failures: {failing:?}");
    }

    #[test]
    fn compatible_sections_trivialize_and_incompatible_ones_are_named() {
        let atlas = shift_atlas();
        let group = builtin_susy_z22(6).unwrap();
        let chi = susy_gauge(&atlas, &group);
        let cocycle = coboundary_cocycle(&atlas, &group, &chi).unwrap();
        let bundle =
            PrincipalBundle::new(atlas.clone(), group.clone(), cocycle).unwrap();

        // s_i := chi_i^{-1} satisfies s_j ∘ t_ij = s_i * psi_ij.
        let sections: Vec<Morphism> =
            chi.iter().map(|c| group.invert_point(c).unwrap()).collect();
        let report = bundle.trivialize_from_sections(&sections, &opts()).unwrap();
        assert!(report.passed(), "sections failed:\n{report}");

        // Breaking one section must name the offending overlap.
        let mut broken = sections.clone();
        let u2 = atlas.charts()[1].clone();
        let mut images = broken[1].images().to_vec();
        images[0] = images[0].add(&Series::constant(&u2, rat_int(1))).unwrap();
        broken[1] = Morphism::new(&u2, group.chart(), images).unwrap();
        match bundle.trivialize_from_sections(&broken, &opts()) {
            Err(Error::IncompatibleSection { pair, .. }) => {
                assert!(pair.0.starts_with('U') && pair.1.starts_with('U'));
                assert_ne!(pair.0, pair.1);
            }
            other => panic!("expected IncompatibleSection, got {other:?}"),
        }
    }

    #[test]
    fn associated_bundle_glues_with_a_lawful_action() {
        let atlas = shift_atlas();
        let group = builtin_susy_z22(6).unwrap();
        let chi = susy_gauge(&atlas, &group);
        let cocycle = coboundary_cocycle(&atlas, &group, &chi).unwrap();
        let bundle =
            PrincipalBundle::new(atlas, group.clone(), cocycle).unwrap();

        // Right translation of the group on itself as the fibre action.
        let fibre = group.chart().clone();
        let fg = action_chart(&fibre, &group).unwrap();
        let images = {
            let v = |name: &str| Series::coord(&fg, fg.lookup(name).unwrap());
            vec![
                v("t").add(&v("t'"))
                    .unwrap()
                    .add(&v("th1").mul(&v("th1'")).unwrap())
                    .unwrap()
                    .add(&v("th2").mul(&v("th2'")).unwrap())
                    .unwrap(),
                v("z").add(&v("z'"))
                    .unwrap()
                    .add(&v("th1").mul(&v("th2'")).unwrap())
                    .unwrap()
                    .sub(&v("th2").mul(&v("th1'")).unwrap())
                    .unwrap(),
                v("th1").add(&v("th1'")).unwrap(),
                v("th2").add(&v("th2'")).unwrap(),
            ]
        };
        let act = Morphism::new(&fg, &fibre, images).unwrap();
        let action = GroupAction::new(group, &fibre, act).unwrap();
        assert!(action.check_axioms(&opts()).unwrap().passed());

        let total = bundle.associated_total_space(&action).unwrap();
        let report = total.check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "associated total space failed:\n{report}");
    }

    /// Two-chart atlas with a genuinely graded transition, for the tangent
    /// construction: y = 2x + z*eta*chi, w = z + eta*chi, mu = eta - 3x z chi,
    /// nu = chi; the reverse chart map is the exact Newton inverse.
    fn graded_atlas() -> Atlas {
        let u1 = chart("U1", "x", ["z", "eta", "chi"], -2.0, 2.0);
        let u2 = chart("U2", "y", ["w", "mu", "nu"], -5.0, 5.0);
        let x = coord(&u1, "x");
        let z = coord(&u1, "z");
        let eta = coord(&u1, "eta");
        let chi = coord(&u1, "chi");
        let zec = z.mul(&eta).unwrap().mul(&chi).unwrap();
        let images = vec![
            x.scale(&rat_int(2)).add(&zec).unwrap(),
            z.add(&eta.mul(&chi).unwrap()).unwrap(),
            eta.sub(&x.mul(&z).unwrap().mul(&chi).unwrap().scale(&rat_int(3))).unwrap(),
            chi.clone(),
        ];
        let t12 = Morphism::new(&u1, &u2, images).unwrap();
        let t21 = t12.invert().unwrap();
        let mut atlas = Atlas::new(vec![u1, u2]).unwrap();
        atlas.add_overlap(0, 1, vec![(-1.0, 1.0)], t12).unwrap();
        atlas.add_overlap(1, 0, vec![(-2.0, 2.0)], t21).unwrap();
        atlas
    }

    #[test]
    fn tangent_bundle_cocycle_and_vector_presentation_pass() {
        let atlas = graded_atlas();
        assert!(atlas.check_cocycle(&opts()).unwrap().passed());
        let tb = tangent_bundle(&atlas).unwrap();
        let report = tb.total.check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "tangent total space failed:\n{report}");
        let report = tb.vector.validate(&opts()).unwrap();
        assert!(report.passed(), "tangent vector bundle failed:\n{report}");
    }

    #[test]
    fn tangent_transition_has_the_hand_computed_dotted_image() {
        let atlas = graded_atlas();
        let tb = tangent_bundle(&atlas).unwrap();
        let t = tb.total.transition(0, 1).unwrap();
        let tu1 = t.source().clone();
        let v = |name: &str| Series::coord(&tu1, tu1.lookup(name).unwrap());
        // y = 2x + z eta chi gives
        //   y_dot = 2 x_dot + x_dot*0 ... plus graded partials:
        //   d_z(z eta chi) = eta chi, d_eta(z eta chi) = -z chi,
        //   d_chi(z eta chi) = -z eta   (left partials), so
        //   y_dot = 2 x_dot + z_dot eta chi - eta_dot z chi - chi_dot z eta.
        let expected = v("x_dot")
            .scale(&rat_int(2))
            .add(&v("z_dot").mul(&v("eta")).unwrap().mul(&v("chi")).unwrap())
            .unwrap()
            .sub(&v("eta_dot").mul(&v("z")).unwrap().mul(&v("chi")).unwrap())
            .unwrap()
            .sub(&v("chi_dot").mul(&v("z")).unwrap().mul(&v("eta")).unwrap())
            .unwrap();
        // y_dot is the second degree-0 coordinate of TU2.
        let got = t.image(CoordId::Base(1));
        assert_eq!(got.exact_eq(&expected), Some(true), "got {got}, expected {expected}");
    }

    #[test]
    fn tangent_transitions_are_fibre_linear() {
        let atlas = graded_atlas();
        let tb = tangent_bundle(&atlas).unwrap();
        let t = tb.total.transition(0, 1).unwrap();
        let src = tangent_fibre_ids(&atlas.charts()[0]);
        let tgt = tangent_fibre_ids(&atlas.charts()[1]);
        assert!(fibre_weight_check(t, &src, &tgt, &opts()).unwrap());

        // Destroying linearity must be caught: square a dotted image.
        let tu1 = t.source().clone();
        let tu2 = t.target().clone();
        let mut images = t.images().to_vec();
        let xdot = Series::coord(&tu1, CoordId::Base(1));
        images[1] = images[1].add(&xdot.mul(&xdot).unwrap()).unwrap();
        let bad = Morphism::new(&tu1, &tu2, images).unwrap();
        assert!(!fibre_weight_check(&bad, &src, &tgt, &opts()).unwrap());
    }

    #[test]
    fn perturbed_vector_bundle_fails_validation() {
        let atlas = graded_atlas();
        let tb = tangent_bundle(&atlas).unwrap();
        let m01 = tb.vector.matrix(0, 1).unwrap().clone();
        let m10 = tb.vector.matrix(1, 0).unwrap().clone();
        // Scale one entry of M_01: the pair identity must now fail.
        let u1 = atlas.charts()[0].clone();
        let mut entries = m01.entries().to_vec();
        entries[0][0] = entries[0][0].scale(&rat_int(2));
        let bad = GradedMatrix::new(
            &u1,
            m01.row_degrees().to_vec(),
            m01.col_degrees().to_vec(),
            entries,
        )
        .unwrap();
        let mut trans = BTreeMap::new();
        trans.insert((0usize, 1usize), bad);
        trans.insert((1usize, 0usize), m10);
        let vb =
            VectorBundle::new(atlas, tb.vector.fibre_degrees().to_vec(), trans).unwrap();
        let report = vb.validate(&opts()).unwrap();
        assert!(!report.passed());
        let failing: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(failing.contains(&"fibre-pair"), "failures: {failing:?}");
    }

    #[test]
    fn frame_bundle_of_the_tangent_bundle_passes() {
        let atlas = graded_atlas();
        let tb = tangent_bundle(&atlas).unwrap();
        let fb = frame_bundle(&tb.vector).unwrap();
        // Fibre degrees (0,0), (1,1), (0,1), (1,0) are already canonical,
        // so the structure group is GL(1|1,1,1).
        assert_eq!(fb.group().chart().name(), "GL(1|1,1,1)");
        let report = fb.check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "frame bundle failed:\n{report}");
    }

    #[test]
    fn frame_bundle_permutes_non_canonical_fibre_order() {
        // A rank-2 bundle with fibre degrees listed out of canonical order:
        // [(0,1), (0,0)]. The frame group must still be GL(1|0,1,0) with the
        // permutation applied to the matrices.
        let u1 = chart("U1", "x", ["z", "eta", "chi"], -2.0, 2.0);
        let u2 = chart("U2", "y", ["w", "mu", "nu"], -2.0, 2.0);
        let ident = |a: &ChartRef, b: &ChartRef, names: [&str; 4]| {
            Morphism::new(
                a,
                b,
                vec![coord(a, names[0]), coord(a, names[1]), coord(a, names[2]), coord(a, names[3])],
            )
            .unwrap()
        };
        let mut atlas = Atlas::new(vec![u1.clone(), u2.clone()]).unwrap();
        atlas
            .add_overlap(0, 1, vec![(-1.0, 1.0)], ident(&u1, &u2, ["x", "z", "eta", "chi"]))
            .unwrap();
        atlas
            .add_overlap(1, 0, vec![(-1.0, 1.0)], ident(&u2, &u1, ["y", "w", "mu", "nu"]))
            .unwrap();
        let fdeg = vec![deg(&[0, 1]), deg(&[0, 0])];
        // M = [[2, eta], [0, 1]] in the listed order: entry (0,1) couples
        // the (0,1) row with the (0,0) column, so it must carry degree (0,1).
        let two = Series::constant(&u1, rat_int(2));
        let m01 = GradedMatrix::new(
            &u1,
            fdeg.clone(),
            fdeg.clone(),
            vec![
                vec![two.clone(), coord(&u1, "eta")],
                vec![Series::zero(&u1), Series::one(&u1)],
            ],
        )
        .unwrap();
        let m10 = GradedMatrix::new(
            &u2,
            fdeg.clone(),
            fdeg.clone(),
            vec![
                vec![
                    Series::constant(&u2, rat(1, 2)),
                    coord(&u2, "mu").scale(&rat(-1, 2)),
                ],
                vec![Series::zero(&u2), Series::one(&u2)],
            ],
        )
        .unwrap();
        let mut trans = BTreeMap::new();
        trans.insert((0usize, 1usize), m01);
        trans.insert((1usize, 0usize), m10);
        let vb = VectorBundle::new(atlas, fdeg, trans).unwrap();
        assert!(vb.validate(&opts()).unwrap().passed());
        let fb = frame_bundle(&vb).unwrap();
        assert_eq!(fb.group().chart().name(), "GL(1|0,1,0)");
        let report = fb.check_cocycle(&opts()).unwrap();
        assert!(report.passed(), "permuted frame bundle failed:\n{report}");
        // The permuted point puts the degree-0 entry (body 2) at slot (1,1):
        // canonical slot 0 is the (0,0) fibre index 1, slot 1 is index 0.
        let psi = fb.transition_point(0, 1).unwrap();
        let m = fb.group().point_to_matrix(psi).unwrap();
        assert_eq!(
            m.entries()[1][1]
                .coefficient_of(&Monomial::unit(3))
                .as_constant(),
            Some(rat_int(2))
        );
    }

    #[test]
    fn atlas_rejects_mismatched_charts() {
        let u1 = chart("U1", "x", ["z", "eta", "chi"], -2.0, 2.0);
        let odd = Chart::with_default_domain(
            "V",
            2,
            6,
            vec!["a".into(), "b".into()],
            vec![FormalVariable { name: "xi".into(), degree: deg(&[0, 1]) }],
        )
        .unwrap();
        assert!(Atlas::new(vec![u1, odd]).is_err());
    }
}
