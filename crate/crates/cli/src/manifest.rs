//! JSON manifests: the on-disk description of charts, atlases, group laws,
//! cocycles, vector bundles, actions, and sections. Loading parses every
//! expression in its chart context and validates all cross-references;
//! constructions (`glue`, `build-tangent`, `build-frame`) emit manifests in
//! the same format, so their output re-loads and re-validates.

use crate::expr::parse_expression;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use z2n_core::{
    action_chart, builtin_gl, builtin_susy_z22, Atlas, Chart, ChartRef, Degree, Error,
    FnRegistry, FormalVariable, GradedMatrix, GroupAction, GroupLaw, InverseRule, Morphism,
    PrincipalBundle, Rat, Result, VectorBundle,
};

pub const DEFAULT_TRUNCATION: usize = 6;

fn at(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{path}: {msg}"))
}

// ---------------------------------------------------------------------------
// Document layer: the JSON shape, kept bidirectional (Deserialize for
// loading, Serialize for emitting constructions).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub charts: Vec<ChartDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overlaps: Vec<OverlapDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triples: Vec<TripleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bundle_transitions: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector_bundle: Option<VectorBundleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub base: Vec<BaseVarDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formal: Vec<FormalVarDoc>,
}

fn default_interval() -> (f64, f64) {
    (-1.0, 1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseVarDoc {
    pub name: String,
    #[serde(default = "default_interval")]
    pub domain: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalVarDoc {
    pub name: String,
    pub degree: Vec<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapDoc {
    /// Source and target chart names: the transition maps points of
    /// `pair.0` into `pair.1`.
    pub pair: (String, String),
    /// Overlap box inside the source chart, keyed by degree-0 coordinate.
    pub domain: BTreeMap<String, (f64, f64)>,
    /// Image expression (over the source chart) per target coordinate.
    pub transition: BTreeMap<String, String>,
    /// How many leading degree-0 image coordinates must land inside the
    /// target chart's box at sampled points. Defaults to all of them;
    /// emitted total spaces restrict it to the base block.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checked_range: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleDoc {
    pub charts: (String, String, String),
    /// Triple-overlap box inside the first chart.
    pub domain: BTreeMap<String, (f64, f64)>,
}

/// A group law: either a builtin (`susy_z22`, or `gl` with ranks), or a
/// custom law given by a chart, multiplication expressions over the doubled
/// chart (second factor primed), unit values, and an inverse rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formal_ranks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mul: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unit: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseDoc {
    /// Explicit inverse: image expression per group coordinate.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morphism: BTreeMap<String, String>,
    /// Matrix-group inverse via the nilpotent Neumann series; `degrees`
    /// lists the block degrees D with entries g_i_j of degree D_i + D_j.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neumann: Option<NeumannDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannDoc {
    pub degrees: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorBundleDoc {
    pub fibre_degrees: Vec<Vec<u8>>,
    /// Transition matrices keyed by "Ui,Uj", row-major, entries as
    /// expressions over the source chart.
    pub transitions: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDoc {
    pub fibre: ChartDoc,
    /// Image expression per fibre coordinate, over the fibre x group
    /// product chart (group coordinates primed).
    pub law: BTreeMap<String, String>,
}

// ---------------------------------------------------------------------------
// Model layer: fully parsed and cross-validated core objects.
// ---------------------------------------------------------------------------

pub struct Model {
    pub doc: ManifestDoc,
    pub n: usize,
    pub truncation: usize,
    pub registry: FnRegistry,
    pub charts: Vec<ChartRef>,
    pub atlas: Option<Atlas>,
    pub group: Option<GroupLaw>,
    pub principal: Option<PrincipalBundle>,
    pub vector: Option<VectorBundle>,
    pub action: Option<GroupAction>,
    /// One section per atlas chart, aligned with the chart order.
    pub sections: Option<Vec<Morphism>>,
}

pub fn load_file(path: &Path, truncation_override: Option<usize>) -> Result<Model> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    load_str(&text, truncation_override)
}

pub fn load_str(text: &str, truncation_override: Option<usize>) -> Result<Model> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ManifestDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        Error::InvalidInput(format!("schema violation at {}: {}", e.path(), e.inner()))
    })?;
    build_model(doc, truncation_override)
}

fn build_chart(doc: &ChartDoc, n: usize, truncation: usize, path: &str) -> Result<ChartRef> {
    let base: Vec<(String, (f64, f64))> =
        doc.base.iter().map(|b| (b.name.clone(), b.domain)).collect();
    let mut formal = Vec::new();
    for (k, f) in doc.formal.iter().enumerate() {
        let degree = Degree::new(f.degree.clone())
            .map_err(|e| at(&format!("{path}.formal[{k}].degree"), e))?;
        if degree.n() != n {
            return Err(at(
                &format!("{path}.formal[{k}].degree"),
                format!("has {} bits, manifest declares n = {n}", degree.n()),
            ));
        }
        formal.push(FormalVariable { name: f.name.clone(), degree });
    }
    Chart::new(doc.name.clone(), n, truncation, base, formal).map_err(|e| at(path, e))
}

/// Build a morphism from a map of target-coordinate names to expressions
/// over the source chart. Every target coordinate needs an image; unknown
/// keys are rejected.
fn build_morphism(
    source: &ChartRef,
    target: &ChartRef,
    images: &BTreeMap<String, String>,
    registry: &FnRegistry,
    path: &str,
) -> Result<Morphism> {
    for key in images.keys() {
        if target.lookup(key).is_none() {
            return Err(at(
                &format!("{path}.{key}"),
                format!("'{key}' is not a coordinate of chart '{}'", target.name()),
            ));
        }
    }
    let mut series = Vec::with_capacity(target.coord_count());
    for id in target.coord_ids() {
        let name = target.coord_name(id);
        let text = images.get(name).ok_or_else(|| {
            at(path, format!("missing image for coordinate '{name}' of chart '{}'", target.name()))
        })?;
        series.push(
            parse_expression(text, source, registry)
                .map_err(|e| at(&format!("{path}.{name}"), e))?,
        );
    }
    Morphism::new(source, target, series).map_err(|e| at(path, e))
}

/// Resolve a box over the degree-0 coordinates of `chart` from a map keyed
/// by coordinate name.
fn build_box(
    chart: &ChartRef,
    domain: &BTreeMap<String, (f64, f64)>,
    path: &str,
) -> Result<Vec<(f64, f64)>> {
    for key in domain.keys() {
        match chart.lookup(key) {
            Some(z2n_core::CoordId::Base(_)) => {}
            _ => {
                return Err(at(
                    &format!("{path}.{key}"),
                    format!("'{key}' is not a degree-0 coordinate of chart '{}'", chart.name()),
                ))
            }
        }
    }
    let mut out = Vec::with_capacity(chart.base_count());
    for name in chart.base_names() {
        let iv = domain.get(name).ok_or_else(|| {
            at(path, format!("missing interval for coordinate '{name}' of chart '{}'", chart.name()))
        })?;
        out.push(*iv);
    }
    Ok(out)
}

fn parse_rat(text: &str, chart: &ChartRef, registry: &FnRegistry, path: &str) -> Result<Rat> {
    let s = parse_expression(text, chart, registry).map_err(|e| at(path, e))?;
    if !s.formal_part().is_structural_zero() {
        return Err(at(path, "expected a rational constant, found formal variables"));
    }
    s.coefficient_of(&z2n_core::Monomial::unit(chart.formal_count()))
        .as_constant()
        .ok_or_else(|| at(path, "expected a rational constant"))
}

fn build_group(
    doc: &GroupDoc,
    n: usize,
    truncation: usize,
    registry: &FnRegistry,
) -> Result<GroupLaw> {
    match doc.builtin.as_deref() {
        Some("susy_z22") => {
            if n != 2 {
                return Err(at("group.builtin", "susy_z22 requires n = 2"));
            }
            builtin_susy_z22(truncation)
        }
        Some("gl") => {
            let r = doc
                .base_rank
                .ok_or_else(|| at("group", "builtin 'gl' requires 'base_rank'"))?;
            builtin_gl(n, truncation, r, &doc.formal_ranks).map_err(|e| at("group", e))
        }
        Some(other) => Err(at(
            "group.builtin",
            format!("unknown builtin '{other}' (available: susy_z22, gl)"),
        )),
        None => {
            let chart_doc = doc
                .chart
                .as_ref()
                .ok_or_else(|| at("group", "custom group laws need a 'chart'"))?;
            let chart = build_chart(chart_doc, n, truncation, "group.chart")?;
            let doubled = chart.doubled().map_err(|e| at("group.chart", e))?;
            let mul = build_morphism(&doubled, &chart, &doc.mul, registry, "group.mul")?;
            let mut unit = Vec::with_capacity(chart.base_count());
            for name in chart.base_names() {
                let text = doc.unit.get(name).ok_or_else(|| {
                    at("group.unit", format!("missing unit value for coordinate '{name}'"))
                })?;
                unit.push(parse_rat(text, &chart, registry, &format!("group.unit.{name}"))?);
            }
            let inv_doc = doc
                .inverse
                .as_ref()
                .ok_or_else(|| at("group", "custom group laws need an 'inverse'"))?;
            let inverse = match &inv_doc.neumann {
                Some(nd) => {
                    let mut degrees = Vec::with_capacity(nd.degrees.len());
                    for (k, bits) in nd.degrees.iter().enumerate() {
                        degrees.push(
                            Degree::new(bits.clone())
                                .map_err(|e| at(&format!("group.inverse.neumann.degrees[{k}]"), e))?,
                        );
                    }
                    InverseRule::MatrixNeumann { degrees }
                }
                None => {
                    if inv_doc.morphism.is_empty() {
                        return Err(at(
                            "group.inverse",
                            "needs either 'morphism' images or a 'neumann' rule",
                        ));
                    }
                    InverseRule::Morph(build_morphism(
                        &chart,
                        &chart,
                        &inv_doc.morphism,
                        registry,
                        "group.inverse.morphism",
                    )?)
                }
            };
            GroupLaw::new(&chart, mul, unit, inverse).map_err(|e| at("group", e))
        }
    }
}

/// Parse a "Ui,Uj" pair key against the atlas charts.
fn pair_key(key: &str, atlas: &Atlas, path: &str) -> Result<(usize, usize)> {
    let Some((a, b)) = key.split_once(',') else {
        return Err(at(path, format!("key '{key}' is not of the form 'ChartA,ChartB'")));
    };
    let i = atlas
        .chart_index(a.trim())
        .ok_or_else(|| at(path, format!("unknown chart '{}' in key '{key}'", a.trim())))?;
    let j = atlas
        .chart_index(b.trim())
        .ok_or_else(|| at(path, format!("unknown chart '{}' in key '{key}'", b.trim())))?;
    if atlas.overlap(i, j).is_none() {
        return Err(at(path, format!("key '{key}' names a pair with no declared overlap")));
    }
    Ok((i, j))
}

fn build_model(doc: ManifestDoc, truncation_override: Option<usize>) -> Result<Model> {
    let n = doc.n;
    if n == 0 {
        return Err(at("n", "grading rank must be at least 1"));
    }
    let truncation = truncation_override
        .or(doc.truncation)
        .unwrap_or(DEFAULT_TRUNCATION);
    let registry = FnRegistry::builtins();

    let mut charts = Vec::with_capacity(doc.charts.len());
    for (k, cd) in doc.charts.iter().enumerate() {
        charts.push(build_chart(cd, n, truncation, &format!("charts[{k}]"))?);
    }

    let atlas = if charts.is_empty() {
        if !doc.overlaps.is_empty() {
            return Err(at("overlaps", "manifest declares overlaps but no charts"));
        }
        None
    } else {
        let mut atlas = Atlas::new(charts.clone()).map_err(|e| at("charts", e))?;
        for (k, od) in doc.overlaps.iter().enumerate() {
            let path = format!("overlaps[{k}]");
            let find = |name: &str| {
                atlas.chart_index(name).ok_or_else(|| {
                    at(&format!("{path}.pair"), format!("unknown chart '{name}'"))
                })
            };
            let i = find(&od.pair.0)?;
            let j = find(&od.pair.1)?;
            let domain = build_box(&charts[i], &od.domain, &format!("{path}.domain"))?;
            let t = build_morphism(
                &charts[i],
                &charts[j],
                &od.transition,
                &registry,
                &format!("{path}.transition"),
            )?;
            atlas.add_overlap(i, j, domain, t).map_err(|e| at(&path, e))?;
            if let Some(r) = od.checked_range {
                if r > charts[j].base_count() {
                    return Err(at(
                        &format!("{path}.checked_range"),
                        format!("{r} exceeds the {} degree-0 coordinates", charts[j].base_count()),
                    ));
                }
                atlas.restrict_checked_range(i, j, r);
            }
        }
        for (k, td) in doc.triples.iter().enumerate() {
            let path = format!("triples[{k}]");
            let find = |name: &str| {
                atlas.chart_index(name).ok_or_else(|| {
                    at(&format!("{path}.charts"), format!("unknown chart '{name}'"))
                })
            };
            let (i, j, l) = (find(&td.charts.0)?, find(&td.charts.1)?, find(&td.charts.2)?);
            let domain = build_box(&charts[i], &td.domain, &format!("{path}.domain"))?;
            atlas.add_triple(i, j, l, domain).map_err(|e| at(&path, e))?;
        }
        Some(atlas)
    };

    let group = match &doc.group {
        Some(gd) => Some(build_group(gd, n, truncation, &registry)?),
        None => None,
    };

    let principal = if !doc.bundle_transitions.is_empty() {
        let atlas = atlas
            .as_ref()
            .ok_or_else(|| at("bundle_transitions", "requires charts and overlaps"))?;
        let group = group
            .as_ref()
            .ok_or_else(|| at("bundle_transitions", "requires a 'group'"))?;
        let mut cocycle = BTreeMap::new();
        for (key, images) in &doc.bundle_transitions {
            let path = format!("bundle_transitions.{key}");
            let (i, j) = pair_key(key, atlas, &path)?;
            let psi =
                build_morphism(&charts[i], group.chart(), images, &registry, &path)?;
            cocycle.insert((i, j), psi);
        }
        Some(
            PrincipalBundle::new(atlas.clone(), group.clone(), cocycle)
                .map_err(|e| at("bundle_transitions", e))?,
        )
    } else {
        None
    };

    let vector = match &doc.vector_bundle {
        Some(vd) => {
            let atlas = atlas
                .as_ref()
                .ok_or_else(|| at("vector_bundle", "requires charts and overlaps"))?;
            let mut fibre_degrees = Vec::with_capacity(vd.fibre_degrees.len());
            for (k, bits) in vd.fibre_degrees.iter().enumerate() {
                fibre_degrees.push(
                    Degree::new(bits.clone())
                        .map_err(|e| at(&format!("vector_bundle.fibre_degrees[{k}]"), e))?,
                );
            }
            let rank = fibre_degrees.len();
            let mut trans = BTreeMap::new();
            for (key, rows) in &vd.transitions {
                let path = format!("vector_bundle.transitions.{key}");
                let (i, j) = pair_key(key, atlas, &path)?;
                if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
                    return Err(at(&path, format!("expected a {rank}x{rank} matrix")));
                }
                let mut entries = Vec::with_capacity(rank);
                for (r, row) in rows.iter().enumerate() {
                    let mut out = Vec::with_capacity(rank);
                    for (c, text) in row.iter().enumerate() {
                        out.push(
                            parse_expression(text, &charts[i], &registry)
                                .map_err(|e| at(&format!("{path}[{r}][{c}]"), e))?,
                        );
                    }
                    entries.push(out);
                }
                let m = GradedMatrix::new(
                    &charts[i],
                    fibre_degrees.clone(),
                    fibre_degrees.clone(),
                    entries,
                )
                .map_err(|e| at(&path, e))?;
                trans.insert((i, j), m);
            }
            Some(
                VectorBundle::new(atlas.clone(), fibre_degrees, trans)
                    .map_err(|e| at("vector_bundle", e))?,
            )
        }
        None => None,
    };

    let action = match &doc.action {
        Some(ad) => {
            let group = group
                .as_ref()
                .ok_or_else(|| at("action", "requires a 'group'"))?;
            let fibre = build_chart(&ad.fibre, n, truncation, "action.fibre")?;
            let fg = action_chart(&fibre, group).map_err(|e| at("action", e))?;
            let act = build_morphism(&fg, &fibre, &ad.law, &registry, "action.law")?;
            Some(GroupAction::new(group.clone(), &fibre, act).map_err(|e| at("action", e))?)
        }
        None => None,
    };

    let sections = if !doc.sections.is_empty() {
        let atlas = atlas
            .as_ref()
            .ok_or_else(|| at("sections", "require charts"))?;
        let group = group
            .as_ref()
            .ok_or_else(|| at("sections", "require a 'group'"))?;
        for key in doc.sections.keys() {
            if atlas.chart_index(key).is_none() {
                return Err(at("sections", format!("unknown chart '{key}'")));
            }
        }
        let mut out = Vec::with_capacity(charts.len());
        for chart in &charts {
            let images = doc.sections.get(chart.name()).ok_or_else(|| {
                at("sections", format!("missing section over chart '{}'", chart.name()))
            })?;
            out.push(build_morphism(
                chart,
                group.chart(),
                images,
                &registry,
                &format!("sections.{}", chart.name()),
            )?);
        }
        Some(out)
    } else {
        None
    };

    Ok(Model {
        doc,
        n,
        truncation,
        registry,
        charts,
        atlas,
        group,
        principal,
        vector,
        action,
        sections,
    })
}

// ---------------------------------------------------------------------------
// Emission: constructions back to documents.
// ---------------------------------------------------------------------------

fn chart_to_doc(chart: &ChartRef) -> ChartDoc {
    ChartDoc {
        name: chart.name().to_string(),
        base: chart
            .base_names()
            .iter()
            .zip(chart.base_domain())
            .map(|(n, d)| BaseVarDoc { name: n.clone(), domain: *d })
            .collect(),
        formal: chart
            .formal_vars()
            .iter()
            .map(|v| FormalVarDoc { name: v.name.clone(), degree: v.degree.bits().to_vec() })
            .collect(),
    }
}

fn morphism_images(m: &Morphism) -> BTreeMap<String, String> {
    m.target()
        .coord_ids()
        .map(|id| (m.target().coord_name(id).to_string(), m.image(id).to_string()))
        .collect()
}

pub fn atlas_to_doc(atlas: &Atlas, n: usize, truncation: usize) -> ManifestDoc {
    let charts = atlas.charts().iter().map(chart_to_doc).collect();
    let mut overlaps = Vec::new();
    for (&(i, j), ov) in atlas.overlaps() {
        let src = &atlas.charts()[i];
        let tgt = &atlas.charts()[j];
        overlaps.push(OverlapDoc {
            pair: (src.name().to_string(), tgt.name().to_string()),
            domain: src
                .base_names()
                .iter()
                .zip(&ov.domain_in_i)
                .map(|(n, iv)| (n.clone(), *iv))
                .collect(),
            transition: morphism_images(&ov.transition),
            checked_range: (ov.checked_range < tgt.base_count()).then_some(ov.checked_range),
        });
    }
    let triples = atlas
        .triples()
        .iter()
        .map(|t| TripleDoc {
            charts: (
                atlas.charts()[t.i].name().to_string(),
                atlas.charts()[t.j].name().to_string(),
                atlas.charts()[t.k].name().to_string(),
            ),
            domain: atlas.charts()[t.i]
                .base_names()
                .iter()
                .zip(&t.domain_in_i)
                .map(|(n, iv)| (n.clone(), *iv))
                .collect(),
        })
        .collect();
    ManifestDoc {
        n,
        truncation: Some(truncation),
        charts,
        overlaps,
        triples,
        group: None,
        bundle_transitions: BTreeMap::new(),
        vector_bundle: None,
        action: None,
        sections: BTreeMap::new(),
    }
}

pub fn vector_bundle_to_doc(vb: &VectorBundle, n: usize, truncation: usize) -> ManifestDoc {
    let mut doc = atlas_to_doc(vb.atlas(), n, truncation);
    let mut transitions = BTreeMap::new();
    for (&(i, j), _) in vb.atlas().overlaps() {
        let m = vb.matrix(i, j).expect("validated");
        let rows = m
            .entries()
            .iter()
            .map(|row| row.iter().map(|e| e.to_string()).collect())
            .collect();
        transitions.insert(
            format!("{},{}", vb.atlas().charts()[i].name(), vb.atlas().charts()[j].name()),
            rows,
        );
    }
    doc.vector_bundle = Some(VectorBundleDoc {
        fibre_degrees: vb.fibre_degrees().iter().map(|d| d.bits().to_vec()).collect(),
        transitions,
    });
    doc
}

/// Emit a principal bundle; `group_doc` supplies the group description
/// (the original manifest's, or a reconstructed builtin for frame bundles).
pub fn principal_to_doc(
    pb: &PrincipalBundle,
    group_doc: GroupDoc,
    n: usize,
    truncation: usize,
) -> ManifestDoc {
    let mut doc = atlas_to_doc(pb.atlas(), n, truncation);
    doc.group = Some(group_doc);
    for (&(i, j), _) in pb.atlas().overlaps() {
        let psi = pb.transition_point(i, j).expect("validated");
        doc.bundle_transitions.insert(
            format!("{},{}", pb.atlas().charts()[i].name(), pb.atlas().charts()[j].name()),
            morphism_images(psi),
        );
    }
    doc
}

/// Reconstruct a builtin-`gl` group description from a matrix group's block
/// degrees (frame bundles always carry one).
pub fn gl_group_doc(group: &GroupLaw) -> Result<GroupDoc> {
    let shape = group
        .matrix_shape()
        .ok_or_else(|| Error::InvalidInput("group is not a matrix group".into()))?;
    let n = group.chart().n();
    let canon = z2n_core::enumerate_degrees(n)?;
    let mut counts = vec![0usize; canon.len()];
    for d in shape {
        let k = canon
            .iter()
            .position(|c| c == d)
            .ok_or_else(|| Error::Degree(format!("degree {d} not enumerable")))?;
        counts[k] += 1;
    }
    Ok(GroupDoc {
        builtin: Some("gl".into()),
        base_rank: Some(counts[0]),
        formal_ranks: counts[1..].to_vec(),
        chart: None,
        mul: BTreeMap::new(),
        unit: BTreeMap::new(),
        inverse: None,
    })
}

pub fn doc_to_string(doc: &ManifestDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("manifest docs serialize");
    s.push('\n');
    s
}
