//! Command implementations. Each command returns an outcome carrying the
//! exit code, a human-readable rendering, and a machine-readable JSON value;
//! `main` picks the rendering. Exit codes: 0 all checks passed, 1 a check
//! failed, 2 usage or input error.

use crate::manifest::{
    atlas_to_doc, gl_group_doc, principal_to_doc, vector_bundle_to_doc, ManifestDoc, Model,
};
use serde::Serialize;
use std::path::Path;
use z2n_core::{
    fibre_weight_check, is_linear_function, tangent_bundle, tangent_fibre_ids, weight_of,
    CheckRecord, EqOptions, Error, Report, Result, Weight,
};

#[derive(Debug, Clone, Copy)]
pub struct Flags {
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
}

impl Flags {
    pub fn opts(&self) -> EqOptions {
        EqOptions { samples: self.samples, seed: self.seed, tol: self.tolerance }
    }
}

pub struct Outcome {
    pub exit: i32,
    pub human: String,
    pub json: serde_json::Value,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    command: &'a str,
    passed: bool,
    checks: &'a [CheckRecord],
}

#[derive(Serialize)]
struct BuildOutput<'a> {
    command: &'a str,
    passed: bool,
    checks: &'a [CheckRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest: Option<&'a ManifestDoc>,
}

fn summarize(report: &Report) -> String {
    let failed = report.failures().count();
    if failed == 0 {
        format!("PASS ({} checks)", report.len())
    } else {
        format!("FAIL ({failed} of {} checks failed)", report.len())
    }
}

fn check_outcome(command: &str, report: Report) -> Outcome {
    let passed = report.passed();
    let human = if report.is_empty() {
        format!("{}\n", summarize(&report))
    } else {
        format!("{report}\n{}\n", summarize(&report))
    };
    let json = serde_json::to_value(CheckOutput {
        command,
        passed,
        checks: &report.checks,
    })
    .expect("reports serialize");
    Outcome { exit: if passed { 0 } else { 1 }, human, json }
}

fn build_outcome(
    command: &str,
    report: Report,
    doc: &ManifestDoc,
    out: Option<&Path>,
) -> Result<Outcome> {
    let passed = report.passed();
    let text = crate::manifest::doc_to_string(doc);
    let mut human = if report.is_empty() {
        String::new()
    } else {
        format!("{report}\n{}\n", summarize(&report))
    };
    let out_str = match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| {
                Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
            })?;
            human.push_str(&format!("wrote {}\n", path.display()));
            Some(path.display().to_string())
        }
        None => {
            human.push_str(&text);
            None
        }
    };
    let json = serde_json::to_value(BuildOutput {
        command,
        passed,
        checks: &report.checks,
        out: out_str,
        manifest: if out.is_none() { Some(doc) } else { None },
    })
    .expect("build outputs serialize");
    Ok(Outcome { exit: if passed { 0 } else { 1 }, human, json })
}

fn need<'m, T>(part: &'m Option<T>, what: &str) -> Result<&'m T> {
    part.as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("manifest has no {what}")))
}

pub fn check_atlas(model: &Model, flags: &Flags) -> Result<Outcome> {
    let atlas = need(&model.atlas, "charts (an atlas is required)")?;
    Ok(check_outcome("check-atlas", atlas.check_cocycle(&flags.opts())?))
}

pub fn check_cocycle(model: &Model, flags: &Flags) -> Result<Outcome> {
    let mut report = Report::new();
    let mut found = false;
    if let Some(pb) = &model.principal {
        report.merge(pb.check_cocycle(&flags.opts())?);
        found = true;
    }
    if let Some(vb) = &model.vector {
        report.merge(vb.validate(&flags.opts())?);
        found = true;
    }
    if !found {
        return Err(Error::InvalidInput(
            "manifest has no cocycle data: add 'group' + 'bundle_transitions', or 'vector_bundle'"
                .into(),
        ));
    }
    Ok(check_outcome("check-cocycle", report))
}

pub fn check_group(model: &Model, flags: &Flags) -> Result<Outcome> {
    let group = need(&model.group, "'group'")?;
    let report = group.check_axioms(&flags.opts(), flags.samples, flags.seed)?;
    Ok(check_outcome("check-group", report))
}

pub fn check_action(model: &Model, flags: &Flags) -> Result<Outcome> {
    let action = need(&model.action, "'action'")?;
    let mut report = action.check_axioms(&flags.opts())?;
    report.merge(action.check_freeness(&flags.opts(), flags.samples, flags.seed)?);
    Ok(check_outcome("check-action", report))
}

pub fn glue(
    model: &Model,
    associated: bool,
    out: Option<&Path>,
    flags: &Flags,
) -> Result<Outcome> {
    let pb = need(&model.principal, "'group' + 'bundle_transitions'")?;
    let mut report = pb.check_cocycle(&flags.opts())?;
    let total = if associated {
        let action = need(&model.action, "'action' (required by --associated)")?;
        pb.associated_total_space(action)?
    } else {
        pb.glue_total_space()?
    };
    report.merge(total.check_cocycle(&flags.opts())?);
    let doc = atlas_to_doc(&total, model.n, model.truncation);
    build_outcome("glue", report, &doc, out)
}

pub fn build_tangent(
    model: &Model,
    vector: bool,
    out: Option<&Path>,
    flags: &Flags,
) -> Result<Outcome> {
    let atlas = need(&model.atlas, "charts (an atlas is required)")?;
    let tb = tangent_bundle(atlas)?;
    let mut report = tb.total.check_cocycle(&flags.opts())?;
    report.merge(tb.vector.validate(&flags.opts())?);
    for (&(i, j), ov) in tb.total.overlaps() {
        let src = tangent_fibre_ids(&atlas.charts()[i]);
        let tgt = tangent_fibre_ids(&atlas.charts()[j]);
        let ok = fibre_weight_check(&ov.transition, &src, &tgt, &flags.opts())?;
        report.push(
            "fibre-linear",
            format!("({}, {})", tb.total.charts()[i].name(), tb.total.charts()[j].name()),
            ok,
            if ok {
                "dotted images have Euler weight 1, base images weight 0"
            } else {
                "a transition image has the wrong fibre weight"
            },
        );
    }
    let doc = if vector {
        vector_bundle_to_doc(&tb.vector, model.n, model.truncation)
    } else {
        atlas_to_doc(&tb.total, model.n, model.truncation)
    };
    build_outcome("build-tangent", report, &doc, out)
}

pub fn build_frame(model: &Model, out: Option<&Path>, flags: &Flags) -> Result<Outcome> {
    let vb = need(&model.vector, "'vector_bundle'")?;
    let mut report = vb.validate(&flags.opts())?;
    let fb = z2n_core::frame_bundle(vb)?;
    report.merge(fb.check_cocycle(&flags.opts())?);
    let doc = principal_to_doc(&fb, gl_group_doc(fb.group())?, model.n, model.truncation);
    build_outcome("build-frame", report, &doc, out)
}

pub fn trivialize(model: &Model, flags: &Flags) -> Result<Outcome> {
    let pb = need(&model.principal, "'group' + 'bundle_transitions'")?;
    let sections = need(&model.sections, "'sections'")?;
    match pb.trivialize_from_sections(sections, &flags.opts()) {
        Ok(report) => Ok(check_outcome("trivialize", report)),
        Err(Error::IncompatibleSection { pair, detail }) => {
            let mut report = Report::new();
            report.push(
                "section-compatibility",
                format!("({}, {})", pair.0, pair.1),
                false,
                detail,
            );
            Ok(check_outcome("trivialize", report))
        }
        Err(e) => Err(e),
    }
}

fn resolve_chart<'m>(model: &'m Model, name: &str) -> Result<&'m z2n_core::ChartRef> {
    if let Some(c) = model.charts.iter().find(|c| c.name() == name) {
        return Ok(c);
    }
    if let Some(g) = &model.group {
        if g.chart().name() == name {
            return Ok(g.chart());
        }
    }
    let mut known: Vec<&str> = model.charts.iter().map(|c| c.name()).collect();
    if let Some(g) = &model.group {
        known.push(g.chart().name());
    }
    Err(Error::InvalidInput(format!(
        "unknown chart '{name}'; manifest defines: {}",
        if known.is_empty() { "(none)".to_string() } else { known.join(", ") }
    )))
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    command: &'a str,
    chart: &'a str,
    input: &'a str,
    normalized: String,
}

pub fn eval(model: &Model, expr: &str, chart: &str) -> Result<Outcome> {
    let chart = resolve_chart(model, chart)?;
    let s = crate::expr::parse_expression(expr, chart, &model.registry)?;
    let normalized = s.to_string();
    let json = serde_json::to_value(EvalOutput {
        command: "eval",
        chart: chart.name(),
        input: expr,
        normalized: normalized.clone(),
    })
    .expect("eval outputs serialize");
    Ok(Outcome { exit: 0, human: format!("{normalized}\n"), json })
}

#[derive(Serialize)]
struct WeightOutput<'a> {
    command: &'a str,
    chart: &'a str,
    input: &'a str,
    homogeneous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<String>,
    exact: bool,
    linear: bool,
}

pub fn weight(model: &Model, expr: &str, chart: &str, flags: &Flags) -> Result<Outcome> {
    let chart = resolve_chart(model, chart)?;
    let s = crate::expr::parse_expression(expr, chart, &model.registry)?;
    let w = weight_of(&s, None, &flags.opts())?;
    let (weight_str, exact) = match &w {
        Some(Weight::Exact(r)) => (Some(r.to_string()), true),
        Some(Weight::Approx(v)) => (Some(format!("{v:.9}")), false),
        None => (None, true),
    };
    let linear = is_linear_function(&s);
    let human = match &weight_str {
        Some(ws) => format!(
            "weight: {ws}{}\nlinear: {linear}\n",
            if exact { "" } else { " (sampled)" }
        ),
        None => format!("weight: not homogeneous\nlinear: {linear}\n"),
    };
    let json = serde_json::to_value(WeightOutput {
        command: "weight",
        chart: chart.name(),
        input: expr,
        homogeneous: w.is_some(),
        weight: weight_str,
        exact,
        linear,
    })
    .expect("weight outputs serialize");
    Ok(Outcome { exit: 0, human, json })
}
