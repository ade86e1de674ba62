//! The subcommands, independent of argument parsing and output routing.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use productform::higher_level::ConjectureReport;
use productform::numeric::MAX_SOLVER_NODES;
use productform::{
    analyze, conjecture_harness, cut_equation_check, cut_graph, enumerate_sourced_cuts,
    expected_fixtures, generate, random_rates, random_strongly_connected, sourced_cut, stationary,
    verify_relation, Analysis, Cut, FormalChain, ModelSpec, NodeId, RateAssignment, Relation,
};

use crate::document::{GraphDocument, LoadedChain};
use crate::error::{input, Result};

/// Report text plus whether the command's check held.
#[derive(Clone, Debug)]
pub struct Report {
    pub body: Value,
    pub passed: bool,
    /// Lines for standard error.
    pub notes: Vec<String>,
}

fn max_level_or_default(c: &FormalChain, max_level: Option<u32>) -> Result<u32> {
    match max_level {
        Some(0) => input("--max-level must be at least 1"),
        Some(l) => Ok(l),
        // Every level merges at least two components, so |V| levels suffice.
        None => Ok((c.node_count() as u32).max(1)),
    }
}

pub fn cmd_analyze(doc: &LoadedChain, max_level: Option<u32>) -> Result<Report> {
    let c = &doc.chain;
    let level = max_level_or_default(c, max_level)?;
    let a = analyze(c, level)?;
    Ok(Report {
        body: json!({
            "name": doc.name,
            "kind": c.kind().as_str(),
            "max_level": level,
            "analysis": a.to_json(c),
        }),
        passed: true,
        notes: Vec::new(),
    })
}

/// Every cut the analysis found: `C1` cuts, then hyperedge cuts by level.
fn discovered_cuts(a: &Analysis) -> Vec<(u32, Cut)> {
    a.c1_cuts
        .iter()
        .map(|(_, cut)| (1, cut.clone()))
        .chain(
            a.levels
                .iter()
                .flat_map(|l| l.hyperedges.iter().map(|h| (h.level, h.cut.clone()))),
        )
        .collect()
}

/// `π_i f_{j,i} = π_j f_{i,j}`: the factors exchanged.
fn faulted(r: &Relation) -> Result<Relation> {
    Ok(Relation::new(
        r.lhs_node,
        r.rhs_factor.clone(),
        r.rhs_node,
        r.lhs_factor.clone(),
    )?)
}

pub fn cmd_verify(
    doc: &LoadedChain,
    seeds: u64,
    tol: f64,
    fault: bool,
    max_level: Option<u32>,
) -> Result<Report> {
    if !(tol >= 0.0) {
        return input(format!("--tol must be a non-negative number, got {tol}"));
    }
    let c = &doc.chain;
    let g = c.graph();
    if c.node_count() > MAX_SOLVER_NODES {
        return Err(productform::Error::ResourceLimit {
            what: "solver node count".into(),
            limit: MAX_SOLVER_NODES,
            actual: c.node_count(),
        }
        .into());
    }
    let level = max_level_or_default(c, max_level)?;
    let a = analyze(c, level)?;
    let mut relations = a.relations.clone();
    if fault {
        let first = relations
            .first()
            .ok_or_else(|| crate::error::CliError::Input("--fault needs at least one relation".into()))?;
        relations[0] = faulted(first)?;
    }
    let cuts = discovered_cuts(&a);

    let mut instances: Vec<(String, RateAssignment)> = Vec::new();
    if let Some(r) = &doc.rates {
        instances.push(("document".into(), r.clone()));
    }
    for s in 0..seeds {
        instances.push((format!("seed {s}"), random_rates(c, s, c.kind())));
    }
    if instances.is_empty() {
        return input("--seeds 0 needs rates in the document");
    }

    let mut rel_worst = vec![0.0f64; relations.len()];
    let mut cut_worst = vec![0.0f64; cuts.len()];
    for (_, rates) in &instances {
        let pi = stationary(c, rates)?;
        for (w, r) in rel_worst.iter_mut().zip(&relations) {
            *w = w.max(verify_relation(&pi, rates, r)?);
        }
        for (w, (_, cut)) in cut_worst.iter_mut().zip(&cuts) {
            *w = w.max(cut_equation_check(c, &pi, rates, cut)?);
        }
    }
    let max_residual = rel_worst.iter().chain(&cut_worst).copied().fold(0.0, f64::max);
    let passed = max_residual <= tol;

    let mut notes = Vec::new();
    for (k, (r, &w)) in relations.iter().zip(&rel_worst).enumerate() {
        if w > tol {
            let tag = if fault && k == 0 { "faulted relation" } else { "relation" };
            notes.push(format!("{tag} {} residual {w:e} exceeds {tol:e}", r.render(g)));
        }
    }
    for ((lvl, cut), &w) in cuts.iter().zip(&cut_worst) {
        if w > tol {
            notes.push(format!(
                "level-{lvl} cut with sources {} / {} residual {w:e} exceeds {tol:e}",
                g.format_set(&cut.source_a),
                g.format_set(&cut.source_b)
            ));
        }
    }
    let body = json!({
        "name": doc.name,
        "tolerance": tol,
        "instances": instances.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "relations": relations.iter().zip(&rel_worst).enumerate().map(|(k, (r, &w))| json!({
            "nodes": [g.label(r.lhs_node), g.label(r.rhs_node)],
            "level": r.level.name(),
            "relation": r.render(g),
            "residual_max": w,
            "faulted": fault && k == 0,
        })).collect::<Vec<_>>(),
        "cuts": cuts.iter().zip(&cut_worst).map(|((lvl, cut), &w)| json!({
            "level": lvl,
            "source_a": g.labels_of(&cut.source_a),
            "source_b": g.labels_of(&cut.source_b),
            "residual_max": w,
        })).collect::<Vec<_>>(),
        "max_residual": max_residual,
        "passed": passed,
    });
    Ok(Report { body, passed, notes })
}

/// Flag values for `generate`; unset flags take the family defaults.
#[derive(Clone, Debug, Default)]
pub struct FamilyParams {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub levels: Option<usize>,
    pub width: Option<usize>,
    pub c1: Option<usize>,
    pub c2: Option<usize>,
    pub servers: Option<usize>,
    pub multiple: Option<usize>,
    pub truncate: Option<usize>,
}

impl FamilyParams {
    fn given(&self) -> Vec<&'static str> {
        [
            ("--n", self.n),
            ("--k", self.k),
            ("--levels", self.levels),
            ("--width", self.width),
            ("--c1", self.c1),
            ("--c2", self.c2),
            ("--servers", self.servers),
            ("--multiple", self.multiple),
            ("--truncate", self.truncate),
        ]
        .into_iter()
        .filter_map(|(f, v)| v.map(|_| f))
        .collect()
    }
}

pub const FAMILIES: [&str; 11] = [
    "birthdeath", "oneway", "oneway-edge", "twoway", "tree", "qbd", "fig2", "msj", "batchv1",
    "batchv2", "fig7",
];

/// Maps a family name and flags onto a model, rejecting flags the family
/// does not take.
pub fn family_spec(family: &str, p: &FamilyParams) -> Result<ModelSpec> {
    let need = |v: Option<usize>, flag: &str| -> Result<usize> {
        v.ok_or_else(|| crate::error::CliError::Input(format!("{family} needs {flag}")))
    };
    let (spec, allowed): (ModelSpec, &[&str]) = match family {
        "birthdeath" => (ModelSpec::BirthDeath { n: need(p.n, "--n")? }, &["--n"]),
        "oneway" => (ModelSpec::OneWayCycle { n: need(p.n, "--n")? }, &["--n"]),
        "oneway-edge" => (
            ModelSpec::OneWayCyclePlusEdge {
                n: need(p.n, "--n")?,
                k: need(p.k, "--k")?,
            },
            &["--n", "--k"],
        ),
        "twoway" => (ModelSpec::TwoWayCycle { n: need(p.n, "--n")? }, &["--n"]),
        "tree" => (ModelSpec::Tree { n: need(p.n, "--n")? }, &["--n"]),
        "qbd" => {
            let ModelSpec::QbdToy { levels, width } = ModelSpec::qbd_default() else { unreachable!() };
            (
                ModelSpec::QbdToy {
                    levels: p.levels.unwrap_or(levels),
                    width: p.width.unwrap_or(width),
                },
                &["--levels", "--width"],
            )
        }
        "fig2" => (ModelSpec::FigTwoToy, &[]),
        "fig7" => (ModelSpec::CliqueFig7, &[]),
        "msj" => {
            let ModelSpec::MsjSaturated { c1, c2, servers } = ModelSpec::msj_default() else { unreachable!() };
            (
                ModelSpec::MsjSaturated {
                    c1: p.c1.unwrap_or(c1),
                    c2: p.c2.unwrap_or(c2),
                    servers: p.servers.unwrap_or(servers),
                },
                &["--c1", "--c2", "--servers"],
            )
        }
        "batchv1" => {
            let ModelSpec::BatchV1 { multiple, truncation } = ModelSpec::batch_v1_default() else { unreachable!() };
            (
                ModelSpec::BatchV1 {
                    multiple: p.multiple.unwrap_or(multiple),
                    truncation: p.truncate.unwrap_or(truncation),
                },
                &["--multiple", "--truncate"],
            )
        }
        "batchv2" => {
            let ModelSpec::BatchV2 { truncation } = ModelSpec::batch_v2_default() else { unreachable!() };
            (
                ModelSpec::BatchV2 {
                    truncation: p.truncate.unwrap_or(truncation),
                },
                &["--truncate"],
            )
        }
        other => {
            return input(format!(
                "unknown family {other:?}; expected one of {}",
                FAMILIES.join(", ")
            ))
        }
    };
    if let Some(flag) = p.given().into_iter().find(|f| !allowed.contains(f)) {
        return input(format!("{family} does not take {flag}"));
    }
    Ok(spec)
}

/// The graph document and, when asked and defined, the fixture JSON.
pub fn cmd_generate(spec: &ModelSpec, with_fixtures: bool) -> Result<(GraphDocument, Option<Value>)> {
    let c = generate(spec)?;
    let doc = GraphDocument::from_chain(&spec.name(), &c, None);
    let fixtures = if with_fixtures {
        expected_fixtures(spec)?.map(|fx| {
            json!({
                "name": spec.name(),
                "fixtures": fx.to_json(c.graph()),
            })
        })
    } else {
        None
    };
    Ok((doc, fixtures))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Cuts,
    Broad,
}

/// Differences between the cut graph and the brute-force sourced cuts.
fn cut_diff(c: &FormalChain) -> Result<(usize, Vec<String>)> {
    let g = c.graph();
    let oracle = enumerate_sourced_cuts(c)?;
    let mut diff = Vec::new();
    for &(i, j) in &oracle.duplicates {
        diff.push(format!("oracle found several ({}, {})-sourced cuts", g.label(i), g.label(j)));
    }
    let from_oracle: BTreeSet<(NodeId, NodeId)> =
        oracle.cuts.keys().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    let c1 = cut_graph(c);
    for &(i, j) in from_oracle.difference(c1.edges()) {
        diff.push(format!("pair {}-{} has a sourced cut but no cut-graph edge", g.label(i), g.label(j)));
    }
    for &(i, j) in c1.edges().difference(&from_oracle) {
        diff.push(format!("cut-graph edge {}-{} has no sourced cut", g.label(i), g.label(j)));
    }
    let n = c.node_count();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if let (Some(found), Some(want)) = (sourced_cut(c, i, j)?, oracle.cuts.get(&(i, j))) {
                if found != *want {
                    diff.push(format!("({}, {})-sourced cut differs from the oracle", g.label(i), g.label(j)));
                }
            }
        }
    }
    Ok((oracle.cuts.len(), diff))
}

fn harness_notes(report: &ConjectureReport) -> usize {
    report.first_counterexamples().count()
}

pub fn cmd_oracle(doc: &LoadedChain, mode: OracleMode, max_subset: usize) -> Result<Report> {
    let c = &doc.chain;
    let g = c.graph();
    match mode {
        OracleMode::Cuts => {
            let (count, diff) = cut_diff(c)?;
            let passed = diff.is_empty();
            Ok(Report {
                body: json!({"name": doc.name, "mode": "cuts", "sourced_cuts": count, "diff": diff}),
                passed,
                notes: diff,
            })
        }
        OracleMode::Broad => {
            let report = conjecture_harness(c, max_subset)?;
            let bad = harness_notes(&report);
            Ok(Report {
                body: json!({
                    "name": doc.name,
                    "mode": "broad",
                    "max_subset_size": max_subset,
                    "report": report.to_json(g),
                    "summary": summary(bad),
                }),
                passed: true,
                notes: vec![summary(bad)],
            })
        }
    }
}

fn summary(counterexamples: usize) -> String {
    match counterexamples {
        0 => "no counterexample: every component pair with a broad cut is joint-ancestor free".into(),
        k => format!("{k} counterexamples: component pairs with a broad cut that are not joint-ancestor free"),
    }
}

pub fn cmd_oracle_random(
    nodes: usize,
    samples: u64,
    seed: u64,
    mode: OracleMode,
    max_subset: usize,
) -> Result<Report> {
    let mut mismatched = Vec::new();
    let mut counterexamples = Vec::new();
    let mut with_broad = 0u64;
    let mut skipped = 0usize;
    for s in 0..samples {
        let c = random_strongly_connected(nodes, seed.wrapping_add(s))?;
        let edges: Vec<(String, String)> = c
            .graph()
            .edges()
            .map(|(u, v)| (c.graph().label(u).to_string(), c.graph().label(v).to_string()))
            .collect();
        match mode {
            OracleMode::Cuts => {
                let (_, diff) = cut_diff(&c)?;
                if !diff.is_empty() {
                    mismatched.push(json!({"sample": s, "edges": edges, "diff": diff}));
                }
            }
            OracleMode::Broad => {
                let report = conjecture_harness(&c, max_subset)?;
                skipped += report.skipped;
                if report.findings.iter().any(|f| !f.broad.is_empty()) {
                    with_broad += 1;
                }
                if harness_notes(&report) > 0 {
                    counterexamples.push(json!({"sample": s, "edges": edges, "report": report.to_json(c.graph())}));
                }
            }
        }
    }
    let (body, passed, notes) = match mode {
        OracleMode::Cuts => {
            let note = format!("{} of {samples} samples differ from the oracle", mismatched.len());
            (
                json!({"mode": "cuts", "nodes": nodes, "samples": samples, "seed": seed, "mismatched": mismatched}),
                mismatched.is_empty(),
                vec![note],
            )
        }
        OracleMode::Broad => {
            let s = summary(counterexamples.len());
            (
                json!({
                    "mode": "broad",
                    "nodes": nodes,
                    "samples": samples,
                    "seed": seed,
                    "max_subset_size": max_subset,
                    "samples_with_broad_cuts": with_broad,
                    "skipped_component_pairs": skipped,
                    "counterexamples": counterexamples,
                    "summary": s,
                }),
                true,
                vec![s],
            )
        }
    };
    Ok(Report { body, passed, notes })
}

pub fn cmd_export(doc: &LoadedChain, annotate: u32) -> Result<String> {
    let c = &doc.chain;
    let analysis = if annotate >= 1 {
        Some(analyze(c, annotate.max(2))?)
    } else {
        None
    };
    Ok(crate::dot::render(&doc.name, c, analysis.as_ref(), annotate))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loaded(spec: ModelSpec) -> LoadedChain {
        let c = generate(&spec).unwrap();
        GraphDocument::from_chain(&spec.name(), &c, None).to_chain().unwrap()
    }

    #[test]
    fn family_flags() {
        let none = FamilyParams::default();
        assert_eq!(family_spec("msj", &none).unwrap(), ModelSpec::msj_default());
        assert!(family_spec("oneway", &none).is_err());
        let p = FamilyParams { n: Some(5), servers: Some(3), ..Default::default() };
        let e = family_spec("oneway", &p).unwrap_err();
        assert!(e.to_string().contains("--servers"), "{e}");
        assert!(family_spec("nosuch", &none).is_err());
        for f in FAMILIES {
            let p = match f {
                "oneway-edge" => FamilyParams { n: Some(5), k: Some(3), ..Default::default() },
                "birthdeath" | "oneway" | "twoway" | "tree" => FamilyParams { n: Some(5), ..Default::default() },
                _ => none.clone(),
            };
            let spec = family_spec(f, &p).unwrap();
            assert_eq!(spec.family(), f);
        }
    }

    #[test]
    fn verify_passes_and_fault_fails() {
        let d = loaded(ModelSpec::FigTwoToy);
        let r = cmd_verify(&d, 3, 1e-10, false, None).unwrap();
        assert!(r.passed, "{:?}", r.notes);
        let r = cmd_verify(&d, 3, 1e-10, true, None).unwrap();
        assert!(!r.passed);
        assert!(r.notes[0].starts_with("faulted relation"), "{:?}", r.notes);
        let r = cmd_verify(&d, 1, 0.0, false, None).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn verify_uses_document_rates() {
        let c = generate(&ModelSpec::BirthDeath { n: 4 }).unwrap();
        let rates = random_rates(&c, 9, c.kind());
        let d = GraphDocument::from_chain("bd", &c, Some(&rates)).to_chain().unwrap();
        let r = cmd_verify(&d, 0, 1e-10, false, None).unwrap();
        assert!(r.passed);
        assert_eq!(r.body["instances"], json!(["document"]));
        assert!(cmd_verify(&loaded(ModelSpec::BirthDeath { n: 4 }), 0, 1e-10, false, None).is_err());
    }

    #[test]
    fn fault_without_relations_is_an_input_error() {
        let d = loaded(ModelSpec::TwoWayCycle { n: 5 });
        assert!(cmd_verify(&d, 1, 1e-9, false, None).unwrap().passed);
        assert_eq!(cmd_verify(&d, 1, 1e-9, true, None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn oracle_modes() {
        let d = loaded(ModelSpec::FigTwoToy);
        let r = cmd_oracle(&d, OracleMode::Cuts, 12).unwrap();
        assert!(r.passed);
        assert_eq!(r.body["diff"], json!([]));
        let r = cmd_oracle_random(5, 20, 0, OracleMode::Cuts, 12).unwrap();
        assert!(r.passed, "{:?}", r.notes);
        let r = cmd_oracle_random(5, 20, 0, OracleMode::Broad, 12).unwrap();
        assert!(r.notes[0].starts_with("no counterexample"));
    }

    #[test]
    fn reports_are_deterministic() {
        let d = loaded(ModelSpec::batch_v2_default());
        let a = serde_json::to_string(&cmd_verify(&d, 2, 1e-9, false, None).unwrap().body).unwrap();
        let b = serde_json::to_string(&cmd_verify(&d, 2, 1e-9, false, None).unwrap().body).unwrap();
        assert_eq!(a, b);
    }
}
