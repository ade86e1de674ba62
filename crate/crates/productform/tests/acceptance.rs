//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::json;

use productform::higher_level::DEFAULT_MAX_SUBSET_SIZE;
use productform::models::{EquationFixture, SPair};
use productform::numeric::{all_cuts, verify_relations, verify_terms};
use productform::{
    analyze, clique_check, conjecture_harness, cut_equation_check, cut_graph,
    enumerate_sourced_cuts, expected_fixtures, generate, is_jaf, random_rates,
    random_strongly_connected, sourced_cut, stationary, strongly_connected_classes,
    theorem3_witness, Analysis, FactorExpr, FormalChain, ModelSpec, NodeId,
};

/// Tolerance for relations and cut equations built from single sums.
const TOL_EXACT: f64 = 1e-10;
/// Tolerance for composed relations and closed forms.
const TOL_COMPOSED: f64 = 1e-9;
/// Smallest separation `|r_a / r_b - 1|` a witness pair must reach.
const WITNESS_GAP: f64 = 1e-3;
/// Random rate seeds used wherever a criterion asks for 20.
const SEEDS: std::ops::Range<u64> = 0..20;
/// Runtime target for the oracle sweep.
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
/// Known isomorphism-class counts of strongly connected digraphs, n = 1..=5.
const CLASS_COUNTS: [usize; 5] = [1, 1, 5, 83, 5048];
const RANDOM_SAMPLES: u64 = 200;
/// Cycle sizes for the timing check.
const TIMING_SIZES: [usize; 4] = [50, 100, 200, 400];
/// Largest admissible log-log slope of wall time against |V|.
const TIMING_SLOPE_MAX: f64 = 3.25;
/// Largest admissible time ratio per doubling of |V|.
const TIMING_DOUBLING_MAX: f64 = 10.0;
const CUT_SWEEP_MAX_NODES: usize = 12;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: productform::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn chain(spec: ModelSpec) -> Result<FormalChain, String> {
    lib(generate(&spec))
}

fn id(c: &FormalChain, label: &str) -> Result<NodeId, String> {
    lib(c.id(label))
}

fn seeds() -> Vec<u64> {
    SEEDS.collect()
}

fn labeled_pairs(c: &FormalChain, pairs: &[(String, String)]) -> Result<BTreeSet<(NodeId, NodeId)>, String> {
    pairs
        .iter()
        .map(|(a, b)| {
            let (u, v) = (id(c, a)?, id(c, b)?);
            Ok((u.min(v), u.max(v)))
        })
        .collect()
}

/// Worst residual of every analysis relation over the standard seeds.
fn worst_relation_residual(c: &FormalChain, a: &Analysis) -> Result<f64, String> {
    let checks = lib(verify_relations(c, &a.relations, &seeds(), c.kind()))?;
    Ok(checks.iter().map(|r| r.residual_max).fold(0.0, f64::max))
}

fn worst_equation_residual(c: &FormalChain, eqs: &[EquationFixture]) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let rates = random_rates(c, seed, c.kind());
        let pi = lib(stationary(c, &rates))?;
        for e in eqs {
            let (l, r) = lib(e.terms(c.graph()))?;
            worst = worst.max(lib(verify_terms(&pi, &rates, &l, &r))?);
        }
    }
    Ok(worst)
}

fn edge_set(f: &FactorExpr) -> BTreeSet<(NodeId, NodeId)> {
    f.atoms().iter().map(|a| (a.from, a.to)).collect()
}

/// Whether the analysis holds a relation between the pair's nodes with
/// exactly the pair's atom sets.
fn discovered(a: &Analysis, p: &SPair) -> bool {
    let (u, fu, v, fv) = p;
    a.relations.iter().any(|r| {
        matches!((r.factor_of(*u), r.factor_of(*v)), (Some(x), Some(y))
            if r.other(*u) == Some(*v) && edge_set(x) == *fu && edge_set(y) == *fv)
    })
}

fn source_labels(c: &FormalChain, a: &Analysis, level: u32) -> Vec<BTreeSet<Vec<String>>> {
    let g = c.graph();
    a.levels
        .iter()
        .filter(|l| l.level == level)
        .flat_map(|l| l.hyperedges.iter())
        .map(|h| [g.labels_of(&h.source_i), g.labels_of(&h.source_j)].into_iter().collect())
        .collect()
}

fn sorted(xs: &[String]) -> Vec<String> {
    let mut v = xs.to_vec();
    v.sort();
    v
}

fn oracle_matches(c: &FormalChain) -> Result<(), String> {
    let oracle = lib(enumerate_sourced_cuts(c))?;
    check(oracle.duplicates.is_empty(), || format!("oracle saw duplicate cuts {:?}", oracle.duplicates))?;
    let from_oracle: BTreeSet<(NodeId, NodeId)> = oracle.cuts.keys().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    let c1 = cut_graph(c);
    check(*c1.edges() == from_oracle, || {
        format!("{:?}: cut graph {:?} vs oracle {:?}", c.graph().edges().collect::<Vec<_>>(), c1.edges(), from_oracle)
    })?;
    let n = c.node_count();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let found = lib(sourced_cut(c, i, j))?;
            check(found.as_ref() == oracle.cuts.get(&(i, j)), || {
                format!("{:?}: sourced cut ({i}, {j}) differs from oracle", c.graph().edges().collect::<Vec<_>>())
            })?;
        }
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut graphs = 0;
    for (n, &want) in (1..=5).zip(CLASS_COUNTS.iter()) {
        let classes = lib(strongly_connected_classes(n))?;
        check(classes.len() == want, || format!("{} classes on {n} nodes, expected {want}", classes.len()))?;
        for c in &classes {
            oracle_matches(c)?;
        }
        graphs += classes.len();
    }
    for seed in 0..RANDOM_SAMPLES {
        let n = 6 + (seed % 2) as usize;
        oracle_matches(&lib(random_strongly_connected(n, seed))?)?;
        graphs += 1;
    }
    let elapsed = start.elapsed();
    check(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}, budget {ORACLE_BUDGET:?}"))?;
    Ok(format!("{graphs} graphs, 0 mismatches, {:.2} s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let spec = ModelSpec::FigTwoToy;
    let c = chain(spec)?;
    let fx = lib(expected_fixtures(&spec))?.ok_or("no fixtures")?;
    let a = lib(analyze(&c, 1))?;
    let required = labeled_pairs(&c, &fx.c1_required)?;
    check(required.is_subset(a.c1.edges()), || format!("C1 {:?} misses {:?}", a.c1.edges(), required))?;
    check(fx.equations.len() == 6, || format!("{} cut equations", fx.equations.len()))?;
    let worst = worst_equation_residual(&c, &fx.equations)?;
    check(worst <= TOL_EXACT, || format!("cut equation residual {worst:e}"))?;
    let rel = worst_relation_residual(&c, &a)?;
    check(rel <= TOL_EXACT, || format!("relation residual {rel:e}"))?;
    Ok(format!(
        "C1 has {} edges including 4 caption pairs, 6 cut equations, max residual {:e}",
        a.c1.edges().len(),
        worst.max(rel)
    ))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;

    let c = chain(ModelSpec::OneWayCycle { n: 5 })?;
    let a = lib(analyze(&c, 1))?;
    check(a.c1.edges().len() == 10, || format!("one-way: {} C1 edges", a.c1.edges().len()))?;
    check(lib(clique_check(&c, &c.graph().full_set()))?.is_some(), || "one-way: clique check rejects V".into())?;
    worst = worst.max(worst_relation_residual(&c, &a)?);

    let spec = ModelSpec::OneWayCyclePlusEdge { n: 5, k: 3 };
    let c = chain(spec)?;
    let fx = lib(expected_fixtures(&spec))?.ok_or("no fixtures")?;
    let a = lib(analyze(&c, 1))?;
    let forbidden = labeled_pairs(&c, &fx.c1_forbidden)?;
    check(forbidden.len() == 3, || format!("one-way plus edge: {} forbidden pairs", forbidden.len()))?;
    check(forbidden.is_disjoint(a.c1.edges()), || "one-way plus edge: a forbidden pair is in C1".into())?;
    worst = worst.max(worst_relation_residual(&c, &a)?);

    let c = chain(ModelSpec::TwoWayCycle { n: 5 })?;
    let a = lib(analyze(&c, 1))?;
    check(a.c1.edges().is_empty(), || "two-way: C1 is not empty".into())?;

    let spec = ModelSpec::Tree { n: 7 };
    let c = chain(spec)?;
    let fx = lib(expected_fixtures(&spec))?.ok_or("no fixtures")?;
    let a = lib(analyze(&c, 1))?;
    let exact = labeled_pairs(&c, fx.c1_exact.as_deref().ok_or("no exact C1")?)?;
    check(*a.c1.edges() == exact, || "tree: C1 differs from the tree edges".into())?;
    for r in &a.relations {
        let (i, j) = (r.lhs_node, r.rhs_node);
        check(
            r.lhs_factor == FactorExpr::atom(i, j) && r.rhs_factor == FactorExpr::atom(j, i),
            || format!("tree: relation {} is not detailed balance", r.render(c.graph())),
        )?;
    }
    worst = worst.max(worst_relation_residual(&c, &a)?);

    let spec = ModelSpec::qbd_default();
    let c = chain(spec)?;
    let fx = lib(expected_fixtures(&spec))?.ok_or("no fixtures")?;
    let a = lib(analyze(&c, 1))?;
    let required = labeled_pairs(&c, &fx.c1_required)?;
    check(required.is_subset(a.c1.edges()), || "qbd: a boundary pair is missing from C1".into())?;
    worst = worst.max(worst_relation_residual(&c, &a)?);

    check(worst <= TOL_EXACT, || format!("relation residual {worst:e}"))?;
    Ok(format!("5 families, max residual {worst:e}"))
}

fn msj_figure_edges() -> BTreeSet<(String, String)> {
    let bar = |k: usize| format!("bar{k}");
    let mut e = BTreeSet::new();
    for i in [1, 2, 4, 5, 7, 8, 9] {
        e.insert((i.to_string(), (i - 1).to_string()));
        e.insert((bar(i - 1), bar(i)));
    }
    for i in [3, 6, 10] {
        e.insert((i.to_string(), bar(i - 1)));
        e.insert((bar(i - 1), i.to_string()));
    }
    for i in 0..=6 {
        e.insert((i.to_string(), bar(i)));
        e.insert((bar(i), i.to_string()));
    }
    for i in 7..=9 {
        e.insert((bar(i), i.to_string()));
    }
    e
}

fn criterion_4() -> Outcome {
    let spec = ModelSpec::msj_default();
    let c = chain(spec)?;
    let g = c.graph();
    let edges: BTreeSet<(String, String)> =
        g.edges().map(|(u, v)| (g.label(u).to_string(), g.label(v).to_string())).collect();
    check(c.node_count() == 21 && edges == msj_figure_edges(), || "generated graph differs from the figure".into())?;

    let fx = lib(expected_fixtures(&spec))?.ok_or("no fixtures")?;
    let a = lib(analyze(&c, 2))?;
    check(a.c1.components().len() == 1, || format!("{} C1 components", a.c1.components().len()))?;
    let exact = labeled_pairs(&c, fx.c1_exact.as_deref().ok_or("no exact C1")?)?;
    check(*a.c1.edges() == exact && exact.len() == 23, || {
        let show = |s: &BTreeSet<(NodeId, NodeId)>| s.iter().map(|&(u, v)| format!("{}-{}", g.label(u), g.label(v))).collect::<Vec<_>>();
        format!("C1 {:?} differs from the figure's {:?}", show(a.c1.edges()), show(&exact))
    })?;

    check(fx.equations.len() == 8, || format!("{} table rows", fx.equations.len()))?;
    for e in &fx.equations {
        let p = lib(e.s_pair(g))?.ok_or_else(|| format!("row {} is not a single-term relation", e.nodes))?;
        check(discovered(&a, &p), || format!("row {} not discovered", e.nodes))?;
    }

    let cf = fx.closed_form.ok_or("no closed form")?;
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let rates = random_rates(&c, seed, c.kind());
        let pi = lib(stationary(&c, &rates))?;
        for (&v, e) in &cf.ratios {
            let want = pi.get(cf.reference) * lib(e.evaluate(&rates))?;
            worst = worst.max((want - pi.get(v)).abs() / pi.get(v));
        }
    }
    check(cf.ratios.len() == 20, || format!("closed form covers {} nodes", cf.ratios.len() + 1))?;
    check(worst <= TOL_COMPOSED, || format!("closed form relative error {worst:e}"))?;

    let c = chain(ModelSpec::MsjSaturated { c1: 2, c2: 5, servers: 12 })?;
    let k = cut_graph(&c).components().len();
    check(k == 1, || format!("(2,5,12) has {k} C1 components"))?;
    Ok(format!("21 nodes, 23 C1 edges, 8 rows discovered, closed form error {worst:e}"))
}

fn criterion_5() -> Outcome {
    let spec = ModelSpec::batch_v1_default();
    let c = chain(spec)?;
    let fx = lib(expected_fixtures(&spec))?.ok_or("no fixtures")?;
    let a = lib(analyze(&c, 2))?;
    let g = c.graph();

    let (level1, level2): (Vec<_>, Vec<_>) = fx.equations.iter().cloned().partition(|e| e.level == 1);
    check(level1.len() == 11, || format!("{} level-1 rows", level1.len()))?;
    for e in &level1 {
        let p = lib(e.s_pair(g))?.ok_or_else(|| format!("row {} is not a single-term relation", e.nodes))?;
        check(discovered(&a, &p), || format!("row {} not discovered", e.nodes))?;
    }
    let worst_rows = worst_equation_residual(&c, &fx.equations)?;
    check(worst_rows <= TOL_EXACT, || format!("table row residual {worst_rows:e}"))?;

    let found = source_labels(&c, &a, 2);
    check(fx.hyperedges.len() == 4, || format!("{} hyperedge fixtures", fx.hyperedges.len()))?;
    for h in &fx.hyperedges {
        let want: BTreeSet<Vec<String>> = [sorted(&h.source_i), sorted(&h.source_j)].into_iter().collect();
        check(found.contains(&want), || format!("hyperedge {:?} / {:?} not found", h.source_i, h.source_j))?;
    }

    let display = fx.relations.first().ok_or("no displayed relation")?;
    let composed = lib(a.linkage.relation(id(&c, "1")?, id(&c, "3")?))?.ok_or("no composed relation between 1 and 3")?;
    let checks = lib(verify_relations(&c, &[display.clone(), composed], &seeds(), c.kind()))?;
    let worst = checks.iter().map(|r| r.residual_max).fold(0.0, f64::max);
    check(worst <= TOL_COMPOSED, || format!("PSPS residual {worst:e}"))?;

    // The figure's own truncation fixes the complete first two levels.
    let spec7 = ModelSpec::BatchV1 { multiple: 3, truncation: 7 };
    let c7 = chain(spec7)?;
    let fx7 = lib(expected_fixtures(&spec7))?.ok_or("no fixtures")?;
    let a7 = lib(analyze(&c7, 2))?;
    let exact = labeled_pairs(&c7, fx7.c1_exact.as_deref().ok_or("no exact C1")?)?;
    check(*a7.c1.edges() == exact, || "truncation 7: C1 differs".into())?;
    let found7 = source_labels(&c7, &a7, 2);
    check(found7.len() == 4, || format!("truncation 7: {} hyperedges", found7.len()))?;

    Ok(format!(
        "11 level-1 rows discovered, {} level-2 rows verify, {} hyperedges at level 2 cover the 4 listed, PSPS residual {worst:e}",
        level2.len(),
        found.len()
    ))
}

fn criterion_6() -> Outcome {
    let spec = ModelSpec::batch_v2_default();
    let c = chain(spec)?;
    let a = lib(analyze(&c, 3))?;
    let set = |i: &[&str], j: &[&str]| -> BTreeSet<Vec<String>> {
        let v = |xs: &[&str]| sorted(&xs.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        [v(i), v(j)].into_iter().collect()
    };
    let l2 = source_labels(&c, &a, 2);
    check(l2 == vec![set(&["bar1", "bar2"], &["2"])], || format!("level 2: {l2:?}"))?;
    let l3 = source_labels(&c, &a, 3);
    check(l3 == vec![set(&["bar2", "bar3"], &["3"])], || format!("level 3: {l3:?}"))?;

    let report = lib(conjecture_harness(&c, DEFAULT_MAX_SUBSET_SIZE))?;
    let g = c.graph();
    let want = set(&["bar1", "1"], &["2"]);
    let broad_hit = report.findings.iter().any(|f| {
        f.broad
            .iter()
            .any(|(i, j)| [g.labels_of(i), g.labels_of(j)].into_iter().collect::<BTreeSet<_>>() == want)
    });
    check(broad_hit, || "broad search misses ({bar1, 1}, {2})".into())?;
    let rel = worst_relation_residual(&c, &a)?;
    check(rel <= TOL_COMPOSED, || format!("relation residual {rel:e}"))?;
    Ok(format!("one hyperedge at each of levels 2 and 3, broad pair found, residual {rel:e}"))
}

fn criterion_7() -> Outcome {
    let mut pairs = 0;
    let mut min_gap = f64::INFINITY;
    for spec in [ModelSpec::BirthDeath { n: 6 }, ModelSpec::TwoWayCycle { n: 5 }, ModelSpec::FigTwoToy] {
        let c = chain(spec)?;
        let n = c.node_count();
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let jaf = lib(is_jaf(&c, &c.graph().singleton(i), &c.graph().singleton(j)))?;
                let w = lib(theorem3_witness(&c, i, j))?;
                match (jaf, w) {
                    (true, None) => {}
                    (false, Some(w)) => {
                        let (ra, rb) = lib(w.ratios(&c))?;
                        let gap = (ra / rb - 1.0).abs();
                        check(gap > WITNESS_GAP, || format!("{} ({i}, {j}): gap {gap:e}", spec.name()))?;
                        min_gap = min_gap.min(gap);
                        pairs += 1;
                    }
                    (jaf, w) => {
                        return Err(format!(
                            "{} ({i}, {j}): jaf={jaf} but witness present={}",
                            spec.name(),
                            w.is_some()
                        ))
                    }
                }
            }
        }
    }
    Ok(format!("{pairs} ordered non-JAF pairs separated, smallest gap {min_gap:.3e}"))
}

fn criterion_8() -> Outcome {
    let specs = [
        ModelSpec::BirthDeath { n: 6 },
        ModelSpec::OneWayCycle { n: 5 },
        ModelSpec::OneWayCyclePlusEdge { n: 5, k: 3 },
        ModelSpec::TwoWayCycle { n: 5 },
        ModelSpec::Tree { n: 7 },
        ModelSpec::qbd_default(),
        ModelSpec::QbdToy { levels: 3, width: 3 },
        ModelSpec::FigTwoToy,
        ModelSpec::CliqueFig7,
        ModelSpec::BatchV1 { multiple: 3, truncation: 5 },
        ModelSpec::BatchV2 { truncation: 5 },
        ModelSpec::MsjSaturated { c1: 1, c2: 2, servers: 4 },
    ];
    let mut worst = 0.0f64;
    let mut cuts = 0;
    let mut fixtures = 0;
    for spec in specs {
        let c = chain(spec)?;
        if c.node_count() > CUT_SWEEP_MAX_NODES {
            continue;
        }
        let rates = random_rates(&c, 1, c.kind());
        let pi = lib(stationary(&c, &rates))?;
        for cut in lib(all_cuts(&c))? {
            worst = worst.max(lib(cut_equation_check(&c, &pi, &rates, &cut))?);
            cuts += 1;
        }
        fixtures += 1;
    }
    check(worst <= TOL_EXACT, || format!("cut residual {worst:e}"))?;
    Ok(format!("{fixtures} fixtures, {cuts} cuts, max residual {worst:e}"))
}

fn criterion_9() -> Outcome {
    let mut times = Vec::new();
    for n in TIMING_SIZES {
        let c = chain(ModelSpec::OneWayCycle { n })?;
        let best = (0..3)
            .map(|_| {
                let t = Instant::now();
                let c1 = cut_graph(&c);
                let dt = t.elapsed();
                assert_eq!(c1.edges().len(), n * (n - 1) / 2);
                dt
            })
            .min()
            .expect("three runs");
        times.push(best.as_secs_f64().max(1e-9));
    }
    let xs: Vec<f64> = TIMING_SIZES.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let detail = format!(
        "times {:?} ms, doubling ratios {:.2?}, slope {slope:.2}",
        times.iter().map(|t| (t * 1e5).round() / 1e2).collect::<Vec<_>>(),
        ratios
    );
    check(slope <= TIMING_SLOPE_MAX, || detail.clone())?;
    check(ratios.iter().all(|&r| r <= TIMING_DOUBLING_MAX), || detail.clone())?;
    Ok(detail)
}

fn criterion_10() -> Outcome {
    let mut graphs = 0;
    let mut with_broad = 0;
    let mut counterexamples = Vec::new();
    let mut second = 0;
    let mut skipped = 0;
    for n in 1..=5 {
        for c in lib(strongly_connected_classes(n))? {
            let report = lib(conjecture_harness(&c, DEFAULT_MAX_SUBSET_SIZE))?;
            graphs += 1;
            skipped += report.skipped;
            if report.findings.iter().any(|f| !f.broad.is_empty()) {
                with_broad += 1;
            }
            if report.second_violations().next().is_some() {
                second += 1;
            }
            if report.first_counterexamples().next().is_some() {
                counterexamples.push(json!({
                    "edges": c.graph().edges().collect::<Vec<_>>(),
                    "report": report.to_json(c.graph()),
                }));
            }
        }
    }
    let artifact = json!({
        "graphs": graphs,
        "graphs_with_broad_cuts": with_broad,
        "graphs_with_unextendable_broad_pairs": second,
        "skipped_component_pairs": skipped,
        "non_jaf_pairs_with_broad_cuts": counterexamples,
    });
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("conjecture_report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&artifact).expect("json"))
        .map_err(|e| format!("writing {}: {e}", path.display()))?;
    Ok(format!(
        "{graphs} graphs, {with_broad} with broad cuts, {} counterexamples, report at {}",
        counterexamples.len(),
        path.display()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("cut graph equals brute-force sourced cuts", criterion_1),
        ("seven-node toy cut graph and cut equations", criterion_2),
        ("cycle, tree and QBD examples", criterion_3),
        ("saturated multiserver-job chain", criterion_4),
        ("batch arrivals truncated at multiples of 3", criterion_5),
        ("batch arrivals of size 1 or 2", criterion_6),
        ("witness pairs for non-JAF pairs", criterion_7),
        ("cut equations over all bipartitions", criterion_8),
        ("cut graph scaling on one-way cycles", criterion_9),
        ("broad-cut conjecture harness", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{secs:.2} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.2} s]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
