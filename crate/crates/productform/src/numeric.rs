//! Exact stationary solves on instantiated chains, relation and cut-equation
//! residuals, seeded rate generation, the exhaustive sourced-cut oracle, and
//! the non-product-form witness for pairs that are not joint-ancestor free.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::factors::{FactorExpr, Relation};
use crate::graph::{shortest_path, NodeId, NodeSet};
use crate::product_form::{mutually_avoiding_ancestors, ChainKind, Cut, FormalChain};

/// Largest chain the dense solver accepts.
pub const MAX_SOLVER_NODES: usize = 2000;
/// Largest chain the bipartition oracles accept.
pub const MAX_ORACLE_NODES: usize = 20;
/// Balance residual bound for a solve.
pub const BALANCE_TOL: f64 = 1e-10;
/// Per-node row-sum tolerance for probability assignments.
pub const DTMC_ROW_TOL: f64 = 1e-12;
/// Bounds of the log-uniform rate draw.
pub const RATE_RANGE: (f64, f64) = (0.1, 10.0);

/// Positive values for every edge of a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct RateAssignment {
    kind: ChainKind,
    values: BTreeMap<(NodeId, NodeId), f64>,
}

impl RateAssignment {
    /// Validates coverage, positivity and, for probabilities, row sums.
    pub fn new(
        c: &FormalChain,
        kind: ChainKind,
        values: BTreeMap<(NodeId, NodeId), f64>,
    ) -> Result<RateAssignment> {
        let g = c.graph();
        for (&(u, v), &x) in &values {
            if !g.has_edge(u, v) {
                return invalid(format!("rate given for non-edge ({}, {})", g.label(u), g.label(v)));
            }
            if !(x > 0.0 && x.is_finite()) {
                return invalid(format!(
                    "rate on ({}, {}) is {x}, must be positive",
                    g.label(u),
                    g.label(v)
                ));
            }
        }
        if let Some((u, v)) = g.edges().find(|e| !values.contains_key(e)) {
            return invalid(format!("missing rate for edge ({}, {})", g.label(u), g.label(v)));
        }
        let r = RateAssignment { kind, values };
        if kind == ChainKind::Dtmc {
            for u in 0..g.node_count() {
                let s: f64 = g.successors(u).iter().map(|&v| r.values[&(u, v)]).sum();
                if (s - 1.0).abs() > DTMC_ROW_TOL {
                    return invalid(format!(
                        "probabilities out of {} sum to {s}, expected 1",
                        g.label(u)
                    ));
                }
            }
        }
        Ok(r)
    }

    /// Wraps a map without checking it against a chain.
    pub fn from_map_unchecked(kind: ChainKind, values: BTreeMap<(NodeId, NodeId), f64>) -> Self {
        RateAssignment { kind, values }
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn get(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.values.get(&(from, to)).copied()
    }

    pub fn values(&self) -> &BTreeMap<(NodeId, NodeId), f64> {
        &self.values
    }

    /// Copy with one value replaced.
    pub fn with_value(&self, from: NodeId, to: NodeId, value: f64) -> RateAssignment {
        let mut values = self.values.clone();
        values.insert((from, to), value);
        RateAssignment {
            kind: self.kind,
            values,
        }
    }
}

/// Seeded log-uniform draw in [0.1, 10] per edge; probabilities are then
/// normalized per node.
pub fn random_rates(c: &FormalChain, seed: u64, kind: ChainKind) -> RateAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (RATE_RANGE.0.ln(), RATE_RANGE.1.ln());
    let g = c.graph();
    let mut values = BTreeMap::new();
    for u in 0..g.node_count() {
        let draws: Vec<f64> = g
            .successors(u)
            .iter()
            .map(|_| rng.gen_range(lo..=hi).exp())
            .collect();
        let scale = match kind {
            ChainKind::Ctmc => 1.0,
            ChainKind::Dtmc => draws.iter().sum::<f64>(),
        };
        for (&v, x) in g.successors(u).iter().zip(draws) {
            values.insert((u, v), x / scale);
        }
    }
    RateAssignment { kind, values }
}

/// Stationary measure `π` of an instantiated chain.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryMeasure {
    pub pi: Vec<f64>,
    pub normalized: bool,
}

impl StationaryMeasure {
    pub fn get(&self, v: NodeId) -> f64 {
        self.pi[v]
    }
}

/// Outflow and inflow of node `v` under `pi`, self-loops excluded.
fn flows(c: &FormalChain, rates: &RateAssignment, pi: &[f64], v: NodeId) -> Result<(f64, f64)> {
    let g = c.graph();
    let rate = |u: NodeId, w: NodeId| {
        rates
            .get(u, w)
            .ok_or_else(|| Error::InvalidArgument(format!("no rate for edge ({u}, {w})")))
    };
    let mut out = 0.0;
    for &w in g.successors(v) {
        if w != v {
            out += pi[v] * rate(v, w)?;
        }
    }
    let mut inflow = 0.0;
    for &u in g.predecessors(v) {
        if u != v {
            inflow += pi[u] * rate(u, v)?;
        }
    }
    Ok((out, inflow))
}

/// Largest relative per-node balance residual `|out − in| / (out + in)`.
pub fn balance_residual(c: &FormalChain, rates: &RateAssignment, pi: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in 0..c.node_count() {
        let (out, inflow) = flows(c, rates, pi, v)?;
        if out + inflow > 0.0 {
            worst = worst.max((out - inflow).abs() / (out + inflow));
        }
    }
    Ok(worst)
}

/// Dense direct solve of the balance equations by state reduction
/// (Grassmann-Taksar-Heyman elimination), which avoids subtraction and keeps
/// small stationary masses accurate to relative precision.
pub fn stationary(c: &FormalChain, rates: &RateAssignment) -> Result<StationaryMeasure> {
    let n = c.node_count();
    if n > MAX_SOLVER_NODES {
        return Err(Error::ResourceLimit {
            what: "solver node count".into(),
            limit: MAX_SOLVER_NODES,
            actual: n,
        });
    }
    let g = c.graph();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        if u == v {
            continue;
        }
        a[(u, v)] = rates
            .get(u, v)
            .ok_or_else(|| Error::InvalidArgument(format!("no rate for edge ({}, {})", g.label(u), g.label(v))))?;
    }
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[(k, j)]).sum();
        if !(s > 0.0) {
            return Err(Error::Internal(format!(
                "state reduction found no exit from {} into lower states",
                g.label(k)
            )));
        }
        for i in 0..k {
            a[(i, k)] /= s;
        }
        for i in 0..k {
            let aik = a[(i, k)];
            if aik == 0.0 {
                continue;
            }
            for j in 0..k {
                a[(i, j)] += aik * a[(k, j)];
            }
        }
    }
    let mut sol = vec![0.0f64; n];
    sol[0] = 1.0;
    for j in 1..n {
        sol[j] = (0..j).map(|i| sol[i] * a[(i, j)]).sum();
    }
    let total: f64 = sol.iter().sum();
    let pi: Vec<f64> = sol.iter().map(|x| x / total).collect();
    if let Some(v) = pi.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::NumericFailure {
            what: format!("stationary mass of {}", g.label(v)),
            residual: pi[v],
            bound: 0.0,
        });
    }
    let residual = balance_residual(c, rates, &pi)?;
    if residual > BALANCE_TOL {
        return Err(Error::NumericFailure {
            what: "balance equations".into(),
            residual,
            bound: BALANCE_TOL,
        });
    }
    Ok(StationaryMeasure {
        pi,
        normalized: true,
    })
}

/// `|π_i f_{i,j} − π_j f_{j,i}| / (π_i f_{i,j} + π_j f_{j,i})`.
pub fn verify_relation(pi: &StationaryMeasure, rates: &RateAssignment, r: &Relation) -> Result<f64> {
    let lhs = pi.get(r.lhs_node) * r.lhs_factor.evaluate(rates)?;
    let rhs = pi.get(r.rhs_node) * r.rhs_factor.evaluate(rates)?;
    Ok((lhs - rhs).abs() / (lhs + rhs))
}

/// Relative residual of `Σ π_u f_u = Σ π_v g_v` over arbitrary weighted terms.
pub fn verify_terms(
    pi: &StationaryMeasure,
    rates: &RateAssignment,
    lhs: &[(NodeId, FactorExpr)],
    rhs: &[(NodeId, FactorExpr)],
) -> Result<f64> {
    let side = |terms: &[(NodeId, FactorExpr)]| -> Result<f64> {
        terms
            .iter()
            .map(|(v, f)| f.evaluate(rates).map(|x| pi.get(*v) * x))
            .sum()
    };
    let (l, r) = (side(lhs)?, side(rhs)?);
    Ok((l - r).abs() / (l + r))
}

/// Residual of the cut equation: flow from `A` to `B` against flow back.
pub fn cut_equation_check(
    c: &FormalChain,
    pi: &StationaryMeasure,
    rates: &RateAssignment,
    cut: &Cut,
) -> Result<f64> {
    let g = c.graph();
    let flow = |edges: Vec<(NodeId, NodeId)>| -> Result<f64> {
        edges
            .into_iter()
            .map(|(u, v)| {
                rates
                    .get(u, v)
                    .map(|q| pi.get(u) * q)
                    .ok_or_else(|| Error::InvalidArgument(format!("no rate for edge ({u}, {v})")))
            })
            .sum()
    };
    let (ab, ba) = (flow(cut.edges_a_to_b(g))?, flow(cut.edges_b_to_a(g))?);
    Ok((ab - ba).abs() / (ab + ba))
}

fn oracle_budget(c: &FormalChain) -> Result<()> {
    let n = c.node_count();
    if n > MAX_ORACLE_NODES {
        return Err(Error::ResourceLimit {
            what: "bipartition oracle node count".into(),
            limit: MAX_ORACLE_NODES,
            actual: n,
        });
    }
    Ok(())
}

/// Every bipartition `(A, V \ A)` with both sides nonempty, `A` running over
/// bitmasks in increasing order.
pub fn all_cuts(c: &FormalChain) -> Result<Vec<Cut>> {
    oracle_budget(c)?;
    let n = c.node_count();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    (1..full)
        .map(|mask| Cut::from_side(c, &mask_set(n, mask)))
        .collect()
}

fn mask_set(n: usize, mask: u32) -> NodeSet {
    NodeSet::from_nodes(n, (0..n).filter(|&v| mask >> v & 1 == 1))
}

/// Singleton-sourced cuts found by brute force over all bipartitions.
#[derive(Clone, Debug, Default)]
pub struct SourcedCutOracle {
    /// `(i, j)` to the cut with sources `({i}, {j})`.
    pub cuts: BTreeMap<(NodeId, NodeId), Cut>,
    /// Ordered pairs seen with more than one cut.
    pub duplicates: Vec<(NodeId, NodeId)>,
}

/// Brute-force enumeration of singleton-sourced cuts.
pub fn enumerate_sourced_cuts(c: &FormalChain) -> Result<SourcedCutOracle> {
    oracle_budget(c)?;
    let g = c.graph();
    let n = g.node_count();
    let full: u32 = (1u32 << n) - 1;
    let out_mask: Vec<u32> = (0..n)
        .map(|u| g.successors(u).iter().fold(0u32, |m, &v| m | 1 << v))
        .collect();
    let mut oracle = SourcedCutOracle::default();
    for mask in 1..full {
        let rest = full & !mask;
        let emitters = |side: u32, other: u32| -> u32 {
            (0..n)
                .filter(|&u| side >> u & 1 == 1 && out_mask[u] & other != 0)
                .fold(0u32, |m, u| m | 1 << u)
        };
        let (sa, sb) = (emitters(mask, rest), emitters(rest, mask));
        if sa.count_ones() != 1 || sb.count_ones() != 1 {
            continue;
        }
        let key = (sa.trailing_zeros() as usize, sb.trailing_zeros() as usize);
        if oracle.cuts.contains_key(&key) {
            oracle.duplicates.push(key);
            continue;
        }
        oracle.cuts.insert(
            key,
            Cut {
                side_a: mask_set(n, mask),
                side_b: mask_set(n, rest),
                source_a: mask_set(n, sa),
                source_b: mask_set(n, sb),
            },
        );
    }
    Ok(oracle)
}

/// Two probability assignments that separate `π_i / π_j` for a pair that is
/// not joint-ancestor free.
#[derive(Clone, Debug)]
pub struct WitnessPair {
    pub i: NodeId,
    pub j: NodeId,
    pub joint_ancestor: NodeId,
    /// `k → … → i` avoiding `j`.
    pub path_a: Vec<NodeId>,
    /// `k → … → j` avoiding `i`.
    pub path_b: Vec<NodeId>,
    pub epsilon: f64,
    pub q_a: RateAssignment,
    pub q_b: RateAssignment,
}

impl WitnessPair {
    /// `(π^a_i / π^a_j, π^b_i / π^b_j)` from two dense solves.
    pub fn ratios(&self, c: &FormalChain) -> Result<(f64, f64)> {
        let pa = stationary(c, &self.q_a)?;
        let pb = stationary(c, &self.q_b)?;
        Ok((pa.get(self.i) / pa.get(self.j), pb.get(self.i) / pb.get(self.j)))
    }
}

/// Builds the witness pair, or `None` when `i` and `j` are joint-ancestor free.
///
/// The joint ancestor `k` minimizes its shortest-path distance to `i` (ties
/// to the smallest index); the base assignment is uniform per node.
pub fn theorem3_witness(c: &FormalChain, i: NodeId, j: NodeId) -> Result<Option<WitnessPair>> {
    let g = c.graph();
    g.check_node(i, "node")?;
    g.check_node(j, "node")?;
    if i == j {
        return invalid("witness needs two distinct nodes");
    }
    let (ai, aj) = mutually_avoiding_ancestors(c, &g.singleton(i), &g.singleton(j))?;
    let joint = ai.intersection(&aj);
    if joint.is_empty() {
        return Ok(None);
    }
    let (si, sj) = (g.singleton(i), g.singleton(j));
    let mut best: Option<(usize, NodeId, Vec<NodeId>)> = None;
    for k in joint.iter() {
        let a = shortest_path(g, k, i, &sj)?
            .ok_or_else(|| Error::Internal("joint ancestor cannot reach i".into()))?;
        if best.as_ref().is_none_or(|(len, _, _)| a.len() < *len) {
            best = Some((a.len(), k, a));
        }
    }
    let (_, k, path_a) = best.expect("joint set is nonempty");
    let path_b = shortest_path(g, k, j, &si)?
        .ok_or_else(|| Error::Internal("joint ancestor cannot reach j".into()))?;
    if path_a[1..].iter().any(|v| path_b[1..].contains(v)) {
        return Err(Error::Internal("witness paths share a node other than k".into()));
    }
    let (la, lb) = (path_a.len() - 1, path_b.len() - 1);
    let epsilon = 1.0 / (3.0 * la.max(lb) as f64);

    let base = |u: NodeId| 1.0 / g.successors(u).len() as f64;
    let mut common = BTreeMap::new();
    // Interior path nodes push 1 − ε to their successor on the path.
    let mut steer = BTreeMap::new();
    for path in [&path_a, &path_b] {
        for w in path[1..path.len() - 1].iter().zip(&path[2..]) {
            steer.insert(*w.0, *w.1);
        }
    }
    for u in 0..g.node_count() {
        if u == k {
            continue;
        }
        let succ = g.successors(u);
        match steer.get(&u) {
            Some(&next) if succ.len() > 1 => {
                let rest = (succ.len() - 1) as f64;
                for &v in succ {
                    let x = if v == next { 1.0 - epsilon } else { epsilon / rest };
                    common.insert((u, v), x);
                }
            }
            _ => {
                for &v in succ {
                    common.insert((u, v), base(u));
                }
            }
        }
    }
    let (a2, b2) = (path_a[1], path_b[1]);
    let others: Vec<NodeId> = g
        .successors(k)
        .iter()
        .copied()
        .filter(|&v| v != a2 && v != b2)
        .collect();
    let minor = if others.is_empty() { epsilon } else { epsilon / 2.0 };
    let at_k = |major: NodeId, small: NodeId| {
        let mut values = common.clone();
        values.insert((k, major), 1.0 - epsilon);
        values.insert((k, small), minor);
        for &v in &others {
            values.insert((k, v), epsilon / 2.0 / others.len() as f64);
        }
        RateAssignment::new(c, ChainKind::Dtmc, values)
    };
    let q_a = at_k(a2, b2)?;
    let q_b = at_k(b2, a2)?;
    Ok(Some(WitnessPair {
        i,
        j,
        joint_ancestor: k,
        path_a,
        path_b,
        epsilon,
        q_a,
        q_b,
    }))
}

/// Worst residual of one relation over a seed sweep.
#[derive(Clone, Debug)]
pub struct RelationCheck {
    pub relation: Relation,
    pub residual_max: f64,
    pub seeds: Vec<u64>,
}

impl RelationCheck {
    pub fn to_json(&self, c: &FormalChain) -> Value {
        let g = c.graph();
        json!({
            "nodes": [g.label(self.relation.lhs_node), g.label(self.relation.rhs_node)],
            "level": self.relation.level.name(),
            "relation": self.relation.render(g),
            "residual_max": self.residual_max,
            "seeds": self.seeds,
        })
    }
}

/// Solves once per seed and records each relation's worst residual.
pub fn verify_relations(
    c: &FormalChain,
    relations: &[Relation],
    seeds: &[u64],
    kind: ChainKind,
) -> Result<Vec<RelationCheck>> {
    let mut worst = vec![0.0f64; relations.len()];
    for &seed in seeds {
        let rates = random_rates(c, seed, kind);
        let pi = stationary(c, &rates)?;
        for (w, r) in worst.iter_mut().zip(relations) {
            *w = w.max(verify_relation(&pi, &rates, r)?);
        }
    }
    Ok(relations
        .iter()
        .zip(worst)
        .map(|(r, residual_max)| RelationCheck {
            relation: r.clone(),
            residual_max,
            seeds: seeds.to_vec(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{generate, ModelSpec};
    use crate::product_form::{cut_graph, is_jaf, s_relation, sourced_cut};
    use crate::graph::DirectedGraph;

    fn chain(spec: ModelSpec) -> FormalChain {
        generate(&spec).unwrap()
    }

    #[test]
    fn two_node_birth_death() {
        let c = chain(ModelSpec::BirthDeath { n: 2 });
        let r = RateAssignment::new(
            &c,
            ChainKind::Ctmc,
            [((0, 1), 1.0), ((1, 0), 2.0)].into_iter().collect(),
        )
        .unwrap();
        let pi = stationary(&c, &r).unwrap();
        assert!((pi.get(0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((pi.get(1) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_two_way_cycle_is_uniform() {
        let c = chain(ModelSpec::TwoWayCycle { n: 3 });
        let values = c.graph().edges().map(|e| (e, 1.0)).collect();
        let r = RateAssignment::new(&c, ChainKind::Ctmc, values).unwrap();
        let pi = stationary(&c, &r).unwrap();
        for v in 0..3 {
            assert!((pi.get(v) - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn one_way_cycle_flows_match() {
        let c = chain(ModelSpec::OneWayCycle { n: 5 });
        let r = random_rates(&c, 7, ChainKind::Ctmc);
        let pi = stationary(&c, &r).unwrap();
        let flow = |i: usize| pi.get(i) * r.get(i, (i + 1) % 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((flow(i) - flow(j)).abs() <= 1e-10 * (flow(i) + flow(j)));
            }
        }
    }

    #[test]
    fn rate_assignment_validation() {
        let c = chain(ModelSpec::BirthDeath { n: 2 });
        let bad = [((0, 1), 1.0)].into_iter().collect();
        assert!(RateAssignment::new(&c, ChainKind::Ctmc, bad).is_err());
        let neg = [((0, 1), 1.0), ((1, 0), -2.0)].into_iter().collect();
        assert!(RateAssignment::new(&c, ChainKind::Ctmc, neg).is_err());
        let unnormalized = [((0, 1), 1.0), ((1, 0), 2.0)].into_iter().collect();
        assert!(RateAssignment::new(&c, ChainKind::Dtmc, unnormalized).is_err());
    }

    #[test]
    fn random_rates_are_deterministic_and_positive() {
        let c = chain(ModelSpec::msj_default());
        assert_eq!(random_rates(&c, 3, ChainKind::Ctmc), random_rates(&c, 3, ChainKind::Ctmc));
        let draws: Vec<_> = (0..20).map(|s| random_rates(&c, s, ChainKind::Ctmc)).collect();
        for (a, ra) in draws.iter().enumerate() {
            assert!(ra.values().values().all(|&x| (0.1..=10.0).contains(&x)));
            assert!(RateAssignment::new(&c, ChainKind::Ctmc, ra.values().clone()).is_ok());
            for rb in &draws[a + 1..] {
                assert_ne!(ra, rb);
            }
        }
        let d = random_rates(&c, 3, ChainKind::Dtmc);
        assert!(RateAssignment::new(&c, ChainKind::Dtmc, d.values().clone()).is_ok());
    }

    #[test]
    fn dtmc_and_ctmc_agree_under_uniform_totals() {
        // Scaling every row by the same total leaves π unchanged.
        let c = chain(ModelSpec::FigTwoToy);
        let d = random_rates(&c, 11, ChainKind::Dtmc);
        let scaled = d.values().iter().map(|(&e, &x)| (e, 4.0 * x)).collect();
        let ct = RateAssignment::new(&c, ChainKind::Ctmc, scaled).unwrap();
        let (p1, p2) = (stationary(&c, &d).unwrap(), stationary(&c, &ct).unwrap());
        for v in 0..c.node_count() {
            assert!((p1.get(v) - p2.get(v)).abs() <= 1e-10 * p1.get(v));
        }
    }

    #[test]
    fn s_relations_verify_and_corrupted_one_fails() {
        let c = chain(ModelSpec::FigTwoToy);
        let r = random_rates(&c, 1, ChainKind::Ctmc);
        let pi = stationary(&c, &r).unwrap();
        let c1 = cut_graph(&c);
        for &(i, j) in c1.edges() {
            let rel = s_relation(&c, i, j).unwrap().unwrap();
            assert!(verify_relation(&pi, &r, &rel).unwrap() <= 1e-10);
        }
        // π_2 q_{2,1} = π_1 q_{1,5} + π_4 q_{4,5}
        let res = verify_terms(
            &pi,
            &r,
            &[(2, FactorExpr::atom(2, 1))],
            &[(1, FactorExpr::atom(1, 5)), (4, FactorExpr::atom(4, 5))],
        )
        .unwrap();
        assert!(res <= 1e-10);

        let c = chain(ModelSpec::TwoWayCycle { n: 5 });
        let r = random_rates(&c, 2, ChainKind::Ctmc);
        let pi = stationary(&c, &r).unwrap();
        let fake = Relation::new(0, FactorExpr::atom(0, 1), 1, FactorExpr::atom(1, 2)).unwrap();
        assert!(verify_relation(&pi, &r, &fake).unwrap() > 1e-6);
    }

    #[test]
    fn every_cut_equation_holds() {
        let c = chain(ModelSpec::FigTwoToy);
        let r = random_rates(&c, 5, ChainKind::Ctmc);
        let pi = stationary(&c, &r).unwrap();
        let cuts = all_cuts(&c).unwrap();
        assert_eq!(cuts.len(), (1 << 7) - 2);
        for cut in &cuts {
            assert!(cut_equation_check(&c, &pi, &r, cut).unwrap() <= 1e-10);
        }
        // Birth-death cut i: π_i q_{i,i+1} = π_{i+1} q_{i+1,i}.
        let c = chain(ModelSpec::BirthDeath { n: 6 });
        let r = random_rates(&c, 5, ChainKind::Ctmc);
        let pi = stationary(&c, &r).unwrap();
        for i in 0..5 {
            let cut = Cut::from_side(&c, &c.graph().set_of(&(0..=i).collect::<Vec<_>>())).unwrap();
            assert_eq!(cut.edges_a_to_b(c.graph()), vec![(i, i + 1)]);
            assert!(cut_equation_check(&c, &pi, &r, &cut).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn oracle_examples() {
        let c = chain(ModelSpec::FigTwoToy);
        let o = enumerate_sourced_cuts(&c).unwrap();
        for (i, j) in [(0, 1), (1, 4), (2, 5), (3, 6)] {
            assert!(o.cuts.contains_key(&(i, j)) && o.cuts.contains_key(&(j, i)));
        }
        assert!(o.duplicates.is_empty());

        let c = chain(ModelSpec::TwoWayCycle { n: 4 });
        assert!(enumerate_sourced_cuts(&c).unwrap().cuts.is_empty());

        let c = chain(ModelSpec::OneWayCycle { n: 4 });
        let o = enumerate_sourced_cuts(&c).unwrap();
        assert_eq!(o.cuts.len(), 12);
        assert!(o.duplicates.is_empty());
        for (&(i, j), cut) in &o.cuts {
            assert_eq!(sourced_cut(&c, i, j).unwrap().as_ref(), Some(cut));
        }

        let big = DirectedGraph::with_index_labels(21, &(0..21).map(|i| (i, (i + 1) % 21)).collect::<Vec<_>>()).unwrap();
        let big = FormalChain::new(big, ChainKind::Ctmc).unwrap();
        assert!(matches!(enumerate_sourced_cuts(&big), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn witness_examples() {
        let c = chain(ModelSpec::TwoWayCycle { n: 5 });
        let (i, j) = (c.id("1").unwrap(), c.id("3").unwrap());
        let w = theorem3_witness(&c, i, j).unwrap().unwrap();
        assert_eq!(c.graph().label(w.joint_ancestor), "2");
        assert_eq!(w.path_a, vec![c.id("2").unwrap(), i]);
        assert_eq!(w.path_b, vec![c.id("2").unwrap(), j]);
        let (ra, rb) = w.ratios(&c).unwrap();
        assert!((ra / rb - 1.0).abs() > 1e-3);

        let c = chain(ModelSpec::BirthDeath { n: 6 });
        let w = theorem3_witness(&c, 1, 3).unwrap().unwrap();
        assert_eq!(w.joint_ancestor, 2);
        let (ra, rb) = w.ratios(&c).unwrap();
        assert!((ra / rb - 1.0).abs() > 1e-3);

        let c = chain(ModelSpec::OneWayCycle { n: 5 });
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    assert!(theorem3_witness(&c, a, b).unwrap().is_none());
                }
            }
        }
    }

    #[test]
    fn witness_invariants_on_fig2() {
        let c = chain(ModelSpec::FigTwoToy);
        let g = c.graph();
        for i in 0..7 {
            for j in 0..7 {
                if i == j || is_jaf(&c, &g.singleton(i), &g.singleton(j)).unwrap() {
                    continue;
                }
                let w = theorem3_witness(&c, i, j).unwrap().unwrap();
                let k = w.joint_ancestor;
                assert_eq!((w.path_a[0], w.path_b[0]), (k, k));
                assert_eq!((*w.path_a.last().unwrap(), *w.path_b.last().unwrap()), (i, j));
                let longest = (w.path_a.len().max(w.path_b.len()) - 1) as f64;
                assert!(w.epsilon <= 1.0 / (3.0 * longest) + 1e-15);
                let differ: Vec<_> = w
                    .q_a
                    .values()
                    .iter()
                    .filter(|(e, x)| w.q_b.get(e.0, e.1) != Some(**x))
                    .map(|(e, _)| *e)
                    .collect();
                let mut expect = vec![(k, w.path_a[1]), (k, w.path_b[1])];
                expect.sort();
                assert_eq!(differ, expect);
                let (ra, rb) = w.ratios(&c).unwrap();
                assert!((ra / rb - 1.0).abs() > 1e-3, "pair ({i}, {j})");
            }
        }
    }

    #[test]
    fn solver_budget_guard() {
        let n = MAX_SOLVER_NODES + 1;
        let g = DirectedGraph::with_index_labels(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap();
        let c = FormalChain::new(g, ChainKind::Ctmc).unwrap();
        let r = random_rates(&c, 0, ChainKind::Ctmc);
        assert!(matches!(stationary(&c, &r), Err(Error::ResourceLimit { .. })));
    }
}
