//! First-level analysis: joint-ancestor freeness, single-sourced cuts, S
//! factors, the cut graph `C1(G)`, and the clique predicate on `C1(G)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{invalid, Error, Result};
use crate::factors::{FactorExpr, Relation};
use crate::graph::{
    ancestors_avoiding, is_strongly_connected, unreachable_pair, DirectedGraph, NodeId, NodeSet,
};

/// Whether edge values are rates or probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainKind {
    Ctmc,
    Dtmc,
}

impl ChainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChainKind::Ctmc => "ctmc",
            ChainKind::Dtmc => "dtmc",
        }
    }

    pub fn parse(s: &str) -> Result<ChainKind> {
        match s {
            "ctmc" => Ok(ChainKind::Ctmc),
            "dtmc" => Ok(ChainKind::Dtmc),
            other => invalid(format!("unknown chain kind {other:?}, expected ctmc or dtmc")),
        }
    }
}

/// A strongly connected transition diagram whose edge values are free symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalChain {
    graph: DirectedGraph,
    kind: ChainKind,
}

impl FormalChain {
    /// Admits `graph` if it is strongly connected.
    pub fn new(graph: DirectedGraph, kind: ChainKind) -> Result<FormalChain> {
        if graph.node_count() == 0 {
            return invalid("a formal chain needs at least one node");
        }
        if let Some((u, v)) = unreachable_pair(&graph) {
            return Err(Error::NotStronglyConnected {
                from: graph.label(u).to_string(),
                to: graph.label(v).to_string(),
            });
        }
        debug_assert!(is_strongly_connected(&graph));
        Ok(FormalChain { graph, kind })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn node(&self, label: &str) -> Option<NodeId> {
        self.graph.index_of(label)
    }

    /// Index of a node label; fails on unknown labels.
    pub fn id(&self, label: &str) -> Result<NodeId> {
        self.node(label)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown node label {label:?}")))
    }
}

/// A bipartition `(A, B)` with its source pair `(I, J)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub side_a: NodeSet,
    pub side_b: NodeSet,
    pub source_a: NodeSet,
    pub source_b: NodeSet,
}

impl Cut {
    /// The cut `(side_a, V \ side_a)` with sources computed from the edges.
    pub fn from_side(c: &FormalChain, side_a: &NodeSet) -> Result<Cut> {
        let (source_a, source_b) = cut_source(c, side_a)?;
        Ok(Cut {
            side_a: side_a.clone(),
            side_b: side_a.complement(),
            source_a,
            source_b,
        })
    }

    /// Edges from `A` into `B`, in edge order.
    pub fn edges_a_to_b(&self, g: &DirectedGraph) -> Vec<(NodeId, NodeId)> {
        crossing(g, &self.side_a, &self.side_b)
    }

    /// Edges from `B` into `A`, in edge order.
    pub fn edges_b_to_a(&self, g: &DirectedGraph) -> Vec<(NodeId, NodeId)> {
        crossing(g, &self.side_b, &self.side_a)
    }

    /// The same cut seen from the other side.
    pub fn swapped(&self) -> Cut {
        Cut {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
            source_a: self.source_b.clone(),
            source_b: self.source_a.clone(),
        }
    }
}

fn crossing(g: &DirectedGraph, from: &NodeSet, to: &NodeSet) -> Vec<(NodeId, NodeId)> {
    from.iter()
        .flat_map(|u| g.successors(u).iter().map(move |&v| (u, v)))
        .filter(|&(_, v)| to.contains(v))
        .collect()
}

/// Source pair of the cut `(side_a, V \ side_a)`: the nodes on each side with
/// an edge into the other side.
pub fn cut_source(c: &FormalChain, side_a: &NodeSet) -> Result<(NodeSet, NodeSet)> {
    let g = c.graph();
    g.check_set(side_a, "cut side")?;
    if side_a.is_empty() || side_a.len() == g.node_count() {
        return invalid("a cut side must be a nonempty proper subset");
    }
    let side_b = side_a.complement();
    let emits = |from: &NodeSet, to: &NodeSet| {
        NodeSet::from_nodes(
            g.node_count(),
            from.iter().filter(|&u| g.successors(u).iter().any(|&v| to.contains(v))),
        )
    };
    Ok((emits(side_a, &side_b), emits(&side_b, side_a)))
}

/// `(A_I(G \ J), A_J(G \ I))`.
pub fn mutually_avoiding_ancestors(
    c: &FormalChain,
    i_set: &NodeSet,
    j_set: &NodeSet,
) -> Result<(NodeSet, NodeSet)> {
    let g = c.graph();
    g.check_set(i_set, "I")?;
    g.check_set(j_set, "J")?;
    if i_set.is_empty() || j_set.is_empty() {
        return invalid("mutually-avoiding ancestors need nonempty node sets");
    }
    if !i_set.is_disjoint(j_set) {
        return invalid("mutually-avoiding ancestors need disjoint node sets");
    }
    Ok((
        ancestors_avoiding(g, i_set, j_set),
        ancestors_avoiding(g, j_set, i_set),
    ))
}

/// True iff `I` and `J` have no joint ancestor.
pub fn is_jaf(c: &FormalChain, i_set: &NodeSet, j_set: &NodeSet) -> Result<bool> {
    let (a, b) = mutually_avoiding_ancestors(c, i_set, j_set)?;
    Ok(a.is_disjoint(&b))
}

fn check_pair(c: &FormalChain, i: NodeId, j: NodeId) -> Result<()> {
    c.graph().check_node(i, "node")?;
    c.graph().check_node(j, "node")?;
    if i == j {
        return invalid(format!("a node pair needs two distinct nodes, got {i} twice"));
    }
    Ok(())
}

/// The unique `i,j`-sourced cut `(A_i(G \ j), A_j(G \ i))`, or `None` when the
/// pair is not joint-ancestor free.
pub fn sourced_cut(c: &FormalChain, i: NodeId, j: NodeId) -> Result<Option<Cut>> {
    check_pair(c, i, j)?;
    let g = c.graph();
    let (a, b) = mutually_avoiding_ancestors(c, &g.singleton(i), &g.singleton(j))?;
    if !a.is_disjoint(&b) {
        return Ok(None);
    }
    let cut = Cut::from_side(c, &a)?;
    if cut.side_b != b || cut.source_a != g.singleton(i) || cut.source_b != g.singleton(j) {
        return Err(Error::Internal(format!(
            "cut for joint-ancestor-free pair ({}, {}) has sources {} and {}",
            g.label(i),
            g.label(j),
            g.format_set(&cut.source_a),
            g.format_set(&cut.source_b)
        )));
    }
    Ok(Some(cut))
}

/// `(f_{i,j}, f_{j,i})` with `f_{i,j} = Σ q_{i,k}` over `k ∈ A_j(G \ i)`.
pub fn s_factors(c: &FormalChain, i: NodeId, j: NodeId) -> Result<Option<(FactorExpr, FactorExpr)>> {
    let Some(cut) = sourced_cut(c, i, j)? else {
        return Ok(None);
    };
    let g = c.graph();
    let side_sum = |src: NodeId, other: &NodeSet| {
        FactorExpr::rate_sum(src, g.successors(src).iter().copied().filter(|&k| other.contains(k)))
    };
    Ok(Some((side_sum(i, &cut.side_b)?, side_sum(j, &cut.side_a)?)))
}

/// The S relation `π_i f_{i,j} = π_j f_{j,i}` for a joint-ancestor-free pair.
pub fn s_relation(c: &FormalChain, i: NodeId, j: NodeId) -> Result<Option<Relation>> {
    match s_factors(c, i, j)? {
        Some((fij, fji)) => Relation::new(i, fij, j, fji).map(Some),
        None => Ok(None),
    }
}

/// Union-find partition of `0..n` along `links`; components ordered by their
/// smallest member.
pub(crate) fn partition(
    n: usize,
    links: impl IntoIterator<Item = (NodeId, NodeId)>,
) -> (Vec<NodeSet>, Vec<usize>) {
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for (a, b) in links {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut comp_of_root = BTreeMap::new();
    let mut component_of = vec![0; n];
    let mut components: Vec<NodeSet> = Vec::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        let id = *comp_of_root.entry(r).or_insert_with(|| {
            components.push(NodeSet::empty(n));
            components.len() - 1
        });
        components[id].insert(v);
        component_of[v] = id;
    }
    (components, component_of)
}

/// The undirected graph of joint-ancestor-free pairs, with its components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutGraph {
    node_count: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
    components: Vec<NodeSet>,
    component_of: Vec<usize>,
}

impl CutGraph {
    /// Builds from unordered pairs; every node of `0..n` is a vertex.
    pub fn from_edges(n: usize, pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> CutGraph {
        let edges: BTreeSet<_> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in adjacency.iter_mut() {
            nbrs.sort_unstable();
        }
        let (components, component_of) = partition(n, edges.iter().copied());
        CutGraph {
            node_count: n,
            edges,
            adjacency,
            components,
            component_of,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Unordered pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.edges
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Components ordered by smallest member.
    pub fn components(&self) -> &[NodeSet] {
        &self.components
    }

    pub fn component_of(&self, v: NodeId) -> usize {
        self.component_of[v]
    }

    /// Shortest path in the cut graph, ties broken by smallest index.
    pub fn path(&self, src: NodeId, dst: NodeId) -> Option<Vec<NodeId>> {
        let mut dist = vec![usize::MAX; self.node_count];
        dist[dst] = 0;
        let mut queue = VecDeque::from([dst]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        if dist[src] == usize::MAX {
            return None;
        }
        let mut path = vec![src];
        let mut cur = src;
        while cur != dst {
            cur = *self.adjacency[cur]
                .iter()
                .find(|&&w| dist[w] + 1 == dist[cur])
                .expect("BFS distance labels admit a descending neighbor");
            path.push(cur);
        }
        Some(path)
    }
}

/// `C1(G)`: one mutually-avoiding-ancestor call per unordered pair.
pub fn cut_graph(c: &FormalChain) -> CutGraph {
    let g = c.graph();
    let n = g.node_count();
    let mut pairs = Vec::new();
    for i in 0..n {
        let si = g.singleton(i);
        for j in i + 1..n {
            let sj = g.singleton(j);
            let a = ancestors_avoiding(g, &si, &sj);
            let b = ancestors_avoiding(g, &sj, &si);
            if a.is_disjoint(&b) {
                pairs.push((i, j));
            }
        }
    }
    CutGraph::from_edges(n, pairs)
}

/// Territories and quotient cycle of a clique of `C1(G)`.
#[derive(Clone, Debug)]
pub struct CliqueAnalysis {
    pub clique: NodeSet,
    /// `V_i = A_i(G \ (K \ {i}))`.
    pub territories: BTreeMap<NodeId, NodeSet>,
    /// Quotient `Q` on the clique members, node `p` standing for the `p`-th
    /// smallest member.
    pub quotient: DirectedGraph,
    members: Vec<NodeId>,
}

impl CliqueAnalysis {
    /// Clique members in index order.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    /// `(⋃_{m ∈ A_i(Q \ j)} V_m, ⋃_{m ∈ A_j(Q \ i)} V_m)`.
    pub fn predicted_cut(&self, i: NodeId, j: NodeId) -> Result<(NodeSet, NodeSet)> {
        let pos = |v: NodeId| {
            self.members
                .binary_search(&v)
                .map_err(|_| Error::InvalidArgument(format!("node {v} is not in the clique")))
        };
        let (pi, pj) = (pos(i)?, pos(j)?);
        if pi == pj {
            return invalid("predicted_cut needs two distinct clique members");
        }
        let q = &self.quotient;
        let lift = |set: NodeSet| {
            let n = self.clique.capacity();
            set.iter().fold(NodeSet::empty(n), |acc, p| {
                acc.union(&self.territories[&self.members[p]])
            })
        };
        let a = ancestors_avoiding(q, &q.singleton(pi), &q.singleton(pj));
        let b = ancestors_avoiding(q, &q.singleton(pj), &q.singleton(pi));
        Ok((lift(a), lift(b)))
    }
}

/// Accepts `k` iff its territories partition `V` and the quotient is a single
/// directed cycle.
pub fn clique_check(c: &FormalChain, k: &NodeSet) -> Result<Option<CliqueAnalysis>> {
    let g = c.graph();
    g.check_set(k, "clique")?;
    if k.len() < 2 {
        return invalid("clique_check needs at least two nodes");
    }
    let members = k.to_vec();
    let mut territories = BTreeMap::new();
    for &i in &members {
        let mut others = k.clone();
        others.remove(i);
        territories.insert(i, ancestors_avoiding(g, &g.singleton(i), &others));
    }
    let mut cover = g.empty_set();
    for t in territories.values() {
        if !cover.is_disjoint(t) {
            return Ok(None);
        }
        cover = cover.union(t);
    }
    if cover != g.full_set() {
        return Ok(None);
    }
    let owner: Vec<usize> = (0..g.node_count())
        .map(|v| {
            members
                .iter()
                .position(|m| territories[m].contains(v))
                .expect("territories cover V")
        })
        .collect();
    let mut q_edges = BTreeSet::new();
    for (u, v) in g.edges() {
        if owner[u] != owner[v] {
            q_edges.insert((owner[u], owner[v]));
        }
    }
    let labels = members.iter().map(|&m| g.label(m).to_string()).collect();
    let quotient = DirectedGraph::new(labels, &q_edges.into_iter().collect::<Vec<_>>())?;
    let is_cycle = (0..members.len()).all(|p| {
        quotient.successors(p).len() == 1 && quotient.predecessors(p).len() == 1
    }) && is_strongly_connected(&quotient);
    if !is_cycle {
        return Ok(None);
    }
    Ok(Some(CliqueAnalysis {
        clique: k.clone(),
        territories,
        quotient,
        members,
    }))
}
