//! Directed graphs over dense node indices, node bitsets, and the reachability
//! primitives (ancestor sets, set-avoiding subgraphs, shortest paths) used by
//! every analysis layer.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{invalid, Result};

/// Dense node index, contiguous in `0..node_count`.
pub type NodeId = usize;

/// A set of nodes of one graph, stored as a bitset over its index range.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    bits: FixedBitSet,
}

impl NodeSet {
    /// The empty set over `n` nodes.
    pub fn empty(n: usize) -> Self {
        NodeSet {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    /// The full set `0..n`.
    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        NodeSet { bits }
    }

    /// The set `{v}` over `n` nodes.
    pub fn singleton(n: usize, v: NodeId) -> Self {
        let mut s = NodeSet::empty(n);
        s.insert(v);
        s
    }

    /// Builds a set over `n` nodes from the given members.
    ///
    /// # Panics
    /// If a member is out of range.
    pub fn from_nodes(n: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut s = NodeSet::empty(n);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    /// Size of the index range the set lives in.
    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    /// Adds `v`; panics if `v` is out of range.
    pub fn insert(&mut self, v: NodeId) {
        assert!(v < self.capacity(), "node {v} out of range");
        self.bits.insert(v);
    }

    pub fn remove(&mut self, v: NodeId) {
        if v < self.capacity() {
            self.bits.set(v, false);
        }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.iter().collect()
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<NodeId> {
        self.iter().next()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        NodeSet { bits }
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        NodeSet { bits }
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        NodeSet { bits }
    }

    /// Complement within the index range.
    pub fn complement(&self) -> NodeSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        NodeSet { bits }
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.bits.is_subset(&other.bits)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Lexicographic order on the sorted member lists.
impl Ord for NodeSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter()
            .cmp(other.iter())
            .then(self.capacity().cmp(&other.capacity()))
    }
}

impl PartialOrd for NodeSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite directed graph with unique node labels and no duplicate edges.
///
/// Both adjacency directions are stored and kept sorted, so the reverse graph
/// never needs to be rebuilt per query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl DirectedGraph {
    /// Builds a graph from labels and index pairs.
    ///
    /// Rejects duplicate labels, out-of-range endpoints and duplicate edges.
    /// Self-loops are allowed.
    pub fn new(labels: Vec<String>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return invalid(format!("duplicate node label {label:?}"));
            }
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) references a node outside 0..{n}"));
            }
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        for (u, succ) in out_adj.iter_mut().enumerate() {
            succ.sort_unstable();
            if let Some(w) = succ.windows(2).find(|w| w[0] == w[1]) {
                return invalid(format!(
                    "duplicate edge {} -> {}",
                    labels[u], labels[w[0]]
                ));
            }
        }
        for pred in in_adj.iter_mut() {
            pred.sort_unstable();
        }
        Ok(DirectedGraph {
            labels,
            index,
            out_adj,
            in_adj,
            edge_count: edges.len(),
        })
    }

    /// Builds a graph whose labels are the decimal indices `0..n`.
    pub fn with_index_labels(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        DirectedGraph::new((0..n).map(|i| i.to_string()).collect(), edges)
    }

    /// Builds a graph from label strings and label-pair edges.
    pub fn from_labeled(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let lookup: HashMap<&str, NodeId> =
            labels.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut idx = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            match (lookup.get(a), lookup.get(b)) {
                (Some(&u), Some(&v)) => idx.push((u, v)),
                _ => return invalid(format!("edge ({a}, {b}) references an undeclared node")),
            }
        }
        DirectedGraph::new(owned, &idx)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// Sorted successors of `v`.
    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v]
    }

    /// Sorted predecessors of `v`.
    pub fn predecessors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.out_adj[u].binary_search(&v).is_ok()
    }

    /// All edges ordered by source, then target.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, succ)| succ.iter().map(move |&v| (u, v)))
    }

    /// The graph with every edge reversed.
    pub fn reverse(&self) -> DirectedGraph {
        DirectedGraph {
            labels: self.labels.clone(),
            index: self.index.clone(),
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
            edge_count: self.edge_count,
        }
    }

    pub fn empty_set(&self) -> NodeSet {
        NodeSet::empty(self.node_count())
    }

    pub fn full_set(&self) -> NodeSet {
        NodeSet::full(self.node_count())
    }

    pub fn singleton(&self, v: NodeId) -> NodeSet {
        NodeSet::singleton(self.node_count(), v)
    }

    pub fn set_of(&self, nodes: &[NodeId]) -> NodeSet {
        NodeSet::from_nodes(self.node_count(), nodes.iter().copied())
    }

    /// Looks up a set by labels.
    pub fn set_of_labels(&self, labels: &[&str]) -> Result<NodeSet> {
        let mut s = self.empty_set();
        for l in labels {
            match self.index_of(l) {
                Some(v) => s.insert(v),
                None => return invalid(format!("unknown node label {l:?}")),
            }
        }
        Ok(s)
    }

    /// Node labels of a set in index order.
    pub fn labels_of(&self, set: &NodeSet) -> Vec<String> {
        set.iter().map(|v| self.labels[v].clone()).collect()
    }

    /// Renders a set as `{a, b, c}`.
    pub fn format_set(&self, set: &NodeSet) -> String {
        format!("{{{}}}", self.labels_of(set).join(", "))
    }

    /// Checks that `set` belongs to this graph's index range.
    pub(crate) fn check_set(&self, set: &NodeSet, what: &str) -> Result<()> {
        if set.capacity() != self.node_count() {
            return invalid(format!(
                "{what} has capacity {}, graph has {} nodes",
                set.capacity(),
                self.node_count()
            ));
        }
        Ok(())
    }

    pub(crate) fn check_node(&self, v: NodeId, what: &str) -> Result<()> {
        if v >= self.node_count() {
            return invalid(format!("{what} {v} is not a node of the graph"));
        }
        Ok(())
    }
}

/// Which adjacency direction a frontier search follows.
#[derive(Clone, Copy)]
enum Direction {
    /// Follow in-edges: collects ancestors.
    Backward,
    /// Follow out-edges: collects descendants.
    Forward,
}

/// Frontier search from `seed` in `g \ avoid`, reporting every examined edge
/// as `(tail, head)` in the original orientation.
fn frontier_search(
    g: &DirectedGraph,
    seed: &NodeSet,
    avoid: Option<&NodeSet>,
    dir: Direction,
    mut on_edge: impl FnMut(NodeId, NodeId),
) -> NodeSet {
    let mut reached = match avoid {
        Some(u) => seed.difference(u),
        None => seed.clone(),
    };
    let mut frontier: Vec<NodeId> = reached.to_vec();
    let mut next = Vec::new();
    while !frontier.is_empty() {
        for &v in &frontier {
            let nbrs = match dir {
                Direction::Backward => g.predecessors(v),
                Direction::Forward => g.successors(v),
            };
            for &w in nbrs {
                match dir {
                    Direction::Backward => on_edge(w, v),
                    Direction::Forward => on_edge(v, w),
                }
                if reached.contains(w) || avoid.is_some_and(|u| u.contains(w)) {
                    continue;
                }
                reached.insert(w);
                next.push(w);
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    reached
}

/// Ancestor set `A_seed(g)`: every node with a path of length ≥ 0 into `seed`.
///
/// Frontier search over in-edges; each edge is examined at most once.
pub fn ancestors(g: &DirectedGraph, seed: &NodeSet) -> Result<NodeSet> {
    g.check_set(seed, "seed")?;
    if seed.is_empty() {
        return invalid("ancestor seed set is empty");
    }
    Ok(frontier_search(g, seed, None, Direction::Backward, |_, _| {}))
}

/// Ancestor set of `seed` in the set-avoiding subgraph `g \ avoid`, without
/// materializing the subgraph. Seed members inside `avoid` are dropped.
pub fn ancestors_avoiding(g: &DirectedGraph, seed: &NodeSet, avoid: &NodeSet) -> NodeSet {
    frontier_search(g, seed, Some(avoid), Direction::Backward, |_, _| {})
}

/// As [`ancestors_avoiding`], also returning how often each edge was examined.
pub fn ancestors_instrumented(
    g: &DirectedGraph,
    seed: &NodeSet,
    avoid: &NodeSet,
) -> (NodeSet, BTreeMap<(NodeId, NodeId), usize>) {
    let mut visits = BTreeMap::new();
    let set = frontier_search(g, seed, Some(avoid), Direction::Backward, |u, v| {
        *visits.entry((u, v)).or_insert(0) += 1;
    });
    (set, visits)
}

/// Descendant set of `seed` (nodes reachable from it).
pub fn descendants(g: &DirectedGraph, seed: &NodeSet) -> NodeSet {
    frontier_search(g, seed, None, Direction::Forward, |_, _| {})
}

/// The set-avoiding subgraph `G \ U` with its index map back to the parent.
#[derive(Clone, Debug)]
pub struct AvoidingSubgraph {
    pub graph: DirectedGraph,
    /// `to_parent[v]` is the parent index of subgraph node `v`.
    pub to_parent: Vec<NodeId>,
}

impl AvoidingSubgraph {
    /// Subgraph index of a parent node, if it survived.
    pub fn from_parent(&self, v: NodeId) -> Option<NodeId> {
        self.to_parent.binary_search(&v).ok()
    }
}

/// Builds `(V \ u, {(i, j) ∈ E : i, j ∉ u})`.
pub fn set_avoiding_subgraph(g: &DirectedGraph, u: &NodeSet) -> Result<AvoidingSubgraph> {
    g.check_set(u, "avoided set")?;
    let keep = u.complement();
    if keep.is_empty() {
        return invalid("avoiding every node leaves an empty graph");
    }
    let to_parent = keep.to_vec();
    let mut local = vec![usize::MAX; g.node_count()];
    for (i, &v) in to_parent.iter().enumerate() {
        local[v] = i;
    }
    let labels = to_parent.iter().map(|&v| g.label(v).to_string()).collect();
    let edges: Vec<(NodeId, NodeId)> = g
        .edges()
        .filter(|&(a, b)| keep.contains(a) && keep.contains(b))
        .map(|(a, b)| (local[a], local[b]))
        .collect();
    Ok(AvoidingSubgraph {
        graph: DirectedGraph::new(labels, &edges)?,
        to_parent,
    })
}

/// Returns `(u, v)` such that there is no path from `u` to `v`, or `None` when
/// the graph is strongly connected. An empty graph has no pair.
pub fn unreachable_pair(g: &DirectedGraph) -> Option<(NodeId, NodeId)> {
    if g.node_count() == 0 {
        return None;
    }
    let root = g.singleton(0);
    let anc = frontier_search(g, &root, None, Direction::Backward, |_, _| {});
    if let Some(u) = anc.complement().first() {
        return Some((u, 0));
    }
    let desc = descendants(g, &root);
    desc.complement().first().map(|v| (0, v))
}

/// True iff every node reaches every other node. The empty graph is not
/// strongly connected.
pub fn is_strongly_connected(g: &DirectedGraph) -> bool {
    g.node_count() > 0 && unreachable_pair(g).is_none()
}

/// A minimum-length path `src … dst` in `g \ avoid`, ties broken by the
/// smallest next-node index. `None` when `dst` is unreachable.
pub fn shortest_path(
    g: &DirectedGraph,
    src: NodeId,
    dst: NodeId,
    avoid: &NodeSet,
) -> Result<Option<Vec<NodeId>>> {
    g.check_node(src, "source")?;
    g.check_node(dst, "target")?;
    g.check_set(avoid, "avoided set")?;
    if avoid.contains(src) || avoid.contains(dst) {
        return invalid("shortest_path endpoints must lie outside the avoided set");
    }
    // Distances to dst over in-edges, then a greedy walk forward.
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[dst] = 0;
    let mut queue = VecDeque::from([dst]);
    while let Some(v) = queue.pop_front() {
        for &p in g.predecessors(v) {
            if dist[p] == usize::MAX && !avoid.contains(p) {
                dist[p] = dist[v] + 1;
                queue.push_back(p);
            }
        }
    }
    if dist[src] == usize::MAX {
        return Ok(None);
    }
    let mut path = vec![src];
    let mut cur = src;
    while cur != dst {
        cur = *g
            .successors(cur)
            .iter()
            .find(|&&w| dist[w] < dist[cur] && dist[w] + 1 == dist[cur])
            .expect("BFS distance labels admit a descending successor");
        path.push(cur);
    }
    Ok(Some(path))
}
