//! Cuts between components of the cut graph: narrow second-level cuts, the
//! recursive hypergraphs `C2(G), C3(G), …`, SPS relations across a hyperedge,
//! the broad-cut subset search, and the conjecture harness built on it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::factors::{FactorExpr, Relation};
use crate::graph::{DirectedGraph, NodeId, NodeSet};
use crate::product_form::{
    cut_graph, is_jaf, mutually_avoiding_ancestors, partition, s_relation, sourced_cut, Cut,
    CutGraph, FormalChain,
};

/// Default bound on `|K1| + |K2|` for the broad-cut search.
pub const DEFAULT_MAX_SUBSET_SIZE: usize = 12;

/// A cut whose sources lie in two components of the previous level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperEdge {
    pub level: u32,
    pub source_i: NodeSet,
    pub source_j: NodeSet,
    /// Component ids in the previous level's partition.
    pub comp_i: usize,
    pub comp_j: usize,
    pub members_i: NodeSet,
    pub members_j: NodeSet,
    pub cut: Cut,
}

impl HyperEdge {
    /// `(min source_i, min source_j)`, the pair the hyperedge links.
    pub fn anchor(&self) -> (NodeId, NodeId) {
        (
            self.source_i.first().expect("sources are nonempty"),
            self.source_j.first().expect("sources are nonempty"),
        )
    }

    pub fn to_json(&self, g: &DirectedGraph) -> Value {
        json!({
            "level": self.level,
            "source_i": g.labels_of(&self.source_i),
            "source_j": g.labels_of(&self.source_j),
            "component_i": g.labels_of(&self.members_i),
            "component_j": g.labels_of(&self.members_j),
            "cut_a": g.labels_of(&self.cut.side_a),
            "cut_b": g.labels_of(&self.cut.side_b),
        })
    }
}

/// One level of the recursion: the hyperedges found between the previous
/// level's components and the partition after merging along them.
#[derive(Clone, Debug)]
pub struct CutHypergraph {
    pub level: u32,
    pub base_components: Vec<NodeSet>,
    pub hyperedges: Vec<HyperEdge>,
    pub components: Vec<NodeSet>,
}

impl CutHypergraph {
    pub fn to_json(&self, g: &DirectedGraph) -> Value {
        json!({
            "level": self.level,
            "hyperedges": self.hyperedges.iter().map(|h| h.to_json(g)).collect::<Vec<_>>(),
            "components": self.components.iter().map(|k| g.labels_of(k)).collect::<Vec<_>>(),
        })
    }
}

/// Pairwise joint-ancestor-freeness scan over a partition.
fn scan_components(c: &FormalChain, comps: &[NodeSet], level: u32) -> Result<Vec<HyperEdge>> {
    let mut out = Vec::new();
    for a in 0..comps.len() {
        for b in a + 1..comps.len() {
            let (ka, kb) = (&comps[a], &comps[b]);
            let (side_a, side_b) = mutually_avoiding_ancestors(c, ka, kb)?;
            if !side_a.is_disjoint(&side_b) {
                continue;
            }
            let cut = Cut::from_side(c, &side_a)?;
            if cut.side_b != side_b {
                return Err(Error::Internal(
                    "mutually avoiding ancestors of disjoint sets do not cover V".into(),
                ));
            }
            if cut.source_a.is_empty()
                || cut.source_b.is_empty()
                || !cut.source_a.is_subset(ka)
                || !cut.source_b.is_subset(kb)
            {
                return Err(Error::Internal(
                    "hyperedge sources escape their components".into(),
                ));
            }
            out.push(HyperEdge {
                level,
                source_i: cut.source_a.clone(),
                source_j: cut.source_b.clone(),
                comp_i: a,
                comp_j: b,
                members_i: ka.clone(),
                members_j: kb.clone(),
                cut,
            });
        }
    }
    Ok(out)
}

/// Narrow second-level cuts between components of `c1`.
pub fn narrow_second_level_cuts(c: &FormalChain, c1: &CutGraph) -> Result<Vec<HyperEdge>> {
    scan_components(c, c1.components(), 2)
}

fn merge(n: usize, comps: &[NodeSet], hyperedges: &[HyperEdge]) -> Vec<NodeSet> {
    let (groups, _) = partition(comps.len(), hyperedges.iter().map(|h| (h.comp_i, h.comp_j)));
    let mut merged: Vec<NodeSet> = groups
        .iter()
        .map(|grp| grp.iter().fold(NodeSet::empty(n), |acc, k| acc.union(&comps[k])))
        .collect();
    merged.sort();
    merged
}

/// Levels `2..=max_level`, stopping once a level adds nothing or a single
/// component remains.
pub fn higher_level_cut_graph(c: &FormalChain, max_level: u32) -> Result<Vec<CutHypergraph>> {
    higher_levels_from(c, &cut_graph(c), max_level)
}

fn higher_levels_from(c: &FormalChain, c1: &CutGraph, max_level: u32) -> Result<Vec<CutHypergraph>> {
    if max_level < 2 {
        return invalid(format!("higher levels start at 2, got max level {max_level}"));
    }
    let n = c.node_count();
    let mut comps: Vec<NodeSet> = c1.components().to_vec();
    let mut levels = Vec::new();
    for level in 2..=max_level {
        if comps.len() <= 1 {
            break;
        }
        let hyperedges = scan_components(c, &comps, level)?;
        let merged = merge(n, &comps, &hyperedges);
        let done = hyperedges.is_empty();
        levels.push(CutHypergraph {
            level,
            base_components: std::mem::replace(&mut comps, merged.clone()),
            hyperedges,
            components: merged,
        });
        if done {
            break;
        }
    }
    Ok(levels)
}

/// Relations known between node pairs, composed along shortest link paths.
#[derive(Clone, Debug)]
pub struct Linkage {
    n: usize,
    links: BTreeMap<(NodeId, NodeId), Relation>,
    adjacency: Vec<BTreeSet<NodeId>>,
}

impl Linkage {
    pub fn new(n: usize) -> Linkage {
        Linkage {
            n,
            links: BTreeMap::new(),
            adjacency: vec![BTreeSet::new(); n],
        }
    }

    /// The S relations of every `C1` edge.
    pub fn from_cut_graph(c: &FormalChain, c1: &CutGraph) -> Result<Linkage> {
        let mut l = Linkage::new(c.node_count());
        for &(i, j) in c1.edges() {
            let r = s_relation(c, i, j)?
                .ok_or_else(|| Error::Internal("cut graph edge without an S relation".into()))?;
            l.add(r);
        }
        Ok(l)
    }

    /// Adds a link; an existing link for the same pair is kept.
    pub fn add(&mut self, r: Relation) {
        let key = (r.lhs_node, r.rhs_node);
        if self.links.contains_key(&key) {
            return;
        }
        self.adjacency[key.0].insert(key.1);
        self.adjacency[key.1].insert(key.0);
        self.links.insert(key, r);
    }

    pub fn links(&self) -> impl Iterator<Item = &Relation> {
        self.links.values()
    }

    fn link(&self, a: NodeId, b: NodeId) -> &Relation {
        &self.links[&(a.min(b), a.max(b))]
    }

    /// Shortest link path, ties broken by smallest index.
    pub fn path(&self, src: NodeId, dst: NodeId) -> Option<Vec<NodeId>> {
        let mut dist = vec![usize::MAX; self.n];
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

    /// Relation between `a` and `b` chained along the link path.
    pub fn relation(&self, a: NodeId, b: NodeId) -> Result<Option<Relation>> {
        if a == b {
            return invalid("a relation needs two distinct nodes");
        }
        let Some(path) = self.path(a, b) else {
            return Ok(None);
        };
        let mut r = self.link(path[0], path[1]).clone();
        for w in path[1..].windows(2) {
            r = r.chain(self.link(w[0], w[1]))?;
        }
        Ok(Some(r))
    }

    /// `π_to / π_from`, or `None` when `from = to`.
    fn ratio(&self, from: NodeId, to: NodeId) -> Result<Option<FactorExpr>> {
        if from == to {
            return Ok(None);
        }
        let r = self.relation(from, to)?.ok_or_else(|| {
            Error::Internal(format!("nodes {from} and {to} share a component but no link path"))
        })?;
        Ok(Some(r.ratio_from(from)?))
    }

    /// SPS relation across `h` between `i_star` and `j_star`:
    /// `π_{i*} Σ_i (π_i/π_{i*}) Σ_{b∈B} q_{i,b} = π_{j*} Σ_j (π_j/π_{j*}) Σ_{a∈A} q_{j,a}`
    /// over the sources of each side.
    pub fn sps_relation(
        &self,
        c: &FormalChain,
        h: &HyperEdge,
        i_star: NodeId,
        j_star: NodeId,
    ) -> Result<Relation> {
        let g = c.graph();
        if !h.members_i.contains(i_star) || !h.members_j.contains(j_star) {
            return invalid(format!(
                "nodes {} and {} must lie in the hyperedge's components {} and {}",
                g.label(i_star),
                g.label(j_star),
                g.format_set(&h.members_i),
                g.format_set(&h.members_j)
            ));
        }
        let side = |star: NodeId, sources: &NodeSet, far: &NodeSet| -> Result<FactorExpr> {
            let mut terms = Vec::new();
            for i in sources.iter() {
                let rates = FactorExpr::rate_sum(
                    i,
                    g.successors(i).iter().copied().filter(|&v| far.contains(v)),
                )?;
                terms.push(match self.ratio(star, i)? {
                    None => rates,
                    Some(ratio) => FactorExpr::product(vec![(ratio, 1), (rates, 1)])?,
                });
            }
            FactorExpr::sum(terms)
        };
        let lhs = side(i_star, &h.source_i, &h.cut.side_b)?;
        let rhs = side(j_star, &h.source_j, &h.cut.side_a)?;
        Relation::new(i_star, lhs, j_star, rhs)
    }
}

/// SPS relation across a second-level hyperedge, with ratios composed along
/// shortest `C1` paths inside each component.
pub fn sps_relation(c: &FormalChain, h: &HyperEdge, i_star: NodeId, j_star: NodeId) -> Result<Relation> {
    if h.level != 2 {
        return invalid(format!(
            "sps_relation composes over C1 paths and needs a level-2 hyperedge, got level {}",
            h.level
        ));
    }
    Linkage::from_cut_graph(c, &cut_graph(c))?.sps_relation(c, h, i_star, j_star)
}

/// Every JAF pair of nonempty subsets `I ⊆ k1`, `J ⊆ k2`, sorted.
pub fn broad_cut_search(
    c: &FormalChain,
    k1: &NodeSet,
    k2: &NodeSet,
    max_subset_size: usize,
) -> Result<Vec<(NodeSet, NodeSet)>> {
    let g = c.graph();
    g.check_set(k1, "component")?;
    g.check_set(k2, "component")?;
    if k1.is_empty() || k2.is_empty() || !k1.is_disjoint(k2) {
        return invalid("broad cut search needs two nonempty disjoint node sets");
    }
    let total = k1.len() + k2.len();
    if total > max_subset_size {
        return Err(Error::ResourceLimit {
            what: "broad cut search |K1| + |K2|".into(),
            limit: max_subset_size,
            actual: total,
        });
    }
    let subsets = |k: &NodeSet| -> Vec<NodeSet> {
        let members = k.to_vec();
        (1u32..1 << members.len())
            .map(|mask| {
                g.set_of(
                    &members
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| mask >> b & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect::<Vec<_>>(),
                )
            })
            .collect()
    };
    let (s1, s2) = (subsets(k1), subsets(k2));
    let mut out = Vec::new();
    for i in &s1 {
        for j in &s2 {
            if is_jaf(c, i, j)? {
                out.push((i.clone(), j.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Outcome of the subset scan for one pair of `C1` components.
#[derive(Clone, Debug)]
pub struct ComponentPairFinding {
    pub k1: NodeSet,
    pub k2: NodeSet,
    pub narrow: bool,
    pub broad: Vec<(NodeSet, NodeSet)>,
    /// Broad pairs with no one-node extension among the broad pairs.
    pub unextendable: Vec<(NodeSet, NodeSet)>,
}

impl ComponentPairFinding {
    /// Broad cuts exist but the components are not JAF.
    pub fn contradicts_first(&self) -> bool {
        !self.broad.is_empty() && !self.narrow
    }
}

/// Findings of the conjecture harness on one chain.
#[derive(Clone, Debug, Default)]
pub struct ConjectureReport {
    pub findings: Vec<ComponentPairFinding>,
    /// Component pairs over the subset budget.
    pub skipped: usize,
}

impl ConjectureReport {
    pub fn first_counterexamples(&self) -> impl Iterator<Item = &ComponentPairFinding> {
        self.findings.iter().filter(|f| f.contradicts_first())
    }

    pub fn second_violations(&self) -> impl Iterator<Item = &ComponentPairFinding> {
        self.findings.iter().filter(|f| !f.unextendable.is_empty())
    }

    pub fn to_json(&self, g: &DirectedGraph) -> Value {
        let pairs = |ps: &[(NodeSet, NodeSet)]| -> Value {
            ps.iter()
                .map(|(i, j)| json!([g.labels_of(i), g.labels_of(j)]))
                .collect()
        };
        json!({
            "component_pairs": self.findings.len(),
            "skipped": self.skipped,
            "non_jaf_pairs_with_broad_cuts": self.first_counterexamples().count(),
            "pairs_with_unextendable_broad_cuts": self.second_violations().count(),
            "findings": self.findings.iter().filter(|f| !f.broad.is_empty()).map(|f| json!({
                "k1": g.labels_of(&f.k1),
                "k2": g.labels_of(&f.k2),
                "narrow": f.narrow,
                "broad": pairs(&f.broad),
                "unextendable": pairs(&f.unextendable),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Broad-cut scan over all `C1` component pairs within the subset budget.
pub fn conjecture_harness(c: &FormalChain, max_subset_size: usize) -> Result<ConjectureReport> {
    let c1 = cut_graph(c);
    let comps = c1.components();
    let mut report = ConjectureReport::default();
    for a in 0..comps.len() {
        for b in a + 1..comps.len() {
            let (k1, k2) = (&comps[a], &comps[b]);
            let broad = match broad_cut_search(c, k1, k2, max_subset_size) {
                Ok(found) => found,
                Err(Error::ResourceLimit { .. }) => {
                    report.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let narrow = is_jaf(c, k1, k2)?;
            let known: BTreeSet<&(NodeSet, NodeSet)> = broad.iter().collect();
            let extends = |(i, j): &(NodeSet, NodeSet)| {
                k1.difference(i).iter().any(|v| {
                    let mut bigger = i.clone();
                    bigger.insert(v);
                    known.contains(&(bigger, j.clone()))
                }) || k2.difference(j).iter().any(|v| {
                    let mut bigger = j.clone();
                    bigger.insert(v);
                    known.contains(&(i.clone(), bigger))
                })
            };
            let unextendable = broad
                .iter()
                .filter(|p| !(p.0 == *k1 && p.1 == *k2) && !extends(p))
                .cloned()
                .collect();
            report.findings.push(ComponentPairFinding {
                k1: k1.clone(),
                k2: k2.clone(),
                narrow,
                broad,
                unextendable,
            });
        }
    }
    Ok(report)
}

/// Everything the analysis derives from the graph structure.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub c1: CutGraph,
    /// Sourced cut of every `C1` edge `(i, j)`, `i < j`.
    pub c1_cuts: Vec<((NodeId, NodeId), Cut)>,
    pub levels: Vec<CutHypergraph>,
    /// S relations of `C1` edges, then one relation per hyperedge anchor.
    pub relations: Vec<Relation>,
    pub linkage: Linkage,
}

/// `C1`, the hypergraph levels up to `max_level`, and their relations.
pub fn analyze(c: &FormalChain, max_level: u32) -> Result<Analysis> {
    let c1 = cut_graph(c);
    let mut linkage = Linkage::from_cut_graph(c, &c1)?;
    let mut relations: Vec<Relation> = linkage.links().cloned().collect();
    let mut c1_cuts = Vec::new();
    for &(i, j) in c1.edges() {
        let cut = sourced_cut(c, i, j)?
            .ok_or_else(|| Error::Internal("cut graph edge without a sourced cut".into()))?;
        c1_cuts.push(((i, j), cut));
    }
    let levels = if max_level >= 2 {
        higher_levels_from(c, &c1, max_level)?
    } else {
        Vec::new()
    };
    for level in &levels {
        // Anchor relations of one level only use links from lower levels.
        let base = linkage.clone();
        for h in &level.hyperedges {
            let (a, b) = h.anchor();
            let r = base.sps_relation(c, h, a, b)?;
            relations.push(r.clone());
            linkage.add(r);
        }
    }
    Ok(Analysis {
        c1,
        c1_cuts,
        levels,
        relations,
        linkage,
    })
}

impl Analysis {
    pub fn to_json(&self, c: &FormalChain) -> Value {
        let g = c.graph();
        json!({
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "c1": {
                "edges": self.c1.edges().iter().map(|&(i, j)| json!([g.label(i), g.label(j)])).collect::<Vec<_>>(),
                "components": self.c1.components().iter().map(|k| g.labels_of(k)).collect::<Vec<_>>(),
            },
            "levels": self.levels.iter().map(|l| l.to_json(g)).collect::<Vec<_>>(),
            "relations": self.relations.iter().map(|r| r.to_json(g)).collect::<Vec<_>>(),
        })
    }
}
