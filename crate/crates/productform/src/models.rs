//! Generators for the example chains, plus the expectations the examples fix
//! (cut-graph edges, cut equations, hyperedge sources, closed forms).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::factors::{compose_ps, FactorExpr, Relation};
use crate::graph::{DirectedGraph, NodeId};
use crate::product_form::{cut_graph, ChainKind, FormalChain};

/// Largest server count the multiserver-job generator accepts.
pub const MAX_MSJ_SERVERS: usize = 400;

/// An example family with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelSpec {
    /// Truncated birth-and-death process on `0..n`.
    BirthDeath { n: usize },
    /// Directed cycle `1 → 2 → … → n → 1`.
    OneWayCycle { n: usize },
    /// One-way cycle with an extra edge `1 → k`.
    OneWayCyclePlusEdge { n: usize, k: usize },
    /// Cycle with both directions on every edge.
    TwoWayCycle { n: usize },
    /// Bidirectional tree in heap layout: node `v > 0` hangs off `(v − 1) / 2`.
    Tree { n: usize },
    /// `levels` superstates of `width` states each; each superstate carries an
    /// inner directed cycle, its last state jumps up and its first jumps down.
    QbdToy { levels: usize, width: usize },
    /// The seven-node toy whose cuts 0 to 5 are listed in its figure.
    FigTwoToy,
    /// Saturated two-class multiserver-job system, arrival-and-completion DTMC.
    MsjSaturated { c1: usize, c2: usize, servers: usize },
    /// Batch arrivals truncated at the next multiple of `multiple`, states up
    /// to `truncation`.
    BatchV1 { multiple: usize, truncation: usize },
    /// Batches of size 1 or 2, states up to `truncation`.
    BatchV2 { truncation: usize },
    /// Nine-node graph containing the clique `{1, 5, 6, 8, 9}`.
    CliqueFig7,
}

impl ModelSpec {
    pub fn msj_default() -> ModelSpec {
        ModelSpec::MsjSaturated {
            c1: 3,
            c2: 10,
            servers: 30,
        }
    }

    pub fn batch_v1_default() -> ModelSpec {
        ModelSpec::BatchV1 {
            multiple: 3,
            truncation: 8,
        }
    }

    pub fn batch_v2_default() -> ModelSpec {
        ModelSpec::BatchV2 { truncation: 6 }
    }

    pub fn qbd_default() -> ModelSpec {
        ModelSpec::QbdToy {
            levels: 4,
            width: 2,
        }
    }

    /// Family name as used on the command line.
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::BirthDeath { .. } => "birthdeath",
            ModelSpec::OneWayCycle { .. } => "oneway",
            ModelSpec::OneWayCyclePlusEdge { .. } => "oneway-edge",
            ModelSpec::TwoWayCycle { .. } => "twoway",
            ModelSpec::Tree { .. } => "tree",
            ModelSpec::QbdToy { .. } => "qbd",
            ModelSpec::FigTwoToy => "fig2",
            ModelSpec::MsjSaturated { .. } => "msj",
            ModelSpec::BatchV1 { .. } => "batchv1",
            ModelSpec::BatchV2 { .. } => "batchv2",
            ModelSpec::CliqueFig7 => "fig7",
        }
    }

    /// Document name, e.g. `msj_3_10_30`.
    pub fn name(&self) -> String {
        let params: Vec<usize> = match *self {
            ModelSpec::BirthDeath { n }
            | ModelSpec::OneWayCycle { n }
            | ModelSpec::TwoWayCycle { n }
            | ModelSpec::Tree { n } => vec![n],
            ModelSpec::OneWayCyclePlusEdge { n, k } => vec![n, k],
            ModelSpec::QbdToy { levels, width } => vec![levels, width],
            ModelSpec::MsjSaturated { c1, c2, servers } => vec![c1, c2, servers],
            ModelSpec::BatchV1 {
                multiple,
                truncation,
            } => vec![multiple, truncation],
            ModelSpec::BatchV2 { truncation } => vec![truncation],
            ModelSpec::FigTwoToy | ModelSpec::CliqueFig7 => vec![],
        };
        std::iter::once(self.family().to_string())
            .chain(params.iter().map(|p| p.to_string()))
            .collect::<Vec<_>>()
            .join("_")
    }

    /// The process kind the example is stated for.
    pub fn kind(&self) -> ChainKind {
        match self {
            ModelSpec::MsjSaturated { .. } | ModelSpec::BatchV1 { .. } | ModelSpec::BatchV2 { .. } => {
                ChainKind::Dtmc
            }
            _ => ChainKind::Ctmc,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::BirthDeath { n } | ModelSpec::Tree { n } if n < 1 => {
                invalid(format!("{} needs n >= 1, got {n}", self.family()))
            }
            ModelSpec::OneWayCycle { n } | ModelSpec::TwoWayCycle { n } if n < 3 => {
                invalid(format!("{} needs n >= 3, got {n}", self.family()))
            }
            ModelSpec::OneWayCyclePlusEdge { n, k } if n < 3 || k < 3 || k > n => {
                invalid(format!("oneway-edge needs n >= 3 and 3 <= k <= n, got n={n}, k={k}"))
            }
            ModelSpec::QbdToy { levels, width } if levels < 1 || width < 1 => invalid(format!(
                "qbd needs levels >= 1 and width >= 1, got levels={levels}, width={width}"
            )),
            ModelSpec::MsjSaturated { c1, c2, servers } => {
                if c1 < 1 || c2 < 1 {
                    return invalid(format!("msj needs c1, c2 >= 1, got c1={c1}, c2={c2}"));
                }
                if c1 > servers || c2 > servers {
                    return invalid(format!(
                        "msj needs c1 <= servers and c2 <= servers, got c1={c1}, c2={c2}, servers={servers}"
                    ));
                }
                if servers > MAX_MSJ_SERVERS {
                    return Err(Error::ResourceLimit {
                        what: "msj server count".into(),
                        limit: MAX_MSJ_SERVERS,
                        actual: servers,
                    });
                }
                Ok(())
            }
            ModelSpec::BatchV1 {
                multiple,
                truncation,
            } if multiple < 1 || truncation < 1 => invalid(format!(
                "batchv1 needs multiple >= 1 and truncation >= 1, got multiple={multiple}, truncation={truncation}"
            )),
            ModelSpec::BatchV2 { truncation } if truncation < 1 => {
                invalid(format!("batchv2 needs truncation >= 1, got {truncation}"))
            }
            _ => Ok(()),
        }
    }
}

/// Builds a chain from labels and labeled edges.
struct Builder {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            labels: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }

    fn node(&mut self, label: impl Into<String>) -> NodeId {
        let label = label.into();
        if let Some(&v) = self.index.get(&label) {
            return v;
        }
        self.labels.push(label.clone());
        self.index.insert(label, self.labels.len() - 1);
        self.labels.len() - 1
    }

    fn edge(&mut self, from: &str, to: &str) {
        let (u, v) = (self.index[from], self.index[to]);
        self.edges.push((u, v));
    }

    fn finish(self, kind: ChainKind) -> Result<FormalChain> {
        FormalChain::new(DirectedGraph::new(self.labels, &self.edges)?, kind)
    }
}

fn bar(k: usize) -> String {
    format!("bar{k}")
}

/// Generates the chain for `spec`, labeled as in the examples.
pub fn generate(spec: &ModelSpec) -> Result<FormalChain> {
    spec.validate()?;
    let kind = spec.kind();
    match *spec {
        ModelSpec::BirthDeath { n } => {
            let edges: Vec<_> = (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)]).collect();
            FormalChain::new(DirectedGraph::with_index_labels(n, &edges)?, kind)
        }
        ModelSpec::OneWayCycle { n } => cycle(n, false, None, kind),
        ModelSpec::OneWayCyclePlusEdge { n, k } => cycle(n, false, Some(k), kind),
        ModelSpec::TwoWayCycle { n } => cycle(n, true, None, kind),
        ModelSpec::Tree { n } => {
            let edges: Vec<_> = (1..n).flat_map(|v| [((v - 1) / 2, v), (v, (v - 1) / 2)]).collect();
            FormalChain::new(DirectedGraph::with_index_labels(n, &edges)?, kind)
        }
        ModelSpec::QbdToy { levels, width } => qbd(levels, width, kind),
        ModelSpec::FigTwoToy => {
            let edges = [
                (1, 0),
                (2, 1),
                (3, 2),
                (0, 4),
                (1, 5),
                (2, 6),
                (4, 5),
                (5, 6),
                (4, 1),
                (5, 2),
                (6, 3),
            ];
            FormalChain::new(DirectedGraph::with_index_labels(7, &edges)?, kind)
        }
        ModelSpec::CliqueFig7 => {
            let labels: Vec<String> = (1..=9).map(|i| i.to_string()).collect();
            let edges = [
                (1, 2),
                (1, 4),
                (2, 3),
                (2, 4),
                (3, 2),
                (3, 4),
                (3, 5),
                (4, 5),
                (5, 3),
                (5, 6),
                (6, 7),
                (6, 8),
                (7, 8),
                (8, 7),
                (8, 9),
                (9, 1),
            ];
            let edges: Vec<_> = edges.iter().map(|&(u, v)| (u - 1, v - 1)).collect();
            FormalChain::new(DirectedGraph::new(labels, &edges)?, kind)
        }
        ModelSpec::MsjSaturated { c1, c2, servers } => msj(c1, c2, servers, kind),
        ModelSpec::BatchV1 {
            multiple,
            truncation,
        } => batch(truncation, kind, |b, k| {
            if k % multiple != 0 && k < truncation {
                b.edge(&bar(k), &bar(k + 1));
            }
        }),
        ModelSpec::BatchV2 { truncation } => batch(truncation, kind, |b, k| {
            if k < truncation {
                b.edge(&bar(k), &(k + 1).to_string());
            }
        }),
    }
}

fn cycle(n: usize, both: bool, extra: Option<usize>, kind: ChainKind) -> Result<FormalChain> {
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    if both {
        edges.extend((0..n).map(|i| ((i + 1) % n, i)));
    }
    if let Some(k) = extra {
        edges.push((0, k - 1));
    }
    FormalChain::new(DirectedGraph::new(labels, &edges)?, kind)
}

fn qbd(levels: usize, width: usize, kind: ChainKind) -> Result<FormalChain> {
    let mut b = Builder::new();
    let label = |j: usize, t: usize| format!("s{j}_{t}");
    for j in 0..levels {
        for t in 0..width {
            b.node(label(j, t));
        }
    }
    for j in 0..levels {
        if width > 1 {
            for t in 0..width {
                b.edge(&label(j, t), &label(j, (t + 1) % width));
            }
        }
        if j + 1 < levels {
            for t in 0..width {
                b.edge(&label(j, width - 1), &label(j + 1, t));
                b.edge(&label(j + 1, 0), &label(j, t));
            }
        }
    }
    b.finish(kind)
}

/// Labels of the up state of superstate `j` and the down state of `j + 1`.
pub fn qbd_boundary_pairs(levels: usize, width: usize) -> Vec<(String, String)> {
    (0..levels.saturating_sub(1))
        .map(|j| (format!("s{j}_{}", width - 1), format!("s{}_0", j + 1)))
        .collect()
}

fn batch(
    truncation: usize,
    kind: ChainKind,
    continuation: impl Fn(&mut Builder, usize),
) -> Result<FormalChain> {
    let mut b = Builder::new();
    b.node("0");
    for k in 1..=truncation {
        b.node(k.to_string());
        b.node(bar(k));
    }
    for k in 1..=truncation {
        let (here, below) = (k.to_string(), (k - 1).to_string());
        b.edge(&here, &below);
        b.edge(&below, &bar(k));
        b.edge(&bar(k), &here);
        continuation(&mut b, k);
    }
    b.finish(kind)
}

/// `(class-1 in service, class-2 in service, class-2 queued)`.
type MsjState = (usize, usize, bool);

fn msj(c1: usize, c2: usize, servers: usize, kind: ChainKind) -> Result<FormalChain> {
    let free = |s: MsjState| servers - c1 * s.0 - c2 * s.1;
    let arrival = |s: MsjState| !s.2 && free(s) >= c1;
    // A queued class-2 job enters as soon as it fits.
    let settle = |s: MsjState| {
        if s.2 && free(s) >= c2 {
            (s.0, s.1 + 1, false)
        } else {
            s
        }
    };
    let step = |s: MsjState| -> Vec<MsjState> {
        if arrival(s) {
            let class2 = if free(s) >= c2 {
                (s.0, s.1 + 1, false)
            } else {
                (s.0, s.1, true)
            };
            vec![(s.0 + 1, s.1, false), class2]
        } else {
            let mut next = Vec::new();
            if s.0 > 0 {
                next.push(settle((s.0 - 1, s.1, s.2)));
            }
            if s.1 > 0 {
                next.push(settle((s.0, s.1 - 1, s.2)));
            }
            next
        }
    };

    let mut seen: BTreeMap<MsjState, Vec<MsjState>> = BTreeMap::new();
    let mut queue = VecDeque::from([(0, 0, false)]);
    while let Some(s) = queue.pop_front() {
        if seen.contains_key(&s) {
            continue;
        }
        let next = step(s);
        queue.extend(next.iter().copied().filter(|t| !seen.contains_key(t)));
        seen.insert(s, next);
    }
    let recurrent = bottom_component(&seen)?;

    let label = |s: MsjState| {
        if arrival(s) {
            bar(s.0)
        } else {
            s.0.to_string()
        }
    };
    let mut order: Vec<MsjState> = recurrent.iter().copied().collect();
    order.sort_by_key(|&s| (s.0, arrival(s)));
    let mut b = Builder::new();
    for &s in &order {
        let l = label(s);
        if b.index.contains_key(&l) {
            return invalid(format!(
                "msj parameters c1={c1}, c2={c2}, servers={servers} give two states labeled {l}"
            ));
        }
        b.node(l);
    }
    for &s in &order {
        let mut targets: Vec<MsjState> = seen[&s].clone();
        targets.sort();
        targets.dedup();
        for t in targets {
            b.edge(&label(s), &label(t));
        }
    }
    b.finish(kind)
}

/// The unique closed strongly connected class of a finite transition map.
fn bottom_component(next: &BTreeMap<MsjState, Vec<MsjState>>) -> Result<BTreeSet<MsjState>> {
    let reach = |s: MsjState| {
        let mut seen = BTreeSet::from([s]);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &next[&u] {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        seen
    };
    let mut bottoms: BTreeSet<BTreeSet<MsjState>> = BTreeSet::new();
    for &s in next.keys() {
        let r = reach(s);
        if r.iter().all(|&t| reach(t).contains(&s)) {
            bottoms.insert(r);
        }
    }
    match bottoms.len() {
        1 => Ok(bottoms.into_iter().next().expect("one class")),
        k => Err(Error::Internal(format!(
            "msj dynamics have {k} closed classes, expected exactly one"
        ))),
    }
}

/// `π_node Σ_t q_{node,t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermFixture {
    pub node: String,
    pub targets: Vec<String>,
}

/// `Σ lhs = Σ rhs` over terms `π_u Σ_t q_{u,t}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationFixture {
    pub level: u32,
    pub nodes: String,
    pub lhs: Vec<TermFixture>,
    pub rhs: Vec<TermFixture>,
}

type TermSide = Vec<(NodeId, FactorExpr)>;

impl EquationFixture {
    /// Resolves labels into `(node, factor)` terms.
    pub fn terms(&self, g: &DirectedGraph) -> Result<(TermSide, TermSide)> {
        let side = |ts: &[TermFixture]| -> Result<TermSide> {
            ts.iter()
                .map(|t| {
                    let u = resolve(g, &t.node)?;
                    let targets = t.targets.iter().map(|l| resolve(g, l)).collect::<Result<Vec<_>>>()?;
                    for &v in &targets {
                        if !g.has_edge(u, v) {
                            return invalid(format!("fixture atom q_{{{},{}}} is not an edge", t.node, g.label(v)));
                        }
                    }
                    Ok((u, FactorExpr::rate_sum(u, targets)?))
                })
                .collect()
        };
        Ok((side(&self.lhs)?, side(&self.rhs)?))
    }

    /// For one-term sides, `(u, atoms of f_u, v, atoms of f_v)` as edges.
    pub fn s_pair(&self, g: &DirectedGraph) -> Result<Option<SPair>> {
        if self.lhs.len() != 1 || self.rhs.len() != 1 {
            return Ok(None);
        }
        let one = |t: &TermFixture| -> Result<(NodeId, BTreeSet<(NodeId, NodeId)>)> {
            let u = resolve(g, &t.node)?;
            let atoms = t
                .targets
                .iter()
                .map(|l| resolve(g, l).map(|v| (u, v)))
                .collect::<Result<_>>()?;
            Ok((u, atoms))
        };
        let (a, b) = (one(&self.lhs[0])?, one(&self.rhs[0])?);
        Ok(Some((a.0, a.1, b.0, b.1)))
    }

    pub fn to_json(&self) -> Value {
        let side = |ts: &[TermFixture]| -> Value {
            ts.iter()
                .map(|t| json!({"node": t.node, "targets": t.targets}))
                .collect()
        };
        json!({"level": self.level, "nodes": self.nodes, "lhs": side(&self.lhs), "rhs": side(&self.rhs)})
    }
}

/// `(u, atoms of f_{u,v}, v, atoms of f_{v,u})`.
pub type SPair = (NodeId, BTreeSet<(NodeId, NodeId)>, NodeId, BTreeSet<(NodeId, NodeId)>);

fn resolve(g: &DirectedGraph, label: &str) -> Result<NodeId> {
    g.index_of(label)
        .ok_or_else(|| Error::InvalidArgument(format!("fixture names unknown node {label:?}")))
}

/// Expected sources of a hyperedge at a given level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperedgeFixture {
    pub level: u32,
    pub source_i: Vec<String>,
    pub source_j: Vec<String>,
}

/// `π_v = π_reference · ratios[v]` for every other node.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub reference: NodeId,
    pub ratios: BTreeMap<NodeId, FactorExpr>,
}

/// Expectations an example fixes.
#[derive(Clone, Debug, Default)]
pub struct Fixtures {
    /// The complete `C1` edge set, when the example fixes it.
    pub c1_exact: Option<Vec<(String, String)>>,
    /// Pairs that must be `C1` edges.
    pub c1_required: Vec<(String, String)>,
    /// Pairs that must not be `C1` edges.
    pub c1_forbidden: Vec<(String, String)>,
    pub equations: Vec<EquationFixture>,
    pub hyperedges: Vec<HyperedgeFixture>,
    /// Whether `hyperedges` lists every hyperedge up to its highest level.
    pub hyperedges_exact: bool,
    pub closed_form: Option<ClosedForm>,
    /// Two-node relations stated outright, e.g. the PSPS display.
    pub relations: Vec<Relation>,
}

impl Fixtures {
    pub fn to_json(&self, g: &DirectedGraph) -> Value {
        let pairs = |ps: &[(String, String)]| -> Value { ps.iter().map(|(a, b)| json!([a, b])).collect() };
        json!({
            "c1_exact": self.c1_exact.as_deref().map(pairs),
            "c1_required": pairs(&self.c1_required),
            "c1_forbidden": pairs(&self.c1_forbidden),
            "equations": self.equations.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
            "hyperedges": self.hyperedges.iter().map(|h| json!({
                "level": h.level, "source_i": h.source_i, "source_j": h.source_j,
            })).collect::<Vec<_>>(),
            "hyperedges_exact": self.hyperedges_exact,
            "closed_form": self.closed_form.as_ref().map(|cf| json!({
                "reference": g.label(cf.reference),
                "ratios": cf.ratios.iter().map(|(&v, e)| (g.label(v).to_string(), e.to_json(g))).collect::<serde_json::Map<_, _>>(),
            })),
            "relations": self.relations.iter().map(|r| r.to_json(g)).collect::<Vec<_>>(),
        })
    }
}

fn term(node: &str, targets: &[&str]) -> TermFixture {
    TermFixture {
        node: node.into(),
        targets: targets.iter().map(|t| t.to_string()).collect(),
    }
}

fn eq(level: u32, nodes: &str, lhs: Vec<TermFixture>, rhs: Vec<TermFixture>) -> EquationFixture {
    EquationFixture {
        level,
        nodes: nodes.into(),
        lhs,
        rhs,
    }
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn pair(a: impl ToString, b: impl ToString) -> (String, String) {
    (a.to_string(), b.to_string())
}

/// Expectations for `spec`, or `None` when the family fixes none.
pub fn expected_fixtures(spec: &ModelSpec) -> Result<Option<Fixtures>> {
    let c = generate(spec)?;
    let mut fx = Fixtures::default();
    match *spec {
        ModelSpec::BirthDeath { n } => {
            fx.c1_exact = Some((1..n).map(|i| pair(i - 1, i)).collect());
        }
        ModelSpec::Tree { n } => {
            fx.c1_exact = Some((1..n).map(|v| pair((v - 1) / 2, v)).collect());
        }
        ModelSpec::OneWayCycle { n } => {
            fx.c1_exact = Some((1..=n).flat_map(|i| (i + 1..=n).map(move |j| pair(i, j))).collect());
        }
        ModelSpec::OneWayCyclePlusEdge { n, k } => {
            fx.c1_forbidden = (2..k).flat_map(|i| (k..=n).map(move |j| pair(i, j))).collect();
        }
        ModelSpec::TwoWayCycle { .. } => fx.c1_exact = Some(Vec::new()),
        ModelSpec::QbdToy { levels, width } => fx.c1_required = qbd_boundary_pairs(levels, width),
        ModelSpec::FigTwoToy => {
            fx.c1_required = vec![pair(0, 1), pair(1, 4), pair(2, 5), pair(3, 6)];
            fx.equations = vec![
                eq(1, "cut 0", vec![term("1", &["0"])], vec![term("0", &["4"])]),
                eq(1, "cut 1", vec![term("4", &["1", "5"])], vec![term("1", &["0"])]),
                eq(1, "cut 2", vec![term("2", &["1"])], vec![term("1", &["5"]), term("4", &["5"])]),
                eq(1, "cut 3", vec![term("5", &["2", "6"])], vec![term("2", &["1"])]),
                eq(1, "cut 4", vec![term("3", &["2"])], vec![term("2", &["6"]), term("5", &["6"])]),
                eq(1, "cut 5", vec![term("6", &["3"])], vec![term("3", &["2"])]),
            ];
        }
        ModelSpec::CliqueFig7 => {
            let k = ["1", "5", "6", "8", "9"];
            fx.c1_required = k
                .iter()
                .enumerate()
                .flat_map(|(a, x)| k[a + 1..].iter().map(move |y| pair(x, y)))
                .collect();
        }
        ModelSpec::MsjSaturated {
            c1: 3,
            c2: 10,
            servers: 30,
        } => {
            let mut edges = Vec::new();
            for i in 0..10 {
                edges.push(pair(i, bar(i)));
                edges.push(pair(bar(i), i + 1));
            }
            // The figure also draws 7-8 and 8-9, but bar7 and bar8 are joint
            // ancestors of those pairs.
            edges.extend([pair("bar6", "bar7"), pair("bar7", "bar8"), pair("bar8", "bar9")]);
            fx.c1_exact = Some(edges);
            fx.equations = msj_table();
            fx.closed_form = Some(msj_closed_form(&c)?);
        }
        ModelSpec::MsjSaturated { .. } => {
            fx.closed_form = Some(composed_closed_form(&c)?);
        }
        ModelSpec::BatchV1 {
            multiple: 3,
            truncation,
        } if truncation >= 7 => {
            let hyper = [(1, 2), (2, 3), (4, 5), (5, 6)];
            fx.hyperedges = hyper
                .iter()
                .map(|&(a, b)| HyperedgeFixture {
                    level: 2,
                    source_i: vec![a.to_string(), bar(a)],
                    source_j: vec![b.to_string()],
                })
                .collect();
            if truncation == 7 {
                let mut edges: Vec<_> = (1..=7).map(|i| pair(i, bar(i))).collect();
                edges.extend([pair(3, "bar4"), pair(6, "bar7"), pair(0, 1), pair(0, "bar1"), pair(3, 4), pair(6, 7)]);
                fx.c1_exact = Some(edges);
                fx.hyperedges_exact = true;
            } else {
                fx.equations = batch_v1_table();
                fx.relations = vec![batch_v1_display(&c)?];
            }
        }
        ModelSpec::BatchV2 { truncation: 6 } => {
            fx.equations = batch_v2_table();
            fx.hyperedges = vec![
                HyperedgeFixture {
                    level: 2,
                    source_i: strs(&["bar1", "bar2"]),
                    source_j: strs(&["2"]),
                },
                HyperedgeFixture {
                    level: 3,
                    source_i: strs(&["bar2", "bar3"]),
                    source_j: strs(&["3"]),
                },
            ];
            fx.hyperedges_exact = true;
        }
        _ => return Ok(None),
    }
    Ok(Some(fx))
}

/// The eight first-level relations for states `i`, `bari`, `i <= 3`.
fn msj_table() -> Vec<EquationFixture> {
    vec![
        eq(1, "0 and bar0", vec![term("bar0", &["0", "bar1"])], vec![term("0", &["bar0"])]),
        eq(1, "bar0 and 1", vec![term("1", &["0"])], vec![term("bar0", &["bar1"])]),
        eq(1, "1 and bar1", vec![term("bar1", &["1", "bar2"])], vec![term("1", &["0", "bar1"])]),
        eq(1, "bar1 and 2", vec![term("2", &["1"])], vec![term("bar1", &["bar2"])]),
        // Printed with q_{bar2,3}; the factor of bar2 against 2 is q_{bar2,2}.
        eq(1, "2 and bar2", vec![term("bar2", &["2"])], vec![term("2", &["1", "bar2"])]),
        eq(1, "bar2 and 3", vec![term("3", &["bar2"])], vec![term("bar2", &["3"])]),
        eq(1, "3 and bar3", vec![term("bar3", &["3", "bar4"])], vec![term("3", &["bar3"])]),
        eq(1, "bar3 and 4", vec![term("4", &["3"])], vec![term("bar3", &["bar4"])]),
    ]
}

/// `π_i / π_0` for the default system as a product over levels.
///
/// Atoms of the transcribed formula that are not edges of the chain
/// (`q_{j,barj}` for `j >= 7`) are omitted. Where `barj → bar(j+1)` is absent
/// (`j ∈ {2, 5, 9}`) the level ratio is `q_{barj,j+1} / q_{j+1,barj}`.
fn msj_closed_form(c: &FormalChain) -> Result<ClosedForm> {
    let g = c.graph();
    let id = |l: String| resolve(g, &l);
    let atom_if = |u: String, v: String| -> Result<Option<FactorExpr>> {
        let (u, v) = (id(u)?, id(v)?);
        Ok(g.has_edge(u, v).then(|| FactorExpr::atom(u, v)))
    };
    // π_barj / π_j.
    let to_bar = |j: usize| -> Result<FactorExpr> {
        let mut num = Vec::new();
        if ![0, 3, 6, 10].contains(&j) {
            num.extend(atom_if(j.to_string(), (j - 1).to_string())?);
        }
        num.extend(atom_if(j.to_string(), bar(j))?);
        let mut den = vec![FactorExpr::atom(id(bar(j))?, id(j.to_string())?)];
        if ![2, 5, 9].contains(&j) {
            den.extend(atom_if(bar(j), bar(j + 1))?);
        }
        Ok(FactorExpr::ratio(FactorExpr::sum(num)?, FactorExpr::sum(den)?))
    };
    // π_{j+1} / π_barj.
    let from_bar = |j: usize| -> Result<FactorExpr> {
        let (bj, up) = (id(bar(j))?, id((j + 1).to_string())?);
        Ok(if [2, 5, 9].contains(&j) {
            FactorExpr::ratio(FactorExpr::atom(bj, up), FactorExpr::atom(up, bj))
        } else {
            FactorExpr::ratio(FactorExpr::atom(bj, id(bar(j + 1))?), FactorExpr::atom(up, id(j.to_string())?))
        })
    };
    let mut ratios = BTreeMap::new();
    let mut terms: Vec<(FactorExpr, i32)> = Vec::new();
    for j in 0..10 {
        terms.push((to_bar(j)?, 1));
        ratios.insert(id(bar(j))?, FactorExpr::product(terms.clone())?);
        terms.push((from_bar(j)?, 1));
        ratios.insert(id((j + 1).to_string())?, FactorExpr::product(terms.clone())?);
    }
    Ok(ClosedForm {
        reference: id("0".into())?,
        ratios,
    })
}

/// `π_v / π_0` from PS relations along cut-graph paths out of node 0.
pub fn composed_closed_form(c: &FormalChain) -> Result<ClosedForm> {
    let c1 = cut_graph(c);
    let mut ratios = BTreeMap::new();
    for v in 1..c.node_count() {
        let path = c1.path(0, v).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "node {} is not connected to {} in the cut graph",
                c.graph().label(v),
                c.graph().label(0)
            ))
        })?;
        ratios.insert(v, compose_ps(&path, c)?.ratio_from(0)?);
    }
    Ok(ClosedForm { reference: 0, ratios })
}

/// Eleven first-level and four second-level rows for the structured batch
/// queue. Each `barj` factor against `j` is `q_{barj,j} + q_{barj,bar(j+1)}`
/// when `j` is not a multiple of 3 and `q_{barj,j}` otherwise.
fn batch_v1_table() -> Vec<EquationFixture> {
    let bar_factor = |j: usize| -> TermFixture {
        let (b, up) = (bar(j), bar(j + 1));
        if j % 3 != 0 {
            term(&b, &[&j.to_string(), &up])
        } else {
            term(&b, &[&j.to_string()])
        }
    };
    let mut rows = vec![
        eq(1, "0 and 1", vec![term("0", &["bar1"])], vec![term("1", &["0"])]),
        eq(1, "0 and bar1", vec![term("0", &["bar1"])], vec![bar_factor(1)]),
        eq(1, "1 and bar1", vec![term("1", &["0"])], vec![bar_factor(1)]),
    ];
    for j in [2, 3, 4, 5, 6, 7] {
        let (s, below) = (j.to_string(), (j - 1).to_string());
        rows.push(eq(1, &format!("{j} and bar{j}"), vec![term(&s, &[&below])], vec![bar_factor(j)]));
        if j == 3 || j == 6 {
            let next = (j + 1).to_string();
            rows.push(eq(
                1,
                &format!("{j} and {next}"),
                vec![term(&s, &[&bar(j + 1)])],
                vec![term(&next, &[&s])],
            ));
        }
    }
    for (a, b) in [(1, 2), (2, 3), (4, 5), (5, 6)] {
        let (sa, sb) = (a.to_string(), b.to_string());
        rows.push(eq(
            2,
            &format!("{{{a}, bar{a}}} and {b}"),
            vec![term(&sa, &[&bar(b)]), term(&bar(a), &[&bar(b)])],
            vec![term(&sb, &[&sa])],
        ));
    }
    rows
}

/// The PSPS relation between states 1 and 3 of the structured batch queue.
fn batch_v1_display(c: &FormalChain) -> Result<Relation> {
    let g = c.graph();
    let id = |l: &str| resolve(g, l);
    let q = |a: &str, b: &str| -> Result<FactorExpr> { Ok(FactorExpr::atom(id(a)?, id(b)?)) };
    let level = |k: &str, bk: &str, up: &str, below: &str| -> Result<FactorExpr> {
        FactorExpr::sum(vec![
            q(k, up)?,
            FactorExpr::product(vec![
                (q(k, below)?, 1),
                (q(bk, up)?, 1),
                (FactorExpr::sum(vec![q(bk, k)?, q(bk, up)?])?, -1),
            ])?,
        ])
    };
    let lhs = FactorExpr::product(vec![
        (level("1", "bar1", "bar2", "0")?, 1),
        (level("2", "bar2", "bar3", "1")?, 1),
    ])?;
    let rhs = FactorExpr::product(vec![(q("2", "1")?, 1), (q("3", "2")?, 1)])?;
    Relation::new(id("1")?, lhs, id("3")?, rhs)
}

fn batch_v2_table() -> Vec<EquationFixture> {
    let mut rows = vec![
        eq(1, "0 and 1", vec![term("0", &["bar1"])], vec![term("1", &["0"])]),
        eq(1, "0 and bar1", vec![term("0", &["bar1"])], vec![term("bar1", &["1", "2"])]),
        eq(1, "1 and bar1", vec![term("1", &["0"])], vec![term("bar1", &["1", "2"])]),
    ];
    for j in 2..=4 {
        let (s, b, b_own, b_up) = (j.to_string(), bar(j + 1), (j + 1).to_string(), (j + 2).to_string());
        rows.push(eq(
            1,
            &format!("{j} and bar{}", j + 1),
            vec![term(&s, &[&b])],
            vec![term(&b, &[&b_own, &b_up])],
        ));
    }
    rows.push(eq(
        2,
        "{bar1, bar2} and 2",
        vec![term("bar1", &["2"]), term("bar2", &["2", "3"])],
        vec![term("2", &["1"])],
    ));
    rows.push(eq(
        3,
        "{bar2, bar3} and 3",
        vec![term("bar2", &["3"]), term("bar3", &["3", "4"])],
        vec![term("3", &["2"])],
    ));
    rows
}
