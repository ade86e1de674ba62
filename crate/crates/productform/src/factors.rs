//! Rational-function factors over rate atoms `q_{i,j}`: a normalizing AST,
//! product-form classification, evaluation, circuit metrics, and the
//! relations `π_i f_{i,j} = π_j f_{j,i}` built from them.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::numeric::RateAssignment;
use crate::product_form::{s_factors, FormalChain};

/// The free variable `q_{from,to}` attached to an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RateAtom {
    pub from: NodeId,
    pub to: NodeId,
}

/// Exponent of a product term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Exponent {
    Plus,
    Minus,
}

impl Exponent {
    pub fn from_i32(e: i32) -> Result<Self> {
        match e {
            1 => Ok(Exponent::Plus),
            -1 => Ok(Exponent::Minus),
            _ => invalid(format!("exponent {e} is not ±1")),
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Exponent::Plus => 1,
            Exponent::Minus => -1,
        }
    }

    fn times(self, other: Exponent) -> Exponent {
        if self == other {
            Exponent::Plus
        } else {
            Exponent::Minus
        }
    }
}

/// Expression tree for a factor `f_{i,j}`.
///
/// Values built through [`FactorExpr::sum`] and [`FactorExpr::product`] are
/// normalized: nested sums and nested products are flattened (exponents
/// multiply) and a singleton sum or a singleton `+1` product collapses to its
/// child.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FactorExpr {
    Atom(RateAtom),
    Sum(Vec<FactorExpr>),
    Product(Vec<(FactorExpr, Exponent)>),
}

/// Product-form complexity class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    S,
    PS,
    SPS,
    PSPS,
    /// Alternation depth `n ≥ 5`.
    Higher(u32),
}

impl Level {
    /// Alternation depth: S = 1, PS = 2, SPS = 3, PSPS = 4.
    pub fn rank(self) -> u32 {
        match self {
            Level::S => 1,
            Level::PS => 2,
            Level::SPS => 3,
            Level::PSPS => 4,
            Level::Higher(n) => n,
        }
    }

    pub fn from_rank(n: u32) -> Level {
        match n {
            0 | 1 => Level::S,
            2 => Level::PS,
            3 => Level::SPS,
            4 => Level::PSPS,
            n => Level::Higher(n),
        }
    }

    /// Alternating name ending in `S`, e.g. `PSPS`.
    pub fn name(self) -> String {
        let n = self.rank() as usize;
        (0..n)
            .map(|k| if (n - k) % 2 == 1 { 'S' } else { 'P' })
            .collect()
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Arithmetic-circuit metrics of an expression tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitStats {
    /// Operations on the longest leaf-to-root path.
    pub depth: usize,
    /// Operation gates: sums, products and reciprocals.
    pub size: usize,
    /// Atom leaves.
    pub inputs: usize,
}

impl CircuitStats {
    /// All circuit nodes, inputs included.
    pub fn nodes(&self) -> usize {
        self.size + self.inputs
    }
}

impl FactorExpr {
    pub fn atom(from: NodeId, to: NodeId) -> FactorExpr {
        FactorExpr::Atom(RateAtom { from, to })
    }

    /// Normalized sum; fails on an empty child list.
    pub fn sum(children: Vec<FactorExpr>) -> Result<FactorExpr> {
        if children.is_empty() {
            return invalid("a sum needs at least one term");
        }
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                FactorExpr::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            return Ok(flat.pop().expect("one element"));
        }
        Ok(FactorExpr::Sum(flat))
    }

    /// Normalized product with exponents in {−1, +1}.
    pub fn product(terms: Vec<(FactorExpr, i32)>) -> Result<FactorExpr> {
        let terms = terms
            .into_iter()
            .map(|(e, x)| Exponent::from_i32(x).map(|x| (e, x)))
            .collect::<Result<Vec<_>>>()?;
        FactorExpr::product_of(terms)
    }

    /// Normalized product over typed exponents.
    pub fn product_of(terms: Vec<(FactorExpr, Exponent)>) -> Result<FactorExpr> {
        if terms.is_empty() {
            return invalid("a product needs at least one term");
        }
        let mut flat = Vec::with_capacity(terms.len());
        for (e, x) in terms {
            match e {
                FactorExpr::Product(inner) => {
                    flat.extend(inner.into_iter().map(|(c, y)| (c, y.times(x))))
                }
                other => flat.push((other, x)),
            }
        }
        if flat.len() == 1 && flat[0].1 == Exponent::Plus {
            return Ok(flat.pop().expect("one element").0);
        }
        Ok(FactorExpr::Product(flat))
    }

    /// `num / den`.
    pub fn ratio(num: FactorExpr, den: FactorExpr) -> FactorExpr {
        FactorExpr::product_of(vec![(num, Exponent::Plus), (den, Exponent::Minus)])
            .expect("two terms")
    }

    /// `Σ_k q_{source,k}` over the given targets; fails when empty.
    pub fn rate_sum(source: NodeId, targets: impl IntoIterator<Item = NodeId>) -> Result<FactorExpr> {
        FactorExpr::sum(targets.into_iter().map(|t| FactorExpr::atom(source, t)).collect())
    }

    /// Re-applies normalization bottom-up; rejects empty child lists.
    pub fn normalized(&self) -> Result<FactorExpr> {
        match self {
            FactorExpr::Atom(a) => Ok(FactorExpr::Atom(*a)),
            FactorExpr::Sum(cs) => {
                FactorExpr::sum(cs.iter().map(|c| c.normalized()).collect::<Result<_>>()?)
            }
            FactorExpr::Product(ts) => FactorExpr::product_of(
                ts.iter()
                    .map(|(c, x)| c.normalized().map(|c| (c, *x)))
                    .collect::<Result<_>>()?,
            ),
        }
    }

    /// Distinct atoms in the tree.
    pub fn atoms(&self) -> BTreeSet<RateAtom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<RateAtom>) {
        match self {
            FactorExpr::Atom(a) => {
                out.insert(*a);
            }
            FactorExpr::Sum(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
            FactorExpr::Product(ts) => ts.iter().for_each(|(c, _)| c.collect_atoms(out)),
        }
    }

    /// Is this a sum of atoms that all leave the same node (or a lone atom)?
    fn is_rate_sum(&self) -> bool {
        match self {
            FactorExpr::Atom(_) => true,
            FactorExpr::Sum(cs) => {
                let mut src = None;
                cs.iter().all(|c| match c {
                    FactorExpr::Atom(a) => *src.get_or_insert(a.from) == a.from,
                    _ => false,
                })
            }
            FactorExpr::Product(_) => false,
        }
    }

    fn alternation(&self) -> u32 {
        fn up_to_parity(n: u32, odd: bool) -> u32 {
            if (n % 2 == 1) == odd {
                n
            } else {
                n + 1
            }
        }
        match self {
            FactorExpr::Atom(_) => 1,
            FactorExpr::Sum(cs) => {
                if self.is_rate_sum() {
                    return 1;
                }
                // A stray atom in a mixed sum is a one-term product of sums.
                let m = cs
                    .iter()
                    .map(|c| match c {
                        FactorExpr::Atom(_) => 2,
                        other => other.alternation(),
                    })
                    .max()
                    .unwrap_or(1);
                up_to_parity(m, false) + 1
            }
            FactorExpr::Product(ts) => {
                let m = ts.iter().map(|(c, _)| c.alternation()).max().unwrap_or(1);
                up_to_parity(m, true) + 1
            }
        }
    }

    /// Product-form class of the normalized tree. Inverted sums inside a
    /// product do not raise the class.
    pub fn classify(&self) -> Level {
        match self.normalized() {
            Ok(e) => Level::from_rank(e.alternation()),
            Err(_) => Level::from_rank(self.alternation()),
        }
    }

    /// Depth and gate counts of the tree as built.
    pub fn circuit_stats(&self) -> CircuitStats {
        match self {
            FactorExpr::Atom(_) => CircuitStats {
                depth: 0,
                size: 0,
                inputs: 1,
            },
            FactorExpr::Sum(cs) => {
                let kids: Vec<_> = cs.iter().map(|c| c.circuit_stats()).collect();
                CircuitStats {
                    depth: 1 + kids.iter().map(|k| k.depth).max().unwrap_or(0),
                    size: 1 + kids.iter().map(|k| k.size).sum::<usize>(),
                    inputs: kids.iter().map(|k| k.inputs).sum(),
                }
            }
            FactorExpr::Product(ts) => {
                let kids: Vec<_> = ts
                    .iter()
                    .map(|(c, x)| {
                        let mut s = c.circuit_stats();
                        if *x == Exponent::Minus {
                            s.depth += 1;
                            s.size += 1;
                        }
                        s
                    })
                    .collect();
                // A lone inverted term is just its reciprocal gate.
                let own = usize::from(ts.len() > 1);
                CircuitStats {
                    depth: own + kids.iter().map(|k| k.depth).max().unwrap_or(0),
                    size: own + kids.iter().map(|k| k.size).sum::<usize>(),
                    inputs: kids.iter().map(|k| k.inputs).sum(),
                }
            }
        }
    }

    /// Evaluates the expression under a rate assignment.
    pub fn evaluate(&self, rates: &RateAssignment) -> Result<f64> {
        match self {
            FactorExpr::Atom(a) => rates.get(a.from, a.to).ok_or_else(|| {
                Error::InvalidArgument(format!("no rate for edge ({}, {})", a.from, a.to))
            }),
            FactorExpr::Sum(cs) => {
                let mut total = 0.0;
                for c in cs {
                    total += c.evaluate(rates)?;
                }
                if total <= 0.0 {
                    return Err(Error::Internal("sum of positive rates is not positive".into()));
                }
                Ok(total)
            }
            FactorExpr::Product(ts) => {
                let mut total = 1.0;
                for (c, x) in ts {
                    let v = c.evaluate(rates)?;
                    match x {
                        Exponent::Plus => total *= v,
                        Exponent::Minus => total /= v,
                    }
                }
                Ok(total)
            }
        }
    }

    /// Human-readable rendering such as `q_{1,0}·q_{bar1,bar2}/(q_{bar1,1} + q_{bar1,bar2})`.
    pub fn render(&self, g: &DirectedGraph) -> String {
        self.render_inner(g, true)
    }

    fn render_inner(&self, g: &DirectedGraph, top: bool) -> String {
        match self {
            FactorExpr::Atom(a) => format!("q_{{{},{}}}", g.label(a.from), g.label(a.to)),
            FactorExpr::Sum(cs) => {
                let body: Vec<_> = cs.iter().map(|c| c.render_inner(g, false)).collect();
                if top {
                    body.join(" + ")
                } else {
                    format!("({})", body.join(" + "))
                }
            }
            FactorExpr::Product(ts) => {
                let num: Vec<_> = ts
                    .iter()
                    .filter(|(_, x)| *x == Exponent::Plus)
                    .map(|(c, _)| c.render_inner(g, false))
                    .collect();
                let den: Vec<_> = ts
                    .iter()
                    .filter(|(_, x)| *x == Exponent::Minus)
                    .map(|(c, _)| c.render_inner(g, false))
                    .collect();
                let num = if num.is_empty() { "1".to_string() } else { num.join("·") };
                let mut out = if den.is_empty() {
                    num
                } else {
                    format!("{num}/{}", den.join("/"))
                };
                if !top && !den.is_empty() {
                    out = format!("({out})");
                }
                out
            }
        }
    }

    /// JSON tree form with node labels.
    pub fn to_json(&self, g: &DirectedGraph) -> Value {
        match self {
            FactorExpr::Atom(a) => {
                json!({"atom": {"from": g.label(a.from), "to": g.label(a.to)}})
            }
            FactorExpr::Sum(cs) => json!({"sum": cs.iter().map(|c| c.to_json(g)).collect::<Vec<_>>()}),
            FactorExpr::Product(ts) => json!({
                "product": ts
                    .iter()
                    .map(|(c, x)| json!({"expr": c.to_json(g), "exp": x.as_i32()}))
                    .collect::<Vec<_>>()
            }),
        }
    }

    /// Parses the JSON tree form; atoms must be edges of `g`.
    pub fn from_json(v: &Value, g: &DirectedGraph) -> Result<FactorExpr> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::InvalidArgument("factor node must be a one-key object".into()))?;
        let (key, body) = obj.iter().next().expect("one key");
        match key.as_str() {
            "atom" => {
                let end = |k: &str| -> Result<NodeId> {
                    let label = body.get(k).and_then(Value::as_str).ok_or_else(|| {
                        Error::InvalidArgument(format!("atom is missing string field {k:?}"))
                    })?;
                    g.index_of(label)
                        .ok_or_else(|| Error::InvalidArgument(format!("unknown node {label:?}")))
                };
                let (from, to) = (end("from")?, end("to")?);
                if !g.has_edge(from, to) {
                    return invalid(format!(
                        "atom q_{{{},{}}} is not an edge",
                        g.label(from),
                        g.label(to)
                    ));
                }
                Ok(FactorExpr::atom(from, to))
            }
            "sum" => {
                let items = body
                    .as_array()
                    .ok_or_else(|| Error::InvalidArgument("sum must hold an array".into()))?;
                FactorExpr::sum(items.iter().map(|c| FactorExpr::from_json(c, g)).collect::<Result<_>>()?)
            }
            "product" => {
                let items = body
                    .as_array()
                    .ok_or_else(|| Error::InvalidArgument("product must hold an array".into()))?;
                let mut terms = Vec::with_capacity(items.len());
                for t in items {
                    let e = t
                        .get("expr")
                        .ok_or_else(|| Error::InvalidArgument("product term lacks expr".into()))?;
                    let x = t
                        .get("exp")
                        .and_then(Value::as_i64)
                        .ok_or_else(|| Error::InvalidArgument("product term lacks exp".into()))?;
                    terms.push((FactorExpr::from_json(e, g)?, x as i32));
                }
                FactorExpr::product(terms)
            }
            other => invalid(format!("unknown factor node kind {other:?}")),
        }
    }
}

/// `π_lhs · lhs_factor = π_rhs · rhs_factor`, oriented with `lhs_node < rhs_node`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub lhs_node: NodeId,
    pub rhs_node: NodeId,
    pub lhs_factor: FactorExpr,
    pub rhs_factor: FactorExpr,
    pub level: Level,
}

impl Relation {
    /// Builds `π_a fa = π_b fb`, reorienting if `b < a`.
    pub fn new(a: NodeId, fa: FactorExpr, b: NodeId, fb: FactorExpr) -> Result<Relation> {
        if a == b {
            return invalid(format!("a relation needs two distinct nodes, got {a} twice"));
        }
        let level = fa.classify().max(fb.classify());
        let (lhs_node, lhs_factor, rhs_node, rhs_factor) = if a < b {
            (a, fa, b, fb)
        } else {
            (b, fb, a, fa)
        };
        Ok(Relation {
            lhs_node,
            rhs_node,
            lhs_factor,
            rhs_factor,
            level,
        })
    }

    /// The factor multiplying `π_node`.
    pub fn factor_of(&self, node: NodeId) -> Option<&FactorExpr> {
        if node == self.lhs_node {
            Some(&self.lhs_factor)
        } else if node == self.rhs_node {
            Some(&self.rhs_factor)
        } else {
            None
        }
    }

    /// The node on the other side of `node`.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        if node == self.lhs_node {
            Some(self.rhs_node)
        } else if node == self.rhs_node {
            Some(self.lhs_node)
        } else {
            None
        }
    }

    /// `π_to / π_from` as `f_from / f_to`, where `to` is the other node.
    pub fn ratio_from(&self, from: NodeId) -> Result<FactorExpr> {
        let to = self
            .other(from)
            .ok_or_else(|| Error::InvalidArgument(format!("node {from} is not in the relation")))?;
        Ok(FactorExpr::ratio(
            self.factor_of(from).expect("member").clone(),
            self.factor_of(to).expect("member").clone(),
        ))
    }

    /// Composes `π_x F = π_m G` with `π_m H = π_y K` into `π_x F·H = π_y G·K`,
    /// where `m` is the node the two relations share.
    pub fn chain(&self, other: &Relation) -> Result<Relation> {
        let shared: Vec<NodeId> = [self.lhs_node, self.rhs_node]
            .into_iter()
            .filter(|&v| other.factor_of(v).is_some())
            .collect();
        if shared.len() != 1 {
            return invalid("chained relations must share exactly one node");
        }
        let m = shared[0];
        let x = self.other(m).expect("member");
        let y = other.other(m).expect("member");
        let lhs = FactorExpr::product(vec![
            (self.factor_of(x).expect("member").clone(), 1),
            (other.factor_of(m).expect("member").clone(), 1),
        ])?;
        let rhs = FactorExpr::product(vec![
            (self.factor_of(m).expect("member").clone(), 1),
            (other.factor_of(y).expect("member").clone(), 1),
        ])?;
        Relation::new(x, lhs, y, rhs)
    }

    pub fn atoms(&self) -> BTreeSet<RateAtom> {
        let mut a = self.lhs_factor.atoms();
        a.extend(self.rhs_factor.atoms());
        a
    }

    /// `π_a (…) = π_b (…)` with labels.
    pub fn render(&self, g: &DirectedGraph) -> String {
        let wrap = |e: &FactorExpr| match e {
            FactorExpr::Atom(_) => e.render(g),
            _ => format!("({})", e.render(g)),
        };
        format!(
            "π_{{{}}} {} = π_{{{}}} {}",
            g.label(self.lhs_node),
            wrap(&self.lhs_factor),
            g.label(self.rhs_node),
            wrap(&self.rhs_factor)
        )
    }

    pub fn to_json(&self, g: &DirectedGraph) -> Value {
        json!({
            "lhs_node": g.label(self.lhs_node),
            "rhs_node": g.label(self.rhs_node),
            "level": self.level.name(),
            "lhs_factor": self.lhs_factor.to_json(g),
            "rhs_factor": self.rhs_factor.to_json(g),
            "lhs_circuit": stats_json(self.lhs_factor.circuit_stats()),
            "rhs_circuit": stats_json(self.rhs_factor.circuit_stats()),
            "text": self.render(g),
        })
    }
}

fn stats_json(s: CircuitStats) -> Value {
    json!({"depth": s.depth, "size": s.size, "inputs": s.inputs})
}

/// PS relation along a cut-graph path `k_1 … k_{d+1}`:
/// `π_{k_1} Π f_{k_p,k_{p+1}} = π_{k_{d+1}} Π f_{k_{p+1},k_p}`.
pub fn compose_ps(path: &[NodeId], c: &FormalChain) -> Result<Relation> {
    if path.len() < 2 {
        return invalid("a cut-graph path needs at least two nodes");
    }
    let distinct: BTreeSet<_> = path.iter().collect();
    if distinct.len() != path.len() {
        return invalid("a cut-graph path must not repeat nodes");
    }
    let mut forward = Vec::with_capacity(path.len() - 1);
    let mut backward = Vec::with_capacity(path.len() - 1);
    for w in path.windows(2) {
        let (f, b) = s_factors(c, w[0], w[1])?.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "nodes {} and {} are not joint-ancestor free",
                c.graph().label(w[0]),
                c.graph().label(w[1])
            ))
        })?;
        forward.push((f, 1));
        backward.push((b, 1));
    }
    Relation::new(
        path[0],
        FactorExpr::product(forward)?,
        *path.last().expect("nonempty"),
        FactorExpr::product(backward)?,
    )
}
