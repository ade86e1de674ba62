//! Small strongly connected digraphs for brute-force comparisons: every
//! isomorphism class up to five nodes, and seeded random samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::product_form::{ChainKind, FormalChain};

/// Largest node count for the exhaustive enumeration.
pub const MAX_EXHAUSTIVE_NODES: usize = 5;

/// Largest node count for bitmask sampling.
pub const MAX_SAMPLE_NODES: usize = 16;

/// Ordered pairs `(u, v)`, `u != v`, in slot order.
fn slots(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect()
}

fn slot_index(n: usize, u: usize, v: usize) -> usize {
    u * (n - 1) + if v < u { v } else { v - 1 }
}

fn reach(rows: &[u32], start: usize) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= rows[u];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen
}

fn strongly_connected_rows(out: &[u32]) -> bool {
    let n = out.len();
    let full = (1u32 << n) - 1;
    let mut inc = vec![0u32; n];
    for (u, &row) in out.iter().enumerate() {
        let mut r = row;
        while r != 0 {
            let v = r.trailing_zeros() as usize;
            r &= r - 1;
            inc[v] |= 1 << u;
        }
    }
    reach(out, 0) == full && reach(&inc, 0) == full
}

fn rows_of(n: usize, slots: &[(usize, usize)], mask: u64) -> Vec<u32> {
    let mut rows = vec![0u32; n];
    for (b, &(u, v)) in slots.iter().enumerate() {
        if mask >> b & 1 == 1 {
            rows[u] |= 1 << v;
        }
    }
    rows
}

fn chain_of(n: usize, slots: &[(usize, usize)], mask: u64) -> Result<FormalChain> {
    let edges: Vec<(NodeId, NodeId)> = slots
        .iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, &e)| e)
        .collect();
    FormalChain::new(DirectedGraph::with_index_labels(n, &edges)?, ChainKind::Ctmc)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// One representative per isomorphism class of strongly connected digraphs
/// on `n` nodes: the class member with the smallest edge bitmask.
pub fn strongly_connected_classes(n: usize) -> Result<Vec<FormalChain>> {
    if n == 0 || n > MAX_EXHAUSTIVE_NODES {
        return Err(Error::ResourceLimit {
            what: "exhaustive corpus node count".into(),
            limit: MAX_EXHAUSTIVE_NODES,
            actual: n,
        });
    }
    let slots = slots(n);
    // Slot maps for every non-identity relabeling.
    let maps: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .skip(1)
        .map(|p| slots.iter().map(|&(u, v)| slot_index(n, p[u], p[v])).collect())
        .collect();
    let mut out = Vec::new();
    for mask in 0..1u64 << slots.len() {
        if !strongly_connected_rows(&rows_of(n, &slots, mask)) {
            continue;
        }
        let canonical = maps.iter().all(|map| {
            let image = map
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .fold(0u64, |m, (_, &s)| m | 1 << s);
            image >= mask
        });
        if canonical {
            out.push(chain_of(n, &slots, mask)?);
        }
    }
    Ok(out)
}

/// Seeded strongly connected digraph on `n` nodes: each ordered pair is an
/// edge with a per-sample density in `[0.25, 0.6]`, redrawn until the result
/// is strongly connected.
pub fn random_strongly_connected(n: usize, seed: u64) -> Result<FormalChain> {
    if n < 2 || n > MAX_SAMPLE_NODES {
        return Err(Error::InvalidArgument(format!(
            "random samples need 2 <= n <= {MAX_SAMPLE_NODES}, got {n}"
        )));
    }
    let slots = slots(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let p: f64 = rng.gen_range(0.25..=0.6);
        let mask = (0..slots.len()).fold(0u64, |m, b| if rng.gen_bool(p) { m | 1 << b } else { m });
        if strongly_connected_rows(&rows_of(n, &slots, mask)) {
            return chain_of(n, &slots, mask);
        }
    }
}
