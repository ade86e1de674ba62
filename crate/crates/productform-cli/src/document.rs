//! The graph JSON document shared by every command.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use productform::{ChainKind, DirectedGraph, FormalChain, NodeId, RateAssignment};

use crate::error::{input, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentKind {
    Ctmc,
    Dtmc,
}

impl From<DocumentKind> for ChainKind {
    fn from(k: DocumentKind) -> ChainKind {
        match k {
            DocumentKind::Ctmc => ChainKind::Ctmc,
            DocumentKind::Dtmc => ChainKind::Dtmc,
        }
    }
}

impl From<ChainKind> for DocumentKind {
    fn from(k: ChainKind) -> DocumentKind {
        match k {
            ChainKind::Ctmc => DocumentKind::Ctmc,
            ChainKind::Dtmc => DocumentKind::Dtmc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

/// A chain with optional rates, as read from and written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub name: String,
    pub kind: DocumentKind,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeDocument>,
}

/// A validated document: the chain and, when every edge carries one, its rates.
#[derive(Clone, Debug)]
pub struct LoadedChain {
    pub name: String,
    pub chain: FormalChain,
    pub rates: Option<RateAssignment>,
}

impl GraphDocument {
    /// Parses JSON text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<GraphDocument> {
        serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<GraphDocument> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        GraphDocument::parse(&text, &path.display().to_string())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    /// The document of `chain`, with `rates` on the edges when given.
    pub fn from_chain(name: &str, chain: &FormalChain, rates: Option<&RateAssignment>) -> GraphDocument {
        let g = chain.graph();
        GraphDocument {
            name: name.to_string(),
            kind: chain.kind().into(),
            nodes: g.labels().to_vec(),
            edges: g
                .edges()
                .map(|(u, v)| EdgeDocument {
                    from: g.label(u).to_string(),
                    to: g.label(v).to_string(),
                    rate: rates.and_then(|r| r.get(u, v)),
                })
                .collect(),
        }
    }

    /// Nodes in lexicographic order, edges sorted by their labels.
    pub fn normalized(&self) -> GraphDocument {
        let mut out = self.clone();
        out.nodes.sort();
        out.edges
            .sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        out
    }

    /// Checks labels, edges and rates and builds the chain.
    pub fn to_chain(&self) -> Result<LoadedChain> {
        let mut index: HashMap<&str, NodeId> = HashMap::with_capacity(self.nodes.len());
        for (i, label) in self.nodes.iter().enumerate() {
            if index.insert(label, i).is_some() {
                return input(format!("nodes[{i}]: duplicate label {label:?}"));
            }
        }
        let lookup = |k: usize, field: &str, label: &str| -> Result<NodeId> {
            index
                .get(label)
                .copied()
                .ok_or_else(|| CliError::Input(format!("edges[{k}].{field}: unknown node {label:?}")))
        };
        let mut pairs = Vec::with_capacity(self.edges.len());
        let mut values = BTreeMap::new();
        for (k, e) in self.edges.iter().enumerate() {
            let (u, v) = (lookup(k, "from", &e.from)?, lookup(k, "to", &e.to)?);
            pairs.push((u, v));
            if let Some(r) = e.rate {
                if !(r > 0.0 && r.is_finite()) {
                    return input(format!("edges[{k}].rate: {r} is not a positive number"));
                }
                values.insert((u, v), r);
            }
        }
        let graph = DirectedGraph::new(self.nodes.clone(), &pairs)?;
        let kind: ChainKind = self.kind.into();
        let chain = FormalChain::new(graph, kind)?;
        let rates = match values.len() {
            0 => None,
            n if n == self.edges.len() => Some(RateAssignment::new(&chain, kind, values)?),
            n => {
                return input(format!(
                    "{n} of {} edges carry a rate; give rates on all edges or none",
                    self.edges.len()
                ))
            }
        };
        Ok(LoadedChain {
            name: self.name.clone(),
            chain,
            rates,
        })
    }
}

/// Reads and validates a document from disk.
pub fn load(path: &Path) -> Result<LoadedChain> {
    GraphDocument::read(path)?.to_chain()
}
