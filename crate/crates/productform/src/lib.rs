//! Graph-based product-form analysis of Markov chain transition diagrams.
//!
//! A formal chain is a strongly connected directed graph whose edge values are
//! free symbols. The library finds the relations `π_i f_{i,j} = π_j f_{j,i}`
//! that hold for every instantiation of those symbols: single-sourced cuts and
//! the cut graph `C1(G)`, PS relations along cut-graph paths, and higher-level
//! cuts between cut-graph components. Every relation can be checked against an
//! exact stationary solve of an instantiated chain.

pub mod corpus;
pub mod error;
pub mod factors;
pub mod graph;
pub mod higher_level;
pub mod models;
pub mod numeric;
pub mod product_form;

pub use corpus::{random_strongly_connected, strongly_connected_classes};
pub use error::{Error, Result};
pub use factors::{compose_ps, CircuitStats, Exponent, FactorExpr, Level, RateAtom, Relation};
pub use graph::{
    ancestors, is_strongly_connected, set_avoiding_subgraph, shortest_path, DirectedGraph, NodeId,
    NodeSet,
};
pub use higher_level::{
    analyze, broad_cut_search, conjecture_harness, higher_level_cut_graph,
    narrow_second_level_cuts, sps_relation, Analysis, CutHypergraph, HyperEdge, Linkage,
};
pub use models::{expected_fixtures, generate, Fixtures, ModelSpec};
pub use numeric::{
    cut_equation_check, enumerate_sourced_cuts, random_rates, stationary, theorem3_witness,
    verify_relation, RateAssignment, StationaryMeasure, WitnessPair,
};
pub use product_form::{
    clique_check, cut_graph, cut_source, is_jaf, mutually_avoiding_ancestors, s_factors,
    sourced_cut, ChainKind, CliqueAnalysis, Cut, CutGraph, FormalChain,
};
