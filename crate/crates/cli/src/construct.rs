//! Named constructions reachable from `uac construct`.

use anyhow::{bail, Context, Result};
use uac_core::couplings::{
    automorphism_coupling, bipartite_coupling, cluster_coupling_complete, fixed_distance_cycle, hypercube_flip,
    k3_loops_coupling, near_complete_regular_coupling, srg_matching_coupling, tree_noncoupling_with_switch,
};
use uac_core::forbidden::minimum_entropy_kernel;
use uac_core::graph::{bipartition, find_free_automorphism, AutomorphismSearch};
use uac_core::kernel::ratio;
use uac_core::{admits_uac, extract_uac_kernel, Family, JointKernel, Rational, StatePair};

use crate::source::GraphInput;

/// Search budget for the free-automorphism backtracking.
const AUTOMORPHISM_NODE_CAP: usize = 1_000_000;

pub const CONSTRUCTIONS: &[&str] = &[
    "fixed-distance-cycle",
    "hypercube-flip",
    "automorphism",
    "bipartite",
    "cluster",
    "k3-loops",
    "near-complete",
    "srg-matching",
    "tree-noncoupling",
    "uac-extract",
    "min-entropy",
];

pub struct Built {
    pub kernel: JointKernel,
    /// Graph description for constructions that fix their own graph.
    pub own_graph: Option<String>,
}

fn ints(name: &str, params: &[String], want: usize) -> Result<Vec<usize>> {
    if params.len() != want {
        bail!("construction `{name}` takes {want} parameter(s), got {}", params.len());
    }
    params.iter().map(|p| p.parse::<usize>().with_context(|| format!("parameter `{p}` is not an integer"))).collect()
}

fn needs<'a>(name: &str, graph: Option<&'a GraphInput>) -> Result<&'a GraphInput> {
    graph.with_context(|| format!("construction `{name}` needs --graph or --builder"))
}

fn fixed(kernel: JointKernel, family: Family) -> Built {
    Built { kernel, own_graph: Some(format!("builder {family}")) }
}

pub fn run(name: &str, params: &[String], graph: Option<&GraphInput>, start: Option<StatePair>) -> Result<Built> {
    let from_graph = |kernel| Built { kernel, own_graph: None };
    Ok(match name {
        "fixed-distance-cycle" => {
            let p = ints(name, params, 2)?;
            fixed(fixed_distance_cycle(p[0], p[1])?, Family::Cycle(p[0]))
        }
        "hypercube-flip" => {
            let p = ints(name, params, 1)?;
            fixed(hypercube_flip(p[0])?, Family::Hypercube(p[0]))
        }
        "cluster" => {
            let p = ints(name, params, 2)?;
            fixed(cluster_coupling_complete(p[0], p[1])?.1, Family::Complete(p[0] * p[1]))
        }
        "k3-loops" => {
            ints(name, params, 0)?;
            fixed(k3_loops_coupling()?, Family::CompleteLoops(3))
        }
        "tree-noncoupling" => {
            let p = match params {
                [] => ratio(3, 4),
                [p] => p.parse::<Rational>().with_context(|| format!("switch probability `{p}` is not a fraction"))?,
                _ => bail!("construction `{name}` takes at most one parameter"),
            };
            fixed(tree_noncoupling_with_switch(p)?, Family::Spider)
        }
        "automorphism" => {
            let g = &needs(name, graph)?.graph;
            let start_x = match (params, start) {
                ([], None) => 0,
                ([x], None) => x.parse().with_context(|| format!("start vertex `{x}` is not an integer"))?,
                ([], Some(s)) => s.x,
                _ => bail!("construction `{name}` takes an optional start vertex"),
            };
            let phi = match find_free_automorphism(g, AUTOMORPHISM_NODE_CAP) {
                AutomorphismSearch::Found(phi) => phi,
                AutomorphismSearch::NoneFound => bail!("graph has no free non-adjacent automorphism"),
                AutomorphismSearch::CapExceeded => {
                    bail!("automorphism search exceeded {AUTOMORPHISM_NODE_CAP} nodes")
                }
            };
            if let Some(s) = start {
                if phi.apply(s.x) != s.y {
                    bail!("start {s} is not of the form (x, phi(x)) for the automorphism found");
                }
            }
            from_graph(automorphism_coupling(g, &phi, start_x)?)
        }
        "bipartite" => {
            ints(name, params, 0)?;
            let g = &needs(name, graph)?.graph;
            let start = match start {
                Some(s) => s,
                None => {
                    let parts = bipartition(g)?.context("graph is not bipartite")?;
                    let n = g.vertex_count();
                    (0..n)
                        .flat_map(|x| (0..n).map(move |y| StatePair::new(x, y)))
                        .find(|s| s.x != s.y && parts.same_side(s.x, s.y))
                        .context("no two distinct vertices on the same side")?
                }
            };
            from_graph(bipartite_coupling(g, start)?)
        }
        "near-complete" => {
            ints(name, params, 0)?;
            from_graph(near_complete_regular_coupling(&needs(name, graph)?.graph, start)?)
        }
        "srg-matching" => {
            ints(name, params, 0)?;
            from_graph(srg_matching_coupling(&needs(name, graph)?.graph, start)?)
        }
        "uac-extract" => {
            ints(name, params, 0)?;
            let g = &needs(name, graph)?.graph;
            let verdict = admits_uac(g)?;
            let start = match start.or(verdict.witness) {
                Some(s) => s,
                None => bail!("graph does not admit a uniform avoidance coupling"),
            };
            from_graph(extract_uac_kernel(g, &verdict.trace, start)?)
        }
        "min-entropy" => {
            ints(name, params, 0)?;
            let g = &needs(name, graph)?.graph;
            let verdict = admits_uac(g)?;
            from_graph(minimum_entropy_kernel(g, &verdict.trace, start)?)
        }
        _ => bail!("unknown construction `{name}`; expected one of: {}", CONSTRUCTIONS.join(", ")),
    })
}

/// The graph a self-contained construction lives on, for embedding.
pub fn own_graph_input(built: &Built) -> Option<GraphInput> {
    built.own_graph.as_ref().map(|source| GraphInput { graph: built.kernel.graph().clone(), source: source.clone() })
}
