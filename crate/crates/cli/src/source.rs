//! Graph and kernel inputs. Kernel files written by `construct` embed their
//! graph as `# graph-line:` comments, so `verify` and `simulate` can run on
//! them without a separate graph argument.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use uac_core::{build, parse_graph, Family, Graph, JointKernel};

use crate::GraphArgs;

pub const GRAPH_SOURCE_KEY: &str = "graph-source";
pub const GRAPH_LINE_KEY: &str = "graph-line";

/// Resolved graph plus a one-line description of where it came from.
pub struct GraphInput {
    pub graph: Graph,
    pub source: String,
}

pub fn resolve_graph(args: &GraphArgs) -> Result<Option<GraphInput>> {
    if let Some(path) = &args.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading graph file {}", path.display()))?;
        let graph = parse_graph(&text).with_context(|| format!("parsing graph file {}", path.display()))?;
        return Ok(Some(GraphInput { graph, source: format!("file {}", path.display()) }));
    }
    if let Some(words) = &args.builder {
        let (name, rest) = words.split_first().context("--builder needs a family name")?;
        let params = rest
            .iter()
            .map(|p| p.parse::<usize>().with_context(|| format!("builder parameter `{p}` is not an integer")))
            .collect::<Result<Vec<_>>>()?;
        let family = Family::parse(name, &params)?;
        let graph = build(family)?;
        return Ok(Some(GraphInput { graph, source: format!("builder {family}") }));
    }
    Ok(None)
}

pub fn require_graph(args: &GraphArgs) -> Result<GraphInput> {
    resolve_graph(args)?.context("a graph is required: pass --graph FILE or --builder NAME [PARAMS]")
}

/// Header lines naming the graph and embedding its edge list.
pub fn graph_header(input: &GraphInput) -> Vec<String> {
    let mut lines = vec![format!("{GRAPH_SOURCE_KEY}: {}", input.source)];
    lines.extend(input.graph.to_text().lines().map(|l| format!("{GRAPH_LINE_KEY}: {l}")));
    lines
}

/// Values of `# key: value` header lines.
pub fn header_values<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.trim_start().strip_prefix(key))
        .filter_map(|l| l.strip_prefix(':'))
        .map(str::trim)
        .collect()
}

pub struct KernelInput {
    pub kernel: JointKernel,
    pub graph_source: String,
}

/// Reads a kernel file against the explicit graph, or the one it embeds.
pub fn load_kernel(path: &Path, graph: &GraphArgs) -> Result<KernelInput> {
    let text = fs::read_to_string(path).with_context(|| format!("reading kernel file {}", path.display()))?;
    let (graph, graph_source) = match resolve_graph(graph)? {
        Some(input) => (input.graph, input.source),
        None => {
            let lines = header_values(&text, GRAPH_LINE_KEY);
            if lines.is_empty() {
                bail!("kernel file has no embedded graph; pass --graph or --builder");
            }
            let g = parse_graph(&lines.join("\n")).context("parsing the embedded graph")?;
            let source = header_values(&text, GRAPH_SOURCE_KEY).first().map_or("embedded".to_string(), |s| s.to_string());
            (g, source)
        }
    };
    let kernel = JointKernel::parse_text(&text, graph).with_context(|| format!("parsing kernel file {}", path.display()))?;
    Ok(KernelInput { kernel, graph_source })
}
