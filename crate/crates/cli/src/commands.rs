//! Command bodies. Each returns the process exit code; errors map to 2.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use uac_core::report::{graph_hash, kernel_hash, Report};
use uac_core::verifier::{
    check_avoidance, check_marginal_stationary, check_uniformity, class_stationaries, filter_faithfulness,
    history_frequency_test, monte_carlo, simulate as sample, transition_frequency_test, AvoidanceViolation,
    Faithfulness, StationaryMethod, Token,
};
use uac_core::{admits_uac, JointKernel, Rational, StatePair};

use crate::construct;
use crate::source::{graph_header, load_kernel, require_graph, resolve_graph};
use crate::{ConstructArgs, DecideArgs, GraphArgs, SimulateArgs, VerifyArgs};

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn graph_echo(args: &GraphArgs) -> String {
    match (&args.graph, &args.builder) {
        (Some(p), _) => format!("--graph {}", p.display()),
        (None, Some(b)) => format!("--builder {}", b.join(" ")),
        (None, None) => "embedded".into(),
    }
}

pub fn decide(args: &DecideArgs) -> Result<u8> {
    let input = require_graph(&args.graph)?;
    let g = &input.graph;
    let verdict = admits_uac(g)?;
    let trace = &verdict.trace;

    let mut r = Report::new("decide");
    r.push("config.graph", graph_echo(&args.graph));
    r.push("graph.source", &input.source);
    r.push("graph.sha256", graph_hash(g));
    r.push("graph.vertices", g.vertex_count());
    r.push("graph.edges", g.edge_count());
    r.push("verdict", if verdict.admits { "admits" } else { "does-not-admit" });
    r.push("rounds", trace.rounds);
    for (i, f) in trace.generations.iter().enumerate() {
        r.push(format!("forbidden.generation.{i}"), f.len());
    }
    for (i, pair) in trace.generations.windows(2).enumerate() {
        let added: Vec<String> =
            pair[1].iter().filter(|&(x, y)| !pair[0].contains(x, y)).map(|(x, y)| format!("({x},{y})")).collect();
        if !added.is_empty() {
            r.push(format!("forbidden.added.{}", i + 1), added.join(" "));
        }
    }
    let fixed = trace.fixed_point();
    let n = g.vertex_count();
    r.push("forbidden.final", fixed.len());
    r.push("forbidden.all-pairs", fixed.is_full());
    r.push("survivors", n * n - fixed.len());
    r.push("witness", verdict.witness.map_or("none".to_string(), |s| s.to_string()));
    emit(&r.to_text(), args.out.as_deref())?;
    Ok(if verdict.admits { 0 } else { 1 })
}

pub fn construct(args: &ConstructArgs) -> Result<u8> {
    let graph = resolve_graph(&args.graph)?;
    let start = args.start.as_ref().map(|v| StatePair::new(v[0], v[1]));
    let built = construct::run(&args.construction, &args.params, graph.as_ref(), start)?;
    let k = &built.kernel;

    let mut header = vec![
        format!("uac-kernel {}", uac_core::report::VERSION),
        format!("construction: {} {}", args.construction, args.params.join(" ")).trim_end().to_string(),
    ];
    if let Some(s) = start {
        header.push(format!("start-option: {s}"));
    }
    let embedded = match (&graph, construct::own_graph_input(&built)) {
        (Some(g), None) => graph_header(g),
        (_, Some(own)) => graph_header(&own),
        (None, None) => Vec::new(),
    };
    header.extend(embedded);
    header.push(format!("states: {}", k.len()));
    header.push(format!("kernel-sha256: {}", kernel_hash(k)));
    emit(&k.to_text(&header), args.out.as_deref())?;
    Ok(0)
}

fn avoidance_text(v: &AvoidanceViolation) -> String {
    match v {
        AvoidanceViolation::Collision(s) => format!("collision at {s}"),
        AvoidanceViolation::StepOnto { from, to, probability } => format!("{from} -> {to} with probability {probability}"),
    }
}

fn distribution_text(d: &std::collections::BTreeMap<usize, Rational>) -> String {
    d.iter().map(|(v, p)| format!("{v}:{p}")).collect::<Vec<_>>().join(" ")
}

pub fn verify(args: &VerifyArgs) -> Result<u8> {
    let input = load_kernel(&args.kernel, &args.graph)?;
    let k = &input.kernel;
    let g = k.graph();
    if args.monte_carlo && args.seed.is_none() {
        bail!("--monte-carlo needs an explicit --seed");
    }

    let mut r = Report::new("verify");
    r.push("config.kernel", args.kernel.display());
    r.push("config.graph", graph_echo(&args.graph));
    r.push("config.require-uniform", args.require_uniform);
    r.push("config.filter", args.filter);
    r.push("config.belief-cap", args.belief_cap);
    r.push("config.monte-carlo", args.monte_carlo);
    if args.monte_carlo {
        r.push("config.seed", args.seed.unwrap());
        r.push("config.steps", args.steps);
        r.push("config.window", args.window);
        r.push("config.alpha", args.alpha);
        r.push("config.min-count", args.min_count);
        r.push("config.workers", args.workers);
    }
    r.push("graph.source", &input.graph_source);
    r.push("graph.sha256", graph_hash(g));
    r.push("kernel.sha256", kernel_hash(k));
    r.push("kernel.states", k.len());
    r.push("kernel.start", k.start());

    let mut ok = true;
    exact_checks(k, args.require_uniform, &mut r, &mut ok)?;
    if args.filter {
        for token in [Token::X, Token::Y] {
            let key = format!("filter.{}", token.to_string().to_lowercase());
            match filter_faithfulness(k, token, args.belief_cap)? {
                Faithfulness::Faithful { beliefs } => {
                    r.push(&key, "faithful");
                    r.push(format!("{key}.beliefs"), beliefs);
                }
                Faithfulness::Violation { history, predicted } => {
                    ok = false;
                    r.push(&key, "violation");
                    r.push(format!("{key}.history-length"), history.len());
                    r.push(format!("{key}.history"), history.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
                    r.push(format!("{key}.predicted"), distribution_text(&predicted));
                }
                Faithfulness::Inconclusive { beliefs, reason } => {
                    ok = false;
                    r.push(&key, "inconclusive");
                    r.push(format!("{key}.beliefs"), beliefs);
                    r.push(format!("{key}.reason"), reason);
                }
            }
        }
    }
    if args.monte_carlo {
        monte_carlo_checks(k, args, &mut r, &mut ok)?;
    }
    r.push("result", pass(ok));
    emit(&r.to_text(), args.out.as_deref())?;
    Ok(if ok { 0 } else { 1 })
}

fn exact_checks(k: &JointKernel, require_uniform: bool, r: &mut Report, ok: &mut bool) -> Result<()> {
    let classes = class_stationaries(k)?;
    r.push("stationary.classes", classes.len());
    let mut avoid = true;
    let mut uniform = true;
    let mut marg = [true, true];
    let mut avoid_witness = None;
    let mut uniform_witness = None;
    let mut marg_witness = None;
    let (mut failures, mut warnings) = (0, 0);
    for (c, pi) in classes.iter().enumerate() {
        let method = match pi.method() {
            StationaryMethod::Exact => "exact".to_string(),
            StationaryMethod::Iterative { residual, .. } => format!("iterative residual={residual:.3e}"),
        };
        r.push(format!("stationary.class.{c}.states"), pi.class().len());
        r.push(format!("stationary.class.{c}.method"), method);

        let a = check_avoidance(k, pi);
        avoid &= a.passed;
        if avoid_witness.is_none() {
            avoid_witness = a.witness.as_ref().map(avoidance_text);
        }
        let u = check_uniformity(k, pi);
        uniform &= u.passed;
        failures += u.failures.len();
        warnings += u.warnings.len();
        if uniform_witness.is_none() {
            uniform_witness = u.witness().map(|w| {
                format!(
                    "state {} token {} target {} marginal {} expected {}",
                    w.state, w.token, w.target, w.marginal, w.expected
                )
            });
        }
        let m = check_marginal_stationary(k, pi);
        marg[0] &= m.x_passed;
        marg[1] &= m.y_passed;
        if marg_witness.is_none() {
            marg_witness = m.mismatches.first().map(|w| {
                format!("token {} vertex {} marginal {} expected {}", w.token, w.vertex, w.observed, w.expected)
            });
        }
    }
    r.push("exact.avoidance", pass(avoid));
    if let Some(w) = avoid_witness {
        r.push("exact.avoidance.witness", w);
    }
    r.push("exact.uniformity", pass(uniform));
    r.push("exact.uniformity.required", require_uniform);
    r.push("exact.uniformity.failures", failures);
    r.push("exact.uniformity.warnings", warnings);
    if let Some(w) = uniform_witness {
        r.push("exact.uniformity.witness", w);
    }
    r.push("exact.marginal.x", pass(marg[0]));
    r.push("exact.marginal.y", pass(marg[1]));
    if let Some(w) = marg_witness {
        r.push("exact.marginal.witness", w);
    }
    *ok &= avoid && marg[0] && marg[1] && (uniform || !require_uniform);
    Ok(())
}

fn monte_carlo_checks(k: &JointKernel, args: &VerifyArgs, r: &mut Report, ok: &mut bool) -> Result<()> {
    let workers = args.workers.max(1);
    let runs = monte_carlo(k, args.steps / workers, workers, args.seed.unwrap());
    let segments: Vec<&[StatePair]> = runs.iter().map(|t| t.states.as_slice()).collect();
    let collisions: u64 = runs.iter().map(|t| t.collisions).sum();
    r.push("mc.collisions", collisions);
    *ok &= collisions == 0;

    let rows = transition_frequency_test(&segments, k, args.alpha, args.min_count)?;
    let min_p = rows.tested.iter().map(|t| t.2).fold(1.0f64, f64::min);
    r.push("mc.transitions", if rows.rejected { "reject" } else { "pass" });
    r.push("mc.transitions.tested", rows.tested.len());
    r.push("mc.transitions.min-p", format!("{min_p:.6e}"));
    *ok &= !rows.rejected;

    for token in [Token::X, Token::Y] {
        for h in 1..=args.window {
            let key = format!("mc.history.{}.h{h}", token.to_string().to_lowercase());
            let rep = history_frequency_test(&segments, k, token, h, args.alpha, args.min_count)?;
            r.push(&key, if rep.rejected { "reject" } else { "pass" });
            r.push(format!("{key}.tested"), rep.tested.len());
            r.push(format!("{key}.skipped"), rep.skipped.len());
            if let Some(w) = rep.worst {
                let b = &rep.tested[w];
                let mut counts = String::new();
                for (v, c) in &b.counts {
                    let _ = write!(counts, "{v}:{c} ");
                }
                r.push(format!("{key}.min-p"), format!("{:.6e}", b.p_value));
                r.push(
                    format!("{key}.worst"),
                    format!(
                        "history {} counts {}",
                        b.history.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                        counts.trim_end()
                    ),
                );
            }
            *ok &= !rep.rejected;
        }
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    if args.steps == 0 {
        bail!("--steps must be at least 1");
    }
    let input = load_kernel(&args.kernel, &args.graph)?;
    let k = &input.kernel;
    let t = sample(k, args.steps, args.seed);
    let mut text = String::with_capacity(t.states.len() * 8);
    for s in &t.states {
        let _ = writeln!(text, "{} {}", s.x, s.y);
    }
    fs::write(&args.out, &text).with_context(|| format!("writing {}", args.out.display()))?;

    let mut r = Report::new("simulate");
    r.push("config.kernel", args.kernel.display());
    r.push("config.graph", graph_echo(&args.graph));
    r.push("config.steps", args.steps);
    r.push("config.seed", args.seed);
    r.push("config.out", args.out.display());
    r.push("graph.sha256", graph_hash(k.graph()));
    r.push("kernel.sha256", kernel_hash(k));
    r.push("trajectory.sha256", uac_core::report::sha256_hex(text.as_bytes()));
    r.push("collisions", t.collisions);
    let n = k.graph().vertex_count();
    let total = t.states.len() as f64;
    for token in [Token::X, Token::Y] {
        let mut counts = vec![0u64; n];
        for s in &t.states {
            counts[token.observed(*s)] += 1;
        }
        for (v, c) in counts.iter().enumerate() {
            r.push(format!("occupancy.{}.{v}", token.to_string().to_lowercase()), format!("{:.6}", *c as f64 / total));
        }
    }
    emit(&r.to_text(), args.report.as_deref())?;
    Ok(if t.collisions == 0 { 0 } else { 1 })
}
