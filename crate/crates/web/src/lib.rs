//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes source text and returns a JSON string, so the same
//! functions run unchanged in native tests. Failures are reported in-band
//! as `{"ok": false, "error": "..."}`.

use std::time::Duration;

use serde::Serialize;
use serde_json::json;
use stcheck_core::{
    build_lts, parse, product_graph, render, size, sub_bottom_up, sub_top_down, subtype, Algorithm, Limits,
    SessionType, SubtypeError,
};
use wasm_bindgen::prelude::*;

/// The inductive algorithm is exponential; keep the page responsive.
const TIMEOUT: Duration = Duration::from_secs(3);

/// Graphs larger than this are summarised instead of drawn.
const MAX_DRAWN_NODES: usize = 200;

fn ok(mut value: serde_json::Value) -> String {
    value["ok"] = json!(true);
    value.to_string()
}

fn error(message: impl std::fmt::Display) -> String {
    json!({ "ok": false, "error": message.to_string() }).to_string()
}

fn parse_side(which: &str, src: &str) -> Result<SessionType, String> {
    parse(src).map_err(|e| format!("{which}: {e}"))
}

/// Decide `left ≤ right` with one algorithm (`inductive`, `memoized`,
/// `product`, `allpairs`) and report the verdict with its counters.
#[wasm_bindgen]
pub fn check(left: &str, right: &str, algorithm: &str) -> String {
    let run = || -> Result<String, String> {
        let algo = algorithm.parse::<Algorithm>().map_err(|e| e.to_string())?;
        let t = parse_side("left", left)?;
        let u = parse_side("right", right)?;
        match subtype(&t, &u, algo, &Limits::timeout(TIMEOUT)) {
            Ok(r) => {
                let counters: serde_json::Map<_, _> =
                    r.counters.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                Ok(ok(json!({
                    "verdict": r.verdict,
                    "algorithm": r.algorithm.name(),
                    "counters": counters,
                    "elapsed_us": r.elapsed.as_micros() as u64,
                    "left": render(&t),
                    "right": render(&u),
                })))
            }
            Err(SubtypeError::Timeout { elapsed, .. }) => {
                Err(format!("{algo} gave up after {:.1} s", elapsed.as_secs_f64()))
            }
            Err(e) => Err(e.to_string()),
        }
    };
    run().unwrap_or_else(error)
}

#[derive(Serialize)]
struct Node {
    label: String,
    inconsistent: bool,
}

#[derive(Serialize)]
struct Edge {
    from: usize,
    to: usize,
    label: String,
}

/// The product graph of `(left, right)`: nodes, edges, inconsistency marks
/// and a DOT rendering. Node 0 is the root.
#[wasm_bindgen]
pub fn graph(left: &str, right: &str) -> String {
    let run = || -> Result<String, String> {
        let t = parse_side("left", left)?;
        let u = parse_side("right", right)?;
        let g = product_graph(&t, &u).map_err(|e| e.to_string())?;
        let drawn = g.node_count() <= MAX_DRAWN_NODES;
        let nodes: Vec<Node> = if drawn {
            g.nodes()
                .enumerate()
                .map(|(i, n)| Node { label: n.to_string(), inconsistent: g.is_node_inconsistent(i) })
                .collect()
        } else {
            Vec::new()
        };
        let edges: Vec<Edge> = if drawn {
            g.edges().iter().map(|(s, a, d)| Edge { from: *s, to: *d, label: a.to_string() }).collect()
        } else {
            Vec::new()
        };
        Ok(ok(json!({
            "verdict": g.verdict(),
            "node_count": g.node_count(),
            "edge_count": g.edge_count(),
            "inconsistent_count": g.inconsistent_count(),
            "drawn": drawn,
            "nodes": nodes,
            "edges": edges,
            "dot": g.to_dot(),
        })))
    };
    run().unwrap_or_else(error)
}

/// Canonical rendering, size, both subterm sets and the type LTS of one type.
#[wasm_bindgen]
pub fn explore(source: &str) -> String {
    let run = || -> Result<String, String> {
        let t = parse_side("type", source)?;
        let listing = |s: stcheck_core::SubtermSet| s.rendered().map(str::to_string).collect::<Vec<_>>();
        let lts = if t.is_closed() {
            let l = build_lts(&t).map_err(|e| e.to_string())?;
            let nodes: Vec<String> = l.nodes().iter().map(|n| n.to_string()).collect();
            let edges: Vec<Edge> =
                l.edges().map(|(s, a, d)| Edge { from: s, to: d, label: a.to_string() }).collect();
            json!({ "nodes": nodes, "edges": edges, "dot": l.to_dot() })
        } else {
            serde_json::Value::Null
        };
        Ok(ok(json!({
            "rendered": render(&t),
            "size": size(&t),
            "closed": t.is_closed(),
            "top_down": listing(sub_top_down(&t)),
            "bottom_up": listing(sub_bottom_up(&t)),
            "lts": lts,
        })))
    };
    run().unwrap_or_else(error)
}
