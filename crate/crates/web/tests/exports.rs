use serde_json::Value;
use stcheck_web::{check, explore, graph};

const T1: &str = "rec X . +{ respond: ?[end].X, exit: end }";
const T2: &str = "rec X . +{ respond: ?[end].X, exit: end, replicate: ?[X].X }";
const T3: &str = "rec Y . +{ respond: ?[end].Y, exit: end, \
                  replicate: ?[rec X . +{ respond: ?[end].X, exit: end }].Y }";

fn json(s: String) -> Value {
    serde_json::from_str(&s).expect("exports return JSON")
}

#[test]
fn check_reports_verdicts_and_counters() {
    for algo in ["inductive", "memoized", "product", "allpairs"] {
        let r = json(check(T2, T1, algo));
        assert_eq!(r["ok"], true, "{r}");
        assert_eq!(r["verdict"], true);
        assert_eq!(r["algorithm"], algo);
        assert!(r["counters"]["judgements_visited"].is_u64());
        assert_eq!(json(check(T1, T2, algo))["verdict"], false);
    }
    let r = json(check(T2, T3, "memoized"));
    assert!(r["counters"]["memo_entries"].as_u64().unwrap() <= 7);
}

#[test]
fn check_reports_errors_in_band() {
    let r = json(check("?[end", T1, "product"));
    assert_eq!(r["ok"], false);
    assert!(r["error"].as_str().unwrap().starts_with("left: 1:"), "{r}");
    assert_eq!(json(check(T1, "X", "product"))["ok"], false);
    assert_eq!(json(check(T1, T1, "fastest"))["ok"], false);
}

#[test]
fn graph_of_the_running_example() {
    let r = json(graph(T2, T3));
    assert_eq!(r["ok"], true);
    assert_eq!(r["node_count"], 7);
    assert_eq!(r["nodes"].as_array().unwrap().len(), 7);
    assert_eq!(r["inconsistent_count"], 0);
    assert!(r["dot"].as_str().unwrap().starts_with("digraph"));
    let edges = r["edges"].as_array().unwrap();
    assert_eq!(edges.len(), r["edge_count"].as_u64().unwrap() as usize);

    let bad = json(graph(T1, T2));
    assert_eq!(bad["verdict"], false);
    assert_eq!(bad["nodes"][0]["inconsistent"], true);
}

#[test]
fn explore_lists_subterms_and_lts() {
    let r = json(explore(T2));
    assert_eq!(r["ok"], true);
    assert_eq!(r["size"], 9);
    assert_eq!(r["top_down"].as_array().unwrap().len(), 5);
    assert_eq!(r["top_down"], r["bottom_up"]);
    assert_eq!(r["lts"]["nodes"].as_array().unwrap().len(), 5);
    assert_eq!(r["lts"]["edges"].as_array().unwrap().len(), 8);

    let open = json(explore("?[end].X"));
    assert_eq!(open["closed"], false);
    assert!(open["lts"].is_null());
    assert_eq!(json(explore("rec X . X"))["ok"], false);
}
