//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use stcheck_core::bench::{gen_blowup_family, mutate};
use stcheck_core::{
    build_lts, parse, product_graph, size, subtype, unfold, Algorithm, Limits, LtsNode, ProductNode,
    SessionType,
};

const T1: &str = "rec X . +{ respond: ?[end].X, exit: end }";
const T2: &str = "rec X . +{ respond: ?[end].X, exit: end, replicate: ?[X].X }";
const T3: &str = "rec Y . +{ respond: ?[end].Y, exit: end, \
                  replicate: ?[rec X . +{ respond: ?[end].X, exit: end }].Y }";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn verdict(t: &SessionType, u: &SessionType, algo: Algorithm) -> bool {
    subtype(t, u, algo, &Limits::none()).unwrap().verdict
}

fn all_verdicts(t: &SessionType, u: &SessionType) -> [bool; 4] {
    Algorithm::ALL.map(|a| verdict(t, u, a))
}

fn interface_verdicts() -> Outcome {
    let start = Instant::now();
    let (t1, t2, t3) = (parse(T1).unwrap(), parse(T2).unwrap(), parse(T3).unwrap());
    let cases = [(&t2, &t1, true, "T2 <= T1"), (&t2, &t3, true, "T2 <= T3"), (&t1, &t2, false, "T1 </= T2")];
    let mut wrong = Vec::new();
    for (t, u, expected, name) in cases {
        for algo in Algorithm::ALL {
            if verdict(t, u, algo) != expected {
                wrong.push(format!("{name} under {algo}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = wrong.is_empty() && elapsed < Duration::from_secs(1);
    outcome(pass, format!("12 checks, wrong={wrong:?}, total {elapsed:.2?} (< 1s)"))
}

fn interface_product_graph() -> Outcome {
    let (t1, t2, t3) = (parse(T1).unwrap(), parse(T2).unwrap(), parse(T3).unwrap());
    let end = SessionType::end();
    let inp = |p: &SessionType, c: &SessionType| SessionType::input(vec![p.clone()], c.clone()).unwrap();
    let mut expected: Vec<ProductNode> = [
        (t2.clone(), t3.clone()),
        (inp(&end, &t2), inp(&end, &t3)),
        (end.clone(), end.clone()),
        (t2.clone(), t1.clone()),
        (inp(&t2, &t2), inp(&t1, &t3)),
        (inp(&end, &t2), inp(&end, &t1)),
    ]
    .iter()
    .map(|(l, r)| ProductNode::types(l, r))
    .collect();
    expected.push(ProductNode::new(LtsNode::Skip, LtsNode::Skip));

    let g = product_graph(&t2, &t3).unwrap();
    let found: HashSet<_> = expected.iter().filter_map(|p| g.find(p)).collect();
    let displayed: HashSet<ProductNode> = g.nodes().collect();
    let literal = expected.iter().all(|p| displayed.contains(p));
    let pass = g.node_count() == 7 && g.inconsistent_count() == 0 && found.len() == 7 && literal;
    outcome(
        pass,
        format!(
            "nodes={} inconsistent={} matched R+Skip={}/7 literal={literal}",
            g.node_count(),
            g.inconsistent_count(),
            found.len()
        ),
    )
}

fn size_bounds() -> Outcome {
    let mut rng = common::rng(0xacce_0003);
    let samples = 10_000;
    let mut violations = 0;
    let mut max_size = 0;
    for _ in 0..samples {
        let t = common::random_type(&mut rng, 60);
        let n = size(&t);
        max_size = max_size.max(n);
        let lts = build_lts(&t).unwrap();
        if lts.edge_count() as u64 > 2 * n - 1 || lts.node_count() as u64 > n + 1 {
            violations += 1;
        }
    }
    outcome(
        violations == 0 && max_size <= 60,
        format!("{samples} types, max size {max_size}, violations={violations}"),
    )
}

struct PairStats {
    pairs: Vec<(SessionType, SessionType)>,
    quadratic_violations: usize,
}

fn oracle_equivalence(stats: &mut PairStats) -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(0xacce_0004);
    let samples = 10_000;
    let (mut disagree, mut reflexive_fail, mut positives) = (0, 0, 0);
    for _ in 0..samples {
        let (t, u) = common::random_pair(&mut rng, 40);
        let v = all_verdicts(&t, &u);
        if v.iter().any(|b| *b != v[0]) || common::reference_subtype(&t, &u) != v[0] {
            disagree += 1;
        }
        positives += v[0] as usize;
        if all_verdicts(&t, &t).contains(&false) || all_verdicts(&u, &u).contains(&false) {
            reflexive_fail += 1;
        }
        stats.pairs.push((t, u));
    }

    // triples along mutation chains, where subtype pairs are common
    let cfg = common::config(40);
    let (mut triples, mut transitive_fail, mut rounds) = (0usize, 0, 0);
    while triples < 2_000 && rounds < 20_000 {
        rounds += 1;
        let mut chain = vec![common::random_type(&mut rng, 30)];
        for _ in 0..5 {
            let next = mutate(chain.last().unwrap(), &cfg, &mut rng);
            if next.size() <= 40 {
                chain.push(next);
            }
        }
        let m = chain.len();
        let le: Vec<Vec<bool>> =
            chain.iter().map(|a| chain.iter().map(|b| verdict(a, b, Algorithm::Product)).collect()).collect();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let distinct = chain[i] != chain[j] && chain[j] != chain[k] && chain[i] != chain[k];
                    if distinct && le[i][j] && le[j][k] {
                        triples += 1;
                        if all_verdicts(&chain[i], &chain[k]).contains(&false) {
                            transitive_fail += 1;
                        }
                    }
                }
            }
        }
        for (a, b) in chain.iter().zip(chain.iter().skip(1)) {
            stats.pairs.push((a.clone(), b.clone()));
        }
    }
    let elapsed = start.elapsed();
    let pass = disagree == 0
        && reflexive_fail == 0
        && transitive_fail == 0
        && triples >= 1_000
        && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "{samples} pairs ({positives} positive), disagreements (incl. reference)={disagree}, reflexivity failures={reflexive_fail}, \
             {triples} triples, transitivity failures={transitive_fail}, {elapsed:.2?} (< 60s)"
        ),
    )
}

fn complexity_separation() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut jv = Vec::new();
    for k in 1..=11 {
        let (t, u) = gen_blowup_family(k);
        let ind = subtype(&t, &u, Algorithm::Inductive, &Limits::none()).unwrap();
        let memo = subtype(&t, &u, Algorithm::Memoized, &Limits::none()).unwrap();
        let (i, m) = (ind.counters.judgements_visited, memo.counters.memo_entries);
        if m > i || m > memo.counters.judgements_visited {
            pass = false;
            notes.push(format!("memo_entries {m} exceeds judgements at k={k}"));
        }
        jv.push(i);
    }
    let ratios: Vec<f64> = (3..=10).map(|k| jv[k] as f64 / jv[k - 1] as f64).collect();
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_ratio < 1.5 {
        pass = false;
    }
    notes.push(format!("min jv(k+1)/jv(k) over 3..=10 = {min_ratio:.2} (>= 1.5)"));

    let mut ks = Vec::new();
    let mut nodes = Vec::new();
    let mut slowest = Duration::ZERO;
    for k in 1..=50u32 {
        let (t, u) = gen_blowup_family(k as usize);
        let start = Instant::now();
        let r = subtype(&t, &u, Algorithm::Product, &Limits::none()).unwrap();
        let elapsed = start.elapsed();
        if k == 50 {
            slowest = elapsed;
        }
        ks.push(k as f64);
        nodes.push(r.counters.product_nodes as f64);
    }
    let c = nodes.iter().zip(&ks).map(|(y, k)| y * k * k).sum::<f64>()
        / ks.iter().map(|k| k.powi(4)).sum::<f64>();
    let resid = nodes.iter().zip(&ks).map(|(y, k)| (y - c * k * k).powi(2)).sum::<f64>().sqrt()
        / nodes.iter().map(|y| y * y).sum::<f64>().sqrt();
    if resid > 0.25 {
        pass = false;
    }
    if slowest >= Duration::from_secs(1) {
        pass = false;
    }
    notes.push(format!("product_nodes ~ {c:.3}*k^2, relative residual {resid:.4} (<= 0.25)"));
    notes.push(format!("product k=50 in {slowest:.2?} (< 1s)"));
    outcome(pass, notes.join("; "))
}

fn quadratic_scaling(stats: &mut PairStats) -> Outcome {
    for k in 1..=50 {
        stats.pairs.push(gen_blowup_family(k));
    }
    for (t, u) in &stats.pairs {
        let r = subtype(t, u, Algorithm::Product, &Limits::none()).unwrap();
        let full = product_graph(t, u).unwrap().node_count() as u64;
        let bound = (size(t) + size(u) + 2).pow(2);
        if r.counters.product_nodes > bound || full > bound {
            stats.quadratic_violations += 1;
        }
    }
    outcome(
        stats.quadratic_violations == 0,
        format!("{} pairs, violations={}", stats.pairs.len(), stats.quadratic_violations),
    )
}

fn unfold_alpha_invariance() -> Outcome {
    let mut rng = common::rng(0xacce_0007);
    let samples = 2_000;
    let mut violations = 0;
    for i in 0..samples {
        let (t, u) = common::random_pair(&mut rng, 40);
        let base = all_verdicts(&t, &u);
        let salt = rng.gen_range(0..1000) + i;
        let variants = [
            (unfold(&t), u.clone()),
            (t.clone(), unfold(&u)),
            (unfold(&t), unfold(&u)),
            (common::alpha_rename(&t, salt), common::alpha_rename(&u, salt + 1)),
        ];
        if variants.iter().any(|(a, b)| all_verdicts(a, b) != base) {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{samples} pairs x 4 variants x 4 algorithms, violations={violations}"))
}

fn main() -> ExitCode {
    let mut stats = PairStats { pairs: Vec::new(), quadratic_violations: 0 };
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 interface verdicts", interface_verdicts()),
        ("2 product graph of (T2, T3)", interface_product_graph()),
        ("3 LTS size bounds", size_bounds()),
        ("4 oracle equivalence", oracle_equivalence(&mut stats)),
        ("5 complexity separation", complexity_separation()),
        ("6 quadratic product bound", quadratic_scaling(&mut stats)),
        ("7 unfold and alpha invariance", unfold_alpha_invariance()),
    ];
    let mut failed = 0;
    for (name, o) in &criteria {
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
