//! Decision procedures for session subtyping.
//!
//! * [`subtype_inductive`]: judgement search where every premise is checked
//!   under the assumptions of its own path only.
//! * [`subtype_memoized`]: the same search with a single assumption set that
//!   is threaded through all premises.
//! * [`subtype_product`]: reachability of an inconsistent pair in the
//!   product of the two type LTSs, quadratic in `|T| + |U|`.
//! * [`subtype_all_pairs`]: backward search from every inconsistent pair,
//!   deciding subtyping for all pairs of subterms at once.
//!
//! In the product graph, a move on a payload of an output flips the pair:
//! outputs are contravariant in their payloads.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

#[cfg(not(target_arch = "wasm32"))]
use std::time::Instant;
// std's clock panics on wasm32-unknown-unknown
#[cfg(target_arch = "wasm32")]
use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::lts::{dot_escape, require_closed, Action, LtsNode, OpenType, TypeLts};
use crate::subterms::top_down_set;
use crate::syntax::{unfold, SessionType, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Inductive,
    Memoized,
    Product,
    AllPairs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Inductive, Algorithm::Memoized, Algorithm::Product, Algorithm::AllPairs];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Inductive => "inductive",
            Algorithm::Memoized => "memoized",
            Algorithm::Product => "product",
            Algorithm::AllPairs => "allpairs",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            format!("unknown algorithm `{s}` (expected inductive, memoized, product or allpairs)")
        })
    }
}

/// Instrumentation. Counters an algorithm does not maintain stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub judgements_visited: u64,
    pub memo_entries: u64,
    pub product_nodes: u64,
    pub product_edges: u64,
    pub max_context_depth: u64,
}

impl Counters {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, u64)> {
        [
            ("judgements_visited", self.judgements_visited),
            ("memo_entries", self.memo_entries),
            ("product_nodes", self.product_nodes),
            ("product_edges", self.product_edges),
            ("max_context_depth", self.max_context_depth),
        ]
        .into_iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubtypeReport {
    pub verdict: bool,
    pub algorithm: Algorithm,
    pub counters: Counters,
    pub elapsed: Duration,
}

/// Resource limits for a single decision.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    pub timeout: Option<Duration>,
    pub max_judgements: Option<u64>,
}

impl Limits {
    pub fn none() -> Self {
        Limits::default()
    }

    pub fn timeout(d: Duration) -> Self {
        Limits { timeout: Some(d), max_judgements: None }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SubtypeError {
    #[error(transparent)]
    OpenType(#[from] OpenType),
    #[error("{algorithm} gave up after {elapsed:?} ({} judgements)", .counters.judgements_visited)]
    Timeout { algorithm: Algorithm, counters: Counters, elapsed: Duration },
}

/// Decide `t ≤ u` with the chosen algorithm.
pub fn subtype(
    t: &SessionType,
    u: &SessionType,
    algorithm: Algorithm,
    limits: &Limits,
) -> Result<SubtypeReport, SubtypeError> {
    match algorithm {
        Algorithm::Inductive => judgement_search(t, u, false, limits),
        Algorithm::Memoized => judgement_search(t, u, true, limits),
        Algorithm::Product => product_search(t, u),
        Algorithm::AllPairs => {
            let start = Instant::now();
            let pairs = subtype_all_pairs(t, u)?;
            Ok(SubtypeReport {
                verdict: pairs.contains_types(t, u),
                algorithm,
                counters: Counters {
                    product_nodes: pairs.grid_nodes as u64,
                    product_edges: pairs.grid_edges as u64,
                    ..Counters::default()
                },
                elapsed: start.elapsed(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Judgement search

/// Premises of `t ≤ u` after unfolding both sides, or `None` when the
/// judgement fails outright.
fn premises(t: &SessionType, u: &SessionType) -> Option<Vec<(SessionType, SessionType)>> {
    match (t.shape(), u.shape()) {
        (Shape::End, Shape::End) => Some(Vec::new()),
        (Shape::Input(ps, c), Shape::Input(qs, d)) if ps.len() == qs.len() => Some(
            std::iter::once((c.clone(), d.clone()))
                .chain(ps.iter().cloned().zip(qs.iter().cloned()))
                .collect(),
        ),
        (Shape::Output(ps, c), Shape::Output(qs, d)) if ps.len() == qs.len() => Some(
            std::iter::once((c.clone(), d.clone()))
                .chain(qs.iter().cloned().zip(ps.iter().cloned()))
                .collect(),
        ),
        // every label offered on the left must be accepted on the right
        (Shape::Branch(ls), Shape::Branch(rs)) => {
            ls.iter().map(|(l, a)| lookup_label(rs, l).map(|b| (a.clone(), b.clone()))).collect()
        }
        // every label the right may select must be selectable on the left
        (Shape::Select(ls), Shape::Select(rs)) => {
            rs.iter().map(|(l, b)| lookup_label(ls, l).map(|a| (a.clone(), b.clone()))).collect()
        }
        _ => None,
    }
}

fn lookup_label<'a>(
    bs: &'a [(crate::syntax::Label, SessionType)],
    l: &crate::syntax::Label,
) -> Option<&'a SessionType> {
    bs.binary_search_by(|(k, _)| k.cmp(l)).ok().map(|i| &bs[i].1)
}

struct Frame {
    pair: (SessionType, SessionType),
    premises: Vec<(SessionType, SessionType)>,
    next: usize,
}

/// Depth-first judgement search. With `thread_assumptions` the assumption
/// set only grows; otherwise it holds exactly the judgements on the current
/// path. A failing premise fails every ancestor, so the search stops at the
/// first failure either way.
fn judgement_search(
    t: &SessionType,
    u: &SessionType,
    thread_assumptions: bool,
    limits: &Limits,
) -> Result<SubtypeReport, SubtypeError> {
    require_closed(t)?;
    require_closed(u)?;
    let algorithm = if thread_assumptions { Algorithm::Memoized } else { Algorithm::Inductive };
    let start = Instant::now();
    let mut counters = Counters::default();
    let mut unfolded: HashMap<SessionType, SessionType> = HashMap::new();
    let mut assumed: HashSet<(SessionType, SessionType)> = HashSet::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut pending = Some((t.clone(), u.clone()));

    let verdict = loop {
        if let Some(pair) = pending.take() {
            counters.judgements_visited += 1;
            if counters.judgements_visited % 4096 == 0 || limits.max_judgements.is_some() {
                let over_time = limits.timeout.is_some_and(|d| start.elapsed() > d);
                let over_count = limits.max_judgements.is_some_and(|m| counters.judgements_visited > m);
                if over_time || over_count {
                    counters.memo_entries = if thread_assumptions { assumed.len() as u64 } else { 0 };
                    return Err(SubtypeError::Timeout { algorithm, counters, elapsed: start.elapsed() });
                }
            }
            if !assumed.contains(&pair) {
                let mut unfold_cached =
                    |x: &SessionType| unfolded.entry(x.clone()).or_insert_with(|| unfold(x)).clone();
                let (l, r) = (unfold_cached(&pair.0), unfold_cached(&pair.1));
                let Some(premises) = premises(&l, &r) else {
                    break false;
                };
                assumed.insert(pair.clone());
                counters.max_context_depth = counters.max_context_depth.max(assumed.len() as u64);
                stack.push(Frame { pair, premises, next: 0 });
            }
        }
        let Some(top) = stack.last_mut() else {
            break true;
        };
        if top.next < top.premises.len() {
            pending = Some(top.premises[top.next].clone());
            top.next += 1;
        } else {
            let done = stack.pop().unwrap();
            if !thread_assumptions {
                assumed.remove(&done.pair);
            }
        }
    };

    if thread_assumptions {
        counters.memo_entries = assumed.len() as u64;
    }
    Ok(SubtypeReport { verdict, algorithm, counters, elapsed: start.elapsed() })
}

/// Judgement search keeping only the assumptions of the current path.
pub fn subtype_inductive(t: &SessionType, u: &SessionType) -> Result<SubtypeReport, SubtypeError> {
    judgement_search(t, u, false, &Limits::none())
}

/// Judgement search threading one assumption set through all premises.
pub fn subtype_memoized(t: &SessionType, u: &SessionType) -> Result<SubtypeReport, SubtypeError> {
    judgement_search(t, u, true, &Limits::none())
}

// ---------------------------------------------------------------------------
// Product graph

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HeadKind {
    Skip,
    End,
    Input,
    Output,
    Branch,
    Select,
}

fn head_kind(edges: &[(Action, usize)]) -> HeadKind {
    match edges.first().map(|(a, _)| a) {
        None => HeadKind::Skip,
        Some(Action::End) => HeadKind::End,
        Some(Action::InCont | Action::InPayload(_)) => HeadKind::Input,
        Some(Action::OutCont | Action::OutPayload(_)) => HeadKind::Output,
        Some(Action::Bra(_)) => HeadKind::Branch,
        Some(Action::Sel(_)) => HeadKind::Select,
    }
}

/// Moves of the left state that the right state must match.
fn left_must_be_matched(a: &Action) -> bool {
    !matches!(a, Action::Sel(_))
}

/// Moves of the right state that the left state must match.
fn right_must_be_matched(a: &Action) -> bool {
    matches!(a, Action::End | Action::InPayload(_) | Action::OutPayload(_) | Action::Sel(_))
}

fn inconsistent_in(lts: &TypeLts, l: usize, r: usize) -> bool {
    let (le, re) = (lts.out_edges(l), lts.out_edges(r));
    // The action classes alone cannot tell a selection on the left from a
    // branching on the right, so the head constructors are compared first.
    if head_kind(le) != head_kind(re) {
        return true;
    }
    le.iter().any(|(a, _)| left_must_be_matched(a) && lts.successor(r, a).is_none())
        || re.iter().any(|(a, _)| right_must_be_matched(a) && lts.successor(l, a).is_none())
}

/// Matched moves of a pair of states, in action order.
fn successors_in(lts: &TypeLts, l: usize, r: usize) -> Vec<(Action, (usize, usize))> {
    let (le, re) = (lts.out_edges(l), lts.out_edges(r));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < le.len() && j < re.len() {
        match le[i].0.cmp(&re[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let (a, lt, rt) = (&le[i].0, le[i].1, re[j].1);
                let next = if matches!(a, Action::OutPayload(_)) { (rt, lt) } else { (lt, rt) };
                out.push((a.clone(), next));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// A pair of LTS states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductNode {
    pub left: LtsNode,
    pub right: LtsNode,
}

impl ProductNode {
    pub fn new(left: LtsNode, right: LtsNode) -> Self {
        ProductNode { left, right }
    }

    pub fn types(left: &SessionType, right: &SessionType) -> Self {
        ProductNode::new(LtsNode::Type(left.clone()), LtsNode::Type(right.clone()))
    }

    fn roots(&self) -> Result<(TypeLts, usize, usize), OpenType> {
        let types: Vec<SessionType> = [&self.left, &self.right]
            .into_iter()
            .filter_map(|n| match n {
                LtsNode::Type(t) => Some(t.clone()),
                LtsNode::Skip => None,
            })
            .collect();
        let mut lts = TypeLts::build(&types)?;
        if lts.lookup(&LtsNode::Skip).is_none() {
            lts = TypeLts::build(&[types.as_slice(), &[SessionType::end()]].concat())?;
        }
        let l = lts.lookup(&self.left).expect("left state is in its own LTS");
        let r = lts.lookup(&self.right).expect("right state is in its own LTS");
        Ok((lts, l, r))
    }
}

impl fmt::Display for ProductNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.left, self.right)
    }
}

/// A pair is inconsistent when one side has a move the other cannot match
/// (or the two head constructors differ), refuting subtyping outright.
pub fn is_inconsistent(p: &ProductNode) -> Result<bool, OpenType> {
    let (lts, l, r) = p.roots()?;
    Ok(inconsistent_in(&lts, l, r))
}

/// Matched moves out of a pair. Moves on output payloads swap the pair.
pub fn product_successors(p: &ProductNode) -> Result<Vec<(Action, ProductNode)>, OpenType> {
    let (lts, l, r) = p.roots()?;
    Ok(successors_in(&lts, l, r)
        .into_iter()
        .map(|(a, (x, y))| (a, ProductNode::new(lts.node(x).clone(), lts.node(y).clone())))
        .collect())
}

/// The product graph reachable from `(t, u)`.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    lts: TypeLts,
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    edges: Vec<(usize, Action, usize)>,
    inconsistent: Vec<bool>,
}

impl ProductGraph {
    pub fn root(&self) -> ProductNode {
        self.node(0)
    }

    pub fn node_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, i: usize) -> ProductNode {
        let (l, r) = self.pairs[i];
        ProductNode::new(self.lts.node(l).clone(), self.lts.node(r).clone())
    }

    pub fn nodes(&self) -> impl Iterator<Item = ProductNode> + '_ {
        (0..self.pairs.len()).map(|i| self.node(i))
    }

    pub fn edges(&self) -> &[(usize, Action, usize)] {
        &self.edges
    }

    pub fn is_node_inconsistent(&self, i: usize) -> bool {
        self.inconsistent[i]
    }

    pub fn inconsistent_count(&self) -> usize {
        self.inconsistent.iter().filter(|b| **b).count()
    }

    /// Index of a pair given by types, identified up to unfolding.
    pub fn find(&self, p: &ProductNode) -> Option<usize> {
        let l = self.lts.lookup(&p.left)?;
        let r = self.lts.lookup(&p.right)?;
        self.index.get(&(l, r)).copied()
    }

    pub fn verdict(&self) -> bool {
        !self.inconsistent.iter().any(|b| *b)
    }

    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph product {\n  node [shape=box, fontname=\"monospace\"];\n");
        for i in 0..self.pairs.len() {
            let mut attrs = Vec::new();
            if i == 0 {
                attrs.push("penwidth=2".to_string());
            }
            if self.inconsistent[i] {
                attrs.push("color=red, style=filled, fillcolor=\"#ffd0d0\"".to_string());
            }
            let extra = attrs.iter().map(|a| format!(", {a}")).collect::<String>();
            let label = dot_escape(&self.node(i).to_string());
            let tag = if self.inconsistent[i] { "  // inconsistent" } else { "" };
            writeln!(out, "  p{i} [label=\"{label}\"{extra}];{tag}").unwrap();
        }
        for (s, a, t) in &self.edges {
            writeln!(out, "  p{s} -> p{t} [label=\"{}\"];", dot_escape(&a.to_string())).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Build the whole product graph reachable from `(t, u)`, marking every
/// inconsistent pair. Inconsistent pairs are expanded too.
pub fn product_graph(t: &SessionType, u: &SessionType) -> Result<ProductGraph, OpenType> {
    let lts = TypeLts::build(&[t.clone(), u.clone()])?;
    let root = (lts.roots()[0], lts.roots()[1]);
    let mut g = ProductGraph {
        pairs: vec![root],
        index: HashMap::from([(root, 0)]),
        edges: Vec::new(),
        inconsistent: Vec::new(),
        lts,
    };
    let mut next = 0;
    while next < g.pairs.len() {
        let (l, r) = g.pairs[next];
        g.inconsistent.push(inconsistent_in(&g.lts, l, r));
        for (a, pair) in successors_in(&g.lts, l, r) {
            let id = *g.index.entry(pair).or_insert_with(|| {
                g.pairs.push(pair);
                g.pairs.len() - 1
            });
            g.edges.push((next, a, id));
        }
        next += 1;
    }
    Ok(g)
}

/// Breadth-first search for an inconsistent pair, stopping at the first one.
fn product_search(t: &SessionType, u: &SessionType) -> Result<SubtypeReport, SubtypeError> {
    let start = Instant::now();
    let lts = TypeLts::build(&[t.clone(), u.clone()])?;
    let root = (lts.roots()[0], lts.roots()[1]);
    let mut seen: HashSet<(usize, usize)> = HashSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut edges = 0u64;
    let mut verdict = !inconsistent_in(&lts, root.0, root.1);
    'search: while verdict {
        let Some((l, r)) = queue.pop_front() else { break };
        for (_, pair) in successors_in(&lts, l, r) {
            edges += 1;
            if seen.insert(pair) {
                if inconsistent_in(&lts, pair.0, pair.1) {
                    verdict = false;
                    break 'search;
                }
                queue.push_back(pair);
            }
        }
    }
    Ok(SubtypeReport {
        verdict,
        algorithm: Algorithm::Product,
        counters: Counters { product_nodes: seen.len() as u64, product_edges: edges, ..Counters::default() },
        elapsed: start.elapsed(),
    })
}

/// Quadratic decision by reachability of an inconsistent pair.
pub fn subtype_product(t: &SessionType, u: &SessionType) -> Result<SubtypeReport, SubtypeError> {
    product_search(t, u)
}

/// All pairs of states over `sub_pair(t, u) ∪ {Skip}` from which no
/// inconsistent pair is reachable, i.e. all subterm pairs in the subtype
/// relation.
#[derive(Debug, Clone)]
pub struct SubtypePairs {
    lts: TypeLts,
    related: HashSet<(usize, usize)>,
    grid_nodes: usize,
    grid_edges: usize,
}

impl SubtypePairs {
    pub fn contains(&self, p: &ProductNode) -> bool {
        match (self.lts.lookup(&p.left), self.lts.lookup(&p.right)) {
            (Some(l), Some(r)) => self.related.contains(&(l, r)),
            _ => false,
        }
    }

    pub fn contains_types(&self, t: &SessionType, u: &SessionType) -> bool {
        self.contains(&ProductNode::types(t, u))
    }

    pub fn len(&self) -> usize {
        self.related.len()
    }

    pub fn is_empty(&self) -> bool {
        self.related.is_empty()
    }

    /// Number of pairs in the full grid that was examined.
    pub fn grid_size(&self) -> usize {
        self.grid_nodes
    }

    pub fn iter(&self) -> impl Iterator<Item = ProductNode> + '_ {
        self.related
            .iter()
            .map(|&(l, r)| ProductNode::new(self.lts.node(l).clone(), self.lts.node(r).clone()))
    }
}

pub fn subtype_all_pairs(t: &SessionType, u: &SessionType) -> Result<SubtypePairs, OpenType> {
    require_closed(t)?;
    require_closed(u)?;
    let mut roots: Vec<SessionType> = vec![t.clone(), u.clone()];
    let mut rest: Vec<SessionType> = top_down_set(&roots).into_iter().collect();
    // deterministic state numbering
    rest.sort_by_cached_key(crate::syntax::render);
    roots.extend(rest);
    roots.push(SessionType::end());
    let lts = TypeLts::build(&roots)?;
    let n = lts.node_count();

    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n * n];
    let mut bad = vec![false; n * n];
    let mut grid_edges = 0;
    let mut queue = VecDeque::new();
    for l in 0..n {
        for r in 0..n {
            let id = l * n + r;
            if inconsistent_in(&lts, l, r) {
                bad[id] = true;
                queue.push_back(id);
            }
            for (_, (x, y)) in successors_in(&lts, l, r) {
                reverse[x * n + y].push(id);
                grid_edges += 1;
            }
        }
    }
    while let Some(id) = queue.pop_front() {
        for &pred in &reverse[id] {
            if !bad[pred] {
                bad[pred] = true;
                queue.push_back(pred);
            }
        }
    }
    let related = (0..n * n).filter(|id| !bad[*id]).map(|id| (id / n, id % n)).collect();
    Ok(SubtypePairs { lts, related, grid_nodes: n * n, grid_edges })
}

/// `t ≤ u` and `u ≤ t`.
pub fn equal_coinductive(t: &SessionType, u: &SessionType) -> Result<bool, SubtypeError> {
    Ok(subtype_product(t, u)?.verdict && subtype_product(u, t)?.verdict)
}

/// DOT rendering of the reachable product graph of `(t, u)`.
pub fn export_product_dot(t: &SessionType, u: &SessionType) -> Result<String, OpenType> {
    Ok(product_graph(t, u)?.to_dot())
}
