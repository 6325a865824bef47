//! The type LTS: states are types (plus a `Skip` sink), transitions expose
//! termination, continuations, payloads and labels of the unfolded type.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::{render, unfold, Label, SessionType, Shape};

/// A transition label.
///
/// The derived order is the search order used throughout the crate:
/// `End < InCont < OutCont < InPayload(i) < OutPayload(i) < Bra(l) < Sel(l)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Action {
    End,
    InCont,
    OutCont,
    /// 1-based payload position.
    InPayload(u32),
    OutPayload(u32),
    Bra(Label),
    Sel(Label),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::End => f.write_str("end"),
            Action::InCont => f.write_str("?c"),
            Action::OutCont => f.write_str("!c"),
            Action::InPayload(i) => write!(f, "?p{i}"),
            Action::OutPayload(i) => write!(f, "!p{i}"),
            Action::Bra(l) => write!(f, "&{l}"),
            Action::Sel(l) => write!(f, "+{l}"),
        }
    }
}

/// A state of the type LTS.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum LtsNode {
    Type(SessionType),
    Skip,
}

impl fmt::Display for LtsNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtsNode::Type(t) => write!(f, "{t}"),
            LtsNode::Skip => f.write_str("Skip"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("type has free variables: {term}")]
pub struct OpenType {
    pub term: String,
}

pub(crate) fn require_closed(t: &SessionType) -> Result<(), OpenType> {
    if t.is_closed() {
        Ok(())
    } else {
        Err(OpenType { term: render(t) })
    }
}

/// Transitions of an already unfolded type, in action order.
fn unfolded_transitions(u: &SessionType) -> Vec<(Action, LtsNode)> {
    let ty = |t: &SessionType| LtsNode::Type(t.clone());
    fn payloads(ps: &[SessionType], mk: fn(u32) -> Action) -> impl Iterator<Item = (Action, LtsNode)> + '_ {
        ps.iter().enumerate().map(move |(i, p)| (mk(i as u32 + 1), LtsNode::Type(p.clone())))
    }
    match u.shape() {
        Shape::End => vec![(Action::End, LtsNode::Skip)],
        Shape::Input(ps, c) => {
            std::iter::once((Action::InCont, ty(c))).chain(payloads(ps, Action::InPayload)).collect()
        }
        Shape::Output(ps, c) => {
            std::iter::once((Action::OutCont, ty(c))).chain(payloads(ps, Action::OutPayload)).collect()
        }
        Shape::Branch(bs) => bs.iter().map(|(l, b)| (Action::Bra(l.clone()), ty(b))).collect(),
        Shape::Select(bs) => bs.iter().map(|(l, b)| (Action::Sel(l.clone()), ty(b))).collect(),
        // closed types never unfold to a variable
        Shape::Var(_) | Shape::Rec(_) => Vec::new(),
    }
}

/// Outgoing transitions of `t`, computed from its unfolding.
pub fn transitions(t: &SessionType) -> Result<Vec<(Action, LtsNode)>, OpenType> {
    require_closed(t)?;
    Ok(unfolded_transitions(&unfold(t)))
}

/// Number of transitions leaving `t` read off its head constructor, without
/// unfolding: `rec` and variables have none.
pub fn out_degree(t: &SessionType) -> usize {
    match t.shape() {
        Shape::Var(_) | Shape::Rec(_) => 0,
        Shape::End => 1,
        Shape::Input(ps, _) | Shape::Output(ps, _) => ps.len() + 1,
        Shape::Select(bs) | Shape::Branch(bs) => bs.len(),
    }
}

/// The part of the type LTS reachable from one or more root types.
///
/// A state is identified by the unfolding of its type, so `T` and
/// `unfold(T)` are one state. Each state remembers the first type (in
/// breadth-first order) that reached it, which is what gets displayed.
#[derive(Clone, Debug)]
pub struct TypeLts {
    nodes: Vec<LtsNode>,
    index: HashMap<SessionType, usize>,
    skip: Option<usize>,
    edges: Vec<Vec<(Action, usize)>>,
    roots: Vec<usize>,
}

impl TypeLts {
    pub fn build(roots: &[SessionType]) -> Result<Self, OpenType> {
        for r in roots {
            require_closed(r)?;
        }
        let mut lts = TypeLts {
            nodes: Vec::new(),
            index: HashMap::new(),
            skip: None,
            edges: Vec::new(),
            roots: Vec::new(),
        };
        let mut queue = std::collections::VecDeque::new();
        for r in roots {
            let (id, fresh) = lts.intern(&LtsNode::Type(r.clone()));
            if fresh {
                queue.push_back(id);
            }
            lts.roots.push(id);
        }
        while let Some(id) = queue.pop_front() {
            let LtsNode::Type(t) = &lts.nodes[id] else { continue };
            let mut out = Vec::new();
            for (a, target) in unfolded_transitions(&unfold(t)) {
                let (tid, fresh) = lts.intern(&target);
                if fresh {
                    queue.push_back(tid);
                }
                out.push((a, tid));
            }
            lts.edges[id] = out;
        }
        Ok(lts)
    }

    fn intern(&mut self, node: &LtsNode) -> (usize, bool) {
        let key = match node {
            LtsNode::Skip => None,
            LtsNode::Type(t) => Some(unfold(t)),
        };
        let existing = match &key {
            None => self.skip,
            Some(k) => self.index.get(k).copied(),
        };
        if let Some(id) = existing {
            return (id, false);
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.edges.push(Vec::new());
        match key {
            None => self.skip = Some(id),
            Some(k) => {
                self.index.insert(k, id);
            }
        }
        (id, true)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn node(&self, id: usize) -> &LtsNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[LtsNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.roots[0]
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// State id of a type, if it is reachable.
    pub fn lookup(&self, node: &LtsNode) -> Option<usize> {
        match node {
            LtsNode::Skip => self.skip,
            LtsNode::Type(t) => {
                if !t.is_closed() {
                    return None;
                }
                self.index.get(&unfold(t)).copied()
            }
        }
    }

    /// Outgoing edges of a state, sorted by action.
    pub fn out_edges(&self, id: usize) -> &[(Action, usize)] {
        &self.edges[id]
    }

    pub fn successor(&self, id: usize, action: &Action) -> Option<usize> {
        let out = &self.edges[id];
        out.binary_search_by(|(a, _)| a.cmp(action)).ok().map(|i| out[i].1)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &Action, usize)> + '_ {
        self.edges.iter().enumerate().flat_map(|(s, out)| out.iter().map(move |(a, t)| (s, a, *t)))
    }

    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph lts {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (id, n) in self.nodes.iter().enumerate() {
            let style = if self.roots.contains(&id) { ", penwidth=2" } else { "" };
            writeln!(out, "  n{id} [label=\"{}\"{style}];", dot_escape(&n.to_string())).unwrap();
        }
        for (s, a, t) in self.edges() {
            writeln!(out, "  n{s} -> n{t} [label=\"{}\"];", dot_escape(&a.to_string())).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn build_lts(t: &SessionType) -> Result<TypeLts, OpenType> {
    TypeLts::build(std::slice::from_ref(t))
}
