//! Bottom-up and top-down subterm sets.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::syntax::{for_each_child, instantiate, render, unfold_once, SessionType, Shape};

/// A finite set of types, iterated in lexicographic order of their rendering.
#[derive(Clone, PartialEq, Eq)]
pub struct SubtermSet {
    sorted: Vec<(String, SessionType)>,
    members: HashSet<SessionType>,
}

impl SubtermSet {
    fn from_set(members: HashSet<SessionType>) -> Self {
        let mut sorted: Vec<_> = members.iter().map(|t| (render(t), t.clone())).collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        SubtermSet { sorted, members }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn contains(&self, t: &SessionType) -> bool {
        self.members.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SessionType> + '_ {
        self.sorted.iter().map(|(_, t)| t)
    }

    /// Rendered members, in iteration order.
    pub fn rendered(&self) -> impl Iterator<Item = &str> + '_ {
        self.sorted.iter().map(|(s, _)| s.as_str())
    }

    pub fn union(&self, other: &SubtermSet) -> SubtermSet {
        SubtermSet::from_set(self.members.union(&other.members).cloned().collect())
    }

    pub fn is_superset(&self, other: &SubtermSet) -> bool {
        self.members.is_superset(&other.members)
    }
}

impl fmt::Debug for SubtermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.rendered()).finish()
    }
}

/// Subterms collected structurally, closing each `rec` body under
/// substitution of the `rec` itself.
pub fn sub_bottom_up(t: &SessionType) -> SubtermSet {
    fn go(t: &SessionType, memo: &mut HashMap<SessionType, HashSet<SessionType>>) -> HashSet<SessionType> {
        if let Some(s) = memo.get(t) {
            return s.clone();
        }
        let mut out = HashSet::from([t.clone()]);
        match t.shape() {
            Shape::Rec(body) => {
                for s in go(body, memo) {
                    out.insert(instantiate(&s, t));
                }
            }
            _ => for_each_child(t, |c| out.extend(go(c, memo))),
        }
        memo.insert(t.clone(), out.clone());
        out
    }
    SubtermSet::from_set(go(t, &mut HashMap::new()))
}

/// Least set containing `t` that is closed under taking immediate children
/// and under unfolding a `rec` once.
pub fn sub_top_down(t: &SessionType) -> SubtermSet {
    SubtermSet::from_set(top_down_set(std::slice::from_ref(t)))
}

pub(crate) fn top_down_set(roots: &[SessionType]) -> HashSet<SessionType> {
    let mut seen: HashSet<SessionType> = HashSet::new();
    let mut work: Vec<SessionType> = roots.to_vec();
    while let Some(t) = work.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        match unfold_once(&t) {
            Some(u) => work.push(u),
            None => for_each_child(&t, |c| work.push(c.clone())),
        }
    }
    seen
}

/// `sub_top_down(t) ∪ sub_top_down(u)`.
pub fn sub_pair(t: &SessionType, u: &SessionType) -> SubtermSet {
    SubtermSet::from_set(top_down_set(&[t.clone(), u.clone()]))
}
