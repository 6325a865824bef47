//! Abstract syntax of binary session types.
//!
//! A [`SessionType`] is a handle to a hash-consed node. Bound variables are
//! de Bruijn indices, so α-equivalent types are represented by the very same
//! node and equality is a pointer comparison. Free variables keep their names.

pub(crate) mod intern;
mod parse;
mod render;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use parse::{parse, parse_unchecked, Position};
pub use render::render;

use intern::Interned;

/// A branch or selection label. Lowercase-initial identifier.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: &str) -> Result<Self, SyntaxError> {
        if is_label_ident(name) {
            Ok(Label(Arc::from(name)))
        } else {
            Err(SyntaxError::InvalidName {
                name: name.to_string(),
                expected: "label (lowercase-initial identifier)",
            })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_ident_rest(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn is_label_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(is_ident_rest)
        && s != "end"
        && s != "rec"
}

pub(crate) fn is_var_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(is_ident_rest)
}

/// A type variable occurrence.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Var {
    /// De Bruijn index: 0 refers to the innermost enclosing `rec`.
    Bound(u32),
    /// A variable not bound anywhere in the enclosing term.
    Free(Arc<str>),
}

/// The head constructor of a session type and its immediate children.
///
/// Branch and selection maps are kept sorted by label, which makes two maps
/// with the same entries in different source order the same value.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Shape {
    End,
    Var(Var),
    Rec(SessionType),
    Input(Box<[SessionType]>, SessionType),
    Output(Box<[SessionType]>, SessionType),
    Select(Box<[(Label, SessionType)]>),
    Branch(Box<[(Label, SessionType)]>),
}

/// An interned session type.
#[derive(Clone)]
pub struct SessionType(Arc<Interned>);

impl PartialEq for SessionType {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for SessionType {}

impl Hash for SessionType {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state)
    }
}

impl fmt::Debug for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Display for SessionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("{pos}: {message}")]
    Parse { pos: Position, message: String },
    #[error("{}non-contractive recursion: {term}", at(.pos))]
    NotContractive { pos: Option<Position>, term: String },
    #[error("{}duplicate label `{label}`", at(.pos))]
    DuplicateLabel { pos: Option<Position>, label: String },
    #[error("{}empty {what}: at least one entry is required", at(.pos))]
    EmptyArity { pos: Option<Position>, what: &'static str },
    #[error("invalid name `{name}`: expected {expected}")]
    InvalidName { name: String, expected: &'static str },
}

fn at(pos: &Option<Position>) -> String {
    pos.map(|p| format!("{p}: ")).unwrap_or_default()
}

impl SessionType {
    pub fn end() -> Self {
        intern::make(Shape::End)
    }

    /// A free type variable.
    pub fn var(name: &str) -> Result<Self, SyntaxError> {
        if !is_var_ident(name) {
            return Err(SyntaxError::InvalidName {
                name: name.to_string(),
                expected: "type variable (uppercase-initial identifier)",
            });
        }
        Ok(intern::make(Shape::Var(Var::Free(Arc::from(name)))))
    }

    pub(crate) fn bound(index: u32) -> Self {
        intern::make(Shape::Var(Var::Bound(index)))
    }

    /// `rec name . body`, binding the free occurrences of `name` in `body`.
    ///
    /// Fails if the resulting term is not contractive.
    pub fn rec(name: &str, body: &SessionType) -> Result<Self, SyntaxError> {
        if !is_var_ident(name) {
            return Err(SyntaxError::InvalidName {
                name: name.to_string(),
                expected: "type variable (uppercase-initial identifier)",
            });
        }
        let t = Self::rec_nameless(abstract_free(body, name, 0));
        if chain_is_contractive(&t) {
            Ok(t)
        } else {
            Err(SyntaxError::NotContractive { pos: None, term: render(&t) })
        }
    }

    pub(crate) fn rec_nameless(body: SessionType) -> Self {
        intern::make(Shape::Rec(body))
    }

    pub fn input(payloads: Vec<SessionType>, cont: SessionType) -> Result<Self, SyntaxError> {
        if payloads.is_empty() {
            return Err(SyntaxError::EmptyArity { pos: None, what: "input payload list" });
        }
        Ok(intern::make(Shape::Input(payloads.into(), cont)))
    }

    pub fn output(payloads: Vec<SessionType>, cont: SessionType) -> Result<Self, SyntaxError> {
        if payloads.is_empty() {
            return Err(SyntaxError::EmptyArity { pos: None, what: "output payload list" });
        }
        Ok(intern::make(Shape::Output(payloads.into(), cont)))
    }

    pub fn select(branches: Vec<(Label, SessionType)>) -> Result<Self, SyntaxError> {
        Ok(intern::make(Shape::Select(choice_map(branches, "selection")?)))
    }

    pub fn branch(branches: Vec<(Label, SessionType)>) -> Result<Self, SyntaxError> {
        Ok(intern::make(Shape::Branch(choice_map(branches, "branching")?)))
    }

    pub fn shape(&self) -> &Shape {
        &self.0.shape
    }

    /// Size as defined for the complexity bounds: `end` and variables count 1,
    /// every other constructor 1 plus the sizes of its children.
    pub fn size(&self) -> u64 {
        self.0.size
    }

    /// True iff there are no free variables (named or dangling indices).
    pub fn is_closed(&self) -> bool {
        self.0.loose == 0 && !self.0.free_names
    }

    pub(crate) fn loose(&self) -> u32 {
        self.0.loose
    }

    pub(crate) fn has_free_names(&self) -> bool {
        self.0.free_names
    }

    pub fn is_rec(&self) -> bool {
        matches!(self.shape(), Shape::Rec(_))
    }
}

fn choice_map(
    mut branches: Vec<(Label, SessionType)>,
    what: &'static str,
) -> Result<Box<[(Label, SessionType)]>, SyntaxError> {
    if branches.is_empty() {
        return Err(SyntaxError::EmptyArity { pos: None, what });
    }
    branches.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = branches.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(SyntaxError::DuplicateLabel { pos: None, label: w[0].0.to_string() });
    }
    Ok(branches.into())
}

/// Rebuild `t` with every child replaced by `f(child, binder_depth_of_child)`.
fn map_children(
    t: &SessionType,
    depth: u32,
    f: &mut impl FnMut(&SessionType, u32) -> SessionType,
) -> SessionType {
    let shape = match t.shape() {
        Shape::End | Shape::Var(_) => return t.clone(),
        Shape::Rec(body) => Shape::Rec(f(body, depth + 1)),
        Shape::Input(ps, c) => Shape::Input(ps.iter().map(|p| f(p, depth)).collect(), f(c, depth)),
        Shape::Output(ps, c) => Shape::Output(ps.iter().map(|p| f(p, depth)).collect(), f(c, depth)),
        Shape::Select(bs) => Shape::Select(bs.iter().map(|(l, b)| (l.clone(), f(b, depth))).collect()),
        Shape::Branch(bs) => Shape::Branch(bs.iter().map(|(l, b)| (l.clone(), f(b, depth))).collect()),
    };
    intern::make(shape)
}

/// Turn free occurrences of `name` into the bound index `depth`.
fn abstract_free(t: &SessionType, name: &str, depth: u32) -> SessionType {
    if !t.has_free_names() {
        return t.clone();
    }
    match t.shape() {
        Shape::Var(Var::Free(n)) if &**n == name => SessionType::bound(depth),
        _ => map_children(t, depth, &mut |c, d| abstract_free(c, name, d)),
    }
}

/// Add `by` to every index `>= cutoff`.
pub(crate) fn shift(t: &SessionType, by: u32, cutoff: u32) -> SessionType {
    if by == 0 || t.loose() <= cutoff {
        return t.clone();
    }
    match t.shape() {
        Shape::Var(Var::Bound(i)) => SessionType::bound(i + by),
        _ => map_children(t, cutoff, &mut |c, d| shift(c, by, d)),
    }
}

/// Replace index `depth` by `s` (valid at depth 0) and lower the indices
/// above it by one. This opens the binder of a `rec` whose body is `t`.
fn instantiate_at(
    t: &SessionType,
    s: &SessionType,
    depth: u32,
    memo: &mut HashMap<(SessionType, u32), SessionType>,
) -> SessionType {
    if t.loose() <= depth {
        return t.clone();
    }
    if let Some(r) = memo.get(&(t.clone(), depth)) {
        return r.clone();
    }
    let r = match t.shape() {
        Shape::Var(Var::Bound(i)) => match (*i).cmp(&depth) {
            std::cmp::Ordering::Equal => shift(s, depth, 0),
            std::cmp::Ordering::Greater => SessionType::bound(i - 1),
            std::cmp::Ordering::Less => t.clone(),
        },
        _ => map_children(t, depth, &mut |c, d| instantiate_at(c, s, d, memo)),
    };
    memo.insert((t.clone(), depth), r.clone());
    r
}

pub(crate) fn instantiate(body: &SessionType, s: &SessionType) -> SessionType {
    instantiate_at(body, s, 0, &mut HashMap::new())
}

/// One unfolding step of a `rec`: `body[rec.body / 0]`.
pub(crate) fn unfold_once(t: &SessionType) -> Option<SessionType> {
    match t.shape() {
        Shape::Rec(body) => Some(instantiate(body, t)),
        _ => None,
    }
}

/// Names of the free type variables of `t`.
pub fn free_vars(t: &SessionType) -> std::collections::BTreeSet<String> {
    fn go(t: &SessionType, out: &mut std::collections::BTreeSet<String>) {
        if !t.has_free_names() {
            return;
        }
        if let Shape::Var(Var::Free(n)) = t.shape() {
            out.insert(n.to_string());
        }
        for_each_child(t, |c| go(c, out));
    }
    let mut out = std::collections::BTreeSet::new();
    go(t, &mut out);
    out
}

pub fn size(t: &SessionType) -> u64 {
    t.size()
}

pub fn is_closed(t: &SessionType) -> bool {
    t.is_closed()
}

/// Capture-avoiding substitution of `s` for the free variable `name` in `t`.
pub fn substitute(t: &SessionType, name: &str, s: &SessionType) -> SessionType {
    fn go(t: &SessionType, name: &str, s: &SessionType, depth: u32) -> SessionType {
        if !t.has_free_names() {
            return t.clone();
        }
        match t.shape() {
            Shape::Var(Var::Free(n)) if &**n == name => shift(s, depth, 0),
            _ => map_children(t, depth, &mut |c, d| go(c, name, s, d)),
        }
    }
    go(t, name, s, 0)
}

/// Unfold leading `rec` binders until the head is a proper constructor
/// (or a variable, for open terms).
///
/// # Panics
///
/// Panics on a non-contractive head chain such as `rec X . rec Y . X`,
/// which has no unfolding.
pub fn unfold(t: &SessionType) -> SessionType {
    let mut chain = 0;
    let mut cur = t;
    while let Shape::Rec(b) = cur.shape() {
        chain += 1;
        cur = b;
    }
    if let Shape::Var(Var::Bound(i)) = cur.shape() {
        assert!(*i >= chain, "unfold of non-contractive type {t}");
    }
    let mut cur = t.clone();
    while let Some(next) = unfold_once(&cur) {
        cur = next;
    }
    cur
}

/// Contractivity of the `rec` chain starting at `t`: the chain must not end
/// in a variable bound by one of its own binders.
fn chain_is_contractive(t: &SessionType) -> bool {
    let mut chain = 0;
    let mut cur = t;
    while let Shape::Rec(b) = cur.shape() {
        chain += 1;
        cur = b;
    }
    !matches!(cur.shape(), Shape::Var(Var::Bound(i)) if *i < chain)
}

/// True iff no subterm has the form `rec X1 . ... rec Xn . Xi`.
pub fn is_contractive(t: &SessionType) -> bool {
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![t.clone()];
    while let Some(t) = stack.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        if t.is_rec() && !chain_is_contractive(&t) {
            return false;
        }
        for_each_child(&t, |c| stack.push(c.clone()));
    }
    true
}

pub(crate) fn for_each_child(t: &SessionType, mut f: impl FnMut(&SessionType)) {
    match t.shape() {
        Shape::End | Shape::Var(_) => {}
        Shape::Rec(b) => f(b),
        Shape::Input(ps, c) | Shape::Output(ps, c) => {
            ps.iter().for_each(&mut f);
            f(c);
        }
        Shape::Select(bs) | Shape::Branch(bs) => bs.iter().for_each(|(_, b)| f(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const T1: &str = "rec X . +{ respond: ?[end].X, exit: end }";
    const T2: &str = "rec X . +{ respond: ?[end].X, exit: end, replicate: ?[X].X }";

    fn p(s: &str) -> SessionType {
        parse(s).unwrap()
    }

    #[test]
    fn alpha_equivalent_terms_are_identical() {
        assert_eq!(p(T1), p("rec Q . +{ exit: end, respond: ?[end].Q }"));
        assert_ne!(p(T1), p(T2));
    }

    #[test]
    fn sizes() {
        assert_eq!(size(&p("end")), 1);
        assert_eq!(size(&p(T1)), 6);
        assert_eq!(size(&p(T2)), 9);
        assert_eq!(size(&p("X")), 1);
    }

    #[test]
    fn contractivity() {
        assert!(is_contractive(&p(T1)));
        assert!(is_contractive(&p("rec X . ?[X].X")));
        assert!(!is_contractive(&parse_unchecked("rec X . rec Y . X").unwrap()));
        assert!(!is_contractive(&parse_unchecked("rec X . X").unwrap()));
        assert!(!is_contractive(&parse_unchecked("![end].rec X . rec Y . Y").unwrap()));
        // the chain may end in a variable bound further out
        assert!(is_contractive(&p("rec Z . +{ a: rec X . Z, b: end }")));
    }

    #[test]
    fn rec_constructor_checks_contractivity() {
        let y = SessionType::var("Y").unwrap();
        let inner = SessionType::rec("Z", &y).unwrap();
        assert!(matches!(SessionType::rec("Y", &inner), Err(SyntaxError::NotContractive { .. })));
    }

    #[test]
    fn closedness() {
        assert!(is_closed(&p("end")));
        assert!(!is_closed(&p("X")));
        assert!(is_closed(&p(
            "rec Y . +{ respond: ?[end].Y, exit: end, replicate: ?[rec X . +{ respond: ?[end].X, exit: end }].Y }"
        )));
        assert!(!is_closed(&p("rec X . ?[Y].X")));
    }

    #[test]
    fn substitution() {
        let end = p("end");
        assert_eq!(substitute(&p("X"), "X", &end), end);
        assert_eq!(substitute(&end, "X", &p(T1)), end);
        let body = p("+{ respond: ?[end].X, exit: end }");
        let expected = p(&format!("+{{ respond: ?[end].({T1}), exit: end }}"));
        assert_eq!(substitute(&body, "X", &p(T1)), expected);
        assert_eq!(unfold(&p(T1)), expected);
    }

    #[test]
    fn substitution_is_capture_avoiding() {
        // Y is free in the substituted term and must stay free under `rec Y`.
        let t = p("rec Y . ?[X].Y");
        let r = substitute(&t, "X", &p("Y"));
        assert_eq!(r, p("rec Z . ?[Y].Z"));
        assert!(!r.is_closed());
    }

    #[test]
    fn unfolding() {
        assert_eq!(unfold(&p("end")), p("end"));
        let t = p("rec X . rec Y . ?[end].X");
        let u = unfold(&t);
        assert_eq!(u, SessionType::input(vec![p("end")], t.clone()).unwrap());
        assert_eq!(unfold(&u), u);
    }

    #[test]
    #[should_panic(expected = "non-contractive")]
    fn unfold_rejects_non_contractive_chain() {
        unfold(&parse_unchecked("rec X . rec Y . X").unwrap());
    }

    #[test]
    fn constructor_errors() {
        assert!(matches!(
            SessionType::input(vec![], SessionType::end()),
            Err(SyntaxError::EmptyArity { .. })
        ));
        let a = Label::new("a").unwrap();
        assert!(matches!(
            SessionType::select(vec![(a.clone(), SessionType::end()), (a, SessionType::end())]),
            Err(SyntaxError::DuplicateLabel { .. })
        ));
        assert!(Label::new("Abc").is_err());
        assert!(Label::new("end").is_err());
        assert!(SessionType::var("x").is_err());
    }
}
