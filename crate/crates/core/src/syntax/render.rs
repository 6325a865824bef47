use std::collections::BTreeSet;
use std::fmt::Write;

use super::{SessionType, Shape, Var};

const BASE_NAMES: [&str; 6] = ["X", "Y", "Z", "W", "V", "U"];

/// Render a type in the concrete syntax accepted by [`super::parse`].
///
/// Binders are named by nesting depth (`X`, `Y`, `Z`, ...), skipping any name
/// that occurs free in the term, so the output is a function of the value.
pub fn render(t: &SessionType) -> String {
    let free = super::free_vars(t);
    let mut names = Vec::new();
    let mut out = String::new();
    write_type(t, &free, &mut names, &mut out);
    out
}

fn fresh_name(depth: usize, free: &BTreeSet<String>) -> String {
    let mut name = match BASE_NAMES.get(depth) {
        Some(s) => s.to_string(),
        None => format!("X{depth}"),
    };
    while free.contains(&name) {
        name.push('\'');
    }
    name
}

fn write_type(t: &SessionType, free: &BTreeSet<String>, names: &mut Vec<String>, out: &mut String) {
    match t.shape() {
        Shape::End => out.push_str("end"),
        Shape::Var(Var::Free(n)) => out.push_str(n),
        Shape::Var(Var::Bound(i)) => match names.len().checked_sub(*i as usize + 1) {
            Some(k) => out.push_str(&names[k]),
            // dangling index: only reachable through crate-internal terms
            None => write!(out, "#{i}").unwrap(),
        },
        Shape::Rec(body) => {
            let name = fresh_name(names.len(), free);
            write!(out, "rec {name} . ").unwrap();
            names.push(name);
            write_type(body, free, names, out);
            names.pop();
        }
        Shape::Input(ps, c) | Shape::Output(ps, c) => {
            out.push_str(if matches!(t.shape(), Shape::Input(..)) { "?[" } else { "![" });
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_type(p, free, names, out);
            }
            out.push_str("].");
            write_type(c, free, names, out);
        }
        Shape::Select(bs) | Shape::Branch(bs) => {
            out.push_str(if matches!(t.shape(), Shape::Select(_)) { "+{" } else { "&{" });
            for (i, (l, b)) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{l}: ").unwrap();
                write_type(b, free, names, out);
            }
            out.push('}');
        }
    }
}
