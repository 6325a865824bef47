//! Binary session types: syntax, type LTS construction and four decision
//! procedures for coinductive subtyping.
//!
//! Types are hash-consed in a canonical nameless form, so two α-equivalent
//! types are the same value and compare in constant time.
//!
//! ```
//! use stcheck_core::{parse, subtype_product};
//!
//! let t1 = parse("rec X . +{ respond: ?[end].X, exit: end }").unwrap();
//! let t2 = parse("rec X . +{ respond: ?[end].X, exit: end, replicate: ?[X].X }").unwrap();
//! assert!(subtype_product(&t2, &t1).unwrap().verdict);
//! assert!(!subtype_product(&t1, &t2).unwrap().verdict);
//! ```

pub mod bench;
pub mod lts;
pub mod subterms;
pub mod subtyping;
pub mod syntax;

pub use lts::{build_lts, out_degree, transitions, Action, LtsNode, OpenType, TypeLts};
pub use subterms::{sub_bottom_up, sub_pair, sub_top_down, SubtermSet};
pub use subtyping::{
    equal_coinductive, export_product_dot, is_inconsistent, product_graph, product_successors, subtype,
    subtype_all_pairs, subtype_inductive, subtype_memoized, subtype_product, Algorithm, Counters, Limits,
    ProductGraph, ProductNode, SubtypeError, SubtypePairs, SubtypeReport,
};
pub use syntax::{
    free_vars, is_closed, is_contractive, parse, render, size, substitute, unfold, Label, SessionType, Shape,
    SyntaxError, Var,
};
