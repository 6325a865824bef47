//! Helpers shared by the integration tests: sampling and a reference
//! decision procedure that works directly on unfolded types.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stcheck_core::bench::{gen_random_with, mutate, GenConfig};
use stcheck_core::{parse, render, sub_pair, unfold, SessionType, Shape};

pub fn config(max_size: u64) -> GenConfig {
    GenConfig { max_size, ..GenConfig::default() }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A closed contractive type with size in `1..=max_size`.
pub fn random_type<R: Rng>(rng: &mut R, max_size: u64) -> SessionType {
    gen_random_with(&config(max_size), rng).expect("default weights are valid")
}

/// A pair where both sides have size at most `max_size`. Half the time the
/// right side is a mutation of the left, so both verdicts are frequent.
pub fn random_pair<R: Rng>(rng: &mut R, max_size: u64) -> (SessionType, SessionType) {
    let t = random_type(rng, max_size);
    loop {
        let u =
            if rng.gen_bool(0.5) { mutate(&t, &config(max_size), rng) } else { random_type(rng, max_size) };
        if u.size() <= max_size {
            return if rng.gen_bool(0.5) { (t, u) } else { (u, t) };
        }
    }
}

/// Rename every bound variable of a closed type by rewriting the rendered
/// text with an injective map on variable tokens.
pub fn alpha_rename(t: &SessionType, salt: u64) -> SessionType {
    let text = render(t);
    let mut out = String::with_capacity(text.len() * 2);
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_ascii_uppercase() {
            let mut tok = String::from(c);
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                    tok.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            let clean: String = tok.chars().map(|ch| if ch == '\'' { 'p' } else { ch }).collect();
            out.push_str(&format!("R{salt}_{clean}"));
        } else {
            out.push(c);
        }
    }
    parse(&out).expect("renamed text parses")
}

/// Greatest type simulation over the unfolded subterms of `t` and `u`,
/// computed by deleting pairs that break a clause until nothing changes.
pub fn reference_subtype(t: &SessionType, u: &SessionType) -> bool {
    let states: Vec<SessionType> = {
        let mut seen = HashSet::new();
        sub_pair(t, u).iter().map(unfold).filter(|s| seen.insert(s.clone())).collect()
    };
    let index: HashMap<SessionType, usize> =
        states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let id = |s: &SessionType| index[&unfold(s)];
    let n = states.len();
    let mut rel = vec![true; n * n];
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if rel[i * n + j] && !clause_holds(&states[i], &states[j], &|a, b| rel[id(a) * n + id(b)]) {
                    rel[i * n + j] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    rel[id(t) * n + id(u)]
}

/// One step of the simulation clauses on unfolded types.
fn clause_holds(t: &SessionType, u: &SessionType, rel: &dyn Fn(&SessionType, &SessionType) -> bool) -> bool {
    match (t.shape(), u.shape()) {
        (Shape::End, Shape::End) => true,
        (Shape::Input(ps, c), Shape::Input(qs, d)) => {
            ps.len() == qs.len() && rel(c, d) && ps.iter().zip(qs.iter()).all(|(p, q)| rel(p, q))
        }
        (Shape::Output(ps, c), Shape::Output(qs, d)) => {
            ps.len() == qs.len() && rel(c, d) && ps.iter().zip(qs.iter()).all(|(p, q)| rel(q, p))
        }
        (Shape::Branch(bs), Shape::Branch(cs)) => {
            bs.iter().all(|(l, b)| cs.iter().find(|(m, _)| m == l).is_some_and(|(_, c)| rel(b, c)))
        }
        (Shape::Select(bs), Shape::Select(cs)) => {
            cs.iter().all(|(l, c)| bs.iter().find(|(m, _)| m == l).is_some_and(|(_, b)| rel(b, c)))
        }
        _ => false,
    }
}
