//! Instance generators and the benchmark runner.
//!
//! Two families are built in:
//!
//! * `exp`: [`gen_blowup_family`], nested `rec` levels whose output payloads
//!   point at different binders, sitting on input clocks of coprime period.
//!   Every pair is a positive instance, so no algorithm can stop early.
//! * `random`: pairs from [`gen_random`] and [`mutate`], scaled by `k`.

use std::io;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::subtyping::{subtype, Algorithm, Limits, SubtypeError};
use crate::syntax::{Label, SessionType, Shape};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_KMAX_INDUCTIVE: usize = 12;

const LABEL_POOL: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Relative weights of the constructors the random generator may pick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub end: f64,
    pub var: f64,
    pub rec: f64,
    pub input: f64,
    pub output: f64,
    pub select: f64,
    pub branch: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { end: 1.0, var: 2.0, rec: 1.5, input: 1.0, output: 1.0, select: 1.0, branch: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_size: u64,
    pub weights: Weights,
    /// At most this many labels per choice, drawn from a fixed pool.
    pub max_labels: usize,
    pub max_payloads: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { seed: 0, max_size: 20, weights: Weights::default(), max_labels: 3, max_payloads: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("constructor weights must be finite and non-negative")]
    NegativeWeight,
    #[error("at least one of `end` or `var` must have positive weight, and some constructor must")]
    NoLeaf,
    #[error("max_size must be at least 1")]
    ZeroSize,
    #[error("max_labels must be between 1 and {}", LABEL_POOL.len())]
    Labels,
    #[error("max_payloads must be at least 1")]
    Payloads,
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let w = &self.weights;
        let all = [w.end, w.var, w.rec, w.input, w.output, w.select, w.branch];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(ConfigError::NegativeWeight);
        }
        // `end` is the only leaf that is always available
        if w.end <= 0.0 {
            return Err(ConfigError::NoLeaf);
        }
        if self.max_size == 0 {
            return Err(ConfigError::ZeroSize);
        }
        if self.max_labels == 0 || self.max_labels > LABEL_POOL.len() {
            return Err(ConfigError::Labels);
        }
        if self.max_payloads == 0 {
            return Err(ConfigError::Payloads);
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Ctor {
    End,
    Var,
    Rec,
    Input,
    Output,
    Select,
    Branch,
}

struct Generator<'a, R> {
    config: &'a GenConfig,
    rng: &'a mut R,
}

impl<R: Rng> Generator<'_, R> {
    /// `guarded[i]` is true when a proper constructor separates binder `i`
    /// (counted from the outside) from the current position. Only guarded
    /// binders may be referenced, which keeps every term contractive.
    fn gen(&mut self, budget: u64, guarded: &mut Vec<bool>) -> SessionType {
        let w = &self.config.weights;
        let any_guarded = guarded.iter().any(|g| *g);
        let mut options: Vec<(Ctor, f64)> = vec![(Ctor::End, w.end)];
        if any_guarded {
            options.push((Ctor::Var, w.var));
        }
        if budget >= 2 {
            options.push((Ctor::Rec, w.rec));
            options.push((Ctor::Select, w.select));
            options.push((Ctor::Branch, w.branch));
        }
        if budget >= 3 {
            options.push((Ctor::Input, w.input));
            options.push((Ctor::Output, w.output));
        }
        let total: f64 = options.iter().map(|(_, w)| w).sum();
        let mut pick = self.rng.gen::<f64>() * total;
        let mut ctor = Ctor::End;
        for (c, w) in &options {
            if pick < *w {
                ctor = *c;
                break;
            }
            pick -= w;
        }
        match ctor {
            Ctor::End => SessionType::end(),
            Ctor::Var => {
                let candidates: Vec<usize> = (0..guarded.len()).filter(|i| guarded[*i]).collect();
                let level = *candidates.choose(self.rng).unwrap();
                SessionType::bound((guarded.len() - 1 - level) as u32)
            }
            Ctor::Rec => {
                guarded.push(false);
                let body = self.gen(budget - 1, guarded);
                guarded.pop();
                SessionType::rec_nameless(body)
            }
            Ctor::Input | Ctor::Output => {
                let n = self.rng.gen_range(1..=self.config.max_payloads.min(budget as usize - 2));
                let mut parts = self.split(budget - 1, n + 1);
                let saved = std::mem::replace(guarded, vec![true; guarded.len()]);
                let cont = self.gen(parts.pop().unwrap(), guarded);
                let payloads = parts.into_iter().map(|b| self.gen(b, guarded)).collect();
                *guarded = saved;
                match ctor {
                    Ctor::Input => SessionType::input(payloads, cont),
                    _ => SessionType::output(payloads, cont),
                }
                .expect("payload list is non-empty")
            }
            Ctor::Select | Ctor::Branch => {
                let n = self.rng.gen_range(1..=self.config.max_labels.min(budget as usize - 1));
                let mut labels: Vec<&str> = LABEL_POOL[..self.config.max_labels].to_vec();
                labels.shuffle(self.rng);
                let parts = self.split(budget - 1, n);
                let saved = std::mem::replace(guarded, vec![true; guarded.len()]);
                let branches = labels
                    .into_iter()
                    .zip(parts)
                    .map(|(l, b)| (Label::new(l).unwrap(), self.gen(b, guarded)))
                    .collect();
                *guarded = saved;
                match ctor {
                    Ctor::Select => SessionType::select(branches),
                    _ => SessionType::branch(branches),
                }
                .expect("distinct labels")
            }
        }
    }

    /// Random composition of `total` into `parts` positive summands.
    fn split(&mut self, total: u64, parts: usize) -> Vec<u64> {
        debug_assert!(total >= parts as u64);
        let mut cuts: Vec<u64> = (1..total).collect();
        cuts.shuffle(self.rng);
        let mut cuts: Vec<u64> = cuts.into_iter().take(parts - 1).collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(parts);
        let mut last = 0;
        for c in cuts {
            out.push(c - last);
            last = c;
        }
        out.push(total - last);
        out
    }
}

/// A random closed, contractive type of size at most `config.max_size`,
/// fully determined by the seed.
pub fn gen_random(config: &GenConfig) -> Result<SessionType, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    gen_random_with(config, &mut rng)
}

pub fn gen_random_with<R: Rng>(config: &GenConfig, rng: &mut R) -> Result<SessionType, ConfigError> {
    config.validate()?;
    let budget = rng.gen_range(1..=config.max_size);
    let mut g = Generator { config, rng };
    Ok(g.gen(budget, &mut Vec::new()))
}

/// Rewrite one randomly chosen position of `t`: replace it by a small fresh
/// closed type, or add or drop a label of a choice. The result is closed and
/// contractive whenever `t` is.
pub fn mutate<R: Rng>(t: &SessionType, config: &GenConfig, rng: &mut R) -> SessionType {
    fn positions(t: &SessionType) -> u64 {
        let mut n = 1;
        crate::syntax::for_each_child(t, |c| n += positions(c));
        n
    }
    fn go<R: Rng>(t: &SessionType, target: &mut u64, config: &GenConfig, rng: &mut R) -> SessionType {
        if *target == 0 {
            *target = u64::MAX;
            return rewrite_here(t, config, rng);
        }
        *target -= 1;
        let shape = match t.shape() {
            Shape::End | Shape::Var(_) => return t.clone(),
            Shape::Rec(b) => Shape::Rec(go(b, target, config, rng)),
            Shape::Input(ps, c) | Shape::Output(ps, c) => {
                let ps: Box<[SessionType]> = ps.iter().map(|p| go(p, target, config, rng)).collect();
                let c = go(c, target, config, rng);
                if matches!(t.shape(), Shape::Input(..)) {
                    Shape::Input(ps, c)
                } else {
                    Shape::Output(ps, c)
                }
            }
            Shape::Select(bs) | Shape::Branch(bs) => {
                let bs: Box<[_]> = bs.iter().map(|(l, b)| (l.clone(), go(b, target, config, rng))).collect();
                if matches!(t.shape(), Shape::Select(_)) {
                    Shape::Select(bs)
                } else {
                    Shape::Branch(bs)
                }
            }
        };
        crate::syntax::intern::make(shape)
    }
    fn rewrite_here<R: Rng>(t: &SessionType, config: &GenConfig, rng: &mut R) -> SessionType {
        let small = GenConfig { max_size: 4.min(config.max_size), ..config.clone() };
        let choice = |bs: &[(Label, SessionType)], select: bool, rng: &mut R| {
            let mut bs = bs.to_vec();
            if bs.len() > 1 && rng.gen_bool(0.5) {
                bs.remove(rng.gen_range(0..bs.len()));
            } else if let Some(l) =
                LABEL_POOL[..config.max_labels].iter().find(|l| !bs.iter().any(|(x, _)| x.as_str() == **l))
            {
                bs.push((Label::new(l).unwrap(), SessionType::end()));
            }
            if select { SessionType::select(bs) } else { SessionType::branch(bs) }.unwrap()
        };
        match t.shape() {
            Shape::Select(bs) if rng.gen_bool(0.7) => choice(bs, true, rng),
            Shape::Branch(bs) if rng.gen_bool(0.7) => choice(bs, false, rng),
            _ => gen_random_with(&small, rng).expect("validated config"),
        }
    }
    let mut target = rng.gen_range(0..positions(t));
    go(t, &mut target, config, rng)
}

/// Hard instance for judgement search:
///
/// ```text
/// rec X1 . ![X1, X1] . rec X2 . ![X2, X1] . ... rec Xk . ![Xk, X(k-1)] . clock
/// ```
///
/// with an input clock of period `k` on the left and `k + 1` on the right.
/// Both sides unfold to the same infinite tree, so `F_k ≤ G_k` holds, but the
/// right side's state never lines up with the left's: the product graph has
/// `2(k+1)²` reachable pairs, and the payloads that jump back to earlier
/// binders make the per-path contexts of the inductive search diverge.
pub fn gen_blowup_family(k: usize) -> (SessionType, SessionType) {
    assert!(k >= 1, "family index starts at 1");
    (blowup_side(k, k), blowup_side(k, k + 1))
}

fn blowup_side(levels: usize, period: usize) -> SessionType {
    let end = SessionType::end();
    let mut clock = SessionType::bound(0);
    for _ in 0..period {
        clock = SessionType::input(vec![end.clone()], clock).unwrap();
    }
    let mut t = SessionType::rec_nameless(clock);
    // innermost level first; at level i the binder of level i is index 0 and
    // the binder of level i-1 is index 1
    for i in (1..=levels).rev() {
        let back = if i == 1 { 0 } else { 1 };
        let payloads = vec![SessionType::bound(0), SessionType::bound(back)];
        t = SessionType::rec_nameless(SessionType::output(payloads, t).unwrap());
    }
    t
}

/// The benchmark families understood by [`instance`].
pub const FAMILIES: [&str; 2] = ["exp", "random"];

/// The `k`-th instance of a named family.
pub fn instance(family: &str, k: usize) -> Option<(SessionType, SessionType)> {
    match family {
        "exp" => Some(gen_blowup_family(k.max(1))),
        "random" => {
            let config = GenConfig {
                seed: 0x5eed_0000 + k as u64,
                max_size: 8 * k.max(1) as u64,
                ..GenConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let t = gen_random_with(&config, &mut rng).expect("default config is valid");
            let u = if rng.gen_bool(0.5) {
                mutate(&t, &config, &mut rng)
            } else {
                gen_random_with(&config, &mut rng).expect("default config is valid")
            };
            Some((t, u))
        }
        _ => None,
    }
}

/// One decision run. Counters of a timed-out run are those reached when it
/// gave up; `verdict` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub family: String,
    pub k: usize,
    pub size_left: u64,
    pub size_right: u64,
    pub algorithm: Algorithm,
    pub verdict: Option<bool>,
    pub judgements_visited: u64,
    pub memo_entries: u64,
    pub product_nodes: u64,
    pub product_edges: u64,
    pub elapsed_ns: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub timeout: Duration,
    /// Run independent (family, algorithm) series on the rayon pool.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { timeout: DEFAULT_TIMEOUT, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("unknown family `{0}` (expected one of: exp, random)")]
    UnknownFamily(String),
    #[error("nothing to run: families, k range and algorithms must be non-empty")]
    Empty,
}

/// Run every (family, k, algorithm) combination and return one record per
/// combination, sorted by family, k and algorithm.
///
/// Within one (family, algorithm) series, k ascends; once a run times out,
/// the larger instances of that series are recorded as timed out without
/// being run.
pub fn run_bench(
    families: &[&str],
    ks: std::ops::RangeInclusive<usize>,
    algorithms: &[Algorithm],
    config: &BenchConfig,
) -> Result<Vec<BenchRecord>, BenchError> {
    if families.is_empty() || ks.is_empty() || algorithms.is_empty() {
        return Err(BenchError::Empty);
    }
    if let Some(f) = families.iter().find(|f| !FAMILIES.contains(f)) {
        return Err(BenchError::UnknownFamily(f.to_string()));
    }
    let series: Vec<(&str, Algorithm)> =
        families.iter().flat_map(|f| algorithms.iter().map(move |a| (*f, *a))).collect();
    let run_series = |&(family, algorithm): &(&str, Algorithm)| {
        let mut out = Vec::new();
        let mut gave_up = false;
        for k in ks.clone() {
            let (t, u) = instance(family, k).expect("family checked above");
            let mut rec = BenchRecord {
                family: family.to_string(),
                k,
                size_left: t.size(),
                size_right: u.size(),
                algorithm,
                verdict: None,
                judgements_visited: 0,
                memo_entries: 0,
                product_nodes: 0,
                product_edges: 0,
                elapsed_ns: 0,
                timed_out: true,
            };
            if !gave_up {
                match subtype(&t, &u, algorithm, &Limits::timeout(config.timeout)) {
                    Ok(r) => {
                        rec.verdict = Some(r.verdict);
                        rec.timed_out = false;
                        rec.elapsed_ns = r.elapsed.as_nanos() as u64;
                        set_counters(&mut rec, &r.counters);
                    }
                    Err(SubtypeError::Timeout { counters, elapsed, .. }) => {
                        gave_up = true;
                        rec.elapsed_ns = elapsed.as_nanos() as u64;
                        set_counters(&mut rec, &counters);
                    }
                    Err(SubtypeError::OpenType(e)) => {
                        unreachable!("generated instances are closed: {e}")
                    }
                }
            }
            out.push(rec);
        }
        out
    };
    let mut records: Vec<BenchRecord> = if config.parallel {
        series.par_iter().flat_map_iter(run_series).collect()
    } else {
        series.iter().flat_map(run_series).collect()
    };
    records.sort_by(|a, b| (&a.family, a.k, a.algorithm).cmp(&(&b.family, b.k, b.algorithm)));
    Ok(records)
}

fn set_counters(rec: &mut BenchRecord, c: &crate::subtyping::Counters) {
    rec.judgements_visited = c.judgements_visited;
    rec.memo_entries = c.memo_entries;
    rec.product_nodes = c.product_nodes;
    rec.product_edges = c.product_edges;
}

/// Instances (family, k) on which two completed runs disagree.
pub fn disagreements(records: &[BenchRecord]) -> Vec<(String, usize)> {
    let mut out: Vec<(String, usize)> = Vec::new();
    for r in records {
        let clash = records.iter().any(|s| {
            s.family == r.family
                && s.k == r.k
                && s.verdict.is_some()
                && r.verdict.is_some()
                && s.verdict != r.verdict
        });
        if clash && !out.iter().any(|(f, k)| *f == r.family && *k == r.k) {
            out.push((r.family.clone(), r.k));
        }
    }
    out
}

pub fn write_csv<W: io::Write>(records: &[BenchRecord], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().has_headers(true).from_writer(w);
    if records.is_empty() {
        wtr.write_record(CSV_HEADER)?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(r: R) -> Result<Vec<BenchRecord>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

pub const CSV_HEADER: [&str; 12] = [
    "family",
    "k",
    "size_left",
    "size_right",
    "algorithm",
    "verdict",
    "judgements_visited",
    "memo_entries",
    "product_nodes",
    "product_edges",
    "elapsed_ns",
    "timed_out",
];
