//! Hash-consing table for [`SessionType`] nodes.
//!
//! The table holds weak references only; dead entries are swept whenever a
//! shard doubles in size since its last sweep.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock, Weak};

use super::{SessionType, Shape, Var};

const SHARDS: usize = 16;

pub(crate) struct Interned {
    pub(crate) shape: Shape,
    pub(crate) size: u64,
    /// One more than the largest dangling de Bruijn index, 0 if none.
    pub(crate) loose: u32,
    pub(crate) free_names: bool,
}

#[derive(Default)]
struct Shard {
    buckets: HashMap<u64, Vec<Weak<Interned>>>,
    entries: usize,
    sweep_at: usize,
}

impl Shard {
    fn sweep(&mut self) {
        self.buckets.retain(|_, v| {
            v.retain(|w| w.strong_count() > 0);
            !v.is_empty()
        });
        self.entries = self.buckets.values().map(Vec::len).sum();
        self.sweep_at = (2 * self.entries).max(4096);
    }
}

fn table() -> &'static [Mutex<Shard>; SHARDS] {
    static TABLE: OnceLock<[Mutex<Shard>; SHARDS]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|_| Mutex::new(Shard::default())))
}

fn metadata(shape: &Shape) -> (u64, u32, bool) {
    let children = |ts: &mut dyn Iterator<Item = &SessionType>| {
        ts.fold((1u64, 0u32, false), |(s, l, f), t| {
            (s.saturating_add(t.size()), l.max(t.loose()), f || t.has_free_names())
        })
    };
    match shape {
        Shape::End => (1, 0, false),
        Shape::Var(Var::Bound(i)) => (1, i + 1, false),
        Shape::Var(Var::Free(_)) => (1, 0, true),
        Shape::Rec(b) => (b.size().saturating_add(1), b.loose().saturating_sub(1), b.has_free_names()),
        Shape::Input(ps, c) | Shape::Output(ps, c) => children(&mut ps.iter().chain(std::iter::once(c))),
        Shape::Select(bs) | Shape::Branch(bs) => children(&mut bs.iter().map(|(_, b)| b)),
    }
}

pub(crate) fn make(shape: Shape) -> SessionType {
    let mut h = DefaultHasher::new();
    shape.hash(&mut h);
    let hash = h.finish();
    let mut shard = table()[(hash as usize) % SHARDS].lock().unwrap();
    let bucket = shard.buckets.entry(hash).or_default();
    for w in bucket.iter() {
        if let Some(existing) = w.upgrade() {
            if existing.shape == shape {
                return SessionType(existing);
            }
        }
    }
    let (size, loose, free_names) = metadata(&shape);
    let node = Arc::new(Interned { shape, size, loose, free_names });
    bucket.push(Arc::downgrade(&node));
    shard.entries += 1;
    if shard.entries >= shard.sweep_at {
        shard.sweep();
    }
    SessionType(node)
}
