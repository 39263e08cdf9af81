//! Binary indexed tree over non-negative `f64` weights.
//!
//! Supports appending, point updates, prefix search and an undo journal so a
//! sequence of temporary updates can be rolled back bit-exactly.

#[derive(Debug, Clone, Default)]
pub struct WeightIndex {
    // 1-based Fenwick nodes; tree[0] unused.
    tree: Vec<f64>,
    values: Vec<f64>,
    journal: Vec<Undo>,
    scratch: bool,
}

#[derive(Debug, Clone, Copy)]
enum Undo {
    Node(usize, f64),
    Value(usize, f64),
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl WeightIndex {
    pub fn new() -> Self {
        Self {
            tree: vec![0.0],
            values: Vec::new(),
            journal: Vec::new(),
            scratch: false,
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut tree = Vec::with_capacity(n + 1);
        tree.push(0.0);
        Self {
            tree,
            values: Vec::with_capacity(n),
            journal: Vec::new(),
            scratch: false,
        }
    }

    pub fn from_weights(weights: &[f64]) -> Self {
        let mut idx = Self::with_capacity(weights.len());
        for &w in weights {
            idx.push(w);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Appends a weight at index `len()`.
    pub fn push(&mut self, w: f64) {
        debug_assert!(w >= 0.0 && w.is_finite());
        assert!(!self.scratch, "push inside a scratch section");
        let i = self.values.len() + 1;
        let mut node = w;
        let mut step = 1;
        while step < lowbit(i) {
            node += self.tree[i - step];
            step <<= 1;
        }
        self.tree.push(node);
        self.values.push(w);
    }

    /// Sets weight `i` (0-based).
    pub fn set(&mut self, i: usize, w: f64) {
        debug_assert!(w >= 0.0 && w.is_finite());
        let delta = w - self.values[i];
        if self.scratch {
            self.journal.push(Undo::Value(i, self.values[i]));
        }
        self.values[i] = w;
        let mut n = i + 1;
        while n < self.tree.len() {
            if self.scratch {
                self.journal.push(Undo::Node(n, self.tree[n]));
            }
            self.tree[n] += delta;
            n += lowbit(n);
        }
    }

    /// Sum of weights `0..=i`.
    pub fn prefix(&self, i: usize) -> f64 {
        let mut n = i + 1;
        let mut s = 0.0;
        while n > 0 {
            s += self.tree[n];
            n -= lowbit(n);
        }
        s
    }

    pub fn total(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.prefix(self.values.len() - 1)
        }
    }

    /// Smallest 0-based `i` with `prefix(i) > target`, or `len()` if none.
    pub fn search(&self, target: f64) -> usize {
        let n = self.values.len();
        if n == 0 {
            return 0;
        }
        let mut pos = 0;
        let mut rem = target;
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }

    /// Starts recording updates for [`rollback`](Self::rollback).
    pub fn begin_scratch(&mut self) {
        assert!(!self.scratch, "nested scratch section");
        self.scratch = true;
    }

    /// Restores every node and value touched since `begin_scratch`.
    pub fn rollback(&mut self) {
        assert!(self.scratch, "rollback without scratch");
        self.scratch = false;
        for undo in self.journal.drain(..).rev() {
            match undo {
                Undo::Node(n, v) => self.tree[n] = v,
                Undo::Value(i, v) => self.values[i] = v,
            }
        }
    }
}
