//! CART trees grown on weighted (bootstrap) samples.

use alloc::vec::Vec;

use rand::Rng as _;

use super::Task;
use crate::rng::Rng;

/// A tree node. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Class-1 probability (classification) or mean target (regression).
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Binary decision tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Builds a tree from raw nodes, checking child links and feature bounds.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Option<Tree> {
        if nodes.is_empty() {
            return None;
        }
        for (i, n) in nodes.iter().enumerate() {
            if let Node::Split { feature, left, right, threshold } = *n {
                if feature >= n_features || left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return None;
                }
                if threshold.is_nan() {
                    return None;
                }
            }
        }
        Some(Tree { nodes })
    }

    pub fn leaf(value: f64) -> Tree {
        Tree { nodes: alloc::vec![Node::Leaf { value }] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// Draw counts of a bootstrap sample of size `n` (`n` draws with replacement).
pub fn bootstrap_counts(rng: &mut Rng, n: usize) -> Vec<u32> {
    let mut counts = alloc::vec![0u32; n];
    for _ in 0..n {
        counts[rng.gen_range(0..n)] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    w: f64,
    wy: f64,
    wyy: f64,
}

impl Acc {
    fn add(&mut self, w: f64, y: f64) {
        self.w += w;
        self.wy += w * y;
        self.wyy += w * y * y;
    }

    fn sub(&self, o: &Acc) -> Acc {
        Acc { w: self.w - o.w, wy: self.wy - o.wy, wyy: self.wyy - o.wyy }
    }

    /// Weighted impurity `w · impurity`.
    fn weighted_impurity(&self, task: Task) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        match task {
            // Gini with labels in {0, 1}: wy is the class-1 weight.
            Task::Classification => {
                let w1 = self.wy;
                let w0 = self.w - w1;
                self.w - (w0 * w0 + w1 * w1) / self.w
            }
            Task::Regression => (self.wyy - self.wy * self.wy / self.w).max(0.0),
        }
    }

    fn value(&self) -> f64 {
        self.wy / self.w
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    decrease: f64,
    n_left: usize,
}

/// Grows one tree on the samples with nonzero `weights`.
///
/// `columns` is column-major; `mtry` features are examined per node, and more
/// are drawn when none of them admits a split. Returns the tree and the
/// weighted impurity decrease attributed to each feature.
pub(crate) fn grow(columns: &[Vec<f64>], y: &[f64], weights: &[u32], task: Task, mtry: usize, rng: &mut Rng) -> (Tree, Vec<f64>) {
    let p = columns.len();
    let samples: Vec<u32> = (0..y.len() as u32).filter(|&i| weights[i as usize] > 0).collect();
    let m = samples.len();
    let mut importance = alloc::vec![0.0; p];
    let mut order: Vec<u32> = Vec::with_capacity(p * m);
    for col in columns {
        let mut s = samples.clone();
        s.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
        order.extend_from_slice(&s);
    }
    let mut nodes: Vec<Node> = alloc::vec![Node::Leaf { value: 0.0 }];
    let mut stack: Vec<(usize, usize, usize)> = alloc::vec![(0, 0, m)];
    let mut goes_left = alloc::vec![false; y.len()];
    let mut buf: Vec<u32> = Vec::with_capacity(m);
    let mut features: Vec<usize> = (0..p).collect();

    while let Some((id, start, end)) = stack.pop() {
        let mut acc = Acc::default();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let seg = &order[start..end];
        for &s in seg {
            let yi = y[s as usize];
            acc.add(weights[s as usize] as f64, yi);
            lo = lo.min(yi);
            hi = hi.max(yi);
        }
        nodes[id] = Node::Leaf { value: acc.value() };
        if end - start < 2 || lo == hi || p == 0 {
            continue;
        }
        let parent = acc.weighted_impurity(task);
        let mut best: Option<Best> = None;
        for k in 0..p {
            if k >= mtry && best.is_some() {
                break;
            }
            let j = rng.gen_range(k..p);
            features.swap(k, j);
            let f = features[k];
            let col = &columns[f];
            let seg = &order[f * m + start..f * m + end];
            let mut left = Acc::default();
            for t in 0..seg.len() - 1 {
                let s = seg[t] as usize;
                left.add(weights[s] as f64, y[s]);
                let (xa, xb) = (col[s], col[seg[t + 1] as usize]);
                if xa >= xb {
                    continue;
                }
                let right = acc.sub(&left);
                let decrease = parent - left.weighted_impurity(task) - right.weighted_impurity(task);
                if best.as_ref().is_none_or(|b| decrease > b.decrease) {
                    best = Some(Best { feature: f, threshold: xa, decrease, n_left: t + 1 });
                }
            }
        }
        let Some(b) = best else { continue };
        importance[b.feature] += b.decrease.max(0.0);
        let col = &columns[b.feature];
        for &s in &order[b.feature * m + start..b.feature * m + end] {
            goes_left[s as usize] = col[s as usize] <= b.threshold;
        }
        for f in 0..p {
            let seg = &mut order[f * m + start..f * m + end];
            buf.clear();
            let mut w = 0;
            for t in 0..seg.len() {
                let s = seg[t];
                if goes_left[s as usize] {
                    seg[w] = s;
                    w += 1;
                } else {
                    buf.push(s);
                }
            }
            seg[w..].copy_from_slice(&buf);
        }
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[id] = Node::Split { feature: b.feature, threshold: b.threshold, left: l, right: r };
        let mid = start + b.n_left;
        stack.push((r, mid, end));
        stack.push((l, start, mid));
    }
    (Tree { nodes }, importance)
}
