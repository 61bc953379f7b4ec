//! Regression trees grown by exact greedy split search on second-order
//! gradient statistics.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{lookup, ColumnMatrix, SparseDataset};
use crate::scalar::Scalar;

use super::params::TreeParams;

/// A tree node. A row goes left when its feature value is `<= threshold`;
/// rows without the feature follow `default_left`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node<F> {
    Split {
        feature: u32,
        threshold: F,
        default_left: bool,
        left: u32,
        right: u32,
    },
    Leaf {
        weight: F,
    },
}

/// Flat tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NodeRecord<F>", try_from = "NodeRecord<F>")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct DecisionTree<F: Scalar> {
    nodes: Vec<Node<F>>,
}

impl<F: Scalar> DecisionTree<F> {
    pub fn leaf(weight: F) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { weight }],
        }
    }

    pub fn nodes(&self) -> &[Node<F>] {
        &self.nodes
    }

    #[inline]
    pub fn predict_row(&self, row: &[(u32, F)]) -> F {
        let mut id = 0usize;
        loop {
            match self.nodes[id] {
                Node::Leaf { weight } => return weight,
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    let go_left = match lookup(row, feature) {
                        Some(v) => v <= threshold,
                        None => default_left,
                    };
                    id = if go_left { left } else { right } as usize;
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go<F: Copy>(nodes: &[Node<F>], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left as usize).max(go(nodes, right as usize)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// Recursive serialized form of a tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
enum NodeRecord<F: Scalar> {
    Leaf {
        leaf: F,
    },
    Split {
        feature: u32,
        threshold: F,
        default_left: bool,
        left: Box<NodeRecord<F>>,
        right: Box<NodeRecord<F>>,
    },
}

impl<F: Scalar> From<DecisionTree<F>> for NodeRecord<F> {
    fn from(tree: DecisionTree<F>) -> Self {
        fn go<F: Scalar>(nodes: &[Node<F>], id: usize) -> NodeRecord<F> {
            match nodes[id] {
                Node::Leaf { weight } => NodeRecord::Leaf { leaf: weight },
                Node::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => NodeRecord::Split {
                    feature,
                    threshold,
                    default_left,
                    left: Box::new(go(nodes, left as usize)),
                    right: Box::new(go(nodes, right as usize)),
                },
            }
        }
        go(&tree.nodes, 0)
    }
}

impl<F: Scalar> TryFrom<NodeRecord<F>> for DecisionTree<F> {
    type Error = String;

    fn try_from(rec: NodeRecord<F>) -> Result<Self, Self::Error> {
        fn go<F: Scalar>(rec: NodeRecord<F>, nodes: &mut Vec<Node<F>>) -> Result<u32, String> {
            let id = nodes.len();
            match rec {
                NodeRecord::Leaf { leaf } => {
                    if !leaf.is_finite() {
                        return Err("non-finite leaf weight".into());
                    }
                    nodes.push(Node::Leaf { weight: leaf });
                }
                NodeRecord::Split {
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                } => {
                    nodes.push(Node::Leaf { weight: F::zero() });
                    let l = go(*left, nodes)?;
                    let r = go(*right, nodes)?;
                    nodes[id] = Node::Split {
                        feature,
                        threshold,
                        default_left,
                        left: l,
                        right: r,
                    };
                }
            }
            Ok(id as u32)
        }
        let mut nodes = Vec::new();
        go(rec, &mut nodes)?;
        Ok(DecisionTree { nodes })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats<F> {
    g: F,
    h: F,
    n: usize,
}

impl<F: Scalar> Stats<F> {
    fn add(&mut self, g: F, h: F) {
        self.g += g;
        self.h += h;
        self.n += 1;
    }

    fn minus(self, o: Stats<F>) -> Stats<F> {
        Stats {
            g: self.g - o.g,
            h: self.h - o.h,
            n: self.n - o.n,
        }
    }

    fn plus(self, o: Stats<F>) -> Stats<F> {
        Stats {
            g: self.g + o.g,
            h: self.h + o.h,
            n: self.n + o.n,
        }
    }
}

/// Accepted split of a frontier node: feature, threshold, default-left flag
/// and the new child ids.
type Split<F> = (u32, F, bool, u32, u32);

#[derive(Debug, Clone, Copy)]
struct Candidate<F> {
    gain: F,
    feature: u32,
    threshold: F,
    default_left: bool,
    left: Stats<F>,
    right: Stats<F>,
}

struct Regularization<F> {
    lambda: F,
    alpha: F,
    gamma: F,
    min_child_weight: F,
    max_delta_step: F,
}

impl<F: Scalar> Regularization<F> {
    fn from_params(p: &TreeParams) -> Self {
        Regularization {
            lambda: F::of(p.lambda),
            alpha: F::of(p.alpha),
            gamma: F::of(p.gamma),
            min_child_weight: F::of(p.min_child_weight),
            max_delta_step: F::of(p.max_delta_step),
        }
    }

    /// Gradient sum after L1 soft-thresholding.
    fn shrink(&self, g: F) -> F {
        if g > self.alpha {
            g - self.alpha
        } else if g < -self.alpha {
            g + self.alpha
        } else {
            F::zero()
        }
    }

    /// Structure score `T(G)^2 / (H + lambda)`.
    fn score(&self, s: Stats<F>) -> F {
        let denom = s.h + self.lambda;
        if denom <= F::zero() {
            return F::zero();
        }
        let t = self.shrink(s.g);
        t * t / denom
    }

    fn leaf_weight(&self, s: Stats<F>) -> F {
        let denom = s.h + self.lambda;
        if s.n == 0 || denom <= F::zero() {
            return F::zero();
        }
        let w = -self.shrink(s.g) / denom;
        if self.max_delta_step > F::zero() {
            w.max(-self.max_delta_step).min(self.max_delta_step)
        } else {
            w
        }
    }

    /// `½ [S(L) + S(R) − S(L ∪ R)] − γ`, or `None` when a child is empty or
    /// lighter than `min_child_weight`.
    fn gain(&self, parent: Stats<F>, left: Stats<F>, right: Stats<F>) -> Option<F> {
        if left.n == 0 || right.n == 0 || left.h < self.min_child_weight || right.h < self.min_child_weight {
            return None;
        }
        Some(F::of(0.5) * (self.score(left) + self.score(right) - self.score(parent)) - self.gamma)
    }
}

fn sample_features<R: Rng>(pool: &[u32], fraction: f64, rng: &mut R) -> Vec<u32> {
    if fraction >= 1.0 || pool.is_empty() {
        return pool.to_vec();
    }
    let k = ((fraction * pool.len() as f64).round() as usize).clamp(1, pool.len());
    let mut picked: Vec<u32> = sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect();
    picked.sort_unstable();
    picked
}

/// Offers the split "present values `<= threshold` left" in both default
/// directions for absent rows.
fn consider<F: Scalar>(
    reg: &Regularization<F>,
    best: &mut Option<Candidate<F>>,
    parent: Stats<F>,
    present: Stats<F>,
    left_present: Stats<F>,
    feature: u32,
    threshold: F,
) {
    let missing = parent.minus(present);
    let mut offer = |left: Stats<F>, right: Stats<F>, default_left: bool| {
        if let Some(gain) = reg.gain(parent, left, right) {
            if gain > F::zero() && best.is_none_or(|b| gain > b.gain) {
                *best = Some(Candidate {
                    gain,
                    feature,
                    threshold,
                    default_left,
                    left,
                    right,
                });
            }
        }
    };
    offer(left_present, parent.minus(left_present), false);
    if missing.n > 0 {
        let right_present = present.minus(left_present);
        if right_present.n > 0 {
            offer(left_present.plus(missing), right_present, true);
        }
    }
}

const NO_NODE: u32 = u32::MAX;

/// Grows one tree on gradients `g` and hessians `h` (aligned with the rows of
/// `data`).
///
/// Nodes are expanded until `max_depth`; each node takes its best split over
/// all present feature values and both default directions for absent rows,
/// keeping it only if the gain is positive and both children carry at least
/// `min_child_weight` hessian. Ties go to the lowest feature, then the lowest
/// threshold. Leaves take the Newton weight `−T(G) / (H + λ)`.
pub fn build_tree<F: Scalar, R: Rng>(
    g: &[F],
    h: &[F],
    data: &SparseDataset<F>,
    columns: &ColumnMatrix<F>,
    params: &TreeParams,
    rng: &mut R,
) -> DecisionTree<F> {
    let n = data.n_rows();
    debug_assert_eq!(g.len(), n);
    debug_assert_eq!(columns.n_rows(), n);
    let reg = Regularization::from_params(params);

    // position[i]: node currently holding row i, NO_NODE if not sampled.
    let mut position = vec![0u32; n];
    if params.subsample < 1.0 {
        for p in position.iter_mut() {
            if rng.random::<f64>() >= params.subsample {
                *p = NO_NODE;
            }
        }
    }
    let all_features: Vec<u32> = (0..columns.n_cols() as u32).collect();
    let tree_features = sample_features(&all_features, params.colsample_bytree, rng);

    let mut root = Stats::default();
    for i in 0..n {
        if position[i] != NO_NODE {
            root.add(g[i], h[i]);
        }
    }
    let mut nodes: Vec<Node<F>> = vec![Node::Leaf { weight: F::zero() }];
    let mut stats: Vec<Stats<F>> = vec![root];
    let mut frontier: Vec<u32> = vec![0];

    // Per-node scratch, indexed by node id.
    let mut slot_of: Vec<usize> = vec![usize::MAX];
    let mut present: Vec<Stats<F>> = Vec::new();
    let mut prefix: Vec<Stats<F>> = Vec::new();
    let mut last_value: Vec<Option<F>> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();

    for _depth in 0..params.max_depth {
        if frontier.is_empty() {
            break;
        }
        let level_features = sample_features(&tree_features, params.colsample_bylevel, rng);
        slot_of.resize(nodes.len(), usize::MAX);
        for (s, &id) in frontier.iter().enumerate() {
            slot_of[id as usize] = s;
        }
        let m = frontier.len();
        let mut best: Vec<Option<Candidate<F>>> = vec![None; m];
        present.clear();
        present.resize(m, Stats::default());
        prefix.clear();
        prefix.resize(m, Stats::default());
        last_value.clear();
        last_value.resize(m, None);

        let slot = |row: u32, position: &[u32], slot_of: &[usize]| -> Option<usize> {
            let p = position[row as usize];
            if p == NO_NODE {
                return None;
            }
            let s = slot_of[p as usize];
            (s != usize::MAX).then_some(s)
        };

        for &feature in &level_features {
            let col = columns.column(feature as usize);
            if col.is_empty() {
                continue;
            }
            touched.clear();
            for &(row, _) in col {
                if let Some(s) = slot(row, &position, &slot_of) {
                    if present[s].n == 0 {
                        touched.push(s);
                    }
                    present[s].add(g[row as usize], h[row as usize]);
                }
            }
            for &(row, v) in col {
                if let Some(s) = slot(row, &position, &slot_of) {
                    if let Some(last) = last_value[s] {
                        if v != last {
                            let parent = stats[frontier[s] as usize];
                            consider(&reg, &mut best[s], parent, present[s], prefix[s], feature, last);
                        }
                    }
                    prefix[s].add(g[row as usize], h[row as usize]);
                    last_value[s] = Some(v);
                }
            }
            for &s in &touched {
                // Every present row left, absent rows right.
                if let Some(last) = last_value[s] {
                    let parent = stats[frontier[s] as usize];
                    consider(&reg, &mut best[s], parent, present[s], prefix[s], feature, last);
                }
                present[s] = Stats::default();
                prefix[s] = Stats::default();
                last_value[s] = None;
            }
        }

        let mut next = Vec::new();
        let mut split_of: Vec<Option<Split<F>>> = vec![None; m];
        for (s, cand) in best.into_iter().enumerate() {
            let Some(c) = cand else { continue };
            let id = frontier[s] as usize;
            let left = nodes.len() as u32;
            let right = left + 1;
            nodes.push(Node::Leaf { weight: F::zero() });
            nodes.push(Node::Leaf { weight: F::zero() });
            stats.push(c.left);
            stats.push(c.right);
            nodes[id] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                default_left: c.default_left,
                left,
                right,
            };
            split_of[s] = Some((c.feature, c.threshold, c.default_left, left, right));
            next.push(left);
            next.push(right);
        }
        for (i, p) in position.iter_mut().enumerate() {
            if *p == NO_NODE {
                continue;
            }
            let s = slot_of[*p as usize];
            if s == usize::MAX {
                continue;
            }
            if let Some((feature, threshold, default_left, left, right)) = split_of[s] {
                let go_left = match data.value(i, feature) {
                    Some(v) => v <= threshold,
                    None => default_left,
                };
                *p = if go_left { left } else { right };
            }
        }
        for &id in &frontier {
            slot_of[id as usize] = usize::MAX;
        }
        frontier = next;
    }

    for (id, node) in nodes.iter_mut().enumerate() {
        if let Node::Leaf { weight } = node {
            *weight = reg.leaf_weight(stats[id]);
        }
    }
    DecisionTree {
        nodes: preorder(&nodes),
    }
}

/// Relabels nodes in depth-first order, the layout deserialization produces.
fn preorder<F: Scalar>(nodes: &[Node<F>]) -> Vec<Node<F>> {
    fn go<F: Scalar>(src: &[Node<F>], id: usize, out: &mut Vec<Node<F>>) -> u32 {
        let new_id = out.len();
        out.push(src[id]);
        if let Node::Split { left, right, .. } = src[id] {
            let l = go(src, left as usize, out);
            let r = go(src, right as usize, out);
            if let Node::Split { left, right, .. } = &mut out[new_id] {
                *left = l;
                *right = r;
            }
        }
        new_id as u32
    }
    let mut out = Vec::with_capacity(nodes.len());
    go(nodes, 0, &mut out);
    out
}
