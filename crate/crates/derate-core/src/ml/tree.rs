//! CART regression tree with midpoint thresholds.

use serde::{Deserialize, Serialize};

use super::linalg::Matrix;

/// Growth limits; 0 means unlimited (`min_samples_leaf` 0 behaves as 1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLimits {
    pub max_depth: u32,
    pub max_leaf_nodes: u32,
    pub min_samples_leaf: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> u32 {
        fn walk(nodes: &[Node], at: usize) -> u32 {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Mean in a canonical summation order, so row permutations cannot change
/// the result through floating-point reassociation.
fn canonical_mean(values: &mut Vec<f64>) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn node_stats(rows: &[usize], y: &[f64]) -> (f64, f64) {
    let mut values: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let mean = canonical_mean(&mut values);
    let sse: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, sse)
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Best split of `rows` by weighted child squared error. Candidates are
/// midpoints between consecutive distinct feature values; ties keep the
/// first candidate in (feature, threshold) order.
fn best_split(x: &Matrix, y: &[f64], rows: &[usize], min_leaf: usize) -> Option<Candidate> {
    let n = rows.len();
    let mut best: Option<Candidate> = None;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
    for feature in 0..x.cols() {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (x.get(r, feature), y[r])));
        // sorting by (x, y) makes the prefix sums canonical even when
        // feature values repeat
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut sum_left = 0.0;
        let mut sum_sq_left = 0.0;
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
        for s in 1..n {
            sum_left += pairs[s - 1].1;
            sum_sq_left += pairs[s - 1].1 * pairs[s - 1].1;
            let (a, b) = (pairs[s - 1].0, pairs[s].0);
            if a == b || s < min_leaf || n - s < min_leaf {
                continue;
            }
            let left = (sum_sq_left - sum_left * sum_left / s as f64).max(0.0);
            let sum_right = total - sum_left;
            let sum_sq_right = total_sq - sum_sq_left;
            let right =
                (sum_sq_right - sum_right * sum_right / (n - s) as f64).max(0.0);
            let score = left + right;
            if best.as_ref().is_none_or(|c| score < c.score) {
                let mut threshold = (a + b) * 0.5;
                // rounding in the midpoint must never push the boundary
                // onto the right-hand value
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    feature,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

pub fn grow(x: &Matrix, y: &[f64], limits: TreeLimits) -> Tree {
    assert!(x.rows() > 0 && x.rows() == y.len());
    let min_leaf = limits.min_samples_leaf.max(1) as usize;
    let all_rows: Vec<usize> = (0..x.rows()).collect();
    let (mean, _) = node_stats(&all_rows, y);
    let mut nodes = vec![Node::Leaf { value: mean }];
    let mut leaves = 1u32;
    let mut queue = std::collections::VecDeque::from([(0usize, all_rows, 0u32)]);

    while let Some((slot, rows, depth)) = queue.pop_front() {
        if limits.max_depth != 0 && depth >= limits.max_depth {
            continue;
        }
        if limits.max_leaf_nodes != 0 && leaves + 1 > limits.max_leaf_nodes {
            continue;
        }
        if rows.len() < 2 * min_leaf {
            continue;
        }
        let (_, sse) = node_stats(&rows, y);
        if sse / rows.len() as f64 <= 1e-12 {
            continue;
        }
        let Some(split) = best_split(x, y, &rows, min_leaf) else {
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| x.get(r, split.feature) <= split.threshold);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let (left_mean, _) = node_stats(&left_rows, y);
        let (right_mean, _) = node_stats(&right_rows, y);
        let left_slot = nodes.len();
        nodes.push(Node::Leaf { value: left_mean });
        let right_slot = nodes.len();
        nodes.push(Node::Leaf { value: right_mean });
        nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left_slot,
            right: right_slot,
        };
        leaves += 1;
        queue.push_back((left_slot, left_rows, depth + 1));
        queue.push_back((right_slot, right_rows, depth + 1));
    }
    Tree { nodes }
}
