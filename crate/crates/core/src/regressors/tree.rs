use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitPolicy {
    /// Every midpoint between consecutive distinct values.
    Exhaustive,
    /// One uniform threshold in (min, max) per candidate feature.
    RandomThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features sampled per split; `None` uses all of them.
    pub max_features: Option<usize>,
    pub policy: SplitPolicy,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(10),
            min_leaf: 2,
            max_features: None,
            policy: SplitPolicy::Exhaustive,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::InvalidArgument("min_leaf must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::InvalidArgument("max_features must be >= 1".into()));
        }
        Ok(())
    }
}

/// Flattened node: a leaf when `feature` is `None`. Rows with
/// `x[feature] <= threshold` go to `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    pub nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Fits a CART regression tree on `rows` of `x` (indices may repeat).
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut SeededRng,
) -> Result<RegressionTree> {
    params.validate()?;
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "tree targets",
            expected: x.rows(),
            got: y.len(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Empty("tree training rows"));
    }
    let d = x.cols();
    let max_features = params.max_features.unwrap_or(d).min(d);
    let mut nodes = Vec::new();
    // (node index, rows, depth)
    let mut stack = vec![(0usize, rows.to_vec(), 0usize)];
    nodes.push(leaf(mean(y, rows)));

    while let Some((id, idx, depth)) = stack.pop() {
        nodes[id].value = mean(y, &idx);
        if params.max_depth.is_some_and(|m| depth >= m) || idx.len() < 2 * params.min_leaf {
            continue;
        }
        let features = candidate_features(d, max_features, rng);
        let Some(split) = best_split(x, y, &idx, &features, params, rng) else {
            continue;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| x[(i, split.feature)] <= split.threshold);
        let (li, ri) = (nodes.len(), nodes.len() + 1);
        nodes.push(leaf(0.0));
        nodes.push(leaf(0.0));
        let n = &mut nodes[id];
        n.feature = Some(split.feature);
        n.threshold = split.threshold;
        n.left = li;
        n.right = ri;
        // Right pushed first so the left subtree is grown first.
        stack.push((ri, r, depth + 1));
        stack.push((li, l, depth + 1));
    }
    Ok(RegressionTree {
        n_features: d,
        nodes,
    })
}

fn leaf(value: f64) -> Node {
    Node {
        feature: None,
        threshold: 0.0,
        left: 0,
        right: 0,
        value,
    }
}

fn mean(y: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64
}

fn candidate_features(d: usize, k: usize, rng: &mut SeededRng) -> Vec<usize> {
    if k >= d {
        return (0..d).collect();
    }
    let mut all: Vec<usize> = (0..d).collect();
    for i in 0..k {
        let j = i + rng.below(d - i);
        all.swap(i, j);
    }
    all.truncate(k);
    all.sort_unstable();
    all
}

/// Maximizes `sum_l²/n_l + sum_r²/n_r`, which is equivalent to minimizing the
/// children's summed squared error. Returns `None` if no split lowers it.
fn best_split(
    x: &Matrix,
    y: &[f64],
    idx: &[usize],
    features: &[usize],
    params: &TreeParams,
    rng: &mut SeededRng,
) -> Option<Split> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let parent = total * total / n as f64;
    let tol = 1e-12 * (1.0 + idx.iter().map(|&i| y[i] * y[i]).sum::<f64>());
    let min_leaf = params.min_leaf;
    let mut best: Option<Split> = None;
    let mut consider = |feature: usize, threshold: f64, score: f64| {
        if score > parent + tol && best.as_ref().map_or(true, |b| score > b.score) {
            best = Some(Split {
                feature,
                threshold,
                score,
            });
        }
    };

    match params.policy {
        SplitPolicy::Exhaustive => {
            let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
            for &f in features {
                pairs.clear();
                pairs.extend(idx.iter().map(|&i| (x[(i, f)], y[i])));
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left_sum = 0.0;
                for k in 1..n {
                    left_sum += pairs[k - 1].1;
                    if pairs[k - 1].0 == pairs[k].0 || k < min_leaf || n - k < min_leaf {
                        continue;
                    }
                    let right_sum = total - left_sum;
                    let score =
                        left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64;
                    let threshold = 0.5 * (pairs[k - 1].0 + pairs[k].0);
                    consider(f, threshold, score);
                }
            }
        }
        SplitPolicy::RandomThreshold => {
            for &f in features {
                let (lo, hi) = idx
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(x[(i, f)]), hi.max(x[(i, f)]))
                    });
                if lo >= hi {
                    continue;
                }
                let mut t = rng.uniform_range(lo, hi);
                if t >= hi {
                    t = lo;
                }
                let (mut ls, mut ln) = (0.0, 0usize);
                for &i in idx {
                    if x[(i, f)] <= t {
                        ls += y[i];
                        ln += 1;
                    }
                }
                if ln < min_leaf || n - ln < min_leaf {
                    continue;
                }
                let rs = total - ls;
                consider(f, t, ls * ls / ln as f64 + rs * rs / (n - ln) as f64);
            }
        }
    }
    best
}

impl RegressionTree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut node = &self.nodes[0];
        while let Some(f) = node.feature {
            node = if x[f] <= node.threshold {
                &self.nodes[node.left]
            } else {
                &self.nodes[node.right]
            };
        }
        node.value
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            let n = &t.nodes[i];
            match n.feature {
                None => 0,
                Some(_) => 1 + walk(t, n.left).max(walk(t, n.right)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.feature.is_none()).count()
    }
}
