//! Supremum over node pairs with a deterministic arg-max.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::GridDomain;

/// Node-count threshold up to which [`PairStrategy::Auto`] scans every pair.
pub const EXHAUSTIVE_LIMIT: usize = 20_000;

/// How a sup-over-pairs is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairStrategy {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] nodes, windowed above.
    Auto,
    /// Every ordered pair.
    Exhaustive,
    /// All pairs within `radius` grid steps on every axis (time included),
    /// plus every pair on a strided sub-lattice holding at most
    /// `coarse_target` nodes. Deterministic.
    Windowed { radius: usize, coarse_target: usize },
}

impl Default for PairStrategy {
    fn default() -> Self {
        PairStrategy::Auto
    }
}

impl PairStrategy {
    pub(crate) fn resolve(self, node_count: usize) -> PairStrategy {
        match self {
            PairStrategy::Auto if node_count <= EXHAUSTIVE_LIMIT => PairStrategy::Exhaustive,
            PairStrategy::Auto => PairStrategy::Windowed { radius: 2, coarse_target: 4_000 },
            other => other,
        }
    }
}

/// Arg-max of a pair scan: value and ordered node pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Best {
    pub value: f64,
    pub p: usize,
    pub q: usize,
}

impl Best {
    const NONE: Best = Best { value: f64::NEG_INFINITY, p: usize::MAX, q: usize::MAX };

    fn offer(&mut self, value: f64, p: usize, q: usize) {
        if value.is_nan() {
            return;
        }
        if value > self.value || (value == self.value && (p, q) < (self.p, self.q)) {
            *self = Best { value, p, q };
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.offer(other.value, other.p, other.q);
        self
    }

    fn into_option(self) -> Option<Best> {
        (self.p != usize::MAX).then_some(self)
    }
}

/// Maximizes `quot(p, q)` over ordered pairs `p != q` drawn from `nodes`.
/// Ties resolve to the lexicographically smallest `(p, q)`; `NaN` values are
/// ignored. The result does not depend on the number of worker threads.
pub(crate) fn scan_pairs<F>(
    dom: &GridDomain,
    nodes: &[usize],
    strategy: PairStrategy,
    quot: F,
) -> Option<Best>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    match strategy.resolve(nodes.len()) {
        PairStrategy::Exhaustive | PairStrategy::Auto => nodes
            .par_iter()
            .map(|&p| {
                let mut best = Best::NONE;
                for &q in nodes {
                    if q != p {
                        best.offer(quot(p, q), p, q);
                    }
                }
                best
            })
            .reduce(|| Best::NONE, Best::merge)
            .into_option(),
        PairStrategy::Windowed { radius, coarse_target } => {
            windowed(dom, nodes, radius, coarse_target, &quot)
        }
    }
}

fn windowed<F>(
    dom: &GridDomain,
    nodes: &[usize],
    radius: usize,
    coarse_target: usize,
    quot: &F,
) -> Option<Best>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = dom.dim();
    let mut member = vec![false; dom.node_count()];
    for &id in nodes {
        member[id] = true;
    }
    let on_lattice = |id: usize, stride: usize| {
        let s = dom.node_spatial(id);
        dom.node_level(id) % stride == 0 && (0..n).all(|a| dom.axis_index(s, a) % stride == 0)
    };
    let mut stride = 1;
    let coarse: Vec<usize> = loop {
        let c: Vec<usize> = nodes.iter().copied().filter(|&id| on_lattice(id, stride)).collect();
        if c.len() <= coarse_target.max(1) {
            break c;
        }
        stride += 1;
    };
    let mut in_coarse = vec![false; dom.node_count()];
    for &id in &coarse {
        in_coarse[id] = true;
    }

    let r = radius as isize;
    let dims = n + 1;
    let side = (2 * radius + 1).pow(dims as u32);
    nodes
        .par_iter()
        .map(|&p| {
            let mut best = Best::NONE;
            let level = dom.node_level(p) as isize;
            let spatial = dom.node_spatial(p);
            for code in 0..side {
                let mut c = code;
                let mut s = Some(spatial);
                let mut q_level = level;
                for axis in 0..dims {
                    let off = (c % (2 * radius + 1)) as isize - r;
                    c /= 2 * radius + 1;
                    if axis < n {
                        s = s.and_then(|s| dom.shift_spatial(s, axis, off));
                    } else {
                        q_level += off;
                    }
                }
                let Some(s) = s else { continue };
                if q_level < 0 || q_level as usize >= dom.levels() {
                    continue;
                }
                let q = dom.node_id(q_level as usize, s);
                if q != p && member[q] {
                    best.offer(quot(p, q), p, q);
                }
            }
            if in_coarse[p] {
                for &q in &coarse {
                    if q != p {
                        best.offer(quot(p, q), p, q);
                    }
                }
            }
            best
        })
        .reduce(|| Best::NONE, Best::merge)
        .into_option()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    #[test]
    fn ties_pick_smallest_pair() {
        let dom = GridDomain::new(Shape::Box { lower: vec![0.0], upper: vec![1.0] }, 1.0, 4, 1)
            .unwrap();
        let nodes = dom.in_domain_nodes().to_vec();
        let best = scan_pairs(&dom, &nodes, PairStrategy::Exhaustive, |_, _| 1.0).unwrap();
        assert_eq!((best.p, best.q), (0, 1));
    }

    #[test]
    fn windowed_contains_neighbours() {
        let dom = GridDomain::new(Shape::Box { lower: vec![0.0], upper: vec![1.0] }, 1.0, 30, 20)
            .unwrap();
        let nodes = dom.in_domain_nodes().to_vec();
        let target = (nodes[100], nodes[101]);
        let strategy = PairStrategy::Windowed { radius: 1, coarse_target: 10 };
        let best = scan_pairs(&dom, &nodes, strategy, |p, q| {
            if (p, q) == target {
                5.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert_eq!((best.p, best.q), target);
    }

    #[test]
    fn empty_scan_is_none() {
        let dom = GridDomain::new(Shape::Box { lower: vec![0.0], upper: vec![1.0] }, 1.0, 4, 1)
            .unwrap();
        assert!(scan_pairs(&dom, &[3], PairStrategy::Exhaustive, |_, _| 1.0).is_none());
    }
}
