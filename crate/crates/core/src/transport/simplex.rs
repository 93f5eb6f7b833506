//! Primal network simplex for the balanced transportation problem.
//!
//! Supply nodes are the rows `0..n0`, demand nodes the columns
//! `n0..n0 + n1`, and an artificial root closes the spanning tree. Real arcs
//! `e = i * n1 + j` run from row `i` to column `j`. The solver keeps a
//! strongly feasible spanning tree (parent pointers, per-node flow on the arc
//! to the parent, orientation bit) and follows the classical rules:
//! block-search pricing for the entering arc and the strongly feasible
//! leaving-arc rule, which together exclude cycling on degenerate pivots.
//!
//! Flows are generic over [`Mass`] so that uniform measures can be solved in
//! exact integer arithmetic.

use std::ops::{Add, AddAssign, Sub, SubAssign};

use crate::error::{Error, Result};

/// Flow value type.
pub(crate) trait Mass:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + AddAssign + SubAssign
{
    const ZERO: Self;
    const INF: Self;
}

impl Mass for i64 {
    const ZERO: i64 = 0;
    const INF: i64 = i64::MAX;
}

impl Mass for f64 {
    const ZERO: f64 = 0.0;
    const INF: f64 = f64::INFINITY;
}

/// Relative threshold below which a reduced cost counts as negative.
const PIVOT_TOL: f64 = 1e-12;

/// Basic solution: `(row, col, flow)` for every real arc in the final tree.
pub(crate) struct Basis<F> {
    pub arcs: Vec<(usize, usize, F)>,
}

struct Tree<F> {
    parent: Vec<usize>,
    /// Arc joining a node to its parent. Ids `>= m` are artificial.
    pred: Vec<usize>,
    /// True when the pred arc points from the node toward its parent.
    up: Vec<bool>,
    /// Flow on the pred arc.
    flow: Vec<F>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    stamp: Vec<u32>,
    generation: u32,
}

/// Solves `min sum c_ij g_ij` subject to row sums `supply` and column sums
/// `demand`. `cost` is row-major `n0 x n1`. Totals of `supply` and `demand`
/// must agree.
pub(crate) fn solve<F: Mass>(cost: &[f64], supply: &[F], demand: &[F]) -> Result<Basis<F>> {
    let n0 = supply.len();
    let n1 = demand.len();
    let m = n0 * n1;
    let nodes = n0 + n1;
    let root = nodes;
    debug_assert_eq!(cost.len(), m);

    let max_cost = cost.iter().fold(0.0f64, |a, &c| a.max(c));
    let art_cost = (max_cost + 1.0) * (nodes + 1) as f64;

    // Artificial arc of node k: k -> root when its supply is nonnegative,
    // root -> k otherwise. Columns carry supply -demand.
    let mut art_up = vec![true; nodes];
    let mut tree = Tree {
        parent: vec![root; nodes + 1],
        pred: (0..=nodes).map(|k| m + k).collect(),
        up: vec![true; nodes + 1],
        flow: vec![F::ZERO; nodes + 1],
        depth: vec![1; nodes + 1],
        pi: vec![0.0; nodes + 1],
        stamp: vec![0; nodes + 1],
        generation: 0,
    };
    tree.depth[root] = 0;
    for (i, &a) in supply.iter().enumerate() {
        tree.flow[i] = a;
    }
    for (j, &b) in demand.iter().enumerate() {
        let k = n0 + j;
        if b > F::ZERO {
            art_up[k] = false;
            tree.up[k] = false;
            tree.flow[k] = b;
            tree.pi[k] = art_cost;
        }
    }

    let arc_cost = |e: usize| -> f64 {
        if e < m {
            cost[e]
        } else if art_up[e - m] {
            0.0
        } else {
            art_cost
        }
    };
    let endpoints = |e: usize| -> (usize, usize) {
        if e < m {
            (e / n1, n0 + e % n1)
        } else if art_up[e - m] {
            (e - m, root)
        } else {
            (root, e - m)
        }
    };

    let mut in_tree = vec![false; m];
    let block = ((m as f64).sqrt().ceil() as usize).max(10).min(m.max(1));
    let mut next_arc = 0usize;
    let max_pivots = (100 * (m + nodes)).max(100_000);

    let mut pivots = 0usize;
    loop {
        let Some(in_arc) = find_entering(cost, &tree.pi, &in_tree, n0, n1, block, &mut next_arc)
        else {
            break;
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::SolverStalled(max_pivots));
        }

        let (src, tgt) = endpoints(in_arc);
        let join = find_join(&tree, src, tgt);

        // Leaving arc: first side walks from the source up to the join, the
        // second side from the target. Ties on the second side go to the arc
        // nearest the join, which keeps the tree strongly feasible.
        let mut delta = F::INF;
        let mut u_out = usize::MAX;
        let mut on_first = true;
        let mut u = src;
        while u != join {
            let d = if tree.up[u] { tree.flow[u] } else { F::INF };
            if d < delta {
                delta = d;
                u_out = u;
            }
            u = tree.parent[u];
        }
        let mut u = tgt;
        while u != join {
            let d = if tree.up[u] { F::INF } else { tree.flow[u] };
            if d <= delta {
                delta = d;
                u_out = u;
                on_first = false;
            }
            u = tree.parent[u];
        }
        // The cycle always contains a decreasing arc since every arc on a
        // path to the root eventually reaches an artificial arc.
        debug_assert!(u_out != usize::MAX);

        if delta > F::ZERO {
            let mut u = src;
            while u != join {
                if tree.up[u] {
                    tree.flow[u] -= delta;
                } else {
                    tree.flow[u] += delta;
                }
                u = tree.parent[u];
            }
            let mut u = tgt;
            while u != join {
                if tree.up[u] {
                    tree.flow[u] += delta;
                } else {
                    tree.flow[u] -= delta;
                }
                u = tree.parent[u];
            }
        }

        let (u_in, v_in) = if on_first { (src, tgt) } else { (tgt, src) };
        let leaving = tree.pred[u_out];
        if leaving < m {
            in_tree[leaving] = false;
        }
        in_tree[in_arc] = true;

        // Reverse the path u_in .. u_out and hang it below v_in.
        let mut child = u_in;
        let mut new_parent = v_in;
        let mut new_pred = in_arc;
        let mut new_up = u_in == src;
        let mut new_flow = delta;
        loop {
            let old_parent = tree.parent[child];
            let old_pred = tree.pred[child];
            let old_up = tree.up[child];
            let old_flow = tree.flow[child];
            tree.parent[child] = new_parent;
            tree.pred[child] = new_pred;
            tree.up[child] = new_up;
            tree.flow[child] = new_flow;
            if child == u_out {
                break;
            }
            new_parent = child;
            new_pred = old_pred;
            new_up = !old_up;
            new_flow = old_flow;
            child = old_parent;
        }

        refresh_potentials(&mut tree, root, &arc_cost);
    }

    let mut arcs = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let e = tree.pred[k];
        if e < m {
            arcs.push((e / n1, e % n1, tree.flow[k]));
        }
    }
    arcs.sort_by_key(|&(i, j, _)| (i, j));
    Ok(Basis { arcs })
}

fn find_entering(
    cost: &[f64],
    pi: &[f64],
    in_tree: &[bool],
    n0: usize,
    n1: usize,
    block: usize,
    next_arc: &mut usize,
) -> Option<usize> {
    let m = cost.len();
    let mut best = None;
    let mut min = 0.0f64;
    let mut count = block;
    let mut e = *next_arc;
    for _ in 0..m {
        if !in_tree[e] {
            let (i, j) = (e / n1, n0 + e % n1);
            let c = cost[e];
            let rc = c + pi[i] - pi[j];
            let scale = c.abs().max(pi[i].abs()).max(pi[j].abs()).max(1.0);
            if rc < -PIVOT_TOL * scale && rc < min {
                min = rc;
                best = Some(e);
            }
        }
        count -= 1;
        if count == 0 {
            if best.is_some() {
                *next_arc = e;
                return best;
            }
            count = block;
        }
        e += 1;
        if e == m {
            e = 0;
        }
    }
    *next_arc = e;
    best
}

fn find_join<F>(tree: &Tree<F>, mut u: usize, mut v: usize) -> usize {
    while u != v {
        if tree.depth[u] >= tree.depth[v] {
            u = tree.parent[u];
        } else {
            v = tree.parent[v];
        }
    }
    u
}

/// Recomputes potentials and depths from the root in O(nodes), visiting
/// each node once through a memoised walk up the parent pointers.
fn refresh_potentials<F>(tree: &mut Tree<F>, root: usize, arc_cost: &impl Fn(usize) -> f64) {
    tree.generation = tree.generation.wrapping_add(1);
    if tree.generation == 0 {
        tree.stamp.iter_mut().for_each(|s| *s = u32::MAX);
        tree.generation = 1;
    }
    let gen = tree.generation;
    tree.stamp[root] = gen;
    tree.pi[root] = 0.0;
    tree.depth[root] = 0;
    let mut path = Vec::new();
    for start in 0..tree.parent.len() {
        let mut u = start;
        while tree.stamp[u] != gen {
            path.push(u);
            u = tree.parent[u];
        }
        while let Some(w) = path.pop() {
            let p = tree.parent[w];
            let c = arc_cost(tree.pred[w]);
            tree.pi[w] = if tree.up[w] { tree.pi[p] - c } else { tree.pi[p] + c };
            tree.depth[w] = tree.depth[p] + 1;
            tree.stamp[w] = gen;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_cost(cost: &[f64], n1: usize, basis: &Basis<f64>) -> f64 {
        basis.arcs.iter().map(|&(i, j, f)| cost[i * n1 + j] * f).sum()
    }

    #[test]
    fn assignment_picks_the_cheap_diagonal() {
        // Cost favours the anti-diagonal.
        let cost = [5.0, 1.0, 1.0, 5.0];
        let basis = solve::<f64>(&cost, &[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(total_cost(&cost, 2, &basis), 1.0);
    }

    #[test]
    fn integer_flows_are_conserved() {
        let cost = [0.0, 1.0, 4.0, 9.0, 1.0, 0.0, 1.0, 4.0, 4.0, 1.0, 0.0, 1.0];
        let basis = solve::<i64>(&cost, &[4, 4, 4], &[3, 3, 3, 3]).unwrap();
        let mut rows = [0i64; 3];
        let mut cols = [0i64; 4];
        for &(i, j, f) in &basis.arcs {
            rows[i] += f;
            cols[j] += f;
        }
        assert_eq!(rows, [4, 4, 4]);
        assert_eq!(cols, [3, 3, 3, 3]);
        assert!(basis.arcs.len() <= 3 + 4 - 1);
    }
}
