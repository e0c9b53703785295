//! Random valid mazes for property tests and the acceptance harness.
//!
//! A random spanning tree is grown over a grid with irregular integer
//! spacing, optional extra grid edges close loops, and straight pass-through
//! cells are merged away so every remaining degree-2 node is a turn.
//! Integer coordinates keep every path length exactly representable.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::maze::{MazeEdge, MazeNode, MazeSpec, Point2D};

#[derive(Debug, Clone)]
pub struct MazeGenConfig {
    /// Grid cells claimed by the spanning tree (before merging); at least 2.
    pub cells: usize,
    /// Probability of adding each non-tree grid edge between claimed cells.
    pub loop_prob: f64,
    /// Pick start and end among dead ends when possible.
    pub leaf_endpoints: bool,
    /// Inclusive range of spacing between neighbouring grid lines, in cm.
    pub gap: (i64, i64),
}

impl MazeGenConfig {
    pub fn tree(cells: usize) -> Self {
        MazeGenConfig {
            cells,
            loop_prob: 0.0,
            leaf_endpoints: false,
            gap: (2, 9),
        }
    }

    pub fn loopy(cells: usize, loop_prob: f64) -> Self {
        MazeGenConfig {
            cells,
            loop_prob,
            leaf_endpoints: false,
            gap: (2, 9),
        }
    }
}

const STEPS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

pub fn random_maze<R: Rng + ?Sized>(rng: &mut R, cfg: &MazeGenConfig) -> MazeSpec {
    let cells = cfg.cells.max(2);
    let side = (cells as f64).sqrt().ceil() as i64 + 1;
    let (w, h) = (side, side);
    let gaps = |rng: &mut R, n: i64| {
        let mut acc = 0i64;
        (0..n)
            .map(|_| {
                let v = acc;
                acc += rng.gen_range(cfg.gap.0..=cfg.gap.1);
                v
            })
            .collect::<Vec<_>>()
    };
    let xs = gaps(rng, w);
    let ys = gaps(rng, h);
    let id = |c: (i64, i64)| (c.1 * w + c.0) as usize;
    let inside = |c: (i64, i64)| c.0 >= 0 && c.0 < w && c.1 >= 0 && c.1 < h;

    // exits[cell][dir]
    let mut exits = vec![[false; 4]; (w * h) as usize];
    let mut claimed = vec![false; (w * h) as usize];
    let first = (rng.gen_range(0..w), rng.gen_range(0..h));
    claimed[id(first)] = true;
    let mut tree = vec![first];
    let mut frontier: Vec<((i64, i64), usize)> = (0..4).map(|d| (first, d)).collect();
    while tree.len() < cells && !frontier.is_empty() {
        let pick = rng.gen_range(0..frontier.len());
        let (from, d) = frontier.swap_remove(pick);
        let to = (from.0 + STEPS[d].0, from.1 + STEPS[d].1);
        if !inside(to) || claimed[id(to)] {
            continue;
        }
        claimed[id(to)] = true;
        exits[id(from)][d] = true;
        exits[id(to)][(d + 2) % 4] = true;
        tree.push(to);
        frontier.extend((0..4).map(|d| (to, d)));
    }

    if cfg.loop_prob > 0.0 {
        for &c in &tree {
            for d in [0usize, 1] {
                let n = (c.0 + STEPS[d].0, c.1 + STEPS[d].1);
                if inside(n) && claimed[id(n)] && !exits[id(c)][d] && rng.gen_bool(cfg.loop_prob) {
                    exits[id(c)][d] = true;
                    exits[id(n)][d + 2] = true;
                }
            }
        }
    }

    let pass_through = |c: (i64, i64)| {
        let e = exits[id(c)];
        (e[0] && e[2] && !e[1] && !e[3]) || (e[1] && e[3] && !e[0] && !e[2])
    };
    let mut kept: Vec<(i64, i64)> = tree.iter().copied().filter(|&c| !pass_through(c)).collect();
    kept.sort();
    let name_of = |c: (i64, i64), kept: &[(i64, i64)]| format!("n{}", kept.binary_search(&c).expect("kept cell"));

    let nodes: Vec<MazeNode> = kept
        .iter()
        .map(|&c| MazeNode {
            id: name_of(c, &kept),
            position: Point2D::new(xs[c.0 as usize] as f64, ys[c.1 as usize] as f64),
        })
        .collect();
    let mut edge_keys = BTreeSet::new();
    for &c in &kept {
        for d in 0..4 {
            if !exits[id(c)][d] {
                continue;
            }
            let mut cur = (c.0 + STEPS[d].0, c.1 + STEPS[d].1);
            while pass_through(cur) {
                cur = (cur.0 + STEPS[d].0, cur.1 + STEPS[d].1);
            }
            let (a, b) = (name_of(c, &kept), name_of(cur, &kept));
            edge_keys.insert(if a < b { (a, b) } else { (b, a) });
        }
    }
    let edges: Vec<MazeEdge> = edge_keys.into_iter().map(|(a, b)| MazeEdge::new(a, b)).collect();

    let degree = |n: &MazeNode| edges.iter().filter(|e| e.a == n.id || e.b == n.id).count();
    let mut candidates: Vec<&MazeNode> = nodes.iter().collect();
    if cfg.leaf_endpoints {
        let leaves: Vec<&MazeNode> = nodes.iter().filter(|n| degree(n) == 1).collect();
        if leaves.len() >= 2 {
            candidates = leaves;
        }
    }
    let ends: Vec<&&MazeNode> = candidates.choose_multiple(rng, 2).collect();
    let (start, end) = (ends[0].id.clone(), ends[1].id.clone());
    MazeSpec::new(nodes, edges, start, end).expect("generated maze satisfies invariants")
}
