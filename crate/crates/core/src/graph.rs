//! Weighted adjacency-list graph of a discovered maze and shortest paths.
//!
//! Equal-length shortest paths are broken by the lexicographically smallest
//! node-name sequence so that the Dijkstra result and the exhaustive oracle
//! agree on paths, not just lengths.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::mapping::ExplorationState;
use crate::maze::{MazeSpec, Point2D};

/// Largest graph the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("`{to}` unreachable from `{from}`")]
    Unreachable { from: String, to: String },
    #[error("graph has {0} vertices; exhaustive search is limited to {BRUTE_FORCE_LIMIT}")]
    TooLarge(usize),
    #[error("inconsistent exploration state: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub nodes: Vec<String>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MazeGraph {
    coords: BTreeMap<String, Point2D>,
    /// Neighbors sorted by name.
    adjacency: BTreeMap<String, Vec<(String, f64)>>,
}

impl MazeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str, at: Point2D) {
        self.coords.insert(name.to_string(), at);
        self.adjacency.entry(name.to_string()).or_default();
    }

    /// Adds the undirected edge `a`-`b` weighted by Euclidean distance.
    /// Repeated edges are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::Inconsistent(format!("self-loop at `{a}`")));
        }
        let pa = self.coord(a)?;
        let pb = self.coord(b)?;
        let w = pa.distance(&pb);
        for (u, v) in [(a, b), (b, a)] {
            let list = self.adjacency.get_mut(u).expect("vertex has list");
            if let Err(pos) = list.binary_search_by(|(n, _)| n.as_str().cmp(v)) {
                list.insert(pos, (v.to_string(), w));
            }
        }
        Ok(())
    }

    /// Ground-truth graph of a maze.
    pub fn from_maze(maze: &MazeSpec) -> Self {
        let mut g = MazeGraph::new();
        for n in maze.nodes() {
            g.add_vertex(&n.id, n.position);
        }
        for e in maze.edges() {
            g.add_edge(&e.a, &e.b).expect("maze edges join distinct nodes");
        }
        g
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (&str, Point2D)> {
        self.coords.iter().map(|(n, p)| (n.as_str(), *p))
    }

    pub fn coord(&self, name: &str) -> Result<Point2D, GraphError> {
        self.coords
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn neighbors(&self, name: &str) -> Result<&[(String, f64)], GraphError> {
        self.adjacency
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }

    /// One line per vertex: `name x y : neighbor,length ...`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (name, p) in &self.coords {
            let _ = write!(out, "{name} {:.2} {:.2} :", p.x, p.y);
            for (n, w) in &self.adjacency[name] {
                let _ = write!(out, " {n},{w:.2}");
            }
            out.push('\n');
        }
        out
    }
}

/// Rebuilds the graph from an exploration: every pair of names that appear
/// next to each other in the visit sequence is an edge.
pub fn build_graph(state: &ExplorationState) -> Result<MazeGraph, GraphError> {
    let mut g = MazeGraph::new();
    for p in &state.known {
        g.add_vertex(&p.name, p.coord);
    }
    for pair in state.points.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let (pa, pb) = (g.coord(a)?, g.coord(b)?);
        let (dx, dy) = ((pb.x - pa.x).abs(), (pb.y - pa.y).abs());
        // measured coordinates carry noise; a real maze edge is still far
        // closer to one axis than the other
        if dx.min(dy) > 0.5 * dx.max(dy) {
            return Err(GraphError::Inconsistent(format!(
                "`{a}` {pa} and `{b}` {pb} are adjacent but not axis-aligned"
            )));
        }
        g.add_edge(a, b)?;
    }
    Ok(g)
}

#[derive(PartialEq)]
struct Entry(f64, String);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest distances to every reachable vertex.
pub fn distances(g: &MazeGraph, source: &str) -> Result<BTreeMap<String, f64>, GraphError> {
    g.coord(source)?;
    let mut dist: BTreeMap<String, f64> = BTreeMap::new();
    let mut heap = BinaryHeap::from([Entry(0.0, source.to_string())]);
    while let Some(Entry(d, v)) = heap.pop() {
        if dist.contains_key(&v) {
            continue;
        }
        for (u, w) in g.neighbors(&v)? {
            if !dist.contains_key(u) {
                heap.push(Entry(d + w, u.clone()));
            }
        }
        dist.insert(v, d);
    }
    Ok(dist)
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn path_length(g: &MazeGraph, nodes: &[String]) -> f64 {
    nodes
        .windows(2)
        .map(|p| {
            let list = g.neighbors(&p[0]).expect("path vertex");
            list.iter().find(|(n, _)| *n == p[1]).expect("path edge").1
        })
        .sum()
}

pub fn dijkstra(g: &MazeGraph, s: &str, t: &str) -> Result<PathResult, GraphError> {
    g.coord(s)?;
    let to_t = distances(g, t)?;
    if !to_t.contains_key(s) {
        return Err(GraphError::Unreachable {
            from: s.to_string(),
            to: t.to_string(),
        });
    }
    let mut nodes = vec![s.to_string()];
    let mut v = s.to_string();
    while v != t {
        let dv = to_t[&v];
        // neighbors are sorted by name, so the first tight edge is the
        // lexicographically smallest continuation
        let next = g
            .neighbors(&v)?
            .iter()
            .find(|(u, w)| to_t.get(u).is_some_and(|du| ties(du + w, dv)))
            .expect("a tight edge leaves every vertex off the target")
            .0
            .clone();
        nodes.push(next.clone());
        v = next;
    }
    let length = path_length(g, &nodes);
    Ok(PathResult { nodes, length })
}

/// Exhaustive simple-path enumeration; test oracle for small graphs.
pub fn brute_force_shortest(g: &MazeGraph, s: &str, t: &str) -> Result<PathResult, GraphError> {
    if g.len() > BRUTE_FORCE_LIMIT {
        return Err(GraphError::TooLarge(g.len()));
    }
    g.coord(s)?;
    g.coord(t)?;

    fn walk(g: &MazeGraph, t: &str, path: &mut Vec<String>, best: &mut Option<PathResult>) {
        let v = path.last().expect("non-empty").clone();
        if v == t {
            let length = path_length(g, path);
            let better = match best {
                None => true,
                Some(b) if ties(length, b.length) => *path < b.nodes,
                Some(b) => length < b.length,
            };
            if better {
                *best = Some(PathResult {
                    nodes: path.clone(),
                    length,
                });
            }
            return;
        }
        for (u, _) in g.neighbors(&v).expect("vertex") {
            if !path.contains(u) {
                path.push(u.clone());
                walk(g, t, path, best);
                path.pop();
            }
        }
    }

    let mut best = None;
    walk(g, t, &mut vec![s.to_string()], &mut best);
    best.ok_or_else(|| GraphError::Unreachable {
        from: s.to_string(),
        to: t.to_string(),
    })
}
