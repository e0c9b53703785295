//! Ground-truth line mazes: axis-aligned planar graphs with a start and an end
//! marker, plus the line-oriented text format used for golden files.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// Coordinates in centimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Largest per-axis difference.
    pub fn chebyshev(&self, other: &Point2D) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn offset(&self, heading: Heading, distance: f64) -> Point2D {
        let (dx, dy) = heading.unit();
        Point2D::new(self.x + dx * distance, self.y + dy * distance)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// One of the four axis directions. The discriminants are the absolute
/// direction codes used by the mapping explorer: east 1, north 2, west 3,
/// south 4, increasing counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heading {
    East = 1,
    North = 2,
    West = 3,
    South = 4,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::East, Heading::North, Heading::West, Heading::South];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Heading> {
        match code {
            1 => Some(Heading::East),
            2 => Some(Heading::North),
            3 => Some(Heading::West),
            4 => Some(Heading::South),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize - 1
    }

    /// Rotate counter-clockwise by `quarter_turns` * 90 degrees.
    pub fn rotate_ccw(self, quarter_turns: i32) -> Heading {
        let idx = (self.index() as i32 + quarter_turns).rem_euclid(4);
        Heading::ALL[idx as usize]
    }

    pub fn reverse(self) -> Heading {
        self.rotate_ccw(2)
    }

    pub fn unit(self) -> (f64, f64) {
        match self {
            Heading::East => (1.0, 0.0),
            Heading::North => (0.0, 1.0),
            Heading::West => (-1.0, 0.0),
            Heading::South => (0.0, -1.0),
        }
    }

    /// Direction of the axis-aligned vector `to - from`, if it is axis-aligned
    /// and non-zero.
    pub fn between(from: &Point2D, to: &Point2D) -> Option<Heading> {
        let dx = to.x - from.x;
        let dy = to.y - from.y;
        match (dx == 0.0, dy == 0.0) {
            (true, false) => Some(if dy > 0.0 { Heading::North } else { Heading::South }),
            (false, true) => Some(if dx > 0.0 { Heading::East } else { Heading::West }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MazeNode {
    pub id: String,
    pub position: Point2D,
}

/// Undirected edge between two node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeEdge {
    pub a: String,
    pub b: String,
}

impl MazeEdge {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        MazeEdge {
            a: a.into(),
            b: b.into(),
        }
    }

    fn key(&self) -> (String, String) {
        if self.a <= self.b {
            (self.a.clone(), self.b.clone())
        } else {
            (self.b.clone(), self.a.clone())
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MazeError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid maze: {0}")]
    Invalid(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, MazeError> {
    Err(MazeError::Invalid(msg.into()))
}

/// A validated maze. Construct through [`MazeSpec::new`] or [`parse_maze`];
/// both check every structural invariant, so a `MazeSpec` value is always
/// connected, axis-aligned and free of overlapping or collinear segments.
#[derive(Debug, Clone)]
pub struct MazeSpec {
    nodes: Vec<MazeNode>,
    edges: Vec<MazeEdge>,
    start: String,
    end: String,
    index: HashMap<String, usize>,
    // exits[node] = neighbor index per absolute direction
    exits: Vec<[Option<usize>; 4]>,
}

impl PartialEq for MazeSpec {
    /// Equality up to node and edge ordering.
    fn eq(&self, other: &Self) -> bool {
        let nodes = |m: &MazeSpec| {
            m.nodes
                .iter()
                .map(|n| (n.id.clone(), (n.position.x.to_bits(), n.position.y.to_bits())))
                .collect::<BTreeMap<_, _>>()
        };
        let edges = |m: &MazeSpec| m.edges.iter().map(MazeEdge::key).collect::<BTreeSet<_>>();
        self.start == other.start && self.end == other.end && nodes(self) == nodes(other) && edges(self) == edges(other)
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(char::is_whitespace)
}

impl MazeSpec {
    pub fn new(
        nodes: Vec<MazeNode>,
        edges: Vec<MazeEdge>,
        start: impl Into<String>,
        end: impl Into<String>,
    ) -> Result<Self, MazeError> {
        let start = start.into();
        let end = end.into();

        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if !valid_id(&node.id) {
                return invalid(format!("node id `{}` is empty or contains whitespace", node.id));
            }
            if !node.position.x.is_finite() || !node.position.y.is_finite() {
                return invalid(format!("node `{}` has non-finite coordinates", node.id));
            }
            if index.insert(node.id.clone(), i).is_some() {
                return invalid(format!("duplicate node id `{}`", node.id));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| MazeError::UnknownNode(id.to_string()))
        };
        let start_idx = lookup(&start)?;
        lookup(&end)?;

        let mut seen = BTreeSet::new();
        let mut exits = vec![[None; 4]; nodes.len()];
        let mut segments = Vec::with_capacity(edges.len());
        for edge in &edges {
            let (a, b) = (lookup(&edge.a)?, lookup(&edge.b)?);
            if a == b {
                return invalid(format!("edge `{}`-`{}` is a self-loop", edge.a, edge.b));
            }
            if !seen.insert(edge.key()) {
                return invalid(format!("duplicate edge `{}`-`{}`", edge.a, edge.b));
            }
            let (pa, pb) = (nodes[a].position, nodes[b].position);
            let Some(dir) = Heading::between(&pa, &pb) else {
                return invalid(format!("edge `{}`-`{}` not axis-aligned", edge.a, edge.b));
            };
            for (from, to, d) in [(a, b, dir), (b, a, dir.reverse())] {
                if exits[from][d.index()].is_some() {
                    return invalid(format!("edges leaving `{}` towards {:?} overlap", nodes[from].id, d));
                }
                exits[from][d.index()] = Some(to);
            }
            segments.push((a, b));
        }

        check_overlaps(&nodes, &segments)?;

        for (i, node) in nodes.iter().enumerate() {
            let dirs: Vec<Heading> = Heading::ALL
                .into_iter()
                .filter(|d| exits[i][d.index()].is_some())
                .collect();
            if dirs.len() == 2 && dirs[0].reverse() == dirs[1] {
                return invalid(format!(
                    "node `{}` has two collinear edges; it is not a turn or junction",
                    node.id
                ));
            }
        }

        // connectivity
        let mut reached = vec![false; nodes.len()];
        let mut queue = VecDeque::from([start_idx]);
        reached[start_idx] = true;
        while let Some(u) = queue.pop_front() {
            for v in exits[u].iter().flatten() {
                if !reached[*v] {
                    reached[*v] = true;
                    queue.push_back(*v);
                }
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return invalid(format!(
                "maze is not connected: `{}` unreachable from start",
                nodes[i].id
            ));
        }

        Ok(MazeSpec {
            nodes,
            edges,
            start,
            end,
            index,
            exits,
        })
    }

    pub fn nodes(&self) -> &[MazeNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[MazeEdge] {
        &self.edges
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn end(&self) -> &str {
        &self.end
    }

    pub fn node(&self, id: &str) -> Result<&MazeNode, MazeError> {
        self.index
            .get(id)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| MazeError::UnknownNode(id.to_string()))
    }

    pub fn position(&self, id: &str) -> Result<Point2D, MazeError> {
        self.node(id).map(|n| n.position)
    }

    pub fn node_degree(&self, id: &str) -> Result<usize, MazeError> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| MazeError::UnknownNode(id.to_string()))?;
        Ok(self.exits[i].iter().flatten().count())
    }

    /// Neighbor reached by leaving `id` in absolute direction `heading`.
    pub fn exit(&self, id: &str, heading: Heading) -> Result<Option<&str>, MazeError> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| MazeError::UnknownNode(id.to_string()))?;
        Ok(self.exits[i][heading.index()].map(|j| self.nodes[j].id.as_str()))
    }

    /// Available exit directions of `id`, in E, N, W, S order.
    pub fn exits(&self, id: &str) -> Result<Vec<Heading>, MazeError> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| MazeError::UnknownNode(id.to_string()))?;
        Ok(Heading::ALL
            .into_iter()
            .filter(|d| self.exits[i][d.index()].is_some())
            .collect())
    }

    pub fn edge_length(&self, a: &str, b: &str) -> Result<f64, MazeError> {
        Ok(self.position(a)?.distance(&self.position(b)?))
    }

    pub fn neighbors(&self, id: &str) -> Result<Vec<&str>, MazeError> {
        let i = *self
            .index
            .get(id)
            .ok_or_else(|| MazeError::UnknownNode(id.to_string()))?;
        Ok(self.exits[i]
            .iter()
            .flatten()
            .map(|&j| self.nodes[j].id.as_str())
            .collect())
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.nodes.len()
    }
}

/// Rejects pairs of segments that touch anywhere other than a shared endpoint.
fn check_overlaps(nodes: &[MazeNode], segments: &[(usize, usize)]) -> Result<(), MazeError> {
    struct Seg {
        lo: f64,
        hi: f64,
        at: f64,
        a: usize,
        b: usize,
    }
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for &(a, b) in segments {
        let (pa, pb) = (nodes[a].position, nodes[b].position);
        if pa.y == pb.y {
            horizontal.push(Seg {
                lo: pa.x.min(pb.x),
                hi: pa.x.max(pb.x),
                at: pa.y,
                a,
                b,
            });
        } else {
            vertical.push(Seg {
                lo: pa.y.min(pb.y),
                hi: pa.y.max(pb.y),
                at: pa.x,
                a,
                b,
            });
        }
    }
    let name = |s: &Seg| format!("`{}`-`{}`", nodes[s.a].id, nodes[s.b].id);
    let shares = |s: &Seg, t: &Seg| s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b;

    for group in [&horizontal, &vertical] {
        for (i, s) in group.iter().enumerate() {
            for t in &group[i + 1..] {
                if s.at == t.at && s.lo < t.hi && t.lo < s.hi {
                    return invalid(format!("edges {} and {} overlap", name(s), name(t)));
                }
            }
        }
    }
    for h in &horizontal {
        for v in &vertical {
            let touches = v.at >= h.lo && v.at <= h.hi && h.at >= v.lo && h.at <= v.hi;
            if touches && !shares(h, v) {
                return invalid(format!(
                    "edges {} and {} cross; model the crossing as a junction node",
                    name(h),
                    name(v)
                ));
            }
        }
    }
    // a node lying in the interior of an edge it does not belong to
    for (i, node) in nodes.iter().enumerate() {
        let p = node.position;
        for s in &horizontal {
            if s.a != i && s.b != i && p.y == s.at && p.x > s.lo && p.x < s.hi {
                return invalid(format!("node `{}` lies on edge {}", node.id, name(s)));
            }
        }
        for s in &vertical {
            if s.a != i && s.b != i && p.x == s.at && p.y > s.lo && p.y < s.hi {
                return invalid(format!("node `{}` lies on edge {}", node.id, name(s)));
            }
        }
    }
    Ok(())
}

pub fn node_degree(maze: &MazeSpec, id: &str) -> Result<usize, MazeError> {
    maze.node_degree(id)
}

/// Parses the maze file format:
///
/// ```text
/// # comment
/// node <id> <x> <y>
/// edge <id> <id>
/// start <id>
/// end <id>
/// ```
pub fn parse_maze(text: &str) -> Result<MazeSpec, MazeError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut start: Option<String> = None;
    let mut end: Option<String> = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&keyword, args)) = tokens.split_first() else {
            continue;
        };
        let syntax = |message: String| MazeError::Syntax { line, message };
        let expect = |count: usize| {
            if args.len() == count {
                Ok(())
            } else {
                Err(syntax(format!(
                    "`{keyword}` takes {count} argument(s), found {}",
                    args.len()
                )))
            }
        };
        let number = |tok: &str| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| syntax(format!("`{tok}` is not a finite number")))
        };
        match keyword {
            "node" => {
                expect(3)?;
                let position = Point2D::new(number(args[1])?, number(args[2])?);
                nodes.push(MazeNode {
                    id: args[0].to_string(),
                    position,
                });
            }
            "edge" => {
                expect(2)?;
                edges.push(MazeEdge::new(args[0], args[1]));
            }
            "start" | "end" => {
                expect(1)?;
                let slot = if keyword == "start" { &mut start } else { &mut end };
                if slot.replace(args[0].to_string()).is_some() {
                    return Err(syntax(format!("duplicate `{keyword}` line")));
                }
            }
            other => return Err(syntax(format!("unknown record `{other}`"))),
        }
    }

    let start = start.ok_or_else(|| MazeError::Invalid("missing `start` line".into()))?;
    let end = end.ok_or_else(|| MazeError::Invalid("missing `end` line".into()))?;
    MazeSpec::new(nodes, edges, start, end)
}

pub fn serialize_maze(maze: &MazeSpec) -> String {
    let mut out = String::new();
    for node in &maze.nodes {
        let _ = writeln!(out, "node {} {} {}", node.id, node.position.x, node.position.y);
    }
    for edge in &maze.edges {
        let _ = writeln!(out, "edge {} {}", edge.a, edge.b);
    }
    let _ = writeln!(out, "start {}", maze.start);
    let _ = writeln!(out, "end {}", maze.end);
    out
}
