//! Full-maze mapping by dead reckoning.
//!
//! The robot keeps four parallel records: the visit sequence of point
//! names, each point's type (exits minus one), an explored counter and a
//! coordinate. Points are recognised purely by coordinate: a measured
//! arrival within tolerance of a stored point is that point, anything else
//! is new. The simulator keeps a private name-to-node map only to report
//! mapping failures; the explorer never consults it for decisions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{self, MazeGraph};
use crate::maze::{Heading, MazeError, MazeSpec, Point2D};
use crate::motion::{simulate_segment, EncoderLog, MotionError, MotionParams};
use crate::odometry::{both_wheels, linearize_arc, linearize_basic, CalibConstants, OdometryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OdometrySource {
    Ideal,
    RawEncoder,
    CorrectedBasic,
    CorrectedArc,
}

impl FromStr for OdometrySource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "raw" | "raw-encoder" => Ok(Self::RawEncoder),
            "basic" | "corrected-basic" => Ok(Self::CorrectedBasic),
            "arc" | "corrected-arc" => Ok(Self::CorrectedArc),
            other => Err(format!("unknown odometry mode `{other}` (ideal|raw|basic|arc)")),
        }
    }
}

impl fmt::Display for OdometrySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ideal => "ideal",
            Self::RawEncoder => "raw",
            Self::CorrectedBasic => "basic",
            Self::CorrectedArc => "arc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// 3% of the longest segment measured so far, at least 1 cm.
    Auto,
    Fixed(f64),
}

impl Tolerance {
    pub fn resolve(self, longest_segment: f64) -> f64 {
        match self {
            Tolerance::Auto => (0.03 * longest_segment).max(1.0),
            Tolerance::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointNaming {
    /// "0", "1", ... in order of discovery.
    Sequential,
    /// Borrow the maze's own node ids (readable output for bundled mazes).
    MazeIds,
}

#[derive(Debug, Clone)]
pub struct MapConfig {
    pub params: MotionParams,
    pub cal: CalibConstants,
    pub source: OdometrySource,
    pub tolerance: Tolerance,
    pub naming: PointNaming,
    /// Absolute branch preference among unexplored exits.
    pub preference: [Heading; 4],
    /// Keep encoder logs (with trajectories) for every traversal.
    pub keep_logs: bool,
}

impl MapConfig {
    pub fn new(source: OdometrySource) -> Self {
        let params = MotionParams::default();
        let cal = CalibConstants::from_motion(&params).expect("default motion calibrates");
        MapConfig {
            params,
            cal,
            source,
            tolerance: Tolerance::Auto,
            naming: PointNaming::Sequential,
            preference: [Heading::East, Heading::North, Heading::West, Heading::South],
            keep_logs: false,
        }
    }

    pub fn ideal() -> Self {
        Self::new(OdometrySource::Ideal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownPoint {
    pub name: String,
    pub coord: Point2D,
    /// Exits minus one.
    pub type_: u32,
    pub explored: u32,
    pub neighbors: BTreeSet<String>,
}

impl KnownPoint {
    fn degree(&self) -> usize {
        self.type_ as usize + 1
    }

    pub fn is_complete(&self) -> bool {
        self.neighbors.len() >= self.degree()
    }
}

/// One arrival: a column of the exploration table.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub name: String,
    pub type_: u32,
    pub explored: u32,
    pub coord: Point2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord {
    pub from: String,
    pub to: String,
    pub heading: Heading,
    pub true_length: f64,
    pub measured: f64,
    pub log: Option<EncoderLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationState {
    /// Names in visit order.
    pub points: Vec<String>,
    /// Distinct points in order of discovery.
    pub known: Vec<KnownPoint>,
    pub direction: Heading,
    pub trace: Vec<TraceRow>,
    pub segments: Vec<SegmentRecord>,
    /// Simulator bookkeeping: point name to maze node id.
    pub landmarks: BTreeMap<String, String>,
    index: BTreeMap<String, usize>,
    longest_segment: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Maze(#[from] MazeError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Odometry(#[from] OdometryError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("coordinate {coord} is within {tol} cm of both `{a}` and `{b}`: tolerance too large for this maze")]
    Ambiguous {
        coord: Point2D,
        a: String,
        b: String,
        tol: f64,
    },
    #[error("mapping failure at `{point}`: {detail}")]
    MappingFailure { point: String, detail: String },
    #[error("exploration exceeded {budget} traversals")]
    Budget { budget: usize },
}

impl ExplorationState {
    fn new(start_name: String, type_: u32) -> Self {
        let origin = Point2D::new(0.0, 0.0);
        let start = KnownPoint {
            name: start_name.clone(),
            coord: origin,
            type_,
            explored: 1,
            neighbors: BTreeSet::new(),
        };
        ExplorationState {
            points: vec![start_name.clone()],
            trace: vec![TraceRow {
                name: start_name.clone(),
                type_,
                explored: 1,
                coord: origin,
            }],
            index: BTreeMap::from([(start_name, 0)]),
            known: vec![start],
            direction: Heading::North,
            segments: Vec::new(),
            landmarks: BTreeMap::new(),
            longest_segment: 0.0,
        }
    }

    pub fn total_points(&self) -> usize {
        self.known.len()
    }

    pub fn point(&self, name: &str) -> Option<&KnownPoint> {
        self.index.get(name).map(|&i| &self.known[i])
    }

    pub fn current(&self) -> &KnownPoint {
        self.point(self.points.last().expect("start recorded"))
            .expect("current is known")
    }

    /// Graph of the points and adjacencies discovered so far.
    pub fn known_graph(&self) -> MazeGraph {
        let mut g = MazeGraph::new();
        for p in &self.known {
            g.add_vertex(&p.name, p.coord);
        }
        for p in &self.known {
            for n in &p.neighbors {
                g.add_edge(&p.name, n).expect("neighbors are distinct known points");
            }
        }
        g
    }

    fn link(&mut self, a: &str, b: &str) {
        for (u, v) in [(a, b), (b, a)] {
            let p = &mut self.known[self.index[u]];
            p.neighbors.insert(v.to_string());
            // one less than the number of distinct adjacent points seen
            p.explored = (p.neighbors.len() as u32).saturating_sub(1).max(1);
        }
    }
}

/// The unique stored point within Chebyshev distance `tol` of `coord`.
pub fn match_point(coord: Point2D, state: &ExplorationState, tol: f64) -> Result<Option<String>, MapError> {
    if !(tol > 0.0) {
        return Err(MapError::InvalidTolerance(tol));
    }
    let mut hits = state.known.iter().filter(|p| p.coord.chebyshev(&coord) <= tol);
    match (hits.next(), hits.next()) {
        (None, _) => Ok(None),
        (Some(p), None) => Ok(Some(p.name.clone())),
        (Some(a), Some(b)) => Err(MapError::Ambiguous {
            coord,
            a: a.name.clone(),
            b: b.name.clone(),
            tol,
        }),
    }
}

/// Nearest under-explored point by known-graph distance from the current
/// point, ties to the smallest name; `None` when the maze is fully mapped.
pub fn next_target(state: &ExplorationState) -> Option<String> {
    let g = state.known_graph();
    let dist = graph::distances(&g, &state.current().name).expect("current point is a vertex");
    state
        .known
        .iter()
        .filter(|p| !p.is_complete())
        .filter_map(|p| dist.get(&p.name).map(|d| (*d, &p.name)))
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
        .map(|(_, n)| n.clone())
}

fn axis_heading(from: Point2D, to: Point2D) -> Heading {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    if dx.abs() >= dy.abs() {
        if dx >= 0.0 {
            Heading::East
        } else {
            Heading::West
        }
    } else if dy >= 0.0 {
        Heading::North
    } else {
        Heading::South
    }
}

/// Seed of the motion simulation for the `traversal`-th segment of a run.
pub fn segment_seed(seed: u64, traversal: usize) -> u64 {
    seed.wrapping_add((traversal as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct Robot<'a> {
    maze: &'a MazeSpec,
    cfg: &'a MapConfig,
    state: ExplorationState,
    /// Maze node the robot stands on.
    at: String,
    budget: usize,
}

impl Robot<'_> {
    fn measure(&self, length: f64) -> Result<(f64, Option<EncoderLog>), MapError> {
        if self.cfg.source == OdometrySource::Ideal && !self.cfg.keep_logs {
            return Ok((length, None));
        }
        let mut params = self
            .cfg
            .params
            .with_seed(segment_seed(self.cfg.params.seed, self.state.segments.len()));
        if self.cfg.source == OdometrySource::Ideal {
            params = MotionParams {
                seed: params.seed,
                ..MotionParams::noiseless()
            };
        }
        let log = simulate_segment(length, &params)?;
        let measured = match self.cfg.source {
            OdometrySource::Ideal => length,
            OdometrySource::RawEncoder => log.raw_distance(),
            OdometrySource::CorrectedBasic => both_wheels(&log, &self.cfg.cal, linearize_basic)?,
            OdometrySource::CorrectedArc => both_wheels(&log, &self.cfg.cal, linearize_arc)?,
        };
        Ok((measured, self.cfg.keep_logs.then_some(log)))
    }

    fn name_for(&self, node: &str) -> String {
        match self.cfg.naming {
            PointNaming::Sequential => self.state.known.len().to_string(),
            PointNaming::MazeIds => node.to_string(),
        }
    }

    fn traverse(&mut self, heading: Heading) -> Result<(), MapError> {
        if self.state.segments.len() >= self.budget {
            return Err(MapError::Budget { budget: self.budget });
        }
        let next = self
            .maze
            .exit(&self.at, heading)?
            .ok_or_else(|| MapError::MappingFailure {
                point: self.state.current().name.clone(),
                detail: format!("no exit towards {heading:?}"),
            })?
            .to_string();
        let true_length = self.maze.edge_length(&self.at, &next)?;
        let (measured, log) = self.measure(true_length)?;
        self.state.longest_segment = self.state.longest_segment.max(measured);
        let from = self.state.current().clone();
        let coord = from.coord.offset(heading, measured);
        let tol = self.cfg.tolerance.resolve(self.state.longest_segment);

        let name = match match_point(coord, &self.state, tol)? {
            Some(name) => {
                if self.state.landmarks[&name] != next {
                    return Err(MapError::MappingFailure {
                        point: name,
                        detail: format!("measured {coord} matched it, but the robot is elsewhere"),
                    });
                }
                name
            }
            None => {
                if let Some((name, _)) = self.state.landmarks.iter().find(|(_, id)| **id == next) {
                    let stored = self.state.point(name).expect("landmarked").coord;
                    return Err(MapError::MappingFailure {
                        point: name.clone(),
                        detail: format!("revisited at measured {coord}, stored {stored}, beyond tolerance {tol:.3}"),
                    });
                }
                let name = self.name_for(&next);
                let type_ = self.maze.node_degree(&next)? as u32 - 1;
                self.state.index.insert(name.clone(), self.state.known.len());
                self.state.known.push(KnownPoint {
                    name: name.clone(),
                    coord,
                    type_,
                    explored: 1,
                    neighbors: BTreeSet::new(),
                });
                self.state.landmarks.insert(name.clone(), next.clone());
                name
            }
        };

        self.state.link(&from.name, &name);
        self.state.points.push(name.clone());
        self.state.direction = heading;
        let p = self.state.point(&name).expect("just recorded");
        self.state.trace.push(TraceRow {
            name: name.clone(),
            type_: p.type_,
            explored: p.explored,
            coord: p.coord,
        });
        self.state.segments.push(SegmentRecord {
            from: from.name,
            to: name,
            heading,
            true_length,
            measured,
            log,
        });
        self.at = next;
        Ok(())
    }

    /// Exits of the current point not yet leading to a known neighbour.
    fn untraversed(&self) -> Result<Vec<Heading>, MapError> {
        let here = self.state.current();
        let used: Vec<Heading> = here
            .neighbors
            .iter()
            .map(|n| axis_heading(here.coord, self.state.point(n).expect("known").coord))
            .collect();
        Ok(self
            .maze
            .exits(&self.at)?
            .into_iter()
            .filter(|h| !used.contains(h))
            .collect())
    }
}

pub fn explore_map(maze: &MazeSpec, cfg: &MapConfig) -> Result<ExplorationState, MapError> {
    if let Tolerance::Fixed(t) = cfg.tolerance {
        if !(t > 0.0) {
            return Err(MapError::InvalidTolerance(t));
        }
    }
    cfg.params.validate()?;
    if cfg.source != OdometrySource::Ideal && cfg.source != OdometrySource::RawEncoder {
        cfg.cal.validate()?;
    }
    let start = maze.start().to_string();
    let start_name = match cfg.naming {
        PointNaming::Sequential => "0".to_string(),
        PointNaming::MazeIds => start.clone(),
    };
    let mut state = ExplorationState::new(start_name.clone(), maze.node_degree(&start)? as u32 - 1);
    state.landmarks.insert(start_name, start.clone());
    let mut robot = Robot {
        maze,
        cfg,
        state,
        at: start,
        budget: 4 * maze.edges().len(),
    };

    loop {
        let open = robot.untraversed()?;
        if let Some(&h) = cfg.preference.iter().find(|h| open.contains(h)) {
            robot.traverse(h)?;
            continue;
        }
        let Some(target) = next_target(&robot.state) else { break };
        let route = graph::dijkstra(&robot.state.known_graph(), &robot.state.current().name, &target)?;
        for pair in route.nodes.windows(2) {
            let a = robot.state.point(&pair[0]).expect("route on known points").coord;
            let b = robot.state.point(&pair[1]).expect("route on known points").coord;
            robot.traverse(axis_heading(a, b))?;
        }
    }
    Ok(robot.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::maze::parse_maze;

    fn maze_ids(source: OdometrySource) -> MapConfig {
        MapConfig {
            naming: PointNaming::MazeIds,
            ..MapConfig::new(source)
        }
    }

    #[test]
    fn fig2_trace() {
        let st = explore_map(&examples::fig2(), &maze_ids(OdometrySource::Ideal)).unwrap();
        assert_eq!(st.points, ["S", "A", "E", "D", "G", "D", "C", "A", "B", "A", "E", "F"]);
        let types: Vec<u32> = st.trace.iter().map(|r| r.type_).collect();
        assert_eq!(types, [0, 3, 2, 2, 0, 2, 1, 3, 0, 3, 2, 0]);
        assert_eq!(st.point("E").unwrap().coord, Point2D::new(14.0, 10.0));
        assert_eq!(st.point("B").unwrap().coord, Point2D::new(-5.0, 10.0));
        assert_eq!(st.segments.len(), 11);
        assert_eq!(st.total_points(), 8);
        assert!(st.known.iter().all(KnownPoint::is_complete));
    }

    #[test]
    fn fig2_sequential_names() {
        let st = explore_map(&examples::fig2(), &MapConfig::ideal()).unwrap();
        assert_eq!(st.points[..4], ["0", "1", "2", "3"]);
        assert_eq!(st.landmarks["2"], "E");
    }

    #[test]
    fn corridor_single_traversal() {
        let st = explore_map(&examples::corridor(), &maze_ids(OdometrySource::Ideal)).unwrap();
        assert_eq!(st.points, ["S", "F"]);
        assert_eq!(st.trace.iter().map(|r| r.type_).collect::<Vec<_>>(), [0, 0]);
        assert_eq!(st.segments.len(), 1);
    }

    #[test]
    fn plus_maze_hub() {
        let st = explore_map(&examples::plus(), &maze_ids(OdometrySource::Ideal)).unwrap();
        let hub = st.point("H").unwrap();
        assert_eq!((hub.type_, hub.explored), (3, 3));
        assert_eq!(hub.neighbors.len(), 4);
        assert_eq!(st.point("W").unwrap().coord, Point2D::new(-10.0, 10.0));
        assert_eq!(st.total_points(), 5);
    }

    #[test]
    fn noisy_modes_map_fig2() {
        for source in [
            OdometrySource::RawEncoder,
            OdometrySource::CorrectedBasic,
            OdometrySource::CorrectedArc,
        ] {
            let st = explore_map(&examples::fig2(), &maze_ids(source)).unwrap();
            assert_eq!(st.points.len(), 12, "{source}");
            let e = st.point("E").unwrap().coord;
            assert!(e.chebyshev(&Point2D::new(14.0, 10.0)) < 1.0, "{source}: {e}");
        }
    }

    #[test]
    fn matching() {
        let mut st = ExplorationState::new("S".into(), 0);
        assert_eq!(match_point(Point2D::new(0.0, 0.0), &st, 0.5).unwrap(), Some("S".into()));
        for (name, x) in [("A", 0.0), ("E", 14.0)] {
            st.index.insert(name.into(), st.known.len());
            st.known.push(KnownPoint {
                name: name.into(),
                coord: Point2D::new(x, 10.0),
                type_: 1,
                explored: 1,
                neighbors: BTreeSet::new(),
            });
        }
        assert_eq!(
            match_point(Point2D::new(14.1, 10.05), &st, 0.5).unwrap(),
            Some("E".into())
        );
        assert_eq!(match_point(Point2D::new(7.0, 3.0), &st, 0.5).unwrap(), None);
        assert!(matches!(
            match_point(Point2D::new(7.0, 10.0), &st, 8.0),
            Err(MapError::Ambiguous { .. })
        ));
        assert!(matches!(
            match_point(Point2D::new(7.0, 10.0), &st, 0.0),
            Err(MapError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn nearest_target_ties_to_smallest_name() {
        // reopen two symmetric arms and ask from the hub
        let m = parse_maze(
            "node H 0 0\nnode P 10 0\nnode Q -10 0\nnode R 0 10\nedge H P\nedge H Q\nedge H R\nstart R\nend P\n",
        )
        .unwrap();
        let mut st = explore_map(&m, &maze_ids(OdometrySource::Ideal)).unwrap();
        assert_eq!(next_target(&st), None);
        for name in ["P", "Q"] {
            let i = st.index[name];
            st.known[i].type_ = 1;
        }
        st.points.push("H".into());
        assert_eq!(next_target(&st), Some("P".into()));
    }

    #[test]
    fn drift_beyond_tolerance_fails() {
        let cfg = MapConfig {
            tolerance: Tolerance::Fixed(0.001),
            ..maze_ids(OdometrySource::RawEncoder)
        };
        let err = explore_map(&examples::fig2(), &cfg).unwrap_err();
        assert!(matches!(err, MapError::MappingFailure { .. }), "{err}");
    }

    #[test]
    fn oversized_tolerance_confuses_points() {
        // D lies 3 cm north of E
        let cfg = MapConfig {
            tolerance: Tolerance::Fixed(4.0),
            ..maze_ids(OdometrySource::Ideal)
        };
        let err = explore_map(&examples::fig2(), &cfg).unwrap_err();
        assert!(
            matches!(&err, MapError::MappingFailure { point, .. } if point == "E"),
            "{err}"
        );
    }

    #[test]
    fn odometry_source_parsing() {
        assert_eq!("arc".parse::<OdometrySource>().unwrap(), OdometrySource::CorrectedArc);
        assert!("gps".parse::<OdometrySource>().is_err());
        assert_eq!(OdometrySource::RawEncoder.to_string(), "raw");
    }
}
