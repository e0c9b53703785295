//! Maze-solving robot toolkit: maze model, differential-drive zigzag
//! simulation, encoder odometry correction, exploration algorithms and
//! shortest-path planning.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod examples;
pub mod generate;
pub mod graph;
pub mod mapping;
pub mod maze;
pub mod motion;
pub mod odometry;
pub mod simple;
pub mod svg;

pub use graph::{brute_force_shortest, build_graph, dijkstra, GraphError, MazeGraph, PathResult};
pub use mapping::{explore_map, ExplorationState, MapConfig, MapError, OdometrySource, PointNaming, Tolerance};
pub use maze::{parse_maze, serialize_maze, Heading, MazeEdge, MazeError, MazeNode, MazeSpec, Point2D};
pub use motion::{simulate_segment, EncoderLog, MotionError, MotionParams};
pub use odometry::{CalibConstants, OdometryError};
pub use simple::{explore_simple, reduce_tape, replay, JunctionTape, PreferenceSeq, RelativeDirection, SimpleError};
