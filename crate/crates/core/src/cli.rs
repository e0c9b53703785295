//! Command-line front end: `solve`, `tableone` and `plot`.
//!
//! Commands build their whole standard output as a string so the binary
//! stays a thin shell and output is byte-identical for identical flags.
//! Timing goes to standard error.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::examples;
use crate::graph::{build_graph, dijkstra, GraphError, MazeGraph};
use crate::mapping::{explore_map, segment_seed, MapConfig, MapError, OdometrySource, PointNaming, Tolerance};
use crate::maze::{parse_maze, Heading, MazeError, MazeSpec, Point2D};
use crate::motion::{simulate_segment, EncoderLog, MotionError, MotionParams};
use crate::odometry::{both_wheels, linearize_arc, linearize_basic, CalibConstants, OdometryError};
use crate::simple::{explore_simple_run, reduce_tape, replay, PreferenceSeq, RelativeDirection, SimpleError};
use crate::svg::Drawing;

#[derive(Debug, Parser)]
#[command(name = "mazebot", version, about = "Line-maze robot simulator and solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore a maze and print the shortest start-to-end path.
    Solve(SolveArgs),
    /// Encoder versus corrected distance over many seeded runs.
    Tableone(TableArgs),
    /// Write an SVG of the maze and the robot's trajectory.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Simple,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Maze file, or the name of a bundled maze (fig1, fig2, corridor, plus).
    #[arg(long)]
    pub maze: String,
    #[arg(long, value_enum, default_value_t = Algo::Map)]
    pub algo: Algo,
    /// ideal | raw | basic | arc
    #[arg(long, default_value = "arc")]
    pub odometry: OdometrySource,
    #[arg(long, env = "MAZEBOT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Point-matching tolerance in cm (default: 3% of the longest segment, at least 1).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Preference sequence of the simple explorer.
    #[arg(long, default_value = "RFLD")]
    pub pref: PreferenceSeq,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Print the junction tape (simple explorer).
    #[arg(long)]
    pub show_tape: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the discovered graph export here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, num_args = 1.., default_values_t = vec![10.0, 14.0, 8.0])]
    pub lengths: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, env = "MAZEBOT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "arc")]
    pub odometry: OdometrySource,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub maze: Option<String>,
    #[arg(long, value_enum, default_value_t = Algo::Map)]
    pub algo: Algo,
    #[arg(long, default_value = "arc")]
    pub odometry: OdometrySource,
    #[arg(long, env = "MAZEBOT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "RFLD")]
    pub pref: PreferenceSeq,
    /// Plot a single straight segment of this length instead of a maze run.
    #[arg(long, conflicts_with = "maze")]
    pub segment: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Maze(#[from] MazeError),
    #[error("exploration failed: {0}")]
    Exploration(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Maze(_) => 1,
            CliError::Exploration(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::Maze(e) => CliError::Maze(e),
            MapError::InvalidTolerance(_) | MapError::Motion(MotionError::InvalidParams(_)) => {
                CliError::Usage(e.to_string())
            }
            MapError::Graph(_) => CliError::Internal(e.to_string()),
            _ => CliError::Exploration(e.to_string()),
        }
    }
}

impl From<SimpleError> for CliError {
    fn from(e: SimpleError) -> Self {
        match e {
            SimpleError::Maze(e) => CliError::Maze(e),
            SimpleError::BadPreference(_) => CliError::Usage(e.to_string()),
            SimpleError::Inconsistent(_) => CliError::Internal(e.to_string()),
            _ => CliError::Exploration(e.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<MotionError> for CliError {
    fn from(e: MotionError) -> Self {
        match e {
            MotionError::InvalidParams(_) | MotionError::NonPositiveLength(_) => CliError::Usage(e.to_string()),
            _ => CliError::Exploration(e.to_string()),
        }
    }
}

impl From<OdometryError> for CliError {
    fn from(e: OdometryError) -> Self {
        CliError::Exploration(e.to_string())
    }
}

pub struct Output {
    pub stdout: String,
    pub duration: Duration,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    let started = Instant::now();
    let stdout = match cli.command {
        Command::Solve(a) => cmd_solve(&a)?,
        Command::Tableone(a) => cmd_tableone(&a)?,
        Command::Plot(a) => cmd_plot(&a)?,
    };
    Ok(Output {
        stdout,
        duration: started.elapsed(),
    })
}

/// Reads a maze file, falling back to the bundled mazes by name.
pub fn load_maze(spec: &str) -> Result<(String, MazeSpec), CliError> {
    let path = Path::new(spec);
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => match path.file_name().and_then(|n| n.to_str()).and_then(examples::bundled) {
            Some(text) if !path.exists() => text.to_string(),
            _ => return Err(CliError::Io(format!("cannot read maze `{spec}`: {err}"))),
        },
    };
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_string();
    Ok((id, parse_maze(&text)?))
}

fn tolerance(tol: Option<f64>) -> Result<Tolerance, CliError> {
    match tol {
        None => Ok(Tolerance::Auto),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Tolerance::Fixed(t)),
        Some(t) => Err(CliError::Usage(format!("--tol must be positive, got {t}"))),
    }
}

fn motion_for(source: OdometrySource, seed: u64) -> MotionParams {
    match source {
        OdometrySource::Ideal => MotionParams {
            seed,
            ..MotionParams::noiseless()
        },
        _ => MotionParams::default().with_seed(seed),
    }
}

fn calibration() -> Result<CalibConstants, CliError> {
    CalibConstants::from_motion(&MotionParams::default()).map_err(|e| CliError::Internal(e.to_string()))
}

/// Distance the selected odometry reports for one simulated segment.
fn reading(log: &EncoderLog, source: OdometrySource, cal: &CalibConstants) -> Result<f64, CliError> {
    Ok(match source {
        OdometrySource::Ideal => log.true_length,
        OdometrySource::RawEncoder => log.raw_distance(),
        OdometrySource::CorrectedBasic => both_wheels(log, cal, linearize_basic)?,
        OdometrySource::CorrectedArc => both_wheels(log, cal, linearize_arc)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRow {
    pub from: String,
    pub to: String,
    pub true_length: f64,
    pub raw: f64,
    pub corrected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub maze: String,
    pub algorithm: Algo,
    pub odometry: OdometrySource,
    pub nodes: usize,
    pub path: Vec<String>,
    pub length: f64,
    pub tape: Option<(Vec<u32>, Vec<RelativeDirection>)>,
    pub segments: Vec<SegmentRow>,
}

/// Segments driven by a run, with their encoder logs, in maze ids.
struct Driven {
    from: String,
    to: String,
    heading: Heading,
    log: EncoderLog,
}

struct Run {
    report: RunReport,
    driven: Vec<Driven>,
    graph: MazeGraph,
}

fn segment_row(d: &Driven, source: OdometrySource, cal: &CalibConstants) -> Result<SegmentRow, CliError> {
    let corrected_with = if source == OdometrySource::CorrectedBasic {
        OdometrySource::CorrectedBasic
    } else {
        OdometrySource::CorrectedArc
    };
    let corrected = if source == OdometrySource::Ideal {
        d.log.true_length
    } else {
        reading(&d.log, corrected_with, cal)?
    };
    Ok(SegmentRow {
        from: d.from.clone(),
        to: d.to.clone(),
        true_length: d.log.true_length,
        raw: d.log.raw_distance(),
        corrected,
    })
}

fn run_map(id: String, maze: &MazeSpec, a: &RunArgs) -> Result<Run, CliError> {
    let cal = calibration()?;
    let cfg = MapConfig {
        params: motion_for(a.odometry, a.seed),
        cal: cal.clone(),
        source: a.odometry,
        tolerance: tolerance(a.tol)?,
        naming: PointNaming::MazeIds,
        keep_logs: true,
        ..MapConfig::new(a.odometry)
    };
    let state = explore_map(maze, &cfg)?;
    let graph = build_graph(&state)?;
    let end = state
        .landmarks
        .iter()
        .find(|(_, node)| node.as_str() == maze.end())
        .map(|(name, _)| name.clone())
        .ok_or_else(|| CliError::Exploration(format!("end `{}` never reached", maze.end())))?;
    let start = state.points[0].clone();
    let path = dijkstra(&graph, &start, &end)?;
    let driven: Vec<Driven> = state
        .segments
        .into_iter()
        .map(|s| Driven {
            from: state.landmarks[&s.from].clone(),
            to: state.landmarks[&s.to].clone(),
            heading: s.heading,
            log: s.log.expect("logs kept"),
        })
        .collect();
    let segments = driven
        .iter()
        .map(|d| segment_row(d, a.odometry, &cal))
        .collect::<Result<_, _>>()?;
    Ok(Run {
        report: RunReport {
            maze: id,
            algorithm: Algo::Map,
            odometry: a.odometry,
            nodes: state.known.len(),
            path: path.nodes,
            length: path.length,
            tape: None,
            segments,
        },
        driven,
        graph,
    })
}

fn run_simple(id: String, maze: &MazeSpec, a: &RunArgs) -> Result<Run, CliError> {
    let cal = calibration()?;
    let run = explore_simple_run(maze, &a.pref)?;
    let reduced = reduce_tape(&run.tape)?;
    let path = replay(maze, &reduced)?;
    let length = path
        .windows(2)
        .map(|p| maze.edge_length(&p[0], &p[1]))
        .sum::<Result<f64, _>>()?;

    let mut driven = Vec::new();
    let mut graph = MazeGraph::new();
    for (i, pair) in run.walk.windows(2).enumerate() {
        let (pa, pb) = (maze.position(&pair[0])?, maze.position(&pair[1])?);
        let heading = Heading::between(&pa, &pb)
            .ok_or_else(|| CliError::Internal(format!("`{}`-`{}` not axis-aligned", pair[0], pair[1])))?;
        let params = motion_for(a.odometry, segment_seed(a.seed, i));
        let log = simulate_segment(pa.distance(&pb), &params)?;
        graph.add_vertex(&pair[0], pa);
        graph.add_vertex(&pair[1], pb);
        graph.add_edge(&pair[0], &pair[1])?;
        driven.push(Driven {
            from: pair[0].clone(),
            to: pair[1].clone(),
            heading,
            log,
        });
    }
    let segments = driven
        .iter()
        .map(|d| segment_row(d, a.odometry, &cal))
        .collect::<Result<_, _>>()?;
    let nodes = run.walk.iter().collect::<BTreeSet<_>>().len();
    Ok(Run {
        report: RunReport {
            maze: id,
            algorithm: Algo::Simple,
            odometry: a.odometry,
            nodes,
            path,
            length,
            tape: Some((run.tape.sums, reduced)),
            segments,
        },
        driven,
        graph,
    })
}

fn execute(a: &RunArgs) -> Result<(MazeSpec, Run), CliError> {
    let (id, maze) = load_maze(&a.maze)?;
    let run = match a.algo {
        Algo::Map => run_map(id, &maze, a)?,
        Algo::Simple => run_simple(id, &maze, a)?,
    };
    Ok((maze, run))
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

impl RunReport {
    fn algo_name(&self) -> &'static str {
        match self.algorithm {
            Algo::Simple => "simple",
            Algo::Map => "map",
        }
    }

    fn tape_text(&self) -> Option<(String, String)> {
        self.tape.as_ref().map(|(sums, reduced)| {
            let names: Vec<String> = reduced.iter().map(ToString::to_string).collect();
            (join(sums), join(&names))
        })
    }

    pub fn render_text(&self, show_tape: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "maze       {}", self.maze);
        let _ = writeln!(out, "algorithm  {}", self.algo_name());
        let _ = writeln!(out, "odometry   {}", self.odometry);
        let _ = writeln!(out, "nodes      {}", self.nodes);
        let _ = writeln!(out, "path       {}", join(&self.path));
        let _ = writeln!(out, "length     {:.2} cm", self.length);
        if show_tape {
            if let Some((sums, turns)) = self.tape_text() {
                let or_empty = |s: String| if s.is_empty() { "(empty)".to_string() } else { s };
                let _ = writeln!(out, "tape       {}", or_empty(sums));
                let _ = writeln!(out, "turns      {}", or_empty(turns));
            }
        }
        let _ = writeln!(
            out,
            "\n{:>4}  {:<8} {:<8} {:>9} {:>9} {:>9}",
            "#", "from", "to", "true", "raw", "corrected"
        );
        for (i, s) in self.segments.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>4}  {:<8} {:<8} {:>9.2} {:>9.2} {:>9.2}",
                i + 1,
                s.from,
                s.to,
                s.true_length,
                s.raw,
                s.corrected
            );
        }
        out
    }

    pub fn render_tsv(&self, show_tape: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "maze\t{}", self.maze);
        let _ = writeln!(out, "algorithm\t{}", self.algo_name());
        let _ = writeln!(out, "odometry\t{}", self.odometry);
        let _ = writeln!(out, "nodes\t{}", self.nodes);
        let _ = writeln!(out, "path\t{}", join(&self.path));
        let _ = writeln!(out, "length\t{:.6}", self.length);
        if show_tape {
            if let Some((sums, turns)) = self.tape_text() {
                let _ = writeln!(out, "tape\t{sums}");
                let _ = writeln!(out, "turns\t{turns}");
            }
        }
        out.push_str("segment\tfrom\tto\ttrue\traw\tcorrected\n");
        for (i, s) in self.segments.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                i + 1,
                s.from,
                s.to,
                s.true_length,
                s.raw,
                s.corrected
            );
        }
        out
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write `{}`: {e}", path.display())))
}

pub fn cmd_solve(a: &SolveArgs) -> Result<String, CliError> {
    let (_, run) = execute(&a.run)?;
    if let Some(out) = &a.out {
        write_file(out, &run.graph.export())?;
    }
    Ok(match a.format {
        Format::Text => run.report.render_text(a.show_tape),
        Format::Tsv => run.report.render_tsv(a.show_tape),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub actual: f64,
    pub encoder: f64,
    pub formula: f64,
    pub encoder_err: f64,
    pub formula_err: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median encoder and corrected readings per length over `seeds` runs.
pub fn table_one(
    lengths: &[f64],
    first_seed: u64,
    seeds: u64,
    source: OdometrySource,
) -> Result<Vec<TableRow>, CliError> {
    if seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let cal = calibration()?;
    lengths
        .iter()
        .map(|&length| {
            if !(length > 0.0 && length.is_finite()) {
                return Err(CliError::Usage(format!("length must be positive, got {length}")));
            }
            let readings: Vec<(f64, f64)> = (first_seed..first_seed + seeds)
                .into_par_iter()
                .map(|seed| {
                    let log = simulate_segment(length, &motion_for(source, seed))?;
                    Ok((log.raw_distance(), reading(&log, source, &cal)?))
                })
                .collect::<Result<_, CliError>>()?;
            let err = |v: f64| (v - length).abs() / length * 100.0;
            let (mut enc, mut fml): (Vec<f64>, Vec<f64>) = readings.iter().copied().unzip();
            let (mut enc_err, mut fml_err): (Vec<f64>, Vec<f64>) =
                readings.iter().map(|&(e, f)| (err(e), err(f))).unzip();
            Ok(TableRow {
                actual: length,
                encoder: median(&mut enc),
                formula: median(&mut fml),
                encoder_err: median(&mut enc_err),
                formula_err: median(&mut fml_err),
            })
        })
        .collect()
}

pub fn cmd_tableone(a: &TableArgs) -> Result<String, CliError> {
    let rows = table_one(&a.lengths, a.seed, a.seeds, a.odometry)?;
    let mut out = String::new();
    match a.format {
        Format::Text => {
            let _ = writeln!(
                out,
                "{:>8} {:>9} {:>9} {:>13} {:>13}",
                "actual", "encoder", "formula", "encoder err%", "formula err%"
            );
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:>8.2} {:>9.2} {:>9.2} {:>13.3} {:>13.3}",
                    r.actual, r.encoder, r.formula, r.encoder_err, r.formula_err
                );
            }
        }
        Format::Tsv => {
            out.push_str("actual\tencoder\tformula\tencoder_err_pct\tformula_err_pct\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                    r.actual, r.encoder, r.formula, r.encoder_err, r.formula_err
                );
            }
        }
    }
    Ok(out)
}

pub fn cmd_plot(a: &PlotArgs) -> Result<String, CliError> {
    let drawing = match (a.segment, &a.maze) {
        (Some(length), _) => {
            let log = simulate_segment(length, &motion_for(a.odometry, a.seed))?;
            let origin = Point2D::new(0.0, 0.0);
            let mut d = Drawing {
                lines: vec![(origin, Point2D::new(0.0, length))],
                ..Drawing::default()
            };
            d.add_segment(origin, Heading::North, &log);
            d
        }
        (None, Some(maze)) => {
            let args = RunArgs {
                maze: maze.clone(),
                algo: a.algo,
                odometry: a.odometry,
                seed: a.seed,
                tol: a.tol,
                pref: a.pref,
            };
            let (maze, run) = execute(&args)?;
            let mut d = Drawing::from_maze(&maze);
            for s in &run.driven {
                d.add_segment(maze.position(&s.from)?, s.heading, &s.log);
            }
            d
        }
        (None, None) => return Err(CliError::Usage("plot needs --maze or --segment".into())),
    };
    write_file(&a.out, &drawing.render())?;
    Ok(format!("wrote {}\n", a.out.display()))
}
