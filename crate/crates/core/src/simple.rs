//! Preference-sequence exploration for loop-free (or short-loop) mazes.
//!
//! The robot follows a fixed preference over relative directions at every
//! junction and accumulates, per junction on its current path from the
//! start, the sum of the direction codes it chose there. Codes are relative
//! to the heading at each visit, so the sum wrapped into 1..=4 is the turn
//! to take on the first arrival. Entries left behind by fully explored
//! branches are multiples of four and wrap away.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::maze::{Heading, MazeError, MazeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelativeDirection {
    Right = 1,
    Front = 2,
    Left = 3,
    Back = 4,
}

impl RelativeDirection {
    pub const ALL: [RelativeDirection; 4] = [Self::Right, Self::Front, Self::Left, Self::Back];

    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Self::Right),
            2 => Some(Self::Front),
            3 => Some(Self::Left),
            4 => Some(Self::Back),
            _ => None,
        }
    }

    /// Absolute heading after taking this direction from `heading`.
    pub fn apply(self, heading: Heading) -> Heading {
        heading.rotate_ccw(self.code() as i32 - 2)
    }

    /// Relative code of absolute direction `to` for a robot facing `heading`.
    pub fn between(heading: Heading, to: Heading) -> Self {
        let diff = (to.code() as i32 - heading.code() as i32 + 1).rem_euclid(4) as u32;
        Self::from_code(diff + 1).expect("code in range")
    }

    fn letter(self) -> char {
        match self {
            Self::Right => 'R',
            Self::Front => 'F',
            Self::Left => 'L',
            Self::Back => 'D',
        }
    }
}

impl fmt::Display for RelativeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Right => "right",
            Self::Front => "front",
            Self::Left => "left",
            Self::Back => "back",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreferenceSeq([RelativeDirection; 4]);

impl PreferenceSeq {
    /// Left-Front-Right-Down.
    pub const LFRD: PreferenceSeq = PreferenceSeq([
        RelativeDirection::Left,
        RelativeDirection::Front,
        RelativeDirection::Right,
        RelativeDirection::Back,
    ]);
    /// Right-Front-Left-Down.
    pub const RFLD: PreferenceSeq = PreferenceSeq([
        RelativeDirection::Right,
        RelativeDirection::Front,
        RelativeDirection::Left,
        RelativeDirection::Back,
    ]);

    pub fn new(order: [RelativeDirection; 4]) -> Result<Self, SimpleError> {
        for d in RelativeDirection::ALL {
            if !order.contains(&d) {
                return Err(SimpleError::BadPreference(format!("{d} missing")));
            }
        }
        Ok(PreferenceSeq(order))
    }

    pub fn order(&self) -> &[RelativeDirection; 4] {
        &self.0
    }
}

impl FromStr for PreferenceSeq {
    type Err = SimpleError;

    /// Four letters from R, F, L and D (or B), e.g. `RFLD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dirs: Vec<RelativeDirection> = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'R' => Ok(RelativeDirection::Right),
                'F' | 'U' => Ok(RelativeDirection::Front),
                'L' => Ok(RelativeDirection::Left),
                'D' | 'B' => Ok(RelativeDirection::Back),
                other => Err(SimpleError::BadPreference(format!(
                    "unknown direction letter `{other}`"
                ))),
            })
            .collect::<Result<_, _>>()?;
        let order: [RelativeDirection; 4] = dirs
            .try_into()
            .map_err(|_| SimpleError::BadPreference(format!("`{s}` must have four letters")))?;
        PreferenceSeq::new(order)
    }
}

impl fmt::Display for PreferenceSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|d| write!(f, "{}", d.letter()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JunctionTape {
    /// Number of junctions on the current path from the start (1-based index
    /// of the present junction, 0 when none).
    pub current_junction: usize,
    pub sums: Vec<u32>,
    /// The first entry belongs to the start point. The robot starts facing
    /// north there, so `back` is a legitimate first move.
    pub start_junction: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimpleError {
    #[error(transparent)]
    Maze(#[from] MazeError),
    #[error("bad preference sequence: {0}")]
    BadPreference(String),
    #[error("no end reached within {budget} traversals: maze outside the loop-free/short-loop class")]
    OutsideClass { budget: usize },
    #[error("junction {index} reduces to `back`: its whole subtree was dead")]
    DeadJunction { index: usize },
    #[error("replay inconsistent with maze: {0}")]
    Inconsistent(String),
}

/// The robot's walk: every node it stood on, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleRun {
    pub tape: JunctionTape,
    pub walk: Vec<String>,
}

struct Frame {
    node: String,
    /// Heading on first arrival; tape codes are relative to it.
    first_heading: Heading,
    /// Direction back towards the start, if any.
    parent: Option<Heading>,
    last_exit: Heading,
}

fn is_junction(maze: &MazeSpec, node: &str) -> Result<bool, MazeError> {
    let degree = maze.node_degree(node)?;
    Ok(degree >= 3 || (node == maze.start() && degree == 2))
}

fn initial_heading(maze: &MazeSpec) -> Result<Heading, MazeError> {
    let exits = maze.exits(maze.start())?;
    Ok(if exits.len() == 1 { exits[0] } else { Heading::North })
}

/// Direction to leave a non-junction node: the only way on, or back.
fn follow_line(maze: &MazeSpec, node: &str, heading: Heading) -> Result<Heading, MazeError> {
    let exits = maze.exits(node)?;
    Ok(match exits.as_slice() {
        [only] => *only,
        _ => *exits
            .iter()
            .find(|&&d| d != heading.reverse())
            .expect("turn has two exits"),
    })
}

pub fn explore_simple(maze: &MazeSpec, pref: &PreferenceSeq) -> Result<JunctionTape, SimpleError> {
    explore_simple_run(maze, pref).map(|run| run.tape)
}

pub fn explore_simple_run(maze: &MazeSpec, pref: &PreferenceSeq) -> Result<SimpleRun, SimpleError> {
    let budget = 10 * maze.edges().len().max(1);
    let mut node = maze.start().to_string();
    let mut heading = initial_heading(maze)?;
    let mut stack: Vec<Frame> = Vec::new();
    let mut sums: Vec<u32> = Vec::new();
    let mut walk = vec![node.clone()];
    let mut first_step = true;

    while node != maze.end() {
        let exit = if is_junction(maze, &node)? {
            let arrived_from = heading.reverse();
            let mut correction = 0;
            let depth = match stack.iter().rposition(|f| f.node == node) {
                Some(pos) => {
                    if stack.len() > pos + 1 {
                        // closed a loop: junctions beyond this one are no longer on the path
                        stack.truncate(pos + 1);
                        sums[pos + 1..].iter_mut().for_each(|s| *s = 0);
                    }
                    let frame = &stack[pos];
                    if arrived_from != frame.last_exit {
                        let came = RelativeDirection::between(frame.first_heading, arrived_from).code();
                        let left = RelativeDirection::between(frame.first_heading, frame.last_exit).code();
                        correction = (came + 4 - left) % 4;
                    }
                    pos + 1
                }
                None => {
                    stack.push(Frame {
                        node: node.clone(),
                        first_heading: heading,
                        parent: (!first_step).then_some(arrived_from),
                        last_exit: heading,
                    });
                    if sums.len() < stack.len() {
                        sums.push(0);
                    }
                    stack.len()
                }
            };
            let exits = maze.exits(&node)?;
            let choice = pref
                .order()
                .iter()
                .copied()
                .find(|d| exits.contains(&d.apply(heading)))
                .expect("junction has exits");
            sums[depth - 1] += correction + choice.code();
            let exit = choice.apply(heading);
            let frame = stack.last_mut().expect("frame pushed");
            frame.last_exit = exit;
            if frame.parent == Some(exit) {
                stack.pop();
            }
            exit
        } else if first_step {
            initial_heading(maze)?
        } else {
            follow_line(maze, &node, heading)?
        };

        first_step = false;
        node = maze.exit(&node, exit)?.expect("chosen exit exists").to_string();
        heading = exit;
        walk.push(node.clone());
        if walk.len() > budget + 1 {
            return Err(SimpleError::OutsideClass { budget });
        }
    }

    sums.truncate(stack.len());
    let start_junction = is_junction(maze, maze.start())?;
    Ok(SimpleRun {
        tape: JunctionTape {
            current_junction: stack.len(),
            sums,
            start_junction,
        },
        walk,
    })
}

/// Wraps every junction sum into 1..=4.
pub fn reduce_tape(tape: &JunctionTape) -> Result<Vec<RelativeDirection>, SimpleError> {
    tape.sums
        .iter()
        .enumerate()
        .map(|(i, &sum)| match (sum + 3) % 4 + 1 {
            4 if !(i == 0 && tape.start_junction) => Err(SimpleError::DeadJunction { index: i + 1 }),
            code => Ok(RelativeDirection::from_code(code).expect("wrapped code")),
        })
        .collect()
}

/// Drives from start to end taking `reduced[i]` at the i-th junction.
pub fn replay(maze: &MazeSpec, reduced: &[RelativeDirection]) -> Result<Vec<String>, SimpleError> {
    let mut node = maze.start().to_string();
    let mut heading = initial_heading(maze)?;
    let mut path = vec![node.clone()];
    let mut next = reduced.iter();
    let mut first_step = true;
    while node != maze.end() {
        let exit = if is_junction(maze, &node)? {
            let dir = next
                .next()
                .ok_or_else(|| SimpleError::Inconsistent(format!("tape exhausted at junction `{node}`")))?;
            let exit = dir.apply(heading);
            if !maze.exits(&node)?.contains(&exit) {
                return Err(SimpleError::Inconsistent(format!("no {dir} exit at junction `{node}`")));
            }
            exit
        } else if first_step {
            initial_heading(maze)?
        } else if maze.node_degree(&node)? == 1 {
            return Err(SimpleError::Inconsistent(format!("replay ran into dead end `{node}`")));
        } else {
            follow_line(maze, &node, heading)?
        };
        first_step = false;
        node = maze.exit(&node, exit)?.expect("exit exists").to_string();
        heading = exit;
        path.push(node.clone());
        if path.len() > maze.nodes().len() {
            return Err(SimpleError::Inconsistent("replay revisits a node".into()));
        }
    }
    if next.next().is_some() {
        return Err(SimpleError::Inconsistent(
            "tape has entries beyond the last junction".into(),
        ));
    }
    Ok(path)
}
