//! Bundled example mazes.

use crate::maze::{parse_maze, MazeSpec};

pub const CORRIDOR: &str = include_str!("../mazes/corridor.maze");
pub const FIG1: &str = include_str!("../mazes/fig1.maze");
pub const FIG2: &str = include_str!("../mazes/fig2.maze");
pub const PLUS: &str = include_str!("../mazes/plus.maze");

/// Bundled maze text by file name (`fig2.maze`) or stem (`fig2`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".maze") {
        "corridor" => Some(CORRIDOR),
        "fig1" => Some(FIG1),
        "fig2" => Some(FIG2),
        "plus" => Some(PLUS),
        _ => None,
    }
}

fn load(text: &str) -> MazeSpec {
    parse_maze(text).expect("bundled maze is valid")
}

pub fn corridor() -> MazeSpec {
    load(CORRIDOR)
}

pub fn fig1() -> MazeSpec {
    load(FIG1)
}

pub fn fig2() -> MazeSpec {
    load(FIG2)
}

pub fn plus() -> MazeSpec {
    load(PLUS)
}
