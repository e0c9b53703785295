//! Forward model of a line follower driving one straight segment.
//!
//! The robot midpoint starts on the line with a small random misalignment
//! and moves on a circle whose radius follows from the motor speed ratio
//! (straight when the ratio is one). Whenever the lateral deviation reaches
//! `h` while still moving away from the line, the robot pivots in place to
//! `theta` on the other side of the line. The encoder totals it produces are
//! what the odometry corrections consume.
//!
//! Frame: `x` runs along the segment, `y` is the lateral offset (left
//! positive). Angles are radians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::maze::Point2D;

#[derive(Debug, Clone, PartialEq)]
pub struct MotionParams {
    /// Lateral deviation (cm) that triggers a corrective pivot.
    pub h: f64,
    /// Nominal initial misalignment with the line.
    pub alpha: f64,
    /// Heading relative to the line after a corrective pivot.
    pub theta: f64,
    /// Right over left motor speed.
    pub speed_ratio: f64,
    pub wheel_base: f64,
    /// Left wheel distance rolled during every pivot (F_LC).
    pub pivot_arc_left: f64,
    /// Along-track advance during a right pivot, as seen by the left wheel (F_LL).
    pub pivot_lin_left: f64,
    /// Right wheel distance rolled during every pivot (F_RC).
    pub pivot_arc_right: f64,
    /// Along-track advance during a left pivot, as seen by the right wheel (F_RL).
    pub pivot_lin_right: f64,
    /// Extra distance rolled by the inner wheel of a pivot (K).
    pub inner_rot_const: f64,
    /// Integration step (cm).
    pub step: f64,
    /// Relative magnitude jitter of the initial misalignment, in [0, 1).
    pub alpha_jitter: f64,
    pub seed: u64,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            h: 0.1,
            alpha: 8f64.to_radians(),
            theta: 10f64.to_radians(),
            speed_ratio: 1.02,
            wheel_base: 10.0,
            pivot_arc_left: 0.005,
            pivot_lin_left: 0.0,
            pivot_arc_right: 0.005,
            pivot_lin_right: 0.0,
            inner_rot_const: 0.002,
            step: 0.01,
            alpha_jitter: 0.2,
            seed: 0,
        }
    }
}

impl MotionParams {
    /// Perfect alignment, matched motors and free pivots: encoders read the
    /// true length.
    pub fn noiseless() -> Self {
        MotionParams {
            alpha: 0.0,
            speed_ratio: 1.0,
            pivot_arc_left: 0.0,
            pivot_arc_right: 0.0,
            inner_rot_const: 0.0,
            alpha_jitter: 0.0,
            ..MotionParams::default()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        MotionParams { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        let bad = |what: &str| Err(MotionError::InvalidParams(what.to_string()));
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.h > 0.0) {
            return bad("h must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha < half_pi) {
            return bad("alpha must lie in [0, pi/2)");
        }
        if !(self.theta > 0.0 && self.theta < half_pi) {
            return bad("theta must lie in (0, pi/2)");
        }
        if !(self.speed_ratio > 0.0 && self.speed_ratio.is_finite()) {
            return bad("speed ratio must be positive");
        }
        if !(self.wheel_base > 0.0) {
            return bad("wheel base must be positive");
        }
        if !(self.step > 0.0) {
            return bad("step must be positive");
        }
        let costs = [
            self.pivot_arc_left,
            self.pivot_lin_left,
            self.pivot_arc_right,
            self.pivot_lin_right,
            self.inner_rot_const,
        ];
        if costs.iter().any(|c| !(*c >= 0.0)) {
            return bad("pivot costs must be non-negative");
        }
        if !(0.0..1.0).contains(&self.alpha_jitter) {
            return bad("alpha jitter must lie in [0, 1)");
        }
        if self.alpha * (1.0 + self.alpha_jitter) >= half_pi {
            return bad("jittered alpha reaches pi/2");
        }
        Ok(())
    }

    /// Signed curvature of the midpoint path (counter-clockwise positive).
    pub fn curvature(&self) -> f64 {
        let r = self.speed_ratio;
        (r - 1.0) / (0.5 * self.wheel_base * (r + 1.0))
    }

    /// Left and right wheel distance per unit of midpoint distance.
    pub fn wheel_factors(&self) -> (f64, f64) {
        let half = 0.5 * self.wheel_base * self.curvature();
        (1.0 - half, 1.0 + half)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLog {
    pub wl_total: f64,
    pub wr_total: f64,
    pub n_right: u32,
    pub n_left: u32,
    pub true_length: f64,
    /// Distance travelled by the midpoint, pivots excluded.
    pub path_length: f64,
    /// Midpoint polyline in the segment frame.
    pub trajectory: Option<Vec<Point2D>>,
    /// Where each corrective pivot happened.
    pub pivots: Vec<Point2D>,
}

impl EncoderLog {
    pub fn turns(&self) -> u32 {
        self.n_right + self.n_left
    }

    /// Mean of the two wheel totals.
    pub fn raw_distance(&self) -> f64 {
        0.5 * (self.wl_total + self.wr_total)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MotionError {
    #[error("invalid motion parameters: {0}")]
    InvalidParams(String),
    #[error("segment length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("line following diverged after {steps} steps at {progress:.3} of {length} cm")]
    Divergence { steps: usize, progress: f64, length: f64 },
}

/// Right-motor/left-motor speed ratio to the radius of the circle traced by
/// the left wheel: `B / (ratio - 1)`. Infinite for equal speeds; negative when
/// the robot turns clockwise (ratio below one).
pub fn radius_from_ratio(speed_ratio: f64, wheel_base: f64) -> f64 {
    if speed_ratio == 1.0 {
        f64::INFINITY
    } else {
        wheel_base / (speed_ratio - 1.0)
    }
}

#[derive(Clone, Copy)]
struct Pose {
    x: f64,
    y: f64,
    heading: f64,
}

impl Pose {
    /// Exact motion along an arc of curvature `kappa`.
    fn advanced(&self, ds: f64, kappa: f64) -> Pose {
        if kappa == 0.0 {
            Pose {
                x: self.x + ds * self.heading.cos(),
                y: self.y + ds * self.heading.sin(),
                heading: self.heading,
            }
        } else {
            let end = self.heading + kappa * ds;
            Pose {
                x: self.x + (end.sin() - self.heading.sin()) / kappa,
                y: self.y + (self.heading.cos() - end.cos()) / kappa,
                heading: end,
            }
        }
    }

    fn point(&self) -> Point2D {
        Point2D::new(self.x, self.y)
    }
}

fn initial_heading(params: &MotionParams) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let jitter = if params.alpha_jitter > 0.0 {
        rng.gen_range(-params.alpha_jitter..=params.alpha_jitter)
    } else {
        0.0
    };
    sign * params.alpha * (1.0 + jitter)
}

/// Step length that brings the along-track coordinate from `pose.x` to
/// `target` (bisection; the caller guarantees a crossing within `max`).
fn step_to(pose: &Pose, target: f64, max: f64, kappa: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if pose.advanced(mid, kappa).x < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn simulate_segment(length: f64, params: &MotionParams) -> Result<EncoderLog, MotionError> {
    if !(length > 0.0) {
        return Err(MotionError::NonPositiveLength(length));
    }
    params.validate()?;

    let kappa = params.curvature();
    let (fl, fr) = params.wheel_factors();
    let mut pose = Pose {
        x: 0.0,
        y: 0.0,
        heading: initial_heading(params),
    };
    let mut log = EncoderLog {
        wl_total: 0.0,
        wr_total: 0.0,
        n_right: 0,
        n_left: 0,
        true_length: length,
        path_length: 0.0,
        trajectory: None,
        pivots: Vec::new(),
    };
    let mut trajectory = vec![pose.point()];
    let sample_every = if kappa == 0.0 {
        usize::MAX
    } else {
        (1.0 / params.step).ceil().max(1.0) as usize
    };
    let budget = 50 * (length / params.step).ceil() as usize + 10_000;

    let mut steps = 0usize;
    loop {
        if steps >= budget {
            return Err(MotionError::Divergence {
                steps,
                progress: pose.x,
                length,
            });
        }
        steps += 1;
        let mut ds = params.step;
        let mut next = pose.advanced(ds, kappa);
        let finished = next.x >= length;
        if finished {
            ds = step_to(&pose, length, ds, kappa);
            next = pose.advanced(ds, kappa);
            next.x = length;
        }
        log.path_length += ds;
        log.wl_total += fl * ds;
        log.wr_total += fr * ds;
        pose = next;
        if finished {
            break;
        }
        if steps.is_multiple_of(sample_every) {
            trajectory.push(pose.point());
        }

        let moving_away = pose.y * pose.heading.sin() > 0.0;
        if pose.y.abs() >= params.h && moving_away {
            // deviated left -> turn right, and vice versa
            let right = pose.y > 0.0;
            trajectory.push(pose.point());
            log.pivots.push(pose.point());
            if right {
                log.n_right += 1;
                log.wl_total += params.pivot_arc_left;
                log.wr_total += params.pivot_arc_right + params.inner_rot_const;
                pose.x += params.pivot_lin_left;
                pose.heading = -params.theta;
            } else {
                log.n_left += 1;
                log.wl_total += params.pivot_arc_left + params.inner_rot_const;
                log.wr_total += params.pivot_arc_right;
                pose.x += params.pivot_lin_right;
                pose.heading = params.theta;
            }
            if pose.x >= length {
                pose.x = length;
                break;
            }
        }
    }
    trajectory.push(pose.point());
    trajectory.dedup();
    log.trajectory = Some(trajectory);
    Ok(log)
}

/// Diagnostic run with line following disabled: the robot drives
/// `arc_length` of midpoint path on its free circle, starting along the line.
pub fn simulate_free_arc(arc_length: f64, params: &MotionParams) -> Result<EncoderLog, MotionError> {
    if !(arc_length > 0.0) {
        return Err(MotionError::NonPositiveLength(arc_length));
    }
    params.validate()?;
    let kappa = params.curvature();
    let (fl, fr) = params.wheel_factors();
    let start = Pose {
        x: 0.0,
        y: 0.0,
        heading: 0.0,
    };
    let end = start.advanced(arc_length, kappa);
    Ok(EncoderLog {
        wl_total: fl * arc_length,
        wr_total: fr * arc_length,
        n_right: 0,
        n_left: 0,
        true_length: end.point().distance(&start.point()),
        path_length: arc_length,
        trajectory: Some(vec![start.point(), end.point()]),
        pivots: Vec::new(),
    })
}
