//! The experiment world: a ball rolling over piecewise inclined planes,
//! watched by a camera under orthographic projection.
//!
//! Per segment the ball is a plain double integrator with constant
//! acceleration `theta(beta) = [-g sin(b) cos(b), -g sin(b)^2]` in world
//! coordinates. The image state is `x = v - c` (positions) and
//! `v_dot - c_dot` (velocities), stacked as `[vel1, vel2, pos1, pos2]`. The
//! camera is a second double integrator driven by the controller output.

use crate::dynsys::{Matrix, ParamVec, StateVec, SystemModel};
use crate::error::Error;
use crate::Result;

/// One inclined plane: slope angle and extent along the horizontal axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSegment {
    /// Slope angle in radians.
    pub beta: f64,
    /// Horizontal extent in meters; the last segment may be infinite.
    pub length: f64,
}

impl RampSegment {
    pub fn new(beta: f64, length: f64) -> Self {
        assert!(length > 0.0);
        RampSegment { beta, length }
    }
}

/// PD-plus-feedforward camera gains.
#[derive(Clone, Copy, Debug)]
pub struct ControllerGains {
    pub kp: f64,
    pub kd: f64,
}

impl Default for ControllerGains {
    /// Critically damped double pole at -1: kd^2 = 4 kp.
    fn default() -> Self {
        ControllerGains { kp: 1.0, kd: 2.0 }
    }
}

/// World state of ball and camera.
#[derive(Clone, Debug)]
pub struct ScenarioState {
    /// Ball position (m).
    pub v: [f64; 2],
    /// Ball velocity (m/s).
    pub v_dot: [f64; 2],
    /// Camera position (m).
    pub c: [f64; 2],
    /// Camera velocity (m/s).
    pub c_dot: [f64; 2],
    /// Index of the segment currently under the ball.
    pub segment_idx: usize,
    /// Horizontal start position; segment progress is measured from here.
    start_v1: f64,
    /// Sign of the ball's travel along the horizontal axis.
    direction: f64,
}

impl ScenarioState {
    /// Ball and camera at the origin, at rest, on segment 0.
    pub fn new(segments: &[RampSegment], g: f64) -> Self {
        assert!(!segments.is_empty());
        ScenarioState {
            v: [0.0; 2],
            v_dot: [0.0; 2],
            c: [0.0; 2],
            c_dot: [0.0; 2],
            segment_idx: 0,
            start_v1: 0.0,
            direction: travel_direction(segments, g),
        }
    }

    /// Override the ball's initial condition; progress restarts here.
    pub fn reset_ball(&mut self, v: [f64; 2], v_dot: [f64; 2]) {
        self.v = v;
        self.v_dot = v_dot;
        self.start_v1 = v[0];
        self.segment_idx = 0;
    }

    pub fn reset_camera(&mut self, c: [f64; 2], c_dot: [f64; 2]) {
        self.c = c;
        self.c_dot = c_dot;
    }

    /// Image state `[vel1, vel2, pos1, pos2]` under orthographic projection.
    pub fn image_state(&self) -> StateVec {
        StateVec::new(vec![
            self.v_dot[0] - self.c_dot[0],
            self.v_dot[1] - self.c_dot[1],
            self.v[0] - self.c[0],
            self.v[1] - self.c[1],
        ])
    }
}

/// Sign of horizontal travel implied by the first segment's slope; a flat
/// first segment leaves the ball parked and the choice moot.
fn travel_direction(segments: &[RampSegment], g: f64) -> f64 {
    let theta1 = theta_for_slope(segments[0].beta, g)[0];
    if theta1 > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// True drive parameters for a slope: `[-g sin(b) cos(b), -g sin(b)^2]`.
pub fn theta_for_slope(beta: f64, g: f64) -> ParamVec {
    let (sb, cb) = beta.sin_cos();
    // The `+ 0.0` folds the negative zero of a flat slope into plain zero so
    // it does not leak into printed parameter traces.
    ParamVec::new(vec![-g * sb * cb + 0.0, -g * sb * sb + 0.0])
}

/// Segment containing the given horizontal progress; clamps past the end.
pub fn segment_index(v1: f64, segments: &[RampSegment], start: f64, direction: f64) -> usize {
    let progress = direction * (v1 - start);
    let mut acc = 0.0;
    for (i, seg) in segments.iter().enumerate() {
        acc += seg.length;
        if progress < acc {
            return i;
        }
    }
    segments.len() - 1
}

/// Image-plane drive derivative `[t1 - a1, t2 - a2, vel1, vel2]` for camera
/// acceleration `c_ddot = [a1, a2]`.
pub fn drive_deriv(x: &StateVec, theta: &ParamVec, c_ddot: [f64; 2]) -> StateVec {
    assert_eq!(x.dim(), 4);
    assert_eq!(theta.dim(), 2);
    StateVec::new(vec![theta[0] - c_ddot[0], theta[1] - c_ddot[1], x[0], x[1]])
}

/// Camera acceleration `kp * pos + kd * vel + alpha`, per image axis.
pub fn pd_controller(y: &StateVec, alpha: &ParamVec, gains: &ControllerGains) -> [f64; 2] {
    assert_eq!(y.dim(), 4);
    assert_eq!(alpha.dim(), 2);
    [
        gains.kp * y[2] + gains.kd * y[0] + alpha[0],
        gains.kp * y[3] + gains.kd * y[1] + alpha[1],
    ]
}

/// The parametric structure of the image-plane drive: drift carries
/// velocities into positions, the constant coupling feeds the parameters
/// into the velocity rows.
pub fn image_model() -> SystemModel {
    SystemModel::new(
        4,
        2,
        |x: &StateVec| StateVec::new(vec![0.0, 0.0, x[0], x[1]]),
        |_x: &StateVec| Matrix::from_rows(4, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
    )
}

/// Advance ball and camera one Euler step; returns the true parameters of
/// the (possibly new) segment and the image state.
///
/// The ball integrates with the segment it was on entering the step; the
/// crossing is registered afterwards from the new position, so the returned
/// theta flips on the same step the boundary is crossed. Velocities carry
/// over unchanged: a slope change is purely a parameter change.
pub fn scenario_step(
    st: &mut ScenarioState,
    c_ddot: [f64; 2],
    segments: &[RampSegment],
    g: f64,
    step: f64,
) -> Result<(ParamVec, StateVec)> {
    let theta = theta_for_slope(segments[st.segment_idx].beta, g);
    // Positions advance with the old velocities: plain explicit Euler on the
    // stacked state, identical to the image-plane discretization.
    let v = [st.v[0] + step * st.v_dot[0], st.v[1] + step * st.v_dot[1]];
    let v_dot = [st.v_dot[0] + step * theta[0], st.v_dot[1] + step * theta[1]];
    let c = [st.c[0] + step * st.c_dot[0], st.c[1] + step * st.c_dot[1]];
    let c_dot = [
        st.c_dot[0] + step * c_ddot[0],
        st.c_dot[1] + step * c_ddot[1],
    ];
    if !(v[0].is_finite() && v[1].is_finite() && v_dot[0].is_finite() && v_dot[1].is_finite()) {
        return Err(Error::NonFinite {
            signal: "ball state",
        });
    }
    if !(c[0].is_finite() && c[1].is_finite() && c_dot[0].is_finite() && c_dot[1].is_finite()) {
        return Err(Error::NonFinite {
            signal: "camera state",
        });
    }
    st.v = v;
    st.v_dot = v_dot;
    st.c = c;
    st.c_dot = c_dot;
    st.segment_idx = segment_index(st.v[0], segments, st.start_v1, st.direction);
    let theta_out = theta_for_slope(segments[st.segment_idx].beta, g);
    Ok((theta_out, st.image_state()))
}

/// Analytic times at which the ball, starting at rest, crosses each internal
/// segment boundary. Chains closed-form uniform-acceleration kinematics in
/// the progress frame; stops early if a segment is never crossed (infinite,
/// or the ball stalls or rolls back).
pub fn slope_change_times(segments: &[RampSegment], g: f64) -> Vec<f64> {
    let direction = travel_direction(segments, g);
    let mut times = Vec::new();
    let mut t = 0.0;
    let mut speed = 0.0f64;
    for seg in &segments[..segments.len().saturating_sub(1)] {
        if !seg.length.is_finite() {
            break;
        }
        let accel = direction * theta_for_slope(seg.beta, g)[0];
        let len = seg.length;
        let dt = if accel.abs() < 1e-300 {
            if speed <= 0.0 {
                break;
            }
            len / speed
        } else {
            let disc = speed * speed + 2.0 * accel * len;
            if disc < 0.0 {
                break;
            }
            let sq = disc.sqrt();
            if speed + sq <= 0.0 {
                break;
            }
            // Stable form of the positive quadratic root
            // (-speed + sqrt(disc)) / accel.
            2.0 * len / (speed + sq)
        };
        speed = (speed * speed + 2.0 * accel * len).max(0.0).sqrt();
        t += dt;
        times.push(t);
    }
    times
}
