//! The wired simulation loop: world, perceptual delays, double response,
//! camera controller, and boundary detector, advanced in lockstep.
//!
//! Per step, in order: (1) the controller computes the camera acceleration
//! from the response state that entered the step (a one-sample information
//! delay, negligible against the perceptual delay); (2) the actuation copy
//! goes through its delay line; (3) the pre-advance drive state goes through
//! the percept delay line, so the delayed pair `(x_tau, u_tau)` is aligned to
//! the same past step — pushing the post-advance state instead would pair
//! `x` and `u` one sample apart and break exact transversal decay; (4) the
//! world advances; (5) the adaptive response steps and serves `V`; (6) `V` is
//! normalized against the window history, the detector runs, and only then
//! does `V` enter the window; (7) the anticipating response steps with the
//! fresh estimate.
//!
//! Everything is single-threaded and allocation-stable: identical configs
//! produce bit-identical traces.

use crate::config::{Preset, SimConfig};
use crate::dynsys::{DelayLine, ParamVec, StateVec};
use crate::scenario::{pd_controller, scenario_step, ControllerGains, ScenarioState};
use crate::segment::{b_metric, detect, DetectorConfig, EventBoundary, WindowStats};
use crate::sync::{AdaptiveResponse, AnticipatingResponse};
use crate::{scenario, Result};

/// One row of the simulation trace.
///
/// States are the values entering the step (time `t`); `alpha` is the
/// estimate after the step's learning update; `theta_true` reflects the
/// segment under the ball after the step's world advance, so it flips on
/// the exact step a boundary is crossed.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    /// Drive image state `[vel1, vel2, pos1, pos2]`.
    pub x: StateVec,
    /// Delayed drive state served to the responses this step.
    pub x_tau: StateVec,
    /// Adaptive response state.
    pub y_star: StateVec,
    /// Anticipating response state.
    pub y: StateVec,
    /// Parameter estimate.
    pub alpha: ParamVec,
    /// True drive parameters.
    pub theta_true: ParamVec,
    /// Camera acceleration commanded this step.
    pub u: [f64; 2],
    /// Prediction error `0.5 e'e`.
    pub v: f64,
    /// Normalized prediction error against the window history.
    pub b_v: f64,
    pub event: bool,
}

/// Detected boundaries in time order.
#[derive(Clone, Debug, Default)]
pub struct EventLog {
    events: Vec<EventBoundary>,
}

impl EventLog {
    /// Append a boundary; times must be strictly increasing and spaced by at
    /// least the refractory period.
    pub fn push(&mut self, event: EventBoundary, refractory: f64) {
        if let Some(last) = self.events.last() {
            assert!(event.time > last.time);
            assert!(event.time - last.time >= refractory);
        }
        self.events.push(event);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EventBoundary> {
        self.events.iter()
    }

    pub fn as_slice(&self) -> &[EventBoundary] {
        &self.events
    }
}

/// A completed run: the full per-step trace and the detected boundaries.
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub trace: Vec<TraceRecord>,
    pub events: EventLog,
}

/// The assembled loop. Initial conditions may be overridden between
/// construction and the first step; the delay lines seed themselves from
/// whatever the signals are when stepping starts.
#[derive(Clone, Debug)]
pub struct Simulation {
    cfg: SimConfig,
    world: ScenarioState,
    adaptive: AdaptiveResponse,
    anticipating: AnticipatingResponse,
    gains: ControllerGains,
    detector: DetectorConfig,
    window: WindowStats,
    x_delay: Option<DelayLine>,
    u_delay: Option<DelayLine>,
    last_event: Option<f64>,
    step_idx: usize,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Simulation> {
        cfg.validate()?;
        let model = scenario::image_model();
        let world = ScenarioState::new(&cfg.segments, cfg.g);
        let adaptive = AdaptiveResponse::new(
            model.clone(),
            StateVec::zeros(4),
            ParamVec::zeros(2),
            cfg.gamma,
        );
        let anticipating = AnticipatingResponse::new(
            model,
            StateVec::zeros(4),
            cfg.feedback_gain,
            cfg.delay_samples(),
        );
        Ok(Simulation {
            gains: ControllerGains {
                kp: cfg.kp,
                kd: cfg.kd,
            },
            detector: DetectorConfig {
                b_event: cfg.b_event,
                refractory: cfg.refractory,
                sigma_floor: cfg.sigma_floor,
            },
            window: WindowStats::new(cfg.window_samples()),
            world,
            adaptive,
            anticipating,
            x_delay: None,
            u_delay: None,
            last_event: None,
            step_idx: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn delay_samples(&self) -> usize {
        self.cfg.delay_samples()
    }

    pub fn window_samples(&self) -> usize {
        self.window.capacity()
    }

    fn assert_unstarted(&self) {
        assert_eq!(
            self.step_idx, 0,
            "initial conditions must be set before the first step"
        );
    }

    pub fn set_initial_ball(&mut self, v: [f64; 2], v_dot: [f64; 2]) {
        self.assert_unstarted();
        self.world.reset_ball(v, v_dot);
    }

    pub fn set_initial_camera(&mut self, c: [f64; 2], c_dot: [f64; 2]) {
        self.assert_unstarted();
        self.world.reset_camera(c, c_dot);
    }

    pub fn set_initial_alpha(&mut self, alpha: ParamVec) {
        self.assert_unstarted();
        assert_eq!(alpha.dim(), 2);
        self.adaptive.alpha = alpha;
    }

    pub fn set_initial_adaptive_state(&mut self, y_star: StateVec) {
        self.assert_unstarted();
        assert_eq!(y_star.dim(), 4);
        self.adaptive.y_star = y_star;
    }

    pub fn set_initial_anticipating_state(&mut self, y: StateVec) {
        self.assert_unstarted();
        assert_eq!(y.dim(), 4);
        self.anticipating.y = y;
    }

    /// Advance one step; returns the trace row and any detected boundary.
    pub fn step(&mut self) -> Result<(TraceRecord, Option<EventBoundary>)> {
        let k = self.step_idx;
        let step = self.cfg.step;
        let t = k as f64 * step;

        // (1) Controller, fed by the state that entered this step.
        let fed = match self.cfg.preset {
            Preset::Full => &self.anticipating.y,
            Preset::NoAnticipation => &self.adaptive.y_star,
        };
        let u = pd_controller(fed, &self.adaptive.alpha, &self.gains);
        // Actuation as seen by the image-plane systems: the camera
        // acceleration enters the velocity rows with opposite sign.
        let u_act = StateVec::new(vec![-u[0], -u[1], 0.0, 0.0]);

        // (2) Delayed actuation copy.
        let u_tau = self
            .u_delay
            .get_or_insert_with(|| DelayLine::new(self.cfg.delay_samples(), u_act.clone()))
            .push(u_act.clone())
            .map_err(|e| e.at_step(k))?;

        // (3) Delayed percept, from the pre-advance drive state.
        let x_now = self.world.image_state();
        let x_tau = self
            .x_delay
            .get_or_insert_with(|| DelayLine::new(self.cfg.delay_samples(), x_now.clone()))
            .push(x_now.clone())
            .map_err(|e| e.at_step(k))?;

        // (4) World advance.
        let (theta, _) = scenario_step(&mut self.world, u, &self.cfg.segments, self.cfg.g, step)
            .map_err(|e| e.at_step(k))?;

        let y_star_row = self.adaptive.y_star.clone();
        let y_row = self.anticipating.y.clone();

        // (5) Adaptive response: prediction error, learning, integration.
        let pe = self
            .adaptive
            .step(&x_tau, &u_tau, step)
            .map_err(|e| e.at_step(k))?;

        // (6) Normalize against history, detect, then admit V to the window.
        let (mu, sigma, warm) = (
            self.window.mean(),
            self.window.sigma(),
            self.window.is_full(),
        );
        let b = b_metric(pe.v, mu, sigma, self.detector.sigma_floor);
        let hit = detect(b, t, pe.v, mu, sigma, warm, self.last_event, &self.detector);
        if let Some(ev) = &hit {
            self.last_event = Some(ev.time);
        }
        self.window.push(pe.v);

        // (7) Anticipating response with the fresh estimate.
        self.anticipating
            .step(&x_tau, &u_act, &self.adaptive.alpha, step)
            .map_err(|e| e.at_step(k))?;

        self.step_idx += 1;
        let row = TraceRecord {
            t,
            x: x_now,
            x_tau,
            y_star: y_star_row,
            y: y_row,
            alpha: self.adaptive.alpha.clone(),
            theta_true: theta,
            u,
            v: pe.v,
            b_v: b,
            event: hit.is_some(),
        };
        Ok((row, hit))
    }

    /// Run to the configured duration.
    pub fn run(mut self) -> Result<SimOutput> {
        let steps = self.cfg.step_count();
        let refractory = self.cfg.refractory;
        let mut trace = Vec::with_capacity(steps);
        let mut events = EventLog::default();
        for _ in 0..steps {
            let (row, hit) = self.step()?;
            if let Some(ev) = hit {
                events.push(ev, refractory);
            }
            trace.push(row);
        }
        Ok(SimOutput { trace, events })
    }
}

/// Build and run a simulation with default initial conditions.
pub fn run_simulation(cfg: SimConfig) -> Result<SimOutput> {
    Simulation::new(cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_cfg(duration: f64) -> SimConfig {
        SimConfig {
            duration,
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_duration_gives_empty_output() {
        let out = run_simulation(short_cfg(0.0)).unwrap();
        assert!(out.trace.is_empty());
        assert!(out.events.is_empty());
    }

    #[test]
    fn trace_has_one_row_per_step_with_constant_stride() {
        let out = run_simulation(short_cfg(0.5)).unwrap();
        assert_eq!(out.trace.len(), 50);
        for (k, row) in out.trace.iter().enumerate() {
            assert!((row.t - k as f64 * 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn startup_is_quiescent_until_the_delayed_percept_moves() {
        // x_tau stays at the initial origin state for d+1 steps, so the
        // error, the estimate, and V all sit at exactly zero.
        let out = run_simulation(short_cfg(2.0)).unwrap();
        let d = SimConfig::default().delay_samples();
        for row in &out.trace[..=d] {
            assert_eq!(row.v, 0.0);
            assert_eq!(row.alpha[0], 0.0);
            assert_eq!(row.alpha[1], 0.0);
        }
        assert!(out.trace[d + 1].v > 0.0);
        // The drive itself started rolling immediately.
        assert!(out.trace[1].x[0] < 0.0);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let a = run_simulation(short_cfg(3.0)).unwrap();
        let b = run_simulation(short_cfg(3.0)).unwrap();
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn presets_steer_different_trajectories() {
        let full = run_simulation(short_cfg(5.0)).unwrap();
        let na = run_simulation(SimConfig {
            preset: Preset::NoAnticipation,
            ..short_cfg(5.0)
        })
        .unwrap();
        assert!(full.trace != na.trace);
    }

    #[test]
    fn initial_condition_overrides_take_effect() {
        let mut sim = Simulation::new(short_cfg(0.1)).unwrap();
        sim.set_initial_ball([0.5, -0.4], [0.3, 0.2]);
        sim.set_initial_camera([0.1, 0.1], [0.0, 0.0]);
        let out = sim.run().unwrap();
        let first = &out.trace[0];
        assert!((first.x[2] - 0.4).abs() < 1e-15);
        assert!((first.x[3] + 0.5).abs() < 1e-15);
        assert_eq!(first.x[0], 0.3);
        assert_eq!(first.x[1], 0.2);
        // The delayed percept seeds from the overridden state too.
        assert_eq!(first.x_tau, first.x);
    }

    #[test]
    fn sample_count_mappings() {
        let sim = Simulation::new(SimConfig::default()).unwrap();
        assert_eq!(sim.delay_samples(), 65);
        assert_eq!(sim.window_samples(), 1000);
    }
}
