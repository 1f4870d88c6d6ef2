//! The double-response system: an adaptive response that identifies the
//! drive's parameters online, and an anticipating response with delayed
//! self-feedback that locks onto the delayed percept one lag ahead.
//!
//! Both responses track the same delayed drive signal `x_tau`. The adaptive
//! response carries the parameter estimate `alpha` and exposes the scalar
//! prediction error `V = 0.5 * e'e` with `e = y_star - x_tau`; that stream is
//! what the boundary detector in [`crate::segment`] watches. The anticipating
//! response consumes `alpha` by value and produces the anticipated state fed
//! to the camera controller.

use crate::dynsys::{euler_step, eval_parametric, DelayLine, ParamVec, StateVec, SystemModel};
use crate::error::Error;
use crate::Result;

/// Abort threshold on response state norms. Forward Euler with bad gains can
/// blow up; failing loudly beats emitting garbage traces.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

/// Prediction error of the adaptive response at one step.
#[derive(Clone, Debug)]
pub struct PredictionError {
    /// `y_star - x_tau`, computed before the state update.
    pub e: StateVec,
    /// `0.5 * e'e`; zero exactly when `e` is zero.
    pub v: f64,
}

/// Synchronizing feedback `-e + f(x_tau) - f(y_star) + [F(x_tau) - F(y_star)] alpha`
/// with `e = y_star - x_tau`.
///
/// Added to the response derivative, it cancels the model mismatch between
/// response and delayed drive so the error dynamics reduce to
/// `e' = F(x_tau)(alpha - theta) - e`. On the synchronized state
/// `y_star = x_tau` it is exactly zero.
pub fn chen_controller(
    y_star: &StateVec,
    x_tau: &StateVec,
    alpha: &ParamVec,
    model: &SystemModel,
) -> Result<StateVec> {
    let e = y_star.sub(x_tau);
    let fx = model.drift(x_tau);
    let fy = model.drift(y_star);
    let df = model.coupling(x_tau).sub(&model.coupling(y_star));
    let out = e.neg().add(&fx).sub(&fy).add(&df.mul_vec(alpha));
    out.ensure_finite("synchronizing feedback")?;
    Ok(out)
}

/// Prediction-error magnitude `0.5 * e'e`.
pub fn lyapunov_v(e: &StateVec) -> f64 {
    0.5 * e.dot(e)
}

/// One gradient step of the parameter estimate:
/// `alpha - gamma * step * F(x_tau)' e`.
pub fn learning_update(
    alpha: &ParamVec,
    x_tau: &StateVec,
    e: &StateVec,
    model: &SystemModel,
    gamma: f64,
    step: f64,
) -> Result<ParamVec> {
    let grad = model.coupling(x_tau).tr_mul_vec(e);
    let next = alpha.add_scaled(&grad, -gamma * step);
    if !next.is_finite() {
        return Err(Error::NonFinite {
            signal: "parameter estimate",
        });
    }
    Ok(next)
}

/// Response that synchronizes with the delayed drive while estimating its
/// parameters.
#[derive(Clone, Debug)]
pub struct AdaptiveResponse {
    pub model: SystemModel,
    pub y_star: StateVec,
    pub alpha: ParamVec,
    /// Learning rate; zero freezes `alpha`.
    pub gamma: f64,
}

impl AdaptiveResponse {
    pub fn new(model: SystemModel, y_star: StateVec, alpha: ParamVec, gamma: f64) -> Self {
        assert_eq!(y_star.dim(), model.state_dim());
        assert_eq!(alpha.dim(), model.param_dim());
        AdaptiveResponse {
            model,
            y_star,
            alpha,
            gamma,
        }
    }

    /// Advance one step against the delayed pair `(x_tau, u_tau)`.
    ///
    /// The error and `V` come from the pre-update state; `y_star` integrates
    /// with the pre-update `alpha`, then `alpha` takes its gradient step.
    pub fn step(
        &mut self,
        x_tau: &StateVec,
        u_tau: &StateVec,
        step: f64,
    ) -> Result<PredictionError> {
        let e = self.y_star.sub(x_tau);
        let v = lyapunov_v(&e);
        let control = chen_controller(&self.y_star, x_tau, &self.alpha, &self.model)?;
        let deriv = eval_parametric(&self.model, &self.y_star, &self.alpha, u_tau)?.add(&control);
        self.alpha = learning_update(&self.alpha, x_tau, &e, &self.model, self.gamma, step)?;
        self.y_star = euler_step(&self.y_star, &deriv, step)?;
        let magnitude = self.y_star.norm();
        if magnitude > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                signal: "adaptive response state",
                magnitude,
                limit: DIVERGENCE_LIMIT,
            });
        }
        Ok(PredictionError { e, v })
    }
}

/// Response with delayed self-feedback that anticipates the delayed drive.
///
/// Its lock-on target is the manifold `y(t - tau) = x_tau(t)`, on which `y`
/// runs one delay ahead of the percept.
#[derive(Clone, Debug)]
pub struct AnticipatingResponse {
    pub model: SystemModel,
    pub y: StateVec,
    /// Feedback gain on the delayed coupling term.
    pub k: f64,
    delay_depth: usize,
    /// Seeded with the current `y` on the first step, so initial conditions
    /// may be overridden after construction.
    y_delay: Option<DelayLine>,
}

impl AnticipatingResponse {
    pub fn new(model: SystemModel, y: StateVec, k: f64, delay_depth: usize) -> Self {
        assert_eq!(y.dim(), model.state_dim());
        AnticipatingResponse {
            model,
            y,
            k,
            delay_depth,
            y_delay: None,
        }
    }

    pub fn delay_depth(&self) -> usize {
        self.delay_depth
    }

    /// Advance one step with the current actuation and the parameter estimate
    /// produced by the adaptive response this step.
    pub fn step(
        &mut self,
        x_tau: &StateVec,
        u: &StateVec,
        alpha: &ParamVec,
        step: f64,
    ) -> Result<()> {
        let y_delay = self
            .y_delay
            .get_or_insert_with(|| DelayLine::new(self.delay_depth, self.y.clone()));
        let y_tau = y_delay.push(self.y.clone())?;
        // Self-feedback k(x_tau - y_tau): pulls the delayed response onto the
        // delayed percept. The opposite sign makes the delayed loop unstable
        // for every positive gain.
        let feedback = x_tau.sub(&y_tau).scaled(self.k);
        let deriv = eval_parametric(&self.model, &self.y, alpha, u)?.add(&feedback);
        self.y = euler_step(&self.y, &deriv, step)?;
        let magnitude = self.y.norm();
        if magnitude > DIVERGENCE_LIMIT {
            return Err(Error::Divergence {
                signal: "anticipating response state",
                magnitude,
                limit: DIVERGENCE_LIMIT,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{image_model, theta_for_slope};

    fn sv(c: &[f64]) -> StateVec {
        StateVec::from_slice(c)
    }

    fn close(a: &StateVec, b: &StateVec, tol: f64) -> bool {
        a.sub(b).norm_inf() <= tol
    }

    #[test]
    fn controller_vanishes_on_synchronized_state() {
        let model = image_model();
        let states = [
            sv(&[0.0, 0.0, 0.0, 0.0]),
            sv(&[1.0, -2.0, 3.0, 4.0]),
            sv(&[0.3, 0.7, -0.1, 0.2]),
        ];
        let alpha = ParamVec::from_slice(&[-2.4525, -0.6571]);
        for s in &states {
            let u = chen_controller(s, s, &alpha, &model).unwrap();
            assert!(u.iter().all(|c| *c == 0.0));
        }
    }

    #[test]
    fn controller_hand_value() {
        let model = image_model();
        let x_tau = sv(&[1.0, 0.0, 2.0, 0.0]);
        let y_star = StateVec::zeros(4);
        // Constant coupling: the parameter term drops out entirely.
        for alpha in [ParamVec::zeros(2), ParamVec::from_slice(&[5.0, -7.0])] {
            let u = chen_controller(&y_star, &x_tau, &alpha, &model).unwrap();
            assert_eq!(u, sv(&[1.0, 0.0, 3.0, 0.0]));
        }
    }

    #[test]
    fn controller_linear_drift_simplification() {
        // With f linear and F constant, U = -e + f(x_tau - y_star).
        let model = image_model();
        let x_tau = sv(&[0.4, -1.1, 2.2, 0.9]);
        let y_star = sv(&[-0.6, 0.5, 1.0, -2.0]);
        let alpha = ParamVec::from_slice(&[1.5, -0.25]);
        let u = chen_controller(&y_star, &x_tau, &alpha, &model).unwrap();
        let e = y_star.sub(&x_tau);
        let expect = e.neg().add(&model.drift(&x_tau.sub(&y_star)));
        assert!(close(&u, &expect, 1e-12));
    }

    #[test]
    fn lyapunov_values() {
        assert_eq!(lyapunov_v(&StateVec::zeros(4)), 0.0);
        assert_eq!(lyapunov_v(&sv(&[3.0, 4.0, 0.0, 0.0])), 12.5);
        let e = sv(&[0.3, -1.7, 0.2, 0.9]);
        assert_eq!(lyapunov_v(&e), lyapunov_v(&e.neg()));
    }

    #[test]
    fn learning_fixed_point_at_zero_error() {
        let model = image_model();
        let alpha = ParamVec::from_slice(&[1.25, -0.5]);
        let next = learning_update(
            &alpha,
            &sv(&[1.0, 2.0, 3.0, 4.0]),
            &StateVec::zeros(4),
            &model,
            1.0,
            0.01,
        )
        .unwrap();
        assert_eq!(next, alpha);
    }

    #[test]
    fn learning_hand_value() {
        let model = image_model();
        let e = sv(&[0.1, -0.2, 5.0, 3.0]);
        let next = learning_update(
            &ParamVec::zeros(2),
            &StateVec::zeros(4),
            &e,
            &model,
            1.0,
            0.01,
        )
        .unwrap();
        assert!((next[0] - (-0.001)).abs() < 1e-15);
        assert!((next[1] - 0.002).abs() < 1e-15);
    }

    #[test]
    fn learning_scales_linearly_in_gamma() {
        let model = image_model();
        let e = sv(&[0.7, -0.3, 1.0, 2.0]);
        let x_tau = sv(&[0.1, 0.2, 0.3, 0.4]);
        let one = learning_update(&ParamVec::zeros(2), &x_tau, &e, &model, 1.0, 0.01).unwrap();
        let two = learning_update(&ParamVec::zeros(2), &x_tau, &e, &model, 2.0, 0.01).unwrap();
        assert_eq!(two[0], 2.0 * one[0]);
        assert_eq!(two[1], 2.0 * one[1]);
    }

    #[test]
    fn adaptive_one_step_hand_values() {
        let model = image_model();
        let mut resp = AdaptiveResponse::new(model, StateVec::zeros(4), ParamVec::zeros(2), 1.0);
        let x_tau = sv(&[1.0, 0.0, 2.0, 0.0]);
        let err = resp.step(&x_tau, &StateVec::zeros(4), 0.01).unwrap();
        assert_eq!(err.e, sv(&[-1.0, 0.0, -2.0, 0.0]));
        assert_eq!(err.v, 2.5);
        assert!((resp.alpha[0] - 0.01).abs() < 1e-15);
        assert_eq!(resp.alpha[1], 0.0);
        // Derivative was zero state + controller [1,0,3,0].
        assert!(close(&resp.y_star, &sv(&[0.01, 0.0, 0.03, 0.0]), 1e-15));
    }

    #[test]
    fn adaptive_synchronized_state_is_invariant() {
        let model = image_model();
        let theta = theta_for_slope(std::f64::consts::FRAC_PI_8, 9.81);
        let x_tau = sv(&[0.5, -0.2, 1.0, 2.0]);
        let u_tau = sv(&[0.3, -0.1, 0.0, 0.0]);
        let mut resp = AdaptiveResponse::new(model.clone(), x_tau.clone(), theta.clone(), 1.0);
        let err = resp.step(&x_tau, &u_tau, 0.01).unwrap();
        assert_eq!(err.v, 0.0);
        assert_eq!(resp.alpha, theta);
        // With zero error the derivative is exactly the drive derivative.
        let drive = eval_parametric(&model, &x_tau, &theta, &u_tau).unwrap();
        assert_eq!(resp.y_star, euler_step(&x_tau, &drive, 0.01).unwrap());
    }

    #[test]
    fn adaptive_gamma_zero_freezes_alpha() {
        let model = image_model();
        let alpha = ParamVec::from_slice(&[0.4, -0.9]);
        let mut resp = AdaptiveResponse::new(model, sv(&[1.0, 1.0, 1.0, 1.0]), alpha.clone(), 0.0);
        for _ in 0..10 {
            resp.step(&StateVec::zeros(4), &StateVec::zeros(4), 0.01)
                .unwrap();
        }
        assert_eq!(resp.alpha, alpha);
    }

    #[test]
    fn adaptive_divergence_guard_trips() {
        let model = image_model();
        let big = sv(&[2e9, 0.0, 0.0, 0.0]);
        let mut resp = AdaptiveResponse::new(model, big.clone(), ParamVec::zeros(2), 1.0);
        let err = resp.step(&big, &StateVec::zeros(4), 0.01).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn anticipating_feedback_vanishes_on_manifold() {
        let model = image_model();
        let y0 = sv(&[0.2, -0.4, 1.0, 0.5]);
        let alpha = ParamVec::from_slice(&[-2.4525, -0.6571]);
        let u = sv(&[0.1, 0.2, 0.0, 0.0]);
        let mut resp = AnticipatingResponse::new(model.clone(), y0.clone(), 1.0, 3);
        // Delay line prefills with y0, so x_tau = y0 keeps the feedback at zero.
        resp.step(&y0, &u, &alpha, 0.01).unwrap();
        let free = eval_parametric(&model, &y0, &alpha, &u).unwrap();
        assert_eq!(resp.y, euler_step(&y0, &free, 0.01).unwrap());
    }

    #[test]
    fn anticipating_zero_gain_decouples() {
        let model = image_model();
        let y0 = sv(&[0.3, 0.3, 0.3, 0.3]);
        let alpha = ParamVec::zeros(2);
        let u = StateVec::zeros(4);
        let mut a = AnticipatingResponse::new(model.clone(), y0.clone(), 0.0, 2);
        let mut b = AnticipatingResponse::new(model, y0, 0.0, 2);
        for i in 0..20 {
            let drive_a = sv(&[i as f64, 1.0, -2.0, 0.5]);
            a.step(&drive_a, &u, &alpha, 0.01).unwrap();
            b.step(&StateVec::zeros(4), &u, &alpha, 0.01).unwrap();
        }
        assert_eq!(a.y, b.y);
    }
}
