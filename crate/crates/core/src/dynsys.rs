//! Vectors, parametric system models, forward Euler, and sample delay lines.
//!
//! Everything downstream steps dynamics of the form
//!
//! ```text
//! z' = f(z) + F(z) p + u
//! ```
//!
//! with `f` the parameter-free drift, `F(z)` an n-by-m coupling matrix, `p`
//! an m-dimensional parameter vector and `u` an external input. Integration
//! is plain forward Euler at a fixed step; there is deliberately no
//! higher-order scheme, because the synchronization error algebra relies on
//! drive and responses discretizing identically.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use crate::error::Error;
use crate::Result;

/// State vector of a dynamical system. Fixed dimension per system.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(components: Vec<f64>) -> Self {
        StateVec(components)
    }

    pub fn zeros(dim: usize) -> Self {
        StateVec(vec![0.0; dim])
    }

    pub fn from_slice(components: &[f64]) -> Self {
        StateVec(components.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub(crate) fn ensure_finite(&self, signal: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { signal })
        }
    }

    pub fn add(&self, other: &StateVec) -> StateVec {
        assert_eq!(self.dim(), other.dim());
        StateVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &StateVec) -> StateVec {
        assert_eq!(self.dim(), other.dim());
        StateVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> StateVec {
        StateVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn scaled(&self, factor: f64) -> StateVec {
        StateVec(self.0.iter().map(|a| factor * a).collect())
    }

    /// `self + factor * other`, componentwise.
    pub fn add_scaled(&self, other: &StateVec, factor: f64) -> StateVec {
        assert_eq!(self.dim(), other.dim());
        StateVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn dot(&self, other: &StateVec) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Index<usize> for StateVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Parameter vector of a parametric model. Fixed dimension per model.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVec(Vec<f64>);

impl ParamVec {
    pub fn new(components: Vec<f64>) -> Self {
        ParamVec(components)
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVec(vec![0.0; dim])
    }

    pub fn from_slice(components: &[f64]) -> Self {
        ParamVec(components.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn sub(&self, other: &ParamVec) -> ParamVec {
        assert_eq!(self.dim(), other.dim());
        ParamVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + factor * other`, componentwise.
    pub fn add_scaled(&self, other: &ParamVec, factor: f64) -> ParamVec {
        assert_eq!(self.dim(), other.dim());
        ParamVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + factor * b)
                .collect(),
        )
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Index<usize> for ParamVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Dense row-major matrix. Small and allocation-backed; the systems here are
/// four states by two parameters, so there is nothing to optimize.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `M p`, an n-vector.
    pub fn mul_vec(&self, p: &ParamVec) -> StateVec {
        assert_eq!(self.cols, p.dim());
        let mut out = vec![0.0; self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..self.cols {
                acc += self.get(r, c) * p[c];
            }
            *slot = acc;
        }
        StateVec::new(out)
    }

    /// `M^T e`, an m-vector.
    pub fn tr_mul_vec(&self, e: &StateVec) -> ParamVec {
        assert_eq!(self.rows, e.dim());
        let mut out = vec![0.0; self.cols];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for r in 0..self.rows {
                acc += self.get(r, c) * e[r];
            }
            *slot = acc;
        }
        ParamVec::new(out)
    }
}

type DriftFn = dyn Fn(&StateVec) -> StateVec + Send + Sync;
type CouplingFn = dyn Fn(&StateVec) -> Matrix + Send + Sync;

/// A parametric dynamical system `z' = f(z) + F(z) p + u`.
///
/// `drift` is `f` and `coupling` is `F`; both must be pure functions of the
/// state so that repeated evaluation at the same state is bitwise identical.
/// Several synchronization guarantees in [`crate::sync`] depend on that.
#[derive(Clone)]
pub struct SystemModel {
    n: usize,
    m: usize,
    drift: Arc<DriftFn>,
    coupling: Arc<CouplingFn>,
}

impl SystemModel {
    pub fn new(
        n: usize,
        m: usize,
        drift: impl Fn(&StateVec) -> StateVec + Send + Sync + 'static,
        coupling: impl Fn(&StateVec) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        SystemModel {
            n,
            m,
            drift: Arc::new(drift),
            coupling: Arc::new(coupling),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn param_dim(&self) -> usize {
        self.m
    }

    pub fn drift(&self, x: &StateVec) -> StateVec {
        (self.drift)(x)
    }

    pub fn coupling(&self, x: &StateVec) -> Matrix {
        (self.coupling)(x)
    }
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

/// One forward Euler step: `x + step * dx`.
///
/// Fails if the result has a non-finite component.
pub fn euler_step(x: &StateVec, dx: &StateVec, step: f64) -> Result<StateVec> {
    let next = x.add_scaled(dx, step);
    next.ensure_finite("euler step result")?;
    Ok(next)
}

/// Evaluate the parametric derivative `f(x) + F(x) p + u`.
pub fn eval_parametric(
    model: &SystemModel,
    x: &StateVec,
    p: &ParamVec,
    u: &StateVec,
) -> Result<StateVec> {
    if x.dim() != model.n {
        return Err(Error::DimMismatch {
            expected: model.n,
            got: x.dim(),
        });
    }
    if p.dim() != model.m {
        return Err(Error::DimMismatch {
            expected: model.m,
            got: p.dim(),
        });
    }
    if u.dim() != model.n {
        return Err(Error::DimMismatch {
            expected: model.n,
            got: u.dim(),
        });
    }
    let deriv = model.drift(x).add(&model.coupling(x).mul_vec(p)).add(u);
    deriv.ensure_finite("parametric derivative")?;
    Ok(deriv)
}

/// Fixed-depth FIFO delay line over state vectors.
///
/// A line of depth `d` is pre-filled with `d` copies of the signal's initial
/// value, so every push returns the sample pushed `d` steps earlier from the
/// first step on. Depth 0 passes samples straight through.
#[derive(Clone, Debug)]
pub struct DelayLine {
    depth: usize,
    dim: usize,
    buf: VecDeque<StateVec>,
}

impl DelayLine {
    pub fn new(depth: usize, initial: StateVec) -> Self {
        let dim = initial.dim();
        let mut buf = VecDeque::with_capacity(depth + 1);
        for _ in 0..depth {
            buf.push_back(initial.clone());
        }
        DelayLine { depth, dim, buf }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Push a sample, returning the sample pushed `depth` steps earlier.
    pub fn push(&mut self, sample: StateVec) -> Result<StateVec> {
        if sample.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: sample.dim(),
            });
        }
        if self.depth == 0 {
            return Ok(sample);
        }
        self.buf.push_back(sample);
        // Length is restored to `depth` by the pop, so the invariant holds.
        Ok(self.buf.pop_front().expect("delay line is never empty"))
    }
}
