//! Tracking differentiator built on the time-optimal law.
//!
//! The plant is driven by `u = law(x_1 - v, x_2, ..., x_m; r, n0 h)` while it
//! integrates with the true step `h`. The filter factor `n0` stretches the
//! step the law sees, which trades tracking speed for noise rejection; `x_1`
//! then follows `v` and `x_{i+1}` approximates the `i`-th derivative of `v`,
//! each delayed by roughly `m n0 h`.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::step_state;
use crate::kernel::{time_optimal_control, State, SystemParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig<T> {
    params: SystemParams<T>,
    n0: T,
    controller: SystemParams<T>,
}

impl<T: Scalar> TrackerConfig<T> {
    /// `params` carries the plant step `h`; the law runs with `n0 * h`.
    pub fn new(params: SystemParams<T>, n0: T) -> Result<Self> {
        if !(n0 >= T::one()) {
            return Err(Error::InvalidTracker(format!("filter factor n0 must be at least 1, got {n0:?}")));
        }
        let controller = params.with_step(n0.clone() * params.h().clone())?;
        Ok(Self { params, n0, controller })
    }

    /// Plant parameters (true step `h`).
    pub fn params(&self) -> &SystemParams<T> {
        &self.params
    }

    pub fn n0(&self) -> &T {
        &self.n0
    }

    /// Parameters handed to the control law (step `n0 h`).
    pub fn controller_params(&self) -> &SystemParams<T> {
        &self.controller
    }

    pub fn m(&self) -> usize {
        self.params.m()
    }
}

/// Time-indexed record of a closed-loop run.
///
/// `states[k]` and `controls[k]` are the state and the control applied at
/// time `t[k]`, when the reference sample was `v[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub t: Vec<T>,
    pub v: Vec<T>,
    pub states: Vec<State<T>>,
    pub controls: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Samples of `x_{channel+1}` over the run.
    pub fn channel(&self, channel: usize) -> Vec<T> {
        self.states.iter().map(|x| x[channel].clone()).collect()
    }
}

/// One closed-loop step: control from the error-shifted state with step
/// `n0 h`, then the plant advances with step `h`.
pub fn track_step<T: Scalar>(config: &TrackerConfig<T>, state: &State<T>, v_sample: &T) -> (State<T>, T) {
    config.params.check_state(state);
    let mut error = state.clone();
    error[0] = error[0].clone() - v_sample.clone();
    let u = time_optimal_control(&error, &config.controller);
    let next = step_state(config.params.h(), state, &u);
    (next, u)
}

/// `(v0, 0, ..., 0)`: starts on the first reference sample with zero derivatives.
pub fn default_initial_state<T: Scalar>(m: usize, v0: &T) -> State<T> {
    let mut x = State::zeros(m);
    x[0] = v0.clone();
    x
}

/// Runs the loop over every sample of `v`, starting from `x0`.
pub fn run<T: Scalar>(config: &TrackerConfig<T>, v: &[T], x0: State<T>) -> Result<Trajectory<T>> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x0.len() != config.m() {
        return Err(Error::StateLength { expected: config.m(), got: x0.len() });
    }
    let n = v.len();
    let mut t = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut controls = Vec::with_capacity(n);
    let mut x = x0;
    for (k, vk) in v.iter().enumerate() {
        let (next, u) = track_step(config, &x, vk);
        t.push(T::from_index(k) * config.params.h().clone());
        states.push(x);
        controls.push(u);
        x = next;
    }
    Ok(Trajectory { t, v: v.to_vec(), states, controls })
}

/// Linear-regime steady-state response of every extracted channel to its
/// reference, `1 / (1 + n0 h s)^m` at `s = j omega`.
///
/// Returns the amplitude ratio `(1 + (n0 h omega)^2)^(-m/2)` and the phase
/// `-m atan(n0 h omega)` in radians.
pub fn steady_state_transfer<T: Scalar + Float>(config: &TrackerConfig<T>, omega: T) -> Result<(T, T)> {
    if !(omega >= T::zero()) {
        return Err(Error::InvalidTracker(format!("angular frequency must be non-negative, got {omega:?}")));
    }
    let m = T::from_index(config.m());
    let wt = *config.controller.h() * omega;
    let two = T::one() + T::one();
    let amplitude = Float::powf(T::one() + wt * wt, -m / two);
    let phase = -m * Float::atan(wt);
    Ok((amplitude, phase))
}
