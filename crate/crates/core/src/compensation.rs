//! Predictive compensation of the delay and attenuation introduced by the
//! filter factor.
//!
//! Channel `i` (for `i < m - 1`) is corrected with the lead operator
//! `(1 + c_i D)^(m-1-i)`, `c_i = m n0 h / (m - 1 - i)`, where the powers of
//! `D` are realized by the higher state channels of the tracker. The last
//! state `x_m` has nothing above it and is never compensated.

use num_traits::Float;

use crate::combinatorics::binom_weight;
use crate::error::{Error, Result};
use crate::kernel::State;
use crate::scalar::{pow, Scalar};
use crate::tracking::{TrackerConfig, Trajectory};

/// Compensated estimates at one instant: entry `i` is `xhat_{i+1}`, and
/// there are always exactly `m - 1` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Compensated<T>(Vec<T>);

impl<T> Compensated<T> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

impl<T> std::ops::Index<usize> for Compensated<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Per-sample compensated channels of a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatedTrajectory<T> {
    pub t: Vec<T>,
    /// `xhat[i][k]` is `xhat_{i+1}` at sample `k`.
    pub xhat: Vec<Vec<T>>,
}

/// Lead-operator weights: row `i` holds the coefficients of
/// `x_{i+1}, ..., x_m` in `xhat_{i+1}`.
pub fn compensation_coefficients<T: Scalar>(config: &TrackerConfig<T>) -> Result<Vec<Vec<T>>> {
    let m = config.m();
    if m < 2 {
        return Err(Error::InvalidTracker(format!("compensation needs m >= 2, got {m}")));
    }
    let lead = T::from_index(m) * config.controller_params().h().clone();
    Ok((0..m - 1)
        .map(|i| {
            let order = m - 1 - i;
            let c = lead.clone() / T::from_index(order);
            (0..=order)
                .map(|mu| binom_weight::<T>(order as u64, mu as u64) * pow(&c, mu))
                .collect()
        })
        .collect())
}

fn apply<T: Scalar>(coefficients: &[Vec<T>], state: &State<T>) -> Compensated<T> {
    Compensated(
        coefficients
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (mu, c)| acc + c.clone() * state[i + mu].clone())
            })
            .collect(),
    )
}

/// Compensated estimates `xhat_1 .. xhat_{m-1}` from one state vector.
pub fn compensate<T: Scalar>(config: &TrackerConfig<T>, state: &State<T>) -> Result<Compensated<T>> {
    let coefficients = compensation_coefficients(config)?;
    if state.len() != config.m() {
        return Err(Error::StateLength { expected: config.m(), got: state.len() });
    }
    Ok(apply(&coefficients, state))
}

/// Applies [`compensate`] to every sample of a trajectory.
pub fn compensate_trajectory<T: Scalar>(
    config: &TrackerConfig<T>,
    traj: &Trajectory<T>,
) -> Result<CompensatedTrajectory<T>> {
    if traj.is_empty() {
        return Err(Error::EmptyInput);
    }
    let coefficients = compensation_coefficients(config)?;
    let m = config.m();
    let mut xhat = vec![Vec::with_capacity(traj.len()); m - 1];
    for state in &traj.states {
        if state.len() != m {
            return Err(Error::StateLength { expected: m, got: state.len() });
        }
        for (channel, value) in xhat.iter_mut().zip(apply(&coefficients, state).into_vec()) {
            channel.push(value);
        }
    }
    Ok(CompensatedTrajectory { t: traj.t.clone(), xhat })
}

/// Linear-regime response of `xhat_{channel+1}` to the matching derivative
/// of the reference at angular frequency `omega`:
/// `(1 + c s)^(m-1-i) / (1 + n0 h s)^m` with `c = m n0 h / (m-1-i)`.
///
/// Returns `(amplitude_ratio, phase_radians)`.
pub fn compensated_transfer<T: Scalar + Float>(config: &TrackerConfig<T>, channel: usize, omega: T) -> Result<(T, T)> {
    let m = config.m();
    if channel + 1 >= m {
        return Err(Error::InvalidTracker(format!("channel {channel} has no compensation for m = {m}")));
    }
    if !(omega >= T::zero()) {
        return Err(Error::InvalidTracker(format!("angular frequency must be non-negative, got {omega:?}")));
    }
    let order = T::from_index(m - 1 - channel);
    let m_t = T::from_index(m);
    let two = T::one() + T::one();
    let wt = *config.controller_params().h() * omega;
    let lead = m_t * wt / order;
    let amplitude =
        Float::powf(T::one() + lead * lead, order / two) * Float::powf(T::one() + wt * wt, -m_t / two);
    let phase = order * Float::atan(lead) - m_t * Float::atan(wt);
    Ok((amplitude, phase))
}
