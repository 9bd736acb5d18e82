//! Test signals: a sinusoid plus scaled Gaussian white noise.
//!
//! Noise comes from ChaCha8 seeded with the 64-bit `SignalSpec::seed`. Uniform
//! draws take the top 53 bits of each `u64` and the basic Box-Muller
//! transform turns each pair into two standard normals, used in order. This
//! pipeline is frozen so a seed reproduces the same samples everywhere.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    /// Amplitude of the clean sinusoid.
    pub vm: f64,
    /// Angular frequency in rad/s.
    pub omega: f64,
    /// Noise amplitude relative to `vm`.
    pub gsm: f64,
    /// Noise power in dBW before scaling by `vm * gsm`.
    pub noise_dbw: f64,
    pub seed: u64,
    /// Sample spacing in seconds.
    pub h: f64,
    pub length: usize,
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSignal(msg));
        if !(self.vm > 0.0 && self.vm.is_finite()) {
            return fail(format!("vm must be positive and finite, got {}", self.vm));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return fail(format!("omega must be positive and finite, got {}", self.omega));
        }
        if !(self.gsm >= 0.0 && self.gsm.is_finite()) {
            return fail(format!("gsm must be non-negative and finite, got {}", self.gsm));
        }
        if !self.noise_dbw.is_finite() {
            return fail(format!("noise_dbw must be finite, got {}", self.noise_dbw));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return fail(format!("h must be positive and finite, got {}", self.h));
        }
        if self.length == 0 {
            return fail("length must be at least 1".into());
        }
        Ok(())
    }

    /// Standard deviation of the unscaled noise, `sqrt(10^(dBW/10))`.
    pub fn noise_sigma(&self) -> f64 {
        dbw_to_sigma(self.noise_dbw)
    }

    /// Samples per period of the clean sinusoid.
    pub fn period_samples(&self) -> f64 {
        TAU / (self.omega * self.h)
    }
}

pub fn dbw_to_sigma(dbw: f64) -> f64 {
    10f64.powf(dbw / 10.0).sqrt()
}

/// Generated samples: the noisy reference and clean derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    /// `clean[mu][k]` is the `mu`-th derivative of the clean sinusoid at sample `k`.
    pub clean: Vec<Vec<f64>>,
}

/// Deterministic stream of standard normal variates.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (TAU * u2).sin_cos();
        self.spare = Some(radius * sin);
        radius * cos
    }
}

/// Samples the reference `v` and the clean derivatives of orders `0..orders`.
pub fn generate(spec: &SignalSpec, orders: usize) -> Result<Signal> {
    spec.validate()?;
    let n = spec.length;
    let t: Vec<f64> = (0..n).map(|k| k as f64 * spec.h).collect();
    let noise_scale = spec.vm * spec.gsm * spec.noise_sigma();
    let mut noise = GaussianStream::new(spec.seed);
    let v = t
        .iter()
        .map(|&tk| spec.vm * (spec.omega * tk).sin() + noise_scale * noise.next_normal())
        .collect();
    let clean = (0..orders)
        .map(|mu| {
            let gain = spec.vm * spec.omega.powi(mu as i32);
            let shift = mu as f64 * FRAC_PI_2;
            t.iter().map(|&tk| gain * (spec.omega * tk + shift).sin()).collect()
        })
        .collect();
    Ok(Signal { t, v, clean })
}
