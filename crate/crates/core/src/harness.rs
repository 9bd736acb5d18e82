//! Scenario plumbing: a serializable description of one signal-extraction
//! experiment, its execution, and parameter sweeps.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::compensation::{compensate_trajectory, CompensatedTrajectory};
use crate::error::{Error, Result};
use crate::kernel::{State, SystemParams};
use crate::metrics::{steady_window, ChannelKind, ChannelMetrics, MetricsReport};
use crate::signal::{generate, Signal, SignalSpec};
use crate::tracking::{default_initial_state, run, TrackerConfig, Trajectory};

/// Reference signal settings; sampling comes from the enclosing scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub vm: f64,
    pub omega: f64,
    #[serde(default)]
    pub gsm: f64,
    #[serde(default = "default_noise_dbw")]
    pub noise_dbw: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_noise_dbw() -> f64 {
    -20.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for the output files (default: current directory).
    pub dir: Option<PathBuf>,
    /// File stem (default: `run`).
    pub name: Option<String>,
}

impl OutputConfig {
    pub fn dir(&self) -> PathBuf {
        self.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("run")
    }
}

/// One experiment. Exactly one of `length` (samples) and `duration`
/// (seconds) must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub m: usize,
    pub h: f64,
    pub r: f64,
    pub n0: f64,
    pub length: Option<usize>,
    pub duration: Option<f64>,
    /// Initial tracker state; defaults to `(v[0], 0, ..., 0)`.
    pub x0: Option<Vec<f64>>,
    pub signal: SignalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Scenario {
    pub fn samples(&self) -> Result<usize> {
        match (self.length, self.duration) {
            (Some(n), None) => Ok(n),
            (None, Some(d)) if d > 0.0 && d.is_finite() && self.h > 0.0 => Ok((d / self.h).round() as usize),
            (None, Some(d)) => Err(Error::InvalidScenario(format!("duration must be positive, got {d}"))),
            (Some(_), Some(_)) => Err(Error::InvalidScenario("set either length or duration, not both".into())),
            (None, None) => Err(Error::InvalidScenario("one of length or duration is required".into())),
        }
    }

    pub fn signal_spec(&self) -> Result<SignalSpec> {
        let spec = SignalSpec {
            vm: self.signal.vm,
            omega: self.signal.omega,
            gsm: self.signal.gsm,
            noise_dbw: self.signal.noise_dbw,
            seed: self.signal.seed,
            h: self.h,
            length: self.samples()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn tracker(&self) -> Result<TrackerConfig<f64>> {
        let params = SystemParams::new(self.m, self.h, self.r)?;
        TrackerConfig::new(params, self.n0)
    }

    /// Checks every field before anything runs.
    pub fn validate(&self) -> Result<()> {
        let tracker = self.tracker()?;
        if tracker.m() < 2 {
            return Err(Error::InvalidScenario(format!("m must be at least 2, got {}", self.m)));
        }
        let spec = self.signal_spec()?;
        if let Some(x0) = &self.x0 {
            if x0.len() != self.m {
                return Err(Error::StateLength { expected: self.m, got: x0.len() });
            }
            if x0.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidScenario("x0 must be finite".into()));
            }
        }
        steady_window(spec.length, spec.period_samples())?;
        Ok(())
    }
}

/// Everything produced by one scenario run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub signal: Signal,
    pub trajectory: Trajectory<f64>,
    pub compensated: CompensatedTrajectory<f64>,
    pub metrics: MetricsReport,
}

pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let tracker = scenario.tracker()?;
    let spec = scenario.signal_spec()?;
    let m = scenario.m;
    let signal = generate(&spec, m)?;
    let x0 = match &scenario.x0 {
        Some(x) => State::new(x.clone()),
        None => default_initial_state(m, &signal.v[0]),
    };
    let trajectory = run(&tracker, &signal.v, x0)?;
    let compensated = compensate_trajectory(&tracker, &trajectory)?;

    let period = spec.period_samples();
    let window = steady_window(spec.length, period)?;
    let mut channels = Vec::with_capacity(2 * m - 1);
    for i in 0..m {
        let x = trajectory.channel(i);
        channels.push(ChannelMetrics::measure(ChannelKind::Raw, i + 1, &x, &signal.clean[i], &window, period)?);
    }
    for (i, xhat) in compensated.xhat.iter().enumerate() {
        channels.push(ChannelMetrics::measure(
            ChannelKind::Compensated,
            i + 1,
            xhat,
            &signal.clean[i],
            &window,
            period,
        )?);
    }
    Ok(RunOutput { signal, trajectory, compensated, metrics: MetricsReport { channels } })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n0: f64,
    pub gsm: f64,
    pub metrics: MetricsReport,
}

/// Runs `base` for every `(n0, gsm)` pair, in parallel, returning rows in
/// `n0`-major order.
pub fn sweep(base: &Scenario, n0_values: &[f64], gsm_values: &[f64]) -> Result<Vec<SweepRow>> {
    if n0_values.is_empty() || gsm_values.is_empty() {
        return Err(Error::InvalidScenario("sweep lists must not be empty".into()));
    }
    let scenarios: Vec<Scenario> = n0_values
        .iter()
        .flat_map(|&n0| {
            gsm_values.iter().map(move |&gsm| {
                let mut s = base.clone();
                s.n0 = n0;
                s.signal.gsm = gsm;
                s
            })
        })
        .collect();
    for s in &scenarios {
        s.validate()?;
    }
    let results: Vec<Result<MetricsReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || run_scenario(s).map(|out| out.metrics)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    scenarios
        .iter()
        .zip(results)
        .map(|(s, metrics)| Ok(SweepRow { n0: s.n0, gsm: s.signal.gsm, metrics: metrics? }))
        .collect()
}
