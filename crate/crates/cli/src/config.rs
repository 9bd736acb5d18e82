use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use toc_core::harness::Scenario;
use toml::{Table, Value};

/// Scenario fields settable from the command line. Each one overrides the
/// matching key of the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// TOML scenario file; flags below override its values.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,

    /// Order of the integrator chain.
    #[arg(long)]
    pub m: Option<usize>,
    /// Sample step in seconds.
    #[arg(long)]
    pub h: Option<f64>,
    /// Control bound.
    #[arg(long)]
    pub r: Option<f64>,
    /// Filter factor (the law runs with step n0 * h).
    #[arg(long)]
    pub n0: Option<f64>,
    /// Number of samples (conflicts with --duration).
    #[arg(long, conflicts_with = "duration")]
    pub length: Option<usize>,
    /// Simulated time in seconds (conflicts with --length).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Initial state, comma separated (default: first sample, then zeros).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,

    /// Reference amplitude.
    #[arg(long)]
    pub vm: Option<f64>,
    /// Reference angular frequency in rad/s.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Noise amplitude relative to vm.
    #[arg(long)]
    pub gsm: Option<f64>,
    /// Noise power in dBW.
    #[arg(long, allow_negative_numbers = true)]
    pub noise_dbw: Option<f64>,
    /// Noise seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem.
    #[arg(long)]
    pub name: Option<String>,
}

fn load_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    text.parse::<Table>().with_context(|| format!("parsing config {}", path.display()))
}

fn sub_table<'a>(table: &'a mut Table, key: &str) -> Result<&'a mut Table> {
    table
        .entry(key)
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .with_context(|| format!("`{key}` must be a table"))
}

impl ScenarioArgs {
    /// Config file (if any) with every given flag applied on top.
    pub fn resolve(&self) -> Result<Scenario> {
        let mut table = match &self.config {
            Some(path) => load_table(path)?,
            None => Table::new(),
        };
        let set = |t: &mut Table, key: &str, v: Option<Value>| {
            if let Some(v) = v {
                t.insert(key.to_string(), v);
            }
        };
        set(&mut table, "m", self.m.map(|v| Value::Integer(v as i64)));
        set(&mut table, "h", self.h.map(Value::Float));
        set(&mut table, "r", self.r.map(Value::Float));
        set(&mut table, "n0", self.n0.map(Value::Float));
        if let Some(n) = self.length {
            table.remove("duration");
            table.insert("length".into(), Value::Integer(n as i64));
        }
        if let Some(d) = self.duration {
            table.remove("length");
            table.insert("duration".into(), Value::Float(d));
        }
        set(&mut table, "x0", self.x0.as_ref().map(|x| Value::Array(x.iter().map(|&v| Value::Float(v)).collect())));

        let signal = sub_table(&mut table, "signal")?;
        set(signal, "vm", self.vm.map(Value::Float));
        set(signal, "omega", self.omega.map(Value::Float));
        set(signal, "gsm", self.gsm.map(Value::Float));
        set(signal, "noise_dbw", self.noise_dbw.map(Value::Float));
        if let Some(seed) = self.seed {
            let seed = i64::try_from(seed).context("--seed must fit in a signed 64-bit TOML integer")?;
            signal.insert("seed".into(), Value::Integer(seed));
        }

        let output = sub_table(&mut table, "output")?;
        set(output, "dir", self.out_dir.as_ref().map(|p| Value::String(p.display().to_string())));
        set(output, "name", self.name.clone().map(Value::String));

        let scenario: Scenario = table.try_into().context("incomplete or malformed scenario")?;
        scenario.validate().context("invalid scenario")?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> ScenarioArgs {
        ScenarioArgs {
            m: Some(3),
            h: Some(5e-4),
            r: Some(1e7),
            n0: Some(10.0),
            length: Some(8000),
            vm: Some(2.0),
            omega: Some(6.28),
            ..Default::default()
        }
    }

    #[test]
    fn flags_alone_build_a_scenario() {
        let s = flags().resolve().unwrap();
        assert_eq!(s.m, 3);
        assert_eq!(s.signal.gsm, 0.0);
        assert_eq!(s.signal.noise_dbw, -20.0);
        assert_eq!(s.output.name(), "run");
    }

    #[test]
    fn missing_fields_are_reported() {
        let err = ScenarioArgs { r: None, ..flags() }.resolve().unwrap_err();
        assert!(format!("{err:#}").contains("missing field `r`"), "{err:#}");
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        std::fs::write(
            &path,
            "m = 4\nh = 0.0005\nr = 1e9\nn0 = 10\nduration = 4.0\n[signal]\nvm = 2\nomega = 6.28\ngsm = 0.01\nseed = 3\n",
        )
        .unwrap();
        let args = ScenarioArgs { config: Some(path), gsm: Some(0.1), length: Some(9000), ..Default::default() };
        let s = args.resolve().unwrap();
        assert_eq!(s.m, 4);
        assert_eq!(s.signal.gsm, 0.1);
        assert_eq!(s.signal.seed, 3);
        assert_eq!((s.length, s.duration), (Some(9000), None));
    }

    #[test]
    fn invalid_values_are_rejected_before_running() {
        assert!(ScenarioArgs { n0: Some(0.5), ..flags() }.resolve().is_err());
        assert!(ScenarioArgs { x0: Some(vec![1.0]), ..flags() }.resolve().is_err());
    }
}
