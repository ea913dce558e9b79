//! Configuration loading and experiment dispatch for the `landau` binary.
//!
//! A config file is TOML with optional top-level `seed`, `out` and `jobs`
//! keys and one table per experiment, named like the subcommand:
//!
//! ```toml
//! seed = 7
//!
//! [wegner]
//! trials = 100
//!
//! [perc-crossing]
//! p = 0.65
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use landau_core::experiments::*;
use serde::de::DeserializeOwned;
use toml::{Table, Value};

/// Subcommand names, in the order `all` runs them.
pub const EXPERIMENTS: [&str; 11] = [
    "perc-crossing",
    "perc-circuit",
    "ribbon",
    "projector",
    "spectral-averaging",
    "offdiag",
    "ids",
    "decay",
    "band-projection",
    "wegner",
    "h1",
];

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Per-experiment parameter tables, keyed by subcommand name.
    pub sections: Table,
}

fn unknown_experiment(name: &str) -> anyhow::Error {
    anyhow!("unknown experiment `{name}`; valid experiments: {}, all", EXPERIMENTS.join(", "))
}

pub fn check_experiment(name: &str) -> Result<()> {
    if EXPERIMENTS.contains(&name) {
        Ok(())
    } else {
        Err(unknown_experiment(name))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| anyhow!("config parse error: {e}"))?;
        let mut cfg = RunConfig::default();
        for (key, value) in table {
            match key.as_str() {
                "seed" => {
                    let s = value.as_integer().filter(|s| *s >= 0).ok_or_else(|| anyhow!("`seed` must be a non-negative integer"))?;
                    cfg.seed = Some(s as u64);
                }
                "out" => cfg.out = Some(PathBuf::from(value.as_str().ok_or_else(|| anyhow!("`out` must be a string"))?)),
                "jobs" => {
                    let j = value.as_integer().filter(|j| *j >= 1).ok_or_else(|| anyhow!("`jobs` must be a positive integer"))?;
                    cfg.jobs = Some(j as usize);
                }
                name => {
                    check_experiment(name).map_err(|_| {
                        anyhow!("unknown config key `{name}`; expected seed, out, jobs or one of: {}", EXPERIMENTS.join(", "))
                    })?;
                    if !value.is_table() {
                        bail!("config section `{name}` must be a table");
                    }
                    cfg.sections.insert(name.to_string(), value);
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Applies `key=value`. A bare key targets `default_section`; otherwise
    /// the key is `section.field`. Values are TOML literals; anything that
    /// does not parse is taken as a string.
    pub fn set(&mut self, assignment: &str, default_section: Option<&str>) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects key=value, got `{assignment}`"))?;
        let key = key.trim();
        let (section, field) = match key.split_once('.') {
            Some((s, f)) => (s, f),
            None => match default_section {
                Some(s) => (s, key),
                None => bail!("--set key `{key}` needs a section prefix when running all experiments"),
            },
        };
        check_experiment(section)?;
        let value = parse_value(raw.trim());
        let table = self
            .sections
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .expect("sections are tables");
        table.insert(field.to_string(), value);
        Ok(())
    }

    fn section(&self, name: &str) -> Value {
        self.sections.get(name).cloned().unwrap_or_else(|| Value::Table(Table::new()))
    }
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn params<P: DeserializeOwned>(name: &str, section: Value) -> Result<P> {
    section
        .try_into()
        .map_err(|e: toml::de::Error| anyhow!("invalid [{name}] section: {}", e.message()))
}

fn execute<P, F>(name: &str, section: Value, seed: u64, run: F) -> Result<ExperimentReport>
where
    P: DeserializeOwned,
    F: FnOnce(&P, u64) -> landau_core::Result<ExperimentReport>,
{
    let p: P = params(name, section)?;
    run(&p, seed).map_err(|e| anyhow!("{name}: {e}"))
}

/// Parses and validates the parameters of `name` without running it.
pub fn validate(name: &str, cfg: &RunConfig) -> Result<()> {
    let s = cfg.section(name);
    let r = match name {
        "perc-crossing" => params::<CrossingParams>(name, s)?.validate(),
        "perc-circuit" => params::<CircuitParams>(name, s)?.validate(),
        "ribbon" => params::<RibbonParams>(name, s)?.validate(),
        "projector" => params::<ProjectorParams>(name, s)?.validate(),
        "spectral-averaging" => params::<SpectralAveragingParams>(name, s)?.validate(),
        "offdiag" => params::<OffdiagParams>(name, s)?.validate(),
        "ids" => params::<IdsParams>(name, s)?.validate(),
        "decay" => params::<DecayParams>(name, s)?.validate(),
        "band-projection" => params::<BandProjectionParams>(name, s)?.validate(),
        "wegner" => params::<WegnerParams>(name, s)?.validate(),
        "h1" => params::<H1Params>(name, s)?.validate(),
        other => return Err(unknown_experiment(other)),
    };
    r.map_err(|e| anyhow!("{name}: {e}"))
}

pub fn run(name: &str, cfg: &RunConfig, seed: u64) -> Result<ExperimentReport> {
    let s = cfg.section(name);
    match name {
        "perc-crossing" => execute(name, s, seed, crossing_experiment),
        "perc-circuit" => execute(name, s, seed, circuit_experiment),
        "ribbon" => execute(name, s, seed, ribbon_experiment),
        "projector" => execute(name, s, seed, projector_experiment),
        "spectral-averaging" => execute(name, s, seed, spectral_averaging_experiment),
        "offdiag" => execute(name, s, seed, offdiag_experiment),
        "ids" => execute(name, s, seed, ids_experiment),
        "decay" => execute(name, s, seed, decay_experiment),
        "band-projection" => execute(name, s, seed, band_projection_experiment),
        "wegner" => execute(name, s, seed, wegner_experiment),
        "h1" => execute(name, s, seed, h1_experiment),
        other => Err(unknown_experiment(other)),
    }
}

/// One line per check.
pub fn summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "{:<18} {:<40} {} value={:.6e}  ({})\n",
            report.experiment,
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.rule
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let p: CrossingParams = params("perc-crossing", cfg.section("perc-crossing")).unwrap();
        assert_eq!(p, CrossingParams::default());
    }

    #[test]
    fn overrides_land_in_their_section() {
        let mut cfg = RunConfig::parse("seed = 3\n[wegner]\ntrials = 7\n").unwrap();
        assert_eq!(cfg.seed, Some(3));
        cfg.set("trials=10", Some("perc-crossing")).unwrap();
        cfg.set("wegner.sides=[2, 4]", None).unwrap();
        let p: CrossingParams = params("perc-crossing", cfg.section("perc-crossing")).unwrap();
        assert_eq!(p.trials, 10);
        let w: WegnerParams = params("wegner", cfg.section("wegner")).unwrap();
        assert_eq!((w.trials, w.sides), (7, vec![2, 4]));
        assert!(cfg.set("trials=1", None).is_err());
        assert!(cfg.set("nosuch.trials=1", None).is_err());
    }

    #[test]
    fn invalid_probability_names_the_field() {
        let mut cfg = RunConfig::default();
        cfg.set("p=1.5", Some("perc-crossing")).unwrap();
        let e = validate("perc-crossing", &cfg).unwrap_err().to_string();
        assert!(e.contains("`p`"), "{e}");
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let e = RunConfig::parse("[wegner]\ntrails = 3\n").map(|c| validate("wegner", &c));
        let e = e.unwrap().unwrap_err().to_string();
        assert!(e.contains("trails"), "{e}");
        let e = RunConfig::parse("[nosuch]\n").unwrap_err().to_string();
        assert!(e.contains("perc-crossing") && e.contains("h1"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = RunConfig::parse("seed = 1\n[ids\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn unknown_experiment_lists_valid_names() {
        let e = run("nosuch", &RunConfig::default(), 0).unwrap_err().to_string();
        for n in EXPERIMENTS {
            assert!(e.contains(n), "{e}");
        }
    }

    #[test]
    fn values_parse_as_toml_literals() {
        assert_eq!(parse_value("10"), Value::Integer(10));
        assert_eq!(parse_value("0.5"), Value::Float(0.5));
        assert_eq!(parse_value("[1, 2]"), Value::Array(vec![Value::Integer(1), Value::Integer(2)]));
        assert_eq!(parse_value("abc"), Value::String("abc".into()));
    }
}
