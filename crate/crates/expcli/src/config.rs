use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use freebell::observables::FamilyLabel;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ChshRandom,
    ChshTruncated,
    Steering,
    Uncertainty,
    Moments,
    Freeness,
    ComplexChsh,
    Folner,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::ChshRandom,
        Experiment::ChshTruncated,
        Experiment::Steering,
        Experiment::Uncertainty,
        Experiment::Moments,
        Experiment::Freeness,
        Experiment::ComplexChsh,
        Experiment::Folner,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::ChshRandom => "chsh-random",
            Experiment::ChshTruncated => "chsh-truncated",
            Experiment::Steering => "steering",
            Experiment::Uncertainty => "uncertainty",
            Experiment::Moments => "moments",
            Experiment::Freeness => "freeness",
            Experiment::ComplexChsh => "complex-chsh",
            Experiment::Folner => "folner",
        }
    }

    /// Experiments that need a nonempty `dims` list.
    pub fn sweeps_dims(self) -> bool {
        !matches!(self, Experiment::Moments | Experiment::ComplexChsh)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

/// Everything needed to replay a run. Serialized verbatim into `config.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub dims: Vec<usize>,
    pub n_observables: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub k_max: usize,
    pub output_dir: PathBuf,
    pub emit_plot: bool,
    /// Worker threads; `0` lets the pool choose. Does not affect output bytes.
    pub threads: usize,
    /// Observable families for steering and uncertainty.
    pub families: Vec<String>,
    /// Index word for the freeness test (1-based).
    pub word: Vec<usize>,
    /// Record wall-clock time per trial; otherwise `wall_ms` is 0.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::ChshRandom,
            dims: vec![16, 32, 64, 128],
            n_observables: 5,
            trials: 16,
            master_seed: 42,
            k_max: 128,
            output_dir: PathBuf::from("runs"),
            emit_plot: false,
            threads: 0,
            families: vec![
                "random".into(),
                "anticommuting".into(),
                "truncated-free".into(),
            ],
            word: vec![1, 2, 1, 2],
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunConfig serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if self.experiment.sweeps_dims() && self.dims.is_empty() {
            return Err(CliError::Config(format!(
                "{} needs at least one dimension",
                self.experiment
            )));
        }
        if self.dims.contains(&0) {
            return Err(CliError::Config("dimensions must be positive".into()));
        }
        let need_even = matches!(
            self.experiment,
            Experiment::ChshRandom | Experiment::Freeness
        );
        let need_odd = matches!(
            self.experiment,
            Experiment::ChshTruncated | Experiment::Folner
        );
        if let Some(d) = self
            .dims
            .iter()
            .find(|&&d| (need_even && d % 2 == 1) || (need_odd && d % 2 == 0))
        {
            let parity = if need_even { "even" } else { "odd" };
            return Err(CliError::Config(format!(
                "{} requires {parity} dimensions, got {d}",
                self.experiment
            )));
        }
        if matches!(
            self.experiment,
            Experiment::Steering | Experiment::Uncertainty
        ) {
            if self.n_observables == 0 {
                return Err(CliError::Config("n must be at least 1".into()));
            }
            for f in &self.families {
                match f.parse::<FamilyLabel>() {
                    Ok(
                        FamilyLabel::Random
                        | FamilyLabel::Anticommuting
                        | FamilyLabel::TruncatedFree,
                    ) => {}
                    _ => return Err(CliError::Config(format!("unsupported family `{f}`"))),
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let cfg = RunConfig::from_json(r#"{"experiment":"folner","dims":[7,101]}"#).unwrap();
        assert_eq!(cfg.experiment, Experiment::Folner);
        assert_eq!(cfg.trials, 16);
        assert_eq!(cfg.master_seed, 42);
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_json(r#"{"experiment":"nope"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"trail":3}"#).is_err());
        let odd = RunConfig {
            dims: vec![15],
            ..Default::default()
        };
        assert!(odd.validate().is_err());
        let zero = RunConfig {
            trials: 0,
            ..Default::default()
        };
        assert!(zero.validate().is_err());
        let even = RunConfig {
            experiment: Experiment::ChshTruncated,
            dims: vec![8],
            ..Default::default()
        };
        assert!(even.validate().is_err());
        let fam = RunConfig {
            experiment: Experiment::Steering,
            families: vec!["x".into()],
            ..Default::default()
        };
        assert!(fam.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
    }
}
