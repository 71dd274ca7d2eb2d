use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::newsvendor_scenario;
use crate::dro::{AmbiguitySpec, LossTable};
use crate::error::{Error, Result};
use crate::processes::ProcessModel;
use crate::statistics::StatisticKind;

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub process: ProcessModel,
    pub statistic: StatisticKind,
    pub losses: LossTable,
    pub spec: AmbiguitySpec,
    pub tgrid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The newsvendor scenario with the given spec and sampling plan.
    pub fn newsvendor(spec: AmbiguitySpec, tgrid: Vec<usize>, trials: usize, seed: u64) -> Self {
        let (model, losses) = newsvendor_scenario();
        ExperimentConfig {
            process: ProcessModel::FiniteIid(model),
            statistic: StatisticKind::EmpiricalDist,
            losses,
            spec,
            tgrid,
            trials,
            seed,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.tgrid.is_empty() || self.tgrid[0] == 0 {
            return Err(Error::Config("the T grid must be nonempty with positive horizons".into()));
        }
        if self.tgrid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("the T grid must be strictly increasing".into()));
        }
        self.spec.validate()
    }
}

/// The on-disk JSON form of an experiment; every field is optional so that
/// command-line flags can fill in or override values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// `"newsvendor"` supplies the process and loss table.
    pub scenario: Option<String>,
    pub process: Option<ProcessModel>,
    pub statistic: Option<StatisticKind>,
    /// Loss rows, one per decision.
    pub losses: Option<Vec<Vec<f64>>>,
    pub spec: Option<AmbiguitySpec>,
    /// Specs swept by a frontier run.
    pub specs: Option<Vec<AmbiguitySpec>>,
    pub radii: Option<Vec<f64>>,
    pub tgrid: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: usize = 1000;

pub fn default_tgrid() -> Vec<usize> {
    (1..=20).map(|k| 10 * k).collect()
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fills defaults and builds the experiment for a single spec.
    pub fn resolve(&self, spec: AmbiguitySpec) -> Result<ExperimentConfig> {
        let (process, table) = match self.scenario.as_deref() {
            Some("newsvendor") => {
                let (model, table) = newsvendor_scenario();
                (Some(ProcessModel::FiniteIid(model)), Some(table))
            }
            Some(other) => return Err(Error::Config(format!("unknown scenario '{other}'"))),
            None => (None, None),
        };
        let process = self
            .process
            .clone()
            .or(process)
            .ok_or_else(|| Error::Config("a process model or scenario is required".into()))?;
        let losses = match &self.losses {
            Some(rows) => LossTable::from_rows(rows.clone())?,
            None => table.ok_or_else(|| Error::Config("a loss table or scenario is required".into()))?,
        };
        let config = ExperimentConfig {
            statistic: self.statistic.unwrap_or_else(|| StatisticKind::natural_for(&process)),
            process,
            losses,
            spec,
            tgrid: self.tgrid.clone().unwrap_or_else(default_tgrid),
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            seed: self.seed.unwrap_or(0),
            output: self.out.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_config_resolves() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"scenario":"newsvendor","tgrid":[10,20],"trials":5,"seed":3}"#).unwrap();
        let cfg = file.resolve(AmbiguitySpec::Empirical).unwrap();
        assert_eq!(cfg.losses.num_decisions(), 11);
        assert_eq!(cfg.statistic, StatisticKind::EmpiricalDist);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_grids() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"trails":5}"#).is_err());
        let file: ConfigFile = serde_json::from_str(r#"{"scenario":"newsvendor","tgrid":[20,10]}"#).unwrap();
        assert!(matches!(file.resolve(AmbiguitySpec::Empirical), Err(Error::Config(_))));
        let file: ConfigFile = serde_json::from_str(r#"{"scenario":"newsvendor","trials":0}"#).unwrap();
        assert!(file.resolve(AmbiguitySpec::Empirical).is_err());
    }
}
