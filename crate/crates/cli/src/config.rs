use crate::CliError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Cf,
    Series,
    Measure,
    Dim,
    Mc,
    Twisted,
    Counterexample,
    Discrepancy,
    ConjectureScan,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Cf => "cf",
            Experiment::Series => "series",
            Experiment::Measure => "measure",
            Experiment::Dim => "dim",
            Experiment::Mc => "mc",
            Experiment::Twisted => "twisted",
            Experiment::Counterexample => "counterexample",
            Experiment::Discrepancy => "discrepancy",
            Experiment::ConjectureScan => "conjecture-scan",
        }
    }

    /// Parameter keys an experiment accepts.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Cf => &["x", "depth"],
            Experiment::Series => &["criterion", "psi", "N", "checkpoints"],
            Experiment::Measure => &["psi", "q_from", "q_to", "variant", "checkpoints"],
            Experiment::Dim => &["tau", "Q"],
            Experiment::Mc => &["n", "m", "psi", "q_max", "variant", "b", "samples", "seed"],
            Experiment::Twisted => &["mode", "x", "b", "psi", "q_max", "sign", "samples", "seed", "tau", "Q"],
            Experiment::Counterexample => &["construction", "alpha", "terms", "theta", "n", "cutoffs"],
            Experiment::Discrepancy => &["x", "checkpoints"],
            Experiment::ConjectureScan => &["alpha", "psi", "b_grid", "q_max"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// A literal given either as a JSON string or a JSON integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lit {
    Int(i64),
    Str(String),
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Int(v) => write!(f, "{v}"),
            Lit::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Lit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Lit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Lit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Lit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub big_q: Option<u64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_from: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_to: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_grid: Option<Vec<Lit>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub parameters: Params,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputSpec,
}

fn is_default_output(o: &OutputSpec) -> bool {
    *o == OutputSpec::default()
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig { experiment, parameters: Params::default(), output: OutputSpec::default() }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig, CliError> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    /// Reject parameters the experiment does not read.
    pub fn validate(&self) -> Result<(), CliError> {
        let v = serde_json::to_value(&self.parameters).expect("parameters serialise");
        let allowed = self.experiment.keys();
        for k in v.as_object().expect("object").keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::config(format!(
                    "parameter `{k}` is not used by experiment `{}` (accepted: {})",
                    self.experiment,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Apply `key=value`; the value is read as JSON when it parses, else as a string.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("expected KEY=VALUE, got `{assignment}`")))?;
        let value = match serde_json::from_str::<serde_json::Value>(raw) {
            // decimals stay literal so they are read exactly
            Ok(serde_json::Value::Number(n)) if n.is_f64() => serde_json::Value::String(raw.into()),
            Ok(v) => v,
            Err(_) => serde_json::Value::String(raw.into()),
        };
        let mut obj = serde_json::to_value(&self.parameters).expect("parameters serialise");
        obj.as_object_mut().expect("object").insert(k.trim().to_string(), value);
        self.parameters = serde_json::from_value(obj).map_err(|e| CliError::config(format!("parameter `{k}`: {e}")))?;
        Ok(())
    }
}
