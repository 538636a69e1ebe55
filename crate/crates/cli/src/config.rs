//! JSON run configuration.
//!
//! Every section except `network` may be omitted; missing fields take the
//! defaults listed in the README. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use noisenet::config::{DEFAULT_TRANSIENT, FnnConfig, InputSignal, NeuronParams, RnnConfig};
use noisenet::estimator::ShiftMode;
use noisenet::matrix::{build_global_matrix, build_random_matrix, WeightMatrix};
use noisenet::noise::{NoiseIntensities, NoiseSpec};

use crate::CliError;

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BIAS: f64 = 0.02;
pub const DEFAULT_REPETITIONS: usize = 2000;
pub const FNN_DEFAULT_LENGTH: usize = 200;
pub const RNN_DEFAULT_LENGTH: usize = 1000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub network: NetworkSection,
    #[serde(default)]
    pub connectivity: ConnectivitySection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkType {
    Fnn,
    Rnn,
}

/// Fields of both network families; [`RunConfig::build`] rejects the ones
/// that do not belong to the chosen `type`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(rename = "type")]
    pub kind: NetworkType,
    pub layer_sizes: Option<Vec<usize>>,
    pub hidden_size: Option<usize>,
    pub input_size: Option<usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_bias")]
    pub bias: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub transient: Option<usize>,
}

impl NetworkSection {
    fn check_fields(&self) -> Result<(), CliError> {
        let foreign: &[(&str, bool)] = match self.kind {
            NetworkType::Fnn => &[
                ("hidden_size", self.hidden_size.is_some()),
                ("input_size", self.input_size.is_some()),
                ("beta", self.beta.is_some()),
                ("gamma", self.gamma.is_some()),
                ("transient", self.transient.is_some()),
            ],
            NetworkType::Rnn => &[("layer_sizes", self.layer_sizes.is_some())],
        };
        if let Some((name, _)) = foreign.iter().find(|(_, set)| *set) {
            return Err(CliError::Config(format!(
                "at `network.{name}`: not a field of a {:?} network",
                self.kind
            )));
        }
        let required = match self.kind {
            NetworkType::Fnn => ("layer_sizes", self.layer_sizes.is_some()),
            NetworkType::Rnn => ("hidden_size", self.hidden_size.is_some()),
        };
        if !required.1 {
            return Err(CliError::Config(format!("at `network`: missing field `{}`", required.0)));
        }
        Ok(())
    }

    pub fn transient(&self) -> usize {
        self.transient.unwrap_or(DEFAULT_TRANSIENT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MatrixSpec {
    Global,
    Random { rho: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectivitySection {
    #[serde(default = "default_matrix_seed")]
    pub seed: u64,
    /// One entry per matrix in layer order (`[w_in, w, w_out]` for the
    /// recurrent network). Empty means all global.
    #[serde(default)]
    pub matrices: Vec<MatrixSpec>,
}

impl Default for ConnectivitySection {
    fn default() -> Self {
        Self {
            seed: default_matrix_seed(),
            matrices: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intensities {
    #[serde(default)]
    pub du_a: f64,
    #[serde(default)]
    pub dc_a: f64,
    #[serde(default)]
    pub du_m: f64,
    #[serde(default)]
    pub dc_m: f64,
}

impl Intensities {
    pub fn to_domain(self) -> Result<NoiseIntensities, CliError> {
        Ok(NoiseIntensities::new(self.du_a, self.dc_a, self.du_m, self.dc_m)?)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub du_a: f64,
    #[serde(default)]
    pub dc_a: f64,
    #[serde(default)]
    pub du_m: f64,
    #[serde(default)]
    pub dc_m: f64,
    #[serde(default)]
    pub overrides: Vec<OverrideEntry>,
}

/// Flattened structs cannot deny unknown keys, so overrides spell the fields out.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideEntry {
    pub layer: usize,
    #[serde(default)]
    pub du_a: f64,
    #[serde(default)]
    pub dc_a: f64,
    #[serde(default)]
    pub du_m: f64,
    #[serde(default)]
    pub dc_m: f64,
}

impl NoiseSection {
    pub fn base(&self) -> Intensities {
        Intensities {
            du_a: self.du_a,
            dc_a: self.dc_a,
            du_m: self.du_m,
            dc_m: self.dc_m,
        }
    }

    pub fn to_domain(&self) -> Result<NoiseSpec, CliError> {
        let mut spec = NoiseSpec::new(self.base().to_domain()?)?;
        for o in &self.overrides {
            let layer = Intensities {
                du_a: o.du_a,
                dc_a: o.dc_a,
                du_m: o.du_m,
                dc_m: o.dc_m,
            };
            spec = spec.with_override(o.layer, layer.to_domain()?)?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform01,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub length: Option<usize>,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "default_distribution")]
    pub distribution: Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSpec {
    FnnConstant,
    RnnRange,
    None,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_noise_seed")]
    pub noise_seed: u64,
    pub shift: Option<ShiftSpec>,
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            length: None,
            seed: one_u64(),
            distribution: default_distribution(),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            repetitions: default_repetitions(),
            noise_seed: default_noise_seed(),
            shift: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSpec {
    Hidden,
    Readout,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantEntry {
    pub name: String,
    #[serde(default)]
    pub du_a: f64,
    #[serde(default)]
    pub dc_a: f64,
    #[serde(default)]
    pub du_m: f64,
    #[serde(default)]
    pub dc_m: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub rhos: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub layers: Option<Vec<usize>>,
    pub i1_values: Option<Vec<usize>>,
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub noiseless_readout: bool,
    pub hidden_size: Option<usize>,
    /// Noise variants for depth and beta sweeps; defaults to the noise section.
    #[serde(default)]
    pub variants: Vec<VariantEntry>,
    /// Baseline intensities; defaults to the noise section without correlated terms.
    pub reference: Option<Intensities>,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_bias() -> f64 {
    DEFAULT_BIAS
}
fn one_u64() -> u64 {
    1
}
fn default_matrix_seed() -> u64 {
    7
}
fn default_noise_seed() -> u64 {
    42
}
fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}
fn default_distribution() -> Distribution {
    Distribution::Uniform01
}

/// Parses a configuration, reporting the path of the offending field on error.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.inner()))
    })
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    parse(&text)
}

/// A configuration turned into domain objects.
#[derive(Debug, Clone)]
pub enum Network {
    Fnn(FnnConfig),
    Rnn(RnnConfig),
}

impl RunConfig {
    pub fn is_rnn(&self) -> bool {
        self.network.kind == NetworkType::Rnn
    }

    pub fn length(&self) -> usize {
        self.input.length.unwrap_or(if self.is_rnn() {
            RNN_DEFAULT_LENGTH
        } else {
            FNN_DEFAULT_LENGTH
        })
    }

    pub fn input_signal(&self) -> Result<InputSignal, CliError> {
        match self.input.distribution {
            Distribution::Uniform01 => Ok(InputSignal::uniform(self.length(), self.input.seed)?),
        }
    }

    pub fn noise(&self) -> Result<NoiseSpec, CliError> {
        self.noise.to_domain()
    }

    /// Shift mode from the config, or the network's natural one.
    pub fn shift(&self) -> ShiftMode {
        let spec = self.run.shift.unwrap_or(if self.is_rnn() {
            ShiftSpec::RnnRange
        } else {
            ShiftSpec::FnnConstant
        });
        match spec {
            ShiftSpec::FnnConstant => ShiftMode::Constant,
            ShiftSpec::RnnRange => ShiftMode::Range {
                transient: if self.is_rnn() { self.network.transient() } else { 0 },
            },
            ShiftSpec::None => ShiftMode::None,
        }
    }

    fn matrix(&self, index: usize, rows: usize, cols: usize) -> Result<WeightMatrix, CliError> {
        let spec = self.connectivity.matrices.get(index).copied().unwrap_or(MatrixSpec::Global);
        Ok(match spec {
            MatrixSpec::Global => build_global_matrix(rows, cols)?,
            MatrixSpec::Random { rho } => {
                build_random_matrix(rows, cols, rho, self.connectivity.seed ^ ((index as u64 + 2) << 40))?
            }
        })
    }

    pub fn build(&self) -> Result<Network, CliError> {
        let n = &self.network;
        n.check_fields()?;
        let given = self.connectivity.matrices.len();
        let neuron = NeuronParams::new(n.alpha, n.bias)?;
        match n.kind {
            NetworkType::Fnn => {
                let sizes = n.layer_sizes.as_ref().expect("checked above");
                if sizes.len() < 3 {
                    return Err(CliError::Config(format!(
                        "at `network.layer_sizes`: need at least 3 layers, got {}",
                        sizes.len()
                    )));
                }
                if given != 0 && given != sizes.len() - 1 {
                    return Err(CliError::Config(format!(
                        "at `connectivity.matrices`: expected {} entries, got {given}",
                        sizes.len() - 1
                    )));
                }
                let matrices = (0..sizes.len() - 1)
                    .map(|j| self.matrix(j, sizes[j + 1], sizes[j]))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Network::Fnn(FnnConfig::new(sizes.clone(), neuron, matrices)?))
            }
            NetworkType::Rnn => {
                if given != 0 && given != 3 {
                    return Err(CliError::Config(format!(
                        "at `connectivity.matrices`: expected 3 entries [w_in, w, w_out], got {given}"
                    )));
                }
                let hidden = n.hidden_size.expect("checked above");
                let win = self.matrix(0, hidden, n.input_size.unwrap_or(1))?;
                let w = self.matrix(1, hidden, hidden)?;
                let wout = self.matrix(2, 1, hidden)?;
                let (beta, gamma) = (n.beta.unwrap_or(0.5), n.gamma.unwrap_or(0.5));
                Ok(Network::Rnn(RnnConfig::new(neuron, beta, gamma, win, w, wout, n.transient())?))
            }
        }
    }
}
