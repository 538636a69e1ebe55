//! Parameter sweeps: connectivity, depth, recurrence strength and the noise
//! mitigation strategies (input multiplexing, noiseless readout, readout
//! averaging).
//!
//! Every configuration in a sweep is evaluated with the same input and noise
//! seeds as its baseline, so ratios compare paired runs. Each configuration is
//! collapsed to a scalar with [`curve_summary`].

use rayon::prelude::*;

use crate::analytic::{fnn_curve, rnn_curve};
use crate::config::{FnnConfig, InputSignal, NeuronParams, RnnConfig};
use crate::error::{Error, Result};
use crate::estimator::{analytic_summary, curve_summary, monte_carlo_curve, ShiftMode, SnrCurve, DEFAULT_BAND};
use crate::matrix::{build_global_matrix, build_random_matrix};
use crate::noise::{NoiseIntensities, NoiseSpec};
use crate::simulator::{FnnRunner, Readout, RnnRunner};

/// Layer counts of the default depth sweep.
pub const DEPTH_GRID: [usize; 9] = [3, 4, 6, 8, 10, 14, 20, 26, 30];
/// Recurrence strengths of the default beta sweep.
pub const BETA_GRID: [f64; 12] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
/// Largest beta a sweep accepts.
pub const MAX_SWEEP_BETA: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub matrix: u64,
    pub input: u64,
    pub noise: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            matrix: 7,
            input: 1,
            noise: 42,
        }
    }
}

/// Monte-Carlo settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub repetitions: usize,
    /// Input length `T`; for recurrent networks this includes the transient.
    pub length: usize,
    pub seeds: Seeds,
    pub band: (f64, f64),
}

impl SweepSettings {
    pub fn new(repetitions: usize, length: usize, seeds: Seeds) -> Self {
        Self {
            repetitions,
            length,
            seeds,
            band: DEFAULT_BAND,
        }
    }

    fn input(&self, length: usize) -> Result<InputSignal> {
        InputSignal::uniform(length, self.seeds.input)
    }

    /// Distinct matrix seed per layer.
    fn matrix_seed(&self, layer: usize) -> u64 {
        self.seeds.matrix ^ ((layer as u64) << 40)
    }
}

/// Either network family.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkConfig {
    Fnn(FnnConfig),
    Rnn(RnnConfig),
}

impl NetworkConfig {
    pub fn n_layers(&self) -> usize {
        match self {
            NetworkConfig::Fnn(c) => c.n_layers(),
            NetworkConfig::Rnn(_) => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Variant label (noise configuration, beta, readout, ...).
    pub series: String,
    pub value: f64,
    pub summary: f64,
    /// Summary of the baseline this point is normalized by.
    pub reference: f64,
    pub ratio: f64,
    /// Global-coupling analytic summary, where the recursions apply.
    pub analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: String,
    pub reference: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn series<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SweepPoint> + 'a {
        self.points.iter().filter(move |p| p.series == name)
    }

    pub fn point(&self, series: &str, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.series == series && p.value == value)
    }

    /// Axis value with the highest ratio in `series`.
    pub fn argmax(&self, series: &str) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.series == series)
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
    }

    /// First axis value where the ratio of `series` falls to `level`,
    /// linearly interpolated between grid points.
    pub fn crossing(&self, series: &str, level: f64) -> Option<f64> {
        let pts: Vec<&SweepPoint> = self.series(series).collect();
        pts.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            (a.ratio > level && b.ratio <= level)
                .then(|| a.value + (a.ratio - level) / (a.ratio - b.ratio) * (b.value - a.value))
        })
    }
}

fn check_increasing(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(format!("{name} list is empty")));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config(format!("{name} values must be strictly increasing")));
    }
    Ok(())
}

/// Monte-Carlo curve of a feed-forward network, shifted by its own offset.
pub fn fnn_curve_mc(
    cfg: &FnnConfig,
    spec: &NoiseSpec,
    readout: Readout,
    settings: &SweepSettings,
) -> Result<SnrCurve> {
    let net = FnnRunner::new(cfg.clone(), spec.clone(), settings.seeds.noise)?.with_readout(readout);
    monte_carlo_curve(&net, &settings.input(settings.length)?, settings.repetitions, ShiftMode::Constant)
}

/// Monte-Carlo curve of a recurrent network, renormalized by its noiseless range.
pub fn rnn_curve_mc(
    cfg: &RnnConfig,
    spec: &NoiseSpec,
    readout: Readout,
    settings: &SweepSettings,
) -> Result<SnrCurve> {
    let net = RnnRunner::new(cfg.clone(), spec.clone(), settings.seeds.noise)?.with_readout(readout);
    monte_carlo_curve(
        &net,
        &settings.input(settings.length)?,
        settings.repetitions,
        ShiftMode::Range {
            transient: cfg.transient(),
        },
    )
}

fn fnn_summary(cfg: &FnnConfig, spec: &NoiseSpec, readout: Readout, settings: &SweepSettings) -> Result<f64> {
    curve_summary(&fnn_curve_mc(cfg, spec, readout, settings)?, settings.band)
}

fn rnn_summary(cfg: &RnnConfig, spec: &NoiseSpec, readout: Readout, settings: &SweepSettings) -> Result<f64> {
    curve_summary(&rnn_curve_mc(cfg, spec, readout, settings)?, settings.band)
}

/// Which feed-forward matrices a connectivity sweep rebuilds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixTarget {
    /// Every hidden-to-hidden matrix.
    Hidden,
    /// The matrix into the output neuron.
    Readout,
}

/// Summary SNR of the feed-forward network as the targeted matrices are
/// replaced by random matrices of connectivity `rho`, relative to `base`.
pub fn fnn_connectivity_sweep(
    base: &FnnConfig,
    spec: &NoiseSpec,
    target: MatrixTarget,
    rhos: &[f64],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_increasing("rho", rhos)?;
    let n_layers = base.n_layers();
    let layers: Vec<usize> = match target {
        MatrixTarget::Hidden => (3..n_layers).collect(),
        MatrixTarget::Readout => vec![n_layers],
    };
    if layers.is_empty() {
        return Err(Error::config("network has no hidden-to-hidden matrix"));
    }
    let reference = fnn_summary(base, spec, Readout::Neuron, settings)?;
    let analytic = FnnConfig::global(base.layer_sizes().to_vec(), base.neuron())
        .and_then(|g| fnn_curve(&g, spec, &settings.input(settings.length)?, false))
        .and_then(|c| analytic_summary(&c, settings.band))
        .ok();

    let points = rhos
        .par_iter()
        .map(|&rho| {
            let mut cfg = base.clone();
            for &n in &layers {
                let sizes = cfg.layer_sizes();
                let m = build_random_matrix(sizes[n - 1], sizes[n - 2], rho, settings.matrix_seed(n))?;
                cfg = cfg.with_matrix(n, m)?;
            }
            let summary = fnn_summary(&cfg, spec, Readout::Neuron, settings)?;
            Ok(SweepPoint {
                series: format!("{target:?}").to_lowercase(),
                value: rho,
                summary,
                reference,
                ratio: summary / reference,
                analytic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "rho".into(),
        reference,
        points,
    })
}

/// Grid over readout connectivity and recurrence strength. Each point is
/// normalized by the global-readout run at the same beta.
pub fn rnn_connectivity_sweep(
    base: &RnnConfig,
    spec: &NoiseSpec,
    rhos: &[f64],
    betas: &[f64],
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_increasing("rho", rhos)?;
    check_increasing("beta", betas)?;
    if let Some(b) = betas.iter().find(|&&b| !(0.0..1.0).contains(&b)) {
        return Err(Error::config(format!("beta must lie in [0, 1), got {b}")));
    }
    let hidden = base.hidden_size();
    let per_beta = betas
        .par_iter()
        .map(|&beta| {
            let cfg = base.with_beta(beta)?;
            let global_out = cfg.with_matrices(cfg.win().clone(), cfg.w().clone(), build_global_matrix(1, hidden)?)?;
            let reference = rnn_summary(&global_out, spec, Readout::Neuron, settings)?;
            let analytic = RnnConfig::global_with_inputs(cfg.input_size(), hidden, cfg.neuron(), beta, cfg.gamma())
                .map(|g| g.with_transient(cfg.transient()))
                .and_then(|g| rnn_curve(&g, spec, &settings.input(settings.length)?, false))
                .and_then(|c| analytic_summary(&c, settings.band))
                .ok();
            rhos.par_iter()
                .map(|&rho| {
                    let wout = build_random_matrix(1, hidden, rho, settings.matrix_seed(3))?;
                    let sparse = cfg.with_matrices(cfg.win().clone(), cfg.w().clone(), wout)?;
                    let summary = rnn_summary(&sparse, spec, Readout::Neuron, settings)?;
                    Ok(SweepPoint {
                        series: format!("beta={beta}"),
                        value: rho,
                        summary,
                        reference,
                        ratio: summary / reference,
                        analytic,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<SweepPoint> = per_beta.into_iter().flatten().collect();
    Ok(SweepResult {
        axis: "rho_out".into(),
        reference: points.first().map_or(f64::NAN, |p| p.reference),
        points,
    })
}

fn deep_network(n_layers: usize, hidden: usize, neuron: NeuronParams) -> Result<FnnConfig> {
    if n_layers < 3 {
        return Err(Error::config(format!("depth must be at least 3 layers, got {n_layers}")));
    }
    let mut sizes = vec![1];
    sizes.extend(std::iter::repeat_n(hidden, n_layers - 2));
    sizes.push(1);
    FnnConfig::global(sizes, neuron)
}

/// Summary SNR versus depth for each noise variant, relative to the 3-layer
/// network under `reference_spec`.
pub fn depth_sweep(
    layers: &[usize],
    variants: &[(String, NoiseSpec)],
    reference_spec: &NoiseSpec,
    neuron: NeuronParams,
    hidden: usize,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_increasing("depth", &layers.iter().map(|&n| n as f64).collect::<Vec<_>>())?;
    if layers[0] < 3 {
        return Err(Error::config("depth values must be at least 3"));
    }
    let reference = fnn_summary(&deep_network(3, hidden, neuron)?, reference_spec, Readout::Neuron, settings)?;
    let grid: Vec<(&String, &NoiseSpec, usize)> = variants
        .iter()
        .flat_map(|(name, spec)| layers.iter().map(move |&n| (name, spec, n)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(name, spec, n)| {
            let summary = fnn_summary(&deep_network(n, hidden, neuron)?, spec, Readout::Neuron, settings)?;
            Ok(SweepPoint {
                series: name.clone(),
                value: n as f64,
                summary,
                reference,
                ratio: summary / reference,
                analytic: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "layers".into(),
        reference,
        points,
    })
}

/// Transient long enough for the recurrent offset to settle: at least five
/// relaxation times `1 / (1 - alpha beta)`.
pub fn settling_transient(cfg: &RnnConfig) -> usize {
    let gain = cfg.neuron().alpha * cfg.beta();
    let settle = (5.0 / (1.0 - gain)).ceil() as usize;
    cfg.transient().max(settle)
}

/// Summary SNR versus recurrence strength, relative to `beta = 0` under
/// `reference_spec`.
///
/// The transient grows with beta (see [`settling_transient`]) while the number
/// of analysed steps, `settings.length - base.transient()`, stays fixed.
pub fn beta_sweep(
    betas: &[f64],
    variants: &[(String, NoiseSpec)],
    reference_spec: &NoiseSpec,
    base: &RnnConfig,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_increasing("beta", betas)?;
    if let Some(b) = betas.iter().find(|&&b| !(0.0..=MAX_SWEEP_BETA).contains(&b)) {
        return Err(Error::config(format!(
            "beta must lie in [0, {MAX_SWEEP_BETA}], got {b}"
        )));
    }
    if settings.length <= base.transient() {
        return Err(Error::config("input length must exceed the transient"));
    }
    let window = settings.length - base.transient();
    let run = |beta: f64, spec: &NoiseSpec| -> Result<f64> {
        let cfg = base.with_beta(beta)?;
        let cfg = cfg.with_transient(settling_transient(&cfg));
        let local = SweepSettings {
            length: cfg.transient() + window,
            ..*settings
        };
        rnn_summary(&cfg, spec, Readout::Neuron, &local)
    };
    let reference = run(0.0, reference_spec)?;
    let grid: Vec<(&String, &NoiseSpec, f64)> = variants
        .iter()
        .flat_map(|(name, spec)| betas.iter().map(move |&b| (name, spec, b)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(name, spec, beta)| {
            let summary = run(beta, spec)?;
            Ok(SweepPoint {
                series: name.clone(),
                value: beta,
                summary,
                reference,
                ratio: summary / reference,
                analytic: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "beta".into(),
        reference,
        points,
    })
}

fn with_inputs(cfg: &NetworkConfig, inputs: usize) -> Result<NetworkConfig> {
    Ok(match cfg {
        NetworkConfig::Fnn(c) => {
            let mut sizes = c.layer_sizes().to_vec();
            sizes[0] = inputs;
            let mut matrices = c.matrices().to_vec();
            matrices[0] = build_global_matrix(sizes[1], inputs)?;
            NetworkConfig::Fnn(FnnConfig::new(sizes, c.neuron(), matrices)?)
        }
        NetworkConfig::Rnn(c) => {
            let win = build_global_matrix(c.hidden_size(), inputs)?;
            NetworkConfig::Rnn(c.with_matrices(win, c.w().clone(), c.wout().clone())?)
        }
    })
}

fn network_summary(cfg: &NetworkConfig, spec: &NoiseSpec, readout: Readout, settings: &SweepSettings) -> Result<f64> {
    match cfg {
        NetworkConfig::Fnn(c) => fnn_summary(c, spec, readout, settings),
        NetworkConfig::Rnn(c) => rnn_summary(c, spec, readout, settings),
    }
}

/// Spec with every intensity of the output layer set to zero.
pub fn noiseless_readout(spec: &NoiseSpec, cfg: &NetworkConfig) -> Result<NoiseSpec> {
    spec.clone().with_override(cfg.n_layers(), NoiseIntensities::ZERO)
}

/// Summary SNR as the input layer is widened to `I_1` neurons that all
/// receive the same input, optionally with a noiseless output neuron.
/// Normalized by the single-input, noisy-readout network.
pub fn input_multiplex_sweep(
    i1_values: &[usize],
    cfg: &NetworkConfig,
    spec: &NoiseSpec,
    noiseless_output: bool,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    check_increasing("I1", &i1_values.iter().map(|&n| n as f64).collect::<Vec<_>>())?;
    if i1_values[0] == 0 {
        return Err(Error::config("input layer size must be positive"));
    }
    let reference = network_summary(&with_inputs(cfg, 1)?, spec, Readout::Neuron, settings)?;
    let point_spec = if noiseless_output {
        noiseless_readout(spec, cfg)?
    } else {
        spec.clone()
    };
    let series = if noiseless_output { "noiseless-readout" } else { "noisy-readout" };
    let points = i1_values
        .par_iter()
        .map(|&inputs| {
            let summary = network_summary(&with_inputs(cfg, inputs)?, &point_spec, Readout::Neuron, settings)?;
            Ok(SweepPoint {
                series: series.into(),
                value: inputs as f64,
                summary,
                reference,
                ratio: summary / reference,
                analytic: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: "input_neurons".into(),
        reference,
        points,
    })
}

/// Curve obtained by dropping the output neuron and averaging the last hidden
/// layer without further noise.
pub fn readout_averaging(cfg: &NetworkConfig, spec: &NoiseSpec, settings: &SweepSettings) -> Result<SnrCurve> {
    match cfg {
        NetworkConfig::Fnn(c) => {
            if c.layer_sizes()[c.n_layers() - 2] < 2 {
                return Err(Error::config("readout averaging needs at least two neurons to average"));
            }
            fnn_curve_mc(c, spec, Readout::Average, settings)
        }
        NetworkConfig::Rnn(c) => {
            if c.hidden_size() < 2 {
                return Err(Error::config("readout averaging needs at least two neurons to average"));
            }
            rnn_curve_mc(c, spec, Readout::Average, settings)
        }
    }
}

/// Readout-averaging summary next to the noiseless-readout summary on the same seeds.
pub fn readout_averaging_comparison(
    cfg: &NetworkConfig,
    spec: &NoiseSpec,
    settings: &SweepSettings,
) -> Result<SweepResult> {
    let reference = network_summary(cfg, &noiseless_readout(spec, cfg)?, Readout::Neuron, settings)?;
    let averaged = curve_summary(&readout_averaging(cfg, spec, settings)?, settings.band)?;
    let point = |series: &str, summary: f64| SweepPoint {
        series: series.into(),
        value: 0.0,
        summary,
        reference,
        ratio: summary / reference,
        analytic: None,
    };
    Ok(SweepResult {
        axis: "readout".into(),
        reference,
        points: vec![point("noiseless-readout", reference), point("readout-averaging", averaged)],
    })
}
