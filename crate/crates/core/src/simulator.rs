//! Noisy forward evaluation of feed-forward and recurrent networks.
//!
//! Layer indices are 1-based throughout: in a feed-forward network layer 1 is
//! the input neuron(s) and layer N the output neuron; in a recurrent network
//! layer 1 is the input, layer 2 the recurrent hidden layer and layer 3 the
//! output. These are the `n` components of every [`NoiseIndex`] drawn here.
//!
//! [`NoiseIndex`]: crate::noise::NoiseIndex

use crate::config::{FnnConfig, InputSignal, NeuronParams, RnnConfig};
use crate::error::{Error, Result};
use crate::noise::{LayerNoise, NoiseIntensities, NoiseSpec};

/// Post-noise outputs of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub values: Vec<f64>,
    pub layer: usize,
    pub time: u64,
    pub repetition: u64,
}

/// What the network reports as its scalar output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// The final layer's single (noisy) neuron.
    #[default]
    Neuron,
    /// Drops the output neuron and reports the noiseless average of the last
    /// hidden layer plus the bias.
    Average,
}

/// A network that produces one scalar output per time step.
pub trait Network: Sync {
    /// Noisy outputs for `t = 1..=T` in repetition `k` (1-based).
    fn run(&self, input: &[f64], k: u64) -> Vec<f64>;

    /// Outputs with every noise intensity set to zero.
    fn run_noiseless(&self, input: &[f64]) -> Vec<f64>;

    /// Whether any noise source is active.
    fn is_noisy(&self) -> bool;
}

fn average(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() * (1.0 / values.len() as f64)
}

#[derive(Debug, Clone)]
struct FnnBuffers {
    current: Vec<f64>,
    next: Vec<f64>,
}

impl FnnBuffers {
    fn new(cfg: &FnnConfig) -> Self {
        let widest = cfg.layer_sizes().iter().copied().max().unwrap_or(1);
        Self {
            current: Vec::with_capacity(widest),
            next: Vec::with_capacity(widest),
        }
    }
}

/// One full pass; leaves the final layer (or the readout average) in `bufs.current`.
#[allow(clippy::too_many_arguments)]
fn fnn_pass(
    cfg: &FnnConfig,
    spec: &NoiseSpec,
    u: f64,
    t: u64,
    k: u64,
    seed: u64,
    readout: Readout,
    bufs: &mut FnnBuffers,
) {
    let NeuronParams { alpha, bias } = cfg.neuron();
    let sizes = cfg.layer_sizes();
    let n_layers = sizes.len();

    let noise = LayerNoise::new(spec.for_layer(1), seed, t, k, 1);
    bufs.current.clear();
    bufs.current
        .extend((1..=sizes[0] as u32).map(|i| noise.apply(u + bias, i)));

    let last_hidden = n_layers - 1;
    for n in 2..=last_hidden {
        let w = cfg.matrix_into(n);
        bufs.next.clear();
        bufs.next.resize(sizes[n - 1], 0.0);
        w.mul_vec(&bufs.current, &mut bufs.next);
        let noise = LayerNoise::new(spec.for_layer(n), seed, t, k, n as u32);
        for (i, x) in bufs.next.iter_mut().enumerate() {
            *x = noise.apply(alpha * (*x + bias), i as u32 + 1);
        }
        std::mem::swap(&mut bufs.current, &mut bufs.next);
    }

    match readout {
        Readout::Neuron => {
            let w = cfg.matrix_into(n_layers);
            bufs.next.clear();
            bufs.next.resize(1, 0.0);
            w.mul_vec(&bufs.current, &mut bufs.next);
            let noise = LayerNoise::new(spec.for_layer(n_layers), seed, t, k, n_layers as u32);
            let y = noise.apply(bufs.next[0] + bias, 1);
            bufs.current.clear();
            bufs.current.push(y);
        }
        Readout::Average => {
            let y = average(&bufs.current) + bias;
            bufs.current.clear();
            bufs.current.push(y);
        }
    }
}

/// Evaluates the feed-forward network for input `u` at time `t`, repetition `k`.
///
/// Layer 1 emits `u + b`, hidden layers `alpha (W y + b)`, the output layer
/// `W y + b`; every layer is then perturbed by its noise.
pub fn fnn_forward(cfg: &FnnConfig, spec: &NoiseSpec, u: f64, t: u64, k: u64, seed: u64) -> Result<LayerState> {
    spec.check_layers(cfg.n_layers())?;
    if !u.is_finite() {
        return Err(Error::config("input must be finite"));
    }
    let mut bufs = FnnBuffers::new(cfg);
    fnn_pass(cfg, spec, u, t, k, seed, Readout::Neuron, &mut bufs);
    Ok(LayerState {
        values: bufs.current,
        layer: cfg.n_layers(),
        time: t,
        repetition: k,
    })
}

/// Output offset of a noiseless zero-input pass through a globally coupled
/// network of `n_layers` layers.
pub fn shifting_constant_fnn(n_layers: usize, p: NeuronParams) -> Result<f64> {
    if n_layers < 3 {
        return Err(Error::config(format!(
            "shifting constant needs at least 3 layers, got {n_layers}"
        )));
    }
    p.validate()?;
    // every neuron of a globally coupled layer carries the same value
    let mut y = p.bias;
    for _ in 2..n_layers {
        y = p.alpha * (y + p.bias);
    }
    Ok(y + p.bias)
}

/// `C_N = b (1 + 2 alpha^(N-2)) + b sum_{j=1}^{N-3} alpha^j`.
pub fn shifting_constant_closed_form(n_layers: usize, p: NeuronParams) -> Result<f64> {
    if n_layers < 3 {
        return Err(Error::config(format!(
            "shifting constant needs at least 3 layers, got {n_layers}"
        )));
    }
    let b = p.bias;
    let a = p.alpha;
    let sum: f64 = (1..=n_layers as i32 - 3).map(|j| a.powi(j)).sum();
    Ok(b * (1.0 + 2.0 * a.powi(n_layers as i32 - 2)) + b * sum)
}

/// Runs a feed-forward network over an input sequence.
#[derive(Debug, Clone)]
pub struct FnnRunner {
    cfg: FnnConfig,
    spec: NoiseSpec,
    seed: u64,
    readout: Readout,
}

impl FnnRunner {
    pub fn new(cfg: FnnConfig, spec: NoiseSpec, seed: u64) -> Result<Self> {
        spec.check_layers(cfg.n_layers())?;
        Ok(Self {
            cfg,
            spec,
            seed,
            readout: Readout::Neuron,
        })
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn config(&self) -> &FnnConfig {
        &self.cfg
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    fn run_with(&self, spec: &NoiseSpec, input: &[f64], k: u64) -> Vec<f64> {
        let mut bufs = FnnBuffers::new(&self.cfg);
        input
            .iter()
            .enumerate()
            .map(|(t, &u)| {
                fnn_pass(&self.cfg, spec, u, t as u64 + 1, k, self.seed, self.readout, &mut bufs);
                bufs.current[0]
            })
            .collect()
    }
}

impl Network for FnnRunner {
    fn run(&self, input: &[f64], k: u64) -> Vec<f64> {
        self.run_with(&self.spec, input, k)
    }

    fn run_noiseless(&self, input: &[f64]) -> Vec<f64> {
        self.run_with(&NoiseSpec::noiseless(), input, 1)
    }

    fn is_noisy(&self) -> bool {
        // the readout-average variant never evaluates layer N
        let layers = match self.readout {
            Readout::Neuron => self.cfg.n_layers(),
            Readout::Average => self.cfg.n_layers() - 1,
        };
        self.spec.is_active(layers)
    }
}

#[derive(Debug, Clone)]
struct RnnBuffers {
    input: Vec<f64>,
    drive: Vec<f64>,
    recurrent: Vec<f64>,
    out: [f64; 1],
}

impl RnnBuffers {
    fn new(cfg: &RnnConfig) -> Self {
        Self {
            input: vec![0.0; cfg.input_size()],
            drive: vec![0.0; cfg.hidden_size()],
            recurrent: vec![0.0; cfg.hidden_size()],
            out: [0.0],
        }
    }
}

/// Advances `hidden` in place from time `t-1` to `t` and returns the output.
#[allow(clippy::too_many_arguments)]
fn rnn_advance(
    cfg: &RnnConfig,
    spec: &NoiseSpec,
    hidden: &mut [f64],
    u: f64,
    t: u64,
    k: u64,
    seed: u64,
    readout: Readout,
    bufs: &mut RnnBuffers,
) -> f64 {
    let NeuronParams { alpha, bias } = cfg.neuron();
    let (beta, gamma) = (cfg.beta(), cfg.gamma());

    let noise = LayerNoise::new(spec.for_layer(1), seed, t, k, 1);
    for (i, y) in bufs.input.iter_mut().enumerate() {
        *y = noise.apply(u + bias, i as u32 + 1);
    }
    cfg.win().mul_vec(&bufs.input, &mut bufs.drive);
    cfg.w().mul_vec(hidden, &mut bufs.recurrent);

    let noise = LayerNoise::new(spec.for_layer(2), seed, t, k, 2);
    for (i, ((h, x_in), x_rec)) in hidden
        .iter_mut()
        .zip(&bufs.drive)
        .zip(&bufs.recurrent)
        .enumerate()
    {
        *h = noise.apply(alpha * (gamma * x_in + beta * x_rec + bias), i as u32 + 1);
    }

    match readout {
        Readout::Neuron => {
            cfg.wout().mul_vec(hidden, &mut bufs.out);
            LayerNoise::new(spec.for_layer(3), seed, t, k, 3).apply(bufs.out[0] + bias, 1)
        }
        Readout::Average => average(hidden) + bias,
    }
}

/// One recurrent update: input neuron(s) `u + b`, hidden layer
/// `alpha (gamma W_in y_1 + beta W y_2 + b)`, output `W_out y_2 + b`, each noised.
pub fn rnn_step(
    cfg: &RnnConfig,
    spec: &NoiseSpec,
    state: &LayerState,
    u: f64,
    t: u64,
    k: u64,
    seed: u64,
) -> Result<(LayerState, f64)> {
    spec.check_layers(3)?;
    if state.values.len() != cfg.hidden_size() {
        return Err(Error::config(format!(
            "hidden state has {} values, network has {} hidden neurons",
            state.values.len(),
            cfg.hidden_size()
        )));
    }
    let mut bufs = RnnBuffers::new(cfg);
    let mut hidden = state.values.clone();
    let y = rnn_advance(cfg, spec, &mut hidden, u, t, k, seed, Readout::Neuron, &mut bufs);
    Ok((
        LayerState {
            values: hidden,
            layer: 2,
            time: t,
            repetition: k,
        },
        y,
    ))
}

/// The cold-start hidden state at `t = 0`.
pub fn rnn_initial_state(cfg: &RnnConfig, k: u64) -> LayerState {
    LayerState {
        values: vec![0.0; cfg.hidden_size()],
        layer: 2,
        time: 0,
        repetition: k,
    }
}

#[derive(Debug, Clone)]
pub struct RnnRunner {
    cfg: RnnConfig,
    spec: NoiseSpec,
    seed: u64,
    readout: Readout,
}

impl RnnRunner {
    pub fn new(cfg: RnnConfig, spec: NoiseSpec, seed: u64) -> Result<Self> {
        spec.check_layers(3)?;
        Ok(Self {
            cfg,
            spec,
            seed,
            readout: Readout::Neuron,
        })
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn config(&self) -> &RnnConfig {
        &self.cfg
    }

    fn run_with(&self, spec: &NoiseSpec, input: &[f64], k: u64) -> Vec<f64> {
        let mut bufs = RnnBuffers::new(&self.cfg);
        let mut hidden = vec![0.0; self.cfg.hidden_size()];
        input
            .iter()
            .enumerate()
            .map(|(t, &u)| {
                rnn_advance(&self.cfg, spec, &mut hidden, u, t as u64 + 1, k, self.seed, self.readout, &mut bufs)
            })
            .collect()
    }
}

impl Network for RnnRunner {
    fn run(&self, input: &[f64], k: u64) -> Vec<f64> {
        self.run_with(&self.spec, input, k)
    }

    fn run_noiseless(&self, input: &[f64]) -> Vec<f64> {
        self.run_with(&NoiseSpec::noiseless(), input, 1)
    }

    fn is_noisy(&self) -> bool {
        let layers = match self.readout {
            Readout::Neuron => 3,
            Readout::Average => 2,
        };
        self.spec.is_active(layers)
    }
}

/// A lone noisy neuron `y' = alpha (u + b)`.
#[derive(Debug, Clone)]
pub struct SingleNeuron {
    neuron: NeuronParams,
    spec: NoiseIntensities,
    seed: u64,
}

impl SingleNeuron {
    pub fn new(neuron: NeuronParams, spec: NoiseIntensities, seed: u64) -> Result<Self> {
        neuron.validate()?;
        spec.validate()?;
        Ok(Self { neuron, spec, seed })
    }

    fn run_with(&self, spec: NoiseIntensities, input: &[f64], k: u64) -> Vec<f64> {
        let NeuronParams { alpha, bias } = self.neuron;
        input
            .iter()
            .enumerate()
            .map(|(t, &u)| LayerNoise::new(spec, self.seed, t as u64 + 1, k, 1).apply(alpha * (u + bias), 1))
            .collect()
    }
}

impl Network for SingleNeuron {
    fn run(&self, input: &[f64], k: u64) -> Vec<f64> {
        self.run_with(self.spec, input, k)
    }

    fn run_noiseless(&self, input: &[f64]) -> Vec<f64> {
        self.run_with(NoiseIntensities::ZERO, input, 1)
    }

    fn is_noisy(&self) -> bool {
        !self.spec.is_zero()
    }
}

/// Noiseless mean output `E(y_3^t)` from the scalar recursion
/// `E(y'_2^t) = alpha (gamma (u^t + b) + beta E(y'_2^{t-1}) + b)`, `E(y_3^t) = E(y'_2^t) + b`.
///
/// Exact for global coupling; other matrices need [`Network::run_noiseless`].
pub fn rnn_mean_trace(cfg: &RnnConfig, input: &InputSignal) -> Vec<f64> {
    let NeuronParams { alpha, bias } = cfg.neuron();
    let mut hidden = 0.0;
    input
        .values()
        .iter()
        .map(|&u| {
            hidden = alpha * (cfg.gamma() * (u + bias) + cfg.beta() * hidden + bias);
            hidden + bias
        })
        .collect()
}

/// Minimum and maximum of a trace over `t in (transient, T]`.
pub fn trace_range(trace: &[f64], transient: usize) -> Result<(f64, f64)> {
    if trace.len() <= transient {
        return Err(Error::config(format!(
            "input length {} does not exceed the transient {transient}",
            trace.len()
        )));
    }
    Ok(trace[transient..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y))))
}

/// Predicted output range `(y_min, y_max)` after the transient.
pub fn rnn_output_range(cfg: &RnnConfig, input: &InputSignal) -> Result<(f64, f64)> {
    trace_range(&rnn_mean_trace(cfg, input), cfg.transient())
}

/// `(y - y_min) / (y_max - y_min)`.
pub fn renormalize(y: f64, y_min: f64, y_max: f64) -> Result<f64> {
    if !(y_max > y_min) {
        return Err(Error::numerical(format!(
            "degenerate output range [{y_min}, {y_max}]"
        )));
    }
    Ok((y - y_min) / (y_max - y_min))
}
