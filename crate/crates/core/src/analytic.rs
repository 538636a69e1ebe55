//! Closed-form mean and variance recursions for globally coupled networks with
//! a single input neuron and large hidden layers.
//!
//! Hidden layers average away their own uncorrelated noise (terms of order
//! `1/I` are dropped), so only correlated noise is passed on from layer to
//! layer. Input and output neurons contribute all four noise classes. Each
//! layer uses its own intensities, so per-layer overrides are honoured.

use crate::config::{FnnConfig, InputSignal, NeuronParams, RnnConfig};
use crate::error::{Error, Result};
use crate::noise::{NoiseIntensities, NoiseSpec};
use crate::simulator::{rnn_output_range, shifting_constant_fnn};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerStats {
    pub mean: f64,
    pub variance: f64,
    pub layer: usize,
    pub time: u64,
}

/// `(sigma2_add, sigma2_mult) = (2 D_CA + 2 D_UA, 2 D_CM + 2 D_UM + 4 D_CM D_UM)`.
pub fn sigma_terms(spec: &NoiseIntensities) -> (f64, f64) {
    (
        2.0 * spec.dc_a + 2.0 * spec.du_a,
        2.0 * spec.dc_m + 2.0 * spec.du_m + 4.0 * spec.dc_m * spec.du_m,
    )
}

/// Variance of a single noisy neuron whose clean output has the given moments.
fn neuron_variance(spec: &NoiseIntensities, mean: f64, clean_variance: f64) -> f64 {
    let (add, mult) = sigma_terms(spec);
    add + mult * mean * mean + (1.0 + mult) * clean_variance
}

/// Variance of the global average of a large layer: only correlated noise survives.
fn averaged_layer_variance(spec: &NoiseIntensities, mean: f64, clean_variance: f64) -> f64 {
    2.0 * spec.dc_a + 2.0 * spec.dc_m * mean * mean + (1.0 + 2.0 * spec.dc_m) * clean_variance
}

fn require_fnn_validity(cfg: &FnnConfig, spec: &NoiseSpec) -> Result<()> {
    if !cfg.is_global() {
        return Err(Error::NotApplicable(
            "the feed-forward recursions require global coupling in every matrix".into(),
        ));
    }
    if cfg.layer_sizes()[0] != 1 {
        return Err(Error::NotApplicable(
            "the feed-forward recursions assume a single input neuron".into(),
        ));
    }
    spec.check_layers(cfg.n_layers())
}

fn require_rnn_validity(cfg: &RnnConfig, spec: &NoiseSpec) -> Result<()> {
    if cfg.beta() * cfg.neuron().alpha >= 1.0 {
        return Err(Error::Divergent(format!(
            "recurrent gain alpha*beta = {} must stay below 1",
            cfg.beta() * cfg.neuron().alpha
        )));
    }
    if !cfg.is_global() {
        return Err(Error::NotApplicable(
            "the recurrent recursions require global coupling in every matrix".into(),
        ));
    }
    if cfg.input_size() != 1 {
        return Err(Error::NotApplicable(
            "the recurrent recursions assume a single input neuron".into(),
        ));
    }
    spec.check_layers(3)
}

/// Output mean and variance of the feed-forward network for input `u`.
pub fn fnn_stats(cfg: &FnnConfig, spec: &NoiseSpec, u: f64) -> Result<LayerStats> {
    require_fnn_validity(cfg, spec)?;
    let NeuronParams { alpha, bias } = cfg.neuron();
    let n_layers = cfg.n_layers();

    // layer 1 after noise
    let mut mean = u + bias;
    let first = spec.for_layer(1);
    let mut variance = neuron_variance(&first, mean, 0.0);

    // y'_2 = alpha (y_1 + b): the single input neuron is not averaged
    mean = alpha * (mean + bias);
    variance *= alpha * alpha;

    // y'_n for 2 < n < N, driven by the averaged layer n-1
    for n in 3..n_layers {
        let prev = spec.for_layer(n - 1);
        variance = alpha * alpha * averaged_layer_variance(&prev, mean, variance);
        mean = alpha * (mean + bias);
    }

    let out_mean = mean + bias;
    let clean = averaged_layer_variance(&spec.for_layer(n_layers - 1), mean, variance);
    Ok(LayerStats {
        mean: out_mean,
        variance: neuron_variance(&spec.for_layer(n_layers), out_mean, clean),
        layer: n_layers,
        time: 0,
    })
}

/// `(mean - shift) / sqrt(variance)`; infinite for zero variance.
pub fn fnn_snr(stats: &LayerStats, shift: f64) -> f64 {
    snr(stats.mean - shift, stats.variance)
}

fn snr(signal: f64, variance: f64) -> f64 {
    if variance > 0.0 {
        signal / variance.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Per-step output statistics of the recurrent network, `t = 1..=T`.
pub fn rnn_stats(cfg: &RnnConfig, spec: &NoiseSpec, input: &InputSignal) -> Result<Vec<LayerStats>> {
    require_rnn_validity(cfg, spec)?;
    let NeuronParams { alpha, bias } = cfg.neuron();
    let (beta, gamma) = (cfg.beta(), cfg.gamma());
    let (input_spec, hidden_spec, output_spec) = (spec.for_layer(1), spec.for_layer(2), spec.for_layer(3));

    let mut hidden_mean = 0.0;
    let mut hidden_var = 0.0;
    let mut out = Vec::with_capacity(input.len());
    for (step, &u) in input.values().iter().enumerate() {
        let in_mean = u + bias;
        let in_var = neuron_variance(&input_spec, in_mean, 0.0);
        // the cold-start state at t = 0 carries no noise
        let carried = if step == 0 {
            0.0
        } else {
            averaged_layer_variance(&hidden_spec, hidden_mean, hidden_var)
        };
        hidden_var = alpha * alpha * (gamma * gamma * in_var + beta * beta * carried);
        hidden_mean = alpha * (gamma * in_mean + beta * hidden_mean + bias);

        let out_mean = hidden_mean + bias;
        let clean = averaged_layer_variance(&hidden_spec, hidden_mean, hidden_var);
        out.push(LayerStats {
            mean: out_mean,
            variance: neuron_variance(&output_spec, out_mean, clean),
            layer: 3,
            time: step as u64 + 1,
        });
    }
    Ok(out)
}

/// `(E - y_min) / sqrt(Var)` per step: the renormalization scale cancels.
pub fn rnn_snr_renormalized(stats: &[LayerStats], y_min: f64, y_max: f64) -> Result<Vec<f64>> {
    if !(y_max > y_min) {
        return Err(Error::numerical(format!(
            "degenerate output range [{y_min}, {y_max}]"
        )));
    }
    let scale = y_max - y_min;
    Ok(stats
        .iter()
        .map(|s| snr((s.mean - y_min) / scale, s.variance / (scale * scale)))
        .collect())
}

/// One point of an analytic SNR curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub t: u64,
    pub mean: f64,
    pub variance: f64,
    /// Mean after removing the offset (feed-forward) or renormalizing (recurrent).
    pub mean_shifted: f64,
    pub snr: f64,
}

impl AnalyticPoint {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Analytic curve of a feed-forward network over an input sequence.
///
/// With `raw` the offset is not subtracted.
pub fn fnn_curve(cfg: &FnnConfig, spec: &NoiseSpec, input: &InputSignal, raw: bool) -> Result<Vec<AnalyticPoint>> {
    let shift = if raw {
        0.0
    } else {
        shifting_constant_fnn(cfg.n_layers(), cfg.neuron())?
    };
    input
        .values()
        .iter()
        .enumerate()
        .map(|(t, &u)| {
            let s = fnn_stats(cfg, spec, u)?;
            Ok(AnalyticPoint {
                t: t as u64 + 1,
                mean: s.mean,
                variance: s.variance,
                mean_shifted: s.mean - shift,
                snr: fnn_snr(&s, shift),
            })
        })
        .collect()
}

/// Analytic curve of a recurrent network for `t > transient`, renormalized by
/// the predicted output range (or unshifted with `raw`).
pub fn rnn_curve(cfg: &RnnConfig, spec: &NoiseSpec, input: &InputSignal, raw: bool) -> Result<Vec<AnalyticPoint>> {
    let stats = rnn_stats(cfg, spec, input)?;
    let (lo, hi) = rnn_output_range(cfg, input)?;
    let snrs = if raw {
        stats.iter().map(|s| snr(s.mean, s.variance)).collect()
    } else {
        rnn_snr_renormalized(&stats, lo, hi)?
    };
    Ok(stats
        .iter()
        .zip(snrs)
        .skip(cfg.transient())
        .map(|(s, snr)| AnalyticPoint {
            t: s.time,
            mean: s.mean,
            variance: s.variance,
            mean_shifted: if raw { s.mean } else { (s.mean - lo) / (hi - lo) },
            snr,
        })
        .collect())
}

/// Limit of the recurrent output variance under constant input `u`, from the
/// fixed point of the hidden recursion.
pub fn rnn_stationary_variance(cfg: &RnnConfig, spec: &NoiseSpec, u: f64) -> Result<f64> {
    require_rnn_validity(cfg, spec)?;
    let NeuronParams { alpha, bias } = cfg.neuron();
    let (beta, gamma) = (cfg.beta(), cfg.gamma());
    let hidden = spec.for_layer(2);
    let in_mean = u + bias;
    let in_var = neuron_variance(&spec.for_layer(1), in_mean, 0.0);
    let mean = alpha * (gamma * in_mean + bias) / (1.0 - alpha * beta);
    let gain = alpha * alpha * beta * beta;
    let contraction = gain * (1.0 + 2.0 * hidden.dc_m);
    if contraction >= 1.0 {
        return Err(Error::Divergent(format!(
            "variance recursion gain {contraction} is not contracting"
        )));
    }
    // V = a^2 g^2 Vin + a^2 b^2 (2 DCA + 2 DCM m^2 + (1 + 2 DCM) V)
    let var = (alpha * alpha * gamma * gamma * in_var
        + gain * (2.0 * hidden.dc_a + 2.0 * hidden.dc_m * mean * mean))
        / (1.0 - contraction);
    let out_mean = mean + bias;
    let clean = averaged_layer_variance(&hidden, mean, var);
    Ok(neuron_variance(&spec.for_layer(3), out_mean, clean))
}
