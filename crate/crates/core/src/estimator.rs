//! Monte-Carlo SNR estimation over repeated runs of the same input sequence.
//!
//! Repetitions run in parallel; the per-step reductions walk the repetitions in
//! index order with a fixed pairwise tree, so results do not depend on the
//! thread count.

use rayon::prelude::*;

use crate::analytic::AnalyticPoint;
use crate::config::InputSignal;
use crate::error::{Error, Result};
use crate::simulator::{trace_range, Network};

/// Default band of shifted means used by [`curve_summary`].
pub const DEFAULT_BAND: (f64, f64) = (0.1, 0.9);
/// Minimum number of in-band points for a summary.
pub const MIN_SUMMARY_POINTS: usize = 10;

/// How the mean is shifted before forming the SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftMode {
    /// Subtract the noiseless zero-input output.
    Constant,
    /// Drop `t <= transient` and renormalize by the noiseless trace's range.
    Range { transient: usize },
    /// Use the raw mean.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: u64,
    pub mean_raw: f64,
    pub mean_shifted: f64,
    pub std: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveMeta {
    pub repetitions: usize,
    pub length: usize,
    pub shift: ShiftMode,
    /// Offset subtracted (constant mode) or `y_min` (range mode).
    pub offset: f64,
    /// Range width used for renormalization; 1 otherwise.
    pub scale: f64,
    /// Every standard deviation is zero because no noise source is active.
    pub noiseless: bool,
    /// Some standard deviation is zero although noise is active.
    pub anomaly: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrCurve {
    pub points: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

/// Fixed-topology pairwise sum.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean and unbiased (divisor `K - 1`) standard deviation.
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    if samples.iter().all(|&x| x == samples[0]) {
        return (samples[0], 0.0);
    }
    let mean = pairwise_sum(samples) / n;
    let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0)).sqrt())
}

/// Runs `repetitions` noisy replications of `input` and forms the per-step SNR.
pub fn monte_carlo_curve<N: Network + ?Sized>(
    network: &N,
    input: &InputSignal,
    repetitions: usize,
    shift: ShiftMode,
) -> Result<SnrCurve> {
    if repetitions < 2 {
        return Err(Error::config(format!(
            "at least 2 repetitions are needed for a standard deviation, got {repetitions}"
        )));
    }
    let u = input.values();
    let (first, offset, scale) = match shift {
        ShiftMode::None => (0, 0.0, 1.0),
        ShiftMode::Constant => (0, network.run_noiseless(&[0.0])[0], 1.0),
        ShiftMode::Range { transient } => {
            let (lo, hi) = trace_range(&network.run_noiseless(u), transient)?;
            if !(hi > lo) {
                return Err(Error::numerical(format!(
                    "degenerate output range [{lo}, {hi}]"
                )));
            }
            (transient, lo, hi - lo)
        }
    };

    let runs: Vec<Vec<f64>> = (1..=repetitions as u64)
        .into_par_iter()
        .map(|k| network.run(u, k))
        .collect();

    let mut column = vec![0.0; repetitions];
    let points: Vec<CurvePoint> = (first..u.len())
        .map(|t| {
            for (c, run) in column.iter_mut().zip(&runs) {
                *c = run[t];
            }
            let (mean, std_raw) = mean_std(&column);
            let mean_shifted = (mean - offset) / scale;
            let std = std_raw / scale;
            CurvePoint {
                t: t as u64 + 1,
                mean_raw: mean,
                mean_shifted,
                std,
                snr: if std > 0.0 { mean_shifted / std } else { f64::INFINITY },
            }
        })
        .collect();

    let noisy = network.is_noisy();
    let any_zero = points.iter().any(|p| p.std == 0.0);
    Ok(SnrCurve {
        meta: CurveMeta {
            repetitions,
            length: u.len(),
            shift,
            offset,
            scale,
            noiseless: !noisy,
            anomaly: noisy && any_zero,
        },
        points,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median SNR over points whose shifted mean lies strictly inside `band`.
pub fn curve_summary(curve: &SnrCurve, band: (f64, f64)) -> Result<f64> {
    summarize(curve.points.iter().map(|p| (p.mean_shifted, p.snr)), band)
}

/// [`curve_summary`] for an analytic curve.
pub fn analytic_summary(points: &[AnalyticPoint], band: (f64, f64)) -> Result<f64> {
    summarize(points.iter().map(|p| (p.mean_shifted, p.snr)), band)
}

fn summarize(points: impl Iterator<Item = (f64, f64)>, band: (f64, f64)) -> Result<f64> {
    let in_band: Vec<f64> = points
        .filter(|(m, _)| *m > band.0 && *m < band.1)
        .map(|(_, s)| s)
        .collect();
    if in_band.len() < MIN_SUMMARY_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points inside ({}, {}), need {MIN_SUMMARY_POINTS}",
            in_band.len(),
            band.0,
            band.1
        )));
    }
    Ok(median(in_band))
}

/// Relative deviations between a Monte-Carlo curve and its analytic prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub std_max: f64,
    pub std_median: f64,
    pub snr_max: f64,
    pub snr_median: f64,
    pub points: usize,
    pub snr_points: usize,
}

impl Deviation {
    pub fn within(&self, tolerance: f64) -> bool {
        self.std_max <= tolerance && self.snr_max <= tolerance
    }
}

fn rel_dev(measured: f64, expected: f64) -> f64 {
    if measured == expected {
        0.0
    } else {
        (measured - expected).abs() / expected.abs()
    }
}

/// Compares per-step raw standard deviations over every shared step, and SNRs over
/// the steps whose analytic shifted mean lies inside `band` (outside it the
/// SNR is dominated by the sampling error of a near-zero numerator).
pub fn compare_curves(mc: &SnrCurve, analytic: &[AnalyticPoint], band: (f64, f64)) -> Result<Deviation> {
    let mut std_dev = Vec::new();
    let mut snr_dev = Vec::new();
    let mut a_iter = analytic.iter().peekable();
    for p in &mc.points {
        while a_iter.peek().is_some_and(|a| a.t < p.t) {
            a_iter.next();
        }
        let Some(a) = a_iter.peek() else { break };
        if a.t != p.t {
            continue;
        }
        std_dev.push(rel_dev(p.std * mc.meta.scale, a.std()));
        if a.mean_shifted > band.0 && a.mean_shifted < band.1 {
            snr_dev.push(rel_dev(p.snr, a.snr));
        }
    }
    if std_dev.is_empty() {
        return Err(Error::InsufficientData("curves share no time step".into()));
    }
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let (std_points, snr_points) = (std_dev.len(), snr_dev.len());
    Ok(Deviation {
        std_max: max(&std_dev),
        std_median: median(std_dev),
        snr_max: max(&snr_dev),
        snr_median: if snr_dev.is_empty() { 0.0 } else { median(snr_dev) },
        points: std_points,
        snr_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FnnConfig, NeuronParams};
    use crate::noise::{NoiseIntensities, NoiseSpec};
    use crate::simulator::{FnnRunner, SingleNeuron};

    fn synthetic(points: Vec<(f64, f64)>) -> SnrCurve {
        SnrCurve {
            points: points
                .into_iter()
                .enumerate()
                .map(|(t, (m, s))| CurvePoint { t: t as u64 + 1, mean_raw: m, mean_shifted: m, std: 1.0, snr: s })
                .collect(),
            meta: CurveMeta {
                repetitions: 2,
                length: 0,
                shift: ShiftMode::None,
                offset: 0.0,
                scale: 1.0,
                noiseless: false,
                anomaly: false,
            },
        }
    }

    #[test]
    fn too_few_repetitions() {
        let net = SingleNeuron::new(NeuronParams::default(), NoiseIntensities::ZERO, 1).unwrap();
        let input = InputSignal::uniform(10, 1).unwrap();
        assert!(matches!(
            monte_carlo_curve(&net, &input, 1, ShiftMode::None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn noiseless_curve_is_flagged() {
        let net = FnnRunner::new(FnnConfig::reference(), NoiseSpec::noiseless(), 1).unwrap();
        let input = InputSignal::uniform(20, 1).unwrap();
        let c = monte_carlo_curve(&net, &input, 4, ShiftMode::Constant).unwrap();
        assert!(c.meta.noiseless && !c.meta.anomaly);
        for (p, &u) in c.points.iter().zip(input.values()) {
            assert_eq!(p.std, 0.0);
            assert_eq!(p.snr, f64::INFINITY);
            // alpha = 1: the shifted mean is the input itself
            assert!((p.mean_shifted - u).abs() < 1e-12);
        }
    }

    #[test]
    fn summary_of_constant_curve() {
        let c = synthetic((0..50).map(|j| (0.01 + j as f64 / 50.0, 22.0)).collect());
        assert_eq!(curve_summary(&c, DEFAULT_BAND).unwrap(), 22.0);
    }

    #[test]
    fn summary_of_linear_curve() {
        // snr = 70.71 * mean with uniform means: the median mean in (0.1, 0.9) is 0.5
        let c = synthetic((0..1001).map(|j| (j as f64 / 1000.0, 70.71 * j as f64 / 1000.0)).collect());
        assert!((curve_summary(&c, DEFAULT_BAND).unwrap() - 35.355).abs() < 0.1);
    }

    #[test]
    fn summary_needs_points_in_band() {
        let c = synthetic((0..50).map(|_| (2.0, 1.0)).collect());
        assert!(matches!(curve_summary(&c, DEFAULT_BAND), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let v: Vec<f64> = (0..10_000).map(|j| 0.1 + j as f64 * 1e-6).collect();
        let exact: f64 = 10_000.0 * 0.1 + 1e-6 * (9_999.0 * 10_000.0 / 2.0);
        assert!((pairwise_sum(&v) - exact).abs() < 1e-9);
    }

    #[test]
    fn unbiased_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = NoiseSpec::uniform(1e-4, 1e-4, 1e-3, 1e-3).unwrap();
        let cfg = FnnConfig::global(vec![1, 30, 30, 1], NeuronParams::default()).unwrap();
        let net = FnnRunner::new(cfg, spec, 77).unwrap();
        let input = InputSignal::uniform(30, 2).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_curve(&net, &input, 64, ShiftMode::Constant).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
