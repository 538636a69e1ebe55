use std::fmt::Write;

use noisenet::analytic::{fnn_curve, rnn_curve, AnalyticPoint};
use noisenet::estimator::{compare_curves, monte_carlo_curve, ShiftMode, SnrCurve, DEFAULT_BAND};
use noisenet::experiments::{self as ex, MatrixTarget, NetworkConfig, Seeds, SweepResult, SweepSettings};
use noisenet::noise::NoiseSpec;
use noisenet::simulator::{FnnRunner, RnnRunner};

use crate::config::{Intensities, Network, RunConfig, TargetSpec};
use crate::{CliError, SweepKind};

/// Locale-independent float with 17 significant digits; `inf`/`nan` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn mc_curve(cfg: &RunConfig, raw: bool) -> Result<SnrCurve, CliError> {
    let input = cfg.input_signal()?;
    let spec = cfg.noise()?;
    let shift = if raw { ShiftMode::None } else { cfg.shift() };
    let (k, seed) = (cfg.run.repetitions, cfg.run.noise_seed);
    Ok(match cfg.build()? {
        Network::Fnn(f) => monte_carlo_curve(&FnnRunner::new(f, spec, seed)?, &input, k, shift)?,
        Network::Rnn(r) => monte_carlo_curve(&RnnRunner::new(r, spec, seed)?, &input, k, shift)?,
    })
}

fn analytic_curve(cfg: &RunConfig, raw: bool) -> Result<Vec<AnalyticPoint>, CliError> {
    let input = cfg.input_signal()?;
    let spec = cfg.noise()?;
    Ok(match cfg.build()? {
        Network::Fnn(f) => fnn_curve(&f, &spec, &input, raw)?,
        Network::Rnn(r) => rnn_curve(&r, &spec, &input, raw)?,
    })
}

pub fn simulate(cfg: &RunConfig, raw: bool) -> Result<String, CliError> {
    let curve = mc_curve(cfg, raw)?;
    let mut out = String::from("t,mean_raw,mean_shifted,std,snr\n");
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.t,
            fmt_f64(p.mean_raw),
            fmt_f64(p.mean_shifted),
            fmt_f64(p.std),
            fmt_f64(p.snr)
        );
    }
    if curve.meta.anomaly {
        eprintln!("noisenet: warning: zero standard deviation at some step although noise is active");
    }
    Ok(out)
}

pub fn analytic(cfg: &RunConfig, raw: bool) -> Result<String, CliError> {
    let mut out = String::from("t,mean,variance,snr\n");
    for p in analytic_curve(cfg, raw)? {
        let _ = writeln!(out, "{},{},{},{}", p.t, fmt_f64(p.mean), fmt_f64(p.variance), fmt_f64(p.snr));
    }
    Ok(out)
}

/// Deviation report and whether it is within `tolerance`.
pub fn compare(cfg: &RunConfig, tolerance: f64) -> Result<(String, bool), CliError> {
    let analytic = analytic_curve(cfg, false)?;
    let mc = mc_curve(cfg, false)?;
    let d = compare_curves(&mc, &analytic, DEFAULT_BAND)?;
    let ok = d.within(tolerance);
    let mut out = String::new();
    let _ = writeln!(out, "repetitions {} steps {}", cfg.run.repetitions, d.points);
    let _ = writeln!(out, "std relative deviation: max {:.4e} median {:.4e} over {} steps", d.std_max, d.std_median, d.points);
    let _ = writeln!(
        out,
        "snr relative deviation: max {:.4e} median {:.4e} over {} steps in ({}, {})",
        d.snr_max, d.snr_median, d.snr_points, DEFAULT_BAND.0, DEFAULT_BAND.1
    );
    if d.std_max == 0.0 && d.snr_max == 0.0 {
        let _ = writeln!(out, "exact match");
    }
    let _ = writeln!(out, "tolerance {tolerance}: {}", if ok { "PASS" } else { "FAIL" });
    Ok((out, ok))
}

fn variants(cfg: &RunConfig) -> Result<Vec<(String, NoiseSpec)>, CliError> {
    if cfg.sweep.variants.is_empty() {
        return Ok(vec![("base".into(), cfg.noise()?)]);
    }
    cfg.sweep
        .variants
        .iter()
        .map(|v| {
            let i = Intensities {
                du_a: v.du_a,
                dc_a: v.dc_a,
                du_m: v.du_m,
                dc_m: v.dc_m,
            };
            Ok((v.name.clone(), NoiseSpec::new(i.to_domain()?)?))
        })
        .collect()
}

fn reference(cfg: &RunConfig) -> Result<NoiseSpec, CliError> {
    let i = cfg.sweep.reference.unwrap_or(Intensities {
        dc_a: 0.0,
        dc_m: 0.0,
        ..cfg.noise.base()
    });
    Ok(NoiseSpec::new(i.to_domain()?)?)
}

fn need_fnn(net: Network, kind: SweepKind) -> Result<noisenet::FnnConfig, CliError> {
    match net {
        Network::Fnn(f) => Ok(f),
        Network::Rnn(_) => Err(CliError::Config(format!("sweep {kind:?} needs a feed-forward network"))),
    }
}

fn need_rnn(net: Network, kind: SweepKind) -> Result<noisenet::RnnConfig, CliError> {
    match net {
        Network::Rnn(r) => Ok(r),
        Network::Fnn(_) => Err(CliError::Config(format!("sweep {kind:?} needs a recurrent network"))),
    }
}

pub fn sweep(cfg: &RunConfig, kind: SweepKind) -> Result<String, CliError> {
    let settings = SweepSettings::new(
        cfg.run.repetitions,
        cfg.length(),
        Seeds {
            matrix: cfg.connectivity.seed,
            input: cfg.input.seed,
            noise: cfg.run.noise_seed,
        },
    );
    let s = &cfg.sweep;
    let default_rhos = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0];
    let rhos = s.rhos.clone().unwrap_or_else(|| default_rhos.to_vec());
    let spec = cfg.noise()?;
    let net = cfg.build()?;
    let result: SweepResult = match kind {
        SweepKind::FnnConnectivity => {
            let target = match s.target.unwrap_or(TargetSpec::Hidden) {
                TargetSpec::Hidden => MatrixTarget::Hidden,
                TargetSpec::Readout => MatrixTarget::Readout,
            };
            ex::fnn_connectivity_sweep(&need_fnn(net, kind)?, &spec, target, &rhos, &settings)?
        }
        SweepKind::RnnConnectivity => {
            let betas = s.betas.clone().unwrap_or_else(|| vec![0.5, 0.9]);
            ex::rnn_connectivity_sweep(&need_rnn(net, kind)?, &spec, &rhos, &betas, &settings)?
        }
        SweepKind::Depth => {
            let f = need_fnn(net, kind)?;
            let (neuron, hidden) = (f.neuron(), s.hidden_size.unwrap_or(f.layer_sizes()[1]));
            let layers = s.layers.clone().unwrap_or_else(|| ex::DEPTH_GRID.to_vec());
            ex::depth_sweep(&layers, &variants(cfg)?, &reference(cfg)?, neuron, hidden, &settings)?
        }
        SweepKind::Beta => {
            let betas = s.betas.clone().unwrap_or_else(|| ex::BETA_GRID.to_vec());
            ex::beta_sweep(&betas, &variants(cfg)?, &reference(cfg)?, &need_rnn(net, kind)?, &settings)?
        }
        SweepKind::Multiplex => {
            let i1 = s.i1_values.clone().unwrap_or_else(|| vec![1, 2, 5, 10, 50]);
            if let Some(&bad) = i1.iter().find(|&&n| !(1..=200).contains(&n)) {
                return Err(CliError::Config(format!("at `sweep.i1_values`: {bad} outside [1, 200]")));
            }
            ex::input_multiplex_sweep(&i1, &network_config(net), &spec, s.noiseless_readout, &settings)?
        }
        SweepKind::ReadoutAveraging => ex::readout_averaging_comparison(&network_config(net), &spec, &settings)?,
    };
    Ok(sweep_csv(&result))
}

fn network_config(net: Network) -> NetworkConfig {
    match net {
        Network::Fnn(f) => NetworkConfig::Fnn(f),
        Network::Rnn(r) => NetworkConfig::Rnn(r),
    }
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let mut out = format!("series,{},summary,ratio\n", r.axis);
    for p in &r.points {
        let _ = writeln!(out, "{},{},{},{}", p.series, p.value, fmt_f64(p.summary), fmt_f64(p.ratio));
    }
    out
}
