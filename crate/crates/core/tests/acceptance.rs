//! Acceptance criteria. Run with `cargo test -p noisenet --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use noisenet::analytic::{fnn_curve, rnn_curve};
use noisenet::estimator::{compare_curves, curve_summary, monte_carlo_curve, Deviation, ShiftMode, DEFAULT_BAND};
use noisenet::experiments::{
    depth_sweep, fnn_connectivity_sweep, fnn_curve_mc, input_multiplex_sweep, readout_averaging_comparison,
    rnn_curve_mc, MatrixTarget, NetworkConfig, Seeds, SweepSettings, DEPTH_GRID,
};
use noisenet::noise::{LayerNoise, NoiseIndex};
use noisenet::simulator::{
    rnn_mean_trace, shifting_constant_closed_form, shifting_constant_fnn, FnnRunner, Network, Readout, RnnRunner,
    SingleNeuron,
};
use noisenet::{FnnConfig, InputSignal, NeuronParams, NoiseIntensities, NoiseSpec, RnnConfig};

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: String) -> Line {
    Line { id, pass, detail }
}

fn settings(k: usize, t: usize) -> SweepSettings {
    SweepSettings::new(k, t, Seeds::default())
}

fn spec(du_a: f64, dc_a: f64, du_m: f64, dc_m: f64) -> NoiseSpec {
    NoiseSpec::uniform(du_a, dc_a, du_m, dc_m).unwrap()
}

/// Additive, multiplicative and mixed noise, each uncorrelated and correlated.
fn six_configs() -> Vec<(&'static str, NoiseSpec)> {
    vec![
        ("uncorrelated additive", spec(1e-4, 0.0, 0.0, 0.0)),
        ("uncorrelated multiplicative", spec(0.0, 0.0, 1e-3, 0.0)),
        ("uncorrelated mixed", spec(1e-4, 0.0, 1e-3, 0.0)),
        ("correlated additive", spec(0.0, 1e-4, 0.0, 0.0)),
        ("correlated multiplicative", spec(0.0, 0.0, 0.0, 1e-3)),
        ("correlated mixed", spec(0.0, 1e-4, 0.0, 1e-3)),
    ]
}

fn within_time(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn single_neuron_snr(id: &'static str, intensities: NoiseIntensities, check: impl Fn(f64, f64) -> f64) -> Line {
    let start = Instant::now();
    let net = SingleNeuron::new(NeuronParams::default(), intensities, 42).unwrap();
    let input = InputSignal::uniform(100, 1).unwrap();
    let curve = monte_carlo_curve(&net, &input, 100_000, ShiftMode::None).unwrap();
    let worst = curve
        .points
        .iter()
        .map(|p| check(p.snr, p.mean_raw))
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    line(
        id,
        worst <= 0.02 && within_time(elapsed, 5),
        format!("max relative deviation {worst:.4} (tol 0.02), {elapsed:.1?} (limit 5 s)"),
    )
}

fn crit1() -> Line {
    let target = 1.0 / (2.0f64 * 1e-3).sqrt();
    single_neuron_snr("1 single-neuron multiplicative SNR", NoiseIntensities::new(0.0, 0.0, 1e-3, 0.0).unwrap(), |snr, _| {
        (snr / target - 1.0).abs()
    })
}

fn crit2() -> Line {
    let slope = 1.0 / (2.0f64 * 1e-4).sqrt();
    single_neuron_snr("2 single-neuron additive slope", NoiseIntensities::new(1e-4, 0.0, 0.0, 0.0).unwrap(), |snr, mean| {
        (snr / mean / slope - 1.0).abs()
    })
}

fn fmt_dev(d: &Deviation) -> String {
    format!(
        "std max {:.4} med {:.4}, snr max {:.4} med {:.4}",
        d.std_max, d.std_median, d.snr_max, d.snr_median
    )
}

fn crit3() -> Line {
    let start = Instant::now();
    let cfg = FnnConfig::reference();
    let s = settings(2000, 200);
    let input = InputSignal::uniform(200, s.seeds.input).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in six_configs() {
        let mc = fnn_curve_mc(&cfg, &spec, Readout::Neuron, &s).unwrap();
        let an = fnn_curve(&cfg, &spec, &input, false).unwrap();
        let d = compare_curves(&mc, &an, s.band).unwrap();
        pass &= d.within(0.05);
        parts.push(format!("[{name}: {}]", fmt_dev(&d)));
    }
    let elapsed = start.elapsed();
    pass &= within_time(elapsed, 120);
    line(
        "3 FNN analytic vs Monte-Carlo",
        pass,
        format!("tol 0.05, {elapsed:.1?} (limit 120 s) {}", parts.join(" ")),
    )
}

fn crit4() -> Line {
    let start = Instant::now();
    let s = settings(1000, 1000);
    let input = InputSignal::uniform(1000, s.seeds.input).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [0.5, 0.9] {
        let cfg = RnnConfig::reference().with_beta(beta).unwrap().with_transient(100);
        for (name, spec) in six_configs() {
            let mc = rnn_curve_mc(&cfg, &spec, Readout::Neuron, &s).unwrap();
            let an = rnn_curve(&cfg, &spec, &input, false).unwrap();
            let d = compare_curves(&mc, &an, s.band).unwrap();
            pass &= d.within(0.07);
            parts.push(format!("[beta {beta} {name}: {}]", fmt_dev(&d)));
        }
    }
    let elapsed = start.elapsed();
    pass &= within_time(elapsed, 300);
    line(
        "4 RNN analytic vs Monte-Carlo",
        pass,
        format!("tol 0.07, {elapsed:.1?} (limit 300 s) {}", parts.join(" ")),
    )
}

fn crit5() -> Line {
    let k = 2000;
    let s = settings(k, 200);
    let mixed = spec(1e-4, 0.0, 1e-3, 0.0);
    let network = curve_summary(&fnn_curve_mc(&FnnConfig::reference(), &mixed, Readout::Neuron, &s).unwrap(), s.band).unwrap();
    let neuron = SingleNeuron::new(NeuronParams::default(), mixed.base(), s.seeds.noise).unwrap();
    let input = InputSignal::uniform(200, s.seeds.input).unwrap();
    let single = curve_summary(&monte_carlo_curve(&neuron, &input, k, ShiftMode::Constant).unwrap(), s.band).unwrap();
    let ratio = network / single;
    // relative standard error of an SNR estimate is 1/sqrt(2K); two independent curves
    let sigma = ratio * (2.0 / (2.0 * k as f64)).sqrt();
    let (lo, hi) = (ratio - 3.0 * sigma, ratio + 3.0 * sigma);
    line(
        "5 network resilience bound",
        lo > 0.5 && hi < 1.0,
        format!("network {network:.3} / single neuron {single:.3} = {ratio:.4}, 3-sigma band [{lo:.4}, {hi:.4}] inside (0.5, 1.0)"),
    )
}

fn crit6() -> Line {
    let start = Instant::now();
    let s = settings(1000, 200);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("uncorrelated", spec(1e-4, 0.0, 1e-3, 0.0)), ("correlated", spec(0.0, 1e-4, 0.0, 1e-3))] {
        let r = fnn_connectivity_sweep(&FnnConfig::reference(), &spec, MatrixTarget::Hidden, &[0.01, 1.0], &s).unwrap();
        let (sparse, dense) = (r.points[0].summary, r.points[1].summary);
        let diff = (sparse - dense).abs() / dense;
        pass &= diff <= 0.05;
        parts.push(format!("[{name}: rho 0.01 {sparse:.3}, rho 1 {dense:.3}, diff {diff:.4}]"));
    }
    let elapsed = start.elapsed();
    pass &= within_time(elapsed, 120);
    line(
        "6 hidden connectivity insensitivity",
        pass,
        format!("tol 0.05, {elapsed:.1?} (limit 120 s) {}", parts.join(" ")),
    )
}

fn crit7() -> Line {
    let start = Instant::now();
    let uncorrelated = spec(1e-4, 0.0, 1e-3, 0.0);
    let r = depth_sweep(
        &DEPTH_GRID,
        &[("uncorrelated".into(), uncorrelated.clone())],
        &uncorrelated,
        NeuronParams::default(),
        200,
        &settings(500, 200),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let crossing = r.crossing("uncorrelated", 0.5);
    let ratios: Vec<String> = r.points.iter().map(|p| format!("N={}:{:.3}", p.value, p.ratio)).collect();
    line(
        "7 depth halving",
        crossing.is_some_and(|n| (15.0..=25.0).contains(&n)) && within_time(elapsed, 600),
        format!(
            "half crossing {crossing:?} (want N in [15, 25]), {elapsed:.1?} (limit 600 s), ratios {}",
            ratios.join(" ")
        ),
    )
}

fn crit8() -> Line {
    let steps = 5000;
    let zero = InputSignal::constant(steps, 0.0).unwrap();
    let offset = |beta: f64| {
        let cfg = RnnConfig::reference().with_beta(beta).unwrap();
        *rnn_mean_trace(&cfg, &zero).last().unwrap()
    };
    let (o90, o99) = (offset(0.9), offset(0.99));
    let ratio = o99 / o90;
    let pole_ratio: f64 = (1.0 - 0.9) / (1.0 - 0.99);

    let cfg = RnnConfig::reference().with_beta(0.99).unwrap();
    let net = RnnRunner::new(cfg, spec(1e-4, 0.0, 1e-3, 0.0), 42).unwrap();
    let mc = monte_carlo_curve(&net, &zero, 100, ShiftMode::None).unwrap();
    let mc_final = mc.points.last().unwrap().mean_raw;
    let mc_dev = (mc_final / o99 - 1.0).abs();
    line(
        "8 RNN offset divergence",
        ratio >= 9.0 && (pole_ratio - 10.0).abs() < 1e-9 && mc_dev <= 0.10,
        format!(
            "offset beta 0.99 {o99:.4} / beta 0.9 {o90:.4} = {ratio:.3} (want >= 9), pole ratio {pole_ratio:.6}, MC/trace deviation {mc_dev:.4} (tol 0.10)"
        ),
    )
}

fn crit9() -> Vec<Line> {
    let start = Instant::now();
    let s = settings(1000, 200);
    let cfg = NetworkConfig::Fnn(FnnConfig::reference());
    let mixed = spec(1e-4, 0.0, 1e-3, 1e-4);
    let uncorrelated = spec(1e-4, 0.0, 1e-3, 0.0);
    let noisy = input_multiplex_sweep(&[1, 10], &cfg, &mixed, false, &s).unwrap().points[1].ratio;
    let quiet = input_multiplex_sweep(&[1, 10], &cfg, &mixed, true, &s).unwrap().points[1].ratio;
    let unc = input_multiplex_sweep(&[1, 10], &cfg, &uncorrelated, true, &s).unwrap().points[1].ratio;
    let elapsed = start.elapsed();
    let t_ok = within_time(elapsed, 300);
    vec![
        line(
            "9a multiplex gain, noisy readout",
            (noisy - 1.3).abs() <= 0.1 && t_ok,
            format!("I1=10 ratio {noisy:.4} (want 1.3 +/- 0.1)"),
        ),
        line(
            "9b multiplex gain, noiseless readout",
            (1.7..=2.5).contains(&quiet) && t_ok,
            format!("I1=10 ratio {quiet:.4} (want [1.7, 2.5])"),
        ),
        line(
            "9c multiplex gain, uncorrelated noise, noiseless readout",
            (7.0..=13.0).contains(&unc) && t_ok,
            format!("I1=10 ratio {unc:.4} (want [7, 13]); all three in {elapsed:.1?} (limit 300 s)"),
        ),
    ]
}

fn crit10() -> Line {
    let mixed = spec(1e-4, 0.0, 1e-3, 1e-4);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, cfg, s) in [
        ("fnn", NetworkConfig::Fnn(FnnConfig::reference()), settings(1000, 200)),
        ("rnn", NetworkConfig::Rnn(RnnConfig::reference()), settings(300, 1000)),
    ] {
        let r = readout_averaging_comparison(&cfg, &mixed, &s).unwrap();
        let ratio = r.points[1].ratio;
        pass &= (ratio - 1.0).abs() <= 0.10;
        parts.push(format!("{name} averaging/noiseless-readout {ratio:.4}"));
    }
    line("10 readout averaging equivalence", pass, format!("tol 0.10, {}", parts.join(", ")))
}

fn crit11() -> Line {
    let mut notes = Vec::new();
    let mut pass = true;

    // moments of the Gaussian source
    let n = 1_000_000u64;
    let (mut sum, mut sq) = (0.0, 0.0);
    for j in 0..n {
        let g = noisenet::noise::gaussian(
            3,
            noisenet::noise::NoiseKind::UncorrelatedAdditive,
            NoiseIndex::new(j / 1000 + 1, 1, 1, (j % 1000) as u32 + 1),
        );
        sum += g;
        sq += g * g;
    }
    let mean = sum / n as f64;
    let var = sq / n as f64 - mean * mean;
    let ok = mean.abs() <= 0.004 && (var - 1.0).abs() <= 0.005;
    pass &= ok;
    notes.push(format!("moments mean {mean:.5} var {var:.5}"));

    // layer average of uncorrelated additive noise
    let d = 1e-4;
    let intensities = NoiseIntensities::new(d, 0.0, 0.0, 0.0).unwrap();
    for width in [10u32, 200] {
        let samples: Vec<f64> = (1..=20_000u64)
            .map(|t| {
                let layer = LayerNoise::new(intensities, 5, t, 1, 2);
                (1..=width).map(|i| layer.apply(0.5, i)).sum::<f64>() / width as f64
            })
            .collect();
        let (_, sd) = noisenet::estimator::mean_std(&samples);
        let rel = (sd * sd / (2.0 * d / width as f64) - 1.0).abs();
        pass &= rel <= 0.05;
        notes.push(format!("layer average I={width} variance deviation {rel:.4}"));
    }

    // byte-identical reruns
    let s = settings(200, 100);
    let mixed = spec(1e-4, 1e-4, 1e-3, 1e-3);
    let a = fnn_curve_mc(&FnnConfig::reference(), &mixed, Readout::Neuron, &s).unwrap();
    let b = fnn_curve_mc(&FnnConfig::reference(), &mixed, Readout::Neuron, &s).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| fnn_curve_mc(&FnnConfig::reference(), &mixed, Readout::Neuron, &s).unwrap());
    let bits = |x: &noisenet::SnrCurve| -> Vec<u64> {
        x.points.iter().flat_map(|p| [p.mean_raw.to_bits(), p.std.to_bits(), p.snr.to_bits()]).collect()
    };
    let same = bits(&a) == bits(&b) && bits(&a) == bits(&c);
    pass &= same;
    notes.push(format!("reruns identical {same}"));

    // noiseless exactness
    let p = NeuronParams::default();
    let mut worst: f64 = 0.0;
    for layers in 3..=12 {
        worst = worst.max((shifting_constant_fnn(layers, p).unwrap() - shifting_constant_closed_form(layers, p).unwrap()).abs());
    }
    let input = InputSignal::uniform(200, 1).unwrap();
    let clean = fnn_curve_mc(&FnnConfig::reference(), &NoiseSpec::noiseless(), Readout::Neuron, &settings(2, 200)).unwrap();
    for (pt, &u) in clean.points.iter().zip(input.values()) {
        worst = worst.max((pt.mean_shifted - u).abs());
    }
    let rnn = RnnConfig::reference().with_beta(0.9).unwrap();
    let trace = rnn_mean_trace(&rnn, &input);
    let net = RnnRunner::new(rnn, NoiseSpec::noiseless(), 1).unwrap();
    for (y, m) in net.run(input.values(), 1).iter().zip(&trace) {
        worst = worst.max((y - m).abs());
    }
    let fnn_net = FnnRunner::new(FnnConfig::reference(), NoiseSpec::noiseless(), 1).unwrap();
    worst = worst.max((fnn_net.run_noiseless(&[0.0])[0] - 0.08).abs());
    pass &= worst <= 1e-12;
    notes.push(format!("noiseless max abs error {worst:.2e}"));

    line("11 property suite", pass, notes.join(", "))
}

#[test]
fn acceptance() {
    let mut lines = vec![crit1(), crit2(), crit3(), crit4(), crit5(), crit6(), crit7(), crit8()];
    lines.extend(crit9());
    lines.push(crit10());
    lines.push(crit11());

    println!();
    for l in &lines {
        println!("{} crit {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.detail);
    }
    let failed: Vec<&str> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!("{} of {} criteria pass", lines.len() - failed.len(), lines.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}

#[test]
fn band_default_is_the_documented_one() {
    assert_eq!(DEFAULT_BAND, (0.1, 0.9));
}
