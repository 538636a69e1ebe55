//! Index-addressed white Gaussian noise and the four-class neuron noise model.
//!
//! Every Gaussian value is a pure function of `(seed, kind, t, k, n, i)`: the
//! tuple is hashed into two 64-bit lanes, which give two uniforms for a
//! Box-Muller transform. The cosine branch feeds the additive kind and the sine
//! branch the multiplicative kind of the same family, so the two are
//! independent. Correlated kinds drop the neuron index, which makes them shared
//! by a whole layer.
//!
//! A neuron's perturbed output is
//!
//! ```text
//! y = y' (1 + sqrt(2 D_UM) xi_UM) (1 + sqrt(2 D_CM) xi_CM) + sqrt(2 D_UA) xi_UA + sqrt(2 D_CA) xi_CA
//! ```

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    UncorrelatedAdditive,
    CorrelatedAdditive,
    UncorrelatedMultiplicative,
    CorrelatedMultiplicative,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::UncorrelatedAdditive,
        NoiseKind::CorrelatedAdditive,
        NoiseKind::UncorrelatedMultiplicative,
        NoiseKind::CorrelatedMultiplicative,
    ];

    pub fn is_correlated(self) -> bool {
        matches!(self, NoiseKind::CorrelatedAdditive | NoiseKind::CorrelatedMultiplicative)
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            NoiseKind::UncorrelatedMultiplicative | NoiseKind::CorrelatedMultiplicative
        )
    }

    fn family(self) -> u64 {
        if self.is_correlated() {
            FAMILY_CORRELATED
        } else {
            FAMILY_UNCORRELATED
        }
    }
}

const FAMILY_UNCORRELATED: u64 = 0x55;
const FAMILY_CORRELATED: u64 = 0xCC;

/// Address of one Gaussian draw. All components are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseIndex {
    /// Time step.
    pub t: u64,
    /// Repetition.
    pub k: u64,
    /// Layer.
    pub n: u32,
    /// Neuron within the layer.
    pub i: u32,
}

impl NoiseIndex {
    pub fn new(t: u64, k: u64, n: u32, i: u32) -> Self {
        Self { t, k, n, i }
    }
}

/// The four noise intensities of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseIntensities {
    pub du_a: f64,
    pub dc_a: f64,
    pub du_m: f64,
    pub dc_m: f64,
}

impl NoiseIntensities {
    pub const ZERO: NoiseIntensities = NoiseIntensities {
        du_a: 0.0,
        dc_a: 0.0,
        du_m: 0.0,
        dc_m: 0.0,
    };

    pub fn new(du_a: f64, dc_a: f64, du_m: f64, dc_m: f64) -> Result<Self> {
        let s = Self { du_a, dc_a, du_m, dc_m };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("du_a", self.du_a),
            ("dc_a", self.dc_a),
            ("du_m", self.du_m),
            ("dc_m", self.dc_m),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("noise intensity {name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn intensity(&self, kind: NoiseKind) -> f64 {
        match kind {
            NoiseKind::UncorrelatedAdditive => self.du_a,
            NoiseKind::CorrelatedAdditive => self.dc_a,
            NoiseKind::UncorrelatedMultiplicative => self.du_m,
            NoiseKind::CorrelatedMultiplicative => self.dc_m,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.du_a == 0.0 && self.dc_a == 0.0 && self.du_m == 0.0 && self.dc_m == 0.0
    }

    pub fn has_correlated(&self) -> bool {
        self.dc_a > 0.0 || self.dc_m > 0.0
    }
}

/// Base intensities plus optional per-layer replacements.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseSpec {
    base: NoiseIntensities,
    overrides: BTreeMap<usize, NoiseIntensities>,
}

impl NoiseSpec {
    pub fn new(base: NoiseIntensities) -> Result<Self> {
        base.validate()?;
        Ok(Self {
            base,
            overrides: BTreeMap::new(),
        })
    }

    pub fn uniform(du_a: f64, dc_a: f64, du_m: f64, dc_m: f64) -> Result<Self> {
        Self::new(NoiseIntensities::new(du_a, dc_a, du_m, dc_m)?)
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Replaces the intensities of 1-based layer `layer`.
    pub fn with_override(mut self, layer: usize, spec: NoiseIntensities) -> Result<Self> {
        spec.validate()?;
        if layer == 0 {
            return Err(Error::config("noise overrides use 1-based layer indices"));
        }
        self.overrides.insert(layer, spec);
        Ok(self)
    }

    pub fn base(&self) -> NoiseIntensities {
        self.base
    }

    pub fn overrides(&self) -> &BTreeMap<usize, NoiseIntensities> {
        &self.overrides
    }

    pub fn for_layer(&self, layer: usize) -> NoiseIntensities {
        self.overrides.get(&layer).copied().unwrap_or(self.base)
    }

    /// Fails when an override addresses a layer beyond `n_layers`.
    pub fn check_layers(&self, n_layers: usize) -> Result<()> {
        match self.overrides.keys().find(|&&l| l > n_layers) {
            Some(l) => Err(Error::config(format!(
                "noise override for layer {l} but the network has {n_layers} layers"
            ))),
            None => Ok(()),
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.base.is_zero() && self.overrides.values().all(NoiseIntensities::is_zero)
    }

    /// True when any layer of an `n_layers` network is perturbed.
    pub fn is_active(&self, n_layers: usize) -> bool {
        (1..=n_layers).any(|l| !self.for_layer(l).is_zero())
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const LANE_A: u64 = 0x9e37_79b9_7f4a_7c15;
const LANE_B: u64 = 0xd1b5_4a32_d192_ed03;

/// Two-lane hash state after absorbing a prefix of the address.
#[derive(Debug, Clone, Copy)]
struct Lanes {
    a: u64,
    b: u64,
}

impl Lanes {
    fn seeded(seed: u64) -> Self {
        Self {
            a: mix64(seed ^ LANE_A),
            b: mix64(seed.rotate_left(32) ^ LANE_B),
        }
    }

    #[inline]
    fn absorb(self, word: u64) -> Self {
        let a = mix64(self.a ^ word.wrapping_mul(LANE_A));
        let b = mix64(self.b.wrapping_add(word).wrapping_mul(LANE_B) ^ a);
        Self { a, b }
    }

    /// Standard-normal pair `(cos branch, sin branch)`.
    #[inline]
    fn normal_pair(self) -> (f64, f64) {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let h1 = mix64(self.a ^ self.b.rotate_left(17));
        let h2 = mix64(self.b ^ self.a.rotate_left(41));
        // u1 in (0, 1), u2 in [0, 1)
        let u1 = ((h1 >> 11) as f64 + 0.5) * SCALE;
        let u2 = (h2 >> 11) as f64 * SCALE;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        (r * c, r * s)
    }
}

fn layer_prefix(seed: u64, family: u64, t: u64, k: u64, n: u32) -> Lanes {
    Lanes::seeded(seed).absorb(family).absorb(t).absorb(k).absorb(n as u64)
}

/// A standard-normal variate addressed by `(seed, kind, idx)`.
pub fn gaussian(seed: u64, kind: NoiseKind, idx: NoiseIndex) -> f64 {
    let i = if kind.is_correlated() { 0 } else { idx.i };
    let (c, s) = layer_prefix(seed, kind.family(), idx.t, idx.k, idx.n)
        .absorb(i as u64)
        .normal_pair();
    if kind.is_multiplicative() {
        s
    } else {
        c
    }
}

/// Noise for every neuron of one layer at fixed `(t, k, n)`.
///
/// The correlated draws are taken once at construction; the uncorrelated ones
/// per neuron in [`LayerNoise::apply`].
#[derive(Debug, Clone, Copy)]
pub struct LayerNoise {
    amp_ua: f64,
    amp_um: f64,
    /// `1 + sqrt(2 D_CM) xi_CM`
    corr_factor: f64,
    /// `sqrt(2 D_CA) xi_CA`
    corr_offset: f64,
    uncorrelated: Option<Lanes>,
}

impl LayerNoise {
    pub fn new(spec: NoiseIntensities, seed: u64, t: u64, k: u64, n: u32) -> Self {
        let amp = |d: f64| (2.0 * d).sqrt();
        let (xi_ca, xi_cm) = if spec.dc_a > 0.0 || spec.dc_m > 0.0 {
            layer_prefix(seed, FAMILY_CORRELATED, t, k, n).absorb(0).normal_pair()
        } else {
            (0.0, 0.0)
        };
        let uncorrelated = (spec.du_a > 0.0 || spec.du_m > 0.0)
            .then(|| layer_prefix(seed, FAMILY_UNCORRELATED, t, k, n));
        Self {
            amp_ua: amp(spec.du_a),
            amp_um: amp(spec.du_m),
            corr_factor: 1.0 + amp(spec.dc_m) * xi_cm,
            corr_offset: amp(spec.dc_a) * xi_ca,
            uncorrelated,
        }
    }

    /// Perturbs the clean output `y` of neuron `i` (1-based).
    #[inline]
    pub fn apply(&self, y: f64, i: u32) -> f64 {
        let (xi_ua, xi_um) = match self.uncorrelated {
            Some(lanes) => lanes.absorb(i as u64).normal_pair(),
            None => (0.0, 0.0),
        };
        y * (1.0 + self.amp_um * xi_um) * self.corr_factor + self.amp_ua * xi_ua + self.corr_offset
    }
}

/// Perturbs a single neuron's clean output according to `spec`.
pub fn apply_noise(y_clean: f64, spec: NoiseIntensities, seed: u64, idx: NoiseIndex) -> f64 {
    LayerNoise::new(spec, seed, idx.t, idx.k, idx.n).apply(y_clean, idx.i)
}
