//! Network topologies and their validation.

use rand::distributions::Open01;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{build_global_matrix, WeightMatrix};

/// Linear activation `f(x) = alpha * x` and the bias added at every neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronParams {
    pub alpha: f64,
    pub bias: f64,
}

impl NeuronParams {
    pub fn new(alpha: f64, bias: f64) -> Result<Self> {
        let p = Self { alpha, bias };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !self.bias.is_finite() {
            return Err(Error::config("bias must be finite"));
        }
        Ok(())
    }
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            bias: 0.02,
        }
    }
}

/// A layered feed-forward network. `matrices[j]` connects layer `j+1` to
/// layer `j+2` (1-based layers) and has shape `I_{j+2} x I_{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FnnConfig {
    layer_sizes: Vec<usize>,
    neuron: NeuronParams,
    matrices: Vec<WeightMatrix>,
}

impl FnnConfig {
    pub fn new(layer_sizes: Vec<usize>, neuron: NeuronParams, matrices: Vec<WeightMatrix>) -> Result<Self> {
        neuron.validate()?;
        if layer_sizes.len() < 3 {
            return Err(Error::config(format!(
                "a feed-forward network needs at least 3 layers, got {}",
                layer_sizes.len()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::config("layer sizes must be positive"));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::config("the output layer must hold a single neuron"));
        }
        if matrices.len() != layer_sizes.len() - 1 {
            return Err(Error::config(format!(
                "expected {} connection matrices, got {}",
                layer_sizes.len() - 1,
                matrices.len()
            )));
        }
        for (j, m) in matrices.iter().enumerate() {
            let (rows, cols) = (layer_sizes[j + 1], layer_sizes[j]);
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::config(format!(
                    "matrix into layer {} must be {rows}x{cols}, got {}x{}",
                    j + 2,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self {
            layer_sizes,
            neuron,
            matrices,
        })
    }

    /// Global coupling between every pair of adjacent layers.
    pub fn global(layer_sizes: Vec<usize>, neuron: NeuronParams) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::config("layer sizes must be positive and at least 3 layers long"));
        }
        let matrices = layer_sizes
            .windows(2)
            .map(|w| build_global_matrix(w[1], w[0]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layer_sizes, neuron, matrices)
    }

    /// The 4-layer reference network: 1 -> 200 -> 200 -> 1, global coupling.
    pub fn reference() -> Self {
        Self::global(vec![1, 200, 200, 1], NeuronParams::default()).expect("reference network is valid")
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    pub fn neuron(&self) -> NeuronParams {
        self.neuron
    }

    pub fn matrices(&self) -> &[WeightMatrix] {
        &self.matrices
    }

    /// Matrix feeding 1-based layer `n` (2 ..= N).
    pub fn matrix_into(&self, n: usize) -> &WeightMatrix {
        &self.matrices[n - 2]
    }

    pub fn is_global(&self) -> bool {
        self.matrices.iter().all(WeightMatrix::is_global)
    }

    /// Replaces the matrix feeding 1-based layer `n`.
    pub fn with_matrix(&self, n: usize, m: WeightMatrix) -> Result<Self> {
        if n < 2 || n > self.n_layers() {
            return Err(Error::config(format!("layer {n} has no incoming matrix")));
        }
        let mut matrices = self.matrices.clone();
        matrices[n - 2] = m;
        Self::new(self.layer_sizes.clone(), self.neuron, matrices)
    }
}

/// Input neuron(s), one recurrent hidden layer and a single output neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnConfig {
    input_size: usize,
    hidden_size: usize,
    neuron: NeuronParams,
    beta: f64,
    gamma: f64,
    win: WeightMatrix,
    w: WeightMatrix,
    wout: WeightMatrix,
    transient: usize,
}

/// Default number of initial steps dropped before range estimation and statistics.
pub const DEFAULT_TRANSIENT: usize = 100;

impl RnnConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        neuron: NeuronParams,
        beta: f64,
        gamma: f64,
        win: WeightMatrix,
        w: WeightMatrix,
        wout: WeightMatrix,
        transient: usize,
    ) -> Result<Self> {
        neuron.validate()?;
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        let hidden = w.rows();
        if !w.is_square() {
            return Err(Error::config(format!(
                "recurrent matrix must be square, got {}x{}",
                w.rows(),
                w.cols()
            )));
        }
        if win.rows() != hidden {
            return Err(Error::config(format!(
                "input matrix must have {hidden} rows, got {}",
                win.rows()
            )));
        }
        if wout.rows() != 1 || wout.cols() != hidden {
            return Err(Error::config(format!(
                "output matrix must be 1x{hidden}, got {}x{}",
                wout.rows(),
                wout.cols()
            )));
        }
        Ok(Self {
            input_size: win.cols(),
            hidden_size: hidden,
            neuron,
            beta,
            gamma,
            win,
            w,
            wout,
            transient,
        })
    }

    pub fn global(hidden_size: usize, neuron: NeuronParams, beta: f64, gamma: f64) -> Result<Self> {
        Self::global_with_inputs(1, hidden_size, neuron, beta, gamma)
    }

    pub fn global_with_inputs(
        input_size: usize,
        hidden_size: usize,
        neuron: NeuronParams,
        beta: f64,
        gamma: f64,
    ) -> Result<Self> {
        Self::new(
            neuron,
            beta,
            gamma,
            build_global_matrix(hidden_size, input_size)?,
            build_global_matrix(hidden_size, hidden_size)?,
            build_global_matrix(1, hidden_size)?,
            DEFAULT_TRANSIENT,
        )
    }

    /// 200 hidden neurons, global coupling, `beta = gamma = 0.5`.
    pub fn reference() -> Self {
        Self::global(200, NeuronParams::default(), 0.5, 0.5).expect("reference network is valid")
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn neuron(&self) -> NeuronParams {
        self.neuron
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn win(&self) -> &WeightMatrix {
        &self.win
    }

    pub fn w(&self) -> &WeightMatrix {
        &self.w
    }

    pub fn wout(&self) -> &WeightMatrix {
        &self.wout
    }

    pub fn transient(&self) -> usize {
        self.transient
    }

    pub fn is_global(&self) -> bool {
        self.win.is_global() && self.w.is_global() && self.wout.is_global()
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.neuron, beta, self.gamma, self.win.clone(), self.w.clone(), self.wout.clone(), self.transient)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.neuron, self.beta, gamma, self.win.clone(), self.w.clone(), self.wout.clone(), self.transient)
    }

    pub fn with_transient(&self, transient: usize) -> Self {
        Self { transient, ..self.clone() }
    }

    pub fn with_matrices(&self, win: WeightMatrix, w: WeightMatrix, wout: WeightMatrix) -> Result<Self> {
        Self::new(self.neuron, self.beta, self.gamma, win, w, wout, self.transient)
    }
}

/// The driving sequence `u^1 .. u^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal {
    values: Vec<f64>,
}

impl InputSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("input signal must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("input signal must be finite"));
        }
        Ok(Self { values })
    }

    /// i.i.d. uniform samples on the open interval (0, 1).
    pub fn uniform(length: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..length).map(|_| rng.sample::<f64, _>(Open01)).collect())
    }

    pub fn constant(length: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; length])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::build_random_matrix;

    #[test]
    fn shape_mismatch_rejected() {
        let p = NeuronParams::default();
        let bad = vec![
            build_global_matrix(200, 1).unwrap(),
            build_global_matrix(100, 200).unwrap(),
            build_global_matrix(1, 200).unwrap(),
        ];
        assert!(matches!(FnnConfig::new(vec![1, 200, 200, 1], p, bad), Err(Error::Config(_))));
        assert!(FnnConfig::global(vec![1, 1], p).is_err());
        assert!(FnnConfig::global(vec![1, 5, 2], p).is_err());
    }

    #[test]
    fn with_matrix_checks_shape() {
        let cfg = FnnConfig::reference();
        let m = build_random_matrix(200, 200, 0.5, 1).unwrap();
        let swapped = cfg.with_matrix(3, m.clone()).unwrap();
        assert!(!swapped.is_global());
        assert!(cfg.with_matrix(2, m).is_err());
    }

    #[test]
    fn neuron_params_validated() {
        assert!(NeuronParams::new(0.0, 0.02).is_err());
        assert!(NeuronParams::new(1.0, f64::NAN).is_err());
        assert!(NeuronParams::new(2.0, -0.1).is_ok());
    }

    #[test]
    fn rnn_validation() {
        let p = NeuronParams::default();
        assert!(RnnConfig::global(10, p, 1.2, 0.5).is_err());
        let ok = RnnConfig::global(10, p, 0.5, 0.5).unwrap();
        let wrong_out = build_global_matrix(1, 9).unwrap();
        assert!(ok
            .with_matrices(ok.win().clone(), ok.w().clone(), wrong_out)
            .is_err());
    }

    #[test]
    fn uniform_input_in_open_interval() {
        let u = InputSignal::uniform(1000, 5).unwrap();
        assert!(u.values().iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(u, InputSignal::uniform(1000, 5).unwrap());
    }
}
