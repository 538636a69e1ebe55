//! Non-negative dense connection matrices.
//!
//! Square matrices are normalized by their spectral radius, rectangular ones by
//! their largest singular value. Both norms are found by power iteration. Global
//! (all-to-all, uniform `1/cols`) matrices are kept exactly as built and carry no
//! normalization record.

use rand::distributions::Open01;
use rand::seq::index;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative tolerance used by the power iterations.
pub const POWER_TOLERANCE: f64 = 1e-10;
/// Iteration cap before the power iteration reports non-convergence.
pub const POWER_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    SpectralRadius,
    LargestSingularValue,
}

/// The divisor applied during normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub kind: NormKind,
    pub value: f64,
}

/// How a matrix was constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Every entry equals `1/cols`.
    Global,
    /// `round(rows * cols * rho)` uniform(0,1) entries at seeded random positions.
    Random { rho: f64, seed: u64 },
    /// Caller-supplied entries.
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    coupling: Coupling,
    normalization: Option<Normalization>,
}

impl WeightMatrix {
    /// Wraps row-major entries. Rejects negative, non-finite or all-zero input.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if entries.len() != rows * cols {
            return Err(Error::config(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::config(format!(
                "matrix entries must be finite and non-negative, found {bad}"
            )));
        }
        if entries.iter().all(|&v| v == 0.0) {
            return Err(Error::config("matrix has no non-zero entry"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
            coupling: Coupling::Custom,
            normalization: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn normalization(&self) -> Option<Normalization> {
        self.normalization
    }

    pub fn is_global(&self) -> bool {
        matches!(self.coupling, Coupling::Global)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0.0).count()
    }

    /// `out = W * x`.
    ///
    /// Global matrices take a shortcut: every row sees the same weighted sum.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        if self.is_global() {
            let value = x.iter().sum::<f64>() * self.entries[0];
            out.fill(value);
            return;
        }
        for (row, o) in self.entries.chunks_exact(self.cols).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
        }
    }

    /// `out = W^T * x`.
    fn mul_vec_transposed(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (row, &xr) in self.entries.chunks_exact(self.cols).zip(x) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * xr;
            }
        }
    }

    /// The norm appropriate for this shape, without modifying the matrix.
    pub fn norm(&self) -> Result<Normalization> {
        if self.is_square() {
            Ok(Normalization {
                kind: NormKind::SpectralRadius,
                value: spectral_radius(self)?,
            })
        } else {
            Ok(Normalization {
                kind: NormKind::LargestSingularValue,
                value: largest_singular_value(self)?,
            })
        }
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::config(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

/// All-to-all coupling with uniform weights `1/cols`, used as-is.
pub fn build_global_matrix(rows: usize, cols: usize) -> Result<WeightMatrix> {
    check_dims(rows, cols)?;
    Ok(WeightMatrix {
        rows,
        cols,
        entries: vec![1.0 / cols as f64; rows * cols],
        coupling: Coupling::Global,
        normalization: None,
    })
}

/// Sparse random coupling: exactly `round(rows*cols*rho)` entries drawn from
/// uniform(0,1) at positions sampled without replacement, then normalized.
pub fn build_random_matrix(rows: usize, cols: usize, rho: f64, seed: u64) -> Result<WeightMatrix> {
    check_dims(rows, cols)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::config(format!("connectivity must lie in (0, 1], got {rho}")));
    }
    let size = rows * cols;
    let count = (size as f64 * rho).round() as usize;
    if count == 0 {
        return Err(Error::config(format!(
            "connectivity {rho} leaves no non-zero entry in a {rows}x{cols} matrix"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = index::sample(&mut rng, size, count).into_vec();
    // value assignment follows position order so the result is independent of
    // the sampler's internal ordering
    positions.sort_unstable();
    let mut entries = vec![0.0; size];
    for p in positions {
        entries[p] = rng.sample::<f64, _>(Open01);
    }
    let raw = WeightMatrix {
        rows,
        cols,
        entries,
        coupling: Coupling::Custom,
        normalization: None,
    };
    let mut m = normalize_matrix(&raw)?;
    m.coupling = Coupling::Random { rho, seed };
    Ok(m)
}

/// Divides by the spectral radius (square) or largest singular value (rectangular).
pub fn normalize_matrix(m: &WeightMatrix) -> Result<WeightMatrix> {
    if m.entries.iter().all(|&v| v == 0.0) {
        return Err(Error::numerical("cannot normalize a zero matrix"));
    }
    let norm = m.norm()?;
    if !(norm.value > 0.0) {
        return Err(Error::numerical(format!(
            "matrix norm is {} (nilpotent or degenerate matrix)",
            norm.value
        )));
    }
    Ok(WeightMatrix {
        rows: m.rows,
        cols: m.cols,
        entries: m.entries.iter().map(|v| v / norm.value).collect(),
        coupling: m.coupling,
        normalization: Some(norm),
    })
}

fn unit(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Dominant eigenvalue of a square non-negative matrix.
///
/// Iterates with `W + I`, which has the same Perron vector as `W` but no other
/// eigenvalue on its spectral circle, so imprimitive (periodic) sparse matrices
/// converge as well.
pub fn spectral_radius(m: &WeightMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::config(format!(
            "spectral radius needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let n = m.rows;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        m.mul_vec(&x, &mut y);
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += xi);
        let shifted = unit(&mut y);
        std::mem::swap(&mut x, &mut y);
        let lambda = shifted - 1.0;
        // the residual of the shifted problem bounds the eigenvalue error for
        // the near-normal matrices we build; the step-size test guards the rest
        if (lambda - prev).abs() <= POWER_TOLERANCE * 1e-2 * shifted {
            m.mul_vec(&x, &mut y);
            let residual = y
                .iter()
                .zip(&x)
                .map(|(yi, xi)| (yi - lambda * xi).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= POWER_TOLERANCE * shifted {
                return Ok(lambda.max(0.0));
            }
        }
        prev = lambda;
    }
    Err(Error::numerical(format!(
        "spectral radius power iteration did not converge in {POWER_MAX_ITERATIONS} steps"
    )))
}

/// Largest singular value via power iteration on `W^T W`.
pub fn largest_singular_value(m: &WeightMatrix) -> Result<f64> {
    let mut v = vec![1.0 / (m.cols as f64).sqrt(); m.cols];
    let mut wv = vec![0.0; m.rows];
    let mut next = vec![0.0; m.cols];
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        m.mul_vec(&v, &mut wv);
        m.mul_vec_transposed(&wv, &mut next);
        let eig = unit(&mut next);
        std::mem::swap(&mut v, &mut next);
        if eig == 0.0 {
            return Ok(0.0);
        }
        if (eig - prev).abs() <= POWER_TOLERANCE * 1e-2 * eig {
            return Ok(eig.sqrt());
        }
        prev = eig;
    }
    Err(Error::numerical(format!(
        "singular value power iteration did not converge in {POWER_MAX_ITERATIONS} steps"
    )))
}
