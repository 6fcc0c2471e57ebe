//! Spectral purity from the singular values of a sampled joint amplitude.

use crate::jsa::JsaGrid;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchmidtError {
    #[error("vanishing joint amplitude")]
    Vanishing,
    #[error("grid must be at least 2x2 with finite entries, got {rows}x{cols}")]
    Degenerate { rows: usize, cols: usize },
}

/// Which matrix is decomposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decompose {
    /// The complex amplitude Φ.
    #[default]
    Amplitude,
    /// The intensity |Φ|².
    Intensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    /// Normalised weights, descending.
    pub lambdas: Vec<f64>,
    pub purity: f64,
    pub schmidt_number: f64,
}

impl SchmidtSpectrum {
    fn from_singular_values(mut sigma: Vec<f64>) -> Result<Self, SchmidtError> {
        sigma.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = sigma.iter().map(|s| s * s).sum();
        if !(total > 0.0) {
            return Err(SchmidtError::Vanishing);
        }
        let lambdas: Vec<f64> = sigma.iter().map(|s| s * s / total).collect();
        let purity: f64 = lambdas.iter().map(|l| l * l).sum();
        Ok(SchmidtSpectrum { lambdas, purity, schmidt_number: 1.0 / purity })
    }

    /// Columns `n, lambda`, then a `# purity,schmidt_number` summary line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,lambda")?;
        for (n, l) in self.lambdas.iter().enumerate() {
            writeln!(w, "{n},{l:e}")?;
        }
        writeln!(w, "# purity,schmidt_number")?;
        writeln!(w, "# {},{}", self.purity, self.schmidt_number)
    }
}

fn check_shape<T>(m: &DMatrix<T>) -> Result<(), SchmidtError> {
    if m.nrows() < 2 || m.ncols() < 2 {
        return Err(SchmidtError::Degenerate { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

pub fn real_spectrum(m: &DMatrix<f64>) -> Result<SchmidtSpectrum, SchmidtError> {
    check_shape(m)?;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SchmidtError::Degenerate { rows: m.nrows(), cols: m.ncols() });
    }
    SchmidtSpectrum::from_singular_values(m.singular_values().iter().copied().collect())
}

pub fn complex_spectrum(m: &DMatrix<Complex64>) -> Result<SchmidtSpectrum, SchmidtError> {
    check_shape(m)?;
    if m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(SchmidtError::Degenerate { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().all(|v| v.im == 0.0) {
        return real_spectrum(&m.map(|v| v.re));
    }
    SchmidtSpectrum::from_singular_values(m.singular_values().iter().copied().collect())
}

/// Schmidt weights and purity of a sampled joint amplitude.
pub fn schmidt_purity(grid: &JsaGrid, decompose: Decompose) -> Result<SchmidtSpectrum, SchmidtError> {
    match decompose {
        Decompose::Amplitude => complex_spectrum(&grid.amplitude),
        Decompose::Intensity => real_spectrum(&grid.intensity()),
    }
}
