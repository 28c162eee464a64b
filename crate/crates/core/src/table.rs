//! Eigenvalue lists over a `b̃` grid, the common currency of the solvers
//! and the command-line output.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub value: f64,
    /// Number of eigenstates sharing this value by symmetry (2 for the
    /// ±|l| sector pairs, 1 otherwise or when unknown).
    pub multiplicity: u32,
    /// `|l|` of the sector the level belongs to, when known.
    pub abs_l: Option<u32>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub btilde: f64,
    pub levels: Vec<Level>,
    pub error: Option<String>,
}

impl SpectrumPoint {
    /// Unlabeled levels, e.g. from the grid solver.
    pub fn from_values(btilde: f64, values: &[f64], residuals: Option<&[f64]>) -> Self {
        let levels = values
            .iter()
            .enumerate()
            .map(|(i, &value)| Level { value, multiplicity: 1, abs_l: None, residual: residuals.map(|r| r[i]) })
            .collect();
        Self { btilde, levels, error: None }
    }

    pub fn failed(btilde: f64, error: String) -> Self {
        Self { btilde, levels: Vec::new(), error: Some(error) }
    }

    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub points: Vec<SpectrumPoint>,
}

impl SpectrumTable {
    pub fn failures(&self) -> impl Iterator<Item = &SpectrumPoint> {
        self.points.iter().filter(|p| p.error.is_some())
    }
}
