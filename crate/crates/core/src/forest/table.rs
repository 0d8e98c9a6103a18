//! Dense, named feature tables.

use alloc::string::String;
use alloc::vec::Vec;

use super::ForestError;

/// Row-major feature matrix with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    /// Builds a table; every row must have one finite value per name.
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, ForestError> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(ForestError::RowLength { row: i, expected: names.len(), found: r.len() });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(ForestError::NonFinite { row: i, column: names[j].clone() });
            }
        }
        Ok(Self { names, rows })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Column-major copy.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_features()).map(|j| self.column(j)).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureTable {
        Self { names: self.names.clone(), rows: idx.iter().map(|&i| self.rows[i].clone()).collect() }
    }

    /// Columns reordered (and filtered) to `names`.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureTable, ForestError> {
        let idx = names
            .iter()
            .map(|n| self.position(n.as_ref()).ok_or_else(|| ForestError::FeatureMismatch(n.as_ref().into())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            names: names.iter().map(|n| n.as_ref().into()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
        })
    }
}
