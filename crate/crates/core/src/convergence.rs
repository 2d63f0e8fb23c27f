use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::IcaError;
use crate::nonlinearity::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Multiplicative orthogonal-group update.
    OgExtInf,
    /// Natural-gradient extended infomax.
    ExtInf,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OgExtInf => "ogextinf",
            Algorithm::ExtInf => "extinf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ogextinf" => Ok(Algorithm::OgExtInf),
            "extinf" => Ok(Algorithm::ExtInf),
            other => Err(format!("unknown algorithm '{other}' (expected ogextinf or extinf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub weight_change: f64,
    /// Time since the start of the run, measured after this iteration.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceRecord {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
}

impl ConvergenceRecord {
    pub fn iterations_used(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_weight_change(&self) -> Option<f64> {
        self.iterations.last().map(|r| r.weight_change)
    }

    pub fn weight_changes(&self) -> impl Iterator<Item = f64> + '_ {
        self.iterations.iter().map(|r| r.weight_change)
    }
}

/// Outcome of one ICA run in whitened space.
///
/// A numerical failure mid-run does not discard the run: `failure` carries the
/// cause and `unmixing` holds the last good iterate.
#[derive(Debug)]
pub struct IcaResult {
    pub algorithm: Algorithm,
    /// `m × m` unmixing matrix acting on whitened data.
    pub unmixing: DMatrix<f64>,
    /// `unmixing · whitened`.
    pub sources: DMatrix<f64>,
    /// Signs chosen in the last completed iteration.
    pub signs: Vec<Sign>,
    pub record: ConvergenceRecord,
    pub elapsed: Duration,
    pub failure: Option<IcaError>,
    /// Effective learning rate at the end of the run (gradient runs only).
    pub learning_rate: Option<f64>,
}

impl IcaResult {
    pub fn converged(&self) -> bool {
        self.record.converged
    }

    pub fn iterations_used(&self) -> usize {
        self.record.iterations_used()
    }
}
