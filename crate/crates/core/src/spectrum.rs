//! Energy levels of a single molecule's Hamiltonian.
//!
//! Text syntax is a comma-separated list of `energy` or `energy:multiplicity`
//! entries, so `0,1` and `0:1,1:1` describe the same two-level molecule.
//! Entries may appear in any order; equal energies are merged by summing
//! their multiplicities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: usize,
}

/// Sorted, strictly increasing energy levels with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Level>", into = "Vec<Level>")]
pub struct Spectrum {
    levels: Vec<Level>,
}

impl Spectrum {
    /// Builds a spectrum from levels that are already strictly increasing.
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidSpectrum("no levels given".into()));
        }
        for level in &levels {
            if !level.energy.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "energy {} is not finite",
                    level.energy
                )));
            }
            if level.multiplicity == 0 {
                return Err(Error::InvalidSpectrum(format!(
                    "level at {} has multiplicity 0",
                    level.energy
                )));
            }
        }
        if levels.windows(2).any(|w| w[0].energy >= w[1].energy) {
            return Err(Error::InvalidSpectrum(
                "energies must be strictly increasing".into(),
            ));
        }
        Ok(Spectrum { levels })
    }

    /// Sorts the levels and merges equal energies.
    pub fn from_unsorted(mut levels: Vec<Level>) -> Result<Self> {
        if levels.iter().any(|l| l.energy.is_nan()) {
            return Err(Error::InvalidSpectrum("energy is NaN".into()));
        }
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        let mut merged: Vec<Level> = Vec::with_capacity(levels.len());
        for level in levels {
            match merged.last_mut() {
                Some(last) if last.energy == level.energy => {
                    last.multiplicity += level.multiplicity
                }
                _ => merged.push(level),
            }
        }
        Spectrum::new(merged)
    }

    /// Non-degenerate spectrum from a list of distinct energies.
    pub fn from_energies(energies: &[f64]) -> Result<Self> {
        Spectrum::from_unsorted(
            energies
                .iter()
                .map(|&energy| Level {
                    energy,
                    multiplicity: 1,
                })
                .collect(),
        )
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Hilbert-space dimension, the sum of multiplicities.
    pub fn dimension(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    pub fn ground(&self) -> f64 {
        self.levels[0].energy
    }

    pub fn top(&self) -> f64 {
        self.levels[self.levels.len() - 1].energy
    }

    pub fn width(&self) -> f64 {
        self.top() - self.ground()
    }

    /// tr(H)/r.
    pub fn trace_mean(&self) -> f64 {
        let r = self.dimension() as f64;
        self.levels
            .iter()
            .map(|l| l.multiplicity as f64 * l.energy)
            .sum::<f64>()
            / r
    }

    /// tr(H^2)/r.
    pub fn trace_mean_square(&self) -> f64 {
        let r = self.dimension() as f64;
        self.levels
            .iter()
            .map(|l| l.multiplicity as f64 * l.energy * l.energy)
            .sum::<f64>()
            / r
    }

    /// Each energy repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.energy, l.multiplicity))
            .collect()
    }
}

impl FromStr for Spectrum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut levels = Vec::new();
        for entry in s.split(',') {
            let entry = entry.trim();
            if entry.is_empty() {
                return Err(Error::InvalidSpectrum(format!("empty entry in '{s}'")));
            }
            let (energy, multiplicity) = match entry.split_once(':') {
                Some((e, m)) => (e.trim(), Some(m.trim())),
                None => (entry, None),
            };
            let energy: f64 = energy
                .parse()
                .map_err(|_| Error::InvalidSpectrum(format!("bad energy '{energy}'")))?;
            let multiplicity = match multiplicity {
                Some(m) => m
                    .parse()
                    .map_err(|_| Error::InvalidSpectrum(format!("bad multiplicity '{m}'")))?,
                None => 1,
            };
            levels.push(Level {
                energy,
                multiplicity,
            });
        }
        Spectrum::from_unsorted(levels)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, level) in self.levels.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", level.energy, level.multiplicity)?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<Level>> for Spectrum {
    type Error = Error;

    fn try_from(levels: Vec<Level>) -> Result<Self> {
        Spectrum::from_unsorted(levels)
    }
}

impl From<Spectrum> for Vec<Level> {
    fn from(s: Spectrum) -> Self {
        s.levels
    }
}
