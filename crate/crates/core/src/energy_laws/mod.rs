//! Laws of the molecular energy under the Dirac and Haar measures.
//!
//! The Dirac measure puts weight `multiplicity / r` on each energy level.
//! The Haar (unitarily invariant) measure on pure states makes the
//! eigenbasis weights `|<E_k|x>|^2` flat on the probability simplex, so the
//! energy is a flat-Dirichlet combination of the eigenvalues; its density is
//! the normalized B-spline with the eigenvalues (repeated by multiplicity)
//! as knots.

mod density;
mod law;
mod sampler;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

pub use density::{Density, PiecewisePolynomial, SplineDensity};
pub use law::{Atom, ContinuousLaw, DiscreteLaw, EnergyLaw, TiltSummary, NORMALIZATION_TOLERANCE};
pub use sampler::{InverseCdf, MoleculeSampler, SumSampler};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spectrum::Spectrum;

/// Samples per parallel chunk in [`sample_haar_energy`].
pub const SAMPLE_CHUNK: usize = 16_384;

/// Rungs of the default completeness probe ladder.
const LADDER_RUNGS: i32 = 9;

/// One atom per level, weighted by multiplicity / r.
pub fn dirac_law(spectrum: &Spectrum) -> EnergyLaw {
    let r = spectrum.dimension() as f64;
    let energies = spectrum.levels().iter().map(|l| l.energy).collect();
    let log_weights = spectrum
        .levels()
        .iter()
        .map(|l| (l.multiplicity as f64 / r).ln())
        .collect();
    EnergyLaw::Discrete(DiscreteLaw::from_log_weights(energies, log_weights))
}

/// Law of H under the Haar measure: a point mass for a single level,
/// otherwise the spline density on the expanded spectrum.
pub fn haar_law(spectrum: &Spectrum) -> EnergyLaw {
    if spectrum.levels().len() == 1 {
        return EnergyLaw::Discrete(DiscreteLaw::from_log_weights(
            vec![spectrum.ground()],
            vec![0.0],
        ));
    }
    let law = ContinuousLaw::spline(spectrum.expanded())
        .expect("a spectrum with two distinct levels yields a valid spline");
    EnergyLaw::Continuous(law)
}

/// Energies of `count` Haar-random pure states.
///
/// Each state is a vector of independent standard complex Gaussians, one per
/// Hilbert-space dimension; the energy is `sum_k |z_k|^2 E_k / sum_k |z_k|^2`.
/// Work is split into chunks of [`SAMPLE_CHUNK`] drawn from `stream.child(k)`.
pub fn sample_haar_energy(spectrum: &Spectrum, stream: RngStream, count: usize) -> Vec<f64> {
    let energies = spectrum.expanded();
    let ground = spectrum.ground();
    let chunks = count.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.child(k as u64).rng();
            let len = SAMPLE_CHUNK.min(count - k * SAMPLE_CHUNK);
            (0..len)
                .map(|_| {
                    let mut norm = 0.0;
                    let mut weighted = 0.0;
                    for &e in &energies {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        let w = 0.5 * (re * re + im * im);
                        norm += w;
                        weighted += w * (e - ground);
                    }
                    ground + weighted / norm
                })
                .collect()
        })
        .collect();
    parts.concat()
}

/// Exact mean and variance. Continuous laws are integrated piecewise.
pub fn law_moments(law: &EnergyLaw) -> (f64, f64) {
    (law.mean(), law.variance())
}

/// P[H <= energy].
pub fn law_cdf(law: &EnergyLaw, energy: f64) -> f64 {
    law.cdf(energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub epsilon: f64,
    /// P[H < epsilon].
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletenessReport {
    pub complete: bool,
    pub witnesses: Vec<Witness>,
}

/// Probes P[H < eps] > 0 at the given thresholds plus the ladder
/// `E- + (E+ - E-) 10^-k`, k = 1..9. A finite probe set cannot establish
/// completeness for every eps, so the witnesses are returned alongside.
pub fn completeness_check(
    spectrum: &Spectrum,
    law: &EnergyLaw,
    epsilons: &[f64],
) -> Result<CompletenessReport> {
    let ground = spectrum.ground();
    let mut probes = Vec::with_capacity(epsilons.len() + LADDER_RUNGS as usize);
    for &epsilon in epsilons {
        if !(epsilon > ground) {
            return Err(Error::InvalidProbe { epsilon, ground });
        }
        probes.push(epsilon);
    }
    let width = spectrum.width();
    if width > 0.0 {
        probes.extend((1..=LADDER_RUNGS).map(|k| ground + width * 10f64.powi(-k)));
    }
    let witnesses: Vec<Witness> = probes
        .into_iter()
        .map(|epsilon| Witness {
            epsilon,
            probability: law.cdf_strict(epsilon),
        })
        .collect();
    Ok(CompletenessReport {
        complete: witnesses.iter().all(|w| w.probability > 0.0),
        witnesses,
    })
}
