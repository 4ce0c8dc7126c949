//! Canonical equation of state derived from an [`EnergyLaw`].
//!
//! Everything here is a function of the log-moment-generating function
//! `log Z(beta) = log E[exp(-beta H)]`. Entropies and heat capacities are
//! returned in units of k_B; [`eos_scan`] applies a configurable k_B.
//!
//! Only `beta >= 0` is supported, so the reachable energies are
//! `(ground, mean]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::energy_laws::{EnergyLaw, TiltSummary};
use crate::error::{Error, Result};

/// Largest inverse temperature tried by [`invert_beta`], in units of the
/// inverse spectral width.
const BETA_CAP: f64 = 1e6;

/// Convergence of [`invert_beta`], relative to the spectral width.
pub const INVERSION_TOLERANCE: f64 = 1e-12;

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta == f64::INFINITY {
        return Err(Error::InvalidArgument(format!("beta {beta} is not finite")));
    }
    if beta < 0.0 {
        return Err(Error::NegativeBeta(beta));
    }
    Ok(())
}

/// Validated tilted summary, the common core of the per-beta quantities.
pub fn canonical(law: &EnergyLaw, beta: f64) -> Result<TiltSummary> {
    check_beta(beta)?;
    Ok(law.summary(beta))
}

pub fn log_partition(law: &EnergyLaw, beta: f64) -> Result<f64> {
    Ok(canonical(law, beta)?.log_z())
}

pub fn specific_energy(law: &EnergyLaw, beta: f64) -> Result<f64> {
    Ok(canonical(law, beta)?.energy())
}

/// Variance of H under the tilted law; equals -dE/dbeta.
pub fn energy_variance(law: &EnergyLaw, beta: f64) -> Result<f64> {
    Ok(canonical(law, beta)?.variance)
}

/// beta^2 Var_beta[H] = -beta^2 dE/dbeta, in units of k_B.
pub fn heat_capacity(law: &EnergyLaw, beta: f64) -> Result<f64> {
    let s = canonical(law, beta)?;
    Ok(beta * beta * s.variance)
}

/// beta E(beta) + log Z(beta), in units of k_B.
pub fn entropy_from_beta(law: &EnergyLaw, beta: f64) -> Result<f64> {
    Ok(canonical(law, beta)?.entropy())
}

/// The unique `beta >= 0` with `specific_energy(law, beta) == energy`.
///
/// The upper bracket grows geometrically from `1/width`; the root is then
/// polished by Newton steps on `log(E(beta) - ground)`, which is close to
/// linear at low temperature, falling back to bisection whenever a step
/// leaves the bracket.
pub fn invert_beta(law: &EnergyLaw, energy: f64) -> Result<f64> {
    Ok(invert(law, energy)?.beta)
}

fn invert(law: &EnergyLaw, energy: f64) -> Result<TiltSummary> {
    if !energy.is_finite() {
        return Err(Error::InvalidArgument(format!("energy {energy} is not finite")));
    }
    let ground = law.ground();
    let mean = law.mean();
    if law.is_degenerate() || law.variance() == 0.0 {
        return if energy == mean {
            Ok(law.summary(0.0))
        } else if energy > mean {
            Err(Error::AboveMean { energy, mean })
        } else {
            Err(Error::Unreachable { energy, ground })
        };
    }
    let width = law.width();
    if energy >= mean {
        if energy - mean <= 4.0 * f64::EPSILON * mean.abs().max(width) {
            return Ok(law.summary(0.0));
        }
        return Err(Error::AboveMean { energy, mean });
    }
    if energy <= ground {
        return Err(Error::Unreachable { energy, ground });
    }

    let target = (energy - ground).ln();
    let excess = |s: &TiltSummary| s.gap.ln() - target;

    let cap = BETA_CAP / width;
    let mut lo = 0.0;
    let mut hi = 1.0 / width;
    let mut at_hi = law.summary(hi);
    while excess(&at_hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return Err(Error::Unreachable { energy, ground });
        }
        at_hi = law.summary(hi);
    }

    let mut beta = 0.5 * (lo + hi);
    let mut best = at_hi;
    for _ in 0..300 {
        let s = law.summary(beta);
        let f = excess(&s);
        if (s.gap - (energy - ground)).abs() < (best.gap - (energy - ground)).abs() {
            best = s;
        }
        if f == 0.0 {
            return Ok(s);
        }
        if f > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        let slope = -s.variance / s.gap;
        let newton = beta - f / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - beta).abs() <= 1e-15 * next || hi - lo <= 2.0 * f64::EPSILON * hi {
            let s = law.summary(next);
            return Ok(if (s.gap - (energy - ground)).abs() <= (best.gap - (energy - ground)).abs() {
                s
            } else {
                best
            });
        }
        beta = next;
    }
    Ok(best)
}

/// Entropy at the temperature where the specific energy equals `energy`.
pub fn entropy_of_energy(law: &EnergyLaw, energy: f64) -> Result<f64> {
    Ok(invert(law, energy)?.entropy())
}

/// The law reweighted by `exp(-beta H) / Z(beta)`.
pub fn esscher_tilt(law: &EnergyLaw, beta: f64) -> Result<EnergyLaw> {
    check_beta(beta)?;
    Ok(law.tilted(beta))
}

/// `inf_{beta >= 0} [beta E + log Z(beta)]`, the exponential rate bounding
/// `(1/n) log P[avg <= E]` at every n. Zero for `E >= mean`, `-inf` for
/// `E <= ground`.
pub fn chernoff_rate(law: &EnergyLaw, energy: f64) -> Result<f64> {
    if !energy.is_finite() {
        return Err(Error::InvalidArgument(format!("energy {energy} is not finite")));
    }
    if energy >= law.mean() {
        return Ok(0.0);
    }
    if energy <= law.ground() {
        return Ok(f64::NEG_INFINITY);
    }
    let s = invert(law, energy)?;
    // beta (E - ground) + log Z_shifted evaluated at the target E rather
    // than the solver's E(beta), which differ by the solver tolerance.
    Ok((s.beta * (energy - s.ground) + s.log_z_shifted).min(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub log_z: f64,
    pub energy: f64,
    pub entropy: f64,
    pub heat_capacity: f64,
    pub temperature: f64,
}

impl ThermoPoint {
    fn from_summary(s: &TiltSummary, k_b: f64) -> Self {
        ThermoPoint {
            beta: s.beta,
            log_z: s.log_z(),
            energy: s.energy(),
            entropy: k_b * s.entropy(),
            heat_capacity: k_b * s.beta * s.beta * s.variance,
            temperature: if s.beta == 0.0 {
                f64::INFINITY
            } else {
                1.0 / (k_b * s.beta)
            },
        }
    }
}

/// Full thermodynamic record at one inverse temperature.
pub fn thermo_point(law: &EnergyLaw, beta: f64, k_b: f64) -> Result<ThermoPoint> {
    check_k_b(k_b)?;
    Ok(ThermoPoint::from_summary(&canonical(law, beta)?, k_b))
}

/// Full thermodynamic record at the temperature reaching `energy`.
pub fn thermo_point_at_energy(law: &EnergyLaw, energy: f64, k_b: f64) -> Result<ThermoPoint> {
    check_k_b(k_b)?;
    Ok(ThermoPoint::from_summary(&invert(law, energy)?, k_b))
}

fn check_k_b(k_b: f64) -> Result<()> {
    if k_b > 0.0 && k_b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("k_B must be positive, got {k_b}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Beta(Vec<f64>),
    Energy(Vec<f64>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Beta(v) | Grid::Energy(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFailure {
    pub index: usize,
    pub value: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationOfState {
    pub law: String,
    pub k_b: f64,
    /// Successful points, in grid order.
    pub points: Vec<ThermoPoint>,
    pub failures: Vec<ScanFailure>,
}

impl EquationOfState {
    /// Energy strictly decreasing and entropy nonincreasing in beta.
    pub fn is_monotone(&self) -> bool {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        pts.windows(2).all(|w| {
            w[0].beta == w[1].beta
                || (w[1].energy < w[0].energy && w[1].entropy <= w[0].entropy)
        })
    }
}

/// Evaluates every grid entry in parallel; out-of-domain entries are
/// recorded as failures and the scan continues.
pub fn eos_scan(law: &EnergyLaw, grid: &Grid, k_b: f64) -> Result<EquationOfState> {
    check_k_b(k_b)?;
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let (values, by_energy) = match grid {
        Grid::Beta(v) => (v, false),
        Grid::Energy(v) => (v, true),
    };
    let results: Vec<Result<ThermoPoint>> = values
        .par_iter()
        .map(|&x| {
            if by_energy {
                thermo_point_at_energy(law, x, k_b)
            } else {
                thermo_point(law, x, k_b)
            }
        })
        .collect();
    let mut points = Vec::with_capacity(values.len());
    let mut failures = Vec::new();
    for (index, (result, &value)) in results.into_iter().zip(values).enumerate() {
        match result {
            Ok(p) => points.push(p),
            Err(error) => failures.push(ScanFailure {
                index,
                value,
                error,
            }),
        }
    }
    Ok(EquationOfState {
        law: law.to_string(),
        k_b,
        points,
        failures,
    })
}
