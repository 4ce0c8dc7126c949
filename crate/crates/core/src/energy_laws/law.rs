//! The law of the molecular energy H(x) as a random variable.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::density::{Density, PiecewisePolynomial, SplineDensity};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, GaussLegendre};

/// Normalization and moment tolerance for constructed laws.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// Quadrature pieces starting further than this many thermal lengths above
/// the ground carry less than e^-800 of the mass and are skipped.
const TILT_CUTOFF: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub energy: f64,
    pub weight: f64,
}

/// Finitely many atoms, kept sorted by energy with log-weights alongside so
/// strong tilts do not underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    energies: Vec<f64>,
    log_weights: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl DiscreteLaw {
    /// Validates and sorts the atoms, merging equal energies. Weights must
    /// be positive and sum to one within [`NORMALIZATION_TOLERANCE`].
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidLaw("no atoms".into()));
        }
        for a in &atoms {
            if !a.energy.is_finite() {
                return Err(Error::InvalidLaw(format!("atom energy {} is not finite", a.energy)));
            }
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidLaw(format!(
                    "atom at {} has non-positive weight {}",
                    a.energy, a.weight
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        let mut energies: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for a in atoms {
            if energies.last() == Some(&a.energy) {
                *weights.last_mut().unwrap() += a.weight;
            } else {
                energies.push(a.energy);
                weights.push(a.weight);
            }
        }
        let log_weights = weights.iter().map(|w| (w / total).ln()).collect();
        Ok(Self::from_log_weights(energies, log_weights))
    }

    pub fn point_mass(energy: f64) -> Result<Self> {
        Self::new(vec![Atom {
            energy,
            weight: 1.0,
        }])
    }

    /// `energies` sorted and distinct; `log_weights` need not be normalized.
    pub(crate) fn from_log_weights(energies: Vec<f64>, log_weights: Vec<f64>) -> Self {
        let norm = log_sum_exp(&log_weights);
        let log_weights: Vec<f64> = log_weights.iter().map(|l| l - norm).collect();
        let mut law = DiscreteLaw {
            energies,
            log_weights,
            mean: 0.0,
            variance: 0.0,
        };
        let s = law.summary(0.0);
        law.mean = law.ground() + s.gap;
        law.variance = s.variance;
        law
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.energies
            .iter()
            .zip(self.weights())
            .map(|(&energy, weight)| Atom { energy, weight })
            .collect()
    }

    pub fn ground(&self) -> f64 {
        self.energies[0]
    }

    pub fn ceiling(&self) -> f64 {
        self.energies[self.energies.len() - 1]
    }

    fn tilted_log_weights(&self, beta: f64) -> Vec<f64> {
        let g = self.ground();
        self.energies
            .iter()
            .zip(&self.log_weights)
            .map(|(&e, &lw)| lw - beta * (e - g))
            .collect()
    }

    fn summary(&self, beta: f64) -> TiltSummary {
        let g = self.ground();
        let lw = self.tilted_log_weights(beta);
        let log_z_shifted = log_sum_exp(&lw);
        let probs: Vec<f64> = lw.iter().map(|l| (l - log_z_shifted).exp()).collect();
        let gap: f64 = probs
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| p * (e - g))
            .sum();
        let variance: f64 = probs
            .iter()
            .zip(&self.energies)
            .map(|(p, e)| {
                let d = e - g - gap;
                p * d * d
            })
            .sum();
        TiltSummary {
            beta,
            ground: g,
            log_z_shifted,
            gap,
            variance,
        }
    }

    fn tilt(&self, beta: f64) -> DiscreteLaw {
        DiscreteLaw::from_log_weights(self.energies.clone(), self.tilted_log_weights(beta))
    }

    fn cdf(&self, x: f64, strict: bool) -> f64 {
        let end = if strict {
            self.energies.partition_point(|&e| e < x)
        } else {
            self.energies.partition_point(|&e| e <= x)
        };
        if end == self.energies.len() {
            return 1.0;
        }
        self.log_weights[..end].iter().map(|l| l.exp()).sum::<f64>().min(1.0)
    }
}

/// A density on `[lower, upper]`, optionally carrying an exponential tilt
/// `exp(-tilt (t - lower))` that has been applied to a base density.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousLaw {
    density: Density,
    tilt: f64,
    log_norm: f64,
    mean: f64,
    variance: f64,
}

impl ContinuousLaw {
    /// Wraps a base density, checking nonnegativity at the quadrature nodes
    /// and normalization within [`NORMALIZATION_TOLERANCE`].
    pub fn new(density: Density) -> Result<Self> {
        let law = Self::with_tilt(density, 0.0);
        let total = law.log_norm.exp();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidLaw(format!("density integrates to {total}, not 1")));
        }
        let mut negative = false;
        law.for_each_node(0.0, |t, _| negative |= law.density.eval(t) < 0.0);
        for b in law.density.breakpoints() {
            negative |= law.density.eval(b) < 0.0;
        }
        if negative {
            return Err(Error::InvalidLaw("density takes negative values".into()));
        }
        Ok(law)
    }

    pub fn spline(knots: Vec<f64>) -> Result<Self> {
        Self::new(Density::Spline(SplineDensity::new(knots)?))
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(Density::Piecewise(PiecewisePolynomial::uniform(a, b)?))
    }

    fn with_tilt(density: Density, tilt: f64) -> Self {
        let mut law = ContinuousLaw {
            density,
            tilt,
            log_norm: 0.0,
            mean: 0.0,
            variance: 0.0,
        };
        let (i0, _, _) = law.raw_moments(0.0);
        law.log_norm = i0.ln();
        let s = law.summary(0.0);
        law.mean = law.ground() + s.gap;
        law.variance = s.variance;
        law
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    /// Accumulated tilt relative to the base density.
    pub fn tilt_parameter(&self) -> f64 {
        self.tilt
    }

    pub fn ground(&self) -> f64 {
        self.density.lower()
    }

    pub fn ceiling(&self) -> f64 {
        self.density.upper()
    }

    /// Normalized density of this law at `t`.
    pub fn pdf(&self, t: f64) -> f64 {
        self.density.eval(t) * (-self.tilt * (t - self.ground()) - self.log_norm).exp()
    }

    /// Support `[a, b]` when this is an untilted constant density.
    pub fn uniform_support(&self) -> Option<(f64, f64)> {
        if self.tilt != 0.0 {
            return None;
        }
        let uniform = match &self.density {
            Density::Spline(s) => s.knots().len() == 2,
            Density::Piecewise(p) => p.breaks().len() == 2 && p.eval(p.breaks()[0]) == p.eval(p.breaks()[1]),
        };
        uniform.then(|| (self.ground(), self.ceiling()))
    }

    /// Quadrature pieces for total tilt `beta`: the polynomial segments of
    /// the density, split so no piece is wider than one thermal length.
    pub(crate) fn pieces(&self, beta: f64) -> Vec<(f64, f64)> {
        let lower = self.ground();
        let breaks = self.density.breakpoints();
        let by_degree = (self.density.degree() / 16 + 1) as f64;
        let mut out = Vec::new();
        'outer: for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let count = (beta * (b - a)).ceil().max(by_degree).max(1.0);
            let count = count.min(1e9) as usize;
            let step = (b - a) / count as f64;
            for j in 0..count {
                let lo = a + step * j as f64;
                if beta * (lo - lower) > TILT_CUTOFF {
                    break 'outer;
                }
                let hi = if j + 1 == count { b } else { lo + step };
                out.push((lo, hi));
            }
        }
        out
    }

    /// Calls `f(t, w)` for each quadrature node, where `w` already includes
    /// the rule weight, the base density and `exp(-(tilt + beta)(t - lower))`.
    fn for_each_node<F: FnMut(f64, f64)>(&self, beta: f64, mut f: F) {
        let rule = GaussLegendre::standard();
        let lower = self.ground();
        let total = self.tilt + beta;
        for (a, b) in self.pieces(total) {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let t = mid + half * x;
                let weight = w * half * self.density.eval(t) * (-total * (t - lower)).exp();
                f(t, weight);
            }
        }
    }

    /// Unnormalized zeroth moment and first two central moments of H - lower.
    fn raw_moments(&self, beta: f64) -> (f64, f64, f64) {
        let lower = self.ground();
        let mut nodes = Vec::new();
        self.for_each_node(beta, |t, w| nodes.push((t - lower, w)));
        let i0: f64 = nodes.iter().map(|&(_, w)| w).sum();
        let gap = nodes.iter().map(|&(s, w)| s * w).sum::<f64>() / i0;
        let variance = nodes
            .iter()
            .map(|&(s, w)| {
                let d = s - gap;
                w * d * d
            })
            .sum::<f64>()
            / i0;
        (i0, gap, variance)
    }

    fn summary(&self, beta: f64) -> TiltSummary {
        let (i0, gap, variance) = self.raw_moments(beta);
        TiltSummary {
            beta,
            ground: self.ground(),
            log_z_shifted: i0.ln() - self.log_norm,
            gap,
            variance,
        }
    }

    fn tilt(&self, beta: f64) -> ContinuousLaw {
        ContinuousLaw::with_tilt(self.density.clone(), self.tilt + beta)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < self.ground() {
            return 0.0;
        }
        if x >= self.ceiling() {
            return 1.0;
        }
        let rule = GaussLegendre::standard();
        let lower = self.ground();
        let mut acc = 0.0;
        for (a, b) in self.pieces(self.tilt) {
            if a >= x {
                break;
            }
            acc += rule.integrate(a, b.min(x), |t| {
                self.density.eval(t) * (-self.tilt * (t - lower)).exp()
            });
        }
        (acc / self.log_norm.exp()).clamp(0.0, 1.0)
    }
}

/// Canonical quantities of a law tilted by `exp(-beta H)`, expressed
/// relative to the ground energy so that low-temperature values keep full
/// relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSummary {
    pub beta: f64,
    pub ground: f64,
    /// log E[exp(-beta (H - ground))].
    pub log_z_shifted: f64,
    /// E_beta[H] - ground.
    pub gap: f64,
    /// Var_beta[H].
    pub variance: f64,
}

impl TiltSummary {
    pub fn log_z(&self) -> f64 {
        self.log_z_shifted - self.beta * self.ground
    }

    pub fn energy(&self) -> f64 {
        self.ground + self.gap
    }

    /// beta E + log Z, in units of k_B. Never positive.
    pub fn entropy(&self) -> f64 {
        (self.beta * self.gap + self.log_z_shifted).min(0.0)
    }
}

/// The probability law of H(x) under a measure on a molecule's state space.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyLaw {
    Discrete(DiscreteLaw),
    Continuous(ContinuousLaw),
}

impl EnergyLaw {
    pub fn ground(&self) -> f64 {
        match self {
            EnergyLaw::Discrete(d) => d.ground(),
            EnergyLaw::Continuous(c) => c.ground(),
        }
    }

    pub fn ceiling(&self) -> f64 {
        match self {
            EnergyLaw::Discrete(d) => d.ceiling(),
            EnergyLaw::Continuous(c) => c.ceiling(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            EnergyLaw::Discrete(d) => d.mean,
            EnergyLaw::Continuous(c) => c.mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            EnergyLaw::Discrete(d) => d.variance,
            EnergyLaw::Continuous(c) => c.variance,
        }
    }

    pub fn width(&self) -> f64 {
        self.ceiling() - self.ground()
    }

    /// A law with all mass at a single energy.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, EnergyLaw::Discrete(d) if d.energies.len() == 1)
    }

    /// Tilted quantities at `beta >= 0`. The caller validates `beta`.
    pub fn summary(&self, beta: f64) -> TiltSummary {
        match self {
            EnergyLaw::Discrete(d) => d.summary(beta),
            EnergyLaw::Continuous(c) => c.summary(beta),
        }
    }

    /// Reweights by `exp(-beta H) / Z(beta)`.
    pub fn tilted(&self, beta: f64) -> EnergyLaw {
        if beta == 0.0 {
            return self.clone();
        }
        match self {
            EnergyLaw::Discrete(d) => EnergyLaw::Discrete(d.tilt(beta)),
            EnergyLaw::Continuous(c) => EnergyLaw::Continuous(c.tilt(beta)),
        }
    }

    /// P[H <= x].
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            EnergyLaw::Discrete(d) => d.cdf(x, false),
            EnergyLaw::Continuous(c) => c.cdf(x),
        }
    }

    /// P[H < x].
    pub fn cdf_strict(&self, x: f64) -> f64 {
        match self {
            EnergyLaw::Discrete(d) => d.cdf(x, true),
            EnergyLaw::Continuous(c) => c.cdf(x),
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteLaw> {
        match self {
            EnergyLaw::Discrete(d) => Some(d),
            EnergyLaw::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&ContinuousLaw> {
        match self {
            EnergyLaw::Continuous(c) => Some(c),
            EnergyLaw::Discrete(_) => None,
        }
    }
}

impl From<DiscreteLaw> for EnergyLaw {
    fn from(d: DiscreteLaw) -> Self {
        EnergyLaw::Discrete(d)
    }
}

impl From<ContinuousLaw> for EnergyLaw {
    fn from(c: ContinuousLaw) -> Self {
        EnergyLaw::Continuous(c)
    }
}

impl fmt::Display for EnergyLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyLaw::Discrete(d) => write!(f, "discrete({} atoms)", d.energies.len()),
            EnergyLaw::Continuous(c) => {
                let kind = match &c.density {
                    Density::Spline(s) => format!("spline({} knots)", s.knots().len()),
                    Density::Piecewise(p) => format!("piecewise({} segments)", p.breaks().len() - 1),
                };
                if c.tilt != 0.0 {
                    write!(f, "{kind} tilted by {}", c.tilt)
                } else {
                    f.write_str(&kind)
                }
            }
        }
    }
}
