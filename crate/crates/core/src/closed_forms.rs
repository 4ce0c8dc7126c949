//! Two-level formulas for the Dirac and Haar measures.
//!
//! With `omega = (E2 - E1)/2` and `x = beta omega`, the Dirac measure gives
//! `E = mean - omega tanh(x)` and the Haar measure, under which H is uniform
//! on `[E1, E2]`, gives `E = 1/beta + mean - omega coth(x)`. The Haar forms
//! are evaluated through the Langevin function `coth(x) - 1/x`, summed from
//! its power series for small `x`, so there is no cancellation near
//! `beta = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{langevin, log_cosh, log_sinhc, one_minus_x2_csch2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevel {
    e1: f64,
    e2: f64,
}

impl TwoLevel {
    pub fn new(e1: f64, e2: f64) -> Result<Self> {
        if !e1.is_finite() || !e2.is_finite() || e2 < e1 {
            return Err(Error::InvalidArgument(format!(
                "two-level energies need E1 <= E2, got ({e1}, {e2})"
            )));
        }
        Ok(TwoLevel { e1, e2 })
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn omega(&self) -> f64 {
        0.5 * (self.e2 - self.e1)
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.e1 + self.e2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoLevelModel {
    Dirac,
    Haar,
}

/// Z, E, S, C at one inverse temperature; S and C in units of k_B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevelState {
    pub z: f64,
    pub log_z: f64,
    pub energy: f64,
    /// `E - mean`, kept separately because it is far smaller than `E` at
    /// high temperature.
    pub thermal_shift: f64,
    pub entropy: f64,
    pub heat_capacity: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta == f64::INFINITY {
        Err(Error::InvalidArgument(format!("beta {beta} is not finite")))
    } else if beta < 0.0 {
        Err(Error::NegativeBeta(beta))
    } else {
        Ok(())
    }
}

fn state(tl: &TwoLevel, beta: f64, log_z_rel: f64, reduced_shift: f64, c: f64) -> TwoLevelState {
    let omega = tl.omega();
    let x = beta * omega;
    let log_z = -beta * tl.mean() + log_z_rel;
    let thermal_shift = -omega * reduced_shift;
    TwoLevelState {
        z: log_z.exp(),
        log_z,
        energy: tl.mean() + thermal_shift,
        thermal_shift,
        entropy: (log_z_rel - x * reduced_shift).min(0.0),
        heat_capacity: c,
    }
}

/// Dirac measure: Z = (e^{-beta E1} + e^{-beta E2})/2.
pub fn dirac2(tl: &TwoLevel, beta: f64) -> Result<TwoLevelState> {
    check_beta(beta)?;
    let x = beta * tl.omega();
    let sech = 1.0 / x.cosh();
    Ok(state(tl, beta, log_cosh(x), x.tanh(), (x * sech).powi(2)))
}

/// Haar measure: Z = (e^{-beta E1} - e^{-beta E2}) / (beta (E2 - E1)).
pub fn haar2(tl: &TwoLevel, beta: f64) -> Result<TwoLevelState> {
    check_beta(beta)?;
    let x = beta * tl.omega();
    Ok(state(tl, beta, log_sinhc(x), langevin(x), one_minus_x2_csch2(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracInverse {
    pub beta: f64,
    pub log_z: f64,
    pub entropy: f64,
}

/// Inverts the Dirac energy relation on `(E1, mean]`. The entropy is the
/// binary Shannon form `ln(1/2) - p ln p - (1-p) ln(1-p)` with
/// `p = (E - E1)/(E2 - E1)`.
pub fn dirac2_of_energy(tl: &TwoLevel, energy: f64) -> Result<DiracInverse> {
    let mean = tl.mean();
    if !(energy > tl.e1 && energy <= mean) {
        return Err(Error::OutOfRange {
            energy,
            lower: tl.e1,
            upper: mean,
        });
    }
    let spread = tl.e2 - tl.e1;
    let p = (energy - tl.e1) / spread;
    let q = (tl.e2 - energy) / spread;
    let beta = (q / p).ln() / spread;
    let xlogx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
    let entropy = (-std::f64::consts::LN_2 - xlogx(p) - xlogx(q)).min(0.0);
    Ok(DiracInverse {
        beta,
        log_z: entropy - beta * energy,
        entropy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// `value - mean`.
    pub correction: f64,
    /// False when `|beta omega| > 1`, outside the expansion's useful range.
    pub in_regime: bool,
}

/// High-temperature expansion of E through third order in beta:
/// Dirac `mean - beta w^2 + beta^3 w^4 / 3`, Haar `mean - beta w^2 / 3 + beta^3 w^4 / 45`.
pub fn two_level_series(tl: &TwoLevel, beta: f64, model: TwoLevelModel) -> SeriesValue {
    let w2 = tl.omega() * tl.omega();
    let (first, third) = match model {
        TwoLevelModel::Dirac => (1.0, 1.0 / 3.0),
        TwoLevelModel::Haar => (1.0 / 3.0, 1.0 / 45.0),
    };
    let correction = -first * beta * w2 + third * beta.powi(3) * w2 * w2;
    SeriesValue {
        value: tl.mean() + correction,
        correction,
        in_regime: (beta * tl.omega()).abs() <= 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> TwoLevel {
        TwoLevel::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn dirac2_examples() {
        let s = dirac2(&unit(), 0.0).unwrap();
        assert_eq!((s.energy, s.heat_capacity, s.entropy, s.z), (0.5, 0.0, 0.0, 1.0));
        let s = dirac2(&unit(), 1.0).unwrap();
        assert!((s.energy - 0.268_941_421_369_995_1).abs() < 1e-15);
        assert!((s.heat_capacity - 0.196_611_933_241_481_85).abs() < 1e-15);
        assert!((s.log_z - -0.379_885_493_041_722_5).abs() < 1e-15);
        assert!((s.entropy - -0.110_944_071_671_727_35).abs() < 1e-15);
        let s = dirac2(&unit(), 40.0).unwrap();
        assert!(s.heat_capacity < 1e-14);
        assert!(dirac2(&unit(), -0.1).is_err());
    }

    #[test]
    fn haar2_examples() {
        let s = haar2(&unit(), 0.0).unwrap();
        assert_eq!((s.energy, s.heat_capacity, s.z), (0.5, 0.0, 1.0));
        let s = haar2(&unit(), 1.0).unwrap();
        assert!((s.z - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((s.energy - 0.418_023_293_130_673_6).abs() < 1e-15);
        assert!((s.heat_capacity - 0.079_326_405_792_207_68).abs() < 1e-15);
        let s = haar2(&unit(), 40.0).unwrap();
        assert!((s.heat_capacity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar2_matches_direct_formula_away_from_zero() {
        let tl = TwoLevel::new(-1.5, 2.5).unwrap();
        for &beta in &[0.3, 1.0, 7.0] {
            let s = haar2(&tl, beta).unwrap();
            let (a, b) = ((-beta * tl.e1()).exp(), (-beta * tl.e2()).exp());
            let z = (a - b) / (beta * (tl.e2() - tl.e1()));
            let e = 1.0 / beta + (tl.e1() * a - tl.e2() * b) / (a - b);
            assert!((s.z - z).abs() < 1e-13 * z);
            assert!((s.energy - e).abs() < 1e-13);
            assert!((s.entropy - (beta * e + z.ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn haar2_branches_agree_at_switchovers() {
        // Compare against the unexpanded coth form where it is still accurate.
        let tl = unit();
        for &x in &[1e-4, 0.5] {
            let beta = x / tl.omega();
            let s = haar2(&tl, beta).unwrap();
            let direct = 1.0 / beta + tl.mean() - tl.omega() / x.tanh();
            assert!((s.energy - direct).abs() < 1e-10, "x={x}");
            let below = haar2(&tl, beta * (1.0 - 1e-12)).unwrap();
            assert!((s.energy - below.energy).abs() < 1e-10);
        }
    }

    #[test]
    fn dirac2_inverse_examples() {
        let inv = dirac2_of_energy(&unit(), 0.5).unwrap();
        assert_eq!((inv.beta, inv.entropy), (0.0, 0.0));
        let inv = dirac2_of_energy(&unit(), 0.3).unwrap();
        assert!((inv.beta - 0.847_297_860_387_203_6).abs() < 1e-15);
        assert!((inv.entropy - -0.082_282_878_505_051_85).abs() < 1e-15);
        let inv = dirac2_of_energy(&unit(), 0.268_941_421).unwrap();
        assert!((inv.beta - 1.0).abs() < 1e-8);
        assert!(dirac2_of_energy(&unit(), 0.0).is_err());
        assert!(dirac2_of_energy(&unit(), 0.6).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        // Past x ~ 6 the excess over E1 falls below a few ulp of E and the
        // inverse is ill-conditioned.
        let tl = TwoLevel::new(-1.5, 2.5).unwrap();
        for &beta in &[0.01, 0.5, 1.0, 3.0] {
            let e = dirac2(&tl, beta).unwrap().energy;
            let inv = dirac2_of_energy(&tl, e).unwrap();
            assert!((inv.beta - beta).abs() < 1e-9 * beta.max(1.0), "beta={beta}");
            let s = dirac2(&tl, beta).unwrap();
            assert!((inv.entropy - s.entropy).abs() < 1e-9);
            assert!((inv.log_z - s.log_z).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_pair() {
        let tl = TwoLevel::new(2.0, 2.0).unwrap();
        for &beta in &[0.0, 1.0, 50.0] {
            for s in [dirac2(&tl, beta).unwrap(), haar2(&tl, beta).unwrap()] {
                assert_eq!(s.energy, 2.0);
                assert_eq!(s.heat_capacity, 0.0);
                assert_eq!(s.entropy, 0.0);
            }
        }
        assert!(TwoLevel::new(1.0, 0.0).is_err());
    }

    #[test]
    fn series_examples() {
        let tl = unit();
        for m in [TwoLevelModel::Dirac, TwoLevelModel::Haar] {
            assert_eq!(two_level_series(&tl, 0.0, m).value, 0.5);
        }
        let s = two_level_series(&tl, 0.1, TwoLevelModel::Dirac);
        assert!((s.value - 0.475_020_833_333_333_3).abs() < 1e-15);
        assert!(s.in_regime);
        assert!(!two_level_series(&tl, 3.0, TwoLevelModel::Dirac).in_regime);
        let d = two_level_series(&tl, 1e-3, TwoLevelModel::Dirac).correction;
        let h = two_level_series(&tl, 1e-3, TwoLevelModel::Haar).correction;
        assert!((d / h - 3.0).abs() < 1e-5);
    }
}
