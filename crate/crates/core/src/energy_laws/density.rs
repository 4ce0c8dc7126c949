//! Densities of continuous energy laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized B-spline on a knot vector, i.e. the density of
/// `sum_k w_k x_k` when `w` is flat on the probability simplex and `x` are
/// the knots (repeats allowed). Evaluated with the Cox-de Boor recurrence,
/// which only forms convex combinations and so stays stable when knots
/// nearly coincide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineDensity {
    knots: Vec<f64>,
}

impl SplineDensity {
    pub fn new(mut knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidLaw("spline density needs at least two knots".into()));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidLaw("spline knot is not finite".into()));
        }
        knots.sort_by(f64::total_cmp);
        if knots[0] == knots[knots.len() - 1] {
            return Err(Error::InvalidLaw("spline knots span an empty interval".into()));
        }
        Ok(SplineDensity { knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn order(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = &self.knots;
        let (lo, hi) = (x[0], x[x.len() - 1]);
        if t < lo || t > hi {
            return 0.0;
        }
        let order = self.order();
        // Order-1 basis: indicator of the half-open knot span containing t,
        // with the last non-empty span closed on the right.
        let mut basis: Vec<f64> = (0..x.len() - 1)
            .map(|i| {
                let inside = if t == hi {
                    x[i] < x[i + 1] && x[i + 1] == hi
                } else {
                    x[i] <= t && t < x[i + 1]
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        for p in 2..=order {
            for i in 0..x.len() - p {
                let left = {
                    let d = x[i + p - 1] - x[i];
                    if d > 0.0 {
                        (t - x[i]) / d * basis[i]
                    } else {
                        0.0
                    }
                };
                let right = {
                    let d = x[i + p] - x[i + 1];
                    if d > 0.0 {
                        (x[i + p] - t) / d * basis[i + 1]
                    } else {
                        0.0
                    }
                };
                basis[i] = left + right;
            }
        }
        basis[0] * order as f64 / (hi - lo)
    }
}

/// A density given as polynomials between breakpoints. Segment `i` covers
/// `[breaks[i], breaks[i+1]]` and holds coefficients in powers of
/// `t - breaks[i]`, constant term first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidLaw("piecewise density needs two breakpoints".into()));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidLaw(
                "breakpoints must be finite and strictly increasing".into(),
            ));
        }
        if coeffs.len() != breaks.len() - 1 {
            return Err(Error::InvalidLaw(format!(
                "{} segments need {} coefficient lists, got {}",
                breaks.len() - 1,
                breaks.len() - 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidLaw("segment coefficients must be finite and nonempty".into()));
        }
        Ok(PiecewisePolynomial { breaks, coeffs })
    }

    /// A constant density on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidLaw(format!("empty interval [{a}, {b}]")));
        }
        PiecewisePolynomial::new(vec![a, b], vec![vec![1.0 / (b - a)]])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn eval(&self, t: f64) -> f64 {
        let b = &self.breaks;
        if t < b[0] || t > b[b.len() - 1] {
            return 0.0;
        }
        let seg = b[1..].partition_point(|&x| x <= t).min(self.coeffs.len() - 1);
        let dt = t - b[seg];
        self.coeffs[seg].iter().rev().fold(0.0, |acc, c| acc * dt + c)
    }

    fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len() - 1).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Density {
    Spline(SplineDensity),
    Piecewise(PiecewisePolynomial),
}

impl Density {
    pub fn lower(&self) -> f64 {
        self.breakpoints()[0]
    }

    pub fn upper(&self) -> f64 {
        *self.breakpoints().last().unwrap()
    }

    /// Distinct points between which the density is a single polynomial.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Density::Spline(s) => {
                let mut k = s.knots().to_vec();
                k.dedup();
                k
            }
            Density::Piecewise(p) => p.breaks().to_vec(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Density::Spline(s) => s.order() - 1,
            Density::Piecewise(p) => p.degree(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Density::Spline(s) => s.eval(t),
            Density::Piecewise(p) => p.eval(t),
        }
    }
}
