//! Drawing molecule energies from an [`EnergyLaw`].

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1};

use super::density::Density;
use super::law::{ContinuousLaw, EnergyLaw};
use crate::numeric::GaussLegendre;
use crate::rng::StreamRng;

/// Each quadrature piece is split into this many inversion cells.
const CELLS_PER_PIECE: usize = 8;

/// Draws single molecule energies.
#[derive(Debug, Clone)]
pub enum MoleculeSampler {
    Categorical { energies: Vec<f64>, cumulative: Vec<f64> },
    /// Untilted spline law: `sum_k w_k x_k` with `w` flat on the simplex.
    Simplex { knots: Vec<f64> },
    Inverse(InverseCdf),
}

impl MoleculeSampler {
    pub fn new(law: &EnergyLaw) -> Self {
        match law {
            EnergyLaw::Discrete(d) => {
                let mut acc = 0.0;
                let cumulative = d
                    .weights()
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc
                    })
                    .collect();
                MoleculeSampler::Categorical {
                    energies: d.energies().to_vec(),
                    cumulative,
                }
            }
            EnergyLaw::Continuous(c) => match c.density() {
                Density::Spline(s) if c.tilt_parameter() == 0.0 => MoleculeSampler::Simplex {
                    knots: s.knots().to_vec(),
                },
                _ => MoleculeSampler::Inverse(InverseCdf::new(c)),
            },
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            MoleculeSampler::Categorical {
                energies,
                cumulative,
            } => {
                let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
                let i = cumulative.partition_point(|&c| c <= u).min(energies.len() - 1);
                energies[i]
            }
            MoleculeSampler::Simplex { knots } => {
                let lower = knots[0];
                let mut total = 0.0;
                let mut weighted = 0.0;
                for &k in knots {
                    let e: f64 = Exp1.sample(rng);
                    total += e;
                    weighted += e * (k - lower);
                }
                lower + weighted / total
            }
            MoleculeSampler::Inverse(inv) => inv.sample(rng),
        }
    }
}

/// Draws the total energy of `n` molecules at once.
#[derive(Debug, Clone)]
pub enum SumSampler {
    /// Discrete laws: atom occupation counts from sequential binomials.
    Multinomial { energies: Vec<f64>, conditional: Vec<f64> },
    PerMolecule(MoleculeSampler),
}

impl SumSampler {
    pub fn new(law: &EnergyLaw) -> Self {
        match law {
            EnergyLaw::Discrete(d) => {
                let w = d.weights();
                let mut remaining: f64 = w.iter().sum();
                let mut conditional = Vec::with_capacity(w.len());
                for &p in &w {
                    conditional.push(if remaining > 0.0 { (p / remaining).min(1.0) } else { 1.0 });
                    remaining -= p;
                }
                let g = d.ground();
                SumSampler::Multinomial {
                    energies: d.energies().iter().map(|e| e - g).collect(),
                    conditional,
                }
            }
            EnergyLaw::Continuous(_) => SumSampler::PerMolecule(MoleculeSampler::new(law)),
        }
    }

    /// Returns `sum_j (H_j - ground)` for `n` iid molecules. Working relative
    /// to the ground keeps lattice sums exact for integer-spaced atoms.
    pub fn sample_excess(&self, n: u64, ground: f64, rng: &mut StreamRng) -> f64 {
        match self {
            SumSampler::Multinomial {
                energies,
                conditional,
            } => {
                let mut left = n;
                let mut total = 0.0;
                let last = energies.len() - 1;
                for (i, (&e, &p)) in energies.iter().zip(conditional).enumerate() {
                    if left == 0 {
                        break;
                    }
                    let count = if i == last || p >= 1.0 {
                        left
                    } else {
                        Binomial::new(left, p).expect("valid binomial").sample(rng)
                    };
                    total += count as f64 * e;
                    left -= count;
                }
                total
            }
            SumSampler::PerMolecule(m) => (0..n).map(|_| m.sample(rng) - ground).sum(),
        }
    }
}

/// Tabulated inverse CDF refined by Newton steps inside each cell, for
/// continuous laws (tilted or not) with a polynomial base density.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    law: ContinuousLaw,
    cells: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl InverseCdf {
    pub fn new(law: &ContinuousLaw) -> Self {
        let rule = GaussLegendre::standard();
        let mut cells = Vec::new();
        for (a, b) in law.pieces(law.tilt_parameter()) {
            let step = (b - a) / CELLS_PER_PIECE as f64;
            for j in 0..CELLS_PER_PIECE {
                let lo = a + step * j as f64;
                let hi = if j + 1 == CELLS_PER_PIECE { b } else { lo + step };
                cells.push((lo, hi));
            }
        }
        let mut acc = 0.0;
        let cumulative = cells
            .iter()
            .map(|&(a, b)| {
                acc += rule.integrate(a, b, |t| law.pdf(t));
                acc
            })
            .collect();
        InverseCdf {
            law: law.clone(),
            cells,
            cumulative,
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        let total = self.cumulative[self.cumulative.len() - 1];
        let u: f64 = rng.random::<f64>() * total;
        let i = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.cells.len() - 1);
        let before = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        let mass = self.cumulative[i] - before;
        let target = (u - before).clamp(0.0, mass);
        self.invert_cell(self.cells[i], mass, target)
    }

    fn invert_cell(&self, (a, b): (f64, f64), mass: f64, target: f64) -> f64 {
        if mass <= 0.0 {
            return a;
        }
        let rule = GaussLegendre::short();
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (b - a) * (target / mass);
        for _ in 0..50 {
            let g = rule.integrate(a, x, |t| self.law.pdf(t)) - target;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.law.pdf(x);
            let mut next = if d > 0.0 { x - g / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * (b - a).max(f64::MIN_POSITIVE) || hi - lo <= 0.0 {
                return next;
            }
            x = next;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_laws::law::{Atom, DiscreteLaw};
    use crate::rng::RngStream;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn inverse_cdf_reproduces_tilted_uniform_moments() {
        let law: EnergyLaw = ContinuousLaw::uniform(0.0, 1.0).unwrap().into();
        let tilted = law.tilted(3.0);
        let sampler = MoleculeSampler::new(&tilted);
        assert!(matches!(sampler, MoleculeSampler::Inverse(_)));
        let mut rng = RngStream::new(11, 0).rng();
        let xs: Vec<f64> = (0..200_000).map(|_| sampler.sample(&mut rng)).collect();
        let (m, v) = mean_var(&xs);
        let se = (tilted.variance() / xs.len() as f64).sqrt();
        assert!((m - tilted.mean()).abs() < 4.0 * se, "{m} vs {}", tilted.mean());
        assert!((v - tilted.variance()).abs() < 0.02 * tilted.variance());
        assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn multinomial_sum_matches_law() {
        let law: EnergyLaw = DiscreteLaw::new(vec![
            Atom { energy: 0.0, weight: 0.2 },
            Atom { energy: 1.0, weight: 0.5 },
            Atom { energy: 3.0, weight: 0.3 },
        ])
        .unwrap()
        .into();
        let sampler = SumSampler::new(&law);
        let mut rng = RngStream::new(5, 0).rng();
        let n = 10;
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sampler.sample_excess(n, 0.0, &mut rng))
            .collect();
        let (m, v) = mean_var(&xs);
        let want_m = n as f64 * law.mean();
        let want_v = n as f64 * law.variance();
        assert!((m - want_m).abs() < 4.0 * (want_v / xs.len() as f64).sqrt());
        assert!((v - want_v).abs() < 0.03 * want_v);
        assert!(xs.iter().all(|x| x.fract() == 0.0));
    }

    #[test]
    fn categorical_point_mass() {
        let law: EnergyLaw = DiscreteLaw::point_mass(5.0).unwrap().into();
        let s = MoleculeSampler::new(&law);
        let mut rng = RngStream::new(1, 0).rng();
        assert!((0..100).all(|_| s.sample(&mut rng) == 5.0));
    }
}
