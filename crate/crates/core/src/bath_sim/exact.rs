//! Exact finite-n tails for lattice laws and for the uniform law.

use crate::energy_laws::{ContinuousLaw, DiscreteLaw};
use crate::error::{Error, Result};
use crate::numeric::{log_diff_exp, log_sum_exp};

/// Upper bound on `n * (lattice cells)` for the convolution.
pub const WORK_LIMIT: u128 = 100_000_000;

/// Largest n for the alternating Irwin-Hall sum.
pub const IRWIN_HALL_MAX_N: usize = 30;

const LATTICE_TOLERANCE: f64 = 1e-9;
const MAX_SUBDIVISION: u64 = 64;
const MAX_INDEX: f64 = 1e7;

/// Atom energies written as `ground + spacing * index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub ground: f64,
    pub spacing: f64,
    pub indices: Vec<u64>,
    pub log_weights: Vec<f64>,
}

impl Lattice {
    /// Finds the coarsest lattice among `h / m`, `m = 1..=64`, where `h` is
    /// the smallest gap between atoms, on which every atom sits within
    /// 1e-9 (in lattice units) of a lattice point.
    pub fn detect(law: &DiscreteLaw) -> Result<Lattice> {
        let energies = law.energies();
        let ground = energies[0];
        if energies.len() == 1 {
            return Ok(Lattice {
                ground,
                spacing: 1.0,
                indices: vec![0],
                log_weights: law.log_weights().to_vec(),
            });
        }
        let min_gap = energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        for m in 1..=MAX_SUBDIVISION {
            let spacing = min_gap / m as f64;
            let mut indices = Vec::with_capacity(energies.len());
            let fits = energies.iter().all(|&e| {
                let k = (e - ground) / spacing;
                let rounded = k.round();
                let ok = rounded <= MAX_INDEX
                    && (k - rounded).abs() <= LATTICE_TOLERANCE * rounded.max(1.0);
                if ok {
                    indices.push(rounded as u64);
                }
                ok
            });
            if fits {
                return Ok(Lattice {
                    ground,
                    spacing,
                    indices,
                    log_weights: law.log_weights().to_vec(),
                });
            }
        }
        Err(Error::Incommensurate)
    }

    /// Largest lattice index `K` with `ground + spacing K / n <= energy`,
    /// or `None` when no sum qualifies.
    pub fn index_at_most(&self, n: usize, energy: f64) -> Option<u64> {
        let x = n as f64 * (energy - self.ground) / self.spacing;
        let k = (x + LATTICE_TOLERANCE * x.abs().max(1.0)).floor();
        (k >= 0.0).then_some(k.min(u64::MAX as f64 / 2.0) as u64)
    }

    /// Smallest lattice index `K` with `ground + spacing K / n >= energy`.
    pub fn index_at_least(&self, n: usize, energy: f64) -> u64 {
        let x = n as f64 * (energy - self.ground) / self.spacing;
        let k = (x - LATTICE_TOLERANCE * x.abs().max(1.0)).ceil();
        k.max(0.0) as u64
    }

    fn top_index(&self) -> u64 {
        *self.indices.last().unwrap()
    }
}

/// `log P[S_n = K]` for each attainable lattice index `K <= cap`, as sorted
/// `(K, log mass)` pairs.
pub type LatticeMasses = Vec<(u64, f64)>;

/// Two-atom laws: the upper-atom count is binomial.
pub fn binomial_masses(lattice: &Lattice, n: usize, cap: u64) -> LatticeMasses {
    assert_eq!(lattice.indices.len(), 2);
    let step = lattice.indices[1];
    let (log_q, log_p) = (lattice.log_weights[0], lattice.log_weights[1]);
    let max_j = (cap / step).min(n as u64) as usize;
    let mut out = Vec::with_capacity(max_j + 1);
    let mut log_choose = 0.0;
    for j in 0..=max_j {
        if j > 0 {
            log_choose += ((n - j + 1) as f64 / j as f64).ln();
        }
        let term = log_choose + j as f64 * log_p + (n - j) as f64 * log_q;
        out.push((j as u64 * step, term));
    }
    out
}

/// Sequential log-domain convolution, truncated at `cap` since every atom
/// index is nonnegative.
pub fn convolution_masses(lattice: &Lattice, n: usize, cap: u64) -> Result<LatticeMasses> {
    let cap = cap.min(n as u64 * lattice.top_index());
    let work = n as u128 * (cap as u128 + 1);
    if work > WORK_LIMIT {
        return Err(Error::WorkBound {
            work,
            limit: WORK_LIMIT,
        });
    }
    let len = cap as usize + 1;
    let mut current = vec![f64::NEG_INFINITY; len];
    let mut next = vec![f64::NEG_INFINITY; len];
    current[0] = 0.0;
    let mut reach = 0usize;
    let mut terms = Vec::with_capacity(lattice.indices.len());
    for _ in 0..n {
        let new_reach = (reach + lattice.top_index() as usize).min(cap as usize);
        for (k, slot) in next.iter_mut().enumerate().take(new_reach + 1) {
            terms.clear();
            for (&idx, &lw) in lattice.indices.iter().zip(&lattice.log_weights) {
                let idx = idx as usize;
                if idx <= k && k - idx <= reach {
                    terms.push(current[k - idx] + lw);
                }
            }
            *slot = log_sum_exp(&terms);
        }
        std::mem::swap(&mut current, &mut next);
        reach = new_reach;
    }
    Ok(current
        .into_iter()
        .enumerate()
        .take(reach + 1)
        .filter(|(_, v)| *v > f64::NEG_INFINITY)
        .map(|(k, v)| (k as u64, v))
        .collect())
}

/// Binomial route for two atoms, convolution otherwise.
pub fn lattice_masses(lattice: &Lattice, n: usize, cap: u64) -> Result<LatticeMasses> {
    if lattice.indices.len() == 2 {
        Ok(binomial_masses(lattice, n, cap))
    } else {
        convolution_masses(lattice, n, cap)
    }
}

/// `log sum` of masses with index in `[from, to]`.
pub fn log_mass_between(masses: &LatticeMasses, from: u64, to: u64) -> f64 {
    let terms: Vec<f64> = masses
        .iter()
        .filter(|(k, _)| *k >= from && *k <= to)
        .map(|&(_, v)| v)
        .collect();
    log_sum_exp(&terms)
}

/// `log P[U_1 + ... + U_n <= x]` for standard uniforms.
pub fn irwin_hall_log_cdf(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if x >= nf {
        return 0.0;
    }
    if x > 0.5 * nf {
        // Use the mirror image to keep the alternating sum short.
        let upper = irwin_hall_cdf_direct(n, nf - x);
        return (-upper).ln_1p();
    }
    irwin_hall_cdf_direct(n, x).ln()
}

fn irwin_hall_cdf_direct(n: usize, x: f64) -> f64 {
    let mut log_factorial = 0.0;
    for j in 2..=n {
        log_factorial += (j as f64).ln();
    }
    let mut sum = 0.0;
    let mut log_choose = 0.0;
    let top = x.floor() as usize;
    for k in 0..=top.min(n) {
        if k > 0 {
            log_choose += ((n - k + 1) as f64 / k as f64).ln();
        }
        let base = x - k as f64;
        if base <= 0.0 {
            break;
        }
        let term = (log_choose + n as f64 * base.ln() - log_factorial).exp();
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Scaled uniform support, or a wrong-law error.
pub fn uniform_support(law: &ContinuousLaw) -> Result<(f64, f64)> {
    law.uniform_support()
        .ok_or_else(|| Error::WrongLaw("Irwin-Hall needs an untilted uniform law".into()))
}

/// `log P[lo <= avg <= hi]` for n uniforms on `[a, b]`.
pub fn irwin_hall_log_band(n: usize, (a, b): (f64, f64), lo: f64, hi: f64) -> f64 {
    let scale = |e: f64| n as f64 * (e - a) / (b - a);
    let upper = irwin_hall_log_cdf(n, scale(hi));
    if lo <= a {
        return upper;
    }
    log_diff_exp(upper, irwin_hall_log_cdf(n, scale(lo)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_laws::Atom;

    fn law(pairs: &[(f64, f64)]) -> DiscreteLaw {
        DiscreteLaw::new(
            pairs
                .iter()
                .map(|&(energy, weight)| Atom { energy, weight })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lattice_detection() {
        let l = Lattice::detect(&law(&[(0.0, 0.5), (1.0, 0.5)])).unwrap();
        assert_eq!((l.spacing, l.indices.clone()), (1.0, vec![0, 1]));
        let l = Lattice::detect(&law(&[(0.0, 0.3), (0.4, 0.3), (1.0, 0.4)])).unwrap();
        assert!((l.spacing - 0.2).abs() < 1e-15);
        assert_eq!(l.indices, vec![0, 2, 5]);
        let l = Lattice::detect(&law(&[(-1.5, 0.5), (2.5, 0.5)])).unwrap();
        assert_eq!(l.indices, vec![0, 1]);
        assert_eq!(
            Lattice::detect(&law(&[(0.0, 0.3), (1.0, 0.3), (std::f64::consts::PI, 0.4)])),
            Err(Error::Incommensurate)
        );
    }

    #[test]
    fn closed_boundary_counts() {
        let l = Lattice::detect(&law(&[(0.0, 0.5), (1.0, 0.5)])).unwrap();
        assert_eq!(l.index_at_most(10, 0.3), Some(3));
        assert_eq!(l.index_at_most(10, 0.299), Some(2));
        assert_eq!(l.index_at_most(10, -0.01), None);
        assert_eq!(l.index_at_least(10, 0.2), 2);
        assert_eq!(l.index_at_least(10, 0.21), 3);
    }

    #[test]
    fn binomial_and_convolution_agree() {
        let l = Lattice::detect(&law(&[(0.0, 0.3), (1.0, 0.7)])).unwrap();
        for n in [1, 7, 40, 300] {
            let cap = n as u64 / 3;
            let a = binomial_masses(&l, n, cap);
            let b = convolution_masses(&l, n, cap).unwrap();
            assert_eq!(a.len(), b.len());
            for ((ka, va), (kb, vb)) in a.iter().zip(&b) {
                assert_eq!(ka, kb);
                assert!((va - vb).abs() < 1e-10 * va.abs().max(1.0), "n={n} k={ka}");
            }
        }
    }

    #[test]
    fn convolution_three_atoms_by_enumeration() {
        let l = Lattice::detect(&law(&[(0.0, 0.2), (1.0, 0.5), (3.0, 0.3)])).unwrap();
        let masses = convolution_masses(&l, 3, 100).unwrap();
        let mut brute = [0.0; 10];
        let w = [(0usize, 0.2), (1, 0.5), (3, 0.3)];
        for a in w {
            for b in w {
                for c in w {
                    brute[a.0 + b.0 + c.0] += a.1 * b.1 * c.1;
                }
            }
        }
        for (k, v) in masses {
            assert!((v.exp() - brute[k as usize]).abs() < 1e-15);
        }
    }

    #[test]
    fn work_bound() {
        let l = Lattice::detect(&law(&[(0.0, 0.2), (1.0, 0.5), (3.0, 0.3)])).unwrap();
        assert!(matches!(
            convolution_masses(&l, 100_000, 100_000),
            Err(Error::WorkBound { .. })
        ));
    }

    #[test]
    fn irwin_hall_values() {
        assert!((irwin_hall_log_cdf(1, 0.25) - 0.25f64.ln()).abs() < 1e-15);
        assert!((irwin_hall_log_cdf(2, 0.5) - 0.125f64.ln()).abs() < 1e-15);
        assert_eq!(irwin_hall_log_cdf(2, 2.0), 0.0);
        assert!((irwin_hall_log_cdf(2, 1.5) - (1.0f64 - 0.125).ln()).abs() < 1e-15);
        assert!((irwin_hall_log_cdf(3, 1.5) - 0.5f64.ln()).abs() < 1e-14);
        // (1/20) ln F_20(5), from a 60-digit evaluation.
        assert!((irwin_hall_log_cdf(20, 5.0) / 20.0 - -0.520_000_510_728_646_7).abs() < 1e-12);
    }
}
