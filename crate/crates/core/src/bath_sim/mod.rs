//! Finite-n bath entropies `S_n(E) = (1/n) log P[avg <= E]` (units of k_B).
//!
//! The bath energy is a sum of `n` iid molecule energies. Exact values come
//! from a log-domain lattice convolution (binomial for two atoms) or from the
//! Irwin-Hall law for the uniform molecule law. Monte Carlo comes in a naive
//! flavour, which fails once the event is rare, and an importance-sampled
//! flavour that draws from the law tilted to the temperature whose specific
//! energy is `E`.

pub mod exact;
mod monte_carlo;

use serde::Serialize;

use crate::energy_laws::EnergyLaw;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::thermo;

pub use monte_carlo::MC_CHUNK;

use exact::{IRWIN_HALL_MAX_N, Lattice};
use monte_carlo::{ChunkStats, ExcessWindow};

/// Relative slack on event boundaries, so lattice sums that land exactly on
/// `n E` are counted despite rounding.
const EVENT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    law: EnergyLaw,
    n: usize,
}

impl BathSpec {
    pub fn new(law: EnergyLaw, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("bath needs at least one molecule".into()));
        }
        Ok(BathSpec { law, n })
    }

    pub fn law(&self) -> &EnergyLaw {
        &self.law
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slack(&self) -> f64 {
        EVENT_SLACK * self.n as f64 * self.law.width().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMethod {
    ExactDp,
    IrwinHall,
    McNaive,
    McTilted,
}

impl TailMethod {
    pub fn is_exact(self) -> bool {
        matches!(self, TailMethod::ExactDp | TailMethod::IrwinHall)
    }

    pub fn name(self) -> &'static str {
        match self {
            TailMethod::ExactDp => "exact-dp",
            TailMethod::IrwinHall => "irwin-hall",
            TailMethod::McNaive => "mc-naive",
            TailMethod::McTilted => "mc-tilted",
        }
    }
}

/// Method requested by a caller; `Auto` and `Exact` resolve per law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Exact,
    Mc,
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    /// `avg <= energy`.
    Below { energy: f64 },
    /// `energy - delta <= avg <= energy`.
    Shell { energy: f64, delta: f64 },
}

impl Event {
    fn upper(&self) -> f64 {
        match *self {
            Event::Below { energy } | Event::Shell { energy, .. } => energy,
        }
    }

    fn lower(&self) -> Option<f64> {
        match *self {
            Event::Below { .. } => None,
            Event::Shell { energy, delta } => Some(energy - delta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    /// `(1/n) log P[event]`; `-inf` when the event has no mass or no hits.
    pub value: f64,
    /// Zero for exact methods; delta-method error for Monte Carlo.
    pub std_error: f64,
    pub method: TailMethod,
    pub event: Event,
    pub n: usize,
    pub samples: Option<u64>,
    pub hits: Option<u64>,
    /// Monte Carlo recorded no hits, so `value` is `-inf`.
    pub zero_hits: bool,
}

impl TailEstimate {
    fn exact(spec: &BathSpec, event: Event, method: TailMethod, log_p: f64) -> Self {
        TailEstimate {
            value: (log_p / spec.n as f64).min(0.0),
            std_error: 0.0,
            method,
            event,
            n: spec.n,
            samples: None,
            hits: None,
            zero_hits: false,
        }
    }
}

/// Sample budget and stream for the Monte Carlo methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub stream: RngStream,
}

fn exact_lattice(spec: &BathSpec, event: Event) -> Result<TailEstimate> {
    let law = spec.law.as_discrete().ok_or_else(|| {
        Error::WrongLaw("exact convolution needs a discrete law".into())
    })?;
    let lattice = Lattice::detect(law)?;
    let method = TailMethod::ExactDp;
    let Some(top) = lattice.index_at_most(spec.n, event.upper()) else {
        return Ok(TailEstimate::exact(spec, event, method, f64::NEG_INFINITY));
    };
    let bottom = event
        .lower()
        .map_or(0, |lo| lattice.index_at_least(spec.n, lo));
    if event.upper() >= law.ceiling() && bottom == 0 {
        return Ok(TailEstimate::exact(spec, event, method, 0.0));
    }
    let masses = exact::lattice_masses(&lattice, spec.n, top)?;
    let log_p = exact::log_mass_between(&masses, bottom, top);
    Ok(TailEstimate::exact(spec, event, method, log_p))
}

fn exact_uniform(spec: &BathSpec, event: Event) -> Result<TailEstimate> {
    let law = spec
        .law
        .as_continuous()
        .ok_or_else(|| Error::WrongLaw("Irwin-Hall needs a continuous uniform law".into()))?;
    let support = exact::uniform_support(law)?;
    if spec.n > IRWIN_HALL_MAX_N {
        return Err(Error::TooManyMolecules {
            n: spec.n,
            limit: IRWIN_HALL_MAX_N,
        });
    }
    let lo = event.lower().unwrap_or(f64::NEG_INFINITY);
    let log_p = exact::irwin_hall_log_band(spec.n, support, lo, event.upper());
    Ok(TailEstimate::exact(spec, event, TailMethod::IrwinHall, log_p))
}

/// Exact `(1/n) log P[avg <= E]` for atoms on a lattice.
pub fn exact_discrete_tail(spec: &BathSpec, energy: f64) -> Result<TailEstimate> {
    exact_lattice(spec, Event::Below { energy })
}

/// Exact `(1/n) log P[avg <= E]` for the uniform law (n <= 30).
pub fn irwin_hall_tail(spec: &BathSpec, energy: f64) -> Result<TailEstimate> {
    exact_uniform(spec, Event::Below { energy })
}

fn window(spec: &BathSpec, event: Event) -> ExcessWindow {
    let g = spec.law.ground();
    let n = spec.n as f64;
    ExcessWindow {
        lower: event.lower().map(|lo| n * (lo - g)),
        upper: n * (event.upper() - g),
        slack: spec.slack(),
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        Err(Error::InvalidArgument("need at least one sample".into()))
    } else {
        Ok(())
    }
}

fn from_stats(
    spec: &BathSpec,
    event: Event,
    method: TailMethod,
    samples: u64,
    stats: ChunkStats,
    log_scale: f64,
) -> TailEstimate {
    let n = spec.n as f64;
    let count = samples as f64;
    let mean = stats.sum / count;
    let (value, std_error) = if stats.hits == 0 || mean <= 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let var = (stats.sum_sq / count - mean * mean).max(0.0) * count / (count - 1.0).max(1.0);
        let se = (var / count).sqrt() / mean / n;
        ((log_scale + mean.ln()) / n, se)
    };
    TailEstimate {
        value: value.min(0.0),
        std_error,
        method,
        event,
        n: spec.n,
        samples: Some(samples),
        hits: Some(stats.hits),
        zero_hits: stats.hits == 0,
    }
}

fn naive_estimate(spec: &BathSpec, event: Event, mc: McConfig) -> Result<TailEstimate> {
    check_samples(mc.samples)?;
    let stats = monte_carlo::naive(&spec.law, spec.n, window(spec, event), mc.samples, mc.stream);
    let mut est = from_stats(spec, event, TailMethod::McNaive, mc.samples, stats, 0.0);
    if stats.hits == mc.samples {
        est.value = 0.0;
        est.std_error = 0.0;
    }
    Ok(est)
}

fn tilted_estimate(spec: &BathSpec, event: Event, mc: McConfig) -> Result<TailEstimate> {
    check_samples(mc.samples)?;
    let energy = event.upper();
    let (ground, mean) = (spec.law.ground(), spec.law.mean());
    if !(energy > ground && energy < mean) {
        return Err(Error::OutOfRange {
            energy,
            lower: ground,
            upper: mean,
        });
    }
    let at = thermo::canonical(&spec.law, thermo::invert_beta(&spec.law, energy)?)?;
    let beta = at.beta;
    let tilted = spec.law.tilted(beta);
    let w = window(spec, event);
    let stats = monte_carlo::tilted(&tilted, beta, spec.n, w, mc.samples, mc.stream);
    let log_scale = spec.n as f64 * at.log_z_shifted + beta * w.upper;
    Ok(from_stats(spec, event, TailMethod::McTilted, mc.samples, stats, log_scale))
}

/// Naive Monte Carlo: `(1/n) log` of the hit fraction.
pub fn mc_tail(spec: &BathSpec, energy: f64, mc: McConfig) -> Result<TailEstimate> {
    naive_estimate(spec, Event::Below { energy }, mc)
}

/// Importance sampling from the law tilted to `beta(E)`, where the weak law
/// centres the tilted average at `E`. Each hit carries the weight
/// `Z(beta)^n exp(beta sum_j H_j)`. Requires `ground < E < mean`.
pub fn tilted_tail(spec: &BathSpec, energy: f64, mc: McConfig) -> Result<TailEstimate> {
    tilted_estimate(spec, Event::Below { energy }, mc)
}

/// Resolves `Auto`/`Exact` to a concrete method for this law and event.
pub fn resolve_method(spec: &BathSpec, energy: f64, method: Method) -> Result<TailMethod> {
    let lattice_ok = || {
        spec.law
            .as_discrete()
            .is_some_and(|d| Lattice::detect(d).is_ok())
    };
    let uniform_ok = || {
        spec.law
            .as_continuous()
            .is_some_and(|c| c.uniform_support().is_some())
    };
    Ok(match method {
        Method::Mc => TailMethod::McNaive,
        Method::Tilted => TailMethod::McTilted,
        Method::Exact => {
            if lattice_ok() {
                TailMethod::ExactDp
            } else if uniform_ok() {
                TailMethod::IrwinHall
            } else if spec.law.as_discrete().is_some() {
                return Err(Error::Incommensurate);
            } else {
                return Err(Error::WrongLaw(
                    "no exact method for this continuous law".into(),
                ));
            }
        }
        Method::Auto => {
            if lattice_ok() {
                TailMethod::ExactDp
            } else if energy > spec.law.ground() && energy < spec.law.mean() {
                TailMethod::McTilted
            } else {
                TailMethod::McNaive
            }
        }
    })
}

fn estimate(
    spec: &BathSpec,
    event: Event,
    method: Method,
    mc: Option<McConfig>,
) -> Result<TailEstimate> {
    let need_mc = || {
        mc.ok_or_else(|| Error::InvalidArgument("Monte Carlo needs a sample budget and seed".into()))
    };
    match resolve_method(spec, event.upper(), method)? {
        TailMethod::ExactDp => exact_lattice(spec, event),
        TailMethod::IrwinHall => exact_uniform(spec, event),
        TailMethod::McNaive => naive_estimate(spec, event, need_mc()?),
        TailMethod::McTilted => tilted_estimate(spec, event, need_mc()?),
    }
}

/// `(1/n) log P[avg <= E]` by the requested method.
pub fn tail(spec: &BathSpec, energy: f64, method: Method, mc: Option<McConfig>) -> Result<TailEstimate> {
    estimate(spec, Event::Below { energy }, method, mc)
}

/// `(1/n) log P[E - delta <= avg <= E]`. Its limit does not depend on delta.
pub fn shell_entropy(
    spec: &BathSpec,
    energy: f64,
    delta: f64,
    method: Method,
    mc: Option<McConfig>,
) -> Result<TailEstimate> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("shell width must be positive, got {delta}")));
    }
    estimate(spec, Event::Shell { energy, delta }, method, mc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `S_n(E)` in units of k_B.
    pub entropy: f64,
    /// The n-independent Chernoff bound.
    pub bound: f64,
    /// `bound - entropy`, nonnegative at every n.
    pub gap: f64,
    pub std_error: f64,
    pub method: TailMethod,
}

/// `S_n(E)` against the Chernoff bound for each n.
pub fn convergence_study(
    law: &EnergyLaw,
    energy: f64,
    n_list: &[usize],
    method: Method,
    mc: Option<McConfig>,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty molecule-count list".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("molecule counts must be ascending".into()));
    }
    let bound = thermo::chernoff_rate(law, energy)?;
    n_list
        .iter()
        .map(|&n| {
            let spec = BathSpec::new(law.clone(), n)?;
            let est = tail(&spec, energy, method, mc)?;
            Ok(ConvergenceRow {
                n,
                entropy: est.value,
                bound,
                gap: bound - est.value,
                std_error: est.std_error,
                method: est.method,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevReport {
    /// `min(1, variance / (n delta^2))`.
    pub bound: f64,
    /// Monte Carlo estimate of `P[|avg - mean| >= delta]`.
    pub empirical: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Chebyshev bound on deviations of the bath average from the mean, with a
/// Monte Carlo check.
pub fn chebyshev_bound(
    law: &EnergyLaw,
    n: usize,
    delta: f64,
    mc: McConfig,
) -> Result<ChebyshevReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("bath needs at least one molecule".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    check_samples(mc.samples)?;
    let spec = BathSpec::new(law.clone(), n)?;
    let bound = (law.variance() / (n as f64 * delta * delta)).min(1.0);
    let sampler = crate::energy_laws::SumSampler::new(law);
    let ground = law.ground();
    let centre = n as f64 * (law.mean() - ground);
    let reach = n as f64 * delta - spec.slack();
    let stats = monte_carlo::run_chunks(mc.samples, mc.stream, |rng| {
        let excess = sampler.sample_excess(n as u64, ground, rng);
        ((excess - centre).abs() >= reach).then_some(1.0)
    });
    let p = stats.hits as f64 / mc.samples as f64;
    Ok(ChebyshevReport {
        bound,
        empirical: p,
        std_error: (p * (1.0 - p) / mc.samples as f64).sqrt(),
        samples: mc.samples,
    })
}
