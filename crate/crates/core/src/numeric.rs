//! Small numerical kernels shared by the thermodynamic and simulation code.

use std::sync::OnceLock;

/// log(sum(exp(x))) over a slice; -inf for an empty slice or all -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// log(exp(a) + exp(b)).
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// log(exp(a) - exp(b)) for b <= a; -inf when they are equal.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    let d = b - a;
    // Pick the branch that avoids cancellation.
    if d > -std::f64::consts::LN_2 {
        a + (-d.exp_m1()).ln()
    } else {
        a + (-d.exp()).ln_1p()
    }
}

/// log(cosh(x)) without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

// Coefficients of coth(x) - 1/x = sum_k c_k x^(2k-1), c_k = 2^(2k) B_(2k) / (2k)!.
const LANGEVIN_SERIES: [f64; 12] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
    4.0 / 18243225.0,
    -3617.0 / 162820783125.0,
    87734.0 / 38979295480125.0,
    -349222.0 / 1531329465290625.0,
    310732.0 / 13447856940643125.0,
    -472728182.0 / 201919571963756521875.0,
];

/// Below this argument the Langevin function and its relatives are summed
/// from their power series.
pub const LANGEVIN_SERIES_CUTOFF: f64 = 0.5;

/// Langevin function L(x) = coth(x) - 1/x, relative error below 3e-15.
pub fn langevin(x: f64) -> f64 {
    let a = x.abs();
    let value = if a < LANGEVIN_SERIES_CUTOFF {
        let x2 = a * a;
        let mut acc = 0.0;
        for c in LANGEVIN_SERIES.iter().rev() {
            acc = acc * x2 + c;
        }
        acc * a
    } else {
        1.0 / a.tanh() - 1.0 / a
    };
    value.copysign(x)
}

/// 1 - x^2 csch^2(x) = x^2 L'(x); the two-level uniform-law heat capacity.
pub fn one_minus_x2_csch2(x: f64) -> f64 {
    let a = x.abs();
    if a < LANGEVIN_SERIES_CUTOFF {
        // x^2 L'(x) = sum_k (2k-1) c_k x^(2k)
        let x2 = a * a;
        let mut acc = 0.0;
        for (k, c) in LANGEVIN_SERIES.iter().enumerate().rev() {
            acc = acc * x2 + (2 * k + 1) as f64 * c;
        }
        acc * x2
    } else if a > 350.0 {
        1.0
    } else {
        let r = a / a.sinh();
        1.0 - r * r
    }
}

/// log(sinh(x)/x) for x >= 0.
pub fn log_sinhc(x: f64) -> f64 {
    let a = x.abs();
    if a < LANGEVIN_SERIES_CUTOFF {
        // d/dx log(sinh x / x) = L(x), integrate the series term by term.
        let x2 = a * a;
        let mut acc = 0.0;
        for (k, c) in LANGEVIN_SERIES.iter().enumerate().rev() {
            acc = acc * x2 + c / (2 * k + 2) as f64;
        }
        acc * x2
    } else if a > 20.0 {
        a - (2.0 * a).ln() + (-(-2.0 * a).exp()).ln_1p()
    } else {
        (a.sinh() / a).ln()
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The shared rule used by the law quadrature; exact for polynomials
    /// of degree below 40.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(20))
    }

    /// Eight-point rule for short inversion cells.
    pub fn short() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(8))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
