//! Riemann zeta and the polylogarithm `Li_s(z)` on `z ∈ [0, 1]`.
//!
//! For `z ≤ 1/2` the defining series converges geometrically. Above that the
//! expansion in `μ = ln z` is used,
//!
//! `Li_s(e^μ) = Γ(1−s)(−μ)^{s−1} + Σ_k ζ(s−k) μ^k / k!`,
//!
//! with the usual logarithmic replacement of the `k = s−1` term when `s` is a
//! positive integer. With `|μ| ≤ ln 2` the terms shrink like `(|μ|/2π)^k`.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

const EM_N: usize = 20;
// B_2, B_4, ..., B_24
const BERNOULLI: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Riemann zeta function. Returns `+∞` at the pole `s = 1`.
#[must_use]
pub fn zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    if s.is_nan() {
        return f64::NAN;
    }
    if s < 0.0 {
        let t = 1.0 - s;
        if t > 171.0 {
            return f64::NAN;
        }
        return 2f64.powf(s) * PI.powf(s - 1.0) * (PI * s / 2.0).sin() * gamma(t) * zeta(t);
    }
    if s > 60.0 {
        return 1.0 + 2f64.powf(-s) + 3f64.powf(-s);
    }
    euler_maclaurin(s)
}

fn euler_maclaurin(s: f64) -> f64 {
    let n = EM_N as f64;
    let mut sum = 0.0;
    for k in (1..EM_N).rev() {
        sum += (k as f64).powf(-s);
    }
    let n_s = n.powf(-s);
    sum += n * n_s / (s - 1.0) + 0.5 * n_s;
    // Σ B_2j/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n_s / n;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * rising * npow;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let a = 2.0 * j as f64 + 1.0;
        rising *= (s + a) * (s + a + 1.0);
        fact *= (a + 2.0) * (a + 2.0 + 1.0);
        npow /= n * n;
    }
    sum
}

const SERIES_TERMS: usize = 30;
const DIRECT_TABLE: usize = 128;
const INTEGER_SNAP: f64 = 1e-12;

/// Polylogarithm of fixed order `s`, with precomputed expansion coefficients.
#[derive(Debug, Clone)]
pub struct Polylog {
    s: f64,
    integer: Option<usize>,
    coeffs: Vec<f64>,
    gamma_1ms: f64,
    log_coeff: f64,
    harmonic: f64,
    powers: Vec<f64>,
}

impl Polylog {
    #[must_use]
    pub fn new(s: f64) -> Self {
        let r = s.round();
        let integer = if (s - r).abs() < INTEGER_SNAP && r >= 1.0 {
            Some(r as usize)
        } else {
            None
        };
        let s = if integer.is_some() { r } else { s };
        let mut coeffs = Vec::with_capacity(SERIES_TERMS + 1);
        let mut fact = 1.0;
        for k in 0..=SERIES_TERMS {
            if k > 0 {
                fact *= k as f64;
            }
            let c = match integer {
                Some(n) if k == n - 1 => 0.0,
                _ => zeta(s - k as f64) / fact,
            };
            coeffs.push(c);
        }
        let (gamma_1ms, log_coeff, harmonic) = match integer {
            Some(n) => {
                let inv_fact: f64 = (1..n).map(|k| 1.0 / k as f64).product();
                let h: f64 = (1..n).map(|k| 1.0 / k as f64).sum();
                (0.0, inv_fact, h)
            }
            None => (gamma(1.0 - s), 0.0, 0.0),
        };
        let powers = (1..=DIRECT_TABLE).map(|k| (k as f64).powf(-s)).collect();
        Self { s, integer, coeffs, gamma_1ms, log_coeff, harmonic, powers }
    }

    #[must_use]
    pub fn order(&self) -> f64 {
        self.s
    }

    /// `Li_s(z)` for `z ∈ [0, 1]`. At `z = 1` this is `ζ(s)` when `s > 1` and `+∞` otherwise.
    #[must_use]
    pub fn value(&self, z: f64) -> f64 {
        if !(0.0..=1.0).contains(&z) {
            return f64::NAN;
        }
        if z == 0.0 {
            return 0.0;
        }
        if z <= 0.5 {
            return self.direct(z);
        }
        self.value_log(z.ln())
    }

    /// `Li_s(e^μ)` for `μ ≤ 0`. Passing `μ` directly keeps precision when `1 − z` is tiny.
    #[must_use]
    pub fn value_log(&self, mu: f64) -> f64 {
        self.value_log_bound(mu).0
    }

    /// Value together with a bound on the neglected part of the series.
    #[must_use]
    pub fn value_log_bound(&self, mu: f64) -> (f64, f64) {
        if mu.is_nan() || mu > 0.0 {
            return (f64::NAN, f64::INFINITY);
        }
        if mu == f64::NEG_INFINITY {
            return (0.0, 0.0);
        }
        if mu == 0.0 {
            return if self.s > 1.0 { (zeta(self.s), 0.0) } else { (f64::INFINITY, 0.0) };
        }
        if mu < -std::f64::consts::LN_2 {
            let z = mu.exp();
            return (self.direct(z), f64::EPSILON * z);
        }
        let last = SERIES_TERMS - 1;
        let mut acc = self.coeffs[last];
        for k in (0..last).rev() {
            acc = acc * mu + self.coeffs[k];
        }
        let singular = match self.integer {
            Some(n) => mu.powi(n as i32 - 1) * self.log_coeff * (self.harmonic - (-mu).ln()),
            None => self.gamma_1ms * (-mu).powf(self.s - 1.0),
        };
        let bound = 2.0 * (self.coeffs[SERIES_TERMS] * mu.powi(SERIES_TERMS as i32)).abs();
        (singular + acc, bound)
    }

    fn direct(&self, z: f64) -> f64 {
        let mut sum = 0.0;
        let mut zk = 1.0;
        let lnz = z.ln();
        let peak = (-self.s / -lnz).max(1.0);
        for k in 1.. {
            zk *= z;
            let pk = if k <= DIRECT_TABLE {
                self.powers[k - 1]
            } else {
                (k as f64).powf(-self.s)
            };
            let term = pk * zk;
            sum += term;
            if (k as f64) > peak && term <= 1e-18 * sum.abs() {
                break;
            }
            if zk == 0.0 {
                break;
            }
        }
        sum
    }
}
