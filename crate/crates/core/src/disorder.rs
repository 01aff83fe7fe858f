//! Site-fitness disorder: laws on `[0, 1]` with `µ([1−x, 1]) ~ α₁ x^γ` as `x ↓ 0`.

use crate::error::{domain, Result, ZrpError};
use crate::numerics::quadrature::{integrate_endpoints, QuadOptions, Quadrature};
use crate::rng::SeedRecord;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};

/// Largest double strictly below one.
pub const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FitnessLaw {
    /// `µ([1−x, 1]) = min(1, α₁ x^γ)`; an atom of mass `1 − α₁` sits at 0 when `α₁ < 1`.
    PowerTail { gamma: f64, alpha1: f64 },
    /// Beta law with density proportional to `x^{a−1} (1−x)^{γ−1}`.
    Beta { beta_a: f64, gamma: f64 },
}

impl FitnessLaw {
    pub fn power_tail(gamma: f64, alpha1: f64) -> Result<Self> {
        let law = FitnessLaw::PowerTail { gamma, alpha1 };
        law.validate()?;
        Ok(law)
    }

    pub fn beta(beta_a: f64, gamma: f64) -> Result<Self> {
        let law = FitnessLaw::Beta { beta_a, gamma };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            FitnessLaw::PowerTail { gamma, alpha1 } if ok(gamma) && ok(alpha1) => Ok(()),
            FitnessLaw::Beta { beta_a, gamma } if ok(gamma) && ok(beta_a) => Ok(()),
            _ => domain(format!("fitness law parameters must be positive and finite: {self:?}")),
        }
    }

    #[must_use]
    pub fn gamma(&self) -> f64 {
        match *self {
            FitnessLaw::PowerTail { gamma, .. } | FitnessLaw::Beta { gamma, .. } => gamma,
        }
    }

    /// Tail constant `α₁`; for the Beta family this is `1/(γ B(a, γ))`.
    #[must_use]
    pub fn alpha1(&self) -> f64 {
        match *self {
            FitnessLaw::PowerTail { alpha1, .. } => alpha1,
            FitnessLaw::Beta { beta_a, gamma } => 1.0 / (gamma * ln_beta(beta_a, gamma).exp()),
        }
    }

    /// Mass of the atom at zero.
    #[must_use]
    pub fn atom_at_zero(&self) -> f64 {
        match *self {
            FitnessLaw::PowerTail { alpha1, .. } => (1.0 - alpha1).max(0.0),
            FitnessLaw::Beta { .. } => 0.0,
        }
    }

    /// `µ([1−x, 1])`.
    pub fn tail_mass(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return domain(format!("tail_mass argument {x} outside [0, 1]"));
        }
        Ok(match *self {
            FitnessLaw::PowerTail { gamma, alpha1 } => {
                if x == 1.0 {
                    1.0
                } else {
                    (alpha1 * x.powf(gamma)).min(1.0)
                }
            }
            FitnessLaw::Beta { beta_a, gamma } => beta_reg(gamma, beta_a, x),
        })
    }

    /// Upper-tail quantile: `P(X ≥ quantile(u)) = u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return domain(format!("quantile argument {u} outside [0, 1]"));
        }
        Ok(match *self {
            FitnessLaw::PowerTail { gamma, alpha1 } => {
                if u >= alpha1 {
                    0.0
                } else {
                    1.0 - (u / alpha1).powf(1.0 / gamma)
                }
            }
            FitnessLaw::Beta { beta_a, gamma } => 1.0 - beta_tail_inverse(gamma, beta_a, u),
        })
    }

    /// One draw by inversion; a draw of exactly 1 is pulled back to the largest double below 1.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let x = self.quantile(u).expect("uniform draw lies in [0, 1)");
        x.min(BELOW_ONE)
    }

    /// `E f(X)` by quadrature in `t`, where `1 − X = t^{1/γ}` makes the tail measure uniform.
    ///
    /// The integrand receives `(x, y)` with `y = 1 − x` carried separately for precision.
    pub fn expect<F: Fn(f64, f64) -> f64>(&self, f: F, opts: QuadOptions) -> Result<Quadrature> {
        let gamma = self.gamma();
        let inv = 1.0 / gamma;
        let (t_max, right_singular) = match *self {
            FitnessLaw::PowerTail { alpha1, .. } => ((1.0 / alpha1).min(1.0), false),
            FitnessLaw::Beta { beta_a, .. } => (1.0, beta_a < 1.0),
        };
        let norm = self.alpha1();
        let beta_a = match *self {
            FitnessLaw::Beta { beta_a, .. } => beta_a,
            FitnessLaw::PowerTail { .. } => 1.0,
        };
        let integrand = |t: f64| {
            let y = t.powf(inv);
            let x = 1.0 - y;
            let dens = if beta_a == 1.0 { norm } else { norm * x.powf(beta_a - 1.0) };
            if dens == 0.0 {
                return 0.0;
            }
            dens * f(x, y)
        };
        let mut q = integrate_endpoints(integrand, 0.0, t_max, true, right_singular, opts)?;
        let atom = self.atom_at_zero();
        if atom > 0.0 {
            q.value += atom * f(0.0, 1.0);
        }
        Ok(q)
    }

    /// `E[X^r / Ψ(X)]`, relative accuracy about `1e-8`.
    pub fn moment_xr(&self, r: f64, psi: Option<&dyn Fn(f64) -> f64>) -> Result<f64> {
        if !(r > 0.0) {
            return domain(format!("moment order must be positive, got {r}"));
        }
        let f = |x: f64, y: f64| {
            let xr = if x == 0.0 { 0.0 } else { (r * (-y).ln_1p()).exp() };
            match psi {
                Some(p) => xr / p(x),
                None => xr,
            }
        };
        Ok(self.expect(f, QuadOptions::rel(1e-9))?.value)
    }
}

/// `y` with `I_y(γ, a) = u`: Newton polish of the library inverse.
fn beta_tail_inverse(gamma: f64, a: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let lb = ln_beta(gamma, a);
    let mut y = inv_beta_reg(gamma, a, u).clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let f = beta_reg(gamma, a, y) - u;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let dens = ((gamma - 1.0) * y.ln() + (a - 1.0) * (-y).ln_1p() - lb).exp();
        let mut next = y - f / dens;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * y {
            y = next;
            break;
        }
        y = next;
    }
    y
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    pub fitnesses: Vec<f64>,
    /// 0-based site indices ordered by non-increasing fitness, ties by index.
    pub sorted_desc: Vec<usize>,
    pub seed: Option<SeedRecord>,
}

impl DisorderSample {
    /// Wraps explicit fitnesses, e.g. for tests or fixed configurations.
    pub fn from_fitnesses(fitnesses: Vec<f64>) -> Result<Self> {
        if let Some(x) = fitnesses.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return domain(format!("fitness {x} outside [0, 1]"));
        }
        let mut sorted_desc: Vec<usize> = (0..fitnesses.len()).collect();
        sorted_desc.sort_by(|&i, &j| fitnesses[j].total_cmp(&fitnesses[i]).then(i.cmp(&j)));
        Ok(Self { fitnesses, sorted_desc, seed: None })
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.fitnesses.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.fitnesses.is_empty()
    }

    /// `k`-th largest fitness, `k = 0` being the maximum.
    #[must_use]
    pub fn order_stat(&self, k: usize) -> f64 {
        self.fitnesses[self.sorted_desc[k]]
    }

    #[must_use]
    pub fn max(&self) -> f64 {
        self.order_stat(0)
    }

    /// `(1 − X⁽¹⁾, 1 − X⁽²⁾/X⁽¹⁾)`.
    pub fn extremal_gaps(&self) -> Result<(f64, f64)> {
        if self.len() < 2 {
            return domain("extremal gaps need at least two sites");
        }
        let x1 = self.order_stat(0);
        let x2 = self.order_stat(1);
        if x1 == 0.0 {
            return Err(ZrpError::InvalidState("all fitnesses are zero".into()));
        }
        Ok((1.0 - x1, 1.0 - x2 / x1))
    }
}

/// `n` i.i.d. fitnesses drawn from the stream named by `seed`.
pub fn sample_disorder(law: &FitnessLaw, n: usize, seed: SeedRecord) -> Result<DisorderSample> {
    if n == 0 {
        return domain("disorder sample needs n ≥ 1");
    }
    law.validate()?;
    let mut rng = seed.rng();
    let fitnesses: Vec<f64> = (0..n).map(|_| law.draw(&mut rng)).collect();
    let mut s = DisorderSample::from_fitnesses(fitnesses)?;
    s.seed = Some(seed);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    #[test]
    fn tail_mass_examples() {
        let p = FitnessLaw::power_tail(0.5, 1.0).unwrap();
        assert!((p.tail_mass(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.tail_mass(1.0).unwrap(), 1.0);
        let b = FitnessLaw::beta(1.0, 2.0).unwrap();
        assert!((b.tail_mass(0.5).unwrap() - 0.25).abs() < 1e-14);
        assert!(p.tail_mass(1.5).is_err());
    }

    #[test]
    fn quantile_examples() {
        let u = FitnessLaw::power_tail(1.0, 1.0).unwrap();
        assert!((u.quantile(0.3).unwrap() - 0.7).abs() < 1e-15);
        let p = FitnessLaw::power_tail(0.5, 1.0).unwrap();
        assert!((p.quantile(0.25).unwrap() - 0.9375).abs() < 1e-15);
        let b = FitnessLaw::beta(1.0, 2.0).unwrap();
        assert!((b.quantile(0.25).unwrap() - 0.5).abs() < 1e-13);
        assert_eq!(p.quantile(0.0).unwrap(), 1.0);
        assert!(p.quantile(-0.1).is_err());
    }

    #[test]
    fn atoms_and_shrunken_support() {
        let atom = FitnessLaw::power_tail(1.0, 0.4).unwrap();
        assert!((atom.atom_at_zero() - 0.6).abs() < 1e-15);
        assert_eq!(atom.quantile(0.5).unwrap(), 0.0);
        let shrunk = FitnessLaw::power_tail(1.0, 4.0).unwrap();
        assert!((shrunk.quantile(1.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(shrunk.tail_mass(0.3).unwrap(), 1.0);
    }

    #[test]
    fn beta_alpha1() {
        let b = FitnessLaw::beta(2.0, 0.5).unwrap();
        assert!((b.alpha1() - 1.5).abs() < 1e-13);
    }

    #[test]
    fn moments() {
        let u = FitnessLaw::power_tail(1.0, 1.0).unwrap();
        assert!((u.moment_xr(9.0, None).unwrap() - 0.1).abs() < 1e-10);
        let ratio = 1e3 * u.moment_xr(1e3, None).unwrap();
        assert!((ratio - 1.0).abs() < 0.01);
        let p = FitnessLaw::power_tail(0.5, 1.0).unwrap();
        let m = p.moment_xr(100.0, None).unwrap();
        // High-precision reference value.
        assert!((m / 0.088_292_079_317_565_678_6 - 1.0).abs() < 1e-8, "{m}");
        let asym = statrs::function::gamma::gamma(1.5) / 10.0;
        assert!((m / asym - 1.0).abs() < 0.02);
    }

    #[test]
    fn single_site_and_determinism() {
        let law = FitnessLaw::power_tail(0.5, 1.0).unwrap();
        let s = sample_disorder(&law, 1, SeedRecord::new(1, Purpose::Test, 0)).unwrap();
        assert_eq!(s.sorted_desc, vec![0]);
        let a = sample_disorder(&law, 100, SeedRecord::new(9, Purpose::Test, 2)).unwrap();
        let b = sample_disorder(&law, 100, SeedRecord::new(9, Purpose::Test, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaps() {
        let s = DisorderSample::from_fitnesses(vec![0.5, 0.25]).unwrap();
        assert_eq!(s.extremal_gaps().unwrap(), (0.5, 0.5));
        let s = DisorderSample::from_fitnesses(vec![1.0, 1.0]).unwrap();
        assert_eq!(s.extremal_gaps().unwrap(), (0.0, 0.0));
        let s = DisorderSample::from_fitnesses(vec![0.3]).unwrap();
        assert!(s.extremal_gaps().is_err());
    }
}
