//! Occupancy weights `p_k` with power tail `α₂ k^{−β}`, their generating function
//! `Φ`, the grand-canonical mean occupancy `G(x) = xΦ′(x)/Φ(x)` and the critical density.
//!
//! A sequence is an explicit head `p_0..p_K` followed by `α₂ k^{−β}` for `k > K`.
//! Moment sums `M_r(x) = Σ k^r p_k x^k` reduce to polylogarithms of order `β − r`
//! minus the head correction, so they stay cheap and accurate up to `x → 1`.

use crate::disorder::FitnessLaw;
use crate::error::{domain, Result, ZrpError};
use crate::numerics::polylog::{zeta, Polylog};
use crate::numerics::quadrature::QuadOptions;
use serde::{Deserialize, Serialize};

/// Serializable description of a weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `p_k = k^{−β}/(1+ζ(β))` for `k ≥ 1`, `p_0 = 1/(1+ζ(β))`.
    ZetaTail { beta: f64 },
    /// Explicit `p_0..p_K`, then a `k^{−β}` tail scaled to total mass one.
    Custom { beta: f64, head: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    ZetaTail,
    Custom,
}

#[derive(Debug, Clone)]
pub struct WeightSeq {
    family: WeightFamily,
    beta: f64,
    alpha2: f64,
    head: Vec<f64>,
    li: [Polylog; 3],
}

/// Generating function value at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenFnEval {
    pub value: f64,
    /// `None` when `Φ′` diverges (`z = 1`, `β ≤ 2`).
    pub derivative: Option<f64>,
    /// Number of explicitly summed terms; zero when the polylog expansion was used.
    pub truncation_k: usize,
    pub tail_bound: f64,
}

const DIRECT_MAX_TERMS: usize = 100_000;

impl WeightSeq {
    pub fn zeta_tail(beta: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return domain(format!("tail index β must exceed 1, got {beta}"));
        }
        let p0 = 1.0 / (1.0 + zeta(beta));
        Ok(Self::build(WeightFamily::ZetaTail, beta, p0, vec![p0]))
    }

    pub fn custom(beta: f64, head: Vec<f64>) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return domain(format!("tail index β must exceed 1, got {beta}"));
        }
        if head.is_empty() || head.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return domain("custom head must be a non-empty list of positive weights");
        }
        let mass: f64 = head.iter().sum();
        if mass >= 1.0 {
            return domain(format!("custom head carries mass {mass} ≥ 1"));
        }
        let k = head.len() - 1;
        let partial: f64 = (1..=k).map(|j| (j as f64).powf(-beta)).sum();
        let alpha2 = (1.0 - mass) / (zeta(beta) - partial);
        Ok(Self::build(WeightFamily::Custom, beta, alpha2, head))
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::ZetaTail { beta } => Self::zeta_tail(*beta),
            WeightSpec::Custom { beta, head } => Self::custom(*beta, head.clone()),
        }
    }

    fn build(family: WeightFamily, beta: f64, alpha2: f64, head: Vec<f64>) -> Self {
        let li = [Polylog::new(beta), Polylog::new(beta - 1.0), Polylog::new(beta - 2.0)];
        Self { family, beta, alpha2, head, li }
    }

    #[must_use]
    pub fn spec(&self) -> WeightSpec {
        match self.family {
            WeightFamily::ZetaTail => WeightSpec::ZetaTail { beta: self.beta },
            WeightFamily::Custom => WeightSpec::Custom { beta: self.beta, head: self.head.clone() },
        }
    }

    #[must_use]
    pub fn family(&self) -> WeightFamily {
        self.family
    }

    #[must_use]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[must_use]
    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    #[must_use]
    pub fn p0(&self) -> f64 {
        self.head[0]
    }

    /// Index of the last explicit head entry.
    #[must_use]
    pub fn head_len(&self) -> usize {
        self.head.len() - 1
    }

    #[must_use]
    pub fn weight(&self, k: usize) -> f64 {
        match self.head.get(k) {
            Some(p) => *p,
            None => self.alpha2 * (k as f64).powf(-self.beta),
        }
    }

    #[must_use]
    pub fn ln_weight(&self, k: usize) -> f64 {
        match self.head.get(k) {
            Some(p) => p.ln(),
            None => self.alpha2.ln() - self.beta * (k as f64).ln(),
        }
    }

    /// `ln p_k` for `k = 0..=kmax`.
    #[must_use]
    pub fn ln_weights(&self, kmax: usize) -> Vec<f64> {
        (0..=kmax).map(|k| self.ln_weight(k)).collect()
    }

    /// `u_k = p_{k−1}/p_k`, so that `p_k = p_0/(u_1⋯u_k)`.
    pub fn hop_rate(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return domain("hop rate u_0 is not defined: an empty site emits nothing");
        }
        if k > self.head_len() + 1 {
            return Ok((k as f64 / (k - 1) as f64).powf(self.beta));
        }
        Ok(self.weight(k - 1) / self.weight(k))
    }

    /// `u_1..=u_kmax`, index 0 holding 0.
    #[must_use]
    pub fn hop_rates(&self, kmax: usize) -> Vec<f64> {
        let mut u = vec![0.0; kmax + 1];
        for (k, slot) in u.iter_mut().enumerate().skip(1) {
            *slot = self.hop_rate(k).expect("k ≥ 1");
        }
        u
    }

    /// `M_r(x)` for `r = 0, 1, 2` given `x` and `μ = ln x`; `None` where the series diverges.
    #[must_use]
    pub fn moments(&self, x: f64, mu: f64) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        let k_head = self.head_len();
        for (r, slot) in out.iter_mut().enumerate() {
            let tail = self.li[r].value_log(mu);
            if !tail.is_finite() {
                continue;
            }
            let mut head = 0.0;
            let mut corr = 0.0;
            let mut xk = 1.0;
            for k in 0..=k_head {
                let kr = (k as f64).powi(r as i32);
                if r == 0 || k > 0 {
                    head += kr * self.head[k] * xk;
                }
                if k > 0 {
                    corr += kr * (k as f64).powf(-self.beta) * xk;
                }
                xk *= x;
            }
            *slot = Some(head + self.alpha2 * (tail - corr));
        }
        out
    }

    fn point(x: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return domain(format!("argument {x} outside [0, 1]"));
        }
        Ok((x, x.ln()))
    }

    /// `Φ(z)` and `Φ′(z)` to absolute accuracy `tol`.
    ///
    /// Direct summation with the geometric bound `p_K z^K/(1−z)` is used for `z ≤ 1/2`;
    /// above that the polylog expansion is cheaper.
    pub fn phi(&self, z: f64, tol: f64) -> Result<GenFnEval> {
        let (x, mu) = Self::point(z)?;
        if !(tol > 0.0) {
            return domain("tolerance must be positive");
        }
        if z <= 0.5 {
            if let Some(e) = self.phi_direct(z, tol) {
                return Ok(e);
            }
        }
        let [m0, m1, _] = self.moments(x, mu);
        let value = m0.expect("Φ converges on [0, 1]");
        let derivative = m1.map(|v| if z == 0.0 { self.weight(1) } else { v / z });
        let (_, b) = self.li[0].value_log_bound(mu);
        Ok(GenFnEval { value, derivative, truncation_k: 0, tail_bound: self.alpha2 * b })
    }

    /// Pure direct summation; `None` if more than 10⁵ terms would be needed.
    #[must_use]
    pub fn phi_direct(&self, z: f64, tol: f64) -> Option<GenFnEval> {
        if z >= 1.0 {
            return None;
        }
        let mut value = 0.0;
        let mut deriv = 0.0;
        let mut zk = 1.0; // z^k
        let geo = 1.0 / (1.0 - z);
        for k in 0..DIRECT_MAX_TERMS {
            let p = self.weight(k);
            value += p * zk;
            if k >= 1 {
                deriv += k as f64 * p * zk / z.max(f64::MIN_POSITIVE);
            }
            let next = k + 1;
            let zn = zk * z;
            if next > self.head_len() {
                let pn = self.weight(next);
                let bound_v = pn * zn * geo;
                let bound_d = next as f64 * pn * zk * geo;
                if bound_v <= tol && bound_d <= tol {
                    if z == 0.0 {
                        deriv = self.weight(1);
                    }
                    return Some(GenFnEval {
                        value,
                        derivative: Some(deriv),
                        truncation_k: next,
                        tail_bound: bound_v.max(bound_d),
                    });
                }
            }
            zk = zn;
        }
        None
    }

    /// `G(x) = xΦ′(x)/Φ(x)`, the grand-canonical mean occupancy at fitness `x`.
    pub fn g_of_x(&self, x: f64) -> Result<f64> {
        let (x, mu) = Self::point(x)?;
        self.g_at(x, mu)
    }

    /// `G` at `x = 1 − y`, keeping the precision of small `y`.
    pub fn g_of_gap(&self, y: f64) -> Result<f64> {
        let (y, _) = Self::point(y)?;
        self.g_at(1.0 - y, (-y).ln_1p())
    }

    fn g_at(&self, x: f64, mu: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        match self.moments(x, mu) {
            [Some(m0), Some(m1), _] => Ok(m1 / m0),
            _ => Err(ZrpError::Divergent(format!("G(1) is infinite for β = {} ≤ 2", self.beta))),
        }
    }

    /// `Var_X Q` at `x = 1 − y`.
    pub fn var_of_gap(&self, y: f64) -> Result<f64> {
        let (y, _) = Self::point(y)?;
        let x = 1.0 - y;
        if x == 0.0 {
            return Ok(0.0);
        }
        match self.moments(x, (-y).ln_1p()) {
            [Some(m0), Some(m1), Some(m2)] => {
                let g = m1 / m0;
                Ok((m2 / m0 - g * g).max(0.0))
            }
            _ => Err(ZrpError::Divergent(format!("Var Q at x = 1 is infinite for β = {} ≤ 3", self.beta))),
        }
    }

    /// `Var_X Q` at fitness `x`.
    pub fn var_of_x(&self, x: f64) -> Result<f64> {
        let (x, _) = Self::point(x)?;
        self.var_of_gap(1.0 - x)
    }

    /// `ρ★ = ∫ G dµ`, absolute error about `tol`.
    pub fn critical_density(&self, law: &FitnessLaw, tol: f64) -> Result<f64> {
        self.mean_over(law, tol, |y| self.g_of_gap(y))
    }

    /// `E Var_X Q`, the variance of the normal fluctuation limit.
    pub fn mean_variance(&self, law: &FitnessLaw, tol: f64) -> Result<f64> {
        self.mean_over(law, tol, |y| self.var_of_gap(y))
    }

    fn mean_over<F: Fn(f64) -> Result<f64>>(&self, law: &FitnessLaw, tol: f64, f: F) -> Result<f64> {
        let q = law.expect(|_, y| f(y).unwrap_or(f64::INFINITY), QuadOptions { rel_tol: 0.0, ..QuadOptions::abs(tol) });
        q.map(|q| q.value).map_err(|e| match e {
            ZrpError::Divergent(m) => ZrpError::Divergent(format!(
                "integral against the disorder diverges (β = {}, γ = {}): {m}",
                self.beta,
                law.gamma()
            )),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_tail_weights() {
        let w = WeightSeq::zeta_tail(2.0).unwrap();
        assert!((w.weight(0) - 0.378_081_258_256_704_5).abs() < 1e-15);
        assert_eq!(w.weight(1), w.weight(0));
        assert!((w.alpha2() - w.p0()).abs() < 1e-16);
        let k = 1_000_000usize;
        let ratio = w.weight(k) * (k as f64).powf(2.0) / w.alpha2();
        assert!((ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hop_rates() {
        let w = WeightSeq::zeta_tail(2.0).unwrap();
        assert_eq!(w.hop_rate(1).unwrap(), 1.0);
        assert!((w.hop_rate(2).unwrap() - 4.0).abs() < 1e-14);
        assert!(w.hop_rate(0).is_err());
        let prod: f64 = (1..=5).map(|k| w.hop_rate(k).unwrap()).product();
        assert!((w.p0() / prod - w.weight(5)).abs() < 1e-12);
    }

    #[test]
    fn phi_examples() {
        let w = WeightSeq::zeta_tail(4.0).unwrap();
        let one = w.phi(1.0, 1e-12).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        let d = one.derivative.unwrap();
        assert!((d - 0.577_267_200_259_431_35).abs() < 1e-13, "{d}");
        assert!((w.g_of_x(1.0).unwrap() - d).abs() < 1e-13);
        let zero = w.phi(0.0, 1e-12).unwrap();
        assert_eq!(zero.value, w.p0());
        assert_eq!(zero.derivative, Some(w.weight(1)));
        let w2 = WeightSeq::zeta_tail(2.0).unwrap();
        assert!(w2.phi(1.0, 1e-12).unwrap().derivative.is_none());
        assert!(matches!(w2.g_of_x(1.0), Err(ZrpError::Divergent(_))));
    }

    #[test]
    fn g_reference_values() {
        let w = WeightSeq::zeta_tail(3.0).unwrap();
        assert!((w.g_of_x(0.9).unwrap() - 0.634_112_676_592_725_3).abs() < 1e-13);
        assert_eq!(w.g_of_x(0.0).unwrap(), 0.0);
    }

    #[test]
    fn g_slope_below_two() {
        // G(x) = Θ((1−x)^{β−2}); reference values from 30-digit arithmetic.
        let w = WeightSeq::zeta_tail(1.5).unwrap();
        let refs = [4.958_287_343_917_254, 15.585_463_383_264_698, 49.140_930_979_287_746];
        let ys = [1e-2, 1e-3, 1e-4];
        for (y, r) in ys.iter().zip(refs) {
            let g = w.g_of_x(1.0 - y).unwrap();
            assert!((g / r - 1.0).abs() < 1e-10, "{g} vs {r}");
        }
        let lx: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| w.g_of_gap(*y).unwrap().ln()).collect();
        let mx = lx.iter().sum::<f64>() / 3.0;
        let my = ly.iter().sum::<f64>() / 3.0;
        let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
            / lx.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
        assert!((slope - (1.5 - 2.0)).abs() < 0.01, "slope {slope}");
        let pred = (my + slope * (1e-3f64.ln() - mx)).exp();
        assert!((pred / w.g_of_x(0.999).unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn direct_and_expansion_agree() {
        for beta in [1.5, 2.0, 2.5, 3.0, 4.0] {
            let w = WeightSeq::zeta_tail(beta).unwrap();
            for z in [0.1, 0.5, 0.7, 0.9, 0.99] {
                let d = w.phi_direct(z, 1e-14).unwrap();
                let [m0, m1, _] = w.moments(z, f64::ln(z));
                assert!((d.value - m0.unwrap()).abs() < 1e-13);
                assert!((d.derivative.unwrap() - m1.unwrap() / z).abs() < 1e-11 * (1.0 + d.derivative.unwrap()));
            }
        }
    }

    #[test]
    fn custom_head_normalizes() {
        let w = WeightSeq::custom(2.5, vec![0.5, 0.2, 0.1]).unwrap();
        let e = w.phi(1.0, 1e-12).unwrap();
        assert!((e.value - 1.0).abs() < 1e-13);
        assert!((w.hop_rate(1).unwrap() - 2.5).abs() < 1e-15);
        assert!((w.hop_rate(4).unwrap() - (4.0f64 / 3.0).powf(2.5)).abs() < 1e-13);
        assert!(WeightSeq::custom(2.5, vec![0.7, 0.4]).is_err());
    }

    #[test]
    fn critical_density_values() {
        let cases = [
            (3.0, 0.5, 0.487_271_393_850_344_4),
            (4.0, 1.5, 0.278_862_465_708_075_8),
            (2.5, 0.8, 0.467_681_011_375_885_05),
            (4.0, 1.0, 0.332_867_233_233_383_8),
            (2.0, 0.6, 0.755_780_503_464_064_3),
        ];
        for (beta, gamma, expected) in cases {
            let w = WeightSeq::zeta_tail(beta).unwrap();
            let law = FitnessLaw::power_tail(gamma, 1.0).unwrap();
            let r = w.critical_density(&law, 1e-10).unwrap();
            assert!((r - expected).abs() < 1e-9, "β={beta} γ={gamma}: {r}");
        }
        let w = WeightSeq::zeta_tail(3.0).unwrap();
        let b = FitnessLaw::beta(2.0, 0.5).unwrap();
        assert!((w.critical_density(&b, 1e-10).unwrap() - 0.579_066_188_035_292_1).abs() < 1e-9);
        let law = FitnessLaw::power_tail(0.5, 1.0).unwrap();
        assert!((w.mean_variance(&law, 1e-10).unwrap() - 0.712_212_691_925_985_7).abs() < 1e-8);
    }

    #[test]
    fn critical_density_diverges_below_two() {
        let w = WeightSeq::zeta_tail(1.2).unwrap();
        let law = FitnessLaw::power_tail(0.5, 1.0).unwrap();
        assert!(matches!(w.critical_density(&law, 1e-8), Err(ZrpError::Divergent(_))));
    }
}
