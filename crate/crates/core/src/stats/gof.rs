use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Gamma law with density `λ^γ x^{γ−1} e^{−λx} / Γ(γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return domain(format!("Gamma parameters must be positive, got ({shape}, {rate})"));
        }
        Ok(Self { shape, rate })
    }

    /// CDF, with negative arguments mapped to 0.
    #[must_use]
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, self.rate * x)
        }
    }
}

pub fn gamma_cdf(params: GammaParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return domain(format!("gamma_cdf argument {x} is negative"));
    }
    Ok(params.cdf(x))
}

#[must_use]
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// Kolmogorov–Smirnov distance between the empirical CDF of sorted `data` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> Result<f64> {
    if data.is_empty() {
        return domain("KS distance of an empty sample");
    }
    let r = data.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in data.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / r - f).max(f - i as f64 / r);
    }
    Ok(d)
}

/// Linear-interpolation quantile of sorted data.
#[must_use]
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

#[must_use]
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}

/// Pearson goodness of fit; bins with expected count below `min_expected` are pooled.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquare> {
    if observed.len() != probs.len() || observed.is_empty() {
        return domain("observed counts and probabilities must be non-empty and aligned");
    }
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total;
        if e < min_expected {
            pooled.0 += o as f64;
            pooled.1 += e;
        } else {
            bins.push((o as f64, e));
        }
    }
    if pooled.1 > 0.0 || pooled.0 > 0.0 {
        if pooled.1 >= min_expected || bins.is_empty() {
            bins.push(pooled);
        } else {
            let smallest = bins
                .iter_mut()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one bin");
            smallest.0 += pooled.0;
            smallest.1 += pooled.1;
        }
    }
    if bins.len() < 2 {
        return domain("chi-square test needs at least two bins");
    }
    let statistic = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = bins.len() - 1;
    Ok(ChiSquare { statistic, df, p_value: chi_square_sf(statistic, df) })
}

/// Two-sample homogeneity test on aligned histograms; sparse bins are pooled.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_pooled: u64) -> Result<ChiSquare> {
    if a.len() != b.len() || a.is_empty() {
        return domain("histograms must be non-empty and aligned");
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return domain("both samples must be non-empty");
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        if x + y < min_pooled {
            pooled.0 += x as f64;
            pooled.1 += y as f64;
        } else {
            bins.push((x as f64, y as f64));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        bins.push(pooled);
    }
    if bins.len() < 2 {
        return domain("chi-square test needs at least two bins");
    }
    let (ka, kb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let statistic = bins
        .iter()
        .map(|(x, y)| {
            let d = ka * x - kb * y;
            d * d / (x + y)
        })
        .sum();
    let df = bins.len() - 1;
    Ok(ChiSquare { statistic, df, p_value: chi_square_sf(statistic, df) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_cdf_examples() {
        let e = GammaParams::new(1.0, 2.0).unwrap();
        assert!((gamma_cdf(e, 0.5).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        assert_eq!(gamma_cdf(e, 0.0).unwrap(), 0.0);
        let h = GammaParams::new(0.5, 1.0).unwrap();
        assert!((gamma_cdf(h, 1.0).unwrap() - 0.842_700_792_949_714_9).abs() < 1e-10);
        assert!(gamma_cdf(h, -1.0).is_err());
    }

    #[test]
    fn ks_examples() {
        assert!((ks_distance(&[0.5], |x| x).unwrap() - 0.5).abs() < 1e-15);
        let r = 40;
        let data: Vec<f64> = (0..r).map(|i| (i as f64 + 0.5) / r as f64).collect();
        assert!((ks_distance(&data, |x| x).unwrap() - 0.5 / r as f64).abs() < 1e-15);
        assert!(ks_distance(&[], |x| x).is_err());
    }

    #[test]
    fn chi_square_sanity() {
        let c = chi_square_gof(&[50, 50], &[0.5, 0.5], 5.0).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
        let c = chi_square_gof(&[90, 10], &[0.5, 0.5], 5.0).unwrap();
        assert!(c.p_value < 1e-10);
        // χ²₂ survival at 2 is e^{−1}.
        assert!((chi_square_sf(2.0, 2) - (-1.0f64).exp()).abs() < 1e-14);
        let t = chi_square_two_sample(&[100, 200, 300], &[50, 100, 150], 10).unwrap();
        assert!(t.statistic.abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(empirical_quantile(&v, 0.5), 3.0);
        assert_eq!(empirical_quantile(&v, 0.0), 1.0);
        assert_eq!(empirical_quantile(&v, 1.0), 5.0);
        assert!((empirical_quantile(&v, 0.1) - 1.4).abs() < 1e-15);
    }
}
