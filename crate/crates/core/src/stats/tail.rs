use crate::disorder::DisorderSample;
use crate::error::{domain, Result, ZrpError};

/// Hill estimate `k / Σ_{i≤k} ln(X_(i)/X_(k+1))` from the `k + 1` largest positive values.
pub fn hill_estimator(data: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return domain("Hill estimator needs k ≥ 1");
    }
    let mut pos: Vec<f64> = data.iter().copied().filter(|x| *x > 0.0).collect();
    if pos.len() < k + 1 {
        return Err(ZrpError::Domain(format!(
            "Hill estimator with k = {k} needs {} positive values, got {}",
            k + 1,
            pos.len()
        )));
    }
    pos.sort_by(|a, b| b.total_cmp(a));
    let threshold = pos[k];
    let s: f64 = pos[..k].iter().map(|x| (x / threshold).ln()).sum();
    Ok(k as f64 / s)
}

/// `U_k = (k^γ/n) Σ X_i^k / Ψ(X_i)`, with `U_0 = 0`.
pub fn u_diag(sample: &DisorderSample, gamma: f64, psi: &dyn Fn(f64) -> f64, k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let n = sample.len() as f64;
    let s: f64 = sample
        .fitnesses
        .iter()
        .map(|&x| if x == 0.0 { 0.0 } else { (k * x.ln()).exp() / psi(x) })
        .sum();
    k.powf(gamma) * s / n
}

/// `V_k = Σ (X_i / X⁽¹⁾)^k`.
pub fn v_diag(sample: &DisorderSample, k: f64) -> f64 {
    if k == 0.0 {
        return sample.len() as f64;
    }
    let top = sample.max();
    let ln_top = top.ln();
    sample
        .fitnesses
        .iter()
        .map(|&x| if x == 0.0 { 0.0 } else { (k * (x.ln() - ln_top)).exp() })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hill_examples() {
        let a = hill_estimator(&[8.0, 4.0, 2.0, 1.0], 3).unwrap();
        assert!((a - 0.721_347_520_444_481_7).abs() < 1e-12);
        let b = hill_estimator(&[80.0, 40.0, 20.0, 10.0], 3).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(hill_estimator(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn pareto_grid() {
        let alpha = 1.6;
        let r = 10_000;
        let data: Vec<f64> = (0..r).map(|i| (1.0 - (i as f64 + 0.5) / r as f64).powf(-1.0 / alpha)).collect();
        let a = hill_estimator(&data, r / 10).unwrap();
        assert!((a / alpha - 1.0).abs() < 0.1, "{a}");
    }

    #[test]
    fn diag_examples() {
        let s = DisorderSample::from_fitnesses(vec![0.3, 0.9, 0.5]).unwrap();
        assert_eq!(v_diag(&s, 0.0), 3.0);
        let one = DisorderSample::from_fitnesses(vec![1.0]).unwrap();
        assert!((u_diag(&one, 0.7, &|_| 1.0, 5.0) - 5f64.powf(0.7)).abs() < 1e-12);
        assert_eq!(u_diag(&s, 0.7, &|_| 1.0, 0.0), 0.0);
        assert!(v_diag(&s, 2.0) >= v_diag(&s, 3.0));
    }
}
