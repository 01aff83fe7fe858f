use super::gof::GammaParams;
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryBreaking {
    /// `β + γ ≤ 2`: the critical density is infinite.
    NoCondensation,
    /// `γ > 1`: the condensate sits on the fittest site.
    Explicit,
    /// `γ < 1`: the condensate rank follows a Gamma law on the scale `n^{1−γ}`.
    Intermediate,
    /// `γ = 1`, not covered by either limit theorem.
    Boundary,
}

#[must_use]
pub fn symmetry_breaking(beta: f64, gamma: f64) -> SymmetryBreaking {
    if beta + gamma <= 2.0 {
        SymmetryBreaking::NoCondensation
    } else if gamma > 1.0 {
        SymmetryBreaking::Explicit
    } else if gamma < 1.0 {
        SymmetryBreaking::Intermediate
    } else {
        SymmetryBreaking::Boundary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluctuationRegime {
    /// `β + γ ≥ 3`, scale `√n`.
    Normal,
    /// `2 < β + γ < 3`, scale `n^{1/(β+γ−1)}`.
    Stable,
}

#[must_use]
pub fn fluctuation_regime(beta: f64, gamma: f64) -> Option<FluctuationRegime> {
    let s = beta + gamma;
    if s <= 2.0 {
        None
    } else if s >= 3.0 {
        Some(FluctuationRegime::Normal)
    } else {
        Some(FluctuationRegime::Stable)
    }
}

/// `κ = max(1/2, 1/(β+γ−1))`.
pub fn kappa(beta: f64, gamma: f64) -> Result<f64> {
    match fluctuation_regime(beta, gamma) {
        Some(FluctuationRegime::Normal) => Ok(0.5),
        Some(FluctuationRegime::Stable) => Ok(1.0 / (beta + gamma - 1.0)),
        None => domain(format!("no fluctuation scale for β + γ = {} ≤ 2", beta + gamma)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationResult {
    pub kappa: f64,
    pub scaled: Vec<f64>,
    pub regime: FluctuationRegime,
}

/// Divides raw fluctuations `Q⁽¹⁾ − m + ν_n n` by `n^κ`.
pub fn scale_fluctuations(raw: &[f64], n: usize, beta: f64, gamma: f64) -> Result<FluctuationResult> {
    let k = kappa(beta, gamma)?;
    let regime = fluctuation_regime(beta, gamma).expect("kappa succeeded");
    let scale = (n as f64).powf(k);
    Ok(FluctuationResult { kappa: k, scaled: raw.iter().map(|r| r / scale).collect(), regime })
}

fn check_condensed(gamma: f64, beta: f64, excess: f64) -> Result<()> {
    if !(gamma < 1.0) {
        return domain(format!("the Gamma limit laws need γ < 1, got γ = {gamma}"));
    }
    if !(beta + gamma > 2.0) {
        return domain(format!("the Gamma limit laws need β + γ > 2, got {}", beta + gamma));
    }
    if !(excess > 0.0) {
        return domain(format!("the Gamma limit laws need ρ > ρ★, got ρ − ρ★ = {excess}"));
    }
    Ok(())
}

/// Limit of `(n^{γ−1} K_n)^{1/γ}`: Gamma with shape `γ` and rate `(ρ−ρ★)/α₁^{1/γ}`.
pub fn rank_law(gamma: f64, alpha1: f64, beta: f64, excess: f64) -> Result<GammaParams> {
    check_condensed(gamma, beta, excess)?;
    GammaParams::new(gamma, excess / alpha1.powf(1.0 / gamma))
}

/// Limit of `n(1 − F_n)`: Gamma with shape `γ` and rate `ρ − ρ★`.
pub fn fitness_law(gamma: f64, beta: f64, excess: f64) -> Result<GammaParams> {
    check_condensed(gamma, beta, excess)?;
    GammaParams::new(gamma, excess)
}

/// Reference limit laws for the intermediate symmetry-breaking regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremLaws {
    /// Law of `(n^{γ−1} K_n)^{1/γ}`.
    pub rank: GammaParams,
    /// Law of `n(1 − F_n)`.
    pub fitness: GammaParams,
}

impl TheoremLaws {
    #[must_use]
    pub fn rank_cdf(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.rank.cdf(x)
    }

    #[must_use]
    pub fn fitness_cdf(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.fitness.cdf(x)
    }
}

pub fn theorem_laws(gamma: f64, alpha1: f64, beta: f64, excess: f64) -> Result<TheoremLaws> {
    Ok(TheoremLaws { rank: rank_law(gamma, alpha1, beta, excess)?, fitness: fitness_law(gamma, beta, excess)? })
}
