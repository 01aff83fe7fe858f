//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! sampler = "exact"          # exact | mcmc | rejection | dynamics
//! quenched = true
//! n_values = [1000, 2000]
//! replicas = 200
//!
//! [disorder]
//! family = "power_tail"      # or "beta" with beta_a, gamma
//! gamma = 0.5
//! alpha1 = 1.0
//!
//! [weights]
//! family = "zeta_tail"
//! beta = 3.0
//!
//! [density]
//! rho_offset = 1.0           # or rho = 1.4
//! ```

use crate::error::{CliError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use zrp_core::disorder::FitnessLaw;
use zrp_core::ensemble::{PartitionOptions, DEFAULT_SWAP_FRACTION};
use zrp_core::stats::{fluctuation_regime, symmetry_breaking, FluctuationRegime, SymmetryBreaking};
use zrp_core::weights::{WeightSeq, WeightSpec};
use zrp_core::ZrpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Exact,
    Mcmc,
    Rejection,
    Dynamics,
}

/// Target density, either absolute or relative to `ρ★`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Density {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    /// Burn-in length in units of `n·m` moves.
    pub burn_in_factor: f64,
    /// Moves between retained replicas in units of `n·m`.
    pub thin_factor: f64,
    /// Share of steps that exchange two sites' occupations.
    pub swap_fraction: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self { burn_in_factor: 10.0, thin_factor: 1.0, swap_fraction: DEFAULT_SWAP_FRACTION }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Burn-in length in units of `n·m` events.
    pub burn_in_factor: f64,
    /// Time between retained replicas, in units of `n·m` mean waiting times after burn-in.
    pub thin_factor: f64,
    /// Trajectory length for the `dynamics` command.
    pub events: u64,
    /// Full snapshot cadence for the `dynamics` command.
    pub observe_every: u64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self { burn_in_factor: 10.0, thin_factor: 1.0, events: 100_000, observe_every: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_cap: Option<usize>,
    pub max_cells: usize,
    /// Upper bound on `n · m · min(m, q_cap)`.
    pub max_work: f64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self { q_cap: None, max_cells: PartitionOptions::default().max_cells, max_work: 1e12 }
    }
}

impl ExactConfig {
    #[must_use]
    pub fn partition_options(&self) -> PartitionOptions {
        PartitionOptions { q_cap: self.q_cap, max_cells: self.max_cells }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RejectionConfig {
    pub max_attempts: u64,
}

impl Default for RejectionConfig {
    fn default() -> Self {
        Self { max_attempts: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Grid for the phase-diagram sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Density above `ρ★` in every condensed cell.
    pub rho_offset: f64,
    pub n: usize,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sampler: Sampler,
    #[serde(default = "default_true")]
    pub quenched: bool,
    pub n_values: Vec<usize>,
    pub replicas: usize,
    /// Replicas sharing one disorder draw; defaults to all of them when quenched, 1 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas_per_disorder: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub disorder: FitnessLaw,
    pub weights: WeightSpec,
    pub density: Density,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub exact: ExactConfig,
    #[serde(default)]
    pub rejection: RejectionConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseConfig>,
}

fn default_true() -> bool {
    true
}

fn default_tolerance() -> f64 {
    1e-10
}

/// Regime classification of a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub beta: f64,
    pub gamma: f64,
    pub rho_star: Option<f64>,
    pub rho: f64,
    pub condensation: bool,
    pub symmetry_breaking: SymmetryBreaking,
    pub fluctuations: Option<FluctuationRegime>,
    pub label: String,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn weight_seq(&self) -> Result<WeightSeq> {
        WeightSeq::from_spec(&self.weights).map_err(|e| CliError::Config(e.to_string()))
    }

    /// `ρ★`, or `None` when it is infinite.
    pub fn rho_star(&self) -> Result<Option<f64>> {
        match self.weight_seq()?.critical_density(&self.disorder, self.tolerance) {
            Ok(r) => Ok(Some(r)),
            Err(ZrpError::Divergent(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn rho(&self) -> Result<f64> {
        match (self.density.rho, self.density.rho_offset) {
            (Some(r), None) => Ok(r),
            (None, Some(off)) => match self.rho_star()? {
                Some(rs) => Ok(rs + off),
                None => Err(CliError::Config("rho_offset needs a finite critical density; set rho instead".into())),
            },
            _ => Err(CliError::Config("set exactly one of density.rho and density.rho_offset".into())),
        }
    }

    /// `m = round(ρ n)`.
    pub fn particles(&self, n: usize) -> Result<u64> {
        Ok((self.rho()? * n as f64).round() as u64)
    }

    #[must_use]
    pub fn block_size(&self) -> usize {
        self.replicas_per_disorder.unwrap_or(if self.quenched { self.replicas.max(1) } else { 1 }).max(1)
    }

    pub fn regime(&self) -> Result<RegimeFlags> {
        let beta = self.weight_seq()?.beta();
        let gamma = self.disorder.gamma();
        let rho_star = self.rho_star()?;
        let rho = self.rho()?;
        let condensation = rho_star.is_some_and(|rs| beta + gamma > 2.0 && rho > rs);
        let sb = symmetry_breaking(beta, gamma);
        let label = if !condensation {
            "no condensation regime".to_string()
        } else {
            let s = match sb {
                SymmetryBreaking::Explicit => "explicit symmetry breaking",
                SymmetryBreaking::Intermediate => "intermediate symmetry breaking",
                SymmetryBreaking::Boundary => "boundary case gamma = 1",
                SymmetryBreaking::NoCondensation => "no condensation regime",
            };
            match fluctuation_regime(beta, gamma) {
                Some(FluctuationRegime::Normal) => format!("condensation, {s}, normal fluctuations"),
                Some(FluctuationRegime::Stable) => format!("condensation, {s}, stable fluctuations"),
                None => format!("condensation, {s}"),
            }
        };
        Ok(RegimeFlags {
            beta,
            gamma,
            rho_star,
            rho,
            condensation,
            symmetry_breaking: if rho_star.is_none() { SymmetryBreaking::NoCondensation } else { sb },
            fluctuations: fluctuation_regime(beta, gamma),
            label,
        })
    }

    /// Exact-sampler cost estimate `n · m · min(m, q_cap)`.
    #[must_use]
    pub fn exact_work(&self, n: usize, m: u64) -> f64 {
        let cap = self.exact.q_cap.map_or(m, |c| (c as u64).min(m));
        n as f64 * m as f64 * cap as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.disorder.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.weight_seq()?;
        if self.n_values.is_empty() {
            return bad("n_values must not be empty".into());
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 2) {
            return bad(format!("system size {n} is below 2"));
        }
        if self.replicas_per_disorder == Some(0) {
            return bad("replicas_per_disorder must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive".into());
        }
        let rho = self.rho()?;
        if !(rho > 0.0) || !rho.is_finite() {
            return bad(format!("density must be positive, got {rho}"));
        }
        match self.sampler {
            Sampler::Exact => {
                for &n in &self.n_values {
                    let m = self.particles(n)?;
                    let work = self.exact_work(n, m);
                    if work > self.exact.max_work {
                        return bad(format!(
                            "exact sampler at n = {n}, m = {m} needs {work:.2e} operations, budget is {:.2e}",
                            self.exact.max_work
                        ));
                    }
                    let cells = (n as f64 + 1.0) * (m as f64 + 1.0);
                    if cells > self.exact.max_cells as f64 {
                        return bad(format!(
                            "exact sampler at n = {n}, m = {m} needs {cells:.2e} table cells, budget is {}",
                            self.exact.max_cells
                        ));
                    }
                }
            }
            Sampler::Mcmc => {
                if !(self.mcmc.burn_in_factor >= 0.0 && self.mcmc.thin_factor > 0.0) {
                    return bad("mcmc burn_in_factor must be ≥ 0 and thin_factor > 0".into());
                }
                if !(0.0..=1.0).contains(&self.mcmc.swap_fraction) {
                    return bad("mcmc swap_fraction must lie in [0, 1]".into());
                }
            }
            Sampler::Dynamics => {
                if !(self.dynamics.burn_in_factor >= 0.0 && self.dynamics.thin_factor > 0.0) {
                    return bad("dynamics burn_in_factor must be ≥ 0 and thin_factor > 0".into());
                }
                if self.disorder.atom_at_zero() > 0.0 {
                    return bad("dynamics needs positive fitnesses, but the law has an atom at 0".into());
                }
            }
            Sampler::Rejection => {
                if self.rejection.max_attempts == 0 {
                    return bad("rejection max_attempts must be at least 1".into());
                }
            }
        }
        if let Some(p) = &self.phase {
            if p.betas.is_empty() || p.gammas.is_empty() {
                return bad("phase grid must not be empty".into());
            }
            if p.n < 2 {
                return bad("phase n must be at least 2".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
sampler = "exact"
n_values = [100]
replicas = 10

[disorder]
family = "power_tail"
gamma = 0.5
alpha1 = 1.0

[weights]
family = "zeta_tail"
beta = 3.0

[density]
rho_offset = 1.0
"#;

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert!(cfg.quenched);
        assert_eq!(cfg.block_size(), 10);
    }

    #[test]
    fn density_rules() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        let rs = cfg.rho_star().unwrap().unwrap();
        assert!((cfg.rho().unwrap() - rs - 1.0).abs() < 1e-12);
        assert_eq!(cfg.particles(100).unwrap(), ((rs + 1.0) * 100.0).round() as u64);
        let both = BASE.replace("rho_offset = 1.0", "rho_offset = 1.0\nrho = 2.0");
        assert!(matches!(ExperimentConfig::from_toml(&both), Err(CliError::Config(_))));
    }

    #[test]
    fn no_condensation_flagged() {
        let text = BASE.replace("beta = 3.0", "beta = 1.2").replace("rho_offset = 1.0", "rho = 1.0");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let r = cfg.regime().unwrap();
        assert!(!r.condensation);
        assert_eq!(r.label, "no condensation regime");
        assert!(r.rho_star.is_none());
        let offset = BASE.replace("beta = 3.0", "beta = 1.2");
        assert!(ExperimentConfig::from_toml(&offset).is_err());
    }

    #[test]
    fn validation_errors() {
        for (from, to) in [
            ("n_values = [100]", "n_values = []"),
            ("n_values = [100]", "n_values = [1]"),
            ("gamma = 0.5", "gamma = -0.5"),
            ("n_values = [100]", "n_values = [100000]"),
            ("replicas = 10", "replicas = 10\nbogus = 1"),
        ] {
            let text = BASE.replace(from, to);
            assert!(matches!(ExperimentConfig::from_toml(&text), Err(CliError::Config(_))), "{to}");
        }
    }

    #[test]
    fn regime_labels() {
        let cfg = ExperimentConfig::from_toml(BASE).unwrap();
        let r = cfg.regime().unwrap();
        assert!(r.condensation);
        assert_eq!(r.symmetry_breaking, SymmetryBreaking::Intermediate);
        assert_eq!(r.fluctuations, Some(FluctuationRegime::Normal));
    }
}
