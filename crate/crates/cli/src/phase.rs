//! Sweep over the `(β, γ)` phase diagram at fixed excess density.

use crate::analysis::{scaled_fluctuations, stable_tail};
use crate::config::{Density, ExperimentConfig, PhaseConfig};
use crate::error::{CliError, Result};
use crate::experiment::run_size;
use serde::{Deserialize, Serialize};
use zrp_core::disorder::FitnessLaw;
use zrp_core::stats::{kappa, rank_law};
use zrp_core::weights::WeightSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub beta: f64,
    pub gamma: f64,
    /// `ok`, `no_condensation`, `infeasible: ...` or `failed: ...`.
    pub status: String,
    pub rho_star: f64,
    pub rho: f64,
    pub n: usize,
    pub m: u64,
    pub condensate_fraction: f64,
    pub k1_frequency: f64,
    /// Limit-law prediction for `P(K_n = 1)`: 1 when `γ > 1`, `P(Y ≤ n^{(γ−1)/γ})` for the Gamma rank law when `γ < 1`.
    pub predicted_k1: f64,
    pub tail_index: f64,
}

pub const PHASE_HEADER: [&str; 11] = [
    "beta",
    "gamma",
    "status",
    "rho_star",
    "rho",
    "n",
    "m",
    "condensate_fraction",
    "k1_frequency",
    "predicted_k1",
    "tail_index",
];

/// Configuration for one grid cell.
#[must_use]
pub fn cell_config(base: &ExperimentConfig, phase: &PhaseConfig, beta: f64, gamma: f64) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.weights = match &base.weights {
        WeightSpec::ZetaTail { .. } => WeightSpec::ZetaTail { beta },
        WeightSpec::Custom { head, .. } => WeightSpec::Custom { beta, head: head.clone() },
    };
    cfg.disorder = match base.disorder {
        FitnessLaw::PowerTail { alpha1, .. } => FitnessLaw::PowerTail { gamma, alpha1 },
        FitnessLaw::Beta { beta_a, .. } => FitnessLaw::Beta { beta_a, gamma },
    };
    cfg.density = Density { rho: None, rho_offset: Some(phase.rho_offset) };
    cfg.n_values = vec![phase.n];
    cfg.replicas = phase.replicas;
    cfg.phase = None;
    cfg
}

fn predicted_k1(cfg: &ExperimentConfig, n: usize, excess: f64, beta: f64, gamma: f64) -> f64 {
    if gamma > 1.0 {
        1.0
    } else if gamma < 1.0 {
        rank_law(gamma, cfg.disorder.alpha1(), beta, excess)
            .map_or(f64::NAN, |g| g.cdf((n as f64).powf((gamma - 1.0) / gamma)))
    } else {
        f64::NAN
    }
}

pub fn run_cell(base: &ExperimentConfig, phase: &PhaseConfig, beta: f64, gamma: f64) -> Result<PhaseRow> {
    let cfg = cell_config(base, phase, beta, gamma);
    let mut row = PhaseRow {
        beta,
        gamma,
        status: String::new(),
        rho_star: f64::NAN,
        rho: f64::NAN,
        n: phase.n,
        m: 0,
        condensate_fraction: f64::NAN,
        k1_frequency: f64::NAN,
        predicted_k1: f64::NAN,
        tail_index: f64::NAN,
    };
    match cfg.rho_star()? {
        None => {
            row.rho_star = f64::INFINITY;
            row.status = "no_condensation".into();
            return Ok(row);
        }
        Some(rs) if beta + gamma <= 2.0 => {
            row.rho_star = rs;
            row.status = "no_condensation".into();
            return Ok(row);
        }
        Some(rs) => row.rho_star = rs,
    }
    row.rho = row.rho_star + phase.rho_offset;
    row.m = cfg.particles(phase.n)?;
    if let Err(e) = cfg.validate() {
        row.status = format!("infeasible: {e}");
        return Ok(row);
    }
    let run = match run_size(&cfg, 0, false) {
        Ok(r) => r,
        Err(e @ (CliError::Model(_) | CliError::Runtime(_))) => {
            row.status = format!("failed: {e}");
            return Ok(row);
        }
        Err(e) => return Err(e),
    };
    let nf = phase.n as f64;
    let r = run.rows.len().max(1) as f64;
    row.condensate_fraction = run.rows.iter().map(|x| f64::from(x.q1) / nf).sum::<f64>() / r;
    row.k1_frequency = run.rows.iter().filter(|x| x.k_n == 1).count() as f64 / r;
    row.predicted_k1 = predicted_k1(&cfg, phase.n, phase.rho_offset, beta, gamma);
    if let Ok(k) = kappa(beta, gamma) {
        let scaled = scaled_fluctuations(&run.rows, k);
        row.tail_index = stable_tail(&scaled, k).map_or(f64::NAN, |t| t.hill_index);
    }
    row.status = "ok".into();
    Ok(row)
}

/// Cells in row-major order over `gammas × betas`.
pub fn sweep_phase_diagram(base: &ExperimentConfig) -> Result<Vec<PhaseRow>> {
    let phase = base.phase.as_ref().ok_or_else(|| CliError::Config("missing [phase] section".into()))?;
    if phase.betas.is_empty() || phase.gammas.is_empty() {
        return Err(CliError::Config("phase grid must not be empty".into()));
    }
    let mut rows = Vec::new();
    for &g in &phase.gammas {
        for &b in &phase.betas {
            rows.push(run_cell(base, phase, b, g)?);
        }
    }
    Ok(rows)
}
