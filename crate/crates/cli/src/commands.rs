//! Subcommand implementations. Each writes its files under an output directory.

use crate::analysis::{fitness_statistics, normal_scale, rank_statistics, scaled_fluctuations, summarize, SizeSummary};
use crate::config::{ExperimentConfig, RegimeFlags};
use crate::error::Result;
use crate::experiment::{run_size, stream_index, SizeRun};
use crate::output::{write_csv, write_json, write_weights};
use crate::phase::{sweep_phase_diagram, PHASE_HEADER};
use crate::svg::{emit_svg, Series, SvgKind};
use serde::{Deserialize, Serialize};
use std::path::Path;
use zrp_core::disorder::sample_disorder;
use zrp_core::dynamics::{simulate, Horizon, ProcessState};
use zrp_core::ensemble::{log_partition, prob_sn_equals_m, OccupancyVector};
use zrp_core::rng::{stream, Purpose, SeedRecord, SCHEME};
use zrp_core::stats::{gamma_function, kappa, normal_cdf, theorem_laws, u_diag, v_diag, SymmetryBreaking};
use zrp_core::ZrpError;

pub const STATS_HEADER: [&str; 9] = ["replica", "n", "m", "i_n", "k_n", "f_n", "q1", "q2", "fluct_raw"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rng_scheme: String,
    pub config: ExperimentConfig,
    pub regime: RegimeFlags,
    pub sizes: Vec<SizeSummary>,
}

impl Summary {
    #[must_use]
    pub fn failed_checks(&self) -> usize {
        self.sizes.iter().flat_map(|s| &s.checks).filter(|c| !c.pass).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDensityReport {
    pub beta: f64,
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub rho_star: Option<f64>,
    pub mean_variance: Option<f64>,
    pub kappa: Option<f64>,
    pub regime: RegimeFlags,
}

pub fn critical_density(cfg: &ExperimentConfig, out: &Path) -> Result<CriticalDensityReport> {
    let seq = cfg.weight_seq()?;
    let regime = cfg.regime()?;
    let mean_variance = match seq.mean_variance(&cfg.disorder, cfg.tolerance) {
        Ok(v) => Some(v),
        Err(ZrpError::Divergent(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let report = CriticalDensityReport {
        beta: seq.beta(),
        gamma: cfg.disorder.gamma(),
        alpha1: cfg.disorder.alpha1(),
        alpha2: seq.alpha2(),
        rho_star: regime.rho_star,
        mean_variance,
        kappa: kappa(seq.beta(), cfg.disorder.gamma()).ok(),
        regime,
    };
    write_json(&out.join("critical_density.json"), &report)?;
    Ok(report)
}

fn run_all(cfg: &ExperimentConfig, keep: bool) -> Result<(RegimeFlags, Vec<SizeRun>)> {
    let regime = cfg.regime()?;
    let runs = (0..cfg.n_values.len()).map(|i| run_size(cfg, i, keep)).collect::<Result<Vec<_>>>()?;
    Ok((regime, runs))
}

fn write_runs(cfg: &ExperimentConfig, out: &Path, regime: RegimeFlags, runs: &[SizeRun]) -> Result<Summary> {
    let rows: Vec<_> = runs.iter().flat_map(|r| r.rows.iter().copied()).collect();
    let sizes = runs.iter().map(|r| summarize(cfg, &regime, r)).collect::<Result<Vec<_>>>()?;
    let summary = Summary { rng_scheme: SCHEME.to_string(), config: cfg.clone(), regime, sizes };
    write_csv(&out.join("condensate.csv"), &STATS_HEADER, &rows)?;
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Per-replica statistics CSV and summary JSON.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<Summary> {
    let (regime, runs) = run_all(cfg, false)?;
    write_runs(cfg, out, regime, &runs)
}

/// Limit-law CDF comparisons for the condensate rank and fitness.
pub fn condense(cfg: &ExperimentConfig, out: &Path) -> Result<Summary> {
    let (regime, runs) = run_all(cfg, false)?;
    if regime.condensation && regime.symmetry_breaking == SymmetryBreaking::Intermediate {
        let rho_star = regime.rho_star.expect("condensed");
        let laws = theorem_laws(regime.gamma, cfg.disorder.alpha1(), regime.beta, regime.rho - rho_star)?;
        for run in runs.iter().filter(|r| !r.rows.is_empty()) {
            let rank = rank_statistics(&run.rows, regime.gamma);
            let top = *rank.last().expect("non-empty");
            emit_svg(
                &[Series::ecdf("(n^(γ−1) K_n)^(1/γ)", &rank), Series::curve("Gamma rank law", 0.0, top, 200, laws.rank_cdf())],
                SvgKind::CdfCompare,
                &format!("Condensate rank, n = {}", run.n),
                &out.join(format!("rank_cdf_n{}.svg", run.n)),
            )?;
            let fit = fitness_statistics(&run.rows);
            let top = *fit.last().expect("non-empty");
            emit_svg(
                &[Series::ecdf("n(1 − F_n)", &fit), Series::curve("Gamma fitness law", 0.0, top, 200, laws.fitness_cdf())],
                SvgKind::CdfCompare,
                &format!("Condensate fitness, n = {}", run.n),
                &out.join(format!("fitness_cdf_n{}.svg", run.n)),
            )?;
        }
    }
    write_runs(cfg, out, regime, &runs)
}

#[derive(Serialize)]
struct FluctRow {
    replica: usize,
    disorder: usize,
    fluct_raw: f64,
    scaled: f64,
}

/// Scaled condensate fluctuations per replica, with a normal CDF comparison when it applies.
pub fn fluctuations(cfg: &ExperimentConfig, out: &Path) -> Result<Summary> {
    let (regime, runs) = run_all(cfg, false)?;
    if let Ok(k) = kappa(regime.beta, regime.gamma) {
        for run in &runs {
            let scaled = scaled_fluctuations(&run.rows, k);
            let rows: Vec<FluctRow> = run
                .rows
                .iter()
                .zip(&scaled)
                .zip(&run.block_of)
                .map(|((r, &s), &d)| FluctRow { replica: r.replica, disorder: d, fluct_raw: r.fluct_raw, scaled: s })
                .collect();
            write_csv(&out.join(format!("fluctuations_n{}.csv", run.n)), &["replica", "disorder", "fluct_raw", "scaled"], &rows)?;
            if k == 0.5 && regime.condensation && !scaled.is_empty() {
                let sd = normal_scale(cfg)?;
                let mut sorted = scaled.clone();
                sorted.sort_by(f64::total_cmp);
                emit_svg(
                    &[Series::ecdf("scaled fluctuation", &sorted), Series::curve("N(0, E Var Q)", -4.0 * sd, 4.0 * sd, 200, |x| normal_cdf(x, 0.0, sd))],
                    SvgKind::CdfCompare,
                    &format!("Condensate fluctuations, n = {}", run.n),
                    &out.join(format!("fluctuations_n{}.svg", run.n)),
                )?;
            }
        }
    }
    write_runs(cfg, out, regime, &runs)
}

#[derive(Serialize)]
struct SiteRow {
    replica: usize,
    site: usize,
    fitness: f64,
    count: u32,
}

/// Full configurations (`replica,site,fitness,count`) and the weight table.
pub fn sample(cfg: &ExperimentConfig, out: &Path, weights_kmax: usize) -> Result<Summary> {
    let (regime, runs) = run_all(cfg, true)?;
    write_weights(&out.join("weights.csv"), &cfg.weight_seq()?, weights_kmax)?;
    for run in &runs {
        let mut rows = Vec::new();
        for ((row, occ), &b) in run.rows.iter().zip(&run.occupancies).zip(&run.block_of) {
            let x = &run.samples[b].fitnesses;
            rows.extend(occ.counts.iter().enumerate().map(|(i, &c)| SiteRow { replica: row.replica, site: i + 1, fitness: x[i], count: c }));
        }
        write_csv(&out.join(format!("occupancy_n{}.csv", run.n)), &["replica", "site", "fitness", "count"], &rows)?;
    }
    write_runs(cfg, out, regime, &runs)
}

pub fn phase_diagram(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<crate::phase::PhaseRow>> {
    let rows = sweep_phase_diagram(cfg)?;
    write_csv(&out.join("phase.csv"), &PHASE_HEADER, &rows)?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.beta, r.gamma)).collect();
    let vals: Vec<f64> = rows.iter().map(|r| r.condensate_fraction).collect();
    emit_svg(&[Series::cells("Q1/n", pts, vals)], SvgKind::Heatmap, "Condensate fraction", &out.join("phase.svg"))?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub n: usize,
    pub m: u64,
    pub events: u64,
    pub time: f64,
    pub total_rate: f64,
    pub recomputed_total_rate: f64,
    pub seed: SeedRecord,
}

#[derive(Serialize)]
struct TrajRow {
    event_index: u64,
    time: f64,
    site: usize,
    count: u32,
}

/// One trajectory from the fittest-site start: sparse event log plus full snapshots.
pub fn dynamics(cfg: &ExperimentConfig, out: &Path) -> Result<DynamicsReport> {
    let n = cfg.n_values[0];
    let m = cfg.particles(n)?;
    let seq = cfg.weight_seq()?;
    let seed = SeedRecord::new(cfg.seed, Purpose::Disorder, stream_index(0, 0));
    let d = sample_disorder(&cfg.disorder, n, seed)?;
    let init = OccupancyVector::concentrated(n, d.sorted_desc[0], m as u32);
    let mut state = ProcessState::new(&seq, &d, &init)?;
    let mut rng = stream(cfg.seed, Purpose::Dynamics, stream_index(0, 0));
    let traj = simulate(&mut state, Horizon::Events(cfg.dynamics.events), cfg.dynamics.observe_every, true, &mut rng)?;
    let header = ["event_index", "time", "site", "count"];
    let events: Vec<TrajRow> = traj
        .events
        .iter()
        .map(|e| TrajRow { event_index: e.event_index, time: e.time, site: e.site + 1, count: e.count })
        .collect();
    write_csv(&out.join("trajectory.csv"), &header, &events)?;
    let snaps: Vec<TrajRow> = traj
        .snapshots
        .iter()
        .flat_map(|s| {
            s.counts.iter().enumerate().map(|(i, &c)| TrajRow { event_index: s.event_index, time: s.time, site: i + 1, count: c })
        })
        .collect();
    write_csv(&out.join("snapshots.csv"), &header, &snaps)?;
    let report = DynamicsReport {
        n,
        m,
        events: state.events(),
        time: state.time(),
        total_rate: state.total_rate(),
        recomputed_total_rate: state.recomputed_total_rate(),
        seed,
    };
    write_json(&out.join("dynamics.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub n: usize,
    pub disorder: usize,
    pub gap_top: f64,
    pub gap_ratio: f64,
    /// `U` at `k = √n` with `Ψ ≡ 1`; limit `α₁ Γ(γ+1)`.
    pub u_flat: f64,
    /// `U` at `k = √n` with `Ψ = Φ`.
    pub u_phi: f64,
    pub u_limit: f64,
    /// `V` at `k = n^{1/γ} (ln n)²`; limit 1.
    pub v_large: f64,
    /// `ln P_X(S_n = m)` when the exact table fits the budget.
    pub log_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub predicted_slope: f64,
}

/// Least-squares line through `(ln n, y)`.
#[must_use]
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn diagnostics_rows(cfg: &ExperimentConfig, disorders: usize, with_prob: bool) -> Result<Vec<DiagnosticsRow>> {
    let seq = cfg.weight_seq()?;
    let gamma = cfg.disorder.gamma();
    let u_limit = cfg.disorder.alpha1() * gamma_function(gamma + 1.0);
    let mut rows = Vec::new();
    for (si, &n) in cfg.n_values.iter().enumerate() {
        let m = cfg.particles(n)?;
        let nf = n as f64;
        let feasible = with_prob && cfg.exact_work(n, m) <= cfg.exact.max_work && (nf + 1.0) * (m as f64 + 1.0) <= cfg.exact.max_cells as f64;
        for b in 0..disorders {
            let seed = SeedRecord::new(cfg.seed, Purpose::Disorder, stream_index(si, b));
            let d = sample_disorder(&cfg.disorder, n, seed)?;
            let (gap_top, gap_ratio) = d.extremal_gaps()?;
            let k = nf.sqrt();
            let phi = |x: f64| seq.phi(x, 1e-14).map_or(f64::NAN, |e| e.value);
            let log_prob = if feasible {
                Some(prob_sn_equals_m(&log_partition(&seq, &d, m as usize, cfg.exact.partition_options())?, &seq, &d)?)
            } else {
                None
            };
            rows.push(DiagnosticsRow {
                n,
                disorder: b,
                gap_top,
                gap_ratio,
                u_flat: u_diag(&d, gamma, &|_| 1.0, k),
                u_phi: u_diag(&d, gamma, &phi, k),
                u_limit,
                v_large: v_diag(&d, nf.powf(1.0 / gamma) * nf.ln().powi(2)),
                log_prob,
            });
        }
    }
    Ok(rows)
}

/// Mean `ln P(S_n = m)` per size and the fitted power of `n`.
pub fn probability_scaling(cfg: &ExperimentConfig, rows: &[DiagnosticsRow]) -> Result<Option<(Vec<(usize, f64)>, ScalingFit)>> {
    let mut means = Vec::new();
    for &n in &cfg.n_values {
        let lp: Vec<f64> = rows.iter().filter(|r| r.n == n).filter_map(|r| r.log_prob).collect();
        if !lp.is_empty() {
            means.push((n, lp.iter().sum::<f64>() / lp.len() as f64));
        }
    }
    if means.len() < 2 {
        return Ok(None);
    }
    let pts: Vec<(f64, f64)> = means.iter().map(|&(n, y)| ((n as f64).ln(), y)).collect();
    let (slope, intercept) = fit_line(&pts);
    let predicted_slope = 1.0 - cfg.weight_seq()?.beta() - cfg.disorder.gamma();
    Ok(Some((means, ScalingFit { slope, intercept, predicted_slope })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub rows: Vec<DiagnosticsRow>,
    pub mean_log_prob: Vec<(usize, f64)>,
    pub scaling: Option<ScalingFit>,
}

/// Extremal gaps, approximation sums and `P(S_n = m)` scaling over `n_values`.
pub fn diagnostics(cfg: &ExperimentConfig, out: &Path) -> Result<DiagnosticsReport> {
    let disorders = cfg.replicas.div_ceil(cfg.block_size()).max(1);
    let rows = diagnostics_rows(cfg, disorders, true)?;
    write_csv(
        &out.join("diagnostics.csv"),
        &["n", "disorder", "gap_top", "gap_ratio", "u_flat", "u_phi", "u_limit", "v_large", "log_prob"],
        &rows,
    )?;
    let scaling = probability_scaling(cfg, &rows)?;
    let (mean_log_prob, fit) = match scaling {
        Some((m, f)) => {
            let emp: Vec<(f64, f64)> = m.iter().map(|&(n, y)| (n as f64, y.exp())).collect();
            let th: Vec<(f64, f64)> = m.iter().map(|&(n, _)| (n as f64, (f.intercept + f.predicted_slope * (n as f64).ln()).exp())).collect();
            emit_svg(
                &[Series::empirical("P(S_n = m)", emp), Series::theory("n^(1−β−γ)", th)],
                SvgKind::Scaling,
                "Probability of the canonical constraint",
                &out.join("scaling.svg"),
            )?;
            (m, Some(f))
        }
        None => (Vec::new(), None),
    };
    let report = DiagnosticsReport { rows, mean_log_prob, scaling: fit };
    write_json(&out.join("diagnostics.json"), &report)?;
    Ok(report)
}
