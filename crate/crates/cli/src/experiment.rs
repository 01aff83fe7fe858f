//! Replica orchestration: disorder blocks, samplers and per-replica observables.

use crate::config::{ExperimentConfig, Sampler};
use crate::error::{CliError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zrp_core::disorder::{sample_disorder, DisorderSample};
use zrp_core::dynamics::{Horizon, ProcessState};
use zrp_core::ensemble::{
    log_partition, nu_n, rejection_canonical_sample, GrandCanonical, McmcChain, OccupancyVector,
};
use zrp_core::rng::{stream, Purpose, SeedRecord};
use zrp_core::stats::condensate_stats;
use zrp_core::weights::WeightSeq;

/// One line of the statistics CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub replica: usize,
    pub n: usize,
    pub m: u64,
    pub i_n: usize,
    pub k_n: usize,
    pub f_n: f64,
    pub q1: u32,
    pub q2: u32,
    pub fluct_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderInfo {
    pub index: usize,
    pub seed: SeedRecord,
    pub nu_n: f64,
    pub max_fitness: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone)]
pub struct SizeRun {
    pub n: usize,
    pub m: u64,
    pub disorders: Vec<DisorderInfo>,
    pub rows: Vec<ReplicaRow>,
    /// Disorder block of each replica.
    pub block_of: Vec<usize>,
    /// Kept only on request: disorder draws and full configurations.
    pub samples: Vec<DisorderSample>,
    pub occupancies: Vec<OccupancyVector>,
}

/// Stream index for replica- or block-level randomness at one system size.
#[must_use]
pub fn stream_index(size_index: usize, local: usize) -> u64 {
    ((size_index as u64) << 40) | local as u64
}

/// Draws `count` canonical configurations for one disorder draw.
pub fn sample_block(
    cfg: &ExperimentConfig,
    seq: &WeightSeq,
    sample: &DisorderSample,
    m: u64,
    size_index: usize,
    block: usize,
    first_replica: usize,
    count: usize,
) -> Result<Vec<OccupancyVector>> {
    let n = sample.len();
    let replica_rng = |r: usize| stream(cfg.seed, Purpose::Replica, stream_index(size_index, first_replica + r));
    let nm = n as f64 * m as f64;
    match cfg.sampler {
        Sampler::Exact => {
            let table = log_partition(seq, sample, m as usize, cfg.exact.partition_options())?;
            (0..count)
                .into_par_iter()
                .map(|r| table.sample(&mut replica_rng(r)).map_err(CliError::from))
                .collect()
        }
        Sampler::Rejection => {
            let gc = GrandCanonical::new(seq, sample)?;
            (0..count)
                .into_par_iter()
                .map(|r| {
                    rejection_canonical_sample(&gc, m, cfg.rejection.max_attempts, &mut replica_rng(r))
                        .map_err(CliError::from)
                })
                .collect()
        }
        Sampler::Mcmc => {
            let rng = stream(cfg.seed, Purpose::Chain, stream_index(size_index, block));
            let init = OccupancyVector::concentrated(n, sample.sorted_desc[0], m as u32);
            let mut chain = McmcChain::new(seq, sample, &init, rng)?.with_swap_fraction(cfg.mcmc.swap_fraction)?;
            chain.run((cfg.mcmc.burn_in_factor * nm).round() as u64);
            let thin = ((cfg.mcmc.thin_factor * nm).round() as u64).max(1);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                chain.run(thin);
                out.push(chain.state());
            }
            Ok(out)
        }
        Sampler::Dynamics => {
            let init = OccupancyVector::concentrated(n, sample.sorted_desc[0], m as u32);
            if m == 0 {
                return Ok(vec![init; count]);
            }
            let mut rng = stream(cfg.seed, Purpose::Dynamics, stream_index(size_index, block));
            let mut state = ProcessState::new(seq, sample, &init)?;
            state.run_with(Horizon::Events((cfg.dynamics.burn_in_factor * nm).round() as u64), &mut rng, |_, _| {})?;
            let spacing = cfg.dynamics.thin_factor * nm.max(1.0) / state.total_rate();
            let mut out = Vec::with_capacity(count);
            state.sample_on_grid(spacing, count as u64, &mut rng, |c| {
                out.push(OccupancyVector::canonical(c.to_vec()));
            })?;
            Ok(out)
        }
    }
}

/// Runs every replica at `cfg.n_values[size_index]` on the current rayon pool.
pub fn run_size(cfg: &ExperimentConfig, size_index: usize, keep: bool) -> Result<SizeRun> {
    let n = cfg.n_values[size_index];
    let m = cfg.particles(n)?;
    let seq = cfg.weight_seq()?;
    let per = cfg.block_size();
    let blocks = cfg.replicas.div_ceil(per);
    let block_results: Vec<Result<_>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let seed = SeedRecord::new(cfg.seed, Purpose::Disorder, stream_index(size_index, b));
            let sample = sample_disorder(&cfg.disorder, n, seed)?;
            let nu = nu_n(&seq, &sample)?;
            let first = b * per;
            let count = per.min(cfg.replicas - first);
            let occs = sample_block(cfg, &seq, &sample, m, size_index, b, first, count)?;
            let rows = occs
                .iter()
                .enumerate()
                .map(|(r, occ)| {
                    let s = condensate_stats(occ, &sample, nu)?;
                    Ok(ReplicaRow {
                        replica: first + r,
                        n,
                        m,
                        i_n: s.i_n,
                        k_n: s.k_n,
                        f_n: s.f_n,
                        q1: s.q1,
                        q2: s.q2,
                        fluct_raw: s.fluct_raw,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let info = DisorderInfo { index: b, seed, nu_n: nu, max_fitness: sample.max(), replicas: count };
            Ok((info, rows, if keep { Some((sample, occs)) } else { None }))
        })
        .collect();
    let mut run = SizeRun {
        n,
        m,
        disorders: Vec::with_capacity(blocks),
        rows: Vec::with_capacity(cfg.replicas),
        block_of: Vec::with_capacity(cfg.replicas),
        samples: Vec::new(),
        occupancies: Vec::new(),
    };
    for res in block_results {
        let (info, rows, kept) = res?;
        run.block_of.extend(std::iter::repeat_n(info.index, rows.len()));
        run.rows.extend(rows);
        run.disorders.push(info);
        if let Some((s, o)) = kept {
            run.samples.push(s);
            run.occupancies.extend(o);
        }
    }
    Ok(run)
}

/// Runs `f` on a pool with the requested thread count, or the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
