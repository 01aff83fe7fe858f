use crate::disorder::DisorderSample;
use crate::ensemble::OccupancyVector;
use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Per-replica condensate observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensateStats {
    /// 1-based index of the most occupied site, lowest index on ties.
    pub i_n: usize,
    /// Fitness rank of that site: `1 + |{i : X_i > X_{I_n}}|`.
    pub k_n: usize,
    pub f_n: f64,
    pub q1: u32,
    pub q2: u32,
    /// `Q⁽¹⁾ − m + ν_n n`.
    pub fluct_raw: f64,
}

pub fn condensate_stats(occ: &OccupancyVector, sample: &DisorderSample, nu: f64) -> Result<CondensateStats> {
    let n = occ.len();
    if n < 2 {
        return domain("condensate statistics need at least two sites");
    }
    if sample.len() != n {
        return domain("occupancy and disorder differ in length");
    }
    let mut best = 0;
    for (i, &q) in occ.counts.iter().enumerate() {
        if q > occ.counts[best] {
            best = i;
        }
    }
    let q1 = occ.counts[best];
    let q2 = occ
        .counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &q)| q)
        .max()
        .unwrap_or(0);
    let f_n = sample.fitnesses[best];
    let k_n = 1 + sample.fitnesses.iter().filter(|&&x| x > f_n).count();
    let fluct_raw = f64::from(q1) - occ.total as f64 + nu * n as f64;
    Ok(CondensateStats { i_n: best + 1, k_n, f_n, q1, q2, fluct_raw })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(counts: Vec<u32>, x: Vec<f64>) -> CondensateStats {
        let d = DisorderSample::from_fitnesses(x).unwrap();
        condensate_stats(&OccupancyVector::canonical(counts), &d, 0.0).unwrap()
    }

    #[test]
    fn examples() {
        let s = stats(vec![5, 1, 0], vec![0.2, 0.9, 0.5]);
        assert_eq!((s.i_n, s.q1, s.q2, s.k_n), (1, 5, 1, 3));
        assert_eq!(s.f_n, 0.2);
        let s = stats(vec![2, 2], vec![0.3, 0.7]);
        assert_eq!((s.i_n, s.k_n), (1, 2));
        let s = stats(vec![3, 3, 3, 3], vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(s.q1, s.q2);
    }

    #[test]
    fn fluctuation_statistic() {
        let d = DisorderSample::from_fitnesses(vec![0.5, 0.9]).unwrap();
        let s = condensate_stats(&OccupancyVector::canonical(vec![1, 9]), &d, 0.25).unwrap();
        assert!((s.fluct_raw - (9.0 - 10.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn too_small() {
        let d = DisorderSample::from_fitnesses(vec![0.5]).unwrap();
        assert!(condensate_stats(&OccupancyVector::canonical(vec![1]), &d, 0.0).is_err());
    }
}
