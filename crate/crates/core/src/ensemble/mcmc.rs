use super::OccupancyVector;
use crate::disorder::DisorderSample;
use crate::error::{domain, Result};
use crate::rng::Rng as ChainRng;
use crate::weights::WeightSeq;
use rand::Rng;

/// `ln Π p_{Q_i} X_i^{Q_i}`, the unnormalized log canonical weight.
#[must_use]
pub fn log_stationary_weight(seq: &WeightSeq, fitnesses: &[f64], counts: &[u32]) -> f64 {
    counts
        .iter()
        .zip(fitnesses)
        .map(|(&q, &x)| if q == 0 { seq.ln_weight(0) } else { seq.ln_weight(q as usize) + f64::from(q) * x.ln() })
        .sum()
}

/// Metropolis–Hastings chain on configurations with fixed particle number.
///
/// A move takes one particle from a donor chosen uniformly among occupied sites to a
/// target chosen uniformly among all sites. Since the number of occupied sites can
/// change, the acceptance ratio carries the Hastings factor `|occ(x)| / |occ(y)|`.
///
/// A fraction of steps instead exchanges the whole occupations of an occupied site and
/// a uniform site, accepted with `(X_j/X_i)^{Q_i-Q_j}`. Without it a condensate that
/// has formed on one site almost never relocates and the location statistics freeze.
#[derive(Debug, Clone)]
pub struct McmcChain {
    x: Vec<f64>,
    u: Vec<f64>,
    counts: Vec<u32>,
    occupied: Vec<usize>,
    slot: Vec<usize>,
    rng: ChainRng,
    swap_fraction: f64,
    moves: u64,
    accepted: u64,
}

pub const DEFAULT_SWAP_FRACTION: f64 = 0.1;

const EMPTY: usize = usize::MAX;

impl McmcChain {
    pub fn new(seq: &WeightSeq, sample: &DisorderSample, init: &OccupancyVector, rng: ChainRng) -> Result<Self> {
        if init.len() != sample.len() {
            return domain("initial configuration and disorder differ in length");
        }
        if !init.is_consistent() {
            return domain("initial configuration total does not match its counts");
        }
        for (i, &q) in init.counts.iter().enumerate() {
            if q > 0 && sample.fitnesses[i] == 0.0 {
                return domain(format!("initial configuration puts particles on zero-fitness site {i}"));
            }
        }
        let m = init.total as usize;
        let mut occupied = Vec::new();
        let mut slot = vec![EMPTY; init.len()];
        for (i, &q) in init.counts.iter().enumerate() {
            if q > 0 {
                slot[i] = occupied.len();
                occupied.push(i);
            }
        }
        Ok(Self {
            x: sample.fitnesses.clone(),
            u: seq.hop_rates(m + 1),
            counts: init.counts.clone(),
            occupied,
            slot,
            rng,
            swap_fraction: DEFAULT_SWAP_FRACTION,
            moves: 0,
            accepted: 0,
        })
    }

    /// Probability that a step is an occupation swap instead of a single hop.
    pub fn with_swap_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return domain(format!("swap fraction must lie in [0, 1], got {fraction}"));
        }
        self.swap_fraction = fraction;
        Ok(self)
    }

    #[must_use]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[must_use]
    pub fn state(&self) -> OccupancyVector {
        OccupancyVector::canonical(self.counts.clone())
    }

    #[must_use]
    pub fn acceptance_rate(&self) -> f64 {
        if self.moves == 0 {
            0.0
        } else {
            self.accepted as f64 / self.moves as f64
        }
    }

    /// `ln` of the Metropolis–Hastings ratio for moving one particle from `i` to `j`.
    #[must_use]
    pub fn log_acceptance_ratio(&self, i: usize, j: usize) -> f64 {
        let (qi, qj) = (self.counts[i] as usize, self.counts[j] as usize);
        let occ_x = self.occupied.len() as f64;
        let occ_y = occ_x - f64::from(u8::from(qi == 1)) + f64::from(u8::from(qj == 0));
        (self.u[qi] * self.x[j] * occ_x / (self.u[qj + 1] * self.x[i] * occ_y)).ln()
    }

    /// `ln` of the acceptance ratio for exchanging the occupations of `i` and `j`.
    #[must_use]
    pub fn log_swap_ratio(&self, i: usize, j: usize) -> f64 {
        let d = f64::from(self.counts[i]) - f64::from(self.counts[j]);
        if d == 0.0 {
            return 0.0;
        }
        // the site receiving the larger pile must have positive fitness
        let gain = if d > 0.0 { j } else { i };
        if self.x[gain] == 0.0 {
            return f64::NEG_INFINITY;
        }
        d * (self.x[j].ln() - self.x[i].ln())
    }

    fn swap_step(&mut self, i: usize, j: usize) {
        let (qi, qj) = (self.counts[i], self.counts[j]);
        if qi == qj {
            return;
        }
        let lr = self.log_swap_ratio(i, j);
        if lr < 0.0 && self.rng.random::<f64>().ln() >= lr {
            return;
        }
        self.accepted += 1;
        self.counts.swap(i, j);
        if qi == 0 || qj == 0 {
            let (now_empty, now_full) = if qj == 0 { (i, j) } else { (j, i) };
            let k = self.slot[now_empty];
            self.occupied[k] = now_full;
            self.slot[now_full] = k;
            self.slot[now_empty] = EMPTY;
        }
    }

    fn vacate(&mut self, i: usize) {
        let k = self.slot[i];
        let last = *self.occupied.last().expect("site is occupied");
        self.occupied.swap_remove(k);
        if last != i {
            self.slot[last] = k;
        }
        self.slot[i] = EMPTY;
    }

    pub fn step(&mut self) {
        self.moves += 1;
        let occ = self.occupied.len();
        if occ == 0 {
            return;
        }
        let n = self.x.len();
        let i = self.occupied[self.rng.random_range(0..occ)];
        let j = self.rng.random_range(0..n);
        if i == j {
            return;
        }
        if self.swap_fraction > 0.0 && self.rng.random::<f64>() < self.swap_fraction {
            self.swap_step(i, j);
            return;
        }
        let (qi, qj) = (self.counts[i] as usize, self.counts[j] as usize);
        let occ_x = occ as f64;
        let occ_y = occ_x - f64::from(u8::from(qi == 1)) + f64::from(u8::from(qj == 0));
        let ratio = self.u[qi] * self.x[j] * occ_x / (self.u[qj + 1] * self.x[i] * occ_y);
        if ratio < 1.0 && self.rng.random::<f64>() >= ratio {
            return;
        }
        self.accepted += 1;
        self.counts[i] -= 1;
        self.counts[j] += 1;
        if self.counts[i] == 0 {
            self.vacate(i);
        }
        if qj == 0 {
            self.slot[j] = self.occupied.len();
            self.occupied.push(j);
        }
    }

    pub fn run(&mut self, moves: u64) {
        for _ in 0..moves {
            self.step();
        }
    }
}

/// Runs `sweeps · n` moves from `init` and returns the final configuration.
pub fn mcmc_canonical_sample(
    seq: &WeightSeq,
    sample: &DisorderSample,
    m: u64,
    sweeps: u64,
    rng: ChainRng,
    init: &OccupancyVector,
) -> Result<OccupancyVector> {
    if init.total != m {
        return domain(format!("initial configuration holds {} particles, expected {m}", init.total));
    }
    if sweeps == 0 {
        return domain("at least one sweep is required");
    }
    let mut chain = McmcChain::new(seq, sample, init, rng)?;
    chain.run(sweeps * sample.len() as u64);
    Ok(chain.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn detailed_balance_ratio_is_exact() {
        let w = WeightSeq::zeta_tail(2.3).unwrap();
        let d = DisorderSample::from_fitnesses(vec![0.9, 0.2, 0.55, 0.7, 0.33]).unwrap();
        let mut rng = stream(3, Purpose::Test, 0);
        for _ in 0..500 {
            let counts: Vec<u32> = (0..5).map(|_| rng.random_range(0..4)).collect();
            if counts.iter().sum::<u32>() == 0 {
                continue;
            }
            let occ = OccupancyVector::canonical(counts.clone());
            let chain = McmcChain::new(&w, &d, &occ, stream(0, Purpose::Test, 0)).unwrap();
            let i = (0..5).find(|&i| counts[i] > 0).unwrap();
            let j = (i + 1 + rng.random_range(0..4)) % 5;
            let mut moved = counts.clone();
            moved[i] -= 1;
            moved[j] += 1;
            let occ_x = counts.iter().filter(|&&c| c > 0).count() as f64;
            let occ_y = moved.iter().filter(|&&c| c > 0).count() as f64;
            // π(y) q(y→x) / (π(x) q(x→y)) with q(x→y) = 1/(|occ(x)| n).
            let expect = log_stationary_weight(&w, &d.fitnesses, &moved) - log_stationary_weight(&w, &d.fitnesses, &counts)
                + occ_x.ln()
                - occ_y.ln();
            assert!((chain.log_acceptance_ratio(i, j) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_ratio_is_exact() {
        let w = WeightSeq::zeta_tail(2.3).unwrap();
        let d = DisorderSample::from_fitnesses(vec![0.9, 0.2, 0.55, 0.7, 0.33]).unwrap();
        let mut rng = stream(4, Purpose::Test, 0);
        for _ in 0..500 {
            let counts: Vec<u32> = (0..5).map(|_| rng.random_range(0..6)).collect();
            if counts.iter().sum::<u32>() == 0 {
                continue;
            }
            let chain = McmcChain::new(&w, &d, &OccupancyVector::canonical(counts.clone()), stream(0, Purpose::Test, 0)).unwrap();
            let (i, j) = (rng.random_range(0..5), rng.random_range(0..5));
            let mut swapped = counts.clone();
            swapped.swap(i, j);
            let expect = log_stationary_weight(&w, &d.fitnesses, &swapped) - log_stationary_weight(&w, &d.fitnesses, &counts);
            assert!((chain.log_swap_ratio(i, j) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn swaps_relocate_condensate() {
        // two nearly equal best sites: a pure hop chain started on one rarely visits the other
        let w = WeightSeq::zeta_tail(3.0).unwrap();
        let d = DisorderSample::from_fitnesses(vec![0.99, 0.985, 0.3, 0.3]).unwrap();
        let init = OccupancyVector::concentrated(4, 0, 200);
        let mut chain = McmcChain::new(&w, &d, &init, stream(9, Purpose::Test, 0)).unwrap().with_swap_fraction(0.2).unwrap();
        let mut second = 0;
        for _ in 0..2000 {
            chain.run(200);
            if chain.counts()[1] > chain.counts()[0] {
                second += 1;
            }
        }
        assert!(second > 200, "{second}");
        assert!(chain.clone().with_swap_fraction(1.5).is_err());
    }

    #[test]
    fn frozen_without_particles() {
        let w = WeightSeq::zeta_tail(2.5).unwrap();
        let d = DisorderSample::from_fitnesses(vec![0.5, 0.6, 0.7]).unwrap();
        let init = OccupancyVector::canonical(vec![0, 0, 0]);
        let out = mcmc_canonical_sample(&w, &d, 0, 10, stream(1, Purpose::Test, 0), &init).unwrap();
        assert_eq!(out.counts, vec![0, 0, 0]);
    }

    #[test]
    fn rejects_bad_init() {
        let w = WeightSeq::zeta_tail(2.5).unwrap();
        let d = DisorderSample::from_fitnesses(vec![0.0, 0.6]).unwrap();
        let init = OccupancyVector::canonical(vec![1, 1]);
        assert!(mcmc_canonical_sample(&w, &d, 2, 1, stream(1, Purpose::Test, 0), &init).is_err());
        let init = OccupancyVector::canonical(vec![0, 2]);
        assert!(mcmc_canonical_sample(&w, &d, 3, 1, stream(1, Purpose::Test, 0), &init).is_err());
    }

    #[test]
    fn symmetric_pair() {
        let w = WeightSeq::zeta_tail(2.5).unwrap();
        let d = DisorderSample::from_fitnesses(vec![0.6, 0.6]).unwrap();
        let mut chain = McmcChain::new(&w, &d, &OccupancyVector::concentrated(2, 0, 2), stream(8, Purpose::Test, 0)).unwrap();
        let (mut left, mut right) = (0u32, 0u32);
        let samples = 100_000;
        for _ in 0..samples {
            chain.run(20);
            match chain.counts() {
                [2, 0] => left += 1,
                [0, 2] => right += 1,
                _ => {}
            }
        }
        let diff = f64::from(left) - f64::from(right);
        let se = (f64::from(left + right)).sqrt();
        assert!(diff.abs() < 3.5 * se, "{left} vs {right}");
    }
}
