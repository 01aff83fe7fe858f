//! Continuous-time clockwise zero-range dynamics on a ring.
//!
//! A site with `k` particles emits one at rate `u_k / X_i` to site `i + 1 (mod n)`.
//! The canonical law with weights `p_k X_i^k` is stationary. Donors are selected
//! through a Fenwick tree of site rates.

use crate::disorder::DisorderSample;
use crate::ensemble::OccupancyVector;
use crate::error::{domain, Result, ZrpError};
use crate::numerics::Fenwick;
use crate::weights::WeightSeq;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct ProcessState {
    counts: Vec<u32>,
    m: u64,
    x: Vec<f64>,
    u: Vec<f64>,
    rates: Fenwick,
    total_rate: f64,
    time: f64,
    events: u64,
    since_rebuild: u64,
    rebuild_every: u64,
}

/// One hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub from: usize,
    pub to: usize,
    pub waiting_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Events(u64),
    Time(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub event_index: u64,
    pub time: f64,
    pub counts: Vec<u32>,
}

/// Sparse trajectory row: the new count of a site changed by an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_index: u64,
    pub time: f64,
    pub site: usize,
    pub count: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<EventRecord>,
}

impl ProcessState {
    pub fn new(seq: &WeightSeq, sample: &DisorderSample, init: &OccupancyVector) -> Result<Self> {
        if init.len() != sample.len() || init.is_empty() {
            return domain("initial configuration and disorder must have the same non-zero length");
        }
        if !init.is_consistent() {
            return domain("initial configuration total does not match its counts");
        }
        if let Some(i) = sample.fitnesses.iter().position(|&x| x <= 0.0) {
            return domain(format!("site {i} has zero fitness and an infinite exit rate"));
        }
        let m = init.total;
        let u = seq.hop_rates(m as usize);
        let x = sample.fitnesses.clone();
        let site_rates: Vec<f64> = init
            .counts
            .iter()
            .zip(&x)
            .map(|(&q, &xi)| if q == 0 { 0.0 } else { u[q as usize] / xi })
            .collect();
        let rates = Fenwick::new(&site_rates);
        let total_rate = rates.total();
        let n = x.len() as u64;
        Ok(Self {
            counts: init.counts.clone(),
            m,
            x,
            u,
            rates,
            total_rate,
            time: 0.0,
            events: 0,
            since_rebuild: 0,
            rebuild_every: n.max(1 << 16),
        })
    }

    #[must_use]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[must_use]
    pub fn occupancy(&self) -> OccupancyVector {
        OccupancyVector::canonical(self.counts.clone())
    }

    #[must_use]
    pub fn time(&self) -> f64 {
        self.time
    }

    #[must_use]
    pub fn events(&self) -> u64 {
        self.events
    }

    /// Incrementally maintained `Σ u_{Q_i}/X_i`.
    #[must_use]
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// `Σ u_{Q_i}/X_i` summed afresh from the counts.
    #[must_use]
    pub fn recomputed_total_rate(&self) -> f64 {
        self.counts.iter().zip(&self.x).map(|(&q, &x)| if q == 0 { 0.0 } else { self.u[q as usize] / x }).sum()
    }

    fn site_rate(&self, i: usize) -> f64 {
        let q = self.counts[i] as usize;
        if q == 0 {
            0.0
        } else {
            self.u[q] / self.x[i]
        }
    }

    fn refresh(&mut self, i: usize) {
        let new = self.site_rate(i);
        self.total_rate += new - self.rates.get(i);
        self.rates.set(i, new);
    }

    fn waiting_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = rng.random();
        -(-e).ln_1p() / self.total_rate
    }

    /// Exponential waiting time, donor proportional to its rate, hop to the clockwise neighbour.
    pub fn gillespie_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Hop> {
        if self.m == 0 {
            return Err(ZrpError::InvalidState("no particles: the process has no events".into()));
        }
        let dt = self.waiting_time(rng);
        Ok(self.hop_after(dt, rng))
    }

    fn hop_after<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> Hop {
        let target: f64 = rng.random::<f64>() * self.total_rate;
        let from = self.rates.find(target);
        let to = (from + 1) % self.counts.len();
        self.counts[from] -= 1;
        self.counts[to] += 1;
        self.refresh(from);
        self.refresh(to);
        self.time += dt;
        self.events += 1;
        self.since_rebuild += 1;
        if self.since_rebuild >= self.rebuild_every {
            self.rates.rebuild();
            self.total_rate = self.rates.total();
            self.since_rebuild = 0;
        }
        Hop { from, to, waiting_time: dt }
    }

    /// Runs to the horizon, calling `hold(counts, dt)` for every sojourn before it ends.
    pub fn run_with<R, F>(&mut self, horizon: Horizon, rng: &mut R, mut hold: F) -> Result<()>
    where
        R: Rng + ?Sized,
        F: FnMut(&[u32], f64),
    {
        if self.m == 0 {
            if let Horizon::Time(t_end) = horizon {
                hold(&self.counts, (t_end - self.time).max(0.0));
                self.time = self.time.max(t_end);
                return Ok(());
            }
            return Err(ZrpError::InvalidState("no particles: the process has no events".into()));
        }
        match horizon {
            Horizon::Events(k) => {
                for _ in 0..k {
                    let dt = self.waiting_time(rng);
                    hold(&self.counts, dt);
                    self.hop_after(dt, rng);
                }
            }
            Horizon::Time(t_end) => loop {
                let dt = self.waiting_time(rng);
                if self.time + dt > t_end {
                    hold(&self.counts, t_end - self.time);
                    self.time = t_end;
                    return Ok(());
                }
                hold(&self.counts, dt);
                self.hop_after(dt, rng);
            },
        }
        Ok(())
    }

    /// Records the configuration at times `t0 + spacing, t0 + 2·spacing, …` until `count` samples exist.
    pub fn sample_on_grid<R, F>(&mut self, spacing: f64, count: u64, rng: &mut R, mut record: F) -> Result<()>
    where
        R: Rng + ?Sized,
        F: FnMut(&[u32]),
    {
        if !(spacing > 0.0) {
            return domain("grid spacing must be positive");
        }
        if self.m == 0 {
            for _ in 0..count {
                record(&self.counts);
            }
            return Ok(());
        }
        let mut next = self.time + spacing;
        let mut taken = 0;
        while taken < count {
            let dt = self.waiting_time(rng);
            while taken < count && next < self.time + dt {
                record(&self.counts);
                taken += 1;
                next += spacing;
            }
            self.hop_after(dt, rng);
        }
        Ok(())
    }
}

/// Runs the process, keeping a full snapshot every `observe_every` events.
///
/// With `record_events` every changed site is also logged, which is what the sparse
/// trajectory CSV holds.
pub fn simulate<R: Rng + ?Sized>(
    state: &mut ProcessState,
    horizon: Horizon,
    observe_every: u64,
    record_events: bool,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    let snap = |s: &ProcessState| Snapshot { event_index: s.events, time: s.time, counts: s.counts.clone() };
    traj.snapshots.push(snap(state));
    let every = observe_every.max(1);
    let step = |state: &mut ProcessState, hop: Hop, traj: &mut Trajectory| {
        if record_events {
            for site in [hop.from, hop.to] {
                traj.events.push(EventRecord {
                    event_index: state.events,
                    time: state.time,
                    site,
                    count: state.counts[site],
                });
            }
        }
        if state.events % every == 0 {
            traj.snapshots.push(snap(state));
        }
    };
    match horizon {
        Horizon::Events(k) => {
            for _ in 0..k {
                if state.m == 0 {
                    break;
                }
                let hop = state.gillespie_step(rng)?;
                step(state, hop, &mut traj);
            }
        }
        Horizon::Time(t_end) => {
            while state.m > 0 {
                let dt = state.waiting_time(rng);
                if state.time + dt > t_end {
                    break;
                }
                let hop = state.hop_after(dt, rng);
                step(state, hop, &mut traj);
            }
            state.time = state.time.max(t_end);
        }
    }
    Ok(traj)
}
