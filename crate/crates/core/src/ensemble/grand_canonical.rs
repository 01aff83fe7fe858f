use super::OccupancyVector;
use crate::disorder::DisorderSample;
use crate::error::{domain, Result, ZrpError};
use crate::weights::WeightSeq;
use rand::Rng;

const CUTOFF: f64 = 1e-15;
const RATE_TABLE: usize = 4096;

/// Per-site grand-canonical laws `P(Q_i = k) = p_k X_i^k / Φ(X_i)` for a fixed disorder.
#[derive(Debug, Clone)]
pub struct GrandCanonical {
    x: Vec<f64>,
    phi: Vec<f64>,
    inv_u: Vec<f64>,
    head: usize,
    beta: f64,
    alpha2: f64,
    p0: f64,
}

impl GrandCanonical {
    pub fn new(seq: &WeightSeq, sample: &DisorderSample) -> Result<Self> {
        let mut phi = Vec::with_capacity(sample.len());
        for &x in &sample.fitnesses {
            if x >= 1.0 && seq.beta() <= 2.0 {
                return domain(format!(
                    "fitness 1 has no grand-canonical law for β = {} ≤ 2",
                    seq.beta()
                ));
            }
            let [m0, _, _] = seq.moments(x, x.ln());
            phi.push(m0.ok_or_else(|| ZrpError::Domain(format!("Φ({x}) undefined")))?);
        }
        let inv_u = (0..RATE_TABLE)
            .map(|k| if k == 0 { 0.0 } else { 1.0 / seq.hop_rate(k).expect("k ≥ 1") })
            .collect();
        Ok(Self {
            x: sample.fitnesses.clone(),
            phi,
            inv_u,
            head: seq.head_len(),
            beta: seq.beta(),
            alpha2: seq.alpha2(),
            p0: seq.p0(),
        })
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.x.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    #[must_use]
    pub fn phi(&self, i: usize) -> f64 {
        self.phi[i]
    }

    fn inv_u(&self, k: usize) -> f64 {
        match self.inv_u.get(k) {
            Some(v) => *v,
            None => ((k - 1) as f64 / k as f64).powf(self.beta),
        }
    }

    /// Bound on `Σ_{j>k} p_j x^j` given the current term `w_k = p_k x^k`, valid past the head.
    fn tail_bound(&self, k: usize, wk: f64, x: f64) -> f64 {
        if x < 1.0 {
            wk * x / (1.0 - x)
        } else {
            self.alpha2 * (k as f64).powf(1.0 - self.beta) / (self.beta - 1.0)
        }
    }

    /// One draw of `Q_i` by inversion of the incrementally accumulated CDF.
    pub fn draw_site<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> u32 {
        let x = self.x[i];
        if x == 0.0 {
            return 0;
        }
        let u: f64 = rng.random();
        let target = u * self.phi[i];
        match self.invert(x, target, self.phi[i]) {
            Ok(k) => k,
            Err(cum) => self.invert(x, u * cum, f64::INFINITY).unwrap_or_else(|_| 0),
        }
    }

    /// Smallest `k` with cumulative weight above `target`; on cutoff returns the accumulated mass.
    fn invert(&self, x: f64, target: f64, total: f64) -> std::result::Result<u32, f64> {
        let mut w = self.p0;
        let mut cum = 0.0;
        let mut k = 0usize;
        loop {
            cum += w;
            if cum > target {
                return Ok(k as u32);
            }
            if k >= self.head && total.is_finite() && self.tail_bound(k, w, x) < CUTOFF * total {
                return Err(cum);
            }
            if k > u32::MAX as usize / 2 || w == 0.0 {
                return Err(cum);
            }
            k += 1;
            w *= x * self.inv_u(k);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OccupancyVector {
        let counts = (0..self.len()).map(|i| self.draw_site(i, rng)).collect();
        OccupancyVector::grand_canonical(counts)
    }
}

/// Independent grand-canonical occupancies for one disorder draw.
pub fn sample_grand_canonical<R: Rng + ?Sized>(
    seq: &WeightSeq,
    sample: &DisorderSample,
    rng: &mut R,
) -> Result<OccupancyVector> {
    Ok(GrandCanonical::new(seq, sample)?.sample(rng))
}

/// `ν_n = (1/n) Σ G(X_i)`.
pub fn nu_n(seq: &WeightSeq, sample: &DisorderSample) -> Result<f64> {
    if sample.is_empty() {
        return domain("ν_n of an empty sample");
    }
    let mut sum = 0.0;
    for &x in &sample.fitnesses {
        sum += seq.g_of_x(x)?;
    }
    Ok(sum / sample.len() as f64)
}
