use super::OccupancyVector;
use crate::disorder::DisorderSample;
use crate::error::{domain, Result, ZrpError};
use crate::weights::WeightSeq;
use rand::Rng;

/// Scaled cells below this are recomputed with a tighter shift.
const TINY: f64 = 1e-250;
const UNDERFLOW: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionOptions {
    /// Per-site occupancy cap; `None` means `m`.
    pub q_cap: Option<usize>,
    /// Upper bound on the number of stored cells `(n+1)(m+1)`.
    pub max_cells: usize,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self { q_cap: None, max_cells: 200_000_000 }
    }
}

/// Log partition values of suffixes.
///
/// Sites are processed in ascending order of fitness, so the fittest sites sit in
/// the shortest suffixes. Row `j` holds `ln Z_j(s)` for the sites at processing
/// positions `j..n`, `s = 0..=m`; row `n` is the empty suffix.
#[derive(Debug, Clone)]
pub struct PartitionTable {
    n: usize,
    m: usize,
    cap: usize,
    order: Vec<usize>,
    ln_x: Vec<f64>,
    ln_p: Vec<f64>,
    log_z: Vec<f64>,
    deficit: f64,
    recomputed: usize,
}

impl PartitionTable {
    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn m(&self) -> usize {
        self.m
    }

    #[must_use]
    pub fn q_cap(&self) -> usize {
        self.cap
    }

    /// Site index processed at position `j`.
    #[must_use]
    pub fn site_at(&self, j: usize) -> usize {
        self.order[j]
    }

    /// `ln Z_j(s)` in processing order.
    #[must_use]
    pub fn log_z(&self, j: usize, s: usize) -> f64 {
        self.log_z[j * (self.m + 1) + s]
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.log_z[j * (self.m + 1)..(j + 1) * (self.m + 1)]
    }

    /// `ln Z_{m,n}`.
    #[must_use]
    pub fn log_total(&self) -> f64 {
        self.log_z(0, self.m)
    }

    /// Summed grand-canonical mass beyond the cap; zero when uncapped.
    #[must_use]
    pub fn truncation_deficit(&self) -> f64 {
        self.deficit
    }

    /// Cells that needed a second, rescaled pass.
    #[must_use]
    pub fn recomputed_cells(&self) -> usize {
        self.recomputed
    }

    #[inline]
    fn lw(&self, j: usize, q: usize) -> f64 {
        site_log_weight(&self.ln_p, self.ln_x[j], q)
    }

    /// The recurrence `Z_j(s) = Σ_q p_q X^q Z_{j+1}(s−q)` evaluated by plain log-sum-exp.
    #[must_use]
    pub fn recurrence_residual(&self, j: usize, s: usize) -> f64 {
        let terms: Vec<f64> = (0..=s.min(self.cap)).map(|q| self.lw(j, q) + self.log_z(j + 1, s - q)).collect();
        log_sum_exp(&terms) - self.log_z(j, s)
    }

    /// Exact draw from the canonical law by sequential conditioning.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<OccupancyVector> {
        let mut counts = vec![0u32; self.n];
        let mut s = self.m;
        for j in 0..self.n {
            if s == 0 {
                break;
            }
            let lz = self.log_z(j, s);
            if lz == f64::NEG_INFINITY {
                return Err(ZrpError::Unnormalizable(format!("no configuration carries {s} particles from position {j}")));
            }
            let next = self.row(j + 1);
            let qmax = s.min(self.cap);
            let prob = |q: usize| (self.lw(j, q) + next[s - q] - lz).exp();
            let u: f64 = rng.random();
            let mut cum = 0.0;
            let mut pick = None;
            for q in 0..=qmax {
                cum += prob(q);
                if cum > u {
                    pick = Some(q);
                    break;
                }
            }
            let q = match pick {
                Some(q) => q,
                None => {
                    if !(cum > 0.5) || !cum.is_finite() {
                        return Err(ZrpError::Unnormalizable(format!(
                            "conditional mass {cum} at position {j}, s = {s}"
                        )));
                    }
                    let target = u * cum;
                    let mut c = 0.0;
                    (0..=qmax)
                        .find(|&q| {
                            c += prob(q);
                            c > target
                        })
                        .unwrap_or(qmax)
                }
            };
            counts[self.order[j]] = q as u32;
            s -= q;
        }
        if s != 0 {
            return Err(ZrpError::Unnormalizable(format!("{s} particles left after the last site")));
        }
        Ok(OccupancyVector::canonical(counts))
    }
}

#[inline]
fn site_log_weight(ln_p: &[f64], ln_x: f64, q: usize) -> f64 {
    if q == 0 {
        ln_p[0]
    } else if ln_x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        ln_p[q] + q as f64 * ln_x
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn max_finite(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `c[s] = Σ_q b[q] a[s−q]` for `s < out.len()`.
///
/// Every `c[s]` accumulates its terms in increasing `q` without fused multiply-add,
/// so the wide-vector path and the portable path give bit-identical results.
fn convolve(b: &[f64], a: &[f64], out: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the required CPU feature was detected at runtime.
            unsafe { convolve_avx2(b, a, out) };
            return;
        }
    }
    convolve_generic(b, a, out);
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn convolve_avx2(b: &[f64], a: &[f64], out: &mut [f64]) {
    convolve_generic(b, a, out);
}

#[inline(always)]
fn convolve_generic(b: &[f64], a: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|c| *c = 0.0);
    let len = out.len();
    let lb = b.len().min(len);
    let mut q = 0;
    // Four weights per pass keep each output in a register for four terms.
    while q + 4 <= lb && q + 3 < len {
        let (b0, b1, b2, b3) = (b[q], b[q + 1], b[q + 2], b[q + 3]);
        for s in q..q + 3 {
            let mut d = out[s];
            d += b0 * a[s - q];
            if s > q {
                d += b1 * a[s - q - 1];
            }
            if s > q + 1 {
                d += b2 * a[s - q - 2];
            }
            out[s] = d;
        }
        let span = len - q - 3;
        let dst = &mut out[q + 3..];
        let (a0, a1, a2, a3) = (&a[3..3 + span], &a[2..2 + span], &a[1..1 + span], &a[..span]);
        for ((((d, x0), x1), x2), x3) in dst.iter_mut().zip(a0).zip(a1).zip(a2).zip(a3) {
            let mut v = *d;
            v += b0 * x0;
            v += b1 * x1;
            v += b2 * x2;
            v += b3 * x3;
            *d = v;
        }
        q += 4;
    }
    for (q, &bq) in b.iter().enumerate().take(lb).skip(q) {
        let dst = &mut out[q..];
        let src = &a[..len - q];
        for (d, s) in dst.iter_mut().zip(src) {
            *d += bq * s;
        }
    }
}

/// Fills `out[s] = ln Σ_q exp(lw[q] + next[s−q])`; returns the number of rescaled cells.
fn dp_row(lw: &[f64], next: &[f64], out: &mut [f64], scratch: &mut Scratch) -> usize {
    let mut cells: Vec<usize> = (0..out.len()).collect();
    let mut last_shift = (f64::NAN, f64::NAN);
    let mut recomputed = 0;
    loop {
        let hi = cells.last().map_or(0, |s| s + 1);
        let lw_hi = lw.len().min(hi);
        let big_a = max_finite(&next[..hi]);
        let big_b = max_finite(&lw[..lw_hi]);
        if big_a == f64::NEG_INFINITY {
            for &s in &cells {
                out[s] = f64::NEG_INFINITY;
            }
            return recomputed;
        }
        if (big_a, big_b) == last_shift {
            // No better shift exists for these cells; evaluate them term by term.
            for &s in &cells {
                let terms: Vec<f64> = (0..=s.min(lw.len() - 1)).map(|q| lw[q] + next[s - q]).collect();
                out[s] = log_sum_exp(&terms);
            }
            return recomputed;
        }
        last_shift = (big_a, big_b);
        let scaled = |v: &f64, shift: f64| {
            let d = v - shift;
            if d < UNDERFLOW { 0.0 } else { d.exp() }
        };
        scratch.a.clear();
        scratch.a.extend(next[..hi].iter().map(|v| scaled(v, big_a)));
        scratch.b.clear();
        scratch.b.extend(lw[..lw_hi].iter().map(|v| scaled(v, big_b)));
        while scratch.b.last() == Some(&0.0) {
            scratch.b.pop();
        }
        scratch.c.resize(hi, 0.0);
        convolve(&scratch.b, &scratch.a, &mut scratch.c[..hi]);
        let shift = big_a + big_b;
        let mut pending = Vec::new();
        for s in cells {
            let c = scratch.c[s];
            if c >= TINY {
                out[s] = c.ln() + shift;
            } else {
                pending.push(s);
            }
        }
        if pending.is_empty() {
            return recomputed;
        }
        recomputed += pending.len();
        cells = pending;
    }
}

#[derive(Default)]
struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

/// Builds the suffix partition table for `m` particles.
pub fn log_partition(
    seq: &WeightSeq,
    sample: &DisorderSample,
    m: usize,
    opts: PartitionOptions,
) -> Result<PartitionTable> {
    let n = sample.len();
    if n == 0 {
        return domain("partition table needs at least one site");
    }
    let cells = (n + 1).checked_mul(m + 1).unwrap_or(usize::MAX);
    if cells > opts.max_cells {
        return Err(ZrpError::Budget(format!(
            "partition table needs {cells} cells, budget is {}",
            opts.max_cells
        )));
    }
    let cap = opts.q_cap.unwrap_or(m).min(m);
    let mut order: Vec<usize> = sample.sorted_desc.clone();
    order.reverse();
    let ln_x: Vec<f64> = order.iter().map(|&i| sample.fitnesses[i].ln()).collect();
    let ln_p = seq.ln_weights(cap);
    let width = m + 1;
    let mut log_z = vec![f64::NEG_INFINITY; (n + 1) * width];
    log_z[n * width] = 0.0;
    let mut scratch = Scratch::default();
    let mut lw = Vec::with_capacity(cap + 1);
    let mut recomputed = 0;
    for j in (0..n).rev() {
        lw.clear();
        lw.extend((0..=cap).map(|q| site_log_weight(&ln_p, ln_x[j], q)));
        let (head, tail) = log_z.split_at_mut((j + 1) * width);
        let out = &mut head[j * width..];
        recomputed += dp_row(&lw, &tail[..width], out, &mut scratch);
    }
    let deficit = if cap >= m {
        0.0
    } else {
        let gc = super::GrandCanonical::new(seq, sample)?;
        (0..n)
            .map(|i| {
                let x = sample.fitnesses[i];
                let kept: f64 = (0..=cap).map(|q| site_log_weight(&ln_p, x.ln(), q).exp()).sum();
                (1.0 - kept / gc.phi(i)).max(0.0)
            })
            .sum()
    };
    Ok(PartitionTable { n, m, cap, order, ln_x, ln_p, log_z, deficit, recomputed })
}

/// `ln P_X(S_n = m) = ln Z_{m,n} − Σ ln Φ(X_i)`.
/// Exact canonical draw; the table fixes `seq`, the disorder and `m`.
pub fn exact_canonical_sample<R: Rng + ?Sized>(table: &PartitionTable, rng: &mut R) -> Result<OccupancyVector> {
    table.sample(rng)
}

pub fn prob_sn_equals_m(table: &PartitionTable, seq: &WeightSeq, sample: &DisorderSample) -> Result<f64> {
    if sample.len() != table.n() {
        return domain("disorder sample does not match the partition table");
    }
    let mut log_phi = 0.0;
    for &x in &sample.fitnesses {
        let [m0, _, _] = seq.moments(x, x.ln());
        log_phi += m0.ok_or_else(|| ZrpError::Domain(format!("Φ({x}) undefined")))?.ln();
    }
    Ok(table.log_total() - log_phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::enumerate_canonical;
    use crate::rng::{stream, Purpose};

    fn setup(x: Vec<f64>, beta: f64) -> (WeightSeq, DisorderSample) {
        (WeightSeq::zeta_tail(beta).unwrap(), DisorderSample::from_fitnesses(x).unwrap())
    }

    #[test]
    fn trivial_tables() {
        let (w, d) = setup(vec![0.3, 0.8, 0.5], 2.5);
        let t = log_partition(&w, &d, 0, PartitionOptions::default()).unwrap();
        assert!((t.log_total() - 3.0 * w.p0().ln()).abs() < 1e-14);
        for j in 0..=3 {
            assert!((t.log_z(j, 0) - (3 - j) as f64 * w.p0().ln()).abs() < 1e-14);
        }
        let (w, d) = setup(vec![0.7], 2.5);
        let t = log_partition(&w, &d, 6, PartitionOptions::default()).unwrap();
        assert!((t.log_total() - (w.weight(6) * 0.7f64.powi(6)).ln()).abs() < 1e-13);
    }

    #[test]
    fn matches_enumeration() {
        let (w, d) = setup(vec![0.9, 0.5, 0.1], 2.0);
        let t = log_partition(&w, &d, 3, PartitionOptions::default()).unwrap();
        let e = enumerate_canonical(&w, &d.fitnesses, 3);
        assert_eq!(e.configs.len(), 10);
        assert!((t.log_total() / e.log_z - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_site_probability() {
        let (w, d) = setup(vec![0.4, 0.9], 3.0);
        let t = log_partition(&w, &d, 1, PartitionOptions::default()).unwrap();
        let lp = prob_sn_equals_m(&t, &w, &d).unwrap();
        let phi = |x: f64| w.phi(x, 1e-15).unwrap().value;
        let expect = (w.weight(1) * w.p0() * 1.3 / (phi(0.4) * phi(0.9))).ln();
        assert!((lp - expect).abs() < 1e-12);
    }

    #[test]
    fn recurrence_spot_checks_on_a_large_table() {
        let w = WeightSeq::zeta_tail(3.0).unwrap();
        let law = crate::disorder::FitnessLaw::power_tail(0.5, 1.0).unwrap();
        let d = crate::disorder::sample_disorder(&law, 300, crate::rng::SeedRecord::new(4, Purpose::Test, 0)).unwrap();
        let t = log_partition(&w, &d, 450, PartitionOptions::default()).unwrap();
        let mut rng = stream(5, Purpose::Test, 0);
        for _ in 0..200 {
            let j = rng.random_range(0..300);
            let s = rng.random_range(0..=450);
            let r = t.recurrence_residual(j, s);
            assert!(r.abs() < 1e-9 * (1.0 + t.log_z(j, s).abs()), "j={j} s={s} residual {r}");
        }
        assert!(t.recurrence_residual(0, 0).abs() < 1e-12);
    }

    #[test]
    fn zero_fitness_sites() {
        let (w, d) = setup(vec![0.0, 0.6, 0.0], 2.5);
        let t = log_partition(&w, &d, 4, PartitionOptions::default()).unwrap();
        let expect = 2.0 * w.p0().ln() + (w.weight(4) * 0.6f64.powi(4)).ln();
        assert!((t.log_total() - expect).abs() < 1e-12);
        let mut rng = stream(1, Purpose::Test, 0);
        let occ = t.sample(&mut rng).unwrap();
        assert_eq!(occ.counts, vec![0, 4, 0]);
    }

    #[test]
    fn budget_and_cap() {
        let (w, d) = setup(vec![0.5; 10], 2.5);
        let small = PartitionOptions { max_cells: 50, ..PartitionOptions::default() };
        assert!(matches!(log_partition(&w, &d, 20, small), Err(ZrpError::Budget(_))));
        let capped = PartitionOptions { q_cap: Some(3), ..PartitionOptions::default() };
        let t = log_partition(&w, &d, 20, capped).unwrap();
        assert!(t.truncation_deficit() > 0.0);
        let full = log_partition(&w, &d, 20, PartitionOptions::default()).unwrap();
        assert_eq!(full.truncation_deficit(), 0.0);
        assert!(t.log_total() < full.log_total());
    }

    #[test]
    fn exact_two_site_single_particle() {
        let (w, d) = setup(vec![0.3, 0.6], 2.5);
        let t = log_partition(&w, &d, 1, PartitionOptions::default()).unwrap();
        let mut rng = stream(2, Purpose::Test, 0);
        let trials = 200_000;
        let first = (0..trials).filter(|_| t.sample(&mut rng).unwrap().counts[0] == 1).count();
        let p = 0.3 / 0.9;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((first as f64 / trials as f64 - p).abs() < 4.0 * se);
    }
}
