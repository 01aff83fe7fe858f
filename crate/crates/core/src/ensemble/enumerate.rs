use crate::weights::WeightSeq;

/// Every configuration of `m` particles on the given sites with its canonical probability.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub configs: Vec<Vec<u32>>,
    pub probs: Vec<f64>,
    pub log_z: f64,
}

impl Enumeration {
    /// Position of a configuration in `configs`.
    #[must_use]
    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.configs.binary_search_by(|c| c.as_slice().cmp(counts).reverse()).ok()
    }

    /// Marginal law of `Q_site`.
    #[must_use]
    pub fn marginal(&self, site: usize, m: u32) -> Vec<f64> {
        let mut out = vec![0.0; m as usize + 1];
        for (c, p) in self.configs.iter().zip(&self.probs) {
            out[c[site] as usize] += p;
        }
        out
    }
}

fn compositions(n: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(m);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for q in (0..=m).rev() {
        prefix.push(q);
        compositions(n, m - q, prefix, out);
        prefix.pop();
    }
}

/// Brute-force canonical law; configurations are in decreasing lexicographic order.
#[must_use]
pub fn enumerate_canonical(seq: &WeightSeq, fitnesses: &[f64], m: u32) -> Enumeration {
    let mut configs = Vec::new();
    compositions(fitnesses.len(), m, &mut Vec::new(), &mut configs);
    let weights: Vec<f64> = configs
        .iter()
        .map(|c| {
            c.iter()
                .zip(fitnesses)
                .map(|(&q, &x)| seq.weight(q as usize) * x.powi(q as i32))
                .product()
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / z).collect();
    Enumeration { configs, probs, log_z: z.ln() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_lookup() {
        let w = WeightSeq::zeta_tail(2.0).unwrap();
        let e = enumerate_canonical(&w, &[0.9, 0.5, 0.1], 3);
        assert_eq!(e.configs.len(), 10);
        assert!((e.probs.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for (i, c) in e.configs.iter().enumerate() {
            assert_eq!(e.index_of(c), Some(i));
        }
        let e = enumerate_canonical(&w, &[0.9, 0.7, 0.4, 0.2], 6);
        assert_eq!(e.configs.len(), 84);
    }

    #[test]
    fn conditioning_identity_two_sites() {
        // Canonical law equals the grand-canonical product law conditioned on S = 2.
        let w = WeightSeq::zeta_tail(2.5).unwrap();
        let x = [0.35, 0.8];
        let e = enumerate_canonical(&w, &x, 2);
        let gc = |k: usize, x: f64| w.weight(k) * x.powi(k as i32) / w.phi(x, 1e-15).unwrap().value;
        let joint: Vec<f64> = e.configs.iter().map(|c| gc(c[0] as usize, x[0]) * gc(c[1] as usize, x[1])).collect();
        let s: f64 = joint.iter().sum();
        for (p, j) in e.probs.iter().zip(&joint) {
            assert!((p - j / s).abs() < 1e-14);
        }
    }
}
