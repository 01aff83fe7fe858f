//! Binary indexed tree over non-negative weights with prefix search.

#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
    top: usize,
}

impl Fenwick {
    #[must_use]
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut f = Self {
            tree: vec![0.0; n + 1],
            values: values.to_vec(),
            top: if n == 0 { 0 } else { 1usize << (usize::BITS - 1 - n.leading_zeros()) },
        };
        f.rebuild();
        f
    }

    /// Recompute every internal node from the stored leaf values.
    pub fn rebuild(&mut self) {
        let n = self.values.len();
        for i in 1..=n {
            self.tree[i] = self.values[i - 1];
        }
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                self.tree[parent] += self.tree[i];
            }
        }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[must_use]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let delta = value - self.values[i];
        self.values[i] = value;
        let n = self.values.len();
        let mut j = i + 1;
        while j <= n {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum of the first `i` weights.
    #[must_use]
    pub fn prefix(&self, i: usize) -> f64 {
        let mut s = 0.0;
        let mut j = i;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    #[must_use]
    pub fn total(&self) -> f64 {
        self.prefix(self.values.len())
    }

    /// Smallest index `i` with `prefix(i + 1) > target`, skipping zero weights.
    #[must_use]
    pub fn find(&self, mut target: f64) -> usize {
        let n = self.values.len();
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        // Rounding can land on a zero-weight slot or run past the end.
        let mut i = pos.min(n - 1);
        while self.values[i] == 0.0 && i + 1 < n {
            i += 1;
        }
        while self.values[i] == 0.0 && i > 0 {
            i -= 1;
        }
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_find() {
        let mut f = Fenwick::new(&[1.0, 0.0, 2.0, 3.0, 0.5]);
        assert_eq!(f.total(), 6.5);
        assert_eq!(f.prefix(3), 3.0);
        assert_eq!(f.find(0.5), 0);
        assert_eq!(f.find(1.0), 2);
        assert_eq!(f.find(2.99), 2);
        assert_eq!(f.find(3.0), 3);
        assert_eq!(f.find(6.4), 4);
        assert_eq!(f.find(100.0), 4);
        f.set(3, 0.0);
        assert_eq!(f.total(), 3.5);
        assert_eq!(f.find(3.2), 4);
    }
}
