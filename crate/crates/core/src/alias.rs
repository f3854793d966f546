//! Walker/Vose alias tables for O(1) sampling from a discrete distribution.

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Build from non-negative weights. Returns `None` when the weights are
    /// empty, contain a negative or non-finite value, or sum to zero.
    pub fn new(weights: &[f64]) -> Option<Self> {
        let n = weights.len();
        if n == 0 || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return None;
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return None;
        }

        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);

        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Some(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }

    /// The probability of drawing each outcome, reconstructed from the table.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.prob.len() as f64;
        let mut p = vec![0.0; self.prob.len()];
        for (i, (&keep, &other)) in self.prob.iter().zip(&self.alias).enumerate() {
            p[i] += keep / n;
            p[other as usize] += (1.0 - keep) / n;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_degenerate_weights() {
        assert!(AliasTable::new(&[]).is_none());
        assert!(AliasTable::new(&[0.0, 0.0]).is_none());
        assert!(AliasTable::new(&[1.0, -1.0]).is_none());
        assert!(AliasTable::new(&[f64::NAN]).is_none());
    }

    #[test]
    fn reconstructs_the_distribution() {
        let w = [0.5, 2.0, 0.0, 1.5, 6.0];
        let table = AliasTable::new(&w).unwrap();
        let total: f64 = w.iter().sum();
        for (p, wi) in table.probabilities().iter().zip(w) {
            assert!((p - wi / total).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_frequencies_match() {
        let w = [1.0, 3.0, 6.0];
        let table = AliasTable::new(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = [0usize; 3];
        let draws = 200_000;
        for _ in 0..draws {
            hits[table.sample(&mut rng)] += 1;
        }
        for (h, wi) in hits.iter().zip(w) {
            let f = *h as f64 / draws as f64;
            assert!((f - wi / 10.0).abs() < 0.005, "{f} vs {}", wi / 10.0);
        }
    }

    #[test]
    fn single_outcome() {
        let table = AliasTable::new(&[4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(table.sample(&mut rng), 0);
        assert_eq!(table.probabilities(), vec![1.0]);
    }
}
