use crate::error::{Error, Result};

/// A finite continuous-time Markov chain given by its off-diagonal jump rates.
///
/// The diagonal of the generator is implied: `Q(x, x) = -sum_{y != x} Q(x, y)`.
/// Construction rejects chains with fewer than two states and chains whose
/// rate graph is not strongly connected, so every `ChainSpec` is irreducible.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    labels: Vec<String>,
    /// Outgoing edges per state, sorted by target.
    out: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
}

impl ChainSpec {
    /// Builds a chain from `(from, to, rate)` triples. Rates must be strictly
    /// positive and finite; each directed pair may appear at most once.
    pub fn from_rates(
        labels: Option<Vec<String>>,
        state_count: usize,
        rates: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if state_count < 2 {
            return Err(Error::TrivialChain(state_count));
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != state_count {
                    return Err(Error::DimensionMismatch {
                        expected: state_count,
                        got: l.len(),
                    });
                }
                l
            }
            None => (0..state_count).map(|i| i.to_string()).collect(),
        };
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); state_count];
        for &(from, to, rate) in rates {
            if from >= state_count || to >= state_count {
                return Err(Error::InvalidRate {
                    from,
                    to,
                    reason: format!("state index out of range 0..{state_count}"),
                });
            }
            if from == to {
                return Err(Error::InvalidRate {
                    from,
                    to,
                    reason: "diagonal entries are implied".into(),
                });
            }
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::InvalidRate {
                    from,
                    to,
                    reason: format!("rate must be strictly positive and finite, got {rate}"),
                });
            }
            out[from].push((to, rate));
        }
        for (from, row) in out.iter_mut().enumerate() {
            row.sort_by_key(|&(to, _)| to);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidRate {
                    from,
                    to: w[0].0,
                    reason: "duplicate rate entry".into(),
                });
            }
        }
        let exit = out.iter().map(|row| row.iter().map(|&(_, r)| r).sum()).collect();
        let chain = ChainSpec { labels, out, exit };
        chain.check_irreducible()?;
        Ok(chain)
    }

    /// Builds a chain from a dense matrix whose off-diagonal entries are rates;
    /// zeros mean "no edge" and the diagonal is ignored.
    pub fn from_dense(rates: &[Vec<f64>]) -> Result<Self> {
        let m = rates.len();
        let mut triples = Vec::new();
        for (i, row) in rates.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: row.len(),
                });
            }
            for (j, &r) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if r < 0.0 || !r.is_finite() {
                    return Err(Error::InvalidRate {
                        from: i,
                        to: j,
                        reason: format!("off-diagonal rate must be nonnegative and finite, got {r}"),
                    });
                }
                if r > 0.0 {
                    triples.push((i, j, r));
                }
            }
        }
        Self::from_rates(None, m, &triples)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.state_count() {
            return Err(Error::DimensionMismatch {
                expected: self.state_count(),
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    fn check_irreducible(&self) -> Result<()> {
        let m = self.state_count();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (x, row) in self.out.iter().enumerate() {
            for &(y, _) in row {
                rev[y].push(x);
            }
        }
        let forward: Vec<Vec<usize>> = self
            .out
            .iter()
            .map(|row| row.iter().map(|&(y, _)| y).collect())
            .collect();
        for adj in [&forward, &rev] {
            let mut seen = vec![false; m];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            if let Some(bad) = seen.iter().position(|&s| !s) {
                return Err(Error::NonIrreducible(bad));
            }
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.exit.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Jump rate from `from` to `to` (zero when there is no edge or `from == to`).
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.out[from]
            .binary_search_by_key(&to, |&(y, _)| y)
            .map(|k| self.out[from][k].1)
            .unwrap_or(0.0)
    }

    pub fn out_edges(&self, state: usize) -> &[(usize, f64)] {
        &self.out[state]
    }

    /// Total exit rate `-Q(x, x)`.
    pub fn exit_rate(&self, state: usize) -> f64 {
        self.exit[state]
    }

    pub fn max_exit_rate(&self) -> f64 {
        self.exit.iter().copied().fold(0.0, f64::max)
    }

    /// All directed edges `(from, to, rate)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(y, r)| (x, y, r)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Dense generator including the diagonal.
    pub fn generator(&self) -> Vec<Vec<f64>> {
        let m = self.state_count();
        let mut q = vec![vec![0.0; m]; m];
        for (x, row) in self.out.iter().enumerate() {
            for &(y, r) in row {
                q[x][y] = r;
            }
            q[x][x] = -self.exit[x];
        }
        q
    }

    /// Relabels states by `perm`: old state `i` becomes new state `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = self.state_count();
        if perm.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: perm.len(),
            });
        }
        let mut labels = vec![String::new(); m];
        for (i, &p) in perm.iter().enumerate() {
            if p >= m {
                return Err(Error::StateOutOfRange(p));
            }
            labels[p] = self.labels[i].clone();
        }
        let triples: Vec<_> = self.edges().map(|(x, y, r)| (perm[x], perm[y], r)).collect();
        Self::from_rates(Some(labels), m, &triples)
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.state_count() {
            Err(Error::StateOutOfRange(state))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_negative_row_sum() {
        let c = ChainSpec::from_dense(&[
            vec![0.0, 1.0, 2.0],
            vec![0.5, 0.0, 0.0],
            vec![3.0, 0.0, 0.0],
        ])
        .unwrap();
        for row in c.generator() {
            let s: f64 = row.iter().sum();
            assert!(s.abs() < 1e-12);
        }
        assert_eq!(c.exit_rate(0), 3.0);
        assert_eq!(c.rate(2, 0), 3.0);
        assert_eq!(c.rate(1, 2), 0.0);
    }

    #[test]
    fn rejects_reducible_and_trivial() {
        let err = ChainSpec::from_dense(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::NonIrreducible(_)));
        let err = ChainSpec::from_rates(None, 1, &[]).unwrap_err();
        assert_eq!(err, Error::TrivialChain(1));
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(ChainSpec::from_rates(None, 2, &[(0, 1, 0.0), (1, 0, 1.0)]).is_err());
        assert!(ChainSpec::from_rates(None, 2, &[(0, 1, 1.0), (1, 0, 1.0), (0, 1, 2.0)]).is_err());
        assert!(ChainSpec::from_rates(None, 2, &[(0, 0, 1.0)]).is_err());
        assert!(ChainSpec::from_rates(None, 2, &[(0, 5, 1.0)]).is_err());
    }
}
