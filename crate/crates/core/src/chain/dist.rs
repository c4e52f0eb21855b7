use crate::error::{Error, Result};

/// Sum tolerance for linear-mode probability vectors.
pub const SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Linear(Vec<f64>),
    /// Unnormalized log-weights; `ln p(x) = log_weights[x] - log_norm`.
    Log { log_weights: Vec<f64>, log_norm: f64 },
}

/// A probability vector over the states of a chain.
///
/// The log-domain representation keeps masses that underflow `f64`
/// (e.g. `2^-2000`) exactly representable as log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    repr: Repr,
}

impl ProbDist {
    pub fn from_linear(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidDistribution(format!("entry {i} = {v}")));
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
        }
        Ok(ProbDist {
            repr: Repr::Linear(values),
        })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub(crate) fn normalized(mut values: Vec<f64>) -> Result<Self> {
        let s: f64 = values.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidDistribution(format!("total mass {s}")));
        }
        values.iter_mut().for_each(|v| *v /= s);
        Self::from_linear(values)
    }

    /// Builds a log-domain distribution from unnormalized log-weights
    /// (`-inf` entries denote zero mass).
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::InvalidDistribution("NaN or +inf log-weight".into()));
        }
        let log_norm = log_sum_exp(&log_weights);
        if !log_norm.is_finite() {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        Ok(ProbDist {
            repr: Repr::Log {
                log_weights,
                log_norm,
            },
        })
    }

    pub fn point_mass(len: usize, state: usize) -> Result<Self> {
        if state >= len {
            return Err(Error::StateOutOfRange(state));
        }
        let mut v = vec![0.0; len];
        v[state] = 1.0;
        Self::from_linear(v)
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Linear(v) => v.len(),
            Repr::Log { log_weights, .. } => log_weights.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_log(&self) -> bool {
        matches!(self.repr, Repr::Log { .. })
    }

    pub fn prob(&self, state: usize) -> f64 {
        match &self.repr {
            Repr::Linear(v) => v[state],
            Repr::Log {
                log_weights,
                log_norm,
            } => (log_weights[state] - log_norm).exp(),
        }
    }

    pub fn ln_prob(&self, state: usize) -> f64 {
        match &self.repr {
            Repr::Linear(v) => v[state].ln(),
            Repr::Log {
                log_weights,
                log_norm,
            } => log_weights[state] - log_norm,
        }
    }

    /// Linear values; entries below the `f64` underflow floor become 0.
    pub fn to_linear(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.prob(i)).collect()
    }

    pub fn ln_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.ln_prob(i)).collect()
    }

    /// Converts to the linear representation.
    pub fn into_linear(self) -> Result<Self> {
        match self.repr {
            Repr::Linear(_) => Ok(self),
            Repr::Log { .. } => Self::from_linear(self.to_linear()),
        }
    }

    /// Total mass outside `states`, summed directly so that complements of
    /// masses close to 1 keep full relative precision.
    pub fn mass_excluding(&self, states: &[usize]) -> f64 {
        (0..self.len())
            .filter(|i| !states.contains(i))
            .map(|i| self.prob(i))
            .sum()
    }

    /// Smallest entry, as a log-probability.
    pub fn min_ln_prob(&self) -> f64 {
        (0..self.len())
            .map(|i| self.ln_prob(i))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let mx = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + xs.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_round_trips_to_linear() {
        let w = vec![0.0, -1.0, -2.0];
        let d = ProbDist::from_log_weights(w).unwrap();
        let lin = d.clone().into_linear().unwrap();
        for i in 0..3 {
            assert!((d.prob(i) - lin.prob(i)).abs() < 1e-15);
        }
        let z: f64 = 1.0 + (-1.0f64).exp() + (-2.0f64).exp();
        assert!((d.prob(0) - 1.0 / z).abs() < 1e-15);
    }

    #[test]
    fn tiny_masses_survive_in_log_domain() {
        let d = ProbDist::from_log_weights(vec![0.0, -5000.0]).unwrap();
        assert_eq!(d.prob(1), 0.0);
        assert!((d.ln_prob(1) + 5000.0).abs() < 1e-12);
        assert!(d.mass_excluding(&[0]) >= 0.0);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(ProbDist::from_linear(vec![0.5, 0.4]).is_err());
        assert!(ProbDist::from_linear(vec![1.5, -0.5]).is_err());
        assert!(ProbDist::from_log_weights(vec![f64::NEG_INFINITY]).is_err());
    }
}
