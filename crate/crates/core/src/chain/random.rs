use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ChainSpec;
use crate::error::{Error, Result};

/// Random reversible irreducible chain.
///
/// A uniform spanning tree (Prüfer decoding) is topped up with random extra
/// edges until the edge count is `round(m * degree / 2)`. Edges get symmetric
/// weights `w` and states get weights `rho`, both uniform in `rate_range`;
/// `Q(x,y) = w(x,y) / rho(x)`, so the chain is reversible with `pi ∝ rho`.
pub fn random_reversible_chain(
    seed: u64,
    states: usize,
    degree: f64,
    rate_range: (f64, f64),
) -> Result<ChainSpec> {
    let (lo, hi) = rate_range;
    if states < 2 {
        return Err(Error::TrivialChain(states));
    }
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(Error::OutOfRange(format!("rate range ({lo}, {hi})")));
    }
    let max_edges = states * (states - 1) / 2;
    let target = (states as f64 * degree / 2.0).round();
    if !target.is_finite() || target < (states - 1) as f64 || target > max_edges as f64 {
        return Err(Error::DegreeInfeasible { states, degree });
    }
    let target = target as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: BTreeSet<(usize, usize)> = prufer_tree(&mut rng, states)
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    if edges.len() < target {
        let mut spare: Vec<(usize, usize)> = (0..states)
            .flat_map(|a| ((a + 1)..states).map(move |b| (a, b)))
            .filter(|e| !edges.contains(e))
            .collect();
        spare.shuffle(&mut rng);
        let need = target - edges.len();
        edges.extend(spare.into_iter().take(need));
    }
    let rho: Vec<f64> = (0..states).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut triples = Vec::with_capacity(2 * edges.len());
    for &(a, b) in &edges {
        let w = rng.gen_range(lo..=hi);
        triples.push((a, b, w / rho[a]));
        triples.push((b, a, w / rho[b]));
    }
    ChainSpec::from_rates(None, states, &triples)
}

fn prufer_tree(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut tree = Vec::with_capacity(n - 1);
    for &s in &seq {
        let leaf = *leaves.iter().next().expect("a leaf always exists");
        leaves.remove(&leaf);
        tree.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.insert(s);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    tree.push((rest[0], rest[1]));
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_detailed_balance, stationary_distribution, StationaryMode};

    #[test]
    fn deterministic_for_seed() {
        let a = random_reversible_chain(42, 5, 2.5, (0.5, 2.0)).unwrap();
        let b = random_reversible_chain(42, 5, 2.5, (0.5, 2.0)).unwrap();
        assert_eq!(a, b);
        let c = random_reversible_chain(43, 5, 2.5, (0.5, 2.0)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn reversible_and_connected() {
        for seed in 0..50 {
            let m = 3 + (seed as usize % 9);
            let c = random_reversible_chain(seed, m, 2.0, (0.1, 10.0)).unwrap();
            assert_eq!(c.edge_count(), 2 * m);
            let pi = stationary_distribution(&c, StationaryMode::Linear).unwrap();
            assert!(check_detailed_balance(&c, &pi, 1e-9).unwrap().balanced);
        }
    }

    #[test]
    fn infeasible_degree() {
        assert!(matches!(
            random_reversible_chain(1, 4, 10.0, (1.0, 2.0)),
            Err(Error::DegreeInfeasible { .. })
        ));
        assert!(matches!(
            random_reversible_chain(1, 2, 2.0, (1.0, 2.0)),
            Err(Error::DegreeInfeasible { .. })
        ));
        assert!(matches!(
            random_reversible_chain(1, 6, 0.5, (1.0, 2.0)),
            Err(Error::DegreeInfeasible { .. })
        ));
        assert!(random_reversible_chain(1, 4, 2.0, (0.0, 2.0)).is_err());
    }
}
