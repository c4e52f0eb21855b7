use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{ChainSpec, ProbDist};
use crate::error::{Error, Result};

/// Largest tolerated relative deviation of a detailed-balance cycle product from 1.
pub const CYCLE_TOL: f64 = 1e-8;

/// Natural log of the smallest positive subnormal `f64`. A one-way edge is
/// balanced when the reverse rate it implies lies below this.
pub const LN_RATE_FLOOR: f64 = -744.44;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationaryMode {
    Linear,
    Log,
}

/// Stationary distribution of an irreducible chain.
///
/// Log mode multiplies detailed-balance ratios along a BFS spanning tree of
/// two-way edges and refuses chains whose cycle products deviate from 1 by
/// more than [`CYCLE_TOL`]. A one-way edge is accepted when the reverse rate
/// implied by the tree underflows (see [`LN_RATE_FLOOR`]). Linear mode uses the same tree when it is consistent and
/// falls back to GTH state reduction otherwise.
pub fn stationary_distribution(chain: &ChainSpec, mode: StationaryMode) -> Result<ProbDist> {
    match (tree_log_weights(chain), mode) {
        (Ok(w), StationaryMode::Log) => ProbDist::from_log_weights(w),
        (Ok(w), StationaryMode::Linear) => {
            let d = ProbDist::from_log_weights(w)?;
            ProbDist::normalized(d.to_linear())
        }
        (Err(e), StationaryMode::Log) => Err(e),
        (Err(_), StationaryMode::Linear) => ProbDist::normalized(gth(chain)),
    }
}

/// Log-weights from detailed-balance ratios along a spanning tree, after
/// verifying every non-tree edge.
fn tree_log_weights(chain: &ChainSpec) -> Result<Vec<f64>> {
    let m = chain.state_count();
    let mut lw = vec![f64::NAN; m];
    lw[0] = 0.0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &(y, r) in chain.out_edges(x) {
            let back = chain.rate(y, x);
            if lw[y].is_nan() && back > 0.0 {
                lw[y] = lw[x] + r.ln() - back.ln();
                queue.push_back(y);
            }
        }
    }
    if lw.iter().any(|w| w.is_nan()) {
        return Err(Error::InconsistentRatios {
            deviation: f64::INFINITY,
        });
    }
    let mut worst = 0.0f64;
    for (x, y, r) in chain.edges() {
        let back = chain.rate(y, x);
        if back == 0.0 {
            if lw[x] + r.ln() - lw[y] < LN_RATE_FLOOR {
                continue;
            }
            return Err(Error::InconsistentRatios {
                deviation: f64::INFINITY,
            });
        }
        let dev = (lw[x] + r.ln() - lw[y] - back.ln()).abs();
        worst = worst.max(dev.exp_m1());
    }
    if worst > CYCLE_TOL {
        return Err(Error::InconsistentRatios { deviation: worst });
    }
    Ok(lw)
}

/// Grassmann-Taksar-Heyman elimination; subtraction-free, so every entry
/// keeps high relative accuracy.
fn gth(chain: &ChainSpec) -> Vec<f64> {
    let m = chain.state_count();
    let mut a = vec![vec![0.0; m]; m];
    for (x, y, r) in chain.edges() {
        a[x][y] = r;
    }
    for k in (1..m).rev() {
        let s: f64 = a[k][..k].iter().sum();
        for row in a.iter_mut().take(k) {
            row[k] /= s;
        }
        let (head, tail) = a.split_at_mut(k);
        let pivot = &tail[0];
        for row in head.iter_mut() {
            let f = row[k];
            if f != 0.0 {
                for j in 0..k {
                    row[j] += f * pivot[j];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    x[0] = 1.0;
    for j in 1..m {
        x[j] = (0..j).map(|i| x[i] * a[i][j]).sum();
    }
    x
}

/// Outcome of a detailed-balance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub balanced: bool,
    /// Largest `|f(x,y) - f(y,x)| / (f(x,y) + f(y,x))` over edges.
    pub worst_violation: f64,
    pub worst_edge: Option<(usize, usize)>,
}

/// Checks `|pi(x)Q(x,y) - pi(y)Q(y,x)| <= tol * (pi(x)Q(x,y) + pi(y)Q(y,x))`
/// on every edge. Fluxes are compared through log-probabilities, so
/// log-domain distributions with underflowing masses are handled exactly.
/// A one-way edge passes when its implied reverse rate underflows.
pub fn check_detailed_balance(chain: &ChainSpec, pi: &ProbDist, tol: f64) -> Result<BalanceCheck> {
    if pi.len() != chain.state_count() {
        return Err(Error::DimensionMismatch {
            expected: chain.state_count(),
            got: pi.len(),
        });
    }
    let mut worst = 0.0f64;
    let mut worst_edge = None;
    for (x, y, r) in chain.edges() {
        if y < x && chain.rate(y, x) > 0.0 {
            continue;
        }
        let fx = pi.ln_prob(x) + r.ln();
        let back = chain.rate(y, x);
        let fy = pi.ln_prob(y) + back.ln();
        let v = if back == 0.0 && fx - pi.ln_prob(y) < LN_RATE_FLOOR {
            0.0
        } else if fx == f64::NEG_INFINITY && fy == f64::NEG_INFINITY {
            0.0
        } else if fx == f64::NEG_INFINITY || fy == f64::NEG_INFINITY {
            1.0
        } else {
            // |a - b| / (a + b) = |tanh((ln a - ln b) / 2)|
            ((fx - fy) / 2.0).tanh().abs()
        };
        if v > worst || worst_edge.is_none() {
            worst = worst.max(v);
            worst_edge = Some((x, y));
        }
    }
    Ok(BalanceCheck {
        balanced: worst <= tol,
        worst_violation: worst,
        worst_edge,
    })
}

/// Largest entry of `|pi Q|`, the stationarity residual.
pub fn stationarity_residual(chain: &ChainSpec, pi: &ProbDist) -> f64 {
    let m = chain.state_count();
    let p = pi.to_linear();
    let mut flow: Vec<f64> = (0..m).map(|x| -p[x] * chain.exit_rate(x)).collect();
    for (x, y, r) in chain.edges() {
        flow[y] += p[x] * r;
    }
    flow.iter().fold(0.0, |a, v| a.max(v.abs()))
}
