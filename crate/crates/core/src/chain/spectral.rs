use nalgebra::DMatrix;

use super::{ChainSpec, ProbDist, LN_RATE_FLOOR};
use crate::error::{Error, Result};

/// Symmetrization residual above which a chain is rejected as non-reversible.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Smallest nonzero eigenvalue of `-Q` for a chain reversible with respect to `pi`.
///
/// Works on `S(x,y) = sqrt(pi(x)/pi(y)) Q(x,y)`, which is symmetric under
/// detailed balance; square-root ratios are formed from log-probabilities.
/// One-way edges whose implied reverse rate underflows are accepted.
pub fn spectral_gap(chain: &ChainSpec, pi: &ProbDist) -> Result<f64> {
    let ev = symmetrized_spectrum(chain, pi)?;
    Ok(ev[1])
}

/// Eigenvalues of `-Q` in increasing order.
pub fn symmetrized_spectrum(chain: &ChainSpec, pi: &ProbDist) -> Result<Vec<f64>> {
    let m = chain.state_count();
    if pi.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: pi.len(),
        });
    }
    let lp = pi.ln_values();
    let mut s = DMatrix::<f64>::zeros(m, m);
    for x in 0..m {
        s[(x, x)] = chain.exit_rate(x);
    }
    for (x, y, r) in chain.edges() {
        s[(x, y)] = -(0.5 * (lp[x] - lp[y])).exp() * r;
    }
    let mut worst = 0.0f64;
    for x in 0..m {
        for y in (x + 1)..m {
            let (a, b) = (s[(x, y)], s[(y, x)]);
            let one_way = match (chain.rate(x, y), chain.rate(y, x)) {
                (r, 0.0) if r > 0.0 => lp[x] + r.ln() - lp[y] < LN_RATE_FLOOR,
                (0.0, r) if r > 0.0 => lp[y] + r.ln() - lp[x] < LN_RATE_FLOOR,
                _ => false,
            };
            let scale = a.abs().max(b.abs());
            if scale > 0.0 && !one_way {
                worst = worst.max((a - b).abs() / scale);
            }
            // a one-way edge keeps its entry on both sides
            let avg = if one_way { a + b } else { 0.5 * (a + b) };
            s[(x, y)] = avg;
            s[(y, x)] = avg;
        }
    }
    if worst > SYMMETRY_TOL || worst.is_nan() {
        return Err(Error::NotReversible(worst));
    }
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
