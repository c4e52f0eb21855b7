//! Transient laws by uniformization.
//!
//! With `L = max_x |Q(x,x)|` and `K = I + Q/L`, `exp(tQ) = sum_k Poisson(Lt)(k) K^k`.
//! All terms are nonnegative, so rows stay stochastic and small entries keep
//! their relative accuracy. The Poisson series is kept from `k = 0` (only
//! underflowing weights are dropped) and cut on the right once the remaining
//! tail mass is below 1e-16 relative to the modal weight.

use rayon::prelude::*;

use super::{ChainSpec, ProbDist};
use crate::error::{Error, Result};

/// Default cap on `L * t`.
pub const DEFAULT_LT_CAP: f64 = 1e7;

const TAIL_TOL: f64 = 1e-16;
const UNDERFLOW: f64 = 1e-300;

/// Normalized Poisson(lt) weights for `k = 0..=R`.
pub(crate) fn poisson_weights(lt: f64) -> Vec<f64> {
    if lt <= 0.0 {
        return vec![1.0];
    }
    let mode = lt.floor() as usize;
    let mut right = vec![1.0];
    let mut w = 1.0;
    let mut k = mode;
    loop {
        let r = lt / (k + 1) as f64;
        w *= r;
        k += 1;
        right.push(w);
        let r_next = lt / (k + 1) as f64;
        if r_next < 1.0 && w * r_next / (1.0 - r_next) < TAIL_TOL {
            break;
        }
    }
    let mut weights = vec![0.0; mode];
    let mut w = 1.0;
    for k in (1..=mode).rev() {
        w *= k as f64 / lt;
        if w < UNDERFLOW {
            break;
        }
        weights[k - 1] = w;
    }
    weights.extend(right);
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|v| *v /= s);
    weights
}

/// One step `v -> v K` of the uniformized kernel. States flagged in `killed`
/// are absorbing and their mass is discarded.
struct Kernel<'a> {
    chain: &'a ChainSpec,
    lambda: f64,
    killed: Option<&'a [bool]>,
}

impl<'a> Kernel<'a> {
    fn new(chain: &'a ChainSpec, killed: Option<&'a [bool]>) -> Self {
        let lambda = (0..chain.state_count())
            .filter(|&x| killed.map_or(true, |k| !k[x]))
            .map(|x| chain.exit_rate(x))
            .fold(0.0, f64::max);
        Kernel {
            chain,
            lambda,
            killed,
        }
    }

    fn step(&self, v: &[f64], out: &mut [f64]) {
        let inv = 1.0 / self.lambda;
        for (y, o) in out.iter_mut().enumerate() {
            *o = v[y] * (1.0 - self.chain.exit_rate(y) * inv);
        }
        for (x, &vx) in v.iter().enumerate() {
            if vx == 0.0 {
                continue;
            }
            let s = vx * inv;
            for &(y, r) in self.chain.out_edges(x) {
                out[y] += s * r;
            }
        }
        if let Some(k) = self.killed {
            for (o, &dead) in out.iter_mut().zip(k) {
                if dead {
                    *o = 0.0;
                }
            }
        }
    }

    fn evolve(&self, v: &[f64], t: f64, cap: f64) -> Result<Vec<f64>> {
        check_time(t)?;
        let lt = self.lambda * t;
        if lt > cap {
            return Err(Error::Overflow(lt, cap));
        }
        if lt == 0.0 {
            return Ok(v.to_vec());
        }
        let weights = poisson_weights(lt);
        let mut acc: Vec<f64> = v.iter().map(|x| x * weights[0]).collect();
        let mut cur = v.to_vec();
        let mut next = vec![0.0; v.len()];
        for &w in &weights[1..] {
            self.step(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if w > 0.0 {
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a += w * c;
                }
            }
        }
        Ok(acc)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        Err(Error::NegativeTime(t))
    } else {
        Ok(())
    }
}

/// Propagates a row vector (a distribution) by `exp(tQ)` and renormalizes it
/// to its original mass.
pub fn evolve_distribution(chain: &ChainSpec, v: &[f64], t: f64) -> Result<Vec<f64>> {
    if v.len() != chain.state_count() {
        return Err(Error::DimensionMismatch {
            expected: chain.state_count(),
            got: v.len(),
        });
    }
    let mass: f64 = v.iter().sum();
    let mut out = Kernel::new(chain, None).evolve(v, t, DEFAULT_LT_CAP)?;
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x *= mass / s);
    }
    Ok(out)
}

/// The row `P_t(start, .)`.
pub fn transient_distribution(chain: &ChainSpec, start: usize, t: f64) -> Result<ProbDist> {
    transient_distribution_capped(chain, start, t, DEFAULT_LT_CAP)
}

pub fn transient_distribution_capped(
    chain: &ChainSpec,
    start: usize,
    t: f64,
    cap: f64,
) -> Result<ProbDist> {
    chain.check_state(start)?;
    let mut v = vec![0.0; chain.state_count()];
    v[start] = 1.0;
    let out = Kernel::new(chain, None).evolve(&v, t, cap)?;
    ProbDist::normalized(out)
}

/// Chains up to this size get `P_t` by squaring a short-time uniformized matrix.
pub const DENSE_LIMIT: usize = 64;
const MAX_SQUARINGS: u32 = 10;

fn identity(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|x| {
            let mut r = vec![0.0; m];
            r[x] = 1.0;
            r
        })
        .collect()
}

/// Full matrix `P_t`, one row per start state.
pub fn transient_matrix(chain: &ChainSpec, t: f64) -> Result<Vec<Vec<f64>>> {
    check_time(t)?;
    if chain.state_count() <= DENSE_LIMIT {
        return dense_transition(chain, t);
    }
    advance_rows(chain, &identity(chain.state_count()), t)
}

/// `P_t = (P_{t/2^k})^{2^k}` with the short-time factor from uniformization.
/// Products of nonnegative matrices keep every entry nonnegative; rows are
/// renormalized after each squaring. At most ten squarings are used, so the
/// truncation error is amplified by at most 1024.
fn dense_transition(chain: &ChainSpec, t: f64) -> Result<Vec<Vec<f64>>> {
    let m = chain.state_count();
    let kernel = Kernel::new(chain, None);
    let lt = kernel.lambda * t;
    if lt > DEFAULT_LT_CAP {
        return Err(Error::Overflow(lt, DEFAULT_LT_CAP));
    }
    let k = if lt > 1.0 {
        (lt.log2().ceil() as u32).min(MAX_SQUARINGS)
    } else {
        0
    };
    let step = t / f64::from(1u32 << k);
    let mut p = identity(m)
        .iter()
        .map(|r| {
            let out = kernel.evolve(r, step, DEFAULT_LT_CAP)?;
            let s: f64 = out.iter().sum();
            Ok(out.into_iter().map(|v| v / s).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    for _ in 0..k {
        p = multiply(&p, &p);
        for row in p.iter_mut() {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    Ok(p)
}

fn multiply(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            let mut out = vec![0.0; m];
            for (k, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    for (o, &bk) in out.iter_mut().zip(&b[k]) {
                        *o += v * bk;
                    }
                }
            }
            out
        })
        .collect()
}

/// Advances every row of a stochastic matrix by `P_dt` (semigroup step).
pub fn advance_rows(chain: &ChainSpec, rows: &[Vec<f64>], dt: f64) -> Result<Vec<Vec<f64>>> {
    check_time(dt)?;
    if chain.state_count() <= DENSE_LIMIT {
        let p = dense_transition(chain, dt)?;
        return Ok(multiply(rows, &p));
    }
    rows.par_iter()
        .map(|r| evolve_distribution(chain, r, dt))
        .collect()
}

fn killed_mask(chain: &ChainSpec, absorbing: &[usize], start: usize) -> Result<Vec<bool>> {
    if absorbing.is_empty() {
        return Err(Error::EmptyAbsorbingSet);
    }
    chain.check_state(start)?;
    let mut killed = vec![false; chain.state_count()];
    for &a in absorbing {
        chain.check_state(a)?;
        killed[a] = true;
    }
    if killed[start] {
        return Err(Error::StartAbsorbed(start));
    }
    Ok(killed)
}

/// `P(tau > t)` for the first hitting time of `absorbing` from `start`.
pub fn survival_probability(chain: &ChainSpec, absorbing: &[usize], start: usize, t: f64) -> Result<f64> {
    let killed = killed_mask(chain, absorbing, start)?;
    let mut v = vec![0.0; chain.state_count()];
    v[start] = 1.0;
    let out = Kernel::new(chain, Some(&killed)).evolve(&v, t, DEFAULT_LT_CAP)?;
    Ok(out.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// Survival function evaluated incrementally along increasing times; each
/// query steps the sub-stochastic vector from the nearest earlier time.
#[derive(Debug, Clone)]
pub struct SurvivalCurve {
    chain: ChainSpec,
    killed: Vec<bool>,
    checkpoints: Vec<(f64, Vec<f64>)>,
}

const MAX_CHECKPOINTS: usize = 64;

impl SurvivalCurve {
    pub fn new(chain: &ChainSpec, absorbing: &[usize], start: usize) -> Result<Self> {
        let killed = killed_mask(chain, absorbing, start)?;
        let mut v = vec![0.0; chain.state_count()];
        v[start] = 1.0;
        Ok(SurvivalCurve {
            chain: chain.clone(),
            killed,
            checkpoints: vec![(0.0, v)],
        })
    }

    pub fn survival(&mut self, t: f64) -> Result<f64> {
        check_time(t)?;
        let (t0, base) = self
            .checkpoints
            .iter()
            .filter(|(s, _)| *s <= t)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("checkpoint at t = 0");
        let kernel = Kernel::new(&self.chain, Some(&self.killed));
        let v = kernel.evolve(base, t - t0, DEFAULT_LT_CAP)?;
        let s = v.iter().sum::<f64>().clamp(0.0, 1.0);
        if t > *t0 {
            if self.checkpoints.len() >= MAX_CHECKPOINTS {
                self.checkpoints.remove(1);
            }
            self.checkpoints.push((t, v));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> ChainSpec {
        ChainSpec::from_rates(None, 2, &[(0, 1, a), (1, 0, b)]).unwrap()
    }

    #[test]
    fn poisson_weights_sum_and_mean() {
        for lt in [0.3, 1.0, 7.5, 120.0, 900.0] {
            let w = poisson_weights(lt);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            let mean: f64 = w.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            assert!((mean - lt).abs() < 1e-9 * lt.max(1.0), "lt {lt} mean {mean}");
        }
        let w = poisson_weights(3.0);
        let exact = (-3.0f64).exp() * 27.0 / 6.0;
        assert!((w[3] - exact).abs() < 1e-15);
    }

    #[test]
    fn zero_time_is_identity() {
        let c = two_state(1.0, 2.0);
        let p = transient_distribution(&c, 1, 0.0).unwrap();
        assert_eq!(p.to_linear(), vec![0.0, 1.0]);
        assert_eq!(survival_probability(&c, &[0], 1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn two_state_closed_form() {
        let (a, b) = (0.7, 2.1);
        let c = two_state(a, b);
        let (p0, p1) = (b / (a + b), a / (a + b));
        for t in [0.01, 0.3, 1.0, 4.0] {
            let e = (-(a + b) * t).exp();
            let p = transient_distribution(&c, 0, t).unwrap();
            assert!((p.prob(0) - (p0 + p1 * e)).abs() < 1e-12);
            assert!((p.prob(1) - (p1 - p1 * e)).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let c = two_state(1.0, 1.0);
        assert!(matches!(transient_distribution(&c, 0, -1.0), Err(Error::NegativeTime(_))));
        assert!(matches!(
            transient_distribution_capped(&c, 0, 100.0, 10.0),
            Err(Error::Overflow(..))
        ));
        assert_eq!(survival_probability(&c, &[], 0, 1.0), Err(Error::EmptyAbsorbingSet));
        assert_eq!(survival_probability(&c, &[0], 0, 1.0), Err(Error::StartAbsorbed(0)));
    }

    #[test]
    fn single_exit_clock() {
        let c = two_state(1.0, 5.0);
        for t in [0.5, 2.0, 10.0] {
            let s = survival_probability(&c, &[1], 0, t).unwrap();
            assert!((s - (-t as f64).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn survival_curve_matches_direct() {
        let c = ChainSpec::from_rates(None, 3, &[(0, 1, 1.0), (1, 0, 0.5), (1, 2, 1.0), (2, 1, 0.2)])
            .unwrap();
        let mut curve = SurvivalCurve::new(&c, &[2], 0).unwrap();
        for t in [3.0, 1.0, 2.5, 7.0, 0.2] {
            let d = survival_probability(&c, &[2], 0, t).unwrap();
            assert!((curve.survival(t).unwrap() - d).abs() < 1e-12);
        }
    }
}
