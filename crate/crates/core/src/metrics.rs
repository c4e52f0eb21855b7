//! Probability distances and worst-case distance-to-equilibrium profiles.
//!
//! | kind | pointwise form | profile |
//! |------|----------------|---------|
//! | total variation | `½ Σ |μ - ν|` | `max_x ‖P_t(x,·) - π‖` |
//! | separation | `1 - min_y μ(y)/ν(y)` | `1 - min_{x,y} P_t(x,y)/π(y)` |
//! | hellinger | `sqrt(Σ (√μ - √ν)²)` | `max_x d_H(P_t(x,·), π)` |
//! | pairwise tv | `½ Σ |μ - ν|` | `max_{x,y} ‖P_t(x,·) - P_t(y,·)‖` |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{
    advance_rows, stationary_distribution, transient_matrix, ChainSpec, ProbDist, StationaryMode,
};
use crate::error::{Error, Result};

/// Slack allowed when checking that a profile is nonincreasing.
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    TotalVariation,
    Separation,
    Hellinger,
    PairwiseTv,
}

impl DistanceKind {
    pub fn max_value(self) -> f64 {
        match self {
            DistanceKind::Hellinger => std::f64::consts::SQRT_2,
            _ => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::TotalVariation => "total_variation",
            DistanceKind::Separation => "separation",
            DistanceKind::Hellinger => "hellinger",
            DistanceKind::PairwiseTv => "pairwise_tv",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv" | "total_variation" => Ok(DistanceKind::TotalVariation),
            "sep" | "separation" => Ok(DistanceKind::Separation),
            "hellinger" => Ok(DistanceKind::Hellinger),
            "pairwise" | "pairwise_tv" => Ok(DistanceKind::PairwiseTv),
            other => Err(Error::Parse(format!("unknown distance kind `{other}`"))),
        }
    }
}

/// Distance between two distributions on the same state space. `nu` plays
/// the role of the reference measure for separation.
pub fn distance(mu: &ProbDist, nu: &ProbDist, kind: DistanceKind) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: nu.len(),
            got: mu.len(),
        });
    }
    let m = mu.len();
    Ok(match kind {
        DistanceKind::TotalVariation | DistanceKind::PairwiseTv => {
            let s: f64 = (0..m).map(|y| (mu.prob(y) - nu.prob(y)).abs()).sum();
            (0.5 * s).min(1.0)
        }
        DistanceKind::Hellinger => {
            let s: f64 = (0..m)
                .map(|y| {
                    let d = (0.5 * mu.ln_prob(y)).exp() - (0.5 * nu.ln_prob(y)).exp();
                    d * d
                })
                .sum();
            s.sqrt().min(std::f64::consts::SQRT_2)
        }
        DistanceKind::Separation => {
            let mut min_ratio = f64::INFINITY;
            for y in 0..m {
                let ln_nu = nu.ln_prob(y);
                if ln_nu == f64::NEG_INFINITY {
                    return Err(Error::ZeroReferenceMass(y));
                }
                min_ratio = min_ratio.min((mu.ln_prob(y) - ln_nu).exp());
            }
            (1.0 - min_ratio).clamp(0.0, 1.0)
        }
    })
}

fn tv_rows(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Worst case over initial states of a distance, given the full matrix `P_t`.
///
/// For reversible chains the separation ratio of each pair is taken in the
/// orientation with the larger transition probability, using
/// `P_t(x,y)/π(y) = P_t(y,x)/π(x)`; this keeps ratios exact when one
/// direction underflows.
pub(crate) fn worst_case_from_rows(
    kind: DistanceKind,
    rows: &[Vec<f64>],
    pi: &ProbDist,
    reversible: bool,
) -> f64 {
    let m = rows.len();
    let v = match kind {
        DistanceKind::TotalVariation => {
            let p = pi.to_linear();
            rows.iter().map(|r| tv_rows(r, &p)).fold(0.0, f64::max)
        }
        DistanceKind::Hellinger => {
            let sp: Vec<f64> = (0..m).map(|y| (0.5 * pi.ln_prob(y)).exp()).collect();
            rows.iter()
                .map(|r| {
                    r.iter()
                        .zip(&sp)
                        .map(|(p, s)| (p.sqrt() - s).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max)
        }
        DistanceKind::PairwiseTv => {
            let mut worst = 0.0f64;
            for x in 0..m {
                for y in (x + 1)..m {
                    worst = worst.max(tv_rows(&rows[x], &rows[y]));
                }
            }
            worst
        }
        DistanceKind::Separation => 1.0 - min_ratio(rows, pi, reversible),
    };
    v.clamp(0.0, kind.max_value())
}

/// `min_{x,y} P_t(x,y)/π(y)`.
pub(crate) fn min_ratio(rows: &[Vec<f64>], pi: &ProbDist, reversible: bool) -> f64 {
    let m = rows.len();
    let lp = pi.ln_values();
    let mut min = f64::INFINITY;
    for x in 0..m {
        let lo = if reversible { x } else { 0 };
        for y in lo..m {
            let r = if reversible && rows[y][x] > rows[x][y] {
                (rows[y][x].ln() - lp[x]).exp()
            } else {
                (rows[x][y].ln() - lp[y]).exp()
            };
            min = min.min(r);
        }
    }
    min
}

/// Stationary law of a chain together with whether detailed balance holds.
pub(crate) fn equilibrium(chain: &ChainSpec) -> Result<(ProbDist, bool)> {
    match stationary_distribution(chain, StationaryMode::Log) {
        Ok(pi) => Ok((pi, true)),
        Err(Error::InconsistentRatios { .. }) => {
            Ok((stationary_distribution(chain, StationaryMode::Linear)?, false))
        }
        Err(e) => Err(e),
    }
}

/// Worst-case distance at a single time, computed from scratch.
pub fn worst_case_value(chain: &ChainSpec, kind: DistanceKind, t: f64) -> Result<f64> {
    let (pi, reversible) = equilibrium(chain)?;
    let rows = transient_matrix(chain, t)?;
    Ok(worst_case_from_rows(kind, &rows, &pi, reversible))
}

/// Lazily evaluated worst-case distance `t -> d(t)` of a chain.
///
/// Keeps checkpoints of `P_t` and steps forward from the nearest earlier one,
/// so a bisection or an increasing grid costs about one pass over the horizon.
#[derive(Debug, Clone)]
pub struct ChainCurve {
    chain: ChainSpec,
    pi: ProbDist,
    reversible: bool,
    kind: DistanceKind,
    checkpoints: Vec<(f64, Vec<Vec<f64>>)>,
    max_checkpoints: usize,
}

impl ChainCurve {
    pub fn new(chain: &ChainSpec, kind: DistanceKind) -> Result<Self> {
        let (pi, reversible) = equilibrium(chain)?;
        let m = chain.state_count();
        let identity = transient_matrix(chain, 0.0)?;
        let max_checkpoints = (20_000_000 / (m * m)).clamp(2, 64);
        Ok(ChainCurve {
            chain: chain.clone(),
            pi,
            reversible,
            kind,
            checkpoints: vec![(0.0, identity)],
            max_checkpoints,
        })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn stationary(&self) -> &ProbDist {
        &self.pi
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// The transition matrix `P_t`.
    pub fn matrix_at(&mut self, t: f64) -> Result<Vec<Vec<f64>>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        let (t0, base) = self
            .checkpoints
            .iter()
            .filter(|(s, _)| *s <= t)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("checkpoint at t = 0");
        if *t0 == t {
            return Ok(base.clone());
        }
        let rows = advance_rows(&self.chain, base, t - t0)?;
        if self.checkpoints.len() >= self.max_checkpoints {
            self.checkpoints.remove(1);
        }
        self.checkpoints.push((t, rows.clone()));
        Ok(rows)
    }

    pub fn value_at(&mut self, t: f64) -> Result<f64> {
        self.value_of_kind(self.kind, t)
    }

    /// Distance of another kind at `t`, sharing this curve's checkpoints.
    pub fn value_of_kind(&mut self, kind: DistanceKind, t: f64) -> Result<f64> {
        let rows = self.matrix_at(t)?;
        Ok(worst_case_from_rows(kind, &rows, &self.pi, self.reversible))
    }
}

/// A distance-to-equilibrium profile on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub kind: DistanceKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DistanceProfile {
    pub fn new(kind: DistanceKind, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        check_grid(&times)?;
        let hi = kind.max_value() + 1e-12;
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && **v <= hi)) {
            return Err(Error::OutOfRange(format!("{kind} value {v}")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] > w[0] + MONOTONE_SLACK) {
            return Err(Error::OutOfRange(format!(
                "{kind} profile increases from {} to {}",
                w[0], w[1]
            )));
        }
        Ok(DistanceProfile {
            kind,
            times,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with a `# kind=` line, a `time,value` header and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# kind={}\ntime,value\n", self.kind);
        for (t, v) in self.times.iter().zip(&self.values) {
            s.push_str(&format!("{},{}\n", fmt_sci(*t), fmt_sci(*v)));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let kind = lines
            .next()
            .and_then(|l| l.strip_prefix("# kind="))
            .ok_or_else(|| Error::Parse("line 1: expected `# kind=<kind>`".into()))?
            .trim()
            .parse()?;
        if lines.next().map(str::trim) != Some("time,value") {
            return Err(Error::Parse("line 2: expected header `time,value`".into()));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = i + 3;
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {lineno}: expected `time,value`")))?;
            let parse = |s: &str, field: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {lineno}, field {field}: {e}")))
            };
            times.push(parse(t, "time")?);
            values.push(parse(v, "value")?);
        }
        Self::new(kind, times, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: DistanceProfile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
        Self::new(p.kind, p.times, p.values)
    }
}

/// 17 significant digits in scientific notation; parses back bit-exactly.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidGrid(format!("time {t} is not finite and nonnegative")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Worst-case profile over a strictly increasing time grid. Maximization is
/// by exhaustive enumeration of initial states (pairs for `PairwiseTv`).
pub fn worst_case_profile(
    chain: &ChainSpec,
    kind: DistanceKind,
    times: &[f64],
) -> Result<DistanceProfile> {
    check_grid(times)?;
    let mut curve = ChainCurve::new(chain, kind)?;
    let values = times
        .iter()
        .map(|&t| curve.value_at(t))
        .collect::<Result<Vec<_>>>()?;
    DistanceProfile::new(kind, times.to_vec(), values)
}

/// Result of comparing `‖P_t f‖_{l1(π)}` with `d̄(t)·‖f‖_{l1(π)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub holds: bool,
    /// `‖P_t f‖ / ‖f‖` in `l1(π)`.
    pub ratio: f64,
}

/// Checks `‖P_t f‖_{l1(π)} <= dbar_t ‖f‖_{l1(π)} + 1e-9` for a π-mean-zero `f`.
pub fn l1_contraction_check(
    chain: &ChainSpec,
    t: f64,
    f: &[f64],
    dbar_t: f64,
) -> Result<ContractionCheck> {
    let (pi, _) = equilibrium(chain)?;
    let rows = transient_matrix(chain, t)?;
    contraction_from_rows(&rows, &pi, f, dbar_t)
}

pub(crate) fn contraction_from_rows(
    rows: &[Vec<f64>],
    pi: &ProbDist,
    f: &[f64],
    dbar_t: f64,
) -> Result<ContractionCheck> {
    let m = rows.len();
    if f.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: f.len(),
        });
    }
    let p = pi.to_linear();
    let norm_f: f64 = p.iter().zip(f).map(|(a, b)| a * b.abs()).sum();
    if !(norm_f > 0.0) {
        return Err(Error::OutOfRange("test function is identically zero".into()));
    }
    let mean: f64 = p.iter().zip(f).map(|(a, b)| a * b).sum();
    if mean.abs() > 1e-10 * norm_f.max(1.0) {
        return Err(Error::NotMeanZero(mean));
    }
    let norm_pf: f64 = rows
        .iter()
        .zip(&p)
        .map(|(r, px)| px * r.iter().zip(f).map(|(a, b)| a * b).sum::<f64>().abs())
        .sum();
    Ok(ContractionCheck {
        holds: norm_pf <= dbar_t * norm_f + 1e-9,
        ratio: norm_pf / norm_f,
    })
}

/// `1_x/π(x) - 1_y/π(y)`: a recentred pair of coordinate indicators.
pub fn pair_test_function(pi: &ProbDist, x: usize, y: usize) -> Result<Vec<f64>> {
    if x >= pi.len() || y >= pi.len() {
        return Err(Error::StateOutOfRange(x.max(y)));
    }
    let mut f = vec![0.0; pi.len()];
    f[x] += 1.0 / pi.prob(x);
    f[y] -= 1.0 / pi.prob(y);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(v: &[f64]) -> ProbDist {
        ProbDist::from_linear(v.to_vec()).unwrap()
    }

    #[test]
    fn identical_measures_are_at_distance_zero() {
        let p = lin(&[0.2, 0.3, 0.5]);
        for k in [
            DistanceKind::TotalVariation,
            DistanceKind::Separation,
            DistanceKind::Hellinger,
        ] {
            assert_eq!(distance(&p, &p, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn disjoint_supports_are_extremal() {
        let a = lin(&[0.5, 0.5, 0.0, 0.0]);
        let b = lin(&[0.0, 0.0, 0.25, 0.75]);
        assert_eq!(distance(&a, &b, DistanceKind::TotalVariation).unwrap(), 1.0);
        assert_eq!(
            distance(&a, &b, DistanceKind::Separation).unwrap_err(),
            Error::ZeroReferenceMass(0)
        );
        assert_eq!(distance(&b, &lin(&[0.25; 4]), DistanceKind::Separation).unwrap(), 1.0);
        let h = distance(&a, &b, DistanceKind::Hellinger).unwrap();
        assert!((h - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_mass_against_uniform_pair() {
        let mu = lin(&[1.0, 0.0]);
        let nu = lin(&[0.5, 0.5]);
        assert!((distance(&mu, &nu, DistanceKind::TotalVariation).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(distance(&mu, &nu, DistanceKind::Separation).unwrap(), 1.0);
        let expected = ((1.0 - 0.5f64.sqrt()).powi(2) + 0.5).sqrt();
        assert!((distance(&mu, &nu, DistanceKind::Hellinger).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn separation_needs_positive_reference() {
        let mu = lin(&[0.5, 0.5]);
        let nu = lin(&[1.0, 0.0]);
        assert_eq!(
            distance(&mu, &nu, DistanceKind::Separation),
            Err(Error::ZeroReferenceMass(1))
        );
        let short = lin(&[1.0]);
        assert!(matches!(
            distance(&mu, &short, DistanceKind::TotalVariation),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn log_domain_separation() {
        let nu = ProbDist::from_log_weights(vec![0.0, -800.0]).unwrap();
        let mu = ProbDist::from_log_weights(vec![0.0, -801.0]).unwrap();
        let s = distance(&mu, &nu, DistanceKind::Separation).unwrap();
        assert!((s - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn profile_rejects_increase_and_bad_grid() {
        assert!(DistanceProfile::new(DistanceKind::TotalVariation, vec![0.0, 1.0], vec![0.2, 0.3]).is_err());
        assert!(DistanceProfile::new(DistanceKind::TotalVariation, vec![1.0, 1.0], vec![0.2, 0.1]).is_err());
        assert!(DistanceProfile::new(DistanceKind::TotalVariation, vec![0.0], vec![1.2]).is_err());
        assert!(DistanceProfile::new(DistanceKind::Hellinger, vec![0.0], vec![1.3]).is_ok());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let p = DistanceProfile::new(
            DistanceKind::Hellinger,
            vec![0.0, 0.1, 1.0 / 3.0],
            vec![1.4142135623730951, 0.7000000000000001, 1e-300],
        )
        .unwrap();
        assert_eq!(DistanceProfile::from_csv(&p.to_csv()).unwrap(), p);
        assert_eq!(DistanceProfile::from_json(&p.to_json()).unwrap(), p);
        assert!(p.to_csv().starts_with("# kind=hellinger\ntime,value\n"));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("tv".parse::<DistanceKind>().unwrap(), DistanceKind::TotalVariation);
        assert_eq!("pairwise".parse::<DistanceKind>().unwrap(), DistanceKind::PairwiseTv);
        assert!("l2".parse::<DistanceKind>().is_err());
    }
}
