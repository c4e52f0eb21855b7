//! The graph chain `G_n` whose n-fold power has no cutoff.
//!
//! Vertices `v_0 = A, ..., v_n = B, ..., v_{2n} = C` form a path of `2n` red
//! edges; an extra green edge joins `B` and `C`. Moving toward `C` happens at
//! rate 1 on red edges, except at `B`, which leaves along the red path at
//! rate `1/n` and along the green edge at rate `1 - 1/n`. Red edges are
//! traversed back toward `A` at rate `eps`. The green back-rate `C -> B` is
//! forced by detailed balance: equating `pi(C)/pi(B)` along both routes gives
//! `(n - 1) * eps^n`.
//!
//! From `A`, the hitting time of `C` is (up to backtracks of order `n * eps`)
//! an Erlang(n+1, 1) variable with probability `1 - 1/n` and Erlang(2n, 1)
//! with probability `1/n`. The marginal chain therefore mixes abruptly near
//! `t = n`, while the n-fold power keeps total variation near `1 - 1/e` on
//! `(n, 2n)`.

use serde::{Deserialize, Serialize};

use crate::chain::{
    spectral_gap, stationary_distribution, survival_probability, ChainSpec, ProbDist,
    StationaryMode, SurvivalCurve,
};
use crate::error::{Error, Result};
use crate::metrics::{check_grid, fmt_sci, ChainCurve, DistanceKind, DistanceProfile};
use crate::mixing::{mixing_time_auto, DistanceCurve};
use crate::product::one_minus_power;

/// Backtrack rate used when `2^{-n^2}` is not usable (`n > 10`).
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Largest `n` for which `2^{-n^2}` is the default backtrack rate.
pub const PAPER_EPSILON_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub n: usize,
    pub epsilon: f64,
}

impl FamilyParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::FamilySizeTooSmall(n));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        Ok(FamilyParams { n, epsilon })
    }

    /// `eps = 2^{-n^2}` for `n <= 10`, [`DEFAULT_EPSILON`] beyond.
    pub fn with_default_epsilon(n: usize) -> Result<Self> {
        if n <= PAPER_EPSILON_MAX_N {
            Self::new(n, (-((n * n) as f64)).exp2())
        } else {
            Self::new(n, DEFAULT_EPSILON)
        }
    }

    pub fn state_count(&self) -> usize {
        2 * self.n + 1
    }

    pub fn a(&self) -> usize {
        0
    }

    pub fn b(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        2 * self.n
    }

    /// `ln((n - 1) * eps^n)`.
    pub fn ln_back_rate(&self) -> f64 {
        ((self.n - 1) as f64).ln() + self.n as f64 * self.epsilon.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyChain {
    pub params: FamilyParams,
    pub chain: ChainSpec,
    /// Green-edge rate `C -> B`; zero, and the edge omitted, when it underflows.
    pub back_rate: f64,
    /// Set when `eps^{2n} < 1e-300`: stationary masses underflow in linear mode.
    pub underflow_risk: bool,
}

impl FamilyChain {
    /// Stationary law in the log domain.
    pub fn stationary(&self) -> Result<ProbDist> {
        stationary_distribution(&self.chain, StationaryMode::Log)
    }

    /// Relative deviation from 1 of the detailed-balance product around the
    /// cycle `B -> v_{n+1} -> ... -> C -> B`, evaluated in logs.
    pub fn cycle_log_deviation(&self) -> f64 {
        let p = &self.params;
        let (b, c) = (p.b(), p.c());
        let mut ln_fwd = 0.0;
        let mut ln_bwd = 0.0;
        for i in b..c {
            ln_fwd += self.chain.rate(i, i + 1).ln();
            ln_bwd += self.chain.rate(i + 1, i).ln();
        }
        ln_fwd += p.ln_back_rate();
        ln_bwd += self.chain.rate(b, c).ln();
        (ln_fwd - ln_bwd).abs()
    }
}

pub fn build_family_chain(params: FamilyParams) -> Result<FamilyChain> {
    let params = FamilyParams::new(params.n, params.epsilon)?;
    let n = params.n;
    let eps = params.epsilon;
    let (b, c) = (params.b(), params.c());
    let back_rate = params.ln_back_rate().exp();
    let nf = n as f64;
    let mut rates = Vec::with_capacity(2 * (2 * n + 1));
    for i in 0..c {
        let forward = if i == b { 1.0 / nf } else { 1.0 };
        rates.push((i, i + 1, forward));
        rates.push((i + 1, i, eps));
    }
    rates.push((b, c, 1.0 - 1.0 / nf));
    if back_rate > 0.0 {
        rates.push((c, b, back_rate));
    }
    let labels = (0..=c)
        .map(|i| match i {
            0 => "A".to_string(),
            i if i == b => "B".to_string(),
            i if i == c => "C".to_string(),
            i => format!("v{i}"),
        })
        .collect();
    let chain = ChainSpec::from_rates(Some(labels), params.state_count(), &rates)?;
    let underflow_risk = 2.0 * nf * eps.ln() < (1e-300f64).ln();
    Ok(FamilyChain {
        params,
        chain,
        back_rate,
        underflow_risk,
    })
}

/// Survival of the hitting time of `C` from `A`, alongside the worst-case
/// total-variation profile on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    pub n: usize,
    pub times: Vec<f64>,
    /// `P_A(tau_C > t)`.
    pub survival: Vec<f64>,
    pub worst_tv: DistanceProfile,
}

impl HittingProfile {
    /// `(t / n, n * P(tau > t))` pairs.
    pub fn scaled(&self) -> Vec<(f64, f64)> {
        let nf = self.n as f64;
        self.times
            .iter()
            .zip(&self.survival)
            .map(|(t, s)| (t / nf, nf * s))
            .collect()
    }

    /// `max_t |d(t) - P_A(tau > t)|` over the grid.
    pub fn max_tv_gap(&self) -> f64 {
        self.worst_tv
            .values
            .iter()
            .zip(&self.survival)
            .map(|(d, s)| (d - s).abs())
            .fold(0.0, f64::max)
    }
}

pub fn hitting_profile(params: FamilyParams, times: &[f64]) -> Result<HittingProfile> {
    check_grid(times)?;
    let fam = build_family_chain(params)?;
    let mut surv = SurvivalCurve::new(&fam.chain, &[params.c()], params.a())?;
    let survival = times
        .iter()
        .map(|&t| surv.survival(t))
        .collect::<Result<Vec<_>>>()?;
    let mut tv = ChainCurve::new(&fam.chain, DistanceKind::TotalVariation)?;
    let values = times
        .iter()
        .map(|&t| tv.value_at(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(HittingProfile {
        n: params.n,
        times: times.to_vec(),
        survival,
        worst_tv: DistanceProfile::new(DistanceKind::TotalVariation, times.to_vec(), values)?,
    })
}

/// `1 - P_A(tau <= t)^n`: the hitting-time approximation of the n-fold
/// product's total variation. Its error vanishes as `n` grows but is only
/// quantified empirically.
pub fn product_tv_approx(params: FamilyParams, t: f64) -> Result<f64> {
    let fam = build_family_chain(params)?;
    let p = survival_probability(&fam.chain, &[params.c()], params.a(), t)?;
    Ok(one_minus_power(p, params.n))
}

/// [`product_tv_approx`] as an incrementally evaluated curve.
pub struct ProductApproxCurve {
    n: usize,
    survival: SurvivalCurve,
}

impl ProductApproxCurve {
    pub fn new(params: FamilyParams) -> Result<Self> {
        let fam = build_family_chain(params)?;
        Ok(ProductApproxCurve {
            n: params.n,
            survival: SurvivalCurve::new(&fam.chain, &[params.c()], params.a())?,
        })
    }

    pub fn survival(&mut self, t: f64) -> Result<f64> {
        self.survival.survival(t)
    }
}

impl DistanceCurve for ProductApproxCurve {
    fn kind(&self) -> DistanceKind {
        DistanceKind::TotalVariation
    }

    fn value_at(&mut self, t: f64) -> Result<f64> {
        Ok(one_minus_power(self.survival.survival(t)?, self.n))
    }

    fn time_scale(&mut self) -> Result<f64> {
        Ok(self.n as f64 / 10.0)
    }
}

/// `T(1/4) * gap` for the n-fold power, with `T` taken from the hitting-time
/// approximation and `gap` the spectral gap of `G_n` (equal to the product's).
pub fn product_condition_h(params: FamilyParams) -> Result<f64> {
    let fam = build_family_chain(params)?;
    let gap = spectral_gap(&fam.chain, &fam.stationary()?)?;
    let mut curve = ProductApproxCurve::new(params)?;
    Ok(mixing_time_auto(&mut curve, 0.25)? * gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledRow {
    pub s: f64,
    pub d_marginal: f64,
    pub n_survival: f64,
    pub product_tv_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledTable {
    pub params: FamilyParams,
    pub rows: Vec<ScaledRow>,
}

impl ScaledTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# n={} epsilon={}\ns,d_marginal,n_survival,product_tv_approx\n",
            self.params.n,
            fmt_sci(self.params.epsilon)
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sci(r.s),
                fmt_sci(r.d_marginal),
                fmt_sci(r.n_survival),
                fmt_sci(r.product_tv_approx)
            ));
        }
        s
    }

    pub fn row_near(&self, s: f64) -> Option<&ScaledRow> {
        self.rows
            .iter()
            .min_by(|a, b| (a.s - s).abs().total_cmp(&(b.s - s).abs()))
    }
}

/// Marginal total variation, scaled survival and approximate product total
/// variation at times `s * n`.
pub fn asymptotic_profile_check(params: FamilyParams, s_grid: &[f64]) -> Result<ScaledTable> {
    if let Some(s) = s_grid.iter().find(|s| !(**s > 0.0 && **s <= 3.0)) {
        return Err(Error::InvalidGrid(format!("scale {s} outside (0, 3]")));
    }
    let nf = params.n as f64;
    let times: Vec<f64> = s_grid.iter().map(|s| s * nf).collect();
    let prof = hitting_profile(params, &times)?;
    let rows = s_grid
        .iter()
        .enumerate()
        .map(|(i, &s)| ScaledRow {
            s,
            d_marginal: prof.worst_tv.values[i],
            n_survival: nf * prof.survival[i],
            product_tv_approx: one_minus_power(prof.survival[i], params.n),
        })
        .collect();
    Ok(ScaledTable { params, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorizationRow {
    pub t: f64,
    /// `min_{x,y != C} ln(P_t(x,y) / pi(y))`.
    pub log_margin: f64,
    pub witness: (usize, usize),
    /// `1 - min_x P_t(x,C) / pi(C)`.
    pub reduced_separation: f64,
    pub total_variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorizationReport {
    pub params: FamilyParams,
    pub rows: Vec<MinorizationRow>,
    pub worst_log_margin: f64,
    /// `P_t(x,y) >= pi(y)` for all `x, y != C` and all requested times.
    pub minorization_holds: bool,
    /// `max_t |d_s(t) - d(t)|`.
    pub max_sep_tv_gap: f64,
    pub separation_matches_tv: bool,
    pub holds: bool,
}

/// Tolerance on `|d_s(t) - d(t)|` in the minorization check.
pub const SEP_TV_TOL: f64 = 0.01;

/// Checks `P_t(x,y) >= pi(y)` for all `x, y != C` at each `t in [n/2, 3n]`,
/// comparing in the log domain. Each pair is evaluated in the orientation
/// with the larger transition probability, via
/// `P_t(x,y)/pi(y) = P_t(y,x)/pi(x)`.
pub fn separation_minorization_check(
    params: FamilyParams,
    t_list: &[f64],
) -> Result<MinorizationReport> {
    let nf = params.n as f64;
    let (lo, hi) = (nf / 2.0, 3.0 * nf);
    if let Some(&t) = t_list.iter().find(|t| !(**t >= lo && **t <= hi)) {
        return Err(Error::TimeOutOfWindow { t, lo, hi });
    }
    let fam = build_family_chain(params)?;
    let pi = fam.stationary()?;
    let lp = pi.ln_values();
    let c = params.c();
    let mut sorted = t_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut curve = ChainCurve::new(&fam.chain, DistanceKind::TotalVariation)?;
    let mut rows = Vec::with_capacity(sorted.len());
    for &t in &sorted {
        let p = curve.matrix_at(t)?;
        let mut worst = (f64::INFINITY, (0, 0));
        for x in 0..c {
            for y in x..c {
                let m = if p[y][x] > p[x][y] {
                    p[y][x].ln() - lp[x]
                } else {
                    p[x][y].ln() - lp[y]
                };
                if m < worst.0 {
                    worst = (m, (x, y));
                }
            }
        }
        let min_ratio_c = (0..=c)
            .map(|x| (p[x][c].ln() - lp[c]).exp())
            .fold(f64::INFINITY, f64::min);
        rows.push(MinorizationRow {
            t,
            log_margin: worst.0,
            witness: worst.1,
            reduced_separation: (1.0 - min_ratio_c).clamp(0.0, 1.0),
            total_variation: curve.value_at(t)?,
        });
    }
    let worst_log_margin = rows
        .iter()
        .map(|r| r.log_margin)
        .fold(f64::INFINITY, f64::min);
    let max_sep_tv_gap = rows
        .iter()
        .map(|r| (r.reduced_separation - r.total_variation).abs())
        .fold(0.0, f64::max);
    let minorization_holds = worst_log_margin > 0.0;
    let separation_matches_tv = max_sep_tv_gap <= SEP_TV_TOL;
    Ok(MinorizationReport {
        params,
        rows,
        worst_log_margin,
        minorization_holds,
        max_sep_tv_gap,
        separation_matches_tv,
        holds: minorization_holds && separation_matches_tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::check_detailed_balance;

    #[test]
    fn construction_counts() {
        for n in [2, 3, 7, 20] {
            let f = build_family_chain(FamilyParams::new(n, 0.01).unwrap()).unwrap();
            assert_eq!(f.chain.state_count(), 2 * n + 1);
            assert_eq!(f.chain.edge_count(), 2 * (2 * n + 1));
            assert_eq!(f.chain.labels()[n], "B");
            assert_eq!(f.chain.labels()[2 * n], "C");
        }
    }

    #[test]
    fn derived_back_rate_n3() {
        let eps = (-9.0f64).exp2();
        let f = build_family_chain(FamilyParams::new(3, eps).unwrap()).unwrap();
        let expected = 2.0 * (-27.0f64).exp2();
        assert!(((f.back_rate - expected) / expected).abs() < 1e-14);
        assert!(f.cycle_log_deviation() < 1e-12);
        let pi = f.stationary().unwrap();
        assert!(check_detailed_balance(&f.chain, &pi, 1e-10).unwrap().balanced);
    }

    #[test]
    fn stationary_concentrates_on_c() {
        let eps = (-16.0f64).exp2();
        let f = build_family_chain(FamilyParams::new(4, eps).unwrap()).unwrap();
        let pi = f.stationary().unwrap();
        assert!(pi.mass_excluding(&[8]) <= 10.0 * eps);
        assert!(pi.prob(8) >= 1.0 - 10.0 * eps);
    }

    #[test]
    fn default_epsilon_rule() {
        assert_eq!(FamilyParams::with_default_epsilon(4).unwrap().epsilon, (-16.0f64).exp2());
        assert_eq!(FamilyParams::with_default_epsilon(11).unwrap().epsilon, DEFAULT_EPSILON);
        let f = build_family_chain(FamilyParams::with_default_epsilon(10).unwrap()).unwrap();
        assert!(f.underflow_risk);
        let f = build_family_chain(FamilyParams::new(5, 0.1).unwrap()).unwrap();
        assert!(!f.underflow_risk);
    }

    #[test]
    fn parameter_errors() {
        assert_eq!(FamilyParams::new(1, 0.1), Err(Error::FamilySizeTooSmall(1)));
        assert_eq!(FamilyParams::new(4, 1.0), Err(Error::EpsilonOutOfRange(1.0)));
        assert_eq!(FamilyParams::new(4, 0.0), Err(Error::EpsilonOutOfRange(0.0)));
    }

    #[test]
    fn survival_starts_at_one_and_product_at_one() {
        let p = FamilyParams::new(4, 1e-3).unwrap();
        let h = hitting_profile(p, &[0.0, 1.0, 4.0]).unwrap();
        assert_eq!(h.survival[0], 1.0);
        assert_eq!(product_tv_approx(p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn minorization_window() {
        let p = FamilyParams::new(4, (-16.0f64).exp2()).unwrap();
        assert!(matches!(
            separation_minorization_check(p, &[1.0]),
            Err(Error::TimeOutOfWindow { .. })
        ));
        assert!(matches!(
            separation_minorization_check(p, &[12.5]),
            Err(Error::TimeOutOfWindow { .. })
        ));
    }

    #[test]
    fn scale_grid_validation() {
        let p = FamilyParams::new(4, 1e-3).unwrap();
        assert!(asymptotic_profile_check(p, &[0.0, 1.0]).is_err());
        assert!(asymptotic_profile_check(p, &[1.0, 3.5]).is_err());
    }
}
