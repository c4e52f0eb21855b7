//! Mixing times, cutoff diagnostics and the product condition `t_mix(1/4) * gap`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{spectral_gap, ChainSpec};
use crate::error::{Error, Result};
use crate::metrics::{fmt_sci, ChainCurve, DistanceKind};
use crate::product::{product_hellinger, product_separation, product_tv_bounds};

/// Relative width (w.r.t. the search cap) at which bisection stops.
pub const BISECTION_REL_WIDTH: f64 = 1e-9;
/// Default search cap in units of the curve's time scale (relaxation time).
pub const DEFAULT_CAP_FACTOR: f64 = 50.0;
const MAX_CAP_DOUBLINGS: usize = 60;

/// A nonincreasing distance-to-equilibrium curve evaluated on demand.
pub trait DistanceCurve {
    fn kind(&self) -> DistanceKind;
    fn value_at(&mut self, t: f64) -> Result<f64>;
    /// Natural time scale, used to pick a default search cap.
    fn time_scale(&mut self) -> Result<f64> {
        Ok(1.0)
    }
}

impl DistanceCurve for ChainCurve {
    fn kind(&self) -> DistanceKind {
        ChainCurve::kind(self)
    }

    fn value_at(&mut self, t: f64) -> Result<f64> {
        ChainCurve::value_at(self, t)
    }

    fn time_scale(&mut self) -> Result<f64> {
        Ok(1.0 / spectral_gap(self.chain(), self.stationary())?)
    }
}

/// A curve backed by a closure.
pub struct FnCurve<F> {
    kind: DistanceKind,
    scale: f64,
    f: F,
}

impl<F: FnMut(f64) -> Result<f64>> FnCurve<F> {
    pub fn new(kind: DistanceKind, time_scale: f64, f: F) -> Self {
        FnCurve {
            kind,
            scale: time_scale,
            f,
        }
    }
}

impl<F: FnMut(f64) -> Result<f64>> DistanceCurve for FnCurve<F> {
    fn kind(&self) -> DistanceKind {
        self.kind
    }

    fn value_at(&mut self, t: f64) -> Result<f64> {
        (self.f)(t)
    }

    fn time_scale(&mut self) -> Result<f64> {
        Ok(self.scale)
    }
}

/// Which product-chain quantity a [`ProductCurve`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMeasure {
    /// Exact product separation.
    Separation,
    /// Exact product Hellinger distance.
    Hellinger,
    /// Lower envelope of product total variation.
    TvLower,
    /// Upper envelope of product total variation.
    TvUpper,
}

/// Worst-case distance of the n-fold power of a chain, composed from the
/// marginal worst case.
pub struct ProductCurve {
    marginal: ChainCurve,
    copies: usize,
    measure: ProductMeasure,
}

impl ProductCurve {
    pub fn new(chain: &ChainSpec, copies: usize, measure: ProductMeasure) -> Result<Self> {
        if copies == 0 {
            return Err(Error::CopiesTooSmall { min: 1, got: 0 });
        }
        let kind = match measure {
            ProductMeasure::Separation => DistanceKind::Separation,
            ProductMeasure::Hellinger => DistanceKind::Hellinger,
            _ => DistanceKind::TotalVariation,
        };
        Ok(ProductCurve {
            marginal: ChainCurve::new(chain, kind)?,
            copies,
            measure,
        })
    }
}

impl DistanceCurve for ProductCurve {
    fn kind(&self) -> DistanceKind {
        match self.measure {
            ProductMeasure::Separation => DistanceKind::Separation,
            ProductMeasure::Hellinger => DistanceKind::Hellinger,
            _ => DistanceKind::TotalVariation,
        }
    }

    fn value_at(&mut self, t: f64) -> Result<f64> {
        let n = self.copies;
        match self.measure {
            ProductMeasure::Separation => {
                product_separation(self.marginal.value_of_kind(DistanceKind::Separation, t)?, n)
            }
            ProductMeasure::Hellinger => {
                product_hellinger(self.marginal.value_of_kind(DistanceKind::Hellinger, t)?, n)
            }
            ProductMeasure::TvLower | ProductMeasure::TvUpper => {
                let h = self.marginal.value_of_kind(DistanceKind::Hellinger, t)?;
                let tv = self.marginal.value_of_kind(DistanceKind::TotalVariation, t)?;
                let b = product_tv_bounds(h, tv, n)?;
                Ok(if self.measure == ProductMeasure::TvLower {
                    b.lower
                } else {
                    b.upper
                })
            }
        }
    }

    fn time_scale(&mut self) -> Result<f64> {
        self.marginal.time_scale()
    }
}

fn check_threshold(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(a))
    }
}

/// `inf { t : d(t) < a }` by bisection on `[0, t_hi]`.
///
/// Returns the right edge of the final bracket, whose width is at most
/// `BISECTION_REL_WIDTH * t_hi`.
pub fn mixing_time(curve: &mut dyn DistanceCurve, a: f64, t_hi: f64) -> Result<f64> {
    check_threshold(a)?;
    if !(t_hi > 0.0) || !t_hi.is_finite() {
        return Err(Error::OutOfRange(format!("search cap {t_hi}")));
    }
    if curve.value_at(0.0)? < a {
        return Ok(0.0);
    }
    let d_hi = curve.value_at(t_hi)?;
    if d_hi >= a {
        return Err(Error::CapTooSmall {
            t_hi,
            value: d_hi,
            threshold: a,
        });
    }
    let (mut lo, mut hi) = (0.0, t_hi);
    while hi - lo > BISECTION_REL_WIDTH * t_hi {
        let mid = 0.5 * (lo + hi);
        if curve.value_at(mid)? < a {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// [`mixing_time`] with the default cap `50 * time_scale`, doubled until the
/// curve is below the threshold there.
pub fn mixing_time_auto(curve: &mut dyn DistanceCurve, a: f64) -> Result<f64> {
    check_threshold(a)?;
    let mut cap = DEFAULT_CAP_FACTOR * curve.time_scale()?;
    for _ in 0..MAX_CAP_DOUBLINGS {
        match mixing_time(curve, a, cap) {
            Err(Error::CapTooSmall { .. }) => cap *= 2.0,
            other => return other,
        }
    }
    mixing_time(curve, a, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTime {
    pub threshold: f64,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffRatio {
    pub eps: f64,
    /// `t_mix(eps) / t_mix(1 - eps)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub size: usize,
    pub kind: DistanceKind,
    /// Sorted by increasing threshold; times are then nonincreasing.
    pub mixing_times: Vec<ThresholdTime>,
    pub ratios: Vec<CutoffRatio>,
    pub gap: Option<f64>,
    pub t_mix_quarter: Option<f64>,
    /// `t_mix(1/4) * gap`.
    pub condition_h: Option<f64>,
}

impl MixingReport {
    pub fn time_for(&self, threshold: f64) -> Option<f64> {
        self.mixing_times
            .iter()
            .find(|t| t.threshold == threshold)
            .map(|t| t.time)
    }

    pub fn ratio_for(&self, eps: f64) -> Option<f64> {
        self.ratios.iter().find(|r| r.eps == eps).map(|r| r.ratio)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_eps(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidConfig("empty eps list".into()));
    }
    match eps_list.iter().find(|e| !(**e > 0.0 && **e <= 0.5)) {
        Some(e) => Err(Error::InvalidThreshold(*e)),
        None => Ok(()),
    }
}

/// Mixing times at `eps`, `1 - eps` (for every eps) and `1/4`, plus cutoff
/// ratios and, when a gap is supplied, the product `t_mix(1/4) * gap`.
pub fn mixing_report(
    curve: &mut dyn DistanceCurve,
    size: usize,
    eps_list: &[f64],
    gap: Option<f64>,
) -> Result<MixingReport> {
    check_eps(eps_list)?;
    let mut thresholds: Vec<f64> = eps_list
        .iter()
        .flat_map(|&e| [e, 1.0 - e])
        .chain(std::iter::once(0.25))
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut mixing_times = Vec::with_capacity(thresholds.len());
    for &a in &thresholds {
        mixing_times.push(ThresholdTime {
            threshold: a,
            time: mixing_time_auto(curve, a)?,
        });
    }
    let lookup = |a: f64| {
        mixing_times
            .iter()
            .find(|t| t.threshold == a)
            .map(|t| t.time)
            .expect("threshold computed")
    };
    let ratios = eps_list
        .iter()
        .map(|&e| CutoffRatio {
            eps: e,
            ratio: lookup(e) / lookup(1.0 - e),
        })
        .collect();
    let t_quarter = lookup(0.25);
    Ok(MixingReport {
        size,
        kind: curve.kind(),
        mixing_times,
        ratios,
        gap,
        t_mix_quarter: Some(t_quarter),
        condition_h: gap.map(|g| g * t_quarter),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    CutoffConsistent,
    PrecutoffConsistent,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Cutoff-consistent when every ratio at the largest size is `<= 1 + delta`.
    pub delta: f64,
    /// Pre-cutoff-consistent when every ratio at every size is `<= bound`.
    pub precutoff_bound: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            delta: 0.1,
            precutoff_bound: 4.0,
        }
    }
}

/// One member of a family: its size, curve and (optional) spectral gap.
pub struct FamilyMember {
    pub size: usize,
    pub curve: Box<dyn DistanceCurve + Send>,
    pub gap: Option<f64>,
}

impl FamilyMember {
    pub fn new(size: usize, curve: impl DistanceCurve + Send + 'static, gap: Option<f64>) -> Self {
        FamilyMember {
            size,
            curve: Box::new(curve),
            gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffDiagnostics {
    pub kind: DistanceKind,
    pub config: DiagnosticsConfig,
    pub reports: Vec<MixingReport>,
    pub classification: Classification,
}

impl CutoffDiagnostics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagnostics serialize")
    }

    /// `size,eps,ratio` table.
    pub fn ratio_table_csv(&self) -> String {
        ratio_table_csv(&self.reports)
    }
}

pub fn ratio_table_csv(reports: &[MixingReport]) -> String {
    let mut s = String::from("# cutoff ratios t_mix(eps)/t_mix(1-eps)\nsize,eps,ratio\n");
    for r in reports {
        for c in &r.ratios {
            s.push_str(&format!("{},{},{}\n", r.size, fmt_sci(c.eps), fmt_sci(c.ratio)));
        }
    }
    s
}

/// Finite-size cutoff diagnostics over a family of chains or curves.
/// This reports tendencies; it does not establish a limit.
pub fn cutoff_diagnostics(
    family: Vec<FamilyMember>,
    eps_list: &[f64],
    config: DiagnosticsConfig,
) -> Result<CutoffDiagnostics> {
    if family.len() < 2 {
        return Err(Error::AtLeastTwoSizes);
    }
    check_eps(eps_list)?;
    let kind = family[0].curve.kind();
    let reports = family
        .into_par_iter()
        .map(|mut m| mixing_report(m.curve.as_mut(), m.size, eps_list, m.gap))
        .collect::<Result<Vec<_>>>()?;
    let largest = reports
        .iter()
        .max_by_key(|r| r.size)
        .expect("at least two reports");
    let classification = if largest.ratios.iter().all(|r| r.ratio <= 1.0 + config.delta) {
        Classification::CutoffConsistent
    } else if reports
        .iter()
        .flat_map(|r| &r.ratios)
        .all(|r| r.ratio <= config.precutoff_bound)
    {
        Classification::PrecutoffConsistent
    } else {
        Classification::Neither
    };
    Ok(CutoffDiagnostics {
        kind,
        config,
        reports,
        classification,
    })
}

/// `t_mix(1/4) * gap` for the total-variation profile of a reversible chain.
pub fn condition_h(chain: &ChainSpec) -> Result<f64> {
    let mut curve = ChainCurve::new(chain, DistanceKind::TotalVariation)?;
    if !curve.is_reversible() {
        return Err(Error::NotReversible(f64::INFINITY));
    }
    let gap = spectral_gap(chain, curve.stationary())?;
    Ok(mixing_time_auto(&mut curve, 0.25)? * gap)
}
