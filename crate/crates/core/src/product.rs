//! n-fold product chains: exact composition of separation and Hellinger
//! distances, Hellinger-based bounds on product total variation, and an
//! explicit tensor-product chain for small instances.

use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};

/// Default cap on the number of states of an explicit tensor product.
pub const DEFAULT_TENSOR_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpec {
    pub base: ChainSpec,
    pub copies: usize,
    pub cap: usize,
}

impl ProductSpec {
    pub fn new(base: ChainSpec, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::CopiesTooSmall { min: 1, got: 0 });
        }
        Ok(ProductSpec {
            base,
            copies,
            cap: DEFAULT_TENSOR_CAP,
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn state_count(&self) -> u128 {
        (self.base.state_count() as u128).saturating_pow(self.copies as u32)
    }
}

/// `1 - (1 - x)^n`, accurate for tiny `x` and large `n`.
pub(crate) fn one_minus_power(x: f64, n: usize) -> f64 {
    if x >= 1.0 {
        return 1.0;
    }
    -(n as f64 * (-x).ln_1p()).exp_m1()
}

fn check_copies(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::CopiesTooSmall { min: 1, got: 0 })
    } else {
        Ok(())
    }
}

/// Separation distance of the n-fold product: `1 - (1 - d_s)^n`.
pub fn product_separation(d_s: f64, n: usize) -> Result<f64> {
    check_copies(n)?;
    if !(0.0..=1.0).contains(&d_s) {
        return Err(Error::OutOfRange(format!("separation {d_s} not in [0, 1]")));
    }
    Ok(one_minus_power(d_s, n))
}

/// Hellinger distance of the n-fold product, from
/// `1 - D²/2 = (1 - d²/2)^n`.
pub fn product_hellinger(d_h: f64, n: usize) -> Result<f64> {
    check_copies(n)?;
    let max = std::f64::consts::SQRT_2;
    if !(0.0..=max + 1e-12).contains(&d_h) {
        return Err(Error::OutOfRange(format!("hellinger {d_h} not in [0, sqrt 2]")));
    }
    let half_sq = (0.5 * d_h * d_h).min(1.0);
    Ok((2.0 * one_minus_power(half_sq, n)).sqrt().min(max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on the product total variation from the marginal Hellinger and
/// total-variation distances: `max(d_tv, D_H²/2) <= D_tv <= min(1, D_H)`.
pub fn product_tv_bounds(d_h_marginal: f64, d_tv_marginal: f64, n: usize) -> Result<TvBounds> {
    if !(0.0..=1.0).contains(&d_tv_marginal) {
        return Err(Error::OutOfRange(format!("total variation {d_tv_marginal} not in [0, 1]")));
    }
    let big_h = product_hellinger(d_h_marginal, n)?;
    let upper = big_h.min(1.0);
    let lower = d_tv_marginal.max(0.5 * big_h * big_h).min(upper);
    Ok(TvBounds { lower, upper })
}

/// Explicit generator of the n-fold product. Tuples are indexed
/// lexicographically with the first coordinate most significant.
pub fn tensor_product(spec: &ProductSpec) -> Result<ChainSpec> {
    let states = spec.state_count();
    if states > spec.cap as u128 {
        return Err(Error::SizeCapExceeded {
            states,
            cap: spec.cap,
        });
    }
    let m = spec.base.state_count();
    let n = spec.copies;
    let total = states as usize;
    // stride of coordinate i
    let strides: Vec<usize> = (0..n).map(|i| m.pow((n - 1 - i) as u32)).collect();
    let mut triples = Vec::with_capacity(total * n * 2);
    for u in 0..total {
        for &stride in &strides {
            let ui = (u / stride) % m;
            for &(vi, r) in spec.base.out_edges(ui) {
                let v = u - ui * stride + vi * stride;
                triples.push((u, v, r));
            }
        }
    }
    let labels = (0..total)
        .map(|u| {
            strides
                .iter()
                .map(|&s| spec.base.labels()[(u / s) % m].as_str())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    ChainSpec::from_rates(Some(labels), total, &triples)
}

/// Lexicographic index of a tuple of base states.
pub fn tuple_index(base_states: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * base_states + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_boundaries_and_arithmetic() {
        for n in [1, 2, 17, 1_000_000] {
            assert_eq!(product_separation(0.0, n).unwrap(), 0.0);
            assert_eq!(product_separation(1.0, n).unwrap(), 1.0);
        }
        assert!((product_separation(0.5, 2).unwrap() - 0.75).abs() < 1e-15);
        assert!(product_separation(1.5, 2).is_err());
        assert!(product_separation(0.5, 0).is_err());
    }

    #[test]
    fn tiny_marginal_keeps_precision() {
        let d = 1e-12;
        let n = 1_000_000;
        let exact = 1e-6 - 0.5e-12 * (1.0 - 1e-6);
        let got = product_separation(d, n).unwrap();
        assert!(((got - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn hellinger_boundaries_and_arithmetic() {
        assert_eq!(product_hellinger(0.0, 5).unwrap(), 0.0);
        let s2 = 2f64.sqrt();
        assert!((product_hellinger(s2, 5).unwrap() - s2).abs() < 1e-15);
        assert!((product_hellinger(1.0, 2).unwrap() - 1.5f64.sqrt()).abs() < 1e-15);
        assert!(product_hellinger(1.5, 2).is_err());
    }

    #[test]
    fn bounds_are_ordered() {
        assert_eq!(product_tv_bounds(0.0, 0.0, 3).unwrap(), TvBounds { lower: 0.0, upper: 0.0 });
        for &(h, tv) in &[(0.1, 0.05), (0.5, 0.3), (1.2, 0.9), (0.02, 0.0002)] {
            for n in [1, 4, 100] {
                let b = product_tv_bounds(h, tv, n).unwrap();
                assert!(b.lower <= b.upper);
                assert!(b.lower >= tv.min(b.upper));
            }
        }
    }

    #[test]
    fn tensor_of_one_copy_is_base() {
        let base = ChainSpec::from_rates(None, 3, &[(0, 1, 1.0), (1, 0, 2.0), (1, 2, 0.5), (2, 1, 0.25)])
            .unwrap();
        let t = tensor_product(&ProductSpec::new(base.clone(), 1).unwrap()).unwrap();
        assert_eq!(t, base);
    }

    #[test]
    fn tensor_rates_change_one_coordinate() {
        let base = ChainSpec::from_rates(None, 2, &[(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        let t = tensor_product(&ProductSpec::new(base, 3).unwrap()).unwrap();
        assert_eq!(t.state_count(), 8);
        // (0,1,0) -> (0,1,1) at rate 1, (0,1,0) -> (0,0,0) at rate 3
        assert_eq!(t.rate(tuple_index(2, &[0, 1, 0]), tuple_index(2, &[0, 1, 1])), 1.0);
        assert_eq!(t.rate(tuple_index(2, &[0, 1, 0]), tuple_index(2, &[0, 0, 0])), 3.0);
        assert_eq!(t.rate(tuple_index(2, &[0, 0, 0]), tuple_index(2, &[1, 1, 0])), 0.0);
        assert_eq!(t.labels()[tuple_index(2, &[1, 0, 1])], "1,0,1");
    }

    #[test]
    fn tensor_cap() {
        let base = ChainSpec::from_rates(None, 2, &[(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        let spec = ProductSpec::new(base, 20).unwrap().with_cap(1000);
        assert!(matches!(tensor_product(&spec), Err(Error::SizeCapExceeded { .. })));
    }
}
