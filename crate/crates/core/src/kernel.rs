//! Kernel families and their exact cell-averaged weights.
//!
//! A kernel `w` with `∫ w = 1` supported on `[lo, hi]` is discretised on a
//! mesh of width `Δx` into weights `γ_h = ∫_{hΔx}^{(h+1)Δx} w` for
//! `h ∈ [⌊lo/Δx⌋, ⌊hi/Δx⌋ - 1]`. The range must be a whole number of cells so
//! that the weights carry the full unit mass.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `1/ν` on `[0, ν]`.
    #[serde(rename = "constant_forward")]
    ConstantForward,
    /// `2(ν - x)/ν²` on `[0, ν]`.
    #[serde(rename = "linear_forward")]
    LinearForward,
    /// `(ν - |x|)/ν²` on `[-ν, ν]`.
    #[serde(rename = "linear_symmetric")]
    LinearSymmetric,
    /// `1/(2ν)` on `[-ν, ν]`.
    #[serde(rename = "constant_symmetric")]
    ConstantSymmetric,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::ConstantForward,
        KernelFamily::LinearForward,
        KernelFamily::LinearSymmetric,
        KernelFamily::ConstantSymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::ConstantForward => "constant_forward",
            KernelFamily::LinearForward => "linear_forward",
            KernelFamily::LinearSymmetric => "linear_symmetric",
            KernelFamily::ConstantSymmetric => "constant_symmetric",
        }
    }

    /// Support contained in `[0, range]`.
    pub fn is_forward(self) -> bool {
        matches!(self, KernelFamily::ConstantForward | KernelFamily::LinearForward)
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelFamily::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::SemanticError(format!("unknown kernel family `{s}`")))
    }
}

/// An analytic kernel: family plus range `ν` (or `ι` for the flux kernel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub family: KernelFamily,
    pub range: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, range: T) -> Result<Self> {
        if !(range > T::zero()) || !range.is_finite() {
            return Err(Error::SemanticError(format!(
                "kernel range must be positive, got {range}"
            )));
        }
        Ok(KernelSpec { family, range })
    }

    /// `(inf spt w, sup spt w)`.
    pub fn support(&self) -> (T, T) {
        if self.family.is_forward() {
            (T::zero(), self.range)
        } else {
            (-self.range, self.range)
        }
    }

    /// Pointwise value `w(x)`, zero off the support.
    pub fn eval(&self, x: T) -> T {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return T::zero();
        }
        let nu = self.range;
        match self.family {
            KernelFamily::ConstantForward => T::one() / nu,
            KernelFamily::LinearForward => T::two() * (nu - x) / (nu * nu),
            KernelFamily::LinearSymmetric => (nu - x.abs()) / (nu * nu),
            KernelFamily::ConstantSymmetric => T::one() / (T::two() * nu),
        }
    }

    /// `w(0)`.
    pub fn at_zero(&self) -> T {
        self.eval(T::zero())
    }

    /// Whether the kernel may be used inside the flux: forward support and
    /// nonincreasing profile.
    pub fn admissible_for_flux(&self) -> bool {
        self.family.is_forward()
    }

    /// Exact cell weights on a mesh of width `dx`.
    pub fn discretize(&self, dx: T) -> Result<DiscreteKernel<T>> {
        let (range, h) = (self.range.to_f64_lossy(), dx.to_f64_lossy());
        let ratio = range / h;
        let n = ratio.round();
        if n < 1.0 {
            return Err(Error::RangeTooSmall { range, dx: h });
        }
        if (ratio - n).abs() > 1e-9 * n {
            return Err(Error::RangeNotMultipleOfDx { range, dx: h });
        }
        let n = n as usize;
        let nf = T::from_usize_lossy(n);
        let cell = |i: usize| T::from_usize_lossy(i);
        // Weights are rational in n; evaluating them in that form keeps them
        // independent of rounding in `range` and `dx`.
        let (h_lo, weights): (isize, Vec<T>) = match self.family {
            KernelFamily::ConstantForward => (0, vec![T::one() / nf; n]),
            KernelFamily::ConstantSymmetric => (-(n as isize), vec![T::one() / (T::two() * nf); 2 * n]),
            KernelFamily::LinearForward => (
                0,
                (0..n)
                    .map(|i| (T::two() * nf - T::two() * cell(i) - T::one()) / (nf * nf))
                    .collect(),
            ),
            KernelFamily::LinearSymmetric => {
                let denom = T::two() * nf * nf;
                // h = -n..-1 mirror h = n-1..0.
                let right: Vec<T> = (0..n)
                    .map(|i| (T::two() * nf - T::two() * cell(i) - T::one()) / denom)
                    .collect();
                let left = right.iter().rev().copied();
                (-(n as isize), left.chain(right.iter().copied()).collect())
            }
        };
        Ok(DiscreteKernel { weights, h_lo })
    }
}

/// Weights `γ_h`, `h = h_lo ..= h_hi`, of a discretised kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel<T> {
    weights: Vec<T>,
    h_lo: isize,
}

impl<T: Scalar> DiscreteKernel<T> {
    /// Weights with an explicit index offset; used by tests and for custom
    /// stencils. Weights must be nonnegative.
    pub fn from_weights(h_lo: isize, weights: Vec<T>) -> Self {
        assert!(!weights.is_empty(), "empty stencil");
        assert!(weights.iter().all(|w| *w >= T::zero()), "negative weight");
        DiscreteKernel { weights, h_lo }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn h_lo(&self) -> isize {
        self.h_lo
    }

    pub fn h_hi(&self) -> isize {
        self.h_lo + self.weights.len() as isize - 1
    }

    /// `|ℋ|`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(h, γ_h)` in ascending `h`.
    pub fn iter(&self) -> impl Iterator<Item = (isize, T)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &g)| (self.h_lo + i as isize, g))
    }

    pub fn gamma(&self, h: isize) -> Option<T> {
        let i = h - self.h_lo;
        (i >= 0).then(|| self.weights.get(i as usize).copied()).flatten()
    }

    pub fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: KernelFamily, range: f64) -> KernelSpec<f64> {
        KernelSpec::new(family, range).unwrap()
    }

    #[test]
    fn constant_forward_three_cells() {
        let k = spec(KernelFamily::ConstantForward, 0.03).discretize(0.01).unwrap();
        assert_eq!((k.h_lo(), k.h_hi()), (0, 2));
        for (_, g) in k.iter() {
            assert!((g - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_forward_two_cells() {
        let k = spec(KernelFamily::LinearForward, 0.02).discretize(0.01).unwrap();
        assert_eq!(k.weights(), &[0.75, 0.25]);
    }

    #[test]
    fn linear_symmetric_one_cell() {
        let k = spec(KernelFamily::LinearSymmetric, 0.01).discretize(0.01).unwrap();
        assert_eq!((k.h_lo(), k.h_hi()), (-1, 0));
        assert_eq!(k.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn symmetric_index_set() {
        for family in [KernelFamily::LinearSymmetric, KernelFamily::ConstantSymmetric] {
            let k = spec(family, 0.25).discretize(0.01).unwrap();
            assert_eq!((k.h_lo(), k.h_hi()), (-25, 24));
            assert!((k.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(matches!(
            spec(KernelFamily::ConstantForward, 0.015).discretize(0.01),
            Err(Error::RangeNotMultipleOfDx { .. })
        ));
        assert!(matches!(
            spec(KernelFamily::ConstantForward, 0.004).discretize(0.01),
            Err(Error::RangeTooSmall { .. })
        ));
        assert!(KernelSpec::new(KernelFamily::LinearForward, 0.0).is_err());
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(spec(KernelFamily::ConstantForward, 0.5).at_zero(), 2.0);
        assert_eq!(spec(KernelFamily::LinearForward, 0.5).at_zero(), 4.0);
        assert_eq!(spec(KernelFamily::LinearSymmetric, 0.25).at_zero(), 4.0);
        assert_eq!(spec(KernelFamily::ConstantSymmetric, 0.25).at_zero(), 2.0);
    }

    #[test]
    fn flux_admissibility_and_names() {
        assert!(spec(KernelFamily::LinearForward, 0.5).admissible_for_flux());
        assert!(!spec(KernelFamily::LinearSymmetric, 0.5).admissible_for_flux());
        for f in KernelFamily::ALL {
            assert_eq!(f.name().parse::<KernelFamily>().unwrap(), f);
        }
    }
}
