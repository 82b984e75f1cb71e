//! Discrete convolution `R_k = Σ_{h∈ℋ} γ_h r_{k+h+1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::DiscreteKernel;
use crate::scalar::Scalar;

/// Treatment of cells outside the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Cells outside the mesh hold zero density (the whole line, truncated).
    #[default]
    ZeroPad,
    /// The mesh is one period of a periodic profile.
    Periodic,
}

impl Boundary {
    /// Entry `k` of the extended sequence, `k` possibly outside the mesh.
    #[inline]
    pub fn value<T: Scalar>(self, r: &[T], k: isize) -> T {
        let n = r.len() as isize;
        if (0..n).contains(&k) {
            return r[k as usize];
        }
        match self {
            Boundary::ZeroPad => T::zero(),
            Boundary::Periodic if n > 0 => r[k.rem_euclid(n) as usize],
            Boundary::Periodic => T::zero(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Boundary::ZeroPad => "zero_pad",
            Boundary::Periodic => "periodic",
        }
    }
}

/// Value of `R_k` at an arbitrary (possibly out-of-mesh) index `k`, zero
/// padded. Summation runs in ascending `h`.
#[inline]
pub fn convolve_at<T: Scalar>(r: &[T], kernel: &DiscreteKernel<T>, k: isize) -> T {
    convolve_at_with(r, kernel, k, Boundary::ZeroPad)
}

#[inline]
pub fn convolve_at_with<T: Scalar>(r: &[T], kernel: &DiscreteKernel<T>, k: isize, boundary: Boundary) -> T {
    let mut acc = T::zero();
    for (h, g) in kernel.iter() {
        acc += g * boundary.value(r, k + h + 1);
    }
    acc
}

/// Writes the zero-padded `R_k` for every mesh cell into `out`.
pub fn convolve_into<T: Scalar>(r: &[T], kernel: &DiscreteKernel<T>, out: &mut [T]) -> Result<()> {
    convolve_into_with(r, kernel, Boundary::ZeroPad, out)
}

pub fn convolve_into_with<T: Scalar>(
    r: &[T],
    kernel: &DiscreteKernel<T>,
    boundary: Boundary,
    out: &mut [T],
) -> Result<()> {
    if out.len() != r.len() {
        return Err(Error::LengthMismatch(r.len(), out.len()));
    }
    if kernel.len() > r.len() {
        return Err(Error::KernelWiderThanDomain {
            stencil: kernel.len(),
            cells: r.len(),
        });
    }
    if boundary == Boundary::Periodic {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = convolve_at_with(r, kernel, k as isize, boundary);
        }
        return Ok(());
    }
    let n = r.len() as isize;
    let weights = kernel.weights();
    for (k, slot) in out.iter_mut().enumerate() {
        // Index into r of the first stencil entry: k + h_lo + 1.
        let first = k as isize + kernel.h_lo() + 1;
        let lo = (-first).max(0) as usize;
        let hi = (n - first).clamp(0, weights.len() as isize) as usize;
        let mut acc = T::zero();
        for (i, &g) in weights.iter().enumerate().take(hi).skip(lo) {
            acc += g * r[(first + i as isize) as usize];
        }
        *slot = acc;
    }
    Ok(())
}

/// `R = r * γ` on the mesh, same length as `r`.
pub fn convolve<T: Scalar>(r: &[T], kernel: &DiscreteKernel<T>, boundary: Boundary) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); r.len()];
    convolve_into_with(r, kernel, boundary, &mut out)?;
    Ok(out)
}

/// `Σ_k |R_k - S_k|` for the convolutions of `r` and `s`.
pub fn l1_distance_of_convolutions<T: Scalar>(r: &[T], s: &[T], kernel: &DiscreteKernel<T>) -> Result<T> {
    if r.len() != s.len() {
        return Err(Error::LengthMismatch(r.len(), s.len()));
    }
    let big_r = convolve(r, kernel, Boundary::ZeroPad)?;
    let big_s = convolve(s, kernel, Boundary::ZeroPad)?;
    Ok(big_r.iter().zip(&big_s).map(|(a, b)| (*a - *b).abs()).sum())
}
