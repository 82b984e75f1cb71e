//! Lane-changing rates.
//!
//! `S_j` is the flow from lane `j` to lane `j + 1`: positive when lane `j + 1`
//! is faster at the (possibly averaged) densities `R`, and scaled by the free
//! space left in the receiving lane. Lanes are indexed from zero here, so the
//! outermost rates `S_{-1}` and `S_{M-1}` vanish.

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::scalar::Scalar;
use crate::velocity::{VelocityLaw, VelocityModel};

/// How the velocity arguments of the lane-change rate are formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceMode<T> {
    /// Averages with a kernel supported on `[0, ν]`.
    NonlocalForward(KernelSpec<T>),
    /// Averages with a kernel supported on `[-ν, ν]`.
    NonlocalSymmetric(KernelSpec<T>),
    /// `R_j = ρ_j` pointwise.
    Local,
}

impl<T: Scalar> SourceMode<T> {
    /// Checks that the kernel direction matches the variant.
    pub fn new_nonlocal(kernel: KernelSpec<T>) -> Self {
        if kernel.family.is_forward() {
            SourceMode::NonlocalForward(kernel)
        } else {
            SourceMode::NonlocalSymmetric(kernel)
        }
    }

    pub fn kernel(&self) -> Option<&KernelSpec<T>> {
        match self {
            SourceMode::NonlocalForward(k) | SourceMode::NonlocalSymmetric(k) => Some(k),
            SourceMode::Local => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceMode::NonlocalForward(k) if !k.family.is_forward() => Err(Error::SemanticError(format!(
                "source `nonlocal_forward` needs a forward kernel, got `{}`",
                k.family
            ))),
            SourceMode::NonlocalSymmetric(k) if k.family.is_forward() => Err(Error::SemanticError(format!(
                "source `nonlocal_symmetric` needs a symmetric kernel, got `{}`",
                k.family
            ))),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SourceMode::NonlocalForward(_) => "nonlocal_forward",
            SourceMode::NonlocalSymmetric(_) => "nonlocal_symmetric",
            SourceMode::Local => "local",
        }
    }

    pub fn cast<U: Scalar>(&self) -> SourceMode<U> {
        let k = |k: &KernelSpec<T>| KernelSpec {
            family: k.family,
            range: U::lit(k.range.to_f64_lossy()),
        };
        match self {
            SourceMode::NonlocalForward(s) => SourceMode::NonlocalForward(k(s)),
            SourceMode::NonlocalSymmetric(s) => SourceMode::NonlocalSymmetric(k(s)),
            SourceMode::Local => SourceMode::Local,
        }
    }
}

impl<T> SourceMode<T> {
    pub fn kernel_family(&self) -> Option<KernelFamily> {
        match self {
            SourceMode::NonlocalForward(k) | SourceMode::NonlocalSymmetric(k) => Some(k.family),
            SourceMode::Local => None,
        }
    }
}

/// Net flow from lane `j` (densities `rho_j`, averaged `r_j`) into lane
/// `j + 1`.
#[inline]
pub fn source_rate<T: Scalar>(
    rho_j: T,
    rho_next: T,
    r_j: T,
    r_next: T,
    law_j: &VelocityLaw<T>,
    law_next: &VelocityLaw<T>,
) -> T {
    let dv = law_next.velocity(r_next) - law_j.velocity(r_j);
    dv.pos() * rho_j * (T::one() - rho_next) - dv.neg_part() * rho_next * (T::one() - rho_j)
}

/// `S_{j-1} - S_j` at one cell, given every lane's density and averaged
/// density there.
pub fn net_source_column<T: Scalar>(lane: usize, rho: &[T], conv: &[T], vel: &VelocityModel<T>) -> Result<T> {
    let m = vel.lane_count();
    if lane >= m {
        return Err(Error::LaneIndexOutOfRange { index: lane, lanes: m });
    }
    if rho.len() != m || conv.len() != m {
        return Err(Error::LengthMismatch(rho.len(), conv.len()));
    }
    Ok(net_source_unchecked(lane, rho, conv, vel))
}

#[inline]
pub(crate) fn net_source_unchecked<T: Scalar>(lane: usize, rho: &[T], conv: &[T], vel: &VelocityModel<T>) -> T {
    let rate = |j: usize| source_rate(rho[j], rho[j + 1], conv[j], conv[j + 1], vel.law(j), vel.law(j + 1));
    let inflow = if lane > 0 { rate(lane - 1) } else { T::zero() };
    let outflow = if lane + 1 < vel.lane_count() {
        rate(lane)
    } else {
        T::zero()
    };
    inflow - outflow
}

/// `max_{j,k} ( |S_j| - V_max (ρ_j + ρ_{j+1}) )` over all interior lane
/// pairs; nonpositive for admissible data. `rho[j][k]`, `conv[j][k]`.
pub fn source_bound_check<T: Scalar>(rho: &[Vec<T>], conv: &[Vec<T>], vel: &VelocityModel<T>) -> T {
    let v_max = vel.v_max();
    let mut worst = T::zero();
    for j in 0..vel.lane_count().saturating_sub(1) {
        for k in 0..rho[j].len() {
            let s = source_rate(
                rho[j][k],
                rho[j + 1][k],
                conv[j][k],
                conv[j + 1][k],
                vel.law(j),
                vel.law(j + 1),
            );
            worst = worst.max(s.abs() - v_max * (rho[j][k] + rho[j + 1][k]));
        }
    }
    worst
}
