//! Convective numerical fluxes and their Kružkov entropy fluxes.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::scalar::Scalar;
use crate::velocity::VelocityModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxMode<T> {
    /// Godunov flux of `f_j(u) = u v_j(u)`.
    LocalGodunov,
    /// `v_j(R^ι) ρ` with a forward, nonincreasing kernel.
    NonlocalDownstream(KernelSpec<T>),
}

impl<T: Scalar> FluxMode<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            FluxMode::NonlocalDownstream(k) if !k.admissible_for_flux() => Err(Error::SemanticError(format!(
                "flux kernel must be forward looking and nonincreasing, got `{}`",
                k.family
            ))),
            _ => Ok(()),
        }
    }

    pub fn kernel(&self) -> Option<&KernelSpec<T>> {
        match self {
            FluxMode::NonlocalDownstream(k) => Some(k),
            FluxMode::LocalGodunov => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FluxMode::LocalGodunov => "godunov",
            FluxMode::NonlocalDownstream(_) => "nonlocal",
        }
    }

    pub fn cast<U: Scalar>(&self) -> FluxMode<U> {
        match self {
            FluxMode::LocalGodunov => FluxMode::LocalGodunov,
            FluxMode::NonlocalDownstream(k) => FluxMode::NonlocalDownstream(KernelSpec {
                family: k.family,
                range: U::lit(k.range.to_f64_lossy()),
            }),
        }
    }
}

/// `min{ f(min{u, θ}), f(max{w, θ}) }`.
#[inline]
pub fn godunov_flux<T: Scalar>(u: T, w: T, lane: usize, vel: &VelocityModel<T>) -> T {
    let (law, theta) = (vel.law(lane), vel.theta(lane));
    law.flux(u.min(theta)).min(law.flux(w.max(theta)))
}

/// `v(R^ι) ρ`.
#[inline]
pub fn nonlocal_flux<T: Scalar>(rho: T, r_iota: T, lane: usize, vel: &VelocityModel<T>) -> T {
    vel.law(lane).velocity(r_iota) * rho
}

/// `F(u ∨ c, w ∨ c) - F(u ∧ c, w ∧ c)`.
#[inline]
pub fn kruzkov_entropy_flux_local<T: Scalar>(u: T, w: T, c: T, lane: usize, vel: &VelocityModel<T>) -> T {
    godunov_flux(u.max(c), w.max(c), lane, vel) - godunov_flux(u.min(c), w.min(c), lane, vel)
}

/// `v(R^ι) (u ∨ c - u ∧ c) = v(R^ι) |u - c|`.
#[inline]
pub fn kruzkov_entropy_flux_nonlocal<T: Scalar>(u: T, c: T, r_iota: T, lane: usize, vel: &VelocityModel<T>) -> T {
    nonlocal_flux(u.max(c), r_iota, lane, vel) - nonlocal_flux(u.min(c), r_iota, lane, vel)
}
