//! Per-lane velocity laws `v_j`, fluxes `f_j(u) = u v_j(u)` and the global
//! constants that drive the CFL condition and the stability estimates.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Strictly decreasing velocity law on `[0, 1]` with `v(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityLaw<T> {
    /// `v(ρ) = a (1 - ρ)`.
    Linear { a: T },
    /// `v(ρ) = 1 - ρ²`.
    Quadratic,
}

impl<T: Scalar> VelocityLaw<T> {
    pub fn linear(a: T) -> Self {
        VelocityLaw::Linear { a }
    }

    #[inline]
    pub fn velocity(&self, rho: T) -> T {
        match *self {
            VelocityLaw::Linear { a } => a * (T::one() - rho),
            VelocityLaw::Quadratic => T::one() - rho * rho,
        }
    }

    #[inline]
    pub fn derivative(&self, rho: T) -> T {
        match *self {
            VelocityLaw::Linear { a } => -a,
            VelocityLaw::Quadratic => -T::two() * rho,
        }
    }

    #[inline]
    pub fn flux(&self, rho: T) -> T {
        rho * self.velocity(rho)
    }

    /// Unique maximiser of the flux on `[0, 1]`.
    pub fn theta(&self) -> T {
        match *self {
            VelocityLaw::Linear { .. } => T::half(),
            VelocityLaw::Quadratic => T::one() / T::lit(3.0).sqrt(),
        }
    }

    /// `sup |v|` on `[0, 1]`, attained at `ρ = 0`.
    pub fn sup_velocity(&self) -> T {
        match *self {
            VelocityLaw::Linear { a } => a.abs(),
            VelocityLaw::Quadratic => T::one(),
        }
    }

    /// `sup |v'|` on `[0, 1]`.
    pub fn sup_derivative(&self) -> T {
        match *self {
            VelocityLaw::Linear { a } => a.abs(),
            VelocityLaw::Quadratic => T::two(),
        }
    }

    /// `sup |v''|` on `[0, 1]`.
    pub fn sup_second_derivative(&self) -> T {
        match *self {
            VelocityLaw::Linear { .. } => T::zero(),
            VelocityLaw::Quadratic => T::two(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> VelocityLaw<U> {
        match *self {
            VelocityLaw::Linear { a } => VelocityLaw::Linear {
                a: U::lit(a.to_f64_lossy()),
            },
            VelocityLaw::Quadratic => VelocityLaw::Quadratic,
        }
    }
}

impl<T: Scalar> fmt::Display for VelocityLaw<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityLaw::Linear { a } => write!(f, "linear:a={a}"),
            VelocityLaw::Quadratic => f.write_str("quadratic"),
        }
    }
}

impl<T: Scalar> FromStr for VelocityLaw<T> {
    type Err = Error;

    /// Parses `"quadratic"` or `"linear:a=<float>"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "quadratic" {
            return Ok(VelocityLaw::Quadratic);
        }
        let bad = || Error::SemanticError(format!("unknown velocity law `{s}`"));
        let rest = s.strip_prefix("linear:").ok_or_else(bad)?;
        let value = rest.trim().strip_prefix("a=").ok_or_else(bad)?;
        let a: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::SemanticError(format!("linear velocity needs a > 0, got {a}")));
        }
        Ok(VelocityLaw::Linear { a: T::lit(a) })
    }
}

/// The lanes' velocity laws plus the cached global constants.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel<T> {
    lanes: Vec<VelocityLaw<T>>,
    thetas: Vec<T>,
    v_max: T,
    dv_max: T,
    d2v_max: T,
}

impl<T: Scalar> VelocityModel<T> {
    pub fn new(lanes: Vec<VelocityLaw<T>>) -> Self {
        let zero = T::zero();
        let fold = |g: fn(&VelocityLaw<T>) -> T| lanes.iter().map(g).fold(zero, T::max);
        let v_max = fold(VelocityLaw::sup_velocity);
        let dv_max = fold(VelocityLaw::sup_derivative);
        let d2v_max = fold(VelocityLaw::sup_second_derivative);
        let thetas = lanes.iter().map(VelocityLaw::theta).collect();
        VelocityModel {
            lanes,
            thetas,
            v_max,
            dv_max,
            d2v_max,
        }
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    pub fn laws(&self) -> &[VelocityLaw<T>] {
        &self.lanes
    }

    #[inline]
    pub fn law(&self, lane: usize) -> &VelocityLaw<T> {
        &self.lanes[lane]
    }

    #[inline]
    pub fn theta(&self, lane: usize) -> T {
        self.thetas[lane]
    }

    pub fn v_max(&self) -> T {
        self.v_max
    }

    pub fn dv_max(&self) -> T {
        self.dv_max
    }

    pub fn d2v_max(&self) -> T {
        self.d2v_max
    }

    /// `V_max + V'_max`, the bound entering `λ 𝒱 ≤ 1/2`.
    pub fn cfl_bound(&self) -> T {
        self.v_max + self.dv_max
    }

    /// Lipschitz constant of the lane-change rate in each argument,
    /// `max{V_max, 2 V'_max}`.
    pub fn lipschitz_source_constant(&self) -> T {
        self.v_max.max(T::two() * self.dv_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_lane_linear() -> VelocityModel<f64> {
        VelocityModel::new(vec![VelocityLaw::linear(1.5), VelocityLaw::linear(2.5)])
    }

    #[test]
    fn theta_closed_forms() {
        assert_eq!(VelocityLaw::linear(1.5).theta(), 0.5);
        assert_eq!(VelocityLaw::linear(2.5).theta(), 0.5);
        let q = VelocityLaw::<f64>::Quadratic.theta();
        assert!((q - 0.577_350_269_189_625_8).abs() < 1e-15);
    }

    #[test]
    fn theta_maximises_flux_on_samples() {
        for law in [
            VelocityLaw::linear(1.5),
            VelocityLaw::linear(2.5),
            VelocityLaw::Quadratic,
        ] {
            let peak = law.flux(law.theta());
            for i in 0..=10_000 {
                let u = i as f64 / 10_000.0;
                assert!(law.flux(u) <= peak + 1e-15, "{law} at {u}");
            }
        }
    }

    #[test]
    fn vanishes_at_jam_density() {
        assert_eq!(VelocityLaw::linear(2.5).velocity(1.0), 0.0);
        assert_eq!(VelocityLaw::<f64>::Quadratic.velocity(1.0), 0.0);
    }

    #[test]
    fn global_constants() {
        let m = two_lane_linear();
        assert_eq!(m.v_max(), 2.5);
        assert_eq!(m.dv_max(), 2.5);
        assert_eq!(m.cfl_bound(), 5.0);
        assert_eq!(m.lipschitz_source_constant(), 5.0);

        let q = VelocityModel::new(vec![VelocityLaw::<f64>::Quadratic; 2]);
        assert_eq!((q.v_max(), q.dv_max(), q.d2v_max()), (1.0, 2.0, 2.0));
        assert_eq!(q.lipschitz_source_constant(), 4.0);

        let single = VelocityModel::new(vec![VelocityLaw::linear(1.0)]);
        assert_eq!(single.lipschitz_source_constant(), 2.0);
    }

    #[test]
    fn derivative_sup_matches_finite_differences() {
        let h = 1e-7;
        for law in [VelocityLaw::linear(1.5), VelocityLaw::Quadratic] {
            let mut sup = 0.0f64;
            for i in 1..=100_000 {
                let u = i as f64 / 100_000.0;
                sup = sup.max(((law.velocity(u) - law.velocity(u - h)) / h).abs());
            }
            assert!((sup - law.sup_derivative()).abs() < 1e-6, "{law}: {sup}");
        }
    }

    #[test]
    fn parse_laws() {
        assert_eq!(
            "linear:a=1.5".parse::<VelocityLaw<f64>>().unwrap(),
            VelocityLaw::linear(1.5)
        );
        assert_eq!("quadratic".parse::<VelocityLaw<f64>>().unwrap(), VelocityLaw::Quadratic);
        assert!("linear:b=2".parse::<VelocityLaw<f64>>().is_err());
        assert!("linear:a=-1".parse::<VelocityLaw<f64>>().is_err());
        let round: VelocityLaw<f64> = VelocityLaw::linear(2.5).to_string().parse().unwrap();
        assert_eq!(round, VelocityLaw::linear(2.5));
    }
}
