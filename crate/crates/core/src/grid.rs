//! Uniform mesh bookkeeping and CFL-constrained time-step selection.

use serde::{Deserialize, Serialize};

use crate::convolution::Boundary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::velocity::VelocityModel;

/// Uniform 1-D mesh on `[x_min, x_max]` with `n_cells` cells of width `dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    x_min: T,
    x_max: T,
    dx: T,
    n_cells: usize,
    boundary: Boundary,
}

impl<T: Scalar> Grid1D<T> {
    /// Builds the mesh. The domain must hold an integer number of cells and
    /// `dx` must lie in `(0, 1)`.
    pub fn new(x_min: T, x_max: T, dx: T) -> Result<Self> {
        let (lo, hi, h) = (x_min.to_f64_lossy(), x_max.to_f64_lossy(), dx.to_f64_lossy());
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidCellWidth(h));
        }
        if !(hi > lo) {
            return Err(Error::InvalidDomain { x_min: lo, x_max: hi });
        }
        let ratio = (hi - lo) / h;
        let n = ratio.round();
        let tol = 1e-9f64.max(16.0 * T::epsilon().to_f64_lossy());
        if (ratio - n).abs() > tol * n.max(1.0) || n < 1.0 {
            return Err(Error::NonIntegerCellCount { length: hi - lo, dx: h });
        }
        Ok(Grid1D {
            x_min,
            x_max,
            dx,
            n_cells: n as usize,
            boundary: Boundary::ZeroPad,
        })
    }

    /// One period `[x_min, x_max)` of a periodic problem.
    pub fn periodic(x_min: T, x_max: T, dx: T) -> Result<Self> {
        Ok(Self::new(x_min, x_max, dx)?.with_boundary(Boundary::Periodic))
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Centre of cell `k`, `x_min + (k + 1/2) dx`.
    #[inline]
    pub fn center(&self, k: usize) -> T {
        self.x_min + (T::from_usize_lossy(k) + T::half()) * self.dx
    }

    /// Left interface of cell `k`; `interface(k + 1)` is its right one.
    #[inline]
    pub fn interface(&self, k: usize) -> T {
        self.x_min + T::from_usize_lossy(k) * self.dx
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.n_cells).map(|k| self.center(k)).collect()
    }

    pub fn cast<U: Scalar>(&self) -> Grid1D<U> {
        Grid1D {
            x_min: U::lit(self.x_min.to_f64_lossy()),
            x_max: U::lit(self.x_max.to_f64_lossy()),
            dx: U::lit(self.dx.to_f64_lossy()),
            n_cells: self.n_cells,
            boundary: self.boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CflMode {
    Fixed,
    #[default]
    Adaptive,
}

/// Chooses `Δt` so that `(Δt/Δx) 𝒱 ≤ cfl_cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflController<T> {
    pub mode: CflMode,
    pub cfl_cap: T,
    /// Increment of the one-sided difference quotient used for `v'` in
    /// adaptive mode.
    pub fd_eps: T,
}

impl<T: Scalar> Default for CflController<T> {
    fn default() -> Self {
        CflController {
            mode: CflMode::Adaptive,
            cfl_cap: T::half(),
            fd_eps: T::lit(1e-6),
        }
    }
}

/// An accepted step together with the speed bound it was sized against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStep<T> {
    pub dt: T,
    pub speed_bound: T,
}

impl<T: Scalar> CflController<T> {
    pub fn fixed() -> Self {
        CflController {
            mode: CflMode::Fixed,
            ..Self::default()
        }
    }

    pub fn adaptive() -> Self {
        Self::default()
    }

    /// `cfl_cap Δx / 𝒱` with the global `𝒱 = V_max + V'_max`.
    pub fn fixed_dt(&self, grid: &Grid1D<T>, vel: &VelocityModel<T>) -> Result<T> {
        let bound = vel.cfl_bound();
        if bound <= T::zero() {
            return Err(Error::DegenerateVelocity);
        }
        Ok(self.cfl_cap * grid.dx() / bound)
    }

    /// Time step from the speed bound sampled at the densities currently
    /// present. `lane_samples[j]` lists the slices (densities, convolution
    /// values) whose entries are fed to `v_j`. The result never exceeds
    /// `remaining`.
    pub fn adaptive_dt(
        &self,
        grid: &Grid1D<T>,
        vel: &VelocityModel<T>,
        lane_samples: &[Vec<&[T]>],
        remaining: T,
    ) -> Result<TimeStep<T>> {
        let bound = self.sampled_speed_bound(vel, lane_samples);
        if bound <= T::zero() {
            return Err(Error::DegenerateVelocity);
        }
        Ok(TimeStep {
            dt: (self.cfl_cap * grid.dx() / bound).min(remaining),
            speed_bound: bound,
        })
    }

    /// Dispatches on `mode`.
    pub fn next_step(
        &self,
        grid: &Grid1D<T>,
        vel: &VelocityModel<T>,
        lane_samples: &[Vec<&[T]>],
        remaining: T,
    ) -> Result<TimeStep<T>> {
        match self.mode {
            CflMode::Fixed => Ok(TimeStep {
                dt: self.fixed_dt(grid, vel)?.min(remaining),
                speed_bound: vel.cfl_bound(),
            }),
            CflMode::Adaptive => self.adaptive_dt(grid, vel, lane_samples, remaining),
        }
    }

    /// `max_j ( max_u |v_j(u)| + max_u |Δ_ε v_j(u)| )` over the sampled `u`.
    pub fn sampled_speed_bound(&self, vel: &VelocityModel<T>, lane_samples: &[Vec<&[T]>]) -> T {
        let eps = self.fd_eps;
        let mut bound = T::zero();
        for (j, slices) in lane_samples.iter().enumerate() {
            let law = vel.law(j);
            let (mut v_sup, mut dv_sup) = (T::zero(), T::zero());
            for &u in slices.iter().flat_map(|s| s.iter()) {
                let u = u.max(T::zero()).min(T::one());
                v_sup = v_sup.max(law.velocity(u).abs());
                let (a, b) = if u + eps <= T::one() {
                    (u, u + eps)
                } else {
                    (u - eps, u)
                };
                dv_sup = dv_sup.max(((law.velocity(b) - law.velocity(a)) / eps).abs());
            }
            bound = bound.max(v_sup + dv_sup);
        }
        bound
    }
}
