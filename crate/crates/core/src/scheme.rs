//! One time step of the splitting scheme: a conservative convective update
//! followed by a pointwise relaxation with the lane-change rates.

use crate::convolution::{convolve_into_with, Boundary};
use crate::error::{Error, Result};
use crate::flux::{godunov_flux, nonlocal_flux, FluxMode};
use crate::grid::{CflController, CflMode, Grid1D, TimeStep};
use crate::kernel::DiscreteKernel;
use crate::scalar::Scalar;
use crate::source::{net_source_unchecked, SourceMode};
use crate::state::LaneGridState;
use crate::velocity::VelocityModel;

/// Relative slack on the CFL guard; absorbs the difference-quotient rounding
/// in the sampled speed bound.
const CFL_GUARD_SLACK: f64 = 1e-9;

fn cfl_slack<T: Scalar>() -> T {
    T::lit(CFL_GUARD_SLACK).max(T::lit(8.0) * T::epsilon())
}

/// Everything needed to advance a state by one step.
#[derive(Debug, Clone)]
pub struct Scheme<T> {
    grid: Grid1D<T>,
    vel: VelocityModel<T>,
    flux: FluxMode<T>,
    source: SourceMode<T>,
    cfl: CflController<T>,
    flux_kernel: Option<DiscreteKernel<T>>,
    source_kernel: Option<DiscreteKernel<T>>,
}

/// The intermediate and final states of one step, plus the averaged
/// densities each sub-step used.
#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub index: usize,
    pub dt: T,
    pub speed_bound: T,
    pub prev: LaneGridState<T>,
    pub mid: LaneGridState<T>,
    pub next: LaneGridState<T>,
    /// `R^ι` evaluated on `prev`; present with the nonlocal flux.
    pub flux_conv: Option<Vec<Vec<T>>>,
    /// Velocity arguments of the source, evaluated on `mid` (equal to `mid`
    /// itself for the local source).
    pub source_conv: Vec<Vec<T>>,
}

impl<T: Scalar> Scheme<T> {
    pub fn new(
        grid: Grid1D<T>,
        vel: VelocityModel<T>,
        flux: FluxMode<T>,
        source: SourceMode<T>,
        cfl: CflController<T>,
    ) -> Result<Self> {
        flux.validate()?;
        source.validate()?;
        if vel.lane_count() == 0 {
            return Err(Error::SemanticError("at least one lane is required".into()));
        }
        let discretize = |k: Option<&crate::kernel::KernelSpec<T>>| -> Result<Option<DiscreteKernel<T>>> {
            k.map(|k| {
                let d = k.discretize(grid.dx())?;
                if d.len() > grid.n_cells() {
                    return Err(Error::KernelWiderThanDomain {
                        stencil: d.len(),
                        cells: grid.n_cells(),
                    });
                }
                Ok(d)
            })
            .transpose()
        };
        let flux_kernel = discretize(flux.kernel())?;
        let source_kernel = discretize(source.kernel())?;
        if !(cfl.cfl_cap > T::zero() && cfl.fd_eps > T::zero()) {
            return Err(Error::SemanticError("cfl_cap and fd_eps must be positive".into()));
        }
        Ok(Scheme {
            grid,
            vel,
            flux,
            source,
            cfl,
            flux_kernel,
            source_kernel,
        })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn velocity(&self) -> &VelocityModel<T> {
        &self.vel
    }

    pub fn flux_mode(&self) -> &FluxMode<T> {
        &self.flux
    }

    pub fn source_mode(&self) -> &SourceMode<T> {
        &self.source
    }

    pub fn cfl(&self) -> &CflController<T> {
        &self.cfl
    }

    pub fn flux_kernel(&self) -> Option<&DiscreteKernel<T>> {
        self.flux_kernel.as_ref()
    }

    pub fn source_kernel(&self) -> Option<&DiscreteKernel<T>> {
        self.source_kernel.as_ref()
    }

    fn check_shape(&self, state: &LaneGridState<T>) -> Result<()> {
        if state.lane_count() != self.vel.lane_count() {
            return Err(Error::LengthMismatch(self.vel.lane_count(), state.lane_count()));
        }
        if state.n_cells() != self.grid.n_cells() {
            return Err(Error::LengthMismatch(self.grid.n_cells(), state.n_cells()));
        }
        Ok(())
    }

    /// `R^ι` of every lane, or `None` for the local flux.
    pub fn flux_convolution(&self, state: &LaneGridState<T>) -> Option<Vec<Vec<T>>> {
        let kernel = self.flux_kernel.as_ref()?;
        Some(convolve_lanes(state.lanes(), kernel, self.grid.boundary()))
    }

    /// Velocity arguments of the lane-change rate for every lane.
    pub fn source_convolution(&self, state: &LaneGridState<T>) -> Vec<Vec<T>> {
        match &self.source_kernel {
            Some(kernel) => convolve_lanes(state.lanes(), kernel, self.grid.boundary()),
            None => state.lanes().to_vec(),
        }
    }

    /// Speed bound sampled at the densities and averaged densities present
    /// in `state`.
    pub fn sampled_speed_bound(&self, state: &LaneGridState<T>) -> T {
        let flux_conv = self.flux_convolution(state);
        self.sampled_bound_with(state, flux_conv.as_deref())
    }

    fn sampled_bound_with(&self, state: &LaneGridState<T>, flux_conv: Option<&[Vec<T>]>) -> T {
        let source_conv = self
            .source_kernel
            .as_ref()
            .map(|k| convolve_lanes(state.lanes(), k, self.grid.boundary()));
        let samples: Vec<Vec<&[T]>> = (0..state.lane_count())
            .map(|j| {
                let mut s = vec![state.lane(j)];
                if let Some(f) = flux_conv {
                    s.push(&f[j]);
                }
                if let Some(r) = &source_conv {
                    s.push(&r[j]);
                }
                s
            })
            .collect();
        self.cfl.sampled_speed_bound(&self.vel, &samples)
    }

    /// Step size for `state`, clamped to `remaining`.
    pub fn choose_dt(&self, state: &LaneGridState<T>, remaining: T) -> Result<TimeStep<T>> {
        let flux_conv = self.flux_convolution(state);
        self.choose_dt_with(state, flux_conv.as_deref(), remaining)
    }

    fn choose_dt_with(
        &self,
        state: &LaneGridState<T>,
        flux_conv: Option<&[Vec<T>]>,
        remaining: T,
    ) -> Result<TimeStep<T>> {
        match self.cfl.mode {
            CflMode::Fixed => self.cfl.next_step(&self.grid, &self.vel, &[], remaining),
            CflMode::Adaptive => {
                let bound = self.sampled_bound_with(state, flux_conv);
                if bound <= T::zero() {
                    return Err(Error::DegenerateVelocity);
                }
                Ok(TimeStep {
                    dt: (self.cfl.cfl_cap * self.grid.dx() / bound).min(remaining),
                    speed_bound: bound,
                })
            }
        }
    }

    fn guard_cfl(&self, dt: T, bound: T) -> Result<()> {
        let courant = dt / self.grid.dx() * bound;
        if !(dt > T::zero()) || courant > self.cfl.cfl_cap * (T::one() + cfl_slack::<T>()) {
            return Err(Error::CflViolation {
                dt: dt.to_f64_lossy(),
                courant: courant.to_f64_lossy(),
                cap: self.cfl.cfl_cap.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `ρ^{n+1/2}` from `ρ^n`. Returns the intermediate state (time left at
    /// `t^n`) and, for the nonlocal flux, the `R^ι` it used.
    pub fn convective_step(&self, state: &LaneGridState<T>, dt: T) -> Result<(LaneGridState<T>, Option<Vec<Vec<T>>>)> {
        self.check_shape(state)?;
        state.ensure_in_range("input")?;
        let flux_conv = self.flux_convolution(state);
        let bound = self.sampled_bound_with(state, flux_conv.as_deref());
        self.guard_cfl(dt, bound)?;
        self.convective_with(state, dt, flux_conv)
    }

    fn convective_with(
        &self,
        state: &LaneGridState<T>,
        dt: T,
        flux_conv: Option<Vec<Vec<T>>>,
    ) -> Result<(LaneGridState<T>, Option<Vec<Vec<T>>>)> {
        let lambda = dt / self.grid.dx();
        let n = self.grid.n_cells();
        let mut out = Vec::with_capacity(state.lane_count());
        let mut interface = vec![T::zero(); n + 1];
        for j in 0..state.lane_count() {
            let rho = state.lane(j);
            // interface[k] is the flux through the left edge of cell k.
            let boundary = self.grid.boundary();
            match &flux_conv {
                None => {
                    for (k, slot) in interface.iter_mut().enumerate() {
                        let k = k as isize;
                        *slot = godunov_flux(boundary.value(rho, k - 1), boundary.value(rho, k), j, &self.vel);
                    }
                }
                Some(conv) => {
                    interface[0] = match boundary {
                        Boundary::ZeroPad => T::zero(),
                        Boundary::Periodic => nonlocal_flux(rho[n - 1], conv[j][n - 1], j, &self.vel),
                    };
                    for k in 0..n {
                        interface[k + 1] = nonlocal_flux(rho[k], conv[j][k], j, &self.vel);
                    }
                }
            }
            out.push(
                (0..n)
                    .map(|k| rho[k] - lambda * (interface[k + 1] - interface[k]))
                    .collect(),
            );
        }
        let mid = LaneGridState::new(state.t, out)?;
        mid.ensure_in_range("convective")?;
        Ok((mid, flux_conv))
    }

    /// `ρ^{n+1}` from `ρ^{n+1/2}`. Returns the new state at `t^n + dt` and
    /// the velocity arguments used for the rates.
    pub fn relaxation_step(&self, mid: &LaneGridState<T>, dt: T) -> Result<(LaneGridState<T>, Vec<Vec<T>>)> {
        self.check_shape(mid)?;
        let conv = self.source_convolution(mid);
        let m = mid.lane_count();
        let mut next: Vec<Vec<T>> = mid.lanes().to_vec();
        if m > 1 {
            let mut rho_col = vec![T::zero(); m];
            let mut conv_col = vec![T::zero(); m];
            for k in 0..mid.n_cells() {
                for j in 0..m {
                    rho_col[j] = mid.lane(j)[k];
                    conv_col[j] = conv[j][k];
                }
                for (j, lane) in next.iter_mut().enumerate() {
                    lane[k] = rho_col[j] + dt * net_source_unchecked(j, &rho_col, &conv_col, &self.vel);
                }
            }
        }
        let next = LaneGridState::new(mid.t + dt, next)?;
        next.ensure_in_range("relaxation")?;
        Ok((next, conv))
    }

    /// Full step with an explicitly chosen `dt`, guarded against the CFL
    /// bound sampled from `state`.
    pub fn step(&self, state: &LaneGridState<T>, dt: T, index: usize) -> Result<StepRecord<T>> {
        self.check_shape(state)?;
        state.ensure_in_range("input")?;
        let flux_conv = self.flux_convolution(state);
        let bound = self.sampled_bound_with(state, flux_conv.as_deref());
        self.guard_cfl(dt, bound)?;
        self.finish_step(state, dt, index, bound, flux_conv)
    }

    /// Chooses `dt` (clamped to `remaining`) and takes one step.
    pub fn advance(&self, state: &LaneGridState<T>, remaining: T, index: usize) -> Result<StepRecord<T>> {
        self.check_shape(state)?;
        state.ensure_in_range("input")?;
        let flux_conv = self.flux_convolution(state);
        let ts = self.choose_dt_with(state, flux_conv.as_deref(), remaining)?;
        debug_assert!(
            ts.dt / self.grid.dx() * ts.speed_bound <= self.cfl.cfl_cap * (T::one() + cfl_slack::<T>()),
            "accepted step violates the CFL cap"
        );
        self.guard_cfl(ts.dt, ts.speed_bound)?;
        self.finish_step(state, ts.dt, index, ts.speed_bound, flux_conv)
    }

    fn finish_step(
        &self,
        state: &LaneGridState<T>,
        dt: T,
        index: usize,
        speed_bound: T,
        flux_conv: Option<Vec<Vec<T>>>,
    ) -> Result<StepRecord<T>> {
        let (mid, flux_conv) = self.convective_with(state, dt, flux_conv)?;
        let (next, source_conv) = self.relaxation_step(&mid, dt)?;
        Ok(StepRecord {
            index,
            dt,
            speed_bound,
            prev: state.clone(),
            mid,
            next,
            flux_conv,
            source_conv,
        })
    }
}

pub(crate) fn convolve_lanes<T: Scalar>(
    lanes: &[Vec<T>],
    kernel: &DiscreteKernel<T>,
    boundary: Boundary,
) -> Vec<Vec<T>> {
    lanes
        .iter()
        .map(|lane| {
            let mut out = vec![T::zero(); lane.len()];
            convolve_into_with(lane, kernel, boundary, &mut out).expect("stencil width checked at construction");
            out
        })
        .collect()
}
