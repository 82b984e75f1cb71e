//! Run configuration and the time loop over `[0, T]`.

use std::path::PathBuf;

use crate::diagnostics::{mass_per_lane, tv_per_lane_with};
use crate::error::{Error, Result};
use crate::flux::FluxMode;
use crate::grid::{CflController, Grid1D};
use crate::scalar::Scalar;
use crate::scheme::{Scheme, StepRecord};
use crate::source::SourceMode;
use crate::state::{init_from_profile, LaneGridState, Profile};
use crate::velocity::VelocityModel;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<T> {
    /// One closed-form profile per lane, projected by cell averaging.
    Profiles(Vec<Profile<T>>),
    /// Cell averages given directly, `cells[j][k]`.
    Cells(Vec<Vec<T>>),
}

/// A fully resolved simulation.
#[derive(Debug, Clone)]
pub struct RunConfig<T> {
    pub name: String,
    pub grid: Grid1D<T>,
    pub t_final: T,
    pub velocity: VelocityModel<T>,
    pub flux: FluxMode<T>,
    pub source: SourceMode<T>,
    pub cfl: CflController<T>,
    pub initial: InitialCondition<T>,
    /// Times in `[0, T]` at which the state is recorded; `T` is always added.
    pub snapshot_times: Vec<T>,
    /// A time-series row is written every this many steps (and at the end).
    pub series_every: usize,
    /// Reject initial data that could reach the domain edges before `T`.
    pub enforce_support_margin: bool,
    pub output_dir: Option<PathBuf>,
}

impl<T: Scalar> RunConfig<T> {
    pub fn scheme(&self) -> Result<Scheme<T>> {
        Scheme::new(self.grid, self.velocity.clone(), self.flux, self.source, self.cfl)
    }

    pub fn initial_state(&self) -> Result<LaneGridState<T>> {
        let state = match &self.initial {
            InitialCondition::Profiles(p) => init_from_profile(p, &self.grid)?,
            InitialCondition::Cells(c) => {
                let s = LaneGridState::new(T::zero(), c.clone())?;
                if let Some((lane, cell, v)) = s.first_out_of_range() {
                    let _ = lane;
                    return Err(Error::ProfileOutOfRange {
                        x: self.grid.center(cell).to_f64_lossy(),
                        value: v.to_f64_lossy(),
                    });
                }
                s
            }
        };
        if state.lane_count() != self.velocity.lane_count() {
            return Err(Error::SemanticError(format!(
                "{} initial profiles for {} lanes",
                state.lane_count(),
                self.velocity.lane_count()
            )));
        }
        if state.n_cells() != self.grid.n_cells() {
            return Err(Error::LengthMismatch(self.grid.n_cells(), state.n_cells()));
        }
        Ok(state)
    }

    /// Sorted, deduplicated output times, always ending with `T`.
    pub fn output_times(&self) -> Result<Vec<T>> {
        let mut times = Vec::with_capacity(self.snapshot_times.len() + 1);
        for &t in &self.snapshot_times {
            if !(t >= T::zero() && t <= self.t_final) {
                return Err(Error::SnapshotTimeOutOfRange {
                    t: t.to_f64_lossy(),
                    t_final: self.t_final.to_f64_lossy(),
                });
            }
            times.push(t);
        }
        times.push(self.t_final);
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        Ok(times)
    }

    /// Checks everything that can be checked before stepping.
    pub fn validate(&self) -> Result<(Scheme<T>, LaneGridState<T>)> {
        if !(self.t_final >= T::zero()) || !self.t_final.is_finite() {
            return Err(Error::SemanticError(format!(
                "final time must be >= 0, got {}",
                self.t_final
            )));
        }
        if self.series_every == 0 {
            return Err(Error::SemanticError("series_every must be at least 1".into()));
        }
        self.output_times()?;
        let scheme = self.scheme()?;
        let state = self.initial_state()?;
        if self.enforce_support_margin && !self.grid.is_periodic() {
            self.check_support_margin(&state)?;
        }
        Ok((scheme, state))
    }

    /// Mass only moves downstream and lane changes act pointwise, so the
    /// upstream edge of the support never moves left. Downstream the support
    /// may advance by `V_max T`; the nonlocal stencils add their range on
    /// either side.
    fn check_support_margin(&self, state: &LaneGridState<T>) -> Result<()> {
        let Some((first, last)) = state.support() else {
            return Ok(());
        };
        let dx = self.grid.dx();
        let mut ahead = T::zero();
        let mut behind = T::zero();
        for k in [self.flux.kernel(), self.source.kernel()].into_iter().flatten() {
            let (lo, hi) = k.support();
            ahead = ahead.max(hi);
            behind = behind.max(-lo);
        }
        let need_right = self.velocity.v_max() * self.t_final + ahead;
        let have_right = self.grid.x_max() - self.grid.interface(last + 1);
        let have_left = self.grid.interface(first) - self.grid.x_min();
        if have_right + dx * T::lit(1e-9) < need_right || have_left + dx * T::lit(1e-9) < behind {
            return Err(Error::SemanticError(format!(
                "initial support [{}, {}] too close to the domain edges: need {} upstream and {} downstream",
                self.grid.interface(first),
                self.grid.interface(last + 1),
                behind,
                need_right
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub grid: Grid1D<T>,
    pub state: LaneGridState<T>,
}

impl<T: Scalar> Snapshot<T> {
    pub fn t(&self) -> T {
        self.state.t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow<T> {
    pub t: T,
    pub mass: Vec<T>,
    pub tv: Vec<T>,
}

impl<T: Scalar> SeriesRow<T> {
    fn of(state: &LaneGridState<T>, grid: &Grid1D<T>) -> Self {
        SeriesRow {
            t: state.t,
            mass: mass_per_lane(state, grid.dx()),
            tv: tv_per_lane_with(state, grid.boundary()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub name: String,
    pub grid: Grid1D<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub series: Vec<SeriesRow<T>>,
    pub steps: usize,
    /// Sum of accepted step sizes.
    pub elapsed: T,
    /// Largest `(Δt/Δx) 𝒱` over the run.
    pub max_courant: T,
    pub initial: LaneGridState<T>,
    pub final_state: LaneGridState<T>,
}

impl<T: Scalar> RunOutput<T> {
    pub fn snapshot_at(&self, t: T) -> Option<&Snapshot<T>> {
        self.snapshots.iter().find(|s| s.t() == t)
    }
}

/// Runs `config` to its final time.
pub fn run<T: Scalar>(config: &RunConfig<T>) -> Result<RunOutput<T>> {
    run_with(config, |_| Ok(()))
}

/// Runs `config`, handing every step to `observer` as it is taken.
pub fn run_with<T, F>(config: &RunConfig<T>, mut observer: F) -> Result<RunOutput<T>>
where
    T: Scalar,
    F: FnMut(&StepRecord<T>) -> Result<()>,
{
    let (scheme, initial) = config.validate()?;
    let dx = config.grid.dx();
    let targets = config.output_times()?;

    let mut state = initial.clone();
    let mut snapshots = Vec::new();
    let mut series = vec![SeriesRow::of(&state, &config.grid)];
    let mut steps = 0usize;
    let mut elapsed = T::zero();
    let mut max_courant = T::zero();

    for &target in &targets {
        while state.t < target {
            let remaining = target - state.t;
            let record = scheme.advance(&state, remaining, steps)?;
            let landed = record.dt >= remaining;
            max_courant = max_courant.max(record.dt / dx * record.speed_bound);
            elapsed += record.dt;
            observer(&record)?;
            state = record.next;
            if landed {
                state.t = target;
            }
            steps += 1;
            if steps % config.series_every == 0 {
                series.push(SeriesRow::of(&state, &config.grid));
            }
        }
        snapshots.push(Snapshot {
            grid: config.grid,
            state: state.clone(),
        });
    }
    if series.last().map(|r| r.t) != Some(state.t) {
        series.push(SeriesRow::of(&state, &config.grid));
    }
    Ok(RunOutput {
        name: config.name.clone(),
        grid: config.grid,
        snapshots,
        series,
        steps,
        elapsed,
        max_courant,
        initial,
        final_state: state,
    })
}
