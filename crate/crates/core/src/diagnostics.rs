//! Checkers for the discrete properties of the scheme.

use serde::Serialize;

use crate::convolution::{convolve_at_with, Boundary};
use crate::error::{Error, Result};
use crate::flux::{kruzkov_entropy_flux_local, kruzkov_entropy_flux_nonlocal, FluxMode};
use crate::run::{run_with, RunConfig, Snapshot};
use crate::scalar::Scalar;
use crate::scheme::{Scheme, StepRecord};
use crate::source::net_source_unchecked;
use crate::state::LaneGridState;

/// Tolerance on entropy residuals.
pub const ENTROPY_TOL: f64 = 1e-12;
/// Relative tolerance on total mass drift.
pub const MASS_TOL: f64 = 1e-12;
/// Slack allowed on the a-priori bounds, which are strict inequalities up to rounding.
pub const BOUND_TOL: f64 = 1e-12;
/// Slack on the non-failing observations.
pub const OBSERVATION_TOL: f64 = 1e-10;

/// `Δx Σ_k ρ_{j,k}` for each lane.
pub fn mass_per_lane<T: Scalar>(state: &LaneGridState<T>, dx: T) -> Vec<T> {
    state
        .lanes()
        .iter()
        .map(|l| dx * l.iter().copied().sum::<T>())
        .collect()
}

pub fn total_mass<T: Scalar>(state: &LaneGridState<T>, dx: T) -> T {
    mass_per_lane(state, dx).into_iter().sum()
}

/// Total variation of a lane padded with zeros on both sides.
pub fn tv<T: Scalar>(lane: &[T]) -> T {
    tv_with(lane, Boundary::ZeroPad)
}

/// Total variation of the extended sequence over one mesh (or one period).
pub fn tv_with<T: Scalar>(lane: &[T], boundary: Boundary) -> T {
    let (Some(&first), Some(&last)) = (lane.first(), lane.last()) else {
        return T::zero();
    };
    let inner: T = lane.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    match boundary {
        Boundary::ZeroPad => first.abs() + inner + last.abs(),
        Boundary::Periodic => inner + (first - last).abs(),
    }
}

pub fn tv_per_lane<T: Scalar>(state: &LaneGridState<T>) -> Vec<T> {
    tv_per_lane_with(state, Boundary::ZeroPad)
}

pub fn tv_per_lane_with<T: Scalar>(state: &LaneGridState<T>, boundary: Boundary) -> Vec<T> {
    state.lanes().iter().map(|l| tv_with(l, boundary)).collect()
}

pub fn total_tv<T: Scalar>(state: &LaneGridState<T>, boundary: Boundary) -> T {
    tv_per_lane_with(state, boundary).into_iter().sum()
}

/// Per-lane `Δx Σ_k |a_{j,k} - b_{j,k}|`.
pub fn l1_distance<T: Scalar>(a: &Snapshot<T>, b: &Snapshot<T>) -> Result<Vec<T>> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    l1_distance_states(&a.state, &b.state, a.grid.dx())
}

pub fn l1_distance_states<T: Scalar>(a: &LaneGridState<T>, b: &LaneGridState<T>, dx: T) -> Result<Vec<T>> {
    if a.lane_count() != b.lane_count() || a.n_cells() != b.n_cells() {
        return Err(Error::GridMismatch);
    }
    Ok(a.lanes()
        .iter()
        .zip(b.lanes())
        .map(|(x, y)| dx * x.iter().zip(y).map(|(p, q)| (*p - *q).abs()).sum::<T>())
        .collect())
}

/// `Σ_j ‖ρ_{j+1} - ρ_j‖_{L1}`.
pub fn lane_difference_l1<T: Scalar>(state: &LaneGridState<T>, dx: T) -> T {
    state
        .lanes()
        .windows(2)
        .map(|w| dx * w[0].iter().zip(&w[1]).map(|(p, q)| (*q - *p).abs()).sum::<T>())
        .sum()
}

fn check_record<T: Scalar>(scheme: &Scheme<T>, r: &StepRecord<T>) -> Result<()> {
    let n = scheme.grid().n_cells();
    let m = scheme.velocity().lane_count();
    for (name, s) in [("prev", &r.prev), ("mid", &r.mid), ("next", &r.next)] {
        if s.lane_count() != m || s.n_cells() != n {
            return Err(Error::StateMismatch(format!(
                "{name} has shape {}x{}",
                s.lane_count(),
                s.n_cells()
            )));
        }
    }
    if r.source_conv.len() != m || r.source_conv.iter().any(|l| l.len() != n) {
        return Err(Error::StateMismatch("source arguments have the wrong shape".into()));
    }
    if r.mid.t != r.prev.t {
        return Err(Error::StateMismatch(
            "intermediate state is not at the step start".into(),
        ));
    }
    let expected = r.prev.t + r.dt;
    let slack = T::lit(1e-9) * (T::one() + expected.abs());
    if (r.next.t - expected).abs() > slack {
        return Err(Error::StateMismatch(format!(
            "next state at t = {}, expected {}",
            r.next.t, expected
        )));
    }
    Ok(())
}

fn net_sources<T: Scalar>(scheme: &Scheme<T>, r: &StepRecord<T>) -> Vec<Vec<T>> {
    let m = r.mid.lane_count();
    let n = r.mid.n_cells();
    let mut out = vec![vec![T::zero(); n]; m];
    let mut rho = vec![T::zero(); m];
    let mut conv = vec![T::zero(); m];
    for k in 0..n {
        for j in 0..m {
            rho[j] = r.mid.lane(j)[k];
            conv[j] = r.source_conv[j][k];
        }
        for (j, lane) in out.iter_mut().enumerate() {
            lane[k] = net_source_unchecked(j, &rho, &conv, scheme.velocity());
        }
    }
    out
}

/// Kružkov residual of one local-flux step, per lane and cell. The scheme
/// guarantees every entry is `<= 0` up to rounding.
pub fn entropy_residual_local<T: Scalar>(scheme: &Scheme<T>, r: &StepRecord<T>, c: T) -> Result<Vec<Vec<T>>> {
    check_record(scheme, r)?;
    if !matches!(scheme.flux_mode(), FluxMode::LocalGodunov) {
        return Err(Error::StateMismatch("step was not taken with the local flux".into()));
    }
    let lambda = r.dt / scheme.grid().dx();
    let n = r.prev.n_cells();
    let sources = net_sources(scheme, r);
    let vel = scheme.velocity();
    let boundary = scheme.grid().boundary();
    Ok((0..r.prev.lane_count())
        .map(|j| {
            let rho = r.prev.lane(j);
            let at = |k: isize| boundary.value(rho, k);
            (0..n)
                .map(|k| {
                    let ki = k as isize;
                    let next = r.next.lane(j)[k];
                    let right = kruzkov_entropy_flux_local(at(ki), at(ki + 1), c, j, vel);
                    let left = kruzkov_entropy_flux_local(at(ki - 1), at(ki), c, j, vel);
                    (next - c).abs() - (rho[k] - c).abs() + lambda * (right - left)
                        - r.dt * (next - c).sgn() * sources[j][k]
                })
                .collect()
        })
        .collect())
}

/// Kružkov residual of one nonlocal-flux step. Uses the `R^ι` recorded by
/// the solver; the value left of the first cell is convolved on the fly.
///
/// The velocity-difference term pairs the two interfaces of cell `k`, i.e.
/// `v(R_k) - v(R_{k-1})`, which is what the conservative update produces.
pub fn entropy_residual_nonlocal<T: Scalar>(scheme: &Scheme<T>, r: &StepRecord<T>, c: T) -> Result<Vec<Vec<T>>> {
    check_record(scheme, r)?;
    let (Some(conv), Some(kernel)) = (r.flux_conv.as_ref(), scheme.flux_kernel()) else {
        return Err(Error::StateMismatch("step was not taken with the nonlocal flux".into()));
    };
    let lambda = r.dt / scheme.grid().dx();
    let n = r.prev.n_cells();
    let sources = net_sources(scheme, r);
    let vel = scheme.velocity();
    Ok((0..r.prev.lane_count())
        .map(|j| {
            let rho = r.prev.lane(j);
            let law = vel.law(j);
            let boundary = scheme.grid().boundary();
            let r_left = convolve_at_with(rho, kernel, -1, boundary);
            (0..n)
                .map(|k| {
                    let (rho_left, r_prev) = if k == 0 {
                        (boundary.value(rho, -1), r_left)
                    } else {
                        (rho[k - 1], conv[j][k - 1])
                    };
                    let next = r.next.lane(j)[k];
                    let s = (next - c).sgn();
                    let right = kruzkov_entropy_flux_nonlocal(rho[k], c, conv[j][k], j, vel);
                    let left = kruzkov_entropy_flux_nonlocal(rho_left, c, r_prev, j, vel);
                    (next - c).abs() - (rho[k] - c).abs()
                        + lambda * (right - left)
                        + lambda * s * c * (law.velocity(conv[j][k]) - law.velocity(r_prev))
                        - r.dt * s * sources[j][k]
                })
                .collect()
        })
        .collect())
}

/// Dispatches on the flux mode of `scheme`.
pub fn entropy_residual<T: Scalar>(scheme: &Scheme<T>, r: &StepRecord<T>, c: T) -> Result<Vec<Vec<T>>> {
    match scheme.flux_mode() {
        FluxMode::LocalGodunov => entropy_residual_local(scheme, r, c),
        FluxMode::NonlocalDownstream(_) => entropy_residual_nonlocal(scheme, r, c),
    }
}

/// The 21 points `0, 0.05, ..., 1` plus the extreme values of the initial datum.
pub fn entropy_c_grid<T: Scalar>(initial: &LaneGridState<T>) -> Vec<T> {
    let mut cs: Vec<T> = (0..=20).map(|i| T::from_usize_lossy(i) / T::lit(20.0)).collect();
    for lane in initial.lanes() {
        let lo = lane.iter().copied().fold(T::one(), T::min);
        let hi = lane.iter().copied().fold(T::zero(), T::max);
        cs.push(lo);
        cs.push(hi);
    }
    cs.sort_by(|a, b| a.partial_cmp(b).expect("densities are finite"));
    cs.dedup();
    cs
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub max_residual: f64,
    /// `(lane, cell, step, c)` of the largest residual.
    pub argmax: Option<(usize, usize, usize, f64)>,
    pub n_violations: usize,
    pub tolerance: f64,
}

impl Default for EntropyReport {
    fn default() -> Self {
        EntropyReport {
            max_residual: f64::NEG_INFINITY,
            argmax: None,
            n_violations: 0,
            tolerance: ENTROPY_TOL,
        }
    }
}

impl EntropyReport {
    pub fn passed(&self) -> bool {
        self.n_violations == 0
    }

    /// Folds the residuals of one step over every `c` in `cs`.
    pub fn observe<T: Scalar>(&mut self, scheme: &Scheme<T>, r: &StepRecord<T>, cs: &[T]) -> Result<()> {
        for &c in cs {
            let field = entropy_residual(scheme, r, c)?;
            for (j, lane) in field.iter().enumerate() {
                for (k, v) in lane.iter().enumerate() {
                    let v = v.to_f64_lossy();
                    if v > self.tolerance {
                        self.n_violations += 1;
                    }
                    if v > self.max_residual {
                        self.max_residual = v;
                        self.argmax = Some((j, k, r.index, c.to_f64_lossy()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Growth factor of the total-variation bound at time `t`.
pub fn bv_growth<T: Scalar>(scheme: &Scheme<T>, t: T) -> T {
    let vel = scheme.velocity();
    let mut rate = T::lit(8.0) * vel.lipschitz_source_constant();
    if let Some(k) = scheme.flux_mode().kernel() {
        rate += k.at_zero() * vel.cfl_bound();
    }
    (t * rate).exp()
}

/// Right-hand side of the time-Lipschitz estimate for a step from `t` of size `dt`.
pub fn time_lipschitz_bound<T: Scalar>(scheme: &Scheme<T>, t: T, dt: T, initial_mass: T, initial_tv: T) -> T {
    let vel = scheme.velocity();
    T::two() * dt * (T::two() * vel.v_max() * initial_mass + vel.cfl_bound() * bv_growth(scheme, t) * initial_tv)
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check_name: String,
    pub max_violation: f64,
    pub pass: bool,
    /// Observations are reported but do not fail a run.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

impl Check {
    fn new(name: &str, max_violation: f64, pass: bool) -> Self {
        Check {
            check_name: name.to_owned(),
            max_violation,
            pass,
            informational: false,
        }
    }

    fn observation(name: &str, max_violation: f64, pass: bool) -> Self {
        Check {
            informational: true,
            ..Check::new(name, max_violation, pass)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub name: String,
    pub steps: usize,
    pub checks: Vec<Check>,
    pub entropy: EntropyReport,
}

impl VerifyReport {
    /// True when every non-informational check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.informational)
    }
}

/// Runs `config` and checks every step against the discrete estimates.
///
/// A range violation aborts the run inside the solver; it is reported here as
/// a failed `invariance` check rather than an error.
pub fn verify_run<T: Scalar>(config: &RunConfig<T>) -> Result<VerifyReport> {
    let (scheme, initial) = config.validate()?;
    let dx = config.grid.dx();
    let cs = entropy_c_grid(&initial);
    let mass0 = total_mass(&initial, dx);
    let boundary = config.grid.boundary();
    let tv0 = total_tv(&initial, boundary);
    let lanes0 = lane_difference_l1(&initial, dx);
    let local = matches!(config.flux, FluxMode::LocalGodunov);
    // Lane differences only contract when shifting lanes maps solutions to
    // solutions, i.e. when every lane has the same law.
    let laws = config.velocity.laws();
    let shift_invariant = laws.windows(2).all(|w| w[0] == w[1]);

    let mut entropy = EntropyReport::default();
    let mut mass_drift = 0.0f64;
    let mut bv = f64::NEG_INFINITY;
    let mut lip = f64::NEG_INFINITY;
    let mut tv_growth = f64::NEG_INFINITY;
    let mut lane_growth = f64::NEG_INFINITY;
    let mut courant = 0.0f64;
    let cap = config.cfl.cfl_cap.to_f64_lossy();

    let outcome = run_with(config, |r| {
        entropy.observe(&scheme, r, &cs)?;
        let mass = total_mass(&r.next, dx);
        let scale = mass0.abs().max(T::min_positive_value());
        mass_drift = mass_drift.max(((mass - mass0) / scale).abs().to_f64_lossy());
        let tv = total_tv(&r.next, boundary);
        bv = bv.max((tv - bv_growth(&scheme, r.next.t) * tv0).to_f64_lossy());
        let moved: T = r
            .next
            .lanes()
            .iter()
            .zip(r.prev.lanes())
            .map(|(a, b)| dx * a.iter().zip(b).map(|(p, q)| (*p - *q).abs()).sum::<T>())
            .sum();
        lip = lip.max((moved - time_lipschitz_bound(&scheme, r.prev.t, r.dt, mass0, tv0)).to_f64_lossy());
        if local {
            tv_growth = tv_growth.max((tv - tv0).to_f64_lossy());
            lane_growth = lane_growth.max((lane_difference_l1(&r.next, dx) - lanes0).to_f64_lossy());
        }
        courant = courant.max((r.dt / dx * r.speed_bound).to_f64_lossy());
        Ok(())
    });

    let (steps, invariance) = match outcome {
        Ok(out) => (out.steps, Check::new("invariance", 0.0, true)),
        Err(Error::RangeViolation { value, .. }) => {
            let excess = if value < 0.0 { -value } else { value - 1.0 };
            (0, Check::new("invariance", excess, false))
        }
        Err(e) => return Err(e),
    };
    let entropy_check = Check::new("entropy", entropy.max_residual.max(0.0), entropy.passed());
    let mut checks = vec![
        invariance,
        Check::new("conservation", mass_drift, mass_drift < MASS_TOL),
        entropy_check,
        Check::new("bv_bound", bv.max(0.0), bv <= BOUND_TOL),
        Check::new("time_lipschitz", lip.max(0.0), lip <= BOUND_TOL),
        Check::new("cfl", (courant - cap).max(0.0), courant <= cap * (1.0 + 1e-9)),
    ];
    if local {
        checks.push(Check::observation(
            "tv_nonincrease",
            tv_growth.max(0.0),
            tv_growth <= OBSERVATION_TOL,
        ));
        if shift_invariant {
            checks.push(Check::observation(
                "lane_difference_nonincrease",
                lane_growth.max(0.0),
                lane_growth <= OBSERVATION_TOL,
            ));
        }
    }
    Ok(VerifyReport {
        name: config.name.clone(),
        steps,
        checks,
        entropy,
    })
}
