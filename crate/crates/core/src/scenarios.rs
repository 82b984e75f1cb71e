//! Shipped experiments and the ν-sweep error table.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::l1_distance;
use crate::error::{Error, Result};
use crate::flux::FluxMode;
use crate::grid::{CflController, Grid1D};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::run::{run, InitialCondition, RunConfig, RunOutput};
use crate::scalar::Scalar;
use crate::source::SourceMode;
use crate::state::Profile;
use crate::velocity::{VelocityLaw, VelocityModel};

/// Kernel ranges of the sweep, largest first.
pub const SWEEP_NUS: [f64; 6] = [0.64, 0.32, 0.16, 0.08, 0.04, 0.02];

/// Reference L1 errors against the local-source run, `[forward, symmetric]`
/// per row, each `[lane 1, lane 2]`.
pub const REFERENCE_TABLE1: [[[f64; 2]; 2]; 6] = [
    [[0.0311, 0.0313], [0.0330, 0.0310]],
    [[0.0239, 0.0167], [0.0208, 0.0198]],
    [[0.0159, 0.0089], [0.0131, 0.0120]],
    [[0.0095, 0.0049], [0.0078, 0.0066]],
    [[0.0054, 0.0026], [0.0045, 0.0035]],
    [[0.0030, 0.0013], [0.0023, 0.0016]],
];

/// Relative deviation above which a table cell is flagged.
pub const TABLE1_FLAG: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioPreset {
    /// Two linear lanes, sin² data, three source modes.
    TwoLaneLocalFlux,
    /// The Table-1 sweep: the local run plus both constant kernels for each ν.
    NuSweep,
    /// Quadratic lanes with bump data, local versus nonlocal flux.
    NonlocalFluxBump,
    /// Nonlocal flux with three source kernels.
    SourceKernelCases,
}

impl ScenarioPreset {
    pub const ALL: [ScenarioPreset; 4] = [
        ScenarioPreset::TwoLaneLocalFlux,
        ScenarioPreset::NuSweep,
        ScenarioPreset::NonlocalFluxBump,
        ScenarioPreset::SourceKernelCases,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioPreset::TwoLaneLocalFlux => "two_lane_local_flux",
            ScenarioPreset::NuSweep => "table1",
            ScenarioPreset::NonlocalFluxBump => "nonlocal_flux_bump",
            ScenarioPreset::SourceKernelCases => "source_kernel_cases",
        }
    }

    pub fn configs<T: Scalar>(self) -> Vec<RunConfig<T>> {
        match self {
            ScenarioPreset::TwoLaneLocalFlux => vec![
                two_lane(SourceMode::Local, "local"),
                two_lane(nonlocal(KernelFamily::ConstantForward, 0.5), "forward"),
                two_lane(nonlocal(KernelFamily::ConstantSymmetric, 0.25), "symmetric"),
            ],
            ScenarioPreset::NuSweep => {
                let mut out = vec![sweep_config(SourceMode::Local, "local")];
                for family in [KernelFamily::ConstantForward, KernelFamily::ConstantSymmetric] {
                    for nu in SWEEP_NUS {
                        out.push(sweep_config(nonlocal(family, nu), &format!("{}_nu{nu}", short(family))));
                    }
                }
                out
            }
            ScenarioPreset::NonlocalFluxBump => {
                let source = nonlocal(KernelFamily::LinearForward, 0.5);
                vec![
                    bump(FluxMode::LocalGodunov, source, "local_flux"),
                    bump(flux_kernel(), source, "nonlocal_flux"),
                ]
            }
            ScenarioPreset::SourceKernelCases => vec![
                bump(flux_kernel(), nonlocal(KernelFamily::LinearSymmetric, 0.25), "case_a"),
                bump(flux_kernel(), nonlocal(KernelFamily::LinearSymmetric, 0.5), "case_b"),
                bump(flux_kernel(), nonlocal(KernelFamily::LinearForward, 0.5), "case_c"),
            ],
        }
    }
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nu_sweep" => Ok(ScenarioPreset::NuSweep),
            _ => ScenarioPreset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
                let names: Vec<_> = ScenarioPreset::ALL.iter().map(|p| p.name()).collect();
                Error::SemanticError(format!("unknown preset `{s}`; expected one of {}", names.join(", ")))
            }),
        }
    }
}

fn short(family: KernelFamily) -> &'static str {
    if family.is_forward() {
        "forward"
    } else {
        "symmetric"
    }
}

fn nonlocal<T: Scalar>(family: KernelFamily, range: f64) -> SourceMode<T> {
    SourceMode::new_nonlocal(KernelSpec::new(family, T::lit(range)).expect("positive range"))
}

fn flux_kernel<T: Scalar>() -> FluxMode<T> {
    FluxMode::NonlocalDownstream(KernelSpec::new(KernelFamily::LinearForward, T::lit(0.5)).expect("positive range"))
}

fn two_lane<T: Scalar>(source: SourceMode<T>, tag: &str) -> RunConfig<T> {
    let sin_sq = Profile::SinSq {
        lo: T::zero(),
        hi: T::two(),
    };
    RunConfig {
        name: format!("two_lane_{tag}"),
        grid: Grid1D::periodic(T::zero(), T::two(), T::lit(0.01)).expect("valid grid"),
        t_final: T::lit(1.5),
        velocity: VelocityModel::new(vec![VelocityLaw::linear(T::lit(1.5)), VelocityLaw::linear(T::lit(2.5))]),
        flux: FluxMode::LocalGodunov,
        source,
        cfl: CflController::adaptive(),
        initial: InitialCondition::Profiles(vec![sin_sq, sin_sq]),
        snapshot_times: vec![T::lit(0.75), T::lit(1.5)],
        series_every: 1,
        enforce_support_margin: true,
        output_dir: None,
    }
}

fn sweep_config<T: Scalar>(source: SourceMode<T>, tag: &str) -> RunConfig<T> {
    RunConfig {
        name: format!("table1_{tag}"),
        snapshot_times: vec![T::lit(1.5)],
        ..two_lane(source, tag)
    }
}

fn bump<T: Scalar>(flux: FluxMode<T>, source: SourceMode<T>, tag: &str) -> RunConfig<T> {
    RunConfig {
        name: format!("bump_{tag}"),
        grid: Grid1D::new(T::lit(-1.5), T::lit(3.5), T::lit(0.01)).expect("valid grid"),
        t_final: T::one(),
        velocity: VelocityModel::new(vec![VelocityLaw::Quadratic; 2]),
        flux,
        source,
        cfl: CflController::adaptive(),
        initial: InitialCondition::Profiles(vec![
            Profile::BumpQ {
                scale: T::two(),
                shift: T::lit(-0.5),
            },
            Profile::BumpQ {
                scale: T::one(),
                shift: T::zero(),
            },
        ]),
        snapshot_times: vec![T::half(), T::one()],
        series_every: 1,
        enforce_support_margin: true,
        output_dir: None,
    }
}

/// Worker count from `LANESIM_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("LANESIM_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
}

/// Runs independent configurations in parallel, keeping their order.
pub fn run_all<T: Scalar>(configs: &[RunConfig<T>]) -> Result<Vec<RunOutput<T>>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::SemanticError(format!("cannot start worker pool: {e}")))?;
    pool.install(|| configs.par_iter().map(run).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub nu: f64,
    pub kernel: &'static str,
    pub error: [f64; 2],
    pub reference: [f64; 2],
    pub relative_deviation: [f64; 2],
}

impl Table1Row {
    pub fn flagged(&self) -> [bool; 2] {
        self.relative_deviation.map(|d| d.abs() > TABLE1_FLAG)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    /// Forward rows first, then symmetric, each in decreasing ν.
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn row(&self, kernel: &str, nu: f64) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.kernel == kernel && r.nu == nu)
    }

    /// Error column for one kernel and lane (0 or 1), in decreasing ν.
    pub fn column(&self, kernel: &str, lane: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.kernel == kernel)
            .map(|r| r.error[lane])
            .collect()
    }

    pub fn flagged_count(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.flagged().iter().filter(|f| **f).count())
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "nu,kernel,lane1,lane2,reference_lane1,reference_lane2,rel_dev_lane1,rel_dev_lane2,flag_lane1,flag_lane2\n",
        );
        for r in &self.rows {
            let [f1, f2] = r.flagged();
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{},{},{:+.4},{:+.4},{},{}\n",
                r.nu,
                r.kernel,
                r.error[0],
                r.error[1],
                r.reference[0],
                r.reference[1],
                r.relative_deviation[0],
                r.relative_deviation[1],
                f1,
                f2
            ));
        }
        out
    }
}

/// Builds the error table from the outputs of the sweep, in preset order.
pub fn table1_from_outputs<T: Scalar>(outputs: &[RunOutput<T>]) -> Result<Table1> {
    if outputs.len() != 1 + 2 * SWEEP_NUS.len() {
        return Err(Error::SemanticError(format!(
            "expected 13 sweep runs, got {}",
            outputs.len()
        )));
    }
    let reference = outputs[0].snapshots.last().expect("final snapshot");
    let mut rows = Vec::with_capacity(2 * SWEEP_NUS.len());
    for (f, kernel) in ["forward", "symmetric"].into_iter().enumerate() {
        for (i, nu) in SWEEP_NUS.into_iter().enumerate() {
            let out = &outputs[1 + f * SWEEP_NUS.len() + i];
            let d = l1_distance(reference, out.snapshots.last().expect("final snapshot"))?;
            let error = [d[0].to_f64_lossy(), d[1].to_f64_lossy()];
            let reference = REFERENCE_TABLE1[i][f];
            rows.push(Table1Row {
                nu,
                kernel,
                error,
                reference,
                relative_deviation: [
                    (error[0] - reference[0]) / reference[0],
                    (error[1] - reference[1]) / reference[1],
                ],
            });
        }
    }
    Ok(Table1 { rows })
}

/// Runs the 13-run sweep and compares it with the reference table.
pub fn reproduce_table1<T: Scalar>() -> Result<(Table1, Vec<RunOutput<T>>)> {
    let outputs = run_all(&ScenarioPreset::NuSweep.configs::<T>())?;
    Ok((table1_from_outputs(&outputs)?, outputs))
}
