//! TOML run configuration.
//!
//! ```toml
//! name = "demo"
//! t_final = 1.5
//! snapshot_times = [0.75]
//!
//! [grid]
//! x_min = 0.0
//! x_max = 2.0
//! dx = 0.01
//! boundary = "periodic"       # or "zero_pad" (default)
//!
//! [[lanes]]
//! velocity = "linear:a=1.5"
//! initial = { profile = "sin_sq", lo = 0.0, hi = 2.0 }
//!
//! [[lanes]]
//! velocity = "linear:a=2.5"
//! initial = { profile = "sin_sq", lo = 0.0, hi = 2.0 }
//!
//! [source]
//! kind = "nonlocal"
//! kernel = "constant_forward"
//! range = 0.5
//! ```
//!
//! Omitted sections take their defaults: `flux.kind = "godunov"`,
//! `source.kind = "local"`, `cfl = { mode = "adaptive", cap = 0.5, fd_eps = 1e-6 }`,
//! `series_every = 1`, `enforce_support_margin = true`. A file holding only
//! `preset = "<name>"` expands to that preset's runs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convolution::Boundary;
use crate::error::{Error, Result};
use crate::flux::FluxMode;
use crate::grid::{CflController, CflMode, Grid1D};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::run::{InitialCondition, RunConfig};
use crate::scenarios::ScenarioPreset;
use crate::source::SourceMode;
use crate::state::{cell_averages, Profile};
use crate::velocity::{VelocityLaw, VelocityModel};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enforce_support_margin: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<CflSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lanes: Vec<LaneSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<TermSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<TermSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CflSection {
    #[serde(default)]
    pub mode: CflMode,
    #[serde(default = "default_cap")]
    pub cap: f64,
    #[serde(default = "default_fd_eps")]
    pub fd_eps: f64,
}

fn default_cap() -> f64 {
    0.5
}

fn default_fd_eps() -> f64 {
    1e-6
}

impl Default for CflSection {
    fn default() -> Self {
        CflSection {
            mode: CflMode::Adaptive,
            cap: default_cap(),
            fd_eps: default_fd_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneSection {
    /// `"linear:a=<a>"` or `"quadratic"`.
    pub velocity: String,
    pub initial: InitialSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    SinSq {
        lo: f64,
        hi: f64,
    },
    BumpQ {
        scale: f64,
        shift: f64,
    },
    Constant {
        value: f64,
    },
    Riemann {
        x_jump: f64,
        left: f64,
        right: f64,
    },
    /// Cell averages, one per cell.
    Cells {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    /// `godunov` or `nonlocal` for the flux, `local` or `nonlocal` for the source.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
}

/// Reads and resolves a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Vec<RunConfig<f64>>> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

/// Parses TOML text into one or more resolved runs.
pub fn parse_config_str(text: &str) -> Result<Vec<RunConfig<f64>>> {
    let file = ConfigFile::from_toml(text)?;
    file.resolve()
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| Error::SchemaError {
            path: String::new(),
            message: e.message().to_owned(),
        })?;
        serde_path_to_error::deserialize(de).map_err(|e| Error::SchemaError {
            path: e.path().to_string(),
            message: e.inner().message().to_owned(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::SemanticError(format!("cannot serialise configuration: {e}")))
    }

    /// Applies defaults and checks cross-field constraints.
    pub fn resolve(&self) -> Result<Vec<RunConfig<f64>>> {
        if let Some(name) = &self.preset {
            let bare = ConfigFile {
                preset: self.preset.clone(),
                ..ConfigFile::default()
            };
            if *self != bare {
                return Err(Error::SemanticError("a preset file takes no other keys".into()));
            }
            let preset: ScenarioPreset = name.parse()?;
            return Ok(preset.configs());
        }
        let missing = |key: &str| Error::SchemaError {
            path: key.to_owned(),
            message: "missing field".into(),
        };
        let g = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        let grid = Grid1D::new(g.x_min, g.x_max, g.dx)?.with_boundary(g.boundary);
        let t_final = self.t_final.ok_or_else(|| missing("t_final"))?;
        if self.lanes.is_empty() {
            return Err(missing("lanes"));
        }

        let mut laws = Vec::with_capacity(self.lanes.len());
        for (i, lane) in self.lanes.iter().enumerate() {
            let law: VelocityLaw<f64> = lane.velocity.parse().map_err(|e: Error| Error::SchemaError {
                path: format!("lanes[{i}].velocity"),
                message: e.to_string(),
            })?;
            laws.push(law);
        }

        let initial = resolve_initial(&self.lanes, &grid)?;
        let flux = resolve_flux(self.flux.as_ref())?;
        let source = resolve_source(self.source.as_ref())?;
        let c = self.cfl.clone().unwrap_or_default();
        let cfl = CflController {
            mode: c.mode,
            cfl_cap: c.cap,
            fd_eps: c.fd_eps,
        };
        if !(c.cap > 0.0 && c.cap <= 0.5) {
            return Err(Error::SemanticError(format!(
                "cfl.cap must lie in (0, 0.5], got {}",
                c.cap
            )));
        }

        let config = RunConfig {
            name: self.name.clone().unwrap_or_else(|| "run".into()),
            grid,
            t_final,
            velocity: VelocityModel::new(laws),
            flux,
            source,
            cfl,
            initial,
            snapshot_times: self.snapshot_times.clone(),
            series_every: self.series_every.unwrap_or(1),
            enforce_support_margin: self.enforce_support_margin.unwrap_or(true),
            output_dir: None,
        };
        config.validate()?;
        Ok(vec![config])
    }

    /// The file that resolves to `config`, with every default spelled out.
    pub fn from_run(config: &RunConfig<f64>) -> Self {
        let lanes = config
            .velocity
            .laws()
            .iter()
            .enumerate()
            .map(|(j, law)| LaneSection {
                velocity: law.to_string(),
                initial: match &config.initial {
                    InitialCondition::Profiles(p) => profile_section(&p[j]),
                    InitialCondition::Cells(c) => InitialSection::Cells { values: c[j].clone() },
                },
            })
            .collect();
        let term = |kind: &str, k: Option<&KernelSpec<f64>>| TermSection {
            kind: kind.to_owned(),
            kernel: k.map(|k| k.family),
            range: k.map(|k| k.range),
        };
        ConfigFile {
            preset: None,
            name: Some(config.name.clone()),
            t_final: Some(config.t_final),
            snapshot_times: config.snapshot_times.clone(),
            series_every: Some(config.series_every),
            enforce_support_margin: Some(config.enforce_support_margin),
            grid: Some(GridSection {
                x_min: config.grid.x_min(),
                x_max: config.grid.x_max(),
                dx: config.grid.dx(),
                boundary: config.grid.boundary(),
            }),
            cfl: Some(CflSection {
                mode: config.cfl.mode,
                cap: config.cfl.cfl_cap,
                fd_eps: config.cfl.fd_eps,
            }),
            lanes,
            flux: Some(term(config.flux.name(), config.flux.kernel())),
            source: Some(term(
                if config.source.kernel().is_some() {
                    "nonlocal"
                } else {
                    "local"
                },
                config.source.kernel(),
            )),
        }
    }
}

fn profile_section(p: &Profile<f64>) -> InitialSection {
    match *p {
        Profile::SinSq { lo, hi } => InitialSection::SinSq { lo, hi },
        Profile::BumpQ { scale, shift } => InitialSection::BumpQ { scale, shift },
        Profile::Constant { value } => InitialSection::Constant { value },
        Profile::Riemann { x_jump, left, right } => InitialSection::Riemann { x_jump, left, right },
    }
}

fn resolve_initial(lanes: &[LaneSection], grid: &Grid1D<f64>) -> Result<InitialCondition<f64>> {
    let profile = |s: &InitialSection| -> Option<Profile<f64>> {
        Some(match *s {
            InitialSection::SinSq { lo, hi } => Profile::SinSq { lo, hi },
            InitialSection::BumpQ { scale, shift } => Profile::BumpQ { scale, shift },
            InitialSection::Constant { value } => Profile::Constant { value },
            InitialSection::Riemann { x_jump, left, right } => Profile::Riemann { x_jump, left, right },
            InitialSection::Cells { .. } => return None,
        })
    };
    if let Some(all) = lanes.iter().map(|l| profile(&l.initial)).collect::<Option<Vec<_>>>() {
        return Ok(InitialCondition::Profiles(all));
    }
    let mut cells = Vec::with_capacity(lanes.len());
    for (i, lane) in lanes.iter().enumerate() {
        match &lane.initial {
            InitialSection::Cells { values } => {
                if values.len() != grid.n_cells() {
                    return Err(Error::SchemaError {
                        path: format!("lanes[{i}].initial.values"),
                        message: format!("expected {} cell values, got {}", grid.n_cells(), values.len()),
                    });
                }
                cells.push(values.clone());
            }
            other => {
                let p = profile(other).expect("not a cell list");
                cells.push(cell_averages(grid, |x| p.eval(x)));
            }
        }
    }
    Ok(InitialCondition::Cells(cells))
}

fn kernel_of(section: &TermSection, what: &str) -> Result<KernelSpec<f64>> {
    let (Some(family), Some(range)) = (section.kernel, section.range) else {
        return Err(Error::SemanticError(format!(
            "nonlocal {what} needs both `kernel` and `range`"
        )));
    };
    KernelSpec::new(family, range)
}

fn resolve_flux(section: Option<&TermSection>) -> Result<FluxMode<f64>> {
    let Some(s) = section else {
        return Ok(FluxMode::LocalGodunov);
    };
    match s.kind.as_str() {
        "godunov" | "local" => {
            if s.kernel.is_some() || s.range.is_some() {
                return Err(Error::SemanticError("the godunov flux takes no kernel".into()));
            }
            Ok(FluxMode::LocalGodunov)
        }
        "nonlocal" => {
            let mode = FluxMode::NonlocalDownstream(kernel_of(s, "flux")?);
            mode.validate()?;
            Ok(mode)
        }
        other => Err(Error::SchemaError {
            path: "flux.kind".into(),
            message: format!("unknown flux `{other}`; expected `godunov` or `nonlocal`"),
        }),
    }
}

fn resolve_source(section: Option<&TermSection>) -> Result<SourceMode<f64>> {
    let Some(s) = section else {
        return Ok(SourceMode::Local);
    };
    match s.kind.as_str() {
        "local" => {
            if s.kernel.is_some() || s.range.is_some() {
                return Err(Error::SemanticError("the local source takes no kernel".into()));
            }
            Ok(SourceMode::Local)
        }
        "nonlocal" => Ok(SourceMode::new_nonlocal(kernel_of(s, "source")?)),
        other => Err(Error::SchemaError {
            path: "source.kind".into(),
            message: format!("unknown source `{other}`; expected `local` or `nonlocal`"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        t_final = 0.5
        [grid]
        x_min = 0.0
        x_max = 4.0
        dx = 0.01
        [[lanes]]
        velocity = "linear:a=1"
        initial = { profile = "bump_q", scale = 1.0, shift = 0.0 }
        [flux]
        kind = "godunov"
        [source]
        kind = "local"
    "#;

    #[test]
    fn minimal_resolves_with_defaults() {
        let runs = parse_config_str(MINIMAL).unwrap();
        assert_eq!(runs.len(), 1);
        let c = &runs[0];
        assert_eq!(c.name, "run");
        assert_eq!(c.cfl, CflController::adaptive());
        assert_eq!(c.series_every, 1);
        assert!(c.enforce_support_margin);
        assert_eq!(c.grid.boundary(), Boundary::ZeroPad);
        assert_eq!(c.output_times().unwrap(), vec![0.5]);
    }

    #[test]
    fn symmetric_flux_kernel_is_semantic_error() {
        let text = format!("{MINIMAL}\n").replace(
            "[flux]\n        kind = \"godunov\"",
            "[flux]\n        kind = \"nonlocal\"\n        kernel = \"linear_symmetric\"\n        range = 0.5",
        );
        assert!(matches!(parse_config_str(&text), Err(Error::SemanticError(_))));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = MINIMAL.replace("dx = 0.01", "dx = \"small\"");
        match parse_config_str(&bad) {
            Err(Error::SchemaError { path, .. }) => assert_eq!(path, "grid.dx"),
            other => panic!("{other:?}"),
        }
        let unknown = MINIMAL.replace("t_final = 0.5", "t_final = 0.5\nspeed = 3");
        assert!(matches!(parse_config_str(&unknown), Err(Error::SchemaError { .. })));
        let law = MINIMAL.replace("linear:a=1", "cubic");
        match parse_config_str(&law) {
            Err(Error::SchemaError { path, .. }) => assert_eq!(path, "lanes[0].velocity"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn table1_preset_expands_to_13_runs() {
        assert_eq!(parse_config_str("preset = \"table1\"").unwrap().len(), 13);
        assert!(matches!(
            parse_config_str("preset = \"table1\"\nt_final = 1.0"),
            Err(Error::SemanticError(_))
        ));
    }

    #[test]
    fn resolved_echo_round_trips() {
        for c in ScenarioPreset::TwoLaneLocalFlux.configs::<f64>() {
            let text = ConfigFile::from_run(&c).to_toml().unwrap();
            let back = parse_config_str(&text).unwrap();
            assert_eq!(ConfigFile::from_run(&back[0]), ConfigFile::from_run(&c), "{text}");
        }
    }
}
