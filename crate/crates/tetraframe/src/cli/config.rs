//! Run configuration: a flat TOML table, strictly validated.
//!
//! Precedence, lowest first: config file, `TETRAFRAME_<KEY>` environment
//! variables, command-line flags. Environment values are parsed as TOML values
//! (`1e-3`, `"weak"`, `{ kind = "disk", radius = 1.0 }`); anything that does not
//! parse is taken as a bare string.

use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{BcMode, FieldParams, Target};
use crate::grid::Shape;
use crate::quaternion::{BinaryTetraElement, Defect, UnitQuaternion};
use crate::seed::SeedSpec;
use crate::solver::SolverConfig;

pub const ENV_PREFIX: &str = "TETRAFRAME_";

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "shape",
    "h",
    "target",
    "bc_mode",
    "eps",
    "delta1",
    "delta2",
    "init",
    "boundary",
    "noise",
    "seed",
    "dt",
    "max_iters",
    "rel_energy_tol",
    "window",
    "checkpoint_every",
    "threads",
    "threshold",
];

/// One defect of a quaternion boundary seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSpec {
    pub center: [f64; 2],
    /// Group element as text, e.g. `"s"`, `"-i"`, `"(+1+i+j-k)/2"`.
    pub alpha: String,
    #[serde(default = "one_label")]
    pub beta: String,
}

fn one_label() -> String {
    "1".into()
}

/// Serializable form of [`SeedSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Zero,
    EscapeMap,
    QuaternionBoundary { rho: f64, defects: Vec<DefectSpec> },
    FrameConstant { rotation: [f64; 4] },
    MbConstant { angle: f64 },
    Normal { theta: Option<f64> },
}

impl InitSpec {
    pub fn to_seed(&self) -> Result<SeedSpec> {
        Ok(match self {
            InitSpec::Zero => SeedSpec::Zero,
            InitSpec::EscapeMap => SeedSpec::EscapeMap,
            InitSpec::QuaternionBoundary { rho, defects } => SeedSpec::QuaternionBoundary {
                rho: *rho,
                defects: defects
                    .iter()
                    .map(|d| {
                        Ok(Defect {
                            center: Complex::new(d.center[0], d.center[1]),
                            alpha: d.alpha.parse::<BinaryTetraElement>()?,
                            beta: d.beta.parse::<BinaryTetraElement>()?,
                        })
                    })
                    .collect::<Result<_>>()?,
            },
            InitSpec::FrameConstant { rotation: [a, b, c, d] } => {
                if [a, b, c, d].iter().all(|x| **x == 0.0) {
                    return Err(Error::Config("frame_constant rotation must be non-zero".into()));
                }
                SeedSpec::FrameConstant { rotation: UnitQuaternion::normalized(*a, *b, *c, *d) }
            }
            InitSpec::MbConstant { angle } => SeedSpec::MbConstant { angle: *angle },
            InitSpec::Normal { theta } => SeedSpec::Normal { theta: *theta },
        })
    }
}

fn default_max_iters() -> usize {
    100_000
}
fn default_tol() -> f64 {
    1e-8
}
fn default_window() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shape: Shape,
    pub h: f64,
    pub target: Target,
    pub bc_mode: BcMode,
    pub eps: f64,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// Interior initial data.
    pub init: InitSpec,
    /// Boundary data for strong conditions; defaults to `init`.
    pub boundary: Option<InitSpec>,
    /// Amplitude of seeded uniform noise added to free nodes.
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
    pub dt: Option<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub rel_energy_tol: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub checkpoint_every: usize,
    pub threads: Option<usize>,
    /// Singular threshold on `W`; defaults to half the potential at zero.
    pub threshold: Option<f64>,
}

/// Values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub checkpoint_every: Option<usize>,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn env_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Merges file text, environment and flags into a validated configuration.
pub fn parse_config(text: &str, env: impl Fn(&str) -> Option<String>, overrides: &Overrides) -> Result<RunConfig> {
    let mut table: toml::Table = text.parse().map_err(config_err)?;
    for key in KEYS {
        if let Some(raw) = env(&format!("{ENV_PREFIX}{}", key.to_uppercase())) {
            table.insert(key.to_string(), env_value(&raw));
        }
    }
    if let Some(s) = overrides.seed {
        table.insert("seed".into(), toml::Value::Integer(s as i64));
    }
    if let Some(t) = overrides.threads {
        table.insert("threads".into(), toml::Value::Integer(t as i64));
    }
    if let Some(k) = overrides.checkpoint_every {
        table.insert("checkpoint_every".into(), toml::Value::Integer(k as i64));
    }
    let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(config_err)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads `path` and applies the process environment and `overrides`.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, |k| std::env::var(k).ok(), overrides)
}

impl RunConfig {
    /// Checks everything that can be checked without allocating the grid.
    pub fn validate(&self) -> Result<()> {
        let wrap = |r: Result<()>| r.map_err(|e| Error::Config(e.to_string()));
        wrap(self.shape.validate())?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Config(format!("h must be positive, got {}", self.h)));
        }
        wrap(self.field_params().validate(self.bc_mode))?;
        if self.bc_mode == BcMode::Weak && (self.delta1.is_none() || self.delta2.is_none()) {
            return Err(Error::Config("weak boundary conditions need delta1 and delta2".into()));
        }
        if self.target == Target::Mb && self.shape.dim() != 2 {
            return Err(Error::Config("Mercedes-Benz fields need a planar shape".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.dt.is_some_and(|dt| !(dt > 0.0)) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Config("noise must be non-negative".into()));
        }
        self.init.to_seed().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(b) = &self.boundary {
            b.to_seed().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn field_params(&self) -> FieldParams {
        FieldParams::new(self.eps, self.delta1.unwrap_or(1.0), self.delta2.unwrap_or(1.0))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            max_iters: self.max_iters,
            rel_energy_tol: self.rel_energy_tol,
            window: self.window,
            checkpoint_every: self.checkpoint_every,
            ..Default::default()
        }
    }

    pub fn boundary_spec(&self) -> &InitSpec {
        self.boundary.as_ref().unwrap_or(&self.init)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
shape = { kind = "disk", radius = 1.0 }
h = 0.05
target = "tetra"
bc_mode = "strong"
eps = 0.05
init = { kind = "escape_map" }
"#;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn parses_with_defaults() {
        let c = parse_config(BASE, no_env, &Overrides::default()).unwrap();
        assert_eq!(c.shape, Shape::Disk { radius: 1.0 });
        assert_eq!(c.max_iters, 100_000);
        assert_eq!(c.seed, 0);
        assert_eq!(c.boundary_spec(), &InitSpec::EscapeMap);
    }

    #[test]
    fn missing_and_unknown_keys_are_config_errors() {
        let missing = BASE.replace("h = 0.05\n", "");
        assert!(matches!(parse_config(&missing, no_env, &Overrides::default()), Err(Error::Config(m)) if m.contains("h")));
        let unknown = format!("{BASE}\nbogus = 1\n");
        assert!(matches!(parse_config(&unknown, no_env, &Overrides::default()), Err(Error::Config(_))));
        let weak = BASE.replace("\"strong\"", "\"weak\"");
        assert!(matches!(parse_config(&weak, no_env, &Overrides::default()), Err(Error::Config(_))));
    }

    #[test]
    fn precedence_is_file_env_flags() {
        let env = |k: &str| match k {
            "TETRAFRAME_SEED" => Some("9".to_string()),
            "TETRAFRAME_EPS" => Some("0.125".to_string()),
            "TETRAFRAME_BC_MODE" => Some("weak".to_string()),
            "TETRAFRAME_DELTA1" => Some("0.5".to_string()),
            "TETRAFRAME_DELTA2" => Some("0.5".to_string()),
            "TETRAFRAME_SHAPE" => Some("{ kind = \"ball\", radius = 2.0 }".to_string()),
            _ => None,
        };
        let c = parse_config(BASE, env, &Overrides::default()).unwrap();
        assert_eq!((c.seed, c.eps, c.bc_mode), (9, 0.125, BcMode::Weak));
        assert_eq!(c.shape, Shape::Ball { radius: 2.0 });
        let c = parse_config(BASE, env, &Overrides { seed: Some(3), ..Default::default() }).unwrap();
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn defect_specs_parse() {
        let text = BASE.replace(
            "init = { kind = \"escape_map\" }",
            "init = { kind = \"quaternion_boundary\", rho = 0.1, defects = [{ center = [0.4, 0.0], alpha = \"s\" }, { center = [-0.4, 0.0], alpha = \"s^-1\" }] }",
        );
        let c = parse_config(&text, no_env, &Overrides::default()).unwrap();
        match c.init.to_seed().unwrap() {
            SeedSpec::QuaternionBoundary { defects, .. } => {
                assert_eq!(defects[1].alpha, BinaryTetraElement::s().inverse());
                assert_eq!(defects[0].beta, BinaryTetraElement::one());
            }
            other => panic!("{other:?}"),
        }
        let bad = text.replace("\"s\"", "\"x\"");
        assert!(parse_config(&bad, no_env, &Overrides::default()).is_err());
    }
}
