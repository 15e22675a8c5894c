//! Run configuration and the assembled pipeline it describes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::characteristics::{enforce_alternating_init, Primitive, Solver, SolverOptions};
use crate::error::{Error, Result};
use crate::kernels::{Inhomogeneities, TableOptions};
use crate::quadrature::{ArcRule, CircleRule};
use crate::zoo::{Cocycle, CocycleSpec};

/// Environment variable holding the default output directory.
pub const OUTPUT_DIR_ENV: &str = "COBOUND_OUTPUT_DIR";

/// How circle averages are discretised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadratureSpec {
    /// Breakpoint-aware arc rule, graded unless the cocycle is piecewise constant.
    Auto,
    /// Uniform midpoint rule with `quadrature_nodes` nodes.
    Midpoint,
    Arc {
        order: usize,
        max_piece: f64,
        #[serde(default)]
        grading: f64,
        #[serde(default)]
        min_piece: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cocycle: CocycleSpec,
    pub quadrature: QuadratureSpec,
    /// `N` for the midpoint rule and the base of convergence ladders.
    pub quadrature_nodes: usize,
    /// `M`, the number of knots of the kernel table.
    pub check_grid: usize,
    pub fd_step: f64,
    /// Width of the band next to `0` and `2 pi` where table values are extrapolated.
    pub guard: f64,
    pub seed: u64,
    /// Samples per check.
    pub samples: usize,
    /// Per-check tolerance overrides keyed by check id.
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub output_dir: Option<PathBuf>,
    pub init_values: (f64, f64),
    /// Keep `init_values` as given instead of projecting to `(a, -a)`.
    pub general_init: bool,
    pub solver: SolverOptions,
    /// Run every check against its planted violation instead of the real object.
    pub negative_control: bool,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cocycle: CocycleSpec::default(),
            quadrature: QuadratureSpec::Auto,
            quadrature_nodes: 128,
            check_grid: 513,
            fd_step: 1e-4,
            guard: 1e-6,
            seed: 0,
            samples: 20,
            tolerance_overrides: BTreeMap::new(),
            output_dir: None,
            init_values: (0.0, 0.0),
            general_init: false,
            solver: SolverOptions::default(),
            negative_control: false,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.quadrature_nodes == 0 {
            return bad("quadrature_nodes must be positive".into());
        }
        if self.check_grid < 8 {
            return bad(format!("check_grid = {} is too small", self.check_grid));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.1) {
            return bad(format!("fd_step = {} out of range", self.fd_step));
        }
        if !(self.guard > 0.0 && self.guard < 0.5) {
            return bad(format!("guard = {} out of range", self.guard));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if !(self.init_values.0.is_finite() && self.init_values.1.is_finite()) {
            return bad("init_values must be finite".into());
        }
        if let QuadratureSpec::Arc { order, max_piece, .. } = self.quadrature {
            if order == 0 || !(max_piece > 0.0) {
                return bad("arc rule needs order > 0 and max_piece > 0".into());
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, ignoring
    /// `threads` and `output_dir`.
    pub fn hash(&self) -> String {
        let numeric = RunConfig {
            threads: None,
            output_dir: None,
            ..self.clone()
        };
        let json = serde_json::to_string(&numeric).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    /// Output directory: the configured one, else the environment variable, else `./out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// The init pair actually used.
    pub fn effective_init(&self) -> (f64, f64) {
        if self.general_init {
            self.init_values
        } else {
            enforce_alternating_init(self.init_values.0, self.init_values.1)
        }
    }

    pub fn tolerance(&self, check_id: &str, default: f64) -> f64 {
        self.tolerance_overrides.get(check_id).copied().unwrap_or(default)
    }

    pub fn table_options(&self) -> TableOptions {
        TableOptions {
            size: self.check_grid,
            guard: self.guard,
            ..TableOptions::default()
        }
    }
}

/// Default arc rule for a cocycle: graded pieces unless it is piecewise constant.
pub fn default_rule(cocycle: &Cocycle) -> CircleRule {
    let rule = ArcRule::new(6, PI / 2.0).expect("valid rule");
    if cocycle.claims.piecewise_constant {
        CircleRule::Arc(rule)
    } else {
        CircleRule::Arc(rule.with_grading(2.0).with_min_piece(0.05))
    }
}

/// Cocycle, quadrature rule and the lazily built solver stages for one config.
#[derive(Debug)]
pub struct Pipeline {
    pub config: RunConfig,
    pub cocycle: Cocycle,
    pub rule: CircleRule,
    inh: OnceLock<Arc<Inhomogeneities>>,
    solver: OnceLock<Arc<Solver>>,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let cocycle = Cocycle::build(&config.cocycle)?;
        let rule = match &config.quadrature {
            QuadratureSpec::Auto => default_rule(&cocycle),
            QuadratureSpec::Midpoint => CircleRule::midpoint(config.quadrature_nodes)?,
            QuadratureSpec::Arc {
                order,
                max_piece,
                grading,
                min_piece,
            } => CircleRule::Arc(ArcRule::new(*order, *max_piece)?.with_grading(*grading).with_min_piece(*min_piece)),
        };
        Ok(Pipeline {
            config,
            cocycle,
            rule,
            inh: OnceLock::new(),
            solver: OnceLock::new(),
        })
    }

    pub fn inhomogeneities(&self) -> Result<Arc<Inhomogeneities>> {
        if let Some(i) = self.inh.get() {
            return Ok(i.clone());
        }
        let built = Arc::new(Inhomogeneities::build(
            &self.cocycle.cochain,
            &self.rule,
            self.config.table_options(),
        )?);
        Ok(self.inh.get_or_init(|| built).clone())
    }

    pub fn solver(&self) -> Result<Arc<Solver>> {
        if let Some(s) = self.solver.get() {
            return Ok(s.clone());
        }
        let (plus, minus) = self.config.effective_init();
        let built = Arc::new(Solver::new(self.inhomogeneities()?, self.config.solver)?.with_init(plus, minus));
        Ok(self.solver.get_or_init(|| built).clone())
    }

    pub fn primitive(&self) -> Result<Primitive> {
        Ok(Primitive::new(self.solver()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_hash_is_stable() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        let other = RunConfig {
            seed: 1,
            ..RunConfig::default()
        };
        assert_ne!(cfg.hash(), other.hash());
        assert_eq!(cfg.hash().len(), 16);
        let threaded = RunConfig {
            threads: Some(4),
            ..RunConfig::default()
        };
        assert_eq!(cfg.hash(), threaded.hash());
    }

    #[test]
    fn partial_config_uses_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"cocycle": {"kind": "zero"}, "seed": 5}"#).unwrap();
        assert_eq!(cfg.cocycle, CocycleSpec::Zero);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.check_grid, RunConfig::default().check_grid);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 5}"#).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for cfg in [
            RunConfig {
                fd_step: 0.0,
                ..Default::default()
            },
            RunConfig {
                guard: -1.0,
                ..Default::default()
            },
            RunConfig {
                check_grid: 2,
                ..Default::default()
            },
            RunConfig {
                init_values: (f64::NAN, 0.0),
                ..Default::default()
            },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn init_is_projected_unless_general() {
        let cfg = RunConfig {
            init_values: (2.0, 0.0),
            ..Default::default()
        };
        assert_eq!(cfg.effective_init(), (1.0, -1.0));
        let cfg = RunConfig { general_init: true, ..cfg };
        assert_eq!(cfg.effective_init(), (2.0, 0.0));
    }
}
