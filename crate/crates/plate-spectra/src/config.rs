//! Experiment configuration: one JSON document drives every subcommand.
//!
//! Example:
//!
//! ```json
//! {
//!   "L": 1.0,
//!   "profile": {"cos": [0.2, 0.2], "sin": []},
//!   "eps": 0.125,
//!   "alpha": 1.5,
//!   "grid": {"nx": 16, "ny": 16},
//!   "bc": {"kind": "intermediate"},
//!   "eigen_count": 5,
//!   "tolerance": 5e-4,
//!   "eps_sweep": [0.125, 0.0625, 0.03125],
//!   "alpha_sweep": [2.0, 1.5, 1.0],
//!   "refine_levels": [8, 16, 32],
//!   "strange_sign": -1.0,
//!   "seed": 0
//! }
//! ```
//!
//! Every field has a default, so `{}` (or omitting `--config`) runs the
//! canonical desk-scale setup with `b = 0.2(1 + cos 2πy)`.

use crate::error::{Error, Result};
use crate::fem::{BcKind, Grid};
use crate::geometry::DomainSpec;
use crate::profile::Profile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Lateral period of the strip.
    #[serde(rename = "L", default = "default_length")]
    pub length: f64,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    /// Single-run oscillation scale (sweeps override it per point).
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Single-run oscillation exponent.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_bc")]
    pub bc: BcKind,
    #[serde(default = "default_eigen_count")]
    pub eigen_count: usize,
    /// Acceptance tolerance of table comparisons (relative).
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Strictly decreasing list of ε values; each must divide `L` into whole
    /// oscillation cells and be resolvable by the grid rules below.
    #[serde(default = "default_eps_sweep")]
    pub eps_sweep: Vec<f64>,
    #[serde(default = "default_alpha_sweep")]
    pub alpha_sweep: Vec<f64>,
    /// Grid sizes (cells per direction) of the refinement study.
    #[serde(default = "default_refine_levels")]
    pub refine_levels: Vec<usize>,
    /// Sign of the strange boundary term added to the quadratic form;
    /// −1 is the literal reading of the critical-case limit problem.
    #[serde(default = "default_strange_sign")]
    pub strange_sign: f64,
    /// Lateral grid cells per oscillation period in perturbed solves (≥ 8).
    #[serde(default = "default_cells_per_period")]
    pub cells_per_period: usize,
    /// Grid rows inside the matching layer `(−ε, 0)` in perturbed solves.
    #[serde(default = "default_layer_rows")]
    pub layer_rows: usize,
    /// Lower bound for the vertical cell count of generated grids.
    #[serde(default = "default_min_ny")]
    pub min_ny: usize,
    /// Truncated-strip oracle depth (`≤ −4`) and grid size (`≥ 200`).
    #[serde(default = "default_cell_depth")]
    pub cell_depth: f64,
    #[serde(default = "default_cell_grid")]
    pub cell_grid: usize,
    /// Residual tolerance handed to the eigensolver.
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
}

fn default_length() -> f64 {
    1.0
}
fn default_profile() -> Profile {
    Profile::cosine(0.2).expect("reference profile is admissible")
}
fn default_eps() -> f64 {
    0.125
}
fn default_alpha() -> f64 {
    1.5
}
fn default_bc() -> BcKind {
    BcKind::Intermediate
}
fn default_eigen_count() -> usize {
    5
}
fn default_tolerance() -> f64 {
    5e-4
}
fn default_eps_sweep() -> Vec<f64> {
    vec![0.125, 0.0625, 0.03125]
}
fn default_alpha_sweep() -> Vec<f64> {
    vec![2.0, 1.5, 1.0]
}
fn default_refine_levels() -> Vec<usize> {
    vec![8, 16, 32]
}
fn default_strange_sign() -> f64 {
    -1.0
}
fn default_cells_per_period() -> usize {
    8
}
fn default_layer_rows() -> usize {
    2
}
fn default_min_ny() -> usize {
    16
}
fn default_cell_depth() -> f64 {
    -6.0
}
fn default_cell_grid() -> usize {
    800
}
fn default_solver_tol() -> f64 {
    1e-6
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::invalid("L must be positive"));
        }
        if self.eps_sweep.is_empty() || self.alpha_sweep.is_empty() || self.refine_levels.is_empty()
        {
            return Err(Error::invalid("sweeps must be non-empty"));
        }
        if !self.eps_sweep.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::invalid("eps sweep must be strictly decreasing"));
        }
        if self.strange_sign != 1.0 && self.strange_sign != -1.0 {
            return Err(Error::invalid("strange_sign must be +1 or -1"));
        }
        if self.cells_per_period < 8 {
            return Err(Error::invalid(
                "grids must resolve each period with at least 8 cells",
            ));
        }
        if self.layer_rows == 0 {
            return Err(Error::invalid("layer_rows must be positive"));
        }
        for &eps in &self.eps_sweep {
            self.inverse_eps(eps)?;
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }

    fn inverse_eps(&self, eps: f64) -> Result<usize> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid("eps must lie in (0, 1)"));
        }
        let m = 1.0 / eps;
        if (m - m.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "1/eps = {m} must be an integer so grids align with the layer"
            )));
        }
        Ok(m.round() as usize)
    }

    /// Grid used for the single-run limit problems.
    pub fn limit_grid(&self) -> Result<Grid> {
        Grid::new(
            self.grid.nx.unwrap_or(16),
            self.grid.ny.unwrap_or(16),
            self.length,
        )
    }

    /// Layer-aligned grid for a perturbed solve at `eps`: at least
    /// `cells_per_period` cells per oscillation period laterally, and a
    /// vertical count that is a multiple of `1/ε` (so one grid line sits at
    /// `x_N = −ε`) with `layer_rows` rows inside the layer.
    pub fn perturbed_grid(&self, eps: f64) -> Result<Grid> {
        let m = self.inverse_eps(eps)?;
        let periods = (self.length * m as f64).round() as usize;
        if periods == 0 || (self.length * m as f64 - periods as f64).abs() > 1e-9 {
            return Err(Error::invalid("L/eps must be a positive integer"));
        }
        let nx = self.cells_per_period * periods;
        let rows = self.layer_rows.max(self.min_ny.div_ceil(m));
        Grid::new(nx, rows * m, self.length)
    }

    /// Domain spec for one sweep point.
    pub fn domain_at(&self, eps: f64, alpha: f64) -> Result<DomainSpec> {
        DomainSpec::new(self.length, eps, alpha, self.profile.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_canonical() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.length, 1.0);
        assert_eq!(cfg.eps_sweep.len(), 3);
        assert_eq!(cfg.strange_sign, -1.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn grid_rules_align_layers() {
        let cfg = ExperimentConfig::default();
        for &eps in &[0.125, 0.0625, 0.03125] {
            let g = cfg.perturbed_grid(eps).unwrap();
            assert!(g.has_line_at(eps), "eps {eps} grid {g:?}");
            assert!(eps / g.hx() >= 8.0 - 1e-9);
            assert!(g.ny >= cfg.min_ny);
        }
    }

    #[test]
    fn validation_rejects_bad_sweeps() {
        let bad = r#"{"eps_sweep": [0.125, 0.125]}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let bad = r#"{"eps_sweep": [0.3]}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let bad = r#"{"strange_sign": 0.5}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let bad = r#"{"cells_per_period": 4}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
    }

    #[test]
    fn bc_wire_format() {
        let cfg = ExperimentConfig::from_json(
            r#"{"bc": {"kind": "strange_term", "gamma": 7.4, "sign": -1.0}}"#,
        )
        .unwrap();
        match cfg.bc {
            BcKind::StrangeTerm { gamma, sign } => {
                assert_eq!(gamma, 7.4);
                assert_eq!(sign, -1.0);
            }
            _ => panic!("wrong bc"),
        }
    }
}
