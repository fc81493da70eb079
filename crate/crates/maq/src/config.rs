//! JSON experiment configuration. Every section and field is optional;
//! missing values take the defaults below. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use maq_core::degeneration::{Family, Thresholds, Verdict, Window};
use maq_core::hyp3::{CatalogKind, GeodesicH3, Isometry};
use maq_core::ma_pde::NewtonOptions;
use maq_core::Grid2D;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When present, must name the command being run.
    pub command: Option<String>,
    pub seed: Option<u64>,
    /// Output directory, overridden by `--out`.
    pub out: Option<PathBuf>,
    pub algebra: AlgebraConfig,
    pub plane: PlaneConfig,
    pub field: FieldConfig,
    pub counterexample: CounterexampleConfig,
    pub flat: FlatConfig,
    pub tube: TubeConfig,
    pub degenerate: DegenerateConfig,
    pub solve: SolveConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Err(CliError::config("configuration file is empty"));
        }
        serde_json::from_str(text).map_err(CliError::config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        // relative data paths are resolved against the config's directory
        if let Some(csv) = cfg.field.csv.take() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.field.csv = Some(if csv.is_absolute() { csv } else { base.join(csv) });
        }
        Ok(cfg)
    }
}

/// Uniform grid given by node counts, lower-left node and spacing.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub h: f64,
}

impl GridSpec {
    pub fn covering(x_min: f64, x_max: f64, y_min: f64, y_max: f64, h: f64) -> Self {
        let g = Grid2D::covering(x_min, x_max, y_min, y_max, h).expect("default grid is valid");
        Self {
            nx: g.nx,
            ny: g.ny,
            origin: [g.x0, g.y0],
            h: g.h,
        }
    }

    pub fn grid(&self) -> Result<Grid2D, CliError> {
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(CliError::config("grid origin must be finite"));
        }
        Grid2D::new(self.nx, self.ny, self.origin[0], self.origin[1], self.h).map_err(CliError::config)
    }
}

/// Closed-form test potentials on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedField {
    /// `x²/y + y³/12`, defined for `y > 0`.
    Counterexample,
    /// `(x² + y²)/2`.
    Paraboloid,
    /// `x² + xy/2 + 5y²/16`.
    Quadratic,
    /// `eˣ + y²`.
    ExpSum,
    /// `xy`.
    Saddle,
}

impl NamedField {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            NamedField::Counterexample => maq_core::ma_pde::counterexample_potential(x, y),
            NamedField::Paraboloid => 0.5 * (x * x + y * y),
            NamedField::Quadratic => x * x + 0.5 * x * y + 0.3125 * y * y,
            NamedField::ExpSum => x.exp() + y * y,
            NamedField::Saddle => x * y,
        }
    }

    /// Whether `det Hess = 1` holds exactly.
    pub fn solves_unit_equation(self) -> bool {
        matches!(self, NamedField::Counterexample | NamedField::Paraboloid | NamedField::Quadratic)
    }

    pub fn check_domain(self, g: &Grid2D) -> Result<(), CliError> {
        if self == NamedField::Counterexample && g.y0 <= 0.0 {
            return Err(CliError::config("counterexample potential needs y > 0 on the whole grid"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraConfig {
    /// Random quaternion pairs for the norm and double-cover checks.
    pub pairs: usize,
    /// Random planes for the calibration identity.
    pub planes: usize,
    /// Random rotated imaginary triples, each tried on ten planes.
    pub frames: usize,
    /// Random matrices for the lagrangian lexicon.
    pub matrices: usize,
    pub norm_rel: f64,
    pub kernel: f64,
    pub calibration: f64,
    pub lexicon: f64,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            pairs: 10_000,
            planes: 1000,
            frames: 100,
            matrices: 10_000,
            norm_rel: 1e-12,
            kernel: 1e-10,
            calibration: 1e-12,
            lexicon: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedFlags {
    pub omega_i: bool,
    pub omega_j: bool,
    pub omega_k: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneConfig {
    /// Rows of the matrix whose graph is classified.
    pub a: [[f64; 2]; 2],
    pub expect: Option<ExpectedFlags>,
}

impl Default for PlaneConfig {
    fn default() -> Self {
        Self {
            a: [[2.0, 0.0], [0.0, 0.5]],
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    /// Analytic potential sampled on `grid`; ignored when `csv` is given.
    pub name: NamedField,
    /// Field file in the scalar-field CSV layout.
    pub csv: Option<PathBuf>,
    pub grid: GridSpec,
    /// Bound on `max |det Hess_h u − 1|`.
    pub residual_tol: f64,
    /// Interior nodes sampled for the positivity cross-check.
    pub samples: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            name: NamedField::Counterexample,
            csv: None,
            grid: GridSpec::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 32.0),
            residual_tol: 1e-2,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    /// Bottom edge of the half-plane window.
    pub y0: f64,
    pub x_range: [f64; 2],
    pub height: f64,
    /// Coarsest spacing of the refinement study.
    pub h: f64,
    pub levels: usize,
    pub samples: usize,
    pub det_tol: f64,
    pub gradient_tol: f64,
    pub tangent_tol: f64,
    pub order_min: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            y0: 0.5,
            x_range: [-1.0, 1.0],
            height: 1.0,
            h: 1.0 / 32.0,
            levels: 3,
            samples: 1000,
            det_tol: 1e-12,
            gradient_tol: 1e-12,
            tangent_tol: 1e-10,
            order_min: 1.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatConfig {
    pub surface: CatalogKind,
    pub motion: Isometry,
    pub window: Window,
    pub h: f64,
    pub levels: usize,
    pub order_min: f64,
    /// Bound on the shape-operator eigenvalue error at the finest level.
    pub shape_tol: f64,
}

impl Default for FlatConfig {
    fn default() -> Self {
        Self {
            surface: CatalogKind::Horosphere { c: 1.0 },
            motion: Isometry::Flip {
                center: [0.3, -0.2],
                radius: 1.5,
            },
            window: Window::new(-1.0, 1.0, -1.0, 1.0).expect("default window"),
            h: 1.0 / 16.0,
            levels: 3,
            order_min: 1.8,
            shape_tol: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub geodesic: GeodesicH3,
    pub s_range: [f64; 2],
    pub theta_range: [f64; 2],
    pub h: f64,
    pub phi: Vec<f64>,
    pub m_tol: f64,
    pub invariance_tol: f64,
    pub projection_tol: f64,
}

impl Default for TubeConfig {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        Self {
            geodesic: GeodesicH3::Vertical { x0: 0.0, y0: 0.0 },
            s_range: [-0.01, 0.01],
            theta_range: [-pi, -pi + 0.02],
            h: 1e-3,
            phi: vec![-0.5, 0.0, 0.7],
            m_tol: 1e-8,
            invariance_tol: 1e-8,
            projection_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegenerateConfig {
    pub family: Family,
    pub window: Window,
    pub thresholds: Thresholds,
    pub h: f64,
    pub margin: f64,
    /// Expected verdict of the last step; by default tube-like for the
    /// equidistant family and surface-like for horospheres.
    pub expect: Option<Verdict>,
}

impl Default for DegenerateConfig {
    fn default() -> Self {
        let opts = maq_core::degeneration::ExperimentOptions::default();
        Self {
            family: Family::Equidistant { d: vec![0.5, 0.1, 0.02] },
            window: Window::new(-1.0, 1.0, -1.0, 1.0).expect("default window"),
            thresholds: Thresholds::default(),
            h: opts.h,
            margin: opts.margin,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub convexity_floor: f64,
    pub min_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let o = NewtonOptions::default();
        Self {
            tol: o.tol,
            max_iter: o.max_iter,
            convexity_floor: o.convexity_floor,
            min_step: o.min_step,
        }
    }
}

impl NewtonConfig {
    pub fn options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            convexity_floor: self.convexity_floor,
            min_step: self.min_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub grid: GridSpec,
    /// Dirichlet data, taken from this potential on the boundary nodes.
    pub boundary: NamedField,
    pub newton: NewtonConfig,
    /// Bound on the nodal error against `boundary` when it solves the
    /// equation exactly.
    pub error_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::covering(-1.0, 1.0, 1.0, 2.0, 1.0 / 16.0),
            boundary: NamedField::Counterexample,
            newton: NewtonConfig::default(),
            error_tol: 1e-3,
        }
    }
}

/// Positive and finite.
pub(crate) fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be positive and finite")))
    }
}

pub(crate) fn nonnegative(name: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be non-negative and finite")))
    }
}

pub(crate) fn range(name: &str, r: [f64; 2]) -> Result<[f64; 2], CliError> {
    if r[0].is_finite() && r[1].is_finite() && r[0] < r[1] {
        Ok(r)
    } else {
        Err(CliError::config(format!("{name} must be an increasing pair of finite numbers")))
    }
}
