//! TOML experiment configuration. Unknown keys anywhere are errors.

use nlplateau::domain::{Domain1D, ExteriorData, ObstacleRegion, ObstacleSpec, Psi};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {msg}")]
    Read { path: PathBuf, msg: String },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainSection,
    pub exterior: ExteriorSection,
    #[serde(default = "ObstacleSection::none")]
    pub obstacle: ObstacleSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub a: f64,
    pub b: f64,
    /// Exterior window width W; defaults to 10 diam.
    pub window: Option<f64>,
    pub h: f64,
    /// Vertical truncation M; defaults to the a priori bound plus one.
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExteriorSection {
    Constant { c: f64 },
    Affine { c: f64, m: f64 },
    Cone { c: f64, m: f64, kappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSection {
    Empty,
    Interval { c: f64, d: f64 },
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSection {
    Constant { v: f64 },
    Quadratic { c0: f64, c1: f64, c2: f64 },
    Sine { amp: f64, freq: f64, phase: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSection {
    pub region: RegionSection,
    pub psi: PsiSection,
    #[serde(default = "one")]
    pub eps: f64,
}

fn one() -> f64 {
    1.0
}

impl ObstacleSection {
    fn none() -> Self {
        ObstacleSection { region: RegionSection::Empty, psi: PsiSection::Constant { v: 0.0 }, eps: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "dim")]
    pub n: u32,
    /// Order for `solve`.
    pub s: Option<f64>,
}

fn dim() -> u32 {
    1
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection { n: 1, s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub s_values: Vec<f64>,
    /// Thresholds `k`; empty means `[k0]`.
    #[serde(default)]
    pub k_levels: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    /// Skip the alpha-bar precondition for data certified by other means.
    #[serde(default)]
    pub certified_alpha: bool,
    /// Re-solve the first order with the window doubled.
    #[serde(default)]
    pub window_check: bool,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_iters() -> usize {
    400
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            s_values: Vec::new(),
            k_levels: Vec::new(),
            tol: default_tol(),
            max_iters: default_iters(),
            certified_alpha: false,
            window_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub profiles: bool,
    /// Write measured wall times into rows.csv (which then is not
    /// reproducible byte for byte).
    #[serde(default)]
    pub wall_clock: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir(), profiles: true, wall_clock: false }
    }
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let c: Config = toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read { path: path.to_path_buf(), msg: e.to_string() })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.domain()?;
        if !(self.domain.h > 0.0) {
            return bad(format!("grid spacing {} must be positive", self.domain.h));
        }
        if self.kernel.n != 1 {
            return bad(format!("only n = 1 is supported, got {}", self.kernel.n));
        }
        let s = &self.sweep.s_values;
        if s.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("s_values {s:?} must be strictly decreasing inside (0, 1)"));
        }
        if let Some(s) = self.kernel.s {
            if !(s > 0.0 && s < 1.0) {
                return bad(format!("kernel order {s} outside (0, 1)"));
            }
        }
        if !(self.sweep.tol > 0.0) {
            return bad(format!("tolerance {} must be positive", self.sweep.tol));
        }
        if self.sweep.k_levels.iter().any(|k| !(*k > 0.0)) {
            return bad(format!("k_levels {:?} must be positive", self.sweep.k_levels));
        }
        let k0 = self.k0()?;
        if let Some(k) = self.sweep.k_levels.iter().find(|&&k| k < k0) {
            return bad(format!("k level {k} is below k0 = {k0}"));
        }
        self.obstacle().validate(&self.domain()?).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain1D, ConfigError> {
        let d = &self.domain;
        let w = d.window.unwrap_or(10.0 * (d.b - d.a));
        Domain1D::new(d.a, d.b, w).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn exterior(&self) -> ExteriorData {
        match self.exterior {
            ExteriorSection::Constant { c } => ExteriorData::Constant { c },
            ExteriorSection::Affine { c, m } => ExteriorData::Affine { c, m },
            ExteriorSection::Cone { c, m, kappa } => ExteriorData::Cone { c, m, kappa },
        }
    }

    pub fn obstacle(&self) -> ObstacleSpec {
        let o = &self.obstacle;
        let region = match o.region {
            RegionSection::Empty => ObstacleRegion::Empty,
            RegionSection::Interval { c, d } => ObstacleRegion::Interval { c, d },
            RegionSection::Full => ObstacleRegion::Full,
        };
        let psi = match o.psi {
            PsiSection::Constant { v } => Psi::Constant { v },
            PsiSection::Quadratic { c0, c1, c2 } => Psi::Quadratic { c0, c1, c2 },
            PsiSection::Sine { amp, freq, phase } => Psi::Sine { amp, freq, phase },
        };
        ObstacleSpec { region, psi, eps: o.eps }
    }

    /// `2 + ceil(max{sup |psi|, sup of |phi| over the unit ring outside Omega})`
    pub fn k0(&self) -> Result<f64, ConfigError> {
        let om = self.domain()?;
        let psi = self.obstacle().sup_abs_unscaled(&om);
        let ring = self.exterior().ring_sup(&om, 1.0);
        Ok(2.0 + psi.max(ring).ceil())
    }

    pub fn k_levels(&self) -> Result<Vec<f64>, ConfigError> {
        if self.sweep.k_levels.is_empty() {
            Ok(vec![self.k0()?])
        } else {
            Ok(self.sweep.k_levels.clone())
        }
    }
}
