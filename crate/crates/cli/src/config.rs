//! Run configuration: a TOML file with `[domain]`, `[numeric]`,
//! `[perturbation]` and `[output]` tables. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toric_chords::{MomentRegion, Shape};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Capacities,
    Orbits,
    Chords,
    Verify,
    PerturbStudy,
    Counterexample,
    PlotData,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Capacities => "capacities",
            CommandKind::Orbits => "orbits",
            CommandKind::Chords => "chords",
            CommandKind::Verify => "verify",
            CommandKind::PerturbStudy => "perturb-study",
            CommandKind::Counterexample => "counterexample",
            CommandKind::PlotData => "plot-data",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericConfig {
    pub orbit_height: i64,
    pub chord_height: i64,
    pub gromov_grid: usize,
    pub tol_claim: f64,
    pub seed: u64,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    pub threads: usize,
    pub legendrian_m: Option<Vec<i64>>,
    pub legendrian_phase: f64,
    /// Horizon of the numerical chord search; defaults to twice the Gromov width.
    pub chord_t_max: Option<f64>,
    pub chord_s_count: usize,
    pub chord_t_count: usize,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            orbit_height: 50,
            chord_height: 20,
            gromov_grid: 10_000,
            tol_claim: 1e-6,
            seed: 2024,
            threads: 0,
            legendrian_m: None,
            legendrian_phase: 0.0,
            chord_t_max: None,
            chord_s_count: 16,
            chord_t_count: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub amplitudes: Vec<f64>,
    pub width: f64,
    pub count: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig { amplitudes: vec![0.01, 0.02], width: 0.5, count: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub json: bool,
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, json: true, csv: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_domain")]
    pub domain: Shape,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_domain() -> Shape {
    Shape::Ellipsoid { axes: vec![1.0, 2.0] }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: default_domain(),
            numeric: NumericConfig::default(),
            perturbation: PerturbationConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Values given on the command line or through the environment.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub height: Option<i64>,
    pub threads: Option<usize>,
    pub json: bool,
    pub csv: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output.dir = Some(out.clone());
        }
        if let Some(seed) = o.seed {
            self.numeric.seed = seed;
        }
        if let Some(h) = o.height {
            self.numeric.orbit_height = h;
            self.numeric.chord_height = h;
        }
        if let Some(t) = o.threads {
            self.numeric.threads = t;
        }
        if o.json || o.csv {
            self.output.json = o.json;
            self.output.csv = o.csv;
        }
    }

    /// Bounds-checks every numeric setting and builds the region.
    pub fn validate(&self) -> Result<MomentRegion, CliError> {
        let region = MomentRegion::from_shape(self.domain.clone()).map_err(|e| CliError::Config(e.to_string()))?;
        let n = &self.numeric;
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(20..=500).contains(&n.orbit_height) {
            return bad(format!("numeric.orbit_height must lie in [20, 500], got {}", n.orbit_height));
        }
        if !(10..=500).contains(&n.chord_height) {
            return bad(format!("numeric.chord_height must lie in [10, 500], got {}", n.chord_height));
        }
        if !(10_000..=10_000_000).contains(&n.gromov_grid) {
            return bad(format!("numeric.gromov_grid must lie in [10000, 10000000], got {}", n.gromov_grid));
        }
        if !(n.tol_claim > 0.0 && n.tol_claim <= 1e-2) {
            return bad(format!("numeric.tol_claim must lie in (0, 0.01], got {}", n.tol_claim));
        }
        if n.threads > 1024 {
            return bad(format!("numeric.threads must be at most 1024, got {}", n.threads));
        }
        if let Some(m) = &n.legendrian_m {
            if m.len() != region.dim() || m.iter().any(|&k| k <= 0 || k > 1000) {
                return bad(format!("numeric.legendrian_m must have {} entries in [1, 1000], got {m:?}", region.dim()));
            }
        }
        if !n.legendrian_phase.is_finite() {
            return bad("numeric.legendrian_phase must be finite".into());
        }
        if let Some(t) = n.chord_t_max {
            if !(t > 0.0 && t <= 1000.0) {
                return bad(format!("numeric.chord_t_max must lie in (0, 1000], got {t}"));
            }
        }
        if !(1..=256).contains(&n.chord_s_count) {
            return bad(format!("numeric.chord_s_count must lie in [1, 256], got {}", n.chord_s_count));
        }
        if !(3..=100_000).contains(&n.chord_t_count) {
            return bad(format!("numeric.chord_t_count must lie in [3, 100000], got {}", n.chord_t_count));
        }
        let p = &self.perturbation;
        if p.amplitudes.is_empty() || p.amplitudes.iter().any(|a| !(*a >= 0.0 && *a <= 0.5)) {
            return bad(format!(
                "perturbation.amplitudes must be nonempty with entries in [0, 0.5], got {:?}",
                p.amplitudes
            ));
        }
        if !(p.width > 0.0 && p.width <= std::f64::consts::PI) {
            return bad(format!("perturbation.width must lie in (0, pi], got {}", p.width));
        }
        if !(1..=64).contains(&p.count) {
            return bad(format!("perturbation.count must lie in [1, 64], got {}", p.count));
        }
        Ok(region)
    }
}
