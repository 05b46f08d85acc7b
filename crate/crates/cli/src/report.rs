//! The JSON report envelope and per-command payloads.

use serde::{Deserialize, Serialize};
use toric_chords::capacities::{CapacityReport, LagrangianCapacity, Tolerances};
use toric_chords::starshaped_flow::{ChordSearch, DIST_TOL, DRIFT_ABORT, GENUINE_SEPARATION, SURFACE_TOL};
use toric_chords::toric_reeb::{ChordRecord, ChordSupremum, RationalFiber, SkippedDirection};
use toric_chords::MonotonicityReport;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo { name: "toric-chords".into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowTolerances {
    pub rtol: f64,
    pub atol: f64,
    pub surface: f64,
    pub drift_abort: f64,
    pub chord_distance: f64,
    pub genuine_separation: f64,
}

impl Default for FlowTolerances {
    fn default() -> Self {
        FlowTolerances {
            rtol: 1e-10,
            atol: 1e-12,
            surface: SURFACE_TOL,
            drift_abort: DRIFT_ABORT,
            chord_distance: DIST_TOL,
            genuine_separation: GENUINE_SEPARATION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceBlock {
    pub capacities: Tolerances,
    pub flow: FlowTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub generated_at: String,
    pub command: String,
    pub config: RunConfig,
    pub tolerances: ToleranceBlock,
    pub payload: Payload,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Capacities(CapacitiesPayload),
    Orbits(OrbitsPayload),
    Chords(ChordsPayload),
    Verify(CapacityReport),
    PerturbStudy(PerturbStudyPayload),
    Counterexample(CapacityReport),
    PlotData(PlotDataPayload),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitiesPayload {
    pub label: String,
    pub monotonicity: MonotonicityReport,
    pub c_gromov: Option<f64>,
    pub c_cube: Option<f64>,
    pub c_lagrangian: Option<LagrangianCapacity>,
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitsPayload {
    pub label: String,
    pub height: i64,
    pub minimum: Option<RationalFiber>,
    pub fibers: Vec<RationalFiber>,
    pub skipped: Vec<SkippedDirection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordsPayload {
    pub label: String,
    pub legendrian_m: Vec<i64>,
    pub legendrian_phase: f64,
    pub scale: f64,
    pub closed_form: ChordRecord,
    pub integrated_period: Option<f64>,
    pub supremum: Option<ChordSupremum>,
    pub search: Option<ChordSearch>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbRow {
    pub amplitude: f64,
    pub c1_distance: f64,
    pub legendrian_defect: f64,
    pub chords_found: usize,
    pub min_period: Option<f64>,
    pub below_margin: bool,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbStudyPayload {
    pub label: String,
    pub seed: u64,
    pub width: f64,
    pub count: usize,
    pub legendrian_m: Vec<i64>,
    pub toric_a_min: f64,
    pub kappa: f64,
    /// `toric_a_min - kappa / 2`.
    pub margin: f64,
    pub t_max: f64,
    pub rows: Vec<PerturbRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotFile {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotDataPayload {
    pub label: String,
    pub files: Vec<PlotFile>,
}

impl ReportEnvelope {
    pub fn new(command: &str, config: &RunConfig, payload: Payload, warnings: Vec<String>) -> Self {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: command.to_string(),
            config: config.clone(),
            tolerances: ToleranceBlock {
                capacities: Tolerances { claim: config.numeric.tol_claim, ..Tolerances::default() },
                flow: FlowTolerances::default(),
            },
            payload,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
