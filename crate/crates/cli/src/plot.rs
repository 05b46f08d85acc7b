//! Plot-ready CSV tables for 4-dimensional domains.

use std::f64::consts::{FRAC_PI_2, TAU};

use toric_chords::capacities::gromov_width;
use toric_chords::starshaped_flow::{fiber_point, integrate_flow, FlowOptions, StarShapedDomain};
use toric_chords::toric_reeb::{legendrian_fiber, min_chord_period, reeb_angular_velocity};
use toric_chords::{moment_region, Execution, MomentRegion};

use crate::config::RunConfig;
use crate::report::{PlotDataPayload, PlotFile};
use crate::run::{num, CsvTable};
use crate::CliError;

const BOUNDARY_POINTS: usize = 400;
const LEGENDRIAN_POINTS: usize = 400;
const CHORD_POINTS: usize = 200;

pub fn plot_data(
    region: &MomentRegion,
    config: &RunConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
) -> Result<(PlotDataPayload, Vec<CsvTable>), CliError> {
    if region.dim() != 2 {
        return Err(CliError::Config("plot-data needs a 4-dimensional domain".into()));
    }
    let mut tables = Vec::new();

    let mut boundary = CsvTable::new("moment_boundary.csv", &["w1", "w2"]);
    for i in 0..=BOUNDARY_POINTS {
        let a = FRAC_PI_2 * i as f64 / BOUNDARY_POINTS as f64;
        let w = region.boundary_point(&[a.cos().max(0.0), a.sin().max(0.0)])?;
        boundary.push(vec![num(w[0]), num(w[1])]);
    }
    tables.push(boundary);

    let m = config.numeric.legendrian_m.clone().unwrap_or_else(|| vec![1, 1]);
    let torus = legendrian_fiber(region, &m, config.numeric.legendrian_phase)?;

    let mut markers = CsvTable::new("moment_markers.csv", &["kind", "w1", "w2"]);
    let corner = region.boundary_point(&[1.0, 1.0])?;
    markers.push(vec!["cube_corner".into(), num(corner[0]), num(corner[1])]);
    let mono = region.classify_monotonicity(moment_region::default_samples(2), exec)?;
    if mono.class.is_monotone() {
        let c = gromov_width(region, config.numeric.gromov_grid, exec)?.value;
        for v in [[0.0, 0.0], [c, 0.0], [0.0, c]] {
            markers.push(vec!["simplex_vertex".into(), num(v[0]), num(v[1])]);
        }
    } else {
        warnings.push("region is not monotone; simplex markers omitted".into());
    }
    let w = &torus.fiber.w;
    markers.push(vec!["legendrian_fiber".into(), num(w[0]), num(w[1])]);
    tables.push(markers);

    let mut legendrian = CsvTable::new("legendrian.csv", &["theta1", "theta2"]);
    for i in 0..=LEGENDRIAN_POINTS {
        let theta = torus.angles_at(&[TAU * i as f64 / LEGENDRIAN_POINTS as f64]);
        legendrian.push(vec![num(theta[0].rem_euclid(TAU)), num(theta[1].rem_euclid(TAU))]);
    }
    tables.push(legendrian);

    let chord = min_chord_period(&torus)?;
    let omega = reeb_angular_velocity(&torus.fiber)?;
    let mut torus_chord = CsvTable::new("torus_chord.csv", &["theta1", "theta2", "t"]);
    for i in 0..=CHORD_POINTS {
        let t = chord.period * i as f64 / CHORD_POINTS as f64;
        let theta: Vec<f64> = chord.start_angles.iter().zip(&omega).map(|(a, o)| (a + o * t).rem_euclid(TAU)).collect();
        torus_chord.push(vec![num(theta[0]), num(theta[1]), num(t)]);
    }
    tables.push(torus_chord);

    let domain = StarShapedDomain::toric(region);
    let z0 = fiber_point(w, &chord.start_angles);
    let traj = integrate_flow(&domain, &z0, chord.period, &FlowOptions::default())?;
    let mut trajectory = CsvTable::new("trajectory.csv", &["t", "x1", "y1", "x2", "y2", "H", "lambdaR"]);
    for row in traj.csv_rows() {
        trajectory.push(row.iter().map(|&x| num(x)).collect());
    }
    tables.push(trajectory);

    let files = tables
        .iter()
        .map(|t| PlotFile { name: t.name.clone(), columns: t.headers.clone(), rows: t.rows.len() })
        .collect();
    Ok((PlotDataPayload { label: region.label().to_string(), files }, tables))
}
