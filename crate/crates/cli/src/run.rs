//! Command dispatch.

use std::path::{Path, PathBuf};

use toric_chords::capacities::{
    self, gromov_width, kappa_gap, lagrangian_capacity, min_orbit_period, verify_claims, VerdictStatus, VerifyOptions,
};
use toric_chords::starshaped_flow::{
    c1_distance, find_chords, integrated_chord_period, perturb, transported_legendrian, StarShapedDomain,
    DEFAULT_C1_SAMPLES,
};
use toric_chords::toric_reeb::{enumerate_rational_fibers, legendrian_fiber, min_chord_period, sup_chord_over_fibers};
use toric_chords::{moment_region, Error, Execution, MomentRegion, Shape};

use crate::config::{CommandKind, RunConfig};
use crate::plot;
use crate::report::*;
use crate::{CliError, EXIT_OK, EXIT_VERDICT};

/// A CSV table ready to be written.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        CsvTable { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(&self.name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Fixed 17-significant-digit rendering for CSV cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub exit_code: i32,
    pub tables: Vec<CsvTable>,
}

fn execution(config: &RunConfig) -> Execution {
    match config.numeric.threads {
        1 => Execution::Sequential,
        0 => Execution::Parallel,
        t => {
            // The global pool can only be configured once per process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            Execution::Parallel
        }
    }
}

fn legendrian_m(config: &RunConfig, region: &MomentRegion) -> Vec<i64> {
    config.numeric.legendrian_m.clone().unwrap_or_else(|| vec![1; region.dim()])
}

/// Runs `command` on a configuration that already has overrides applied.
pub fn run(command: CommandKind, config: &RunConfig) -> Result<Outcome, CliError> {
    let mut config = config.clone();
    if command == CommandKind::Counterexample && !matches!(config.domain, Shape::Counterexample { .. }) {
        config.domain = Shape::Counterexample { epsilon: 0.1, beta: 200.0, q: 16.0 };
    }
    let region = config.validate()?;
    let exec = execution(&config);
    let mut warnings = Vec::new();
    let mut tables = Vec::new();
    let mut exit_code = EXIT_OK;

    let payload = match command {
        CommandKind::Capacities => {
            Payload::Capacities(capacities_cmd(&region, &config, exec, &mut warnings, &mut tables)?)
        }
        CommandKind::Orbits => Payload::Orbits(orbits_cmd(&region, &config, exec, &mut warnings, &mut tables)?),
        CommandKind::Chords => Payload::Chords(chords_cmd(&region, &config, exec, &mut warnings, &mut tables)?),
        CommandKind::Verify | CommandKind::Counterexample => {
            let report = verify_cmd(&region, &config, exec, &mut warnings, &mut tables)?;
            if !report.all_applicable_pass() {
                exit_code = EXIT_VERDICT;
            }
            if command == CommandKind::Verify {
                Payload::Verify(report)
            } else {
                Payload::Counterexample(report)
            }
        }
        CommandKind::PerturbStudy => {
            Payload::PerturbStudy(perturb_cmd(&region, &config, exec, &mut warnings, &mut tables)?)
        }
        CommandKind::PlotData => {
            let (payload, plot_tables) = plot::plot_data(&region, &config, exec, &mut warnings)?;
            tables.extend(plot_tables);
            Payload::PlotData(payload)
        }
    };
    Ok(Outcome { envelope: ReportEnvelope::new(command.name(), &config, payload, warnings), exit_code, tables })
}

/// Prints and writes the outputs selected by the configuration.
pub fn emit(command: CommandKind, outcome: &Outcome, config: &RunConfig) -> Result<(), CliError> {
    let dir = config.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let want_tables = config.output.csv || command == CommandKind::PlotData;
    if want_tables || (config.output.json && config.output.dir.is_some()) {
        std::fs::create_dir_all(&dir)?;
    }
    if want_tables {
        for t in &outcome.tables {
            t.write(&dir)?;
        }
    }
    if config.output.json {
        let text = outcome.envelope.to_json();
        if config.output.dir.is_some() {
            std::fs::write(dir.join(format!("{}.json", command.name())), &text)?;
        }
        println!("{text}");
    }
    Ok(())
}

fn capacities_cmd(
    region: &MomentRegion,
    config: &RunConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
    tables: &mut Vec<CsvTable>,
) -> Result<CapacitiesPayload, CliError> {
    let mono = region.classify_monotonicity(moment_region::default_samples(region.dim()), exec)?;
    let mut payload = CapacitiesPayload {
        label: region.label().to_string(),
        monotonicity: mono.clone(),
        c_gromov: None,
        c_cube: None,
        c_lagrangian: None,
        kappa: None,
    };
    if mono.class.is_monotone() {
        let gr = gromov_width(region, config.numeric.gromov_grid, exec)?.value;
        let lag = lagrangian_capacity(region)?;
        payload.c_gromov = Some(gr);
        payload.c_cube = Some(lag.value);
        payload.kappa = Some(gr - lag.value);
        if !lag.assumption_free {
            warnings
                .push("Lagrangian capacity identification relies on a regularity assumption above dimension 4".into());
        }
        payload.c_lagrangian = Some(lag);
    } else {
        warnings.push("region is not monotone; capacities are not applicable".into());
    }
    let mut t = CsvTable::new("capacities.csv", &["quantity", "value"]);
    for (name, value) in [
        ("c_gromov", payload.c_gromov),
        ("c_cube", payload.c_cube),
        ("c_lagrangian", payload.c_lagrangian.as_ref().map(|l| l.value)),
        ("kappa", payload.kappa),
    ] {
        t.push(vec![name.into(), value.map(num).unwrap_or_default()]);
    }
    tables.push(t);
    Ok(payload)
}

fn orbits_cmd(
    region: &MomentRegion,
    config: &RunConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
    tables: &mut Vec<CsvTable>,
) -> Result<OrbitsPayload, CliError> {
    let height = config.numeric.orbit_height;
    let e = enumerate_rational_fibers(region, height, exec)?;
    let mono = region.classify_monotonicity(moment_region::default_samples(region.dim()), exec)?;
    if mono.class != toric_chords::MonotonicityClass::StrictlyMonotone {
        warnings.push(format!(
            "region is {:?}; the enumerated minimum is only an upper bound for the minimal period",
            mono.class
        ));
    }
    if !e.skipped.is_empty() {
        warnings.push(format!("{} directions skipped (no fiber with parallel normal)", e.skipped.len()));
    }
    let n = region.dim();
    let mut headers: Vec<String> = (1..=n).map(|i| format!("m{i}")).collect();
    headers.extend((1..=n).map(|i| format!("w{i}")));
    headers.push("period".into());
    headers.push("kind".into());
    let header_refs: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
    let mut t = CsvTable::new("orbits.csv", &header_refs);
    for f in &e.fibers {
        let mut row: Vec<String> = f.m.iter().map(|k| k.to_string()).collect();
        row.extend(f.fiber.w.iter().map(|&x| num(x)));
        row.push(num(f.period));
        row.push(format!("{:?}", f.kind).to_lowercase());
        t.push(row);
    }
    tables.push(t);
    Ok(OrbitsPayload {
        label: region.label().to_string(),
        height,
        minimum: e.minimum().cloned(),
        fibers: e.fibers,
        skipped: e.skipped,
    })
}

fn default_t_max(region: &MomentRegion, config: &RunConfig, exec: Execution, fallback: f64) -> f64 {
    config.numeric.chord_t_max.unwrap_or_else(|| {
        gromov_width(region, config.numeric.gromov_grid, exec).map(|g| 2.0 * g.value).unwrap_or(fallback)
    })
}

fn chords_cmd(
    region: &MomentRegion,
    config: &RunConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
    tables: &mut Vec<CsvTable>,
) -> Result<ChordsPayload, CliError> {
    let m = legendrian_m(config, region);
    let torus = legendrian_fiber(region, &m, config.numeric.legendrian_phase)?;
    let closed = min_chord_period(&torus)?;
    let supremum = match sup_chord_over_fibers(region, config.numeric.chord_height, exec) {
        Ok(s) => Some(s),
        Err(Error::NotMonotone(_)) => {
            warnings.push("region is not monotone; the chord supremum is not applicable".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let (mut integrated, mut search) = (None, None);
    if region.dim() == 2 {
        let domain = StarShapedDomain::toric(region);
        integrated = Some(integrated_chord_period(&domain, &torus, 0.0)?);
        let t_max = default_t_max(region, config, exec, 4.0 * closed.period);
        let transported = transported_legendrian(&domain, &torus)?;
        let found = find_chords(
            &domain,
            &transported,
            t_max,
            (config.numeric.chord_s_count, config.numeric.chord_t_count),
            exec,
        )?;
        if let Some(msg) = &found.message {
            warnings.push(msg.clone());
        }
        search = Some(found);
    } else {
        warnings.push("numerical chord search runs in dimension 4 only".into());
    }

    if let Some(s) = &supremum {
        let n = region.dim();
        let mut headers: Vec<String> = (1..=n).map(|i| format!("m{i}")).collect();
        headers.push("min_chord_period".into());
        let refs: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
        let mut t = CsvTable::new("chord_periods.csv", &refs);
        for (mm, p) in &s.chord_periods {
            let mut row: Vec<String> = mm.iter().map(|k| k.to_string()).collect();
            row.push(num(*p));
            t.push(row);
        }
        tables.push(t);
    }
    if let Some(found) = &search {
        let mut t = CsvTable::new(
            "chords.csv",
            &[
                "start_param",
                "end_param",
                "period",
                "endpoint_distance",
                "surface_drift",
                "legendrian_defect",
                "genuine",
            ],
        );
        for c in &found.chords {
            t.push(vec![
                num(c.start_param),
                num(c.end_param),
                num(c.period),
                num(c.endpoint_distance),
                num(c.surface_drift),
                num(c.legendrian_defect),
                c.genuine.to_string(),
            ]);
        }
        tables.push(t);
    }
    Ok(ChordsPayload {
        label: region.label().to_string(),
        legendrian_m: m,
        legendrian_phase: torus.phase,
        scale: torus.scale,
        closed_form: closed,
        integrated_period: integrated,
        supremum,
        search,
    })
}

fn verify_cmd(
    region: &MomentRegion,
    config: &RunConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
    tables: &mut Vec<CsvTable>,
) -> Result<capacities::CapacityReport, CliError> {
    let opts = VerifyOptions {
        orbit_height: config.numeric.orbit_height,
        chord_height: config.numeric.chord_height,
        gromov_grid: config.numeric.gromov_grid,
        tol_claim: config.numeric.tol_claim,
        exec,
    };
    let report = verify_claims(region, &opts)?;
    let mut t = CsvTable::new("verdicts.csv", &["check", "status", "residual", "tolerance"]);
    for (name, v) in &report.verdicts {
        if v.status == VerdictStatus::NotApplicable {
            warnings.push(format!("{name} not applicable: {}", v.detail));
        }
        t.push(vec![
            name.clone(),
            serde_json::to_value(v.status).ok().and_then(|s| s.as_str().map(String::from)).unwrap_or_default(),
            v.residual.map(num).unwrap_or_default(),
            num(v.tolerance),
        ]);
    }
    if report.skipped_directions > 0 {
        warnings.push(format!("{} lattice directions skipped during orbit enumeration", report.skipped_directions));
    }
    tables.push(t);
    Ok(report)
}

fn perturb_cmd(
    region: &MomentRegion,
    config: &RunConfig,
    exec: Execution,
    warnings: &mut Vec<String>,
    tables: &mut Vec<CsvTable>,
) -> Result<PerturbStudyPayload, CliError> {
    if region.dim() != 2 {
        return Err(CliError::Config("perturb-study needs a 4-dimensional domain".into()));
    }
    let m = legendrian_m(config, region);
    let source = legendrian_fiber(region, &m, config.numeric.legendrian_phase)?;
    let a_min = min_orbit_period(region, config.numeric.orbit_height, exec)?.period;
    let kappa = kappa_gap(region, exec)?;
    let margin = a_min - 0.5 * kappa;
    let t_max = default_t_max(region, config, exec, 2.0 * a_min);
    let base = StarShapedDomain::toric(region);
    let p = &config.perturbation;
    let mut rows = Vec::new();
    for &amplitude in &p.amplitudes {
        let domain = perturb(&base, config.numeric.seed, amplitude, p.width, p.count)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let c1 = c1_distance(&base, &domain, DEFAULT_C1_SAMPLES)?;
        let torus = transported_legendrian(&domain, &source)?;
        let found =
            find_chords(&domain, &torus, t_max, (config.numeric.chord_s_count, config.numeric.chord_t_count), exec)?;
        let min_period = found.minimal().map(|c| c.period);
        let below = min_period.is_some_and(|t| t < margin);
        if !below {
            warnings.push(format!("amplitude {amplitude}: no chord below the margin {margin}"));
        }
        rows.push(PerturbRow {
            amplitude,
            c1_distance: c1,
            legendrian_defect: torus.legendrian_defect,
            chords_found: found.chords.len(),
            min_period,
            below_margin: below,
            message: found.message,
        });
    }
    let mut t = CsvTable::new(
        "perturb_study.csv",
        &["amplitude", "c1_distance", "legendrian_defect", "chords_found", "min_period", "below_margin"],
    );
    for r in &rows {
        t.push(vec![
            num(r.amplitude),
            num(r.c1_distance),
            num(r.legendrian_defect),
            r.chords_found.to_string(),
            r.min_period.map(num).unwrap_or_default(),
            r.below_margin.to_string(),
        ]);
    }
    tables.push(t);
    Ok(PerturbStudyPayload {
        label: region.label().to_string(),
        seed: config.numeric.seed,
        width: p.width,
        count: p.count,
        legendrian_m: m,
        toric_a_min: a_min,
        kappa,
        margin,
        t_max,
        rows,
    })
}
