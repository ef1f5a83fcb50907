//! Orchestration of the aggregate runs, kinetic runs and the ε study.

use std::path::PathBuf;
use std::thread;

use aggrekin::field::osl_applicable;
use aggrekin::scenario::SCENARIO_NAMES;
use aggrekin::{
    check_one_sided, check_osl, collapse_time_bound, deposit, field_from_grid_density, flux_comparison,
    simulate, simulate_kinetic, wasserstein1, AggregateState, ChemoModel, Error, Grid1D, GridField, KineticParams,
    KineticRun, Measure1D, Scenario, SimParams, Trajectory, DEFAULT_MASS_THRESHOLD,
};
use anyhow::Context;

use crate::config::{default_domain, default_t_end, SimConfig};
use crate::output::{positions_svg, profiles_svg, write_text, CsvFile};

/// Diagnostic values above this are reported as violations.
const DIAGNOSTIC_TOLERANCE: f64 = 1e-6;

fn grid_of(cfg: &SimConfig) -> anyhow::Result<Grid1D> {
    Ok(Grid1D::with_spacing(cfg.x_min, cfg.x_max, cfg.dx)?)
}

fn prepare_dir(cfg: &SimConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.output_dir.display()))
}

/// Largest one-sided and OSL diagnostics over `states`; the OSL entry is
/// `None` for the step law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub one_sided: f64,
    pub osl: Option<f64>,
}

impl Diagnostics {
    fn new(model: &ChemoModel) -> Self {
        Diagnostics {
            one_sided: f64::NEG_INFINITY,
            osl: osl_applicable(model).then_some(f64::NEG_INFINITY),
        }
    }

    fn add(&mut self, rho: &GridField, model: &ChemoModel) -> anyhow::Result<()> {
        let (s, ds) = field_from_grid_density(rho);
        self.one_sided = self.one_sided.max(check_one_sided(&s, rho)?);
        if let Some(osl) = self.osl.as_mut() {
            *osl = osl.max(check_osl(&ds, &s, model)?);
        }
        Ok(())
    }

    fn warn(&self, what: &str) {
        if self.one_sided > DIAGNOSTIC_TOLERANCE {
            log::warn!("{what}: one-sided field diagnostic {} above tolerance", self.one_sided);
        }
        if let Some(osl) = self.osl.filter(|&v| v > DIAGNOSTIC_TOLERANCE) {
            log::warn!("{what}: OSL excess {osl} above tolerance");
        }
    }

    fn rows(&self) -> [(&'static str, String); 2] {
        [
            ("max_one_sided_violation", self.one_sided.to_string()),
            ("max_osl_excess", self.osl.map_or("NaN".to_string(), |v| v.to_string())),
        ]
    }
}

fn write_summary(cfg: &SimConfig, rows: &[(&str, String)]) -> anyhow::Result<PathBuf> {
    let mut f = CsvFile::create(&cfg.output_dir.join("summary.csv"), &cfg.metadata(), "key,value")?;
    for (k, v) in rows {
        f.row(&[k, v])?;
    }
    f.finish()
}

fn initial_aggregates(cfg: &SimConfig, grid: &Grid1D) -> anyhow::Result<AggregateState> {
    cfg.scenario
        .initial_aggregates(grid, DEFAULT_MASS_THRESHOLD)
        .context("cannot build initial aggregates")
}

fn run_particles(cfg: &SimConfig, s0: &AggregateState, t_end: f64) -> anyhow::Result<Trajectory> {
    let params = SimParams {
        dt: cfg.dt,
        t_end,
        merge_rule: cfg.merge_rule,
        sample_every: cfg.sample_every,
    };
    Ok(simulate(s0, &cfg.model, &params)?)
}

/// Aggregate solver: `aggregates.csv`, `events.csv`, `summary.csv` and
/// optionally `positions.svg`.
pub fn run_aggregate(cfg: &SimConfig) -> anyhow::Result<Vec<PathBuf>> {
    prepare_dir(cfg)?;
    let grid = grid_of(cfg)?;
    let s0 = initial_aggregates(cfg, &grid)?;
    let traj = run_particles(cfg, &s0, cfg.t_end)?;
    let meta = cfg.metadata();
    let mut files = Vec::new();

    let mut agg = CsvFile::create(&cfg.output_dir.join("aggregates.csv"), &meta, "t,index,position,mass")?;
    for s in &traj.samples {
        for (i, (y, m)) in s.positions().iter().zip(s.masses()).enumerate() {
            agg.row(&[&s.t(), &i, y, m])?;
        }
    }
    files.push(agg.finish()?);

    let mut ev = CsvFile::create(
        &cfg.output_dir.join("events.csv"),
        &meta,
        "t,left_index,right_index,position,mass",
    )?;
    for e in &traj.events {
        ev.row(&[&e.t, &e.left_index, &e.right_index, &e.new_position, &e.new_mass])?;
    }
    files.push(ev.finish()?);

    let mut diag = Diagnostics::new(&cfg.model);
    for s in &traj.samples {
        diag.add(&deposit(s, &grid), &cfg.model)?;
    }
    diag.warn("aggregate run");

    let term = &traj.terminal;
    let tstar = match collapse_time_bound(&s0, &cfg.model) {
        Ok(t) => t,
        Err(Error::TooFewAggregates { .. }) => 0.0,
        Err(e) => return Err(e.into()),
    };
    let mut rows = vec![
        ("total_mass_initial", s0.total_mass().to_string()),
        ("total_mass_final", term.total_mass().to_string()),
        ("com_initial", s0.center_of_mass().to_string()),
        ("com_final", term.center_of_mass().to_string()),
        ("n_initial", s0.len().to_string()),
        ("n_final", term.len().to_string()),
        ("t_collapse", traj.collapse_time().unwrap_or(f64::NAN).to_string()),
        ("Tstar_bound", tstar.to_string()),
        ("steps", traj.steps.to_string()),
        ("merge_events", traj.events.len().to_string()),
    ];
    rows.extend(diag.rows());
    files.push(write_summary(cfg, &rows)?);

    if cfg.emit_svg {
        let slices = svg_slices(&traj);
        let lo = s0.positions()[0];
        let hi = s0.positions()[s0.len() - 1];
        let pad = 0.05 * (hi - lo).max(1.0);
        files.push(write_text(
            &cfg.output_dir.join("positions.svg"),
            &positions_svg(&slices, (lo - pad, hi + pad)),
        )?);
    }
    Ok(files)
}

/// At most 200 evenly spread samples for plotting.
fn svg_slices(traj: &Trajectory) -> Vec<(f64, Vec<f64>)> {
    let n = traj.samples.len();
    let stride = n.div_ceil(200).max(1);
    let mut picked: Vec<&AggregateState> = traj.samples.iter().step_by(stride).collect();
    if !(n - 1).is_multiple_of(stride) {
        picked.push(&traj.terminal);
    }
    picked.into_iter().map(|s| (s.t(), s.positions().to_vec())).collect()
}

fn kinetic_params(cfg: &SimConfig, eps: f64, t_end: f64) -> KineticParams {
    KineticParams {
        eps,
        dt: cfg.dt,
        t_end,
        split: cfg.split,
        sample_every: cfg.sample_every,
    }
}

fn relative_mass_error(run: &KineticRun) -> f64 {
    if run.initial_mass == 0.0 {
        run.terminal.total_mass().abs()
    } else {
        (run.terminal.total_mass() - run.initial_mass).abs() / run.initial_mass
    }
}

fn grid_com(rho: &GridField) -> f64 {
    aggrekin::center_of_mass(&Measure1D::Grid(rho.clone())).unwrap_or(f64::NAN)
}

/// Kinetic solver at the first ε of `eps_list`: `fields.csv`, `summary.csv`
/// and optionally `fields.svg`. The `J` column is the kinetic flux moment.
pub fn run_kinetic(cfg: &SimConfig) -> anyhow::Result<Vec<PathBuf>> {
    prepare_dir(cfg)?;
    let grid = grid_of(cfg)?;
    let rho0 = cfg.scenario.initial_density(&grid)?;
    let eps = cfg.eps_list[0];
    let run = simulate_kinetic(&rho0, &cfg.model, &kinetic_params(cfg, eps, cfg.t_end))?;
    let meta = cfg.metadata();
    let mut files = Vec::new();

    let xs = grid.nodes();
    let mut diag = Diagnostics::new(&cfg.model);
    let mut profiles = Vec::new();
    let mut fields = CsvFile::create(&cfg.output_dir.join("fields.csv"), &meta, "t,x,rho,S,dS,J")?;
    for sample in &run.samples {
        let (s, ds) = field_from_grid_density(&sample.rho);
        for j in 0..grid.len() {
            fields.row(&[
                &sample.t,
                &xs[j],
                &sample.rho.values()[j],
                &s.values()[j],
                &ds.values()[j],
                &sample.flux.values()[j],
            ])?;
        }
        diag.add(&sample.rho, &cfg.model)?;
        if cfg.emit_svg {
            profiles.push((sample.t, s.into_values()));
        }
    }
    files.push(fields.finish()?);
    diag.warn("kinetic run");

    let rel = relative_mass_error(&run);
    if rel > 1e-10 {
        log::warn!("kinetic mass drifted by {rel} (relative)");
    }
    let rho_end = run.terminal.density();
    let mut rows = vec![
        ("eps", eps.to_string()),
        ("total_mass_initial", run.initial_mass.to_string()),
        ("total_mass_final", run.terminal.total_mass().to_string()),
        ("relative_mass_error", rel.to_string()),
        ("outflow", run.outflow.to_string()),
        ("com_initial", grid_com(&rho0).to_string()),
        ("com_final", grid_com(&rho_end).to_string()),
        ("steps", run.steps.to_string()),
        ("nonnegative", run.stayed_nonnegative.to_string()),
        ("flux_gap_final", flux_comparison(&run.terminal, &cfg.model)?.to_string()),
    ];
    rows.extend(diag.rows());
    files.push(write_summary(cfg, &rows)?);

    if cfg.emit_svg {
        let (lo, hi) = cfg.scenario.support();
        let (a, b) = (lo - 2.0, hi + 2.0);
        let keep: Vec<usize> = (0..grid.len()).filter(|&j| xs[j] >= a && xs[j] <= b).collect();
        let stride = keep.len().div_ceil(800).max(1);
        let keep: Vec<usize> = keep.into_iter().step_by(stride).collect();
        let px: Vec<f64> = keep.iter().map(|&j| xs[j]).collect();
        let curves: Vec<(f64, Vec<f64>, Vec<f64>)> = profiles
            .into_iter()
            .map(|(t, s)| (t, px.clone(), keep.iter().map(|&j| s[j]).collect()))
            .collect();
        files.push(write_text(
            &cfg.output_dir.join("fields.svg"),
            &profiles_svg(&format!("S profiles, eps = {eps}"), &curves),
        )?);
    }
    Ok(files)
}

/// One row of the ε study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub eps: f64,
    pub w1: f64,
    pub flux_gap: f64,
    pub mass_error: f64,
    pub nonnegative: bool,
}

/// Horizon of the study when none is given: half the collapse time of the
/// aggregate run, or the scenario default if it does not collapse.
fn study_horizon(cfg: &SimConfig, s0: Option<&AggregateState>) -> anyhow::Result<f64> {
    if cfg.t_end_given {
        return Ok(cfg.t_end);
    }
    let Some(s0) = s0 else {
        return Ok(cfg.t_end);
    };
    let probe = run_particles(cfg, s0, 10.0 * default_t_end(&cfg.scenario_name))?;
    Ok(probe.collapse_time().filter(|&t| t > 0.0).map_or(cfg.t_end, |t| 0.5 * t))
}

/// Compares the kinetic density at each ε with the aggregate solution at
/// the same time and writes `study.csv` (ε descending) and `summary.csv`.
pub fn run_study(cfg: &SimConfig) -> anyhow::Result<(Vec<PathBuf>, Vec<StudyRow>)> {
    prepare_dir(cfg)?;
    let grid = grid_of(cfg)?;
    let rho0 = cfg.scenario.initial_density(&grid)?;
    let s0 = match cfg.scenario.initial_aggregates(&grid, DEFAULT_MASS_THRESHOLD) {
        Ok(s) => Some(s),
        Err(Error::EmptyDiscretization) => None,
        Err(e) => return Err(e.into()),
    };
    let t_end = study_horizon(cfg, s0.as_ref())?;
    let mut cfg = cfg.clone();
    cfg.t_end = t_end;
    let reference = s0
        .as_ref()
        .map(|s| run_particles(&cfg, s, t_end).map(|t| t.terminal))
        .transpose()?;

    let mut eps_list = cfg.eps_list.clone();
    eps_list.sort_by(|a, b| b.total_cmp(a));
    eps_list.dedup();
    let results: Vec<anyhow::Result<StudyRow>> = thread::scope(|scope| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&eps| {
                let (cfg, rho0, reference) = (&cfg, &rho0, &reference);
                scope.spawn(move || -> anyhow::Result<StudyRow> {
                    let run = simulate_kinetic(rho0, &cfg.model, &kinetic_params(cfg, eps, t_end))?;
                    let rho = run.terminal.density();
                    let w1 = match reference {
                        Some(r) => wasserstein1(&Measure1D::Grid(rho), &Measure1D::Dirac(r.clone()))?.value,
                        None if rho.values().iter().all(|&v| v == 0.0) => 0.0,
                        None => anyhow::bail!("kinetic run produced mass from zero initial data"),
                    };
                    Ok(StudyRow {
                        eps,
                        w1,
                        flux_gap: flux_comparison(&run.terminal, &cfg.model)?,
                        mass_error: relative_mass_error(&run),
                        nonnegative: run.stayed_nonnegative,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("study worker panicked"))))
            .collect()
    });
    let rows = results.into_iter().collect::<anyhow::Result<Vec<_>>>()?;

    let meta = cfg.metadata();
    let mut study = CsvFile::create(&cfg.output_dir.join("study.csv"), &meta, "eps,W1,flux_gap")?;
    for r in &rows {
        study.row(&[&r.eps, &r.w1, &r.flux_gap])?;
    }
    let mut files = vec![study.finish()?];

    let w1_decreasing = rows.windows(2).all(|w| w[1].w1 < w[0].w1);
    let gap_decreasing = rows.windows(2).all(|w| w[1].flux_gap <= w[0].flux_gap);
    let summary = vec![
        ("t_end_study", t_end.to_string()),
        ("runs", rows.len().to_string()),
        (
            "max_relative_mass_error",
            rows.iter().map(|r| r.mass_error).fold(0.0, f64::max).to_string(),
        ),
        ("nonnegative", rows.iter().all(|r| r.nonnegative).to_string()),
        ("W1_decreasing", w1_decreasing.to_string()),
        ("flux_gap_decreasing", gap_decreasing.to_string()),
    ];
    files.push(write_summary(&cfg, &summary)?);
    Ok((files, rows))
}

/// Text table of the built-in scenarios.
pub fn scenario_table() -> String {
    let mut out = String::from("name\tdefault domain\tdefault t_end\tinitial data\n");
    for name in SCENARIO_NAMES {
        let s = Scenario::from_name(name).expect("built-in scenario");
        let (a, b) = default_domain(&s);
        out.push_str(&format!("{name}\t[{a}, {b}]\t{}\t{}\n", default_t_end(name), s.formula()));
    }
    out.push_str("custom\tsupport +- 21\t10\tparticles = \"y:m, ...\" or gaussians = \"a:center:rate, ...\"\n");
    out.push_str("random\tsupport +- 21\t10\t2..10 point masses from `seed`\n");
    out
}
