//! The subcommands. Analysis commands read one snapshot or a series
//! directory and write CSV whose first line is `# config_hash=<hash>`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use ddflux::besov::{
    localized_sum, sequence_norm, shell_coefficients, tail_comparison, BesovParams, Summation,
};
use ddflux::budget::{budget_series, snapshot_budget, FluxRow};
use ddflux::estimates::{verify_kernel_estimates, EstimateExponents};
use ddflux::khm::{khm_flux, LagGrid};
use ddflux::solver::{initial_fields, run, Integrator};
use ddflux::spectral::{leray_project, lp_norm, lambda, ShellDecomposition};
use ddflux::{Field, SolutionState};

use crate::config::{FieldChoice, RunConfig};
use crate::error::{CliError, CliResult};
use crate::snapshot::{read_inputs, write_series, write_snapshot};

/// Shells below the tail start that may feed the tail of `D_Q`.
pub const TAIL_WINDOW: i32 = 2;

/// CSV writer whose file starts with the provenance line.
pub fn csv_writer(path: &Path, hash: &str) -> CliResult<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# config_hash={hash}").map_err(CliError::io(path))?;
    Ok(csv::Writer::from_writer(out))
}

fn write_rows<R: Serialize>(path: &Path, hash: &str, rows: impl IntoIterator<Item = R>) -> CliResult<()> {
    let mut w = csv_writer(path, hash)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// `dir/stem_suffix.ext` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn output_path(config: &RunConfig, out: Option<&Path>, default: &str) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| config.output.dir.join(default))
}

/// Generates the configured initial state, projects the velocity onto
/// divergence-free fields and writes one snapshot. Two-dimensional states
/// also carry the pressure (and force) of the solver.
pub fn synth(config: &RunConfig, out: Option<&Path>) -> CliResult<PathBuf> {
    let grid = config.grid()?;
    let state = if grid.dim() == 2 {
        let sc = config.solver_config()?;
        let (rho, u) = initial_fields::<f64>(&sc)?;
        Integrator::new(sc)?.snapshot(&rho, &u, 0.0)?
    } else {
        let rho: Field<f64> = config.density_spec()?.generate(grid, 1)?;
        let u = leray_project(&config.velocity_spec()?.generate(grid, grid.dim())?)?;
        SolutionState::new(rho, u, config.solver.mu, 0.0)?
    };
    let path = output_path(config, out, "synth.ddns");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    write_snapshot(&path, &state)?;
    Ok(path)
}

/// Runs the solver and writes the snapshot series with its manifest.
pub fn simulate(config: &RunConfig, out: Option<&Path>) -> CliResult<PathBuf> {
    let sc = config.solver_config()?;
    let output = run::<f64>(&sc)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| config.output.dir.clone());
    write_series(&dir, &output.snapshots, &config.hash(), Some(output.record))?;
    Ok(dir)
}

fn pick(state: &SolutionState<f64>, which: FieldChoice) -> CliResult<&Field<f64>> {
    match which {
        FieldChoice::Rho => Ok(state.rho()),
        FieldChoice::U => Ok(state.u()),
        FieldChoice::P => state
            .pressure()
            .ok_or_else(|| CliError::Validation(format!("snapshot at t = {} carries no pressure", state.t()))),
    }
}

#[derive(Serialize)]
struct ShellRow {
    t: f64,
    q: i32,
    lambda_q: f64,
    norm_l2: f64,
    energy: f64,
}

/// `||f_q||_2` and `||f_q||_2^2 / 2` for every shell.
pub fn project(config: &RunConfig, input: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let states = read_inputs(input)?;
    let cutoff = config.analysis.cutoff_profile()?;
    let which = config.analysis.field;
    let per: Vec<Vec<ShellRow>> = states
        .par_iter()
        .map(|s| {
            let shells = ShellDecomposition::new(pick(s, which)?, &cutoff);
            shells
                .iter()
                .map(|(q, fq)| {
                    let norm = lp_norm(fq, 2.0)?;
                    Ok(ShellRow { t: s.t(), q, lambda_q: lambda(q), norm_l2: norm, energy: 0.5 * norm * norm })
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<_>>()?;
    let path = output_path(config, out, "project.csv");
    write_rows(&path, &config.hash(), per.into_iter().flatten())?;
    Ok(path)
}

#[derive(Serialize)]
struct BesovRow {
    t: f64,
    q: i32,
    d_q: f64,
    localized: f64,
}

#[derive(Serialize)]
struct BesovNormRow {
    t: f64,
    s: f64,
    p: f64,
    norm_inf: f64,
    tail_sup: Option<f64>,
    decay_slope: Option<f64>,
    tail_start: i32,
    max_localized: f64,
    lower_bound: f64,
    upper_bound: f64,
    holds: bool,
}

/// Integrability used for each field: `b` for `u`, `a` for `rho`, `b/2` for `p`.
fn integrability(config: &RunConfig) -> CliResult<f64> {
    let an = &config.analysis;
    Ok(match an.field {
        FieldChoice::U => an.b,
        FieldChoice::Rho => an.a()?,
        FieldChoice::P => an.b / 2.0,
    })
}

/// Writes `d_q` and `D_Q` per snapshot, and a companion `_norms` table.
pub fn besov(config: &RunConfig, input: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let states = read_inputs(input)?;
    let an = &config.analysis;
    let cutoff = an.cutoff_profile()?;
    let params = BesovParams::new(an.s, integrability(config)?, Summation::C0)?;
    let per: Vec<(Vec<BesovRow>, BesovNormRow)> = states
        .par_iter()
        .map(|s| {
            let c = shell_coefficients(pick(s, an.field)?, params, &cutoff)?;
            let local = localized_sum(&c);
            let rows = c
                .iter()
                .map(|(q, d)| BesovRow { t: s.t(), q, d_q: d, localized: local.get(q) })
                .collect();
            let q_max = c.q_max();
            let tail_start = an.tail_start.unwrap_or(q_max - 4).clamp(-1, q_max);
            let norm = sequence_norm(&c);
            let tail = tail_comparison(&c, tail_start, TAIL_WINDOW);
            let norms = BesovNormRow {
                t: s.t(),
                s: params.s,
                p: params.p,
                norm_inf: norm.value,
                tail_sup: norm.tail_sup,
                decay_slope: c.decay_slope(tail_start, q_max),
                tail_start,
                max_localized: tail.max_localized,
                lower_bound: tail.lower_bound,
                upper_bound: tail.upper_bound,
                holds: tail.holds(),
            };
            Ok((rows, norms))
        })
        .collect::<CliResult<_>>()?;
    let path = output_path(config, out, "besov.csv");
    let hash = config.hash();
    let (rows, norms): (Vec<_>, Vec<_>) = per.into_iter().unzip();
    write_rows(&path, &hash, rows.into_iter().flatten())?;
    write_rows(&sibling(&path, "norms"), &hash, norms)?;
    Ok(path)
}

#[derive(Serialize)]
struct FluxCsvRow {
    t: f64,
    #[serde(rename = "Q")]
    q: i32,
    #[serde(rename = "E_leQ")]
    e_le_q: f64,
    #[serde(rename = "Pi_Q")]
    pi_q: f64,
    #[serde(rename = "Pi_Q_pressure")]
    pi_q_pressure: Option<f64>,
    #[serde(rename = "eps_Q")]
    eps_q: f64,
    #[serde(rename = "force_Q")]
    force_q: f64,
    budget_residual: f64,
}

impl From<&FluxRow> for FluxCsvRow {
    fn from(r: &FluxRow) -> Self {
        Self {
            t: r.t,
            q: r.q,
            e_le_q: r.e_le_q,
            pi_q: r.pi_q,
            pi_q_pressure: r.pi_q_pressure,
            eps_q: r.eps_q,
            force_q: r.force_q,
            budget_residual: r.budget_residual,
        }
    }
}

fn flux_rows(config: &RunConfig, states: &[SolutionState<f64>]) -> CliResult<Vec<FluxRow>> {
    let cutoff = config.analysis.cutoff_profile()?;
    let (lo, hi) = config.analysis.q_range(states[0].grid())?;
    if states.len() == 1 {
        // no time elapsed: every integral and residual is zero
        let b = snapshot_budget(&states[0], lo..=hi, &cutoff)?;
        return Ok(b
            .scales
            .iter()
            .map(|sc| FluxRow {
                t: b.t,
                q: sc.q,
                e_le_q: sc.energy,
                pi_q: sc.flux.total(),
                pi_q_pressure: sc.flux.pressure,
                flux_integral: 0.0,
                eps_q: 0.0,
                force_q: 0.0,
                budget_residual: 0.0,
            })
            .collect());
    }
    let (_, spectra) = budget_series(states, lo..=hi, &cutoff)?;
    Ok(spectra.into_iter().flat_map(|s| s.rows).collect())
}

/// Flux spectrum of every snapshot; time integrals start at the first one.
pub fn flux(config: &RunConfig, input: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let states = read_inputs(input)?;
    let rows = flux_rows(config, &states)?;
    let path = output_path(config, out, "flux.csv");
    write_rows(&path, &config.hash(), rows.iter().map(FluxCsvRow::from))?;
    Ok(path)
}

#[derive(Serialize)]
struct BudgetRow {
    t: f64,
    #[serde(rename = "Q")]
    q: i32,
    #[serde(rename = "E_leQ_start")]
    e_start: f64,
    #[serde(rename = "E_leQ_end")]
    e_end: f64,
    flux_integral: f64,
    #[serde(rename = "eps_Q")]
    eps_q: f64,
    #[serde(rename = "force_Q")]
    force_q: f64,
    budget_residual: f64,
}

/// Budget residual at the last snapshot as a function of `Q`.
pub fn budget(config: &RunConfig, input: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let states = read_inputs(input)?;
    let cutoff = config.analysis.cutoff_profile()?;
    let (lo, hi) = config.analysis.q_range(states[0].grid())?;
    let (_, spectra) = budget_series(&states, lo..=hi, &cutoff)?;
    let first = &spectra[0];
    let last = spectra.last().expect("series has two snapshots");
    let rows = first.rows.iter().zip(&last.rows).map(|(a, b)| BudgetRow {
        t: b.t,
        q: b.q,
        e_start: a.e_le_q,
        e_end: b.e_le_q,
        flux_integral: b.flux_integral,
        eps_q: b.eps_q,
        force_q: b.force_q,
        budget_residual: b.budget_residual,
    });
    let path = output_path(config, out, "budget.csv");
    write_rows(&path, &config.hash(), rows)?;
    Ok(path)
}

/// Structure-function flux on the cubic lag grid, one block per snapshot.
pub fn khm(config: &RunConfig, input: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let states = read_inputs(input)?;
    let grid = *states[0].grid();
    let radius = config.analysis.lag_radius.unwrap_or(grid.points_per_axis() as i64 / 4);
    let lags = LagGrid::cube(grid, radius).map_err(|e| CliError::Validation(e.to_string()))?;
    let fluxes = states
        .par_iter()
        .map(|s| Ok((s.t(), khm_flux(s, &lags)?)))
        .collect::<CliResult<Vec<_>>>()?;

    let path = output_path(config, out, "khm.csv");
    let mut w = csv_writer(&path, &config.hash())?;
    let d = grid.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|j| format!("l{j}")));
    header.extend(["length", "pi_div", "pi_sym"].map(String::from));
    w.write_record(&header)?;
    for (t, f) in &fluxes {
        for r in &f.rows {
            let mut rec = vec![format!("{t:?}")];
            rec.extend(r.lag[..d].iter().map(|l| l.to_string()));
            rec.extend([r.length, r.pi_div, r.pi_sym].map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(CliError::io(&path))?;
    Ok(path)
}

#[derive(Serialize)]
struct EstimateCsvRow {
    t: f64,
    #[serde(rename = "Q")]
    q: i32,
    estimate: &'static str,
    lhs: f64,
    rhs: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct EstimateSummaryRow {
    t: f64,
    estimate: &'static str,
    max_ratio: f64,
    growth_slope: Option<f64>,
    flagged: bool,
}

/// Measured constants of the kernel estimates with `f = rho` and `g = u`.
/// Rows go to the output file, per-estimate summaries to its `_summary`
/// sibling.
pub fn verify_estimates(config: &RunConfig, input: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let states = read_inputs(input)?;
    let an = &config.analysis;
    let cutoff = an.cutoff_profile()?;
    let exponents = EstimateExponents::new(an.s, an.s, an.a()?, an.b)?;
    let q_range = an.q_range(states[0].grid())?;
    let reports = states
        .par_iter()
        .map(|s| Ok((s.t(), verify_kernel_estimates(s.rho(), s.u(), exponents, q_range, &cutoff)?)))
        .collect::<CliResult<Vec<_>>>()?;
    for (t, r) in &reports {
        for s in r.summaries.iter().filter(|s| s.flagged) {
            log::warn!("t = {t}: {} ratio grows with Q (max {:e}, slope {:?})", s.id.name(), s.max_ratio, s.growth_slope);
        }
    }
    let path = output_path(config, out, "estimates.csv");
    let hash = config.hash();
    write_rows(
        &path,
        &hash,
        reports.iter().flat_map(|(t, r)| {
            r.rows.iter().map(move |row| EstimateCsvRow {
                t: *t,
                q: row.q,
                estimate: row.id.name(),
                lhs: row.lhs,
                rhs: row.rhs,
                ratio: row.ratio,
            })
        }),
    )?;
    write_rows(
        &sibling(&path, "summary"),
        &hash,
        reports.iter().flat_map(|(t, r)| {
            r.summaries.iter().map(move |s| EstimateSummaryRow {
                t: *t,
                estimate: s.id.name(),
                max_ratio: s.max_ratio,
                growth_slope: s.growth_slope,
                flagged: s.flagged,
            })
        }),
    )?;
    Ok(path)
}
