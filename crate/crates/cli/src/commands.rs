use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use sectio::bodies::{Exponent, StarBody};
use sectio::bpgm::{
    construct_counterexample, lp_volume_ratio, default_degree, kernel, kernel_grid, section_integral_lower_bound,
    CounterexampleResult, SectionBound,
};
use sectio::measures::{
    body_measure, reconstruct_from_sections, section_profile, section_profile_fourier, SectionProfile,
};
use sectio::{Direction, GridSpec, Rule, SphereGrid, Warning};

use crate::config::ExperimentConfig;
use crate::exit::{ConfigError, NumericalFailure};
use crate::output::{coord_header, csv, emit, fmt9, json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Route {
    Direct,
    Fourier,
    Both,
}

pub fn volume(cfg: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let grid = cfg.grid_spec(24, Rule::Orthant).build(cfg.dimension)?;
    let mut rows = Vec::new();
    for (bi, body) in cfg.bodies()?.iter().enumerate() {
        for (di, f) in cfg.densities()?.iter().enumerate() {
            let v = body_measure(body, f, &grid)
                .with_context(|| format!("body {bi}, density {di}"))?;
            rows.push(vec![body.label().to_string(), f.label().to_string(), fmt9(v)]);
        }
    }
    let header = ["body", "density", "measure"].map(String::from);
    emit(out, &csv(&header, &rows)?)
}

/// Gauss–Jacobi grid whose nodes serve as profile directions for reconstruction.
fn profile_grid(cfg: &ExperimentConfig) -> anyhow::Result<SphereGrid> {
    let m = cfg.max_degree(8);
    Ok(GridSpec::jacobi(cfg.resolution.unwrap_or(2 * m)).build(cfg.dimension)?)
}

pub fn sections(cfg: &ExperimentConfig, route: Route, out: Option<&Path>) -> anyhow::Result<()> {
    let n = cfg.dimension;
    let body = cfg.body()?;
    let f = cfg.density()?;
    let pgrid = profile_grid(cfg)?;
    let dirs = cfg.directions(Some(&pgrid))?;
    let direct = match route {
        Route::Direct | Route::Both => {
            Some(section_profile(&body, &f, &dirs, cfg.section_spec(24))?.values)
        }
        Route::Fourier => None,
    };
    let fourier = match route {
        Route::Fourier | Route::Both => {
            let m = cfg.max_degree(24);
            let grid = cfg.grid_spec(2 * m, Rule::Orthant).build(n)?;
            Some(section_profile_fourier(&body, &f, &dirs, &grid, m)?)
        }
        Route::Direct => None,
    };
    let mut header = coord_header("xi", n);
    match route {
        Route::Both => header.extend(["direct", "fourier", "relative_difference"].map(String::from)),
        _ => header.push("value".into()),
    }
    let rows: Vec<Vec<String>> = dirs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut row: Vec<String> = d.coords().iter().map(|x| fmt9(*x)).collect();
            match (&direct, &fourier) {
                (Some(a), Some(b)) => {
                    row.push(fmt9(a[i]));
                    row.push(fmt9(b[i]));
                    row.push(fmt9((a[i] - b[i]).abs() / a[i].abs()));
                }
                (Some(a), None) | (None, Some(a)) => row.push(fmt9(a[i])),
                (None, None) => unreachable!(),
            }
            row
        })
        .collect();
    emit(out, &csv(&header, &rows)?)
}

#[derive(Serialize)]
struct PdReport {
    body: String,
    density: String,
    lower_density: String,
    max_degree: usize,
    resolution: usize,
    positive_definite: bool,
    min_value: f64,
    argmin: Direction,
    tolerance: f64,
    warnings: Vec<Warning>,
}

pub fn pdtest(cfg: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let body = cfg.body()?;
    let (f_n, f_n1) = cfg.density_pair()?;
    let m = cfg.max_degree(default_degree(cfg.dimension));
    let grid = match cfg.resolution {
        Some(r) => GridSpec::jacobi(r).build(cfg.dimension)?,
        None => kernel_grid(cfg.dimension, m)?,
    };
    let k = kernel(&body, &f_n, &f_n1, &grid, m)?;
    let t = &k.transform;
    let report = PdReport {
        body: body.label().into(),
        density: f_n.label().into(),
        lower_density: f_n1.label().into(),
        max_degree: m,
        resolution: grid.spec().resolution,
        positive_definite: t.positive_definite,
        min_value: t.min_value,
        argmin: t.argmin.clone(),
        tolerance: t.tolerance,
        warnings: t.warnings.clone(),
    };
    emit(out, &json(&report)?)
}

#[derive(Serialize)]
struct CounterexampleReport<'a> {
    body: String,
    density: String,
    lower_density: String,
    #[serde(flatten)]
    result: &'a CounterexampleResult,
}

pub fn counterexample(cfg: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let l = cfg.body()?;
    let (f_n, f_n1) = cfg.density_pair()?;
    let settings = cfg.counterexample();
    let result = construct_counterexample(&l, &f_n, &f_n1, &settings)?;
    let report = CounterexampleReport {
        body: l.label().into(),
        density: f_n.label().into(),
        lower_density: f_n1.label().into(),
        result: &result,
    };
    emit(out, &json(&report)?)?;
    if let Some(path) = out {
        let grid = result.samples.grid.build(cfg.dimension)?;
        emit(Some(&radial_csv_path(path)), &radial_csv(&grid, &result.samples.values)?)?;
    }
    if !result.success {
        bail!(NumericalFailure(format!(
            "conclusion gap {:.3e} is below 1e-6 of the measure of L",
            result.conclusion_gap
        )));
    }
    Ok(())
}

/// `report.json` → `report_radial.csv`.
pub fn radial_csv_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}_radial.csv"))
}

fn radial_csv(grid: &SphereGrid, rho: &[f64]) -> anyhow::Result<String> {
    let mut header = coord_header("theta", grid.dim());
    header.push("rho".into());
    let rows: Vec<Vec<String>> = grid
        .nodes()
        .zip(rho)
        .map(|(x, r)| x.iter().chain(std::iter::once(r)).map(|v| fmt9(*v)).collect())
        .collect();
    csv(&header, &rows)
}

pub fn read_profile(path: &Path, n: usize) -> anyhow::Result<SectionProfile> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| ConfigError(format!("cannot read profile {}: {e}", path.display())))?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let value_col = col("value")
        .or_else(|| col("direct"))
        .ok_or_else(|| ConfigError(format!("{}: no `value` column", path.display())))?;
    let xi_cols: Vec<usize> = (1..=n)
        .map(|i| {
            col(&format!("xi_{i}"))
                .ok_or_else(|| ConfigError(format!("{}: no `xi_{i}` column", path.display())))
        })
        .collect::<Result<_, _>>()?;
    let (mut directions, mut values) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> anyhow::Result<f64> {
            rec[c].trim().parse::<f64>().map_err(|e| {
                ConfigError(format!("{} row {}: {e}", path.display(), line + 1)).into()
            })
        };
        let xi = xi_cols.iter().map(|&c| num(c)).collect::<anyhow::Result<Vec<_>>>()?;
        directions.push(
            Direction::new(xi)
                .map_err(|e| ConfigError(format!("{} row {}: {e}", path.display(), line + 1)))?,
        );
        values.push(num(value_col)?);
    }
    Ok(SectionProfile {
        body: path.display().to_string(),
        density: String::new(),
        directions,
        values,
    })
}

pub fn reconstruct(cfg: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let f = cfg.density()?;
    let m = cfg.max_degree(8);
    let grid = profile_grid(cfg)?;
    let profile = read_profile(cfg.profile_path()?, cfg.dimension)?;
    let rec = reconstruct_from_sections(&profile, &f, &grid, m)?;
    emit(out, &radial_csv(&grid, &rec.radial)?)
}

#[derive(Serialize)]
struct RatioRow {
    p: Exponent,
    n: usize,
    ratio: f64,
}

#[derive(Serialize)]
struct BoundsReport {
    body: String,
    reference: String,
    directions: usize,
    section_bound: SectionBound,
    volume_ratios: Vec<RatioRow>,
}

pub fn bounds(cfg: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let k: StarBody = cfg.body()?;
    let m = cfg.reference()?;
    let dirs = cfg.directions(None)?;
    let grid = cfg.grid_spec(24, Rule::Orthant).build(cfg.dimension)?;
    let bound = section_integral_lower_bound(&k, &m, &dirs, cfg.section_spec(24), &grid)?;
    let ps = cfg.ratio_p.clone().unwrap_or_else(|| {
        [1.0, 2.0, 4.0, f64::INFINITY].map(Exponent).to_vec()
    });
    let mut volume_ratios = Vec::new();
    for p in &ps {
        if !(p.0 > 0.0) {
            bail!(ConfigError(format!("field `ratio_p`: {} is not positive", p.0)));
        }
        for n in 2..=cfg.dimension {
            volume_ratios.push(RatioRow {
                p: *p,
                n,
                ratio: lp_volume_ratio(n, p.0),
            });
        }
    }
    let report = BoundsReport {
        body: k.label().into(),
        reference: m.label().into(),
        directions: dirs.len(),
        section_bound: bound,
        volume_ratios,
    };
    emit(out, &json(&report)?)
}
