//! One function per subcommand, each producing a [`Table`].

use rayon::prelude::*;
use renner_core::analysis::{
    audit_bounds, classify_ground, ground_crossing, merged_eigenvalues, GroundKind, GROUND_GUARD_MAX_L, SECTOR_TOL,
};
use renner_core::closed_form::{exact_l0_levels, Branch};
use renner_core::fd::{assemble, lowest_eigenvalues, sweep, FdOptions, GridSpec};
use renner_core::matrixform::matrixform_solutions;
use renner_core::params::check_btilde;
use renner_core::perturbation::{series_degenerate, series_l0, series_nondegenerate, PerturbSeries};
use renner_core::Error;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};
use crate::Command;

pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        Command::ExactL0 => exact_l0(cfg),
        Command::Series => series(cfg),
        Command::Sweep => fd_sweep(cfg),
        Command::Crossing => crossing(cfg),
        Command::Classify => classify(cfg),
        Command::Bounds => bounds(cfg),
        Command::Matrixform => Ok(matrixform()),
    }
}

fn exact_l0(cfg: &RunConfig) -> Result<Table, CliError> {
    let n_max: u32 = cfg.get("n-max")?;
    let mut table = Table::new(&["btilde", "N", "branch", "value"]);
    for b in cfg.btilde_values()? {
        let mut levels = exact_l0_levels(b, n_max)?;
        levels.sort_by_key(|l| (l.n, l.branch == Branch::Plus));
        for l in levels {
            table.push(vec![b.into(), l.n.into(), l.branch.to_string().into(), l.value.into()]);
        }
    }
    Ok(table)
}

fn series(cfg: &RunConfig) -> Result<Table, CliError> {
    let abs_ls = cfg.int_list("abs-l")?;
    let ns = cfg.int_list("n")?;
    let order: usize = cfg.get("order")?;
    let degenerate: bool = cfg.get("degenerate")?;
    let grid = cfg.btilde_values()?;

    let mut jobs = Vec::new();
    for &abs_l in &abs_ls {
        let shells: Vec<u32> = if degenerate { ns.clone() } else { vec![0] };
        match (abs_l, degenerate) {
            (0, _) => {
                for n in shells {
                    jobs.push(SeriesJob::L0(n, Branch::Minus));
                    jobs.push(SeriesJob::L0(n, Branch::Plus));
                }
            }
            (_, true) => jobs.extend(shells.into_iter().map(|n| SeriesJob::Pair(n, abs_l))),
            (_, false) => jobs.push(SeriesJob::Ground(abs_l)),
        }
    }
    let all = jobs.par_iter().map(|job| job.run(order)).collect::<renner_core::Result<Vec<_>>>()?;

    let mut table = Table::new(&["kind", "abs_l", "N", "branch", "k", "exact", "btilde", "value"]);
    for s in all.iter().flatten() {
        let id =
            |kind: &str| -> Vec<Cell> { vec![kind.into(), s.abs_l.into(), s.n.into(), s.branch.to_string().into()] };
        for (k, c) in s.coeffs.iter().enumerate() {
            let mut row = id("coeff");
            row.extend([k.into(), c.to_string().into(), Cell::Empty, c.to_f64().into()]);
            table.push(row);
        }
        for &b in &grid {
            let mut row = id("eval");
            row.extend([s.order.into(), Cell::Empty, b.into(), s.eval(b, s.order)?.into()]);
            table.push(row);
        }
    }
    table.meta("arithmetic", "exact");
    Ok(table)
}

enum SeriesJob {
    L0(u32, Branch),
    Pair(u32, u32),
    Ground(u32),
}

impl SeriesJob {
    fn run(&self, order: usize) -> renner_core::Result<Vec<PerturbSeries>> {
        match *self {
            SeriesJob::L0(n, branch) => Ok(vec![series_l0(n, branch, order)?]),
            SeriesJob::Pair(n, abs_l) => series_degenerate(n, abs_l, order).map(|(u, d)| vec![u, d]),
            SeriesJob::Ground(abs_l) => Ok(vec![series_nondegenerate(abs_l, order)?]),
        }
    }
}

fn grid_spec(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    Ok(GridSpec::new(cfg.get("box-L")?, cfg.get("grid-n")?, cfg.stencil()?)?)
}

fn solver_meta(table: &mut Table, spec: GridSpec, opts: &FdOptions) {
    table.meta("h", spec.h());
    table.meta("dense-limit", opts.dense_limit);
    table.meta("memory-budget", opts.memory_budget);
    table.meta("block", opts.block);
    table.meta("eigensolver", "shift-invert block Lanczos");
}

fn fd_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let spec = grid_spec(cfg)?;
    let k: usize = cfg.get("levels")?;
    let opts = FdOptions { tol: cfg.get("tol")?, ..FdOptions::default() };
    let grid = cfg.btilde_values()?;
    // Bad input is a usage error, not a failed point.
    for &b in &grid {
        check_btilde(b)?;
    }
    if k == 0 {
        return Err(CliError::Validation("levels must be positive".into()));
    }

    let result = sweep(spec, &grid, k, &opts);
    let mut table = Table::new(&["btilde", "index", "value", "residual"]);
    solver_meta(&mut table, spec, &opts);
    for p in &result.points {
        if let Some(e) = &p.error {
            table.failures.push(format!("btilde {}: {e}", p.btilde));
        }
        for (i, l) in p.levels.iter().enumerate() {
            table.push(vec![p.btilde.into(), (i + 1).into(), l.value.into(), l.residual.into()]);
        }
    }
    Ok(table)
}

fn crossing(cfg: &RunConfig) -> Result<Table, CliError> {
    let r = ground_crossing(cfg.pair("bracket")?, cfg.get("tol")?)?;
    let mut table =
        Table::new(&["btilde_star", "bracket_lo", "bracket_hi", "gap_at_star", "curve_a", "curve_b", "method"]);
    table.push(vec![
        r.btilde_star.into(),
        r.bracket.0.into(),
        r.bracket.1.into(),
        r.gap_at_star.into(),
        r.curve_a.into(),
        r.curve_b.into(),
        format!("{:?}", r.method).into(),
    ]);
    table.meta("sector-tol", format!("{SECTOR_TOL:e}"));
    Ok(table)
}

fn classify(cfg: &RunConfig) -> Result<Table, CliError> {
    let tol: f64 = cfg.get("tol")?;
    let rows = cfg
        .btilde_values()?
        .into_par_iter()
        .map(|b| {
            let row: Vec<Cell> = match classify_ground(b, tol) {
                Ok(c) => match c.kind {
                    GroundKind::DegeneratePair { abs_l } => {
                        vec![b.into(), "degenerate-pair".into(), abs_l.into(), c.margin.into()]
                    }
                    GroundKind::NonDegenerate => vec![b.into(), "non-degenerate".into(), 0u32.into(), c.margin.into()],
                },
                Err(Error::GroundStateTie { margin, .. }) => vec![b.into(), "tie".into(), Cell::Empty, margin.into()],
                Err(e) => return Err(CliError::from(e)),
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["btilde", "kind", "abs_l", "margin"]);
    rows.into_iter().for_each(|r| table.push(r));
    table.meta("sector-tol", format!("{SECTOR_TOL:e}"));
    table.meta("guard-max-l", GROUND_GUARD_MAX_L);
    Ok(table)
}

fn bounds(cfg: &RunConfig) -> Result<Table, CliError> {
    let n_max: u32 = cfg.get("n-max")?;
    let tol: f64 = cfg.get("tol")?;
    let count = n_max as usize * (n_max as usize + 1);
    let source: String = cfg.get("source")?;
    let mut table = Table::new(&["btilde", "N", "pass", "worst_violation", "worst_index"]);
    let spectra: Vec<(f64, Vec<f64>)> = match source.as_str() {
        "sector" => {
            table.meta("sector-tol", format!("{SECTOR_TOL:e}"));
            cfg.btilde_values()?
                .into_par_iter()
                .map(|b| Ok((b, merged_eigenvalues(b, count)?)))
                .collect::<renner_core::Result<_>>()?
        }
        "fd" => {
            let spec = grid_spec(cfg)?;
            let opts = FdOptions::default();
            solver_meta(&mut table, spec, &opts);
            table.meta("fd-tol", format!("{:e}", opts.tol));
            cfg.btilde_values()?
                .into_iter()
                .map(|b| Ok((b, lowest_eigenvalues(&assemble(spec, b)?, count, opts.tol)?.eigenvalues)))
                .collect::<renner_core::Result<_>>()?
        }
        other => return Err(CliError::Validation(format!("unknown source {other:?}, expected sector or fd"))),
    };
    for (b, spectrum) in spectra {
        for a in audit_bounds(&spectrum, b, n_max, tol)? {
            table.push(vec![
                b.into(),
                a.n.into(),
                a.pass.to_string().into(),
                a.worst_violation.into(),
                a.worst_index.into(),
            ]);
        }
    }
    Ok(table)
}

fn matrixform() -> Table {
    let mut table = Table::new(&["b11", "b12", "c11", "c12"]);
    for s in matrixform_solutions() {
        table.push(vec![
            s.b11.to_string().into(),
            s.b12.to_string().into(),
            s.c11.to_string().into(),
            s.c12.to_string().into(),
        ]);
    }
    table
}
