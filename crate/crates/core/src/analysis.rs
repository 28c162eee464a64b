//! Conclusions drawn from the solvers: sector-resolved crossings,
//! ground-state classification, eigenvalue bound audits and the merged,
//! multiplicity-annotated spectrum.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{l0_level_value, Branch};
use crate::error::{Error, Result};
use crate::params::{check_btilde, SectorIndex};
use crate::sector::{converged_levels_below, converged_sector_spectrum};
use crate::table::Level;

/// Convergence tolerance used for sector eigenvalues inside the analyses.
pub const SECTOR_TOL: f64 = 1e-11;

/// Largest `|l|` whose sector ground is compared in [`classify_ground`].
pub const GROUND_GUARD_MAX_L: u32 = 8;

/// Default bracket for the crossing of the `|l| = 1` ground with the
/// lowest `l = 0` level.
pub const DEFAULT_CROSSING_BRACKET: (f64, f64) = (0.85, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CrossingMethod {
    SectorBisection,
    ClosedForm,
}

/// A labeled eigenvalue curve `b̃ ↦ E(b̃)`.
pub struct Curve<'a> {
    pub label: String,
    closed_form: bool,
    eval: Box<dyn Fn(f64) -> Result<f64> + Send + Sync + 'a>,
}

impl<'a> Curve<'a> {
    /// A curve known in closed form.
    pub fn closed_form(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self { label: label.into(), closed_form: true, eval: Box::new(move |b| Ok(f(b))) }
    }

    /// `(2N+2)√(1 ± b̃)`.
    pub fn l0_level(n: u32, branch: Branch) -> Self {
        Self::closed_form(format!("l=0 N={n} {branch}"), move |b| l0_level_value(b, n, branch))
    }

    /// The `index`-th (from 0) converged eigenvalue of sector `|l|`.
    pub fn sector_level(abs_l: u32, index: usize) -> Self {
        Self {
            label: format!("|l|={abs_l} level {index}"),
            closed_form: false,
            eval: Box::new(move |b| {
                let s = converged_sector_spectrum(SectorIndex::new(abs_l as i32), b, index + 1, SECTOR_TOL)?;
                Ok(s.spectrum.eigenvalues[index])
            }),
        }
    }

    pub fn eval(&self, btilde: f64) -> Result<f64> {
        (self.eval)(btilde)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub btilde_star: f64,
    pub bracket: (f64, f64),
    pub curve_a: String,
    pub curve_b: String,
    pub method: CrossingMethod,
    /// `E_a − E_b` at `btilde_star`.
    pub gap_at_star: f64,
}

/// Bisection on `E_a − E_b` until the bracket is at most `tol` wide.
pub fn find_crossing(a: &Curve, b: &Curve, bracket: (f64, f64), tol: f64) -> Result<CrossingReport> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::invalid(format!("bracket [{lo}, {hi}] is empty")));
    }
    check_btilde(lo)?;
    check_btilde(hi)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let diff = |x: f64| -> Result<f64> { Ok(a.eval(x)? - b.eval(x)?) };
    let d_lo = diff(lo)?;
    let d_hi = diff(hi)?;
    if d_lo * d_hi > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    let lo_sign = if d_lo == 0.0 { -d_hi.signum() } else { d_lo.signum() };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let d = diff(mid)?;
        if d == 0.0 {
            lo = mid - 0.25 * tol;
            hi = mid + 0.25 * tol;
            break;
        }
        if d.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let star = 0.5 * (lo + hi);
    let method =
        if a.closed_form && b.closed_form { CrossingMethod::ClosedForm } else { CrossingMethod::SectorBisection };
    Ok(CrossingReport {
        btilde_star: star,
        bracket: (lo, hi),
        curve_a: a.label.clone(),
        curve_b: b.label.clone(),
        method,
        gap_at_star: diff(star)?,
    })
}

/// Crossing of the `|l| = 1` sector ground with `2√(1 − b̃)`.
pub fn ground_crossing(bracket: (f64, f64), tol: f64) -> Result<CrossingReport> {
    find_crossing(&Curve::sector_level(1, 0), &Curve::l0_level(0, Branch::Minus), bracket, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroundKind {
    /// Lowest level belongs to the ±|l| sector pair.
    DegeneratePair { abs_l: u32 },
    /// Lowest level is the `l = 0` state `2√(1 − b̃)`.
    NonDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateClass {
    pub btilde: f64,
    pub kind: GroundKind,
    /// Energy gap to the best competitor of the other kind.
    pub margin: f64,
}

/// Compares the `l = 0` ground with the ground of every sector
/// `1 ≤ |l| ≤ 8`; gaps below `tol` are reported as a tie.
pub fn classify_ground(btilde: f64, tol: f64) -> Result<GroundStateClass> {
    check_btilde(btilde)?;
    if btilde == 0.0 {
        return Err(Error::invalid("btilde must be positive"));
    }
    let l0 = l0_level_value(btilde, 0, Branch::Minus);
    let grounds = (1..=GROUND_GUARD_MAX_L)
        .into_par_iter()
        .map(|abs_l| {
            let s = converged_sector_spectrum(SectorIndex::new(abs_l as i32), btilde, 1, SECTOR_TOL)?;
            Ok((abs_l, s.spectrum.eigenvalues[0]))
        })
        .collect::<Result<Vec<_>>>()?;
    let (abs_l, pair) = grounds.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("at least one sector");
    let margin = (l0 - pair).abs();
    if margin < tol {
        return Err(Error::GroundStateTie { btilde, margin });
    }
    let kind = if pair < l0 { GroundKind::DegeneratePair { abs_l } } else { GroundKind::NonDegenerate };
    Ok(GroundStateClass { btilde, kind, margin })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundAudit {
    pub n: u32,
    pub pass: bool,
    /// Largest distance outside `[N√(1−b̃), N√(1+b̃)]`, 0 when inside.
    pub worst_violation: f64,
    /// 1-based position in the spectrum of the worst entry.
    pub worst_index: usize,
}

/// Checks that entries `N(N−1)+1 ..= N(N+1)` (1-based, counting
/// multiplicity) of an ascending spectrum lie in `[N√(1−b̃), N√(1+b̃)]`.
pub fn audit_bounds(spectrum: &[f64], btilde: f64, n_max: u32, tol: f64) -> Result<Vec<BoundAudit>> {
    check_btilde(btilde)?;
    let need = (n_max * (n_max + 1)) as usize;
    if spectrum.len() < need {
        return Err(Error::InsufficientSpectrum { got: spectrum.len(), need });
    }
    let (lower, upper) = ((1.0 - btilde).sqrt(), (1.0 + btilde).sqrt());
    Ok((1..=n_max)
        .map(|n| {
            let (lo, hi) = (n as f64 * lower, n as f64 * upper);
            let first = (n * (n - 1)) as usize;
            let last = (n * (n + 1)) as usize;
            let (worst_index, worst_violation) = (first..last)
                .map(|i| (i + 1, (lo - spectrum[i]).max(spectrum[i] - hi).max(0.0)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty range");
            BoundAudit { n, pass: worst_violation <= tol, worst_violation, worst_index }
        })
        .collect())
}

/// Every converged sector level below `cutoff`, over all sectors that can
/// contribute, ascending. Levels with `l ≠ 0` carry multiplicity 2.
pub fn sector_levels_below(btilde: f64, cutoff: f64, tol: f64) -> Result<Vec<Level>> {
    check_btilde(btilde)?;
    // Sector |l| has nothing below |l|√(1 − b̃).
    let max_l = (cutoff / (1.0 - btilde).sqrt()).floor() as u32;
    let per_sector = (0..=max_l)
        .into_par_iter()
        .map(|abs_l| {
            let s = converged_levels_below(SectorIndex::new(abs_l as i32), btilde, cutoff, tol)?;
            Ok(s.eigenvalues
                .iter()
                .zip(&s.residuals)
                .map(|(&value, &r)| Level {
                    value,
                    multiplicity: if abs_l == 0 { 1 } else { 2 },
                    abs_l: Some(abs_l),
                    residual: Some(r),
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut levels: Vec<Level> = per_sector.into_iter().flatten().collect();
    levels.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(levels)
}

/// The `k` lowest labeled levels of the merged sector spectrum.
pub fn degeneracy_pairs(btilde: f64, k: usize) -> Result<Vec<Level>> {
    let mut levels = lowest_levels(btilde, |levels| levels.len() >= k)?;
    levels.truncate(k);
    Ok(levels)
}

/// The `count` lowest eigenvalues of the full operator, each repeated
/// according to its multiplicity.
pub fn merged_eigenvalues(btilde: f64, count: usize) -> Result<Vec<f64>> {
    let total = |levels: &[Level]| levels.iter().map(|l| l.multiplicity as usize).sum::<usize>();
    let levels = lowest_levels(btilde, |levels| total(levels) >= count)?;
    let mut out: Vec<f64> = levels.iter().flat_map(|l| std::iter::repeat_n(l.value, l.multiplicity as usize)).collect();
    out.truncate(count);
    Ok(out)
}

/// Raises the energy cutoff until `enough` holds. Everything below the
/// cutoff is complete, so a prefix of the result is exact.
fn lowest_levels(btilde: f64, enough: impl Fn(&[Level]) -> bool) -> Result<Vec<Level>> {
    check_btilde(btilde)?;
    let mut cutoff = 2.0;
    for _ in 0..40 {
        let levels = sector_levels_below(btilde, cutoff, SECTOR_TOL)?;
        if enough(&levels) {
            return Ok(levels);
        }
        cutoff *= 1.5;
    }
    Err(Error::NonConvergence(format!("merged spectrum at btilde={btilde} did not fill up")))
}
