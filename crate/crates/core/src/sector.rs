//! Rayleigh–Ritz diagonalization of the radial sector operators in a
//! truncated Laguerre basis.
//!
//! For `l ≠ 0` the sector operator is `H₀ + b̃ Ṽ` with `H₀` diagonal in the
//! basis `{φ_{N,|l|-1}} ⊕ {φ_{N,|l|+1}}` (eigenvalues `2N+|l|` and
//! `2N+|l|+2`) and `Ṽ = (r²/2) σₓ`. The coupling block
//! `⟨φ_{N,m-1}, (r²/2) φ_{K,m+1}⟩` only has the three diagonals
//! `K ∈ {N-2, N-1, N}`, by the connection formula
//! `L_N^{m-1} = L_N^{m+1} - 2 L_{N-1}^{m+1} + L_{N-2}^{m+1}`.
//!
//! The `l = 0` sector is assembled in its decoupled form: two radial
//! oscillators `(1 ± b̃) r²/2` sharing the superscript-1 basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laguerre::{laguerre_table, normalization};
use crate::params::{check_btilde, SectorIndex, SectorKind};
use crate::quadrature::GaussLaguerre;

/// Hard cap on modes per component.
pub const MAX_MODES: usize = 4096;

/// Default truncation for one-shot spectra.
pub const DEFAULT_SIZE: usize = 200;

/// Laguerre superscripts of the basis of each component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BasisLayout {
    pub upper: u32,
    pub lower: u32,
}

impl BasisLayout {
    pub fn for_sector(sector: SectorIndex) -> Self {
        let a = sector.abs_l();
        match sector.l() {
            0 => Self { upper: 1, lower: 1 },
            l if l > 0 => Self { upper: a - 1, lower: a + 1 },
            _ => Self { upper: a + 1, lower: a - 1 },
        }
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::invalid("basis size must be positive"));
    }
    if size > MAX_MODES {
        return Err(Error::BudgetExceeded(format!("{size} modes per component exceeds the cap of {MAX_MODES}")));
    }
    Ok(())
}

/// `⟨φ_{N,|l|-1}, (r²/2) φ_{K,|l|+1}⟩` for `N, K < size`, from the closed
/// three-diagonal form.
pub fn potential_matrix_elements(abs_l: u32, size: usize) -> Result<DMatrix<f64>> {
    if abs_l == 0 {
        return Err(Error::invalid("abs_l must be positive"));
    }
    check_size(size)?;
    let m = abs_l as f64;
    // √(N!/(N+m-1)!) and √((K+m+1)!/K!)
    let upper_scale: Vec<f64> = (0..size)
        .map(|n| {
            let n = n as f64;
            (-0.5 * (1..abs_l).map(|j| (n + j as f64).ln()).sum::<f64>()).exp()
        })
        .collect();
    let lower_scale: Vec<f64> = (0..size)
        .map(|k| {
            let k = k as f64;
            (0.5 * (1..=abs_l + 1).map(|j| (k + j as f64).ln()).sum::<f64>()).exp()
        })
        .collect();
    let _ = m;
    let mut t = DMatrix::zeros(size, size);
    for n in 0..size {
        for (offset, coef) in [(0usize, 1.0), (1, -2.0), (2, 1.0)] {
            if n >= offset {
                let k = n - offset;
                t[(n, k)] = 0.5 * coef * upper_scale[n] * lower_scale[k];
            }
        }
    }
    Ok(t)
}

/// The same matrix by Gauss–Laguerre quadrature of the polynomial
/// integrand. Limited by the quadrature node budget.
pub fn potential_matrix_elements_quadrature(abs_l: u32, size: usize) -> Result<DMatrix<f64>> {
    if abs_l == 0 {
        return Err(Error::invalid("abs_l must be positive"));
    }
    check_size(size)?;
    let m = abs_l;
    // x^{m+1} L_N^{m-1} L_K^{m+1}
    let rule = GaussLaguerre::for_degree(m as usize + 1 + 2 * (size - 1))?;
    let up: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| laguerre_table(size, m - 1, x)).collect();
    let dn: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| laguerre_table(size, m + 1, x)).collect();
    let mut t = DMatrix::zeros(size, size);
    for n in 0..size {
        for k in 0..size {
            let s: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .enumerate()
                .map(|(i, (&x, &w))| w * x.powi(m as i32 + 1) * up[i][n] * dn[i][k])
                .sum();
            t[(n, k)] = 0.25 * normalization(n as u32, m - 1) * normalization(k as u32, m + 1) * s;
        }
    }
    Ok(t)
}

/// `⟨φ_{N,1}, (r²/2) φ_{K,1}⟩`: half the Jacobi matrix of `x` for the
/// superscript-1 Laguerre functions.
fn l0_potential_matrix(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            (i + 1) as f64
        } else if i.abs_diff(j) == 1 {
            let n = i.min(j) as f64;
            -0.5 * ((n + 1.0) * (n + 2.0)).sqrt()
        } else {
            0.0
        }
    })
}

/// A sector Hamiltonian in unit-scale energy, rows `0..size` for the upper
/// component and `size..2·size` for the lower one.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub sector: SectorIndex,
    pub btilde: f64,
    pub size: usize,
    pub layout: BasisLayout,
    pub matrix: DMatrix<f64>,
}

pub fn build_sector(sector: SectorIndex, btilde: f64, size: usize) -> Result<SectorOperator> {
    check_btilde(btilde)?;
    check_size(size)?;
    let layout = BasisLayout::for_sector(sector);
    let dim = 2 * size;
    let mut h = DMatrix::zeros(dim, dim);
    match sector.kind() {
        SectorKind::ZeroSector => {
            let t0 = l0_potential_matrix(size);
            for i in 0..size {
                for j in 0..size {
                    let diag = if i == j { (2 * i + 2) as f64 } else { 0.0 };
                    h[(i, j)] = diag + btilde * t0[(i, j)];
                    h[(size + i, size + j)] = diag - btilde * t0[(i, j)];
                }
            }
        }
        SectorKind::NonzeroSector => {
            let a = sector.abs_l() as usize;
            let t = potential_matrix_elements(sector.abs_l(), size)?;
            // Positive l: upper block carries superscript |l|-1.
            let (first, second) = if sector.l() > 0 { (0, size) } else { (size, 0) };
            for n in 0..size {
                h[(first + n, first + n)] = (2 * n + a) as f64;
                h[(second + n, second + n)] = (2 * n + a + 2) as f64;
            }
            if btilde != 0.0 {
                for n in 0..size {
                    for k in n.saturating_sub(2)..=n {
                        let v = btilde * t[(n, k)];
                        h[(first + n, second + k)] = v;
                        h[(second + k, first + n)] = v;
                    }
                }
            }
        }
    }
    Ok(SectorOperator { sector, btilde, size, layout, matrix: h })
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorSpectrum {
    pub sector: SectorIndex,
    pub btilde: f64,
    /// Modes per component used.
    pub size: usize,
    pub eigenvalues: Vec<f64>,
    /// `‖Hv − λv‖` per eigenpair.
    pub residuals: Vec<f64>,
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// The `k` lowest eigenpairs of a sector operator.
pub fn sector_spectrum(op: &SectorOperator, k: usize) -> Result<SectorSpectrum> {
    let dim = op.matrix.nrows();
    if k == 0 || k > dim {
        return Err(Error::invalid(format!("k={k} must lie in 1..={dim}")));
    }
    let eig = SymmetricEigen::new(op.matrix.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let lambda = eig.eigenvalues[i];
        let v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let r = &op.matrix * &v - &v * lambda;
        eigenvalues.push(lambda);
        residuals.push(r.norm());
    }
    Ok(SectorSpectrum { sector: op.sector, btilde: op.btilde, size: op.size, eigenvalues, residuals })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Continuation {
    pub start: usize,
    pub cap: usize,
}

impl Default for Continuation {
    fn default() -> Self {
        Self { start: 50, cap: 2048 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergedSpectrum {
    pub spectrum: SectorSpectrum,
    /// `(size, k lowest eigenvalues)` for each truncation tried.
    pub trail: Vec<(usize, Vec<f64>)>,
}

pub fn converged_sector_spectrum(sector: SectorIndex, btilde: f64, k: usize, tol: f64) -> Result<ConvergedSpectrum> {
    converged_sector_spectrum_with(sector, btilde, k, tol, Continuation::default())
}

/// Doubles the basis until the `k` lowest eigenvalues move by less than
/// `tol` between successive truncations.
pub fn converged_sector_spectrum_with(
    sector: SectorIndex,
    btilde: f64,
    k: usize,
    tol: f64,
    cont: Continuation,
) -> Result<ConvergedSpectrum> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    check_btilde(btilde)?;
    let mut size = cont.start.max(k.div_ceil(2) + 1).min(cont.cap);
    let mut trail: Vec<(usize, Vec<f64>)> = Vec::new();
    loop {
        let op = build_sector(sector, btilde, size)?;
        let vals: Vec<f64> = sorted_eigenvalues(&op.matrix).into_iter().take(k).collect();
        if let Some((_, prev)) = trail.last() {
            let change = prev.iter().zip(&vals).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if change < tol {
                trail.push((size, vals));
                let spectrum = sector_spectrum(&op, k)?;
                return Ok(ConvergedSpectrum { spectrum, trail });
            }
        }
        trail.push((size, vals));
        if size >= cont.cap {
            return Err(Error::NonConvergence(format!(
                "sector {sector} at btilde={btilde}: {k} lowest eigenvalues not within {tol:e} at {size} modes"
            )));
        }
        size = (2 * size).min(cont.cap);
    }
}

/// Every eigenvalue of the sector below `cutoff`, converged to `tol`.
pub fn converged_levels_below(sector: SectorIndex, btilde: f64, cutoff: f64, tol: f64) -> Result<SectorSpectrum> {
    // No sector eigenvalue lies below |l|√(1-b̃) (2√(1-b̃) for l = 0).
    let floor = (sector.abs_l().max(2)) as f64 * (1.0 - btilde).sqrt();
    if floor >= cutoff {
        return Ok(SectorSpectrum { sector, btilde, size: 0, eigenvalues: Vec::new(), residuals: Vec::new() });
    }
    let mut k = 4;
    loop {
        let conv = converged_sector_spectrum(sector, btilde, k, tol)?;
        let mut s = conv.spectrum;
        if s.eigenvalues.last().is_some_and(|&v| v >= cutoff) {
            let keep = s.eigenvalues.iter().take_while(|&&v| v < cutoff).count();
            s.eigenvalues.truncate(keep);
            s.residuals.truncate(keep);
            return Ok(s);
        }
        k *= 2;
    }
}

/// A two-component radial operator
/// `-½(∂²_r + r⁻¹∂_r) + diag(c₀, c₁)/(2r²) + (r²/2) Q`, assembled by
/// quadrature directly from its differential form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOperator {
    pub centrifugal: [f64; 2],
    pub quadratic: [[f64; 2]; 2],
}

impl RadialOperator {
    /// The coupled-component form for any `l`, including `l = 0`.
    pub fn coupled(l: i32, btilde: f64) -> Self {
        let l = l as f64;
        Self { centrifugal: [(l - 1.0).powi(2), (l + 1.0).powi(2)], quadratic: [[1.0, btilde], [btilde, 1.0]] }
    }

    /// The decoupled `l = 0` form used by [`build_sector`].
    pub fn decoupled_l0(btilde: f64) -> Self {
        Self { centrifugal: [1.0, 1.0], quadratic: [[1.0 + btilde, 0.0], [0.0, 1.0 - btilde]] }
    }

    /// The operator matching [`build_sector`] for this sector.
    pub fn for_sector(sector: SectorIndex, btilde: f64) -> Self {
        match sector.kind() {
            SectorKind::ZeroSector => Self::decoupled_l0(btilde),
            SectorKind::NonzeroSector => Self::coupled(sector.l(), btilde),
        }
    }

    /// Matrix in the basis with the given superscripts, by Gauss–Laguerre
    /// quadrature in `x = r²`.
    pub fn matrix(&self, layout: BasisLayout, size: usize) -> Result<DMatrix<f64>> {
        check_size(size)?;
        let ms = [layout.upper, layout.lower];
        for c in 0..2 {
            if ms[c] == 0 && self.centrifugal[c] != 0.0 {
                return Err(Error::invalid("centrifugal term is singular on a superscript-0 basis"));
            }
        }
        if self.quadratic[0][1] != 0.0 && !(ms[0] + ms[1]).is_multiple_of(2) {
            return Err(Error::invalid("coupling integrand is not polynomial for this layout"));
        }
        let mmax = ms[0].max(ms[1]) as usize;
        let rule = GaussLaguerre::for_degree(mmax + 2 * size + 2)?;
        // Per component and node: normalized L_K^m(x) and G_K(x) with
        // f' = e^{-x/2} r^{m-1} G, divided by x when m = 0.
        let tables: Vec<Vec<(Vec<f64>, Vec<f64>)>> = ms
            .iter()
            .map(|&m| {
                rule.nodes
                    .iter()
                    .map(|&x| {
                        let l = laguerre_table(size, m, x);
                        let lp = laguerre_table(size.max(1), m + 1, x);
                        let mut vals = Vec::with_capacity(size);
                        let mut grads = Vec::with_capacity(size);
                        for k in 0..size {
                            let b = normalization(k as u32, m);
                            let dl = if k == 0 { 0.0 } else { -lp[k - 1] };
                            let g = if m == 0 { 2.0 * dl - l[k] } else { m as f64 * l[k] + 2.0 * x * dl - x * l[k] };
                            vals.push(b * l[k]);
                            grads.push(b * g);
                        }
                        (vals, grads)
                    })
                    .collect()
            })
            .collect();

        let dim = 2 * size;
        let mut h = DMatrix::zeros(dim, dim);
        for (ci, &mi) in ms.iter().enumerate() {
            for (cj, &mj) in ms.iter().enumerate() {
                let q = self.quadratic[ci][cj];
                if ci != cj && q == 0.0 {
                    continue;
                }
                let half = ((mi + mj) / 2) as i32;
                for i in 0..size {
                    for j in 0..size {
                        let mut acc = 0.0;
                        for (p, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                            let (vi, gi) = (&tables[ci][p].0, &tables[ci][p].1);
                            let (vj, gj) = (&tables[cj][p].0, &tables[cj][p].1);
                            // r^{mi+mj} f g r dr = x^{half} (...) dx / 2
                            let mut term = 0.5 * q * x.powi(half + 1) * vi[i] * vj[j];
                            if ci == cj {
                                let m = mi as i32;
                                let kin = if m == 0 { x * gi[i] * gj[j] } else { x.powi(m - 1) * gi[i] * gj[j] };
                                term += 0.5 * kin;
                                if self.centrifugal[ci] != 0.0 {
                                    term += 0.5 * self.centrifugal[ci] * x.powi(m - 1) * vi[i] * vj[j];
                                }
                            }
                            acc += w * 0.5 * term;
                        }
                        h[(ci * size + i, cj * size + j)] = acc;
                    }
                }
            }
        }
        Ok(h)
    }
}
