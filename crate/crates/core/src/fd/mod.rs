//! Finite-difference discretization of the full two-component operator on
//! a square box with Dirichlet walls, and its low-lying spectrum.
//!
//! Unknowns are interleaved: component `c` at node `(i, j)` (`i` along X,
//! `j` along Y) has index `2(i·n + j) + c`, so the bXY coupling sits next
//! to the diagonal and the half-bandwidth is `2n` (5-point stencil) or
//! `4n` (9-point-per-axis fourth-order stencil).

mod band;
mod lanczos;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{check_btilde, ModelParams};
use crate::table::{SpectrumPoint, SpectrumTable};

pub use band::BandLdl;
use lanczos::{dominant_eigenpairs, dot, orthonormalize_block, KrylovOptions};

pub const DEFAULT_HALF_WIDTH: f64 = 8.0;
pub const DEFAULT_POINTS: usize = 191;
pub const MIN_POINTS: usize = 16;
pub const MAX_LEVELS: usize = 64;

/// Second-difference approximation used for the kinetic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stencil {
    /// 3-point second difference per axis (5-point Laplacian), error O(h²).
    SecondOrder,
    /// 5-point second difference per axis, error O(h⁴).
    FourthOrder,
}

impl Stencil {
    /// Offsets and weights of `−½ d²/dx²` scaled by `h²`.
    fn kinetic_weights(self) -> &'static [(usize, f64)] {
        match self {
            Stencil::SecondOrder => &[(0, 1.0), (1, -0.5)],
            Stencil::FourthOrder => &[(0, 1.25), (1, -2.0 / 3.0), (2, 1.0 / 24.0)],
        }
    }

    fn reach(self) -> usize {
        self.kinetic_weights().len() - 1
    }

    pub fn max_row_nonzeros(self) -> usize {
        1 + 4 * self.reach() + 1
    }
}

impl std::fmt::Display for Stencil {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stencil::SecondOrder => "second-order",
            Stencil::FourthOrder => "fourth-order",
        })
    }
}

impl std::str::FromStr for Stencil {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "second-order" | "2" => Ok(Stencil::SecondOrder),
            "fourth-order" | "4" => Ok(Stencil::FourthOrder),
            _ => Err(Error::invalid(format!("unknown stencil {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    half_width: f64,
    n: usize,
    stencil: Stencil,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_width: DEFAULT_HALF_WIDTH, n: DEFAULT_POINTS, stencil: Stencil::FourthOrder }
    }
}

impl GridSpec {
    pub fn new(half_width: f64, n: usize, stencil: Stencil) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!("box half-width must be positive, got {half_width}")));
        }
        if n < MIN_POINTS {
            return Err(Error::invalid(format!("need at least {MIN_POINTS} points per axis, got {n}")));
        }
        Ok(Self { half_width, n, stencil })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n + 1) as f64
    }

    /// Interior node coordinate, `i = 0..n`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.h()
    }

    pub fn dim(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        2 * self.n * self.stencil.reach()
    }

    fn index(&self, i: usize, j: usize, c: usize) -> usize {
        2 * (i * self.n + j) + c
    }
}

/// Sparse symmetric operator in compressed-row form with sorted columns.
#[derive(Debug, Clone)]
pub struct GridOperator {
    spec: GridSpec,
    btilde: f64,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// The unit-scale operator (`a = 1`, `b = b̃`).
pub fn assemble(spec: GridSpec, btilde: f64) -> Result<GridOperator> {
    check_btilde(btilde)?;
    Ok(assemble_with(spec, 1.0, btilde, btilde))
}

/// The operator for physical `a`, `b`, with the box measured in the same
/// physical length. Its eigenvalues are `√a` times those of the
/// unit-scale operator on a box scaled by `a^{1/4}`.
pub fn assemble_params(spec: GridSpec, params: &ModelParams) -> GridOperator {
    assemble_with(spec, params.a(), params.b(), params.btilde())
}

fn assemble_with(spec: GridSpec, a: f64, b: f64, btilde: f64) -> GridOperator {
    let n = spec.n;
    let h2 = spec.h() * spec.h();
    let weights = spec.stencil.kinetic_weights();
    let dim = spec.dim();
    let mut row_start = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(dim * spec.stencil.max_row_nonzeros());
    let mut vals = Vec::with_capacity(cols.capacity());
    row_start.push(0);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(spec.stencil.max_row_nonzeros());
    for i in 0..n {
        let x = spec.coord(i);
        for j in 0..n {
            let y = spec.coord(j);
            let (x2, y2) = (x * x, y * y);
            let potential = [0.5 * (a + b) * x2 + 0.5 * (a - b) * y2, 0.5 * (a - b) * x2 + 0.5 * (a + b) * y2];
            for c in 0..2 {
                row.clear();
                row.push((spec.index(i, j, c), 2.0 * weights[0].1 / h2 + potential[c]));
                if b != 0.0 {
                    row.push((spec.index(i, j, 1 - c), b * x * y));
                }
                for &(d, w) in &weights[1..] {
                    if i >= d {
                        row.push((spec.index(i - d, j, c), w / h2));
                    }
                    if i + d < n {
                        row.push((spec.index(i + d, j, c), w / h2));
                    }
                    if j >= d {
                        row.push((spec.index(i, j - d, c), w / h2));
                    }
                    if j + d < n {
                        row.push((spec.index(i, j + d, c), w / h2));
                    }
                }
                row.sort_by_key(|e| e.0);
                for &(col, v) in &row {
                    cols.push(col);
                    vals.push(v);
                }
                row_start.push(cols.len());
            }
        }
    }
    GridOperator { spec, btilde, row_start, cols, vals }
}

impl GridOperator {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn btilde(&self) -> f64 {
        self.btilde
    }

    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[r]..self.row_start[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_start[r]..self.row_start[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Number of eigenvalues strictly below `x`, from the inertia of an
    /// `L D Lᵀ` factorization.
    pub fn count_below(&self, x: f64, opts: &FdOptions) -> Result<usize> {
        Ok(self.factor(x, opts)?.count_below())
    }

    fn factor(&self, shift: f64, opts: &FdOptions) -> Result<BandLdl> {
        let bw = self.spec.half_bandwidth();
        let bytes = BandLdl::storage_bytes(self.dim(), bw);
        if bytes > opts.memory_budget {
            return Err(Error::BudgetExceeded(format!(
                "band factorization needs {bytes} bytes, budget is {}",
                opts.memory_budget
            )));
        }
        BandLdl::factor(self.dim(), bw, shift, |i, j| self.get(i, j))
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; v.len()];
        self.apply(v, &mut hv);
        hv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdOptions {
    /// Required relative residual `‖Hv − λv‖ ≤ tol·|λ|` per eigenpair.
    pub tol: f64,
    /// Operators of at most this dimension are diagonalized densely.
    pub dense_limit: usize,
    /// Cap on the band factor plus Krylov basis, in bytes.
    pub memory_budget: usize,
    pub block: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { tol: 1e-9, dense_limit: 1200, memory_budget: 2 << 30, block: 8 }
    }
}

/// Eigenvalues of one grid operator, ascending, with `‖Hv − λv‖` for unit `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSpectrum {
    pub btilde: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Unit eigenvectors accompanying an [`FdSpectrum`], usable as a warm start.
pub type Eigenvectors = Vec<Vec<f64>>;

pub fn lowest_eigenvalues(op: &GridOperator, k: usize, tol: f64) -> Result<FdSpectrum> {
    let opts = FdOptions { tol, ..FdOptions::default() };
    Ok(solve(op, None, k, &[], &opts)?.0)
}

/// The `count` eigenvalues closest to `target`, ascending.
pub fn eigenvalues_near(op: &GridOperator, target: f64, count: usize, tol: f64) -> Result<FdSpectrum> {
    let opts = FdOptions { tol, ..FdOptions::default() };
    Ok(solve(op, Some(target), count, &[], &opts)?.0)
}

/// Lowest (`target = None`) or nearest-to-target eigenpairs, optionally
/// warm-started from previously computed vectors.
pub fn solve(
    op: &GridOperator,
    target: Option<f64>,
    k: usize,
    start: &[Vec<f64>],
    opts: &FdOptions,
) -> Result<(FdSpectrum, Eigenvectors)> {
    if k == 0 || k > MAX_LEVELS {
        return Err(Error::invalid(format!("number of levels must be in 1..={MAX_LEVELS}, got {k}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let dim = op.dim();
    let mut pairs =
        if dim <= opts.dense_limit { dense_pairs(op, target, k) } else { krylov_pairs(op, target, k, start, opts)? };
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut spectrum = FdSpectrum { btilde: op.btilde, eigenvalues: Vec::new(), residuals: Vec::new() };
    let mut vectors = Vec::with_capacity(pairs.len());
    for (lambda, v) in pairs {
        let r = op.residual(lambda, &v);
        if r > opts.tol * lambda.abs().max(1e-300) {
            return Err(Error::NonConvergence(format!(
                "eigenpair at {lambda} has residual {r:e} above {:e}",
                opts.tol * lambda.abs()
            )));
        }
        spectrum.eigenvalues.push(lambda);
        spectrum.residuals.push(r);
        vectors.push(v);
    }
    Ok((spectrum, vectors))
}

/// Indices ordered by distance to `target`, or ascending without one.
fn closest_first(values: &[f64], target: Option<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match target {
        Some(t) => idx.sort_by(|&a, &b| (values[a] - t).abs().total_cmp(&(values[b] - t).abs())),
        None => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
    }
    idx
}

fn dense_pairs(op: &GridOperator, target: Option<f64>, k: usize) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(op.to_dense());
    closest_first(eig.eigenvalues.as_slice(), target)
        .into_iter()
        .take(k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

fn krylov_pairs(
    op: &GridOperator,
    target: Option<f64>,
    k: usize,
    start: &[Vec<f64>],
    opts: &FdOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let dim = op.dim();
    let block = opts.block.max(1);
    let max_basis = (6 * (k + block)).max(8 * block);
    let bw_bytes = BandLdl::storage_bytes(dim, op.spec.half_bandwidth());
    let basis_bytes = (max_basis + 2 * block) * dim * std::mem::size_of::<f64>();
    if bw_bytes + basis_bytes > opts.memory_budget {
        return Err(Error::BudgetExceeded(format!(
            "grid n={} needs about {} bytes, budget is {}",
            op.spec.n,
            bw_bytes + basis_bytes,
            opts.memory_budget
        )));
    }
    let mut shift = target.unwrap_or(0.0);
    let mut factor = None;
    for attempt in 0..4 {
        match op.factor(shift, opts) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(Error::SingularShift { .. }) if attempt < 3 => {
                shift += 1e-7 * (1.0 + shift.abs());
            }
            Err(e) => return Err(e),
        }
    }
    let factor = factor.expect("factorization loop returns or breaks");

    let mut apply = |xs: &mut [Vec<f64>]| factor.solve_block_in_place(xs);
    let kopts =
        KrylovOptions { block, max_basis, max_applications: 400 * (k + block), tol: (opts.tol * 1e-2).max(1e-13) };
    let ritz = dominant_eigenpairs(dim, &mut apply, k, start, kopts)?;

    // Ritz vectors of the inverse carry rounding errors along the top of
    // the spectrum of H, which dominate ‖Hv − λv‖. One more inverse
    // application damps them; a Rayleigh–Ritz step on H then separates
    // near-degenerate pairs.
    let mut block_vecs: Vec<Vec<f64>> = ritz.into_iter().map(|p| p.1).collect();
    apply(&mut block_vecs);
    let (q, _) = orthonormalize_block(&[], block_vecs);
    let hq: Vec<Vec<f64>> = q
        .iter()
        .map(|v| {
            let mut y = vec![0.0; dim];
            op.apply(v, &mut y);
            y
        })
        .collect();
    let width = q.len();
    let small = DMatrix::from_fn(width, width, |i, j| 0.5 * (dot(&q[i], &hq[j]) + dot(&q[j], &hq[i])));
    let eig = SymmetricEigen::new(small);
    Ok(closest_first(eig.eigenvalues.as_slice(), target)
        .into_iter()
        .take(k)
        .map(|i| {
            let mut v = vec![0.0; dim];
            for (c, qv) in eig.eigenvectors.column(i).iter().zip(&q) {
                for (x, y) in v.iter_mut().zip(qv) {
                    *x += c * y;
                }
            }
            (eig.eigenvalues[i], v)
        })
        .collect())
}

/// Lowest `k` eigenvalues at every grid point, solved in order and
/// warm-started from the previous point. A failing point is recorded in
/// the table and does not stop the sweep.
pub fn sweep(spec: GridSpec, btilde_grid: &[f64], k: usize, opts: &FdOptions) -> SpectrumTable {
    let mut warm: Eigenvectors = Vec::new();
    let mut points = Vec::with_capacity(btilde_grid.len());
    for &b in btilde_grid {
        let result = assemble(spec, b).and_then(|op| solve(&op, None, k, &warm, opts));
        match result {
            Ok((spectrum, vectors)) => {
                warm = vectors;
                points.push(SpectrumPoint::from_values(b, &spectrum.eigenvalues, Some(&spectrum.residuals)));
            }
            Err(e) => {
                warm.clear();
                points.push(SpectrumPoint::failed(b, e.to_string()));
            }
        }
    }
    SpectrumTable { points }
}
