//! Cross-checks between the independent solvers.

use approx::assert_relative_eq;
use renner_core::analysis::merged_eigenvalues;
use renner_core::fd::{assemble, lowest_eigenvalues, solve, sweep, FdOptions, GridSpec, Stencil};
use renner_core::perturbation::{series_degenerate, series_nondegenerate};
use renner_core::sector::converged_sector_spectrum;
use renner_core::SectorIndex;

fn grid(n: usize) -> GridSpec {
    GridSpec::new(8.0, n, Stencil::FourthOrder).unwrap()
}

fn sector(abs_l: u32, b: f64, k: usize) -> Vec<f64> {
    converged_sector_spectrum(SectorIndex::new(abs_l as i32), b, k, 1e-12).unwrap().spectrum.eigenvalues
}

#[test]
fn uncoupled_ground_pair() {
    let op = assemble(grid(127), 0.0).unwrap();
    let s = lowest_eigenvalues(&op, 2, 1e-9).unwrap();
    for v in s.eigenvalues {
        assert!((v - 1.0).abs() < 2e-3, "{v}");
    }
}

#[test]
fn grid_matches_merged_sectors() {
    let op = assemble(grid(95), 0.5).unwrap();
    let fd = lowest_eigenvalues(&op, 10, 1e-9).unwrap().eigenvalues;
    let merged = merged_eigenvalues(0.5, 10).unwrap();
    for (a, b) in fd.iter().zip(&merged) {
        assert!((a - b).abs() < 2e-3, "{a} vs {b}");
    }
    // the lowest l = 0 level is the third eigenvalue, after the |l| = 1 pair
    assert!((fd[2] - 2.0 * 0.5f64.sqrt()).abs() < 1e-3);
}

#[test]
fn sweep_point_equals_direct_solve() {
    let spec = GridSpec::new(7.0, 48, Stencil::FourthOrder).unwrap();
    let table = sweep(spec, &[0.3], 6, &FdOptions::default());
    let direct = lowest_eigenvalues(&assemble(spec, 0.3).unwrap(), 6, 1e-9).unwrap();
    assert_eq!(table.points[0].values(), direct.eigenvalues);
}

#[test]
fn sweep_resolves_closed_form_coincidence() {
    // 2√1.6 = 4√0.4 at b̃ = 0.6
    let table = sweep(grid(127), &[0.58, 0.6], 17, &FdOptions::default());
    assert_eq!(table.failures().count(), 0);
    let target = 2.0 * 1.6f64.sqrt();
    let near: Vec<f64> = table.points[1].values().into_iter().filter(|v| (v - target).abs() < 5e-3).collect();
    assert_eq!(near.len(), 2, "{near:?}");
}

#[test]
fn box_size_is_sufficient() {
    // Same spacing, growing box at strong coupling, where the soft
    // direction has frequency √(1 − b̃) ≈ 0.32 and decays slowest.
    let h = 16.0 / 128.0;
    let levels = |half_width: f64| {
        let n = (2.0 * half_width / h).round() as usize - 1;
        let spec = GridSpec::new(half_width, n, Stencil::FourthOrder).unwrap();
        assert!((spec.h() - h).abs() < 1e-14);
        lowest_eigenvalues(&assemble(spec, 0.9).unwrap(), 17, 1e-10).unwrap().eigenvalues
    };
    let (l8, l10, l12) = (levels(8.0), levels(10.0), levels(12.0));
    let change = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    // The default box costs well under the 2e-3 reproduction tolerance ...
    assert!(change(&l8, &l10) < 5e-4, "{}", change(&l8, &l10));
    // ... and the box error decays like a Gaussian tail.
    assert!(change(&l10, &l12) < 1e-6, "{}", change(&l10, &l12));
}

#[test]
fn second_order_grid_converges_quadratically() {
    let target = 2.0 * 0.5f64.sqrt();
    let err = |n| {
        let op = assemble(GridSpec::new(8.0, n, Stencil::SecondOrder).unwrap(), 0.5).unwrap();
        let (s, _) = solve(&op, Some(target), 1, &[], &FdOptions::default()).unwrap();
        (s.eigenvalues[0] - target).abs()
    };
    let (e1, e2, e3) = (err(31), err(63), err(127));
    assert!(e1 / e2 >= 3.0 && e2 / e3 >= 3.0, "{e1} {e2} {e3}");
}

/// Richardson extrapolation of `D(h) = D₀ + c₁h² + c₂h⁴ + …`.
fn richardson(d: [f64; 3]) -> f64 {
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

#[test]
fn second_order_coefficients_match_finite_differences() {
    for abs_l in [1u32, 2, 5] {
        let s = series_nondegenerate(abs_l, 2).unwrap();
        let e0 = abs_l as f64;
        let steps = [0.04, 0.02, 0.01];
        let d = steps.map(|h| (sector(abs_l, h, 1)[0] - e0) / (h * h));
        assert_relative_eq!(richardson(d), s.coeffs[2].to_f64(), max_relative = 1e-6);
    }
}

#[test]
fn first_order_splitting_matches_finite_differences() {
    let (up, down) = series_degenerate(1, 2, 2).unwrap();
    let e0 = 4.0;
    let steps = [0.004, 0.002, 0.001];
    // up branch is the 3rd sector level for small b̃, down the 2nd
    let slope = |idx: usize| -> [f64; 3] {
        steps.map(|h| {
            let vals = sector(2, h, 3);
            // symmetric quotient removes the even terms: use E(h) − E0 − E2 h²
            (vals[idx] - e0 - up.coeffs[2].to_f64() * h * h) / h
        })
    };
    let d_up = slope(2);
    let d_down = slope(1);
    // remaining error is O(h²)
    assert_relative_eq!(richardson(d_up), up.coeffs[1].to_f64(), max_relative = 1e-6);
    assert_relative_eq!(richardson(d_down), down.coeffs[1].to_f64(), max_relative = 1e-6);
}

#[test]
fn degenerate_branches_track_sector_levels() {
    let b = 0.02;
    for (n, abs_l) in [(1, 1), (2, 1), (1, 3)] {
        let (up, down) = series_degenerate(n, abs_l, 12).unwrap();
        let levels = sector(abs_l, b, 2 * n as usize + 2);
        let (lo, hi) = (levels[2 * n as usize - 1], levels[2 * n as usize]);
        assert!((down.eval(b, 12).unwrap() - lo).abs() < 1e-10);
        assert!((up.eval(b, 12).unwrap() - hi).abs() < 1e-10);
    }
}
