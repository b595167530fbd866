//! Deterministic 1-D minimization: coarse grid, then golden-section refinement.

/// Result of a bracketed minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` on `[lo, hi]`.
///
/// Evaluates `grid_points` equally spaced abscissae (excluding `lo` when it is
/// zero), brackets the best one by its neighbours and runs golden-section
/// search until the bracket is narrower than `tol`. Points where `f` returns
/// `None` or a non-finite value count as +∞. Returns `None` if every grid point
/// is infeasible.
pub fn minimize_on(mut f: impl FnMut(f64) -> Option<f64>, lo: f64, hi: f64, grid_points: usize, tol: f64) -> Option<Minimum> {
    assert!(hi > lo && grid_points >= 2 && tol > 0.0);
    let mut eval = |x: f64| f(x).filter(|v| v.is_finite()).unwrap_or(f64::INFINITY);
    let step = (hi - lo) / grid_points as f64;
    // grid: lo + step, ..., hi (lo itself is usually a degenerate endpoint such as t = 0)
    let xs: Vec<f64> = (1..=grid_points).map(|i| lo + step * i as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| eval(x)).collect();
    let (best, &best_val) = vals.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1))?;
    if !best_val.is_finite() {
        return None;
    }
    let mut a = if best == 0 { lo } else { xs[best - 1] };
    let mut b = if best + 1 == xs.len() { hi } else { xs[best + 1] };

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    // the refined point can only improve on the grid
    if value <= best_val {
        Some(Minimum { x, value })
    } else {
        Some(Minimum { x: xs[best], value: best_val })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_parabola_vertex() {
        let m = minimize_on(|x| Some((x - 0.7).powi(2) + 3.0), 0.0, 4.0, 64, 1e-10).unwrap();
        // abscissa resolution is limited to ~√ε by the flat vertex
        assert_abs_diff_eq!(m.x, 0.7, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn picks_global_basin_on_grid() {
        // two wells; the deeper one at x = 3
        let f = |x: f64| Some(-(-(x - 1.0).powi(2) * 20.0).exp() - 2.0 * (-(x - 3.0).powi(2) * 20.0).exp());
        let m = minimize_on(f, 0.0, 4.0, 200, 1e-9).unwrap();
        assert_abs_diff_eq!(m.x, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let f = |x: f64| if x < 1.0 { None } else { Some((x - 1.5).abs()) };
        let m = minimize_on(f, 0.0, 2.0, 100, 1e-10).unwrap();
        assert_abs_diff_eq!(m.x, 1.5, epsilon = 1e-8);
        assert!(minimize_on(|_| None, 0.0, 1.0, 10, 1e-6).is_none());
    }

    #[test]
    fn boundary_minimum() {
        let m = minimize_on(|x| Some(x), 0.0, 1.0, 16, 1e-10).unwrap();
        assert!(m.x < 1e-8);
    }
}
