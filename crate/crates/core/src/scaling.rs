//! Precision scaling of the parity estimator up to ~10⁵ qubits.
//!
//! The parity signal is evaluated in log-polar form so that rⁿ underflows to
//! zero instead of producing NaN, and white noise of visibility v enters only
//! as a factor v on ⟨P_x⟩ and its derivative.

use std::f64::consts::TAU;

use crate::channel::{coefficient_derivatives, coefficients, CoefficientDerivatives, CoefficientSet, NoiseModel};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrology::{error_propagation, MetrologyPoint, ReferenceBounds, TIME_GRID, TIME_TOL};
use crate::optimize::minimize_on;

/// exp(x) underflows to zero below this.
const LOG_UNDERFLOW: f64 = -745.0;
/// Grid points per fringe period in the time scan.
const POINTS_PER_FRINGE: f64 = 16.0;
/// Largest full-range scan before switching to a warm-started bracket.
const MAX_FULL_SCAN: usize = 1 << 14;
/// Warm-start bracket relative to the previous optimum.
const WARM_BRACKET: (f64, f64) = (0.7, 1.3);

/// ((f+b−ic)ⁿ + (f+b+ic)ⁿ)/2 computed as rⁿ cos(nφ).
pub fn stable_parity(n: usize, k: &CoefficientSet) -> f64 {
    let z = k.parity_factor();
    let (r, phi) = z.to_polar();
    match log_pow(r, n as f64) {
        Some(rn) => rn * (n as f64 * phi).cos(),
        None => 0.0,
    }
}

/// Re[n zⁿ⁻¹ z′] in the same log-polar form.
pub fn stable_parity_derivative(n: usize, k: &CoefficientSet, dk: &CoefficientDerivatives) -> f64 {
    let z = k.parity_factor();
    let (r, phi) = z.to_polar();
    let dz = num_complex::Complex64::new(dk.df + dk.db, -dk.dc);
    let m = n as f64 - 1.0;
    match log_pow(r, m) {
        Some(rm) => n as f64 * rm * (num_complex::Complex64::from_polar(1.0, m * phi) * dz).re,
        None => 0.0,
    }
}

/// rᵖ via exp(p ln r), or `None` when it underflows.
fn log_pow(r: f64, p: f64) -> Option<f64> {
    if p == 0.0 {
        return Some(1.0);
    }
    if r == 0.0 {
        return None;
    }
    let l = p * r.ln();
    (l >= LOG_UNDERFLOW).then(|| l.exp())
}

/// Δ²ω·T at large n for a probe of visibility `v`.
pub fn stable_precision(n: usize, model: &NoiseModel, omega: f64, t: f64, v: f64) -> Result<MetrologyPoint> {
    let k = coefficients(model, omega, t)?;
    let dk = coefficient_derivatives(model, omega, t)?;
    error_propagation(n, t, v * stable_parity(n, &k), v * stable_parity_derivative(n, &k, &dk))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeRule {
    /// Re-optimize t for every n.
    Optimize,
    /// t = c·nᵉ.
    Proportional { c: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    /// Per-qubit fidelity; an n-qubit probe has visibility f0ⁿ.
    pub f0: f64,
    pub n_grid: Vec<usize>,
    pub t_rule: TimeRule,
    /// Fixed white-noise fraction; visibility is further multiplied by 1 − fixed_noise.
    pub fixed_noise: Option<f64>,
    /// Inclusive n range of the slope fit.
    pub window: (f64, f64),
    pub execution: Execution,
}

impl ScalingConfig {
    pub fn new(f0: f64, n_grid: Vec<usize>) -> Self {
        let max = n_grid.last().copied().unwrap_or(1) as f64;
        ScalingConfig {
            f0,
            n_grid,
            t_rule: TimeRule::Optimize,
            fixed_noise: None,
            window: (max / 100.0, max),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0 > 0.0 && self.f0 <= 1.0) {
            return Err(Error::OutOfRange { name: "f0", value: self.f0, range: "(0, 1]" });
        }
        if let Some(x) = self.fixed_noise {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::OutOfRange { name: "fixed_noise", value: x, range: "[0, 1)" });
            }
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel("n_grid must be non-empty, positive and strictly ascending".into()));
        }
        if let TimeRule::Proportional { c, .. } = self.t_rule {
            if !(c > 0.0) {
                return Err(Error::OutOfRange { name: "c", value: c, range: "(0, ∞)" });
            }
        }
        Ok(())
    }

    pub fn visibility(&self, n: usize) -> f64 {
        let v = log_pow(self.f0, n as f64).unwrap_or(0.0);
        v * (1.0 - self.fixed_noise.unwrap_or(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    pub t: f64,
    pub var_omega_t: f64,
    pub visibility: f64,
    pub sql: f64,
    pub hl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingCurve {
    pub f0: f64,
    pub fixed_noise: Option<f64>,
    pub points: Vec<ScalingPoint>,
    /// n values dropped because the signal vanished (zero derivative).
    pub skipped: Vec<usize>,
    pub window: (f64, f64),
    /// `None` when fewer than three points fall in the window.
    pub fitted_slope: Option<f64>,
}

impl ScalingCurve {
    /// First n at which the curve rises above the SQL line after having been below it.
    pub fn sql_crossing(&self) -> Option<usize> {
        let below = self.points.iter().position(|p| p.var_omega_t < p.sql)?;
        self.points[below..].iter().find(|p| p.var_omega_t > p.sql).map(|p| p.n)
    }
}

/// Time-scan grid size that puts `POINTS_PER_FRINGE` samples on each fringe.
fn scan_points(width: f64, n: usize, model: &NoiseModel, omega: f64) -> usize {
    let rate = omega.abs().max(model.gamma);
    let fringes = width * n as f64 * rate / TAU;
    ((POINTS_PER_FRINGE * fringes).ceil() as usize).max(TIME_GRID)
}

/// Computes one precision-scaling curve.
pub fn scaling_sweep(cfg: &ScalingConfig, model: &NoiseModel, omega: f64) -> Result<ScalingCurve> {
    let bounds = ReferenceBounds::new(model, omega)?;
    sweep_with_bounds(cfg, model, omega, &bounds)
}

/// Computes several curves in parallel, sharing the SQL/HL anchor.
pub fn scaling_sweeps(cfgs: &[ScalingConfig], model: &NoiseModel, omega: f64, exec: Execution) -> Result<Vec<ScalingCurve>> {
    let bounds = ReferenceBounds::new(model, omega)?;
    exec.map_slice(cfgs, |cfg| sweep_with_bounds(cfg, model, omega, &bounds)).into_iter().collect()
}

fn sweep_with_bounds(cfg: &ScalingConfig, model: &NoiseModel, omega: f64, bounds: &ReferenceBounds) -> Result<ScalingCurve> {
    cfg.validate()?;
    model.validate()?;
    let evaluated: Vec<(usize, Result<MetrologyPoint>)> = match cfg.t_rule {
        TimeRule::Proportional { c, exponent } => cfg.execution.map_slice(&cfg.n_grid, |&n| {
            (n, stable_precision(n, model, omega, c * (n as f64).powf(exponent), cfg.visibility(n)))
        }),
        TimeRule::Optimize => {
            if model.gamma == 0.0 {
                return Err(Error::NoInteriorMinimum);
            }
            optimize_chain(cfg, model, omega)
        }
    };
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (n, r) in evaluated {
        match r {
            Ok(p) => points.push(ScalingPoint {
                n,
                t: p.t,
                var_omega_t: p.var_omega_t,
                visibility: cfg.visibility(n),
                sql: bounds.sql(n),
                hl: bounds.hl(n),
            }),
            Err(Error::DivergentPrecision { .. }) | Err(Error::NoInteriorMinimum) => {
                log::debug!("scaling: no usable signal at n = {n} (f0 = {})", cfg.f0);
                skipped.push(n);
            }
            Err(e) => return Err(e),
        }
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.var_omega_t)).collect();
    let fitted_slope = match fit_loglog_slope(&xy, cfg.window) {
        Ok(s) => Some(s),
        Err(Error::InsufficientPoints { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ScalingCurve { f0: cfg.f0, fixed_noise: cfg.fixed_noise, points, skipped, window: cfg.window, fitted_slope })
}

/// Optimizes t along the n grid. Small n scan the whole range (0, 4/γ];
/// once that scan would need more than `MAX_FULL_SCAN` points to resolve the
/// fringes, the bracket is warm-started around the previous optimum.
fn optimize_chain(cfg: &ScalingConfig, model: &NoiseModel, omega: f64) -> Vec<(usize, Result<MetrologyPoint>)> {
    let t_max = 4.0 / model.gamma;
    let mut prev: Option<f64> = None;
    let mut out = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let v = cfg.visibility(n);
        let full = scan_points(t_max, n, model, omega);
        let (lo, hi) = match prev {
            Some(t) if full > MAX_FULL_SCAN => (t * WARM_BRACKET.0, (t * WARM_BRACKET.1).min(t_max)),
            _ => (0.0, t_max),
        };
        let points = scan_points(hi - lo, n, model, omega);
        let objective = |t: f64| stable_precision(n, model, omega, t, v).ok().map(|p| p.var_omega_t);
        let result = minimize_on(objective, lo, hi, points, TIME_TOL)
            .ok_or(Error::NoInteriorMinimum)
            .and_then(|m| stable_precision(n, model, omega, m.x, v));
        if let Ok(p) = &result {
            prev = Some(p.t);
        }
        out.push((n, result));
    }
    out
}

/// Least-squares slope of ln(y) against ln(x) over points with x in `window`.
pub fn fit_loglog_slope(points: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let sel: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x >= window.0 && *x <= window.1 && *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if sel.len() < 3 {
        return Err(Error::InsufficientPoints { found: sel.len() });
    }
    let m = sel.len() as f64;
    let mx = sel.iter().map(|p| p.0).sum::<f64>() / m;
    let my = sel.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = sel.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = sel.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// About `count` log-spaced integers in [1, max], deduplicated.
pub fn log_spaced_n_grid(count: usize, max: usize) -> Vec<usize> {
    if count <= 1 || max <= 1 {
        return vec![max.max(1)];
    }
    let top = (max as f64).ln();
    let mut out: Vec<usize> = (0..count)
        .map(|i| (top * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    *out.last_mut().unwrap() = max;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::parity_expectation;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn transversal() -> NoiseModel {
        NoiseModel::transversal(1.0)
    }

    #[test]
    fn stable_form_matches_direct_power() {
        let m = NoiseModel::new(1.0, 0.7, 0.2, 0.1).unwrap();
        for t in [0.05, 0.3, 0.9, 2.0] {
            let k = coefficients(&m, 1.2, t).unwrap();
            let dk = coefficient_derivatives(&m, 1.2, t).unwrap();
            for n in 1..=64 {
                // compared against the magnitude rⁿ, since the value itself can sit on a fringe zero
                let r = k.parity_factor().norm();
                let direct = parity_expectation(n, &k);
                assert!((stable_parity(n, &k) - direct).abs() <= 1e-12 * r.powi(n as i32), "n={n} t={t}");
                let d_direct = crate::metrology::parity_derivative_from(n, &k, dk.db, dk.dc, dk.df);
                let scale = n as f64 * r.powi(n as i32 - 1) * (dk.df + dk.db).hypot(dk.dc);
                assert!((stable_parity_derivative(n, &k, &dk) - d_direct).abs() <= 1e-12 * scale, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn noiseless_large_n_fringe() {
        let n = 100_000;
        let t = 1.234e-3;
        let k = coefficients(&NoiseModel::noiseless(), 1.0, t).unwrap();
        assert_abs_diff_eq!(stable_parity(n, &k), (n as f64 * t).cos(), epsilon = 1e-9);
    }

    #[test]
    fn underflow_gives_exact_zero() {
        let k = CoefficientSet::from_raw(0.5, 0.3, 0.1, 0.1, 0.0, 1.0, 1.0);
        assert!((100_000.0 * k.parity_factor().norm().ln()) < LOG_UNDERFLOW);
        assert_eq!(stable_parity(100_000, &k), 0.0);
    }

    #[test]
    fn exact_power_laws() {
        let a: Vec<(f64, f64)> = (1..20).map(|i| (i as f64 * 3.0, 5.0 / (i as f64 * 3.0))).collect();
        assert_abs_diff_eq!(fit_loglog_slope(&a, (1.0, 100.0)).unwrap(), -1.0, epsilon = 1e-10);
        let b: Vec<(f64, f64)> = (1..20).map(|i| (i as f64, 0.3 / (i * i) as f64)).collect();
        assert_abs_diff_eq!(fit_loglog_slope(&b, (1.0, 100.0)).unwrap(), -2.0, epsilon = 1e-10);
        assert_eq!(fit_loglog_slope(&b, (1.0, 2.0)), Err(Error::InsufficientPoints { found: 2 }));
    }

    #[test]
    fn mixed_regime_slope_depends_on_window() {
        let pts: Vec<(f64, f64)> = (1..=1000).map(|i| (i as f64, 1.0 / i as f64 + 1.0 / (i * i) as f64)).collect();
        let early = fit_loglog_slope(&pts, (1.0, 3.0)).unwrap();
        let late = fit_loglog_slope(&pts, (300.0, 1000.0)).unwrap();
        assert!(early < -1.3 && late > -1.01);
    }

    #[test]
    fn n_grid_shape() {
        let g = log_spaced_n_grid(200, 100_000);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 100_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() > 150);
    }

    #[test]
    fn stable_precision_matches_metrology_for_small_n() {
        let m = transversal();
        for n in [1, 3, 6] {
            let a = stable_precision(n, &m, 1.0, 0.4, 1.0).unwrap();
            let b = crate::metrology::precision(n, &m, 1.0, 0.4, crate::metrology::StencilConfig::analytic()).unwrap();
            assert!((a.var_omega_t - b.var_omega_t).abs() <= 1e-10 * b.var_omega_t);
        }
    }

    #[test]
    fn optimize_chain_agrees_with_metrology_optimizer() {
        let m = transversal();
        let cfg = ScalingConfig::new(1.0, vec![1, 2, 3, 4, 6]);
        let curve = scaling_sweep(&cfg, &m, 1.0).unwrap();
        for p in &curve.points {
            let (t, q) = crate::metrology::optimize_time(p.n, &m, 1.0).unwrap();
            assert!((p.t - t).abs() < 1e-6, "n={}", p.n);
            assert!((p.var_omega_t - q.var_omega_t).abs() <= 1e-9 * q.var_omega_t);
        }
    }

    #[test]
    fn heisenberg_slope_and_fixed_noise_offset() {
        let m = transversal();
        let grid = log_spaced_n_grid(120, 100_000);
        let mut clean = ScalingConfig::new(1.0, grid.clone());
        clean.window = (1e2, 1e5);
        let noisy = ScalingConfig { fixed_noise: Some(0.07), ..clean.clone() };
        let curves = scaling_sweeps(&[clean, noisy], &m, 1.0, Execution::default()).unwrap();
        let s0 = curves[0].fitted_slope.unwrap();
        let s1 = curves[1].fitted_slope.unwrap();
        assert!((s0 + 5.0 / 3.0).abs() <= 0.05, "slope {s0}");
        assert!((s1 - s0).abs() <= 0.05);
        for p in curves[0].points.iter().filter(|p| p.n >= 2) {
            assert!(p.hl <= p.var_omega_t && p.var_omega_t <= p.sql, "n={}", p.n);
        }
    }

    #[test]
    fn optimal_time_follows_cube_root_rule_at_large_n() {
        let m = transversal();
        let mut cfg = ScalingConfig::new(1.0, log_spaced_n_grid(80, 100_000));
        cfg.window = (1e3, 1e5);
        let curve = scaling_sweep(&cfg, &m, 1.0).unwrap();
        let ts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.n as f64, p.t)).collect();
        let exponent = fit_loglog_slope(&ts, (1e3, 1e5)).unwrap();
        assert!((exponent + 1.0 / 3.0).abs() <= 0.05, "exponent {exponent}");
    }

    #[test]
    fn imperfect_preparation_crosses_sql() {
        let m = transversal();
        let cfg = ScalingConfig::new(0.9837, log_spaced_n_grid(120, 100_000));
        let curve = scaling_sweep(&cfg, &m, 1.0).unwrap();
        let small = curve.points.iter().find(|p| p.n == 4).unwrap();
        assert!(small.var_omega_t < small.sql);
        let crossing = curve.sql_crossing().unwrap();
        assert!(crossing > 4);
        let above = curve.points.iter().find(|p| p.n == crossing).unwrap();
        assert!(above.var_omega_t > above.sql);
        assert!(!curve.skipped.is_empty());
    }

    #[test]
    fn proportional_rule_and_degradation_order() {
        let m = transversal();
        let grid = log_spaced_n_grid(40, 10_000);
        let rule = TimeRule::Proportional { c: 0.5, exponent: -1.0 / 3.0 };
        let mut prev: Option<ScalingCurve> = None;
        for f0 in [1.0, 0.99999, 0.9999, 0.999] {
            let cfg = ScalingConfig { t_rule: rule, ..ScalingConfig::new(f0, grid.clone()) };
            let curve = scaling_sweep(&cfg, &m, 1.0).unwrap();
            if let Some(better) = &prev {
                for (a, b) in better.points.iter().zip(&curve.points) {
                    assert_eq!(a.n, b.n);
                    assert!(b.var_omega_t >= a.var_omega_t);
                }
            }
            prev = Some(curve);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ScalingConfig::new(0.0, vec![1, 2]).validate().is_err());
        assert!(ScalingConfig::new(1.0, vec![2, 2]).validate().is_err());
        let bad = ScalingConfig { fixed_noise: Some(1.0), ..ScalingConfig::new(1.0, vec![1, 2]) };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn stable_parity_is_bounded(n in 1usize..200_000, t in 0.0f64..3.0) {
            let k = coefficients(&transversal(), 1.0, t).unwrap();
            let p = stable_parity(n, &k);
            prop_assert!(p.is_finite() && p.abs() <= 1.0 + 1e-12);
        }
    }
}
