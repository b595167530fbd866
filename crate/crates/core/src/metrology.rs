//! Frequency estimation with GHZ probes: parity signal, error propagation,
//! interrogation-time optimization and the frequency QFI.

use crate::channel::{coefficient_derivatives, coefficients, CoefficientSet, NoiseModel};
use crate::coherence::qfi_from_derivative;
use crate::error::{Error, Result};
use crate::numerics::{c, C64};
use crate::optimize::minimize_on;
use crate::states::{blocks, evolve_ghz, evolve_ghz_derivative, expand, expand_unchecked, GhzXState};

/// Grid points of the coarse time scan.
pub const TIME_GRID: usize = 512;
/// Bracket width at which golden-section refinement stops.
pub const TIME_TOL: f64 = 1e-9;
/// |∂⟨P_x⟩/∂ω| at or below this is treated as a blind spot.
pub const BLIND_DERIVATIVE: f64 = 1e-14;

/// One evaluation of Δ²ω·T = t(1 − ⟨P_x⟩²)/|∂⟨P_x⟩/∂ω|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetrologyPoint {
    pub n: usize,
    pub t: f64,
    pub px: f64,
    pub dpx_domega: f64,
    pub var_omega_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilScheme {
    FivePoint,
    Analytic,
}

/// How ∂⟨P_x⟩/∂ω is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilConfig {
    pub h: f64,
    pub scheme: StencilScheme,
}

impl StencilConfig {
    pub fn analytic() -> Self {
        StencilConfig { h: 0.1, scheme: StencilScheme::Analytic }
    }

    pub fn five_point(h: f64) -> Result<Self> {
        let cfg = StencilConfig { h, scheme: StencilScheme::FivePoint };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Five-point stencil with the experiment's grid lengths: 0.1 up to two
    /// qubits, 0.2 beyond.
    pub fn experimental(n: usize) -> Self {
        StencilConfig { h: if n <= 2 { 0.1 } else { 0.2 }, scheme: StencilScheme::FivePoint }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::OutOfRange { name: "h", value: self.h, range: "(0, ∞)" });
        }
        Ok(())
    }
}

impl Default for StencilConfig {
    fn default() -> Self {
        StencilConfig::analytic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhiteNoiseMode {
    /// ρ ↦ vρ + (1 − v)I/2ⁿ.
    ExactMixture,
    /// Each ±1 parity outcome is flipped with probability (1 − v)/2.
    OutcomeFlip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteNoiseConfig {
    pub v_add: f64,
    pub mode: WhiteNoiseMode,
}

impl WhiteNoiseConfig {
    pub fn new(v_add: f64, mode: WhiteNoiseMode) -> Result<Self> {
        if !(0.0..=1.0).contains(&v_add) {
            return Err(Error::OutOfRange { name: "v_add", value: v_add, range: "[0, 1]" });
        }
        Ok(WhiteNoiseConfig { v_add, mode })
    }

    pub fn flip_probability(&self) -> f64 {
        0.5 * (1.0 - self.v_add)
    }
}

/// ⟨P_x⟩ = Re (f + b − ic)ⁿ.
pub fn parity_expectation(n: usize, k: &CoefficientSet) -> f64 {
    let z = k.parity_factor().powi(n as i32);
    let sum = (z + z.conj()) * 0.5;
    debug_assert!(sum.im.abs() <= 1e-12);
    sum.re
}

/// ∂⟨P_x⟩/∂ω, by the five-point stencil or by the chain rule through the
/// closed-form coefficients.
pub fn parity_derivative(n: usize, model: &NoiseModel, omega: f64, t: f64, cfg: StencilConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.scheme {
        StencilScheme::FivePoint => {
            let h = cfg.h;
            let p = |w: f64| coefficients(model, w, t).map(|k| parity_expectation(n, &k));
            Ok((-p(omega + 2.0 * h)? + 8.0 * p(omega + h)? - 8.0 * p(omega - h)? + p(omega - 2.0 * h)?) / (12.0 * h))
        }
        StencilScheme::Analytic => {
            let k = coefficients(model, omega, t)?;
            let dk = coefficient_derivatives(model, omega, t)?;
            Ok(parity_derivative_from(n, &k, dk.db, dk.dc, dk.df))
        }
    }
}

/// Re[n zⁿ⁻¹ z′] with z = f + b − ic.
pub(crate) fn parity_derivative_from(n: usize, k: &CoefficientSet, db: f64, dc: f64, df: f64) -> f64 {
    let dz = c(df + db, -dc);
    (k.parity_factor().powi(n as i32 - 1) * dz * n as f64).re
}

/// Δ²ω·T from a parity value and its derivative.
pub fn error_propagation(n: usize, t: f64, px: f64, dpx: f64) -> Result<MetrologyPoint> {
    if dpx.abs() <= BLIND_DERIVATIVE {
        return Err(Error::DivergentPrecision { t, derivative: dpx });
    }
    Ok(MetrologyPoint { n, t, px, dpx_domega: dpx, var_omega_t: t * (1.0 - px * px) / (dpx * dpx) })
}

pub fn precision(n: usize, model: &NoiseModel, omega: f64, t: f64, cfg: StencilConfig) -> Result<MetrologyPoint> {
    precision_with_visibility(n, model, omega, t, cfg, 1.0)
}

/// As [`precision`] for a probe mixed with white noise of visibility `v`,
/// which scales both ⟨P_x⟩ and its derivative by `v`.
pub fn precision_with_visibility(
    n: usize,
    model: &NoiseModel,
    omega: f64,
    t: f64,
    cfg: StencilConfig,
    v: f64,
) -> Result<MetrologyPoint> {
    let px = v * parity_expectation(n, &coefficients(model, omega, t)?);
    let dpx = v * parity_derivative(n, model, omega, t, cfg)?;
    error_propagation(n, t, px, dpx)
}

/// Minimizes Δ²ω·T over t ∈ (0, 4/γ] with the analytic derivative.
pub fn optimize_time(n: usize, model: &NoiseModel, omega: f64) -> Result<(f64, MetrologyPoint)> {
    optimize_time_with_visibility(n, model, omega, 1.0)
}

pub fn optimize_time_with_visibility(n: usize, model: &NoiseModel, omega: f64, v: f64) -> Result<(f64, MetrologyPoint)> {
    model.validate()?;
    if model.gamma == 0.0 {
        return Err(Error::NoInteriorMinimum);
    }
    let cfg = StencilConfig::analytic();
    let objective = |t: f64| precision_with_visibility(n, model, omega, t, cfg, v).ok().map(|p| p.var_omega_t);
    let best = minimize_on(objective, 0.0, 4.0 / model.gamma, TIME_GRID, TIME_TOL).ok_or(Error::NoInteriorMinimum)?;
    let point = precision_with_visibility(n, model, omega, best.x, cfg, v)?;
    Ok((best.x, point))
}

/// Frequency QFI of the evolved probe, summed over its 2×2 X-blocks.
pub fn qfi_frequency(n: usize, model: &NoiseModel, omega: f64, t: f64) -> Result<f64> {
    let (x, dx) = probe_and_derivative(n, model, omega, t)?;
    let mut total = 0.0;
    for (b, db) in blocks(&x).iter().zip(blocks(&dx)) {
        total += b.multiplicity as f64 * qfi_from_derivative(&b.block, &db.block)?;
    }
    Ok(total)
}

/// Frequency QFI from the full 2ⁿ×2ⁿ eigendecomposition; errors above the dense limit.
pub fn qfi_frequency_dense(n: usize, model: &NoiseModel, omega: f64, t: f64) -> Result<f64> {
    let (x, dx) = probe_and_derivative(n, model, omega, t)?;
    let rho = expand(&x)?;
    qfi_from_derivative(&rho, &expand_unchecked(&dx))
}

fn probe_and_derivative(n: usize, model: &NoiseModel, omega: f64, t: f64) -> Result<(GhzXState, GhzXState)> {
    let k = coefficients(model, omega, t)?;
    let dk = coefficient_derivatives(model, omega, t)?;
    Ok((evolve_ghz(n, &k), evolve_ghz_derivative(n, &k, dk.db, dk.dc, dk.df)))
}

/// Cramér–Rao bound on Δ²ω·T: t / F.
pub fn crb_precision(n: usize, model: &NoiseModel, omega: f64, t: f64) -> Result<f64> {
    let f = qfi_frequency(n, model, omega, t)?;
    if !(f > 0.0) {
        return Err(Error::ZeroInformation { t });
    }
    Ok(t / f)
}

/// Minimizes t / F over t ∈ (0, 4/γ]. Returns (t_opt, bound).
pub fn optimize_time_qfi(n: usize, model: &NoiseModel, omega: f64) -> Result<(f64, f64)> {
    model.validate()?;
    if model.gamma == 0.0 {
        return Err(Error::NoInteriorMinimum);
    }
    let objective = |t: f64| crb_precision(n, model, omega, t).ok();
    let best = minimize_on(objective, 0.0, 4.0 / model.gamma, TIME_GRID, TIME_TOL).ok_or(Error::NoInteriorMinimum)?;
    Ok((best.x, best.value))
}

/// SQL and HL reference lines anchored to the single-qubit parity optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBounds {
    pub opt1: f64,
}

impl ReferenceBounds {
    pub fn new(model: &NoiseModel, omega: f64) -> Result<Self> {
        Ok(ReferenceBounds { opt1: optimize_time(1, model, omega)?.1.var_omega_t })
    }

    pub fn sql(&self, n: usize) -> f64 {
        self.opt1 / n as f64
    }

    pub fn hl(&self, n: usize) -> f64 {
        self.opt1 / (n * n) as f64
    }
}

/// (SQL(n), HL(n)).
pub fn sql_hl_bounds(n: usize, model: &NoiseModel, omega: f64) -> Result<(f64, f64)> {
    let b = ReferenceBounds::new(model, omega)?;
    Ok((b.sql(n), b.hl(n)))
}

/// S_N = 1 / (N Δ²ω·T).
pub fn fisher_per_qubit(point: &MetrologyPoint) -> f64 {
    1.0 / (point.n as f64 * point.var_omega_t)
}

/// Mixes the probe with white noise. Both modes give the same parity
/// statistics, so the state is always the exact mixture.
pub fn add_white_noise(x: &GhzXState, cfg: &WhiteNoiseConfig) -> GhzXState {
    let v = cfg.v_add;
    let floor = (1.0 - v) / (1u64 << x.n.min(63)) as f64;
    GhzXState {
        n: x.n,
        diag: x.diag.iter().map(|d| v * d + floor).collect(),
        anti: x.anti.iter().map(|a| a * v).collect::<Vec<C64>>(),
    }
}
