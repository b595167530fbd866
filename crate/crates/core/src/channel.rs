//! Single-qubit signal-plus-noise channel.
//!
//! The qubit evolves under dρ/dt = −iω[σz/2, ρ] + L(ρ) with the Pauli
//! Liouvillian L(ρ) = −γ/2 (ρ − αx σxρσx − αy σyρσy − αz σzρσz). Its exact
//! solution is a Pauli-diagonal-plus-(0,z) S-matrix parameterised by five
//! real functions a, b, c, d, f; this module evaluates them in closed form,
//! builds the S-matrix and the four-unitary Kraus mixture, and provides an
//! RK4 integrator of the master equation as an independent oracle.

use crate::error::{Error, Result};
use crate::numerics::{c, pauli, CMat, C64};

const ALPHA_SUM_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-10;
const NEG_PROB_TOL: f64 = 1e-10;
/// Below this |t²R/4| the entire functions cosh(t√R/2) and sinh(t√R/2)/√R
/// are summed as power series in R.
const SERIES_CUTOFF: f64 = 0.05;
const SERIES_TERMS: usize = 14;

/// Liouvillian parameters: noise rate γ and the Pauli weights α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub gamma: f64,
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
}

impl NoiseModel {
    pub fn new(gamma: f64, alpha_x: f64, alpha_y: f64, alpha_z: f64) -> Result<Self> {
        let m = NoiseModel { gamma, alpha_x, alpha_y, alpha_z };
        m.validate()?;
        Ok(m)
    }

    /// Bit-flip noise, orthogonal to the σz signal.
    pub fn transversal(gamma: f64) -> Self {
        NoiseModel { gamma, alpha_x: 1.0, alpha_y: 0.0, alpha_z: 0.0 }
    }

    /// Dephasing noise, aligned with the σz signal.
    pub fn parallel(gamma: f64) -> Self {
        NoiseModel { gamma, alpha_x: 0.0, alpha_y: 0.0, alpha_z: 1.0 }
    }

    pub fn noiseless() -> Self {
        Self::transversal(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.gamma, self.alpha_x, self.alpha_y, self.alpha_z];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidModel(format!("gamma = {} < 0", self.gamma)));
        }
        if self.alpha_x < 0.0 || self.alpha_y < 0.0 || self.alpha_z < 0.0 {
            return Err(Error::InvalidModel("alpha weights must be non-negative".into()));
        }
        let sum = self.alpha_x + self.alpha_y + self.alpha_z;
        if (sum - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(Error::InvalidModel(format!("alpha weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Radicand R = (αx − αy)²γ² − 4ω² of the closed forms.
    fn radicand(&self, omega: f64) -> f64 {
        let d = (self.alpha_x - self.alpha_y) * self.gamma;
        d * d - 4.0 * omega * omega
    }

    /// The master-equation right-hand side applied to a 2×2 operator.
    pub fn generator(&self, omega: f64, rho: &CMat) -> CMat {
        let z = pauli::z();
        let h = z.scale_re(0.5);
        let comm = &(&h * rho) - &(rho * &h);
        let unitary = comm.scale(c(0.0, -omega));
        let mut noise = rho.clone();
        for (w, p) in [(self.alpha_x, pauli::x()), (self.alpha_y, pauli::y()), (self.alpha_z, z)] {
            if w != 0.0 {
                noise = &noise - &rho.conjugate_by(&p).scale_re(w);
            }
        }
        &unitary + &noise.scale_re(-0.5 * self.gamma)
    }
}

/// cosh(t√R/2) and sinh(t√R/2)/√R together with their R-derivatives.
#[derive(Debug, Clone, Copy)]
struct Entire {
    g: C64,
    h: C64,
    dg: C64,
    dh: C64,
}

fn entire_parts(radicand: f64, t: f64) -> Entire {
    let x2 = t * t * radicand / 4.0;
    if x2.abs() < SERIES_CUTOFF {
        // g = Σ x2^k/(2k)!,  h = (t/2) Σ x2^k/(2k+1)!
        let (mut g, mut h, mut dg, mut dh) = (0.0, 0.0, 0.0, 0.0);
        let mut pow = 1.0; // x2^k
        let mut even_fact = 1.0; // (2k)!
        let mut prev_pow = 0.0; // x2^(k-1)
        for k in 0..SERIES_TERMS {
            let kf = k as f64;
            let odd_fact = even_fact * (2.0 * kf + 1.0);
            g += pow / even_fact;
            h += pow / odd_fact;
            if k > 0 {
                dg += kf * prev_pow / even_fact;
                dh += kf * prev_pow / odd_fact;
            }
            prev_pow = pow;
            pow *= x2;
            even_fact = odd_fact * (2.0 * kf + 2.0);
        }
        let q = t * t / 4.0; // dx2/dR
        return Entire {
            g: c(g, 0.0),
            h: c(0.5 * t * h, 0.0),
            dg: c(q * dg, 0.0),
            dh: c(0.5 * t * q * dh, 0.0),
        };
    }
    let s = c(radicand, 0.0).sqrt();
    let half = s * (0.5 * t);
    let g = half.cosh();
    let h = half.sinh() / s;
    let r = c(radicand, 0.0);
    Entire { g, h, dg: h * (t / 4.0), dh: (g * (t / 4.0) - h * 0.5) / r }
}

fn real_part(name: &'static str, z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * scale.max(1.0) {
        return Err(Error::NonRealResult { name, residue: z.im.abs() });
    }
    Ok(z.re)
}

/// The five real channel functions at (ω, t), plus the Kraus phase θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    /// atan2(c, b), the relative phase of the dominant Kraus operator.
    pub theta: f64,
    pub omega: f64,
    pub t: f64,
}

/// ∂/∂ω of the channel functions (∂a/∂ω = ∂d/∂ω = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientDerivatives {
    pub db: f64,
    pub dc: f64,
    pub df: f64,
}

impl CoefficientSet {
    /// The t = 0 identity channel.
    pub fn identity(omega: f64) -> Self {
        CoefficientSet { a: 1.0, b: 1.0, c: 0.0, d: 0.0, f: 0.0, theta: 0.0, omega, t: 0.0 }
    }

    /// Builds a set from raw values (used for perturbation studies).
    pub fn from_raw(a: f64, b: f64, c: f64, d: f64, f: f64, omega: f64, t: f64) -> Self {
        CoefficientSet { a, b, c, d, f, theta: c.atan2(b), omega, t }
    }

    /// f + b − ic, the per-qubit anti-diagonal factor of the parity signal.
    pub fn parity_factor(&self) -> C64 {
        c(self.f + self.b, -self.c)
    }

    /// √(b² + c²).
    pub fn coherence_norm(&self) -> f64 {
        self.b.hypot(self.c)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange { name: "t", value: t, range: "[0, ∞)" });
    }
    Ok(())
}

/// Closed-form channel functions a, b, c, d, f.
pub fn coefficients(model: &NoiseModel, omega: f64, t: f64) -> Result<CoefficientSet> {
    model.validate()?;
    check_time(t)?;
    let g = model.gamma;
    let (ax, ay, az) = (model.alpha_x, model.alpha_y, model.alpha_z);
    let pre_ad = (-0.5 * t * (1.0 + ax + ay - az) * g).exp();
    let grow = (t * (ax + ay) * g).exp();
    let a = 0.5 * pre_ad * (1.0 + grow);
    let d = 0.5 * pre_ad * (grow - 1.0);

    let e = (-0.5 * t * g * (1.0 + az)).exp();
    let parts = entire_parts(model.radicand(omega), t);
    let scale = parts.g.norm().max(parts.h.norm() * omega.abs().max(g));
    let b = real_part("b", parts.g * e, scale)?;
    let cc = real_part("c", parts.h * (2.0 * omega * e), scale)?;
    let f = real_part("f", parts.h * ((ax - ay) * g * e), scale)?;
    Ok(CoefficientSet { a, b, c: cc, d, f, theta: cc.atan2(b), omega, t })
}

/// Analytic ω-derivatives of b, c, f (chain rule through R = (αx−αy)²γ² − 4ω²).
pub fn coefficient_derivatives(model: &NoiseModel, omega: f64, t: f64) -> Result<CoefficientDerivatives> {
    model.validate()?;
    check_time(t)?;
    let g = model.gamma;
    let e = (-0.5 * t * g * (1.0 + model.alpha_z)).exp();
    let p = entire_parts(model.radicand(omega), t);
    let dr = -8.0 * omega;
    let scale = (p.dg.norm() + p.dh.norm() + p.h.norm()) * (1.0 + omega.abs() + g);
    let db = real_part("db", p.dg * (e * dr), scale)?;
    let dc = real_part("dc", (p.h * 2.0 + p.dh * (2.0 * omega * dr)) * e, scale)?;
    let df = real_part("df", p.dh * ((model.alpha_x - model.alpha_y) * g * e * dr), scale)?;
    Ok(CoefficientDerivatives { db, dc, df })
}

/// The channel E(ρ) = Σ S_ij σ_i ρ σ_j in the Pauli basis (0, x, y, z).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSMatrix {
    pub s: [[C64; 4]; 4],
}

pub fn s_matrix(k: &CoefficientSet) -> PauliSMatrix {
    let zero = c(0.0, 0.0);
    let mut s = [[zero; 4]; 4];
    s[0][0] = c((k.a + k.b) / 2.0, 0.0);
    s[1][1] = c((k.d + k.f) / 2.0, 0.0);
    s[2][2] = c((k.d - k.f) / 2.0, 0.0);
    s[3][3] = c((k.a - k.b) / 2.0, 0.0);
    s[0][3] = c(0.0, k.c / 2.0);
    s[3][0] = c(0.0, -k.c / 2.0);
    PauliSMatrix { s }
}

impl PauliSMatrix {
    pub fn apply(&self, rho: &CMat) -> CMat {
        let paulis = pauli::basis();
        let mut out = CMat::zeros(2, 2);
        for (i, si) in paulis.iter().enumerate() {
            let left = si * rho;
            for (j, sj) in paulis.iter().enumerate() {
                let w = self.s[i][j];
                if w.norm() == 0.0 {
                    continue;
                }
                out = &out + &(&left * sj).scale(w);
            }
        }
        out
    }

    /// Recovers S from any linear single-qubit map via its Choi matrix:
    /// S_ij = ⟨v_i| (E⊗I)(|Ω⟩⟨Ω|) |v_j⟩ / 4 with |v_i⟩ = (σ_i⊗I)|Ω⟩.
    pub fn from_map(map: impl Fn(&CMat) -> CMat) -> Self {
        let mut choi = CMat::zeros(4, 4);
        for k in 0..2 {
            for l in 0..2 {
                let mut unit = CMat::zeros(2, 2);
                unit[(k, l)] = c(1.0, 0.0);
                let img = map(&unit);
                for r in 0..2 {
                    for col in 0..2 {
                        choi[(2 * r + k, 2 * col + l)] = img[(r, col)];
                    }
                }
            }
        }
        let omega_vec = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let vs: Vec<Vec<C64>> = pauli::basis()
            .iter()
            .map(|p| crate::numerics::kron(p, &pauli::i2()).matvec(&omega_vec))
            .collect();
        let mut s = [[c(0.0, 0.0); 4]; 4];
        for (i, vi) in vs.iter().enumerate() {
            for (j, vj) in vs.iter().enumerate() {
                let cvj = choi.matvec(vj);
                let inner: C64 = vi.iter().zip(&cvj).map(|(a, b)| a.conj() * b).sum();
                s[i][j] = inner / 4.0;
            }
        }
        PauliSMatrix { s }
    }

    /// Pauli transfer matrix R_ij = tr(σ_i E(σ_j)) / 2.
    pub fn transfer_matrix(&self) -> [[f64; 4]; 4] {
        let paulis = pauli::basis();
        let mut r = [[0.0; 4]; 4];
        for (j, sj) in paulis.iter().enumerate() {
            let img = self.apply(sj);
            for (i, si) in paulis.iter().enumerate() {
                r[i][j] = 0.5 * si.trace_product(&img).re;
            }
        }
        r
    }

    pub fn hermitian_residue(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.s[i][j] - self.s[j][i].conj()).norm());
            }
        }
        worst
    }
}

/// Max entrywise difference of the two Pauli transfer matrices.
pub fn channel_distance(x: &PauliSMatrix, y: &PauliSMatrix) -> f64 {
    let (rx, ry) = (x.transfer_matrix(), y.transfer_matrix());
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((rx[i][j] - ry[i][j]).abs());
        }
    }
    worst
}

/// A channel written as a probability mixture of four single-qubit unitaries.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub probs: [f64; 4],
    pub ops: [CMat; 4],
}

impl KrausSet {
    /// The do-nothing channel.
    pub fn identity() -> Self {
        KrausSet { probs: [1.0, 0.0, 0.0, 0.0], ops: [pauli::i2(), pauli::z(), pauli::x(), pauli::y()] }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.rows(), rho.cols());
        for (p, k) in self.probs.iter().zip(&self.ops) {
            if *p != 0.0 {
                out = &out + &rho.conjugate_by(k).scale_re(*p);
            }
        }
        out
    }

    /// max |Σ p_i K_i†K_i − I|.
    pub fn completeness_residue(&self) -> f64 {
        let mut sum = CMat::zeros(2, 2);
        for (p, k) in self.probs.iter().zip(&self.ops) {
            sum = &sum + &(&k.dagger() * k).scale_re(*p);
        }
        sum.max_abs_diff(&CMat::identity(2))
    }

    /// Worst deviation of any K_i from unitarity.
    pub fn unitarity_residue(&self) -> f64 {
        self.ops.iter().map(|k| (&k.dagger() * k).max_abs_diff(&CMat::identity(2))).fold(0.0, f64::max)
    }

    pub fn s_matrix(&self) -> PauliSMatrix {
        PauliSMatrix::from_map(|rho| self.apply(rho))
    }
}

/// Kraus decomposition from diagonalising S.
pub fn kraus(k: &CoefficientSet) -> Result<KrausSet> {
    let r = k.coherence_norm();
    let probs = [(k.a + r) / 2.0, (k.a - r) / 2.0, (k.d + k.f) / 2.0, (k.d - k.f) / 2.0];
    if let Some((index, &value)) = probs.iter().enumerate().find(|(_, &p)| p < -NEG_PROB_TOL) {
        return Err(Error::NegativeProbability { index: index + 1, value });
    }
    let phase = C64::from_polar(1.0, k.theta);
    let k1 = CMat::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), phase]);
    let k2 = CMat::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), -phase]);
    Ok(KrausSet { probs, ops: [k1, k2, pauli::x(), pauli::y()] })
}

/// ρ ↦ (1 − p/2)ρ + (p/2) σxρσx for p ∈ [0, 1].
pub fn bitflip_channel(p: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange { name: "p", value: p, range: "[0, 1]" });
    }
    Ok(KrausSet { probs: [1.0 - p / 2.0, 0.0, p / 2.0, 0.0], ops: [pauli::i2(), pauli::z(), pauli::x(), pauli::y()] })
}

/// Classical RK4 of the master equation on an arbitrary 2×2 operator.
/// The step is shrunk so that an integer number of steps lands on `t`.
pub fn rk4_evolve(model: &NoiseModel, omega: f64, t: f64, m0: &CMat, step: f64) -> CMat {
    if t == 0.0 {
        return m0.clone();
    }
    let steps = (t / step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut m = m0.clone();
    for _ in 0..steps {
        let k1 = model.generator(omega, &m);
        let k2 = model.generator(omega, &(&m + &k1.scale_re(h / 2.0)));
        let k3 = model.generator(omega, &(&m + &k2.scale_re(h / 2.0)));
        let k4 = model.generator(omega, &(&m + &k3.scale_re(h)));
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_re(2.0);
        m = &m + &incr.scale_re(h / 6.0);
    }
    m
}

/// RK4 solution ρ(t) of the single-qubit master equation.
pub fn integrate_master_equation(model: &NoiseModel, omega: f64, t: f64, rho0: &CMat, step: f64) -> Result<CMat> {
    model.validate()?;
    check_time(t)?;
    if rho0.rows() != 2 || rho0.cols() != 2 {
        return Err(Error::DimensionMismatch("initial state must be 2x2".into()));
    }
    crate::numerics::density_spectrum(rho0)?;
    if t > 0.0 && !(step > 0.0 && step <= t) {
        return Err(Error::OutOfRange { name: "step", value: step, range: "(0, t]" });
    }
    Ok(rk4_evolve(model, omega, t, rho0, step))
}

/// S-matrix of the RK4-propagated channel.
pub fn s_matrix_from_master_equation(model: &NoiseModel, omega: f64, t: f64, step: f64) -> PauliSMatrix {
    PauliSMatrix::from_map(|m| rk4_evolve(model, omega, t, m, step))
}
