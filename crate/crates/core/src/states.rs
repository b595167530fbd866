//! GHZ probes, their evolved X-state form and dense-matrix oracles.
//!
//! Qubit 0 is the most significant bit of a computational-basis index, which
//! matches the ordering of [`kron`](crate::numerics::kron).

use crate::channel::{CoefficientSet, KrausSet};
use crate::error::{Error, Result};
use crate::numerics::{c, kron_power, pauli, CMat, C64};

/// Largest probe handled with dense 2ⁿ×2ⁿ matrices.
pub const MAX_DENSE_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// σz eigenbasis (0/1).
    Computational,
    /// σx eigenbasis (±).
    Hadamard,
}

impl Basis {
    pub fn label(self) -> &'static str {
        match self {
            Basis::Computational => "01",
            Basis::Hadamard => "pm",
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "01" | "computational" | "z" => Ok(Basis::Computational),
            "pm" | "hadamard" | "x" => Ok(Basis::Hadamard),
            other => Err(format!("unknown basis `{other}`")),
        }
    }
}

fn check_dense(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "n", value: 0.0, range: "[1, 6]" });
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { n, max: MAX_DENSE_QUBITS });
    }
    Ok(())
}

/// Amplitudes of (|0…0⟩ + |1…1⟩)/√2, or of (|+…+⟩ + |−…−⟩)/√2.
pub fn ghz_vector(n: usize, basis: Basis) -> Vec<C64> {
    let dim = 1usize << n;
    let mut psi = vec![c(0.0, 0.0); dim];
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    match basis {
        Basis::Computational => {
            psi[0] = c(amp, 0.0);
            psi[dim - 1] += c(amp, 0.0);
        }
        Basis::Hadamard => {
            // |+⟩^n has uniform amplitudes; |−⟩^n has sign (−1)^{weight}
            let norm = amp / (dim as f64).sqrt();
            for (x, a) in psi.iter_mut().enumerate() {
                let sign = if x.count_ones() % 2 == 0 { 2.0 } else { 0.0 };
                *a = c(norm * sign, 0.0);
            }
        }
    }
    psi
}

pub fn ghz(n: usize, basis: Basis) -> Result<CMat> {
    check_dense(n)?;
    Ok(CMat::projector(&ghz_vector(n, basis)))
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Evolved GHZ probe stored by Hamming weight.
///
/// `diag[m]` is ⟨x|ρ|x⟩ for any x of weight m and `anti[m]` is ⟨x|ρ|x̄⟩,
/// x̄ the bitwise complement. All other entries vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GhzXState {
    pub n: usize,
    pub diag: Vec<f64>,
    pub anti: Vec<C64>,
}

impl GhzXState {
    pub fn trace(&self) -> f64 {
        self.diag.iter().enumerate().map(|(m, d)| binomial(self.n, m) * d).sum()
    }

    /// ⟨P_x⟩ = Σ_x ⟨x|ρ|x̄⟩ for P_x = σx^{⊗n}.
    pub fn parity_x(&self) -> f64 {
        self.anti.iter().enumerate().map(|(m, a)| binomial(self.n, m) * a.re).sum()
    }

    /// Largest violation of the X-state contract: unit trace, m ↔ n−m symmetry,
    /// Hermitian pairing and positivity of every 2×2 block.
    pub fn invariant_residue(&self) -> f64 {
        let n = self.n;
        let mut worst = (self.trace() - 1.0).abs();
        for m in 0..=n {
            worst = worst.max((self.diag[m] - self.diag[n - m]).abs());
            worst = worst.max((self.anti[m] - self.anti[n - m].conj()).norm());
            let (d1, d2, a) = (self.diag[m], self.diag[n - m], self.anti[m].norm());
            let tr = d1 + d2;
            let det = d1 * d2 - a * a;
            let min_eig = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
            worst = worst.max((-min_eig).max(0.0));
        }
        worst
    }
}

/// Closed-form N-qubit probe after the product channel, with 0⁰ = 1.
pub fn evolve_ghz(n: usize, k: &CoefficientSet) -> GhzXState {
    let minus = c(k.b, -k.c);
    let plus = c(k.b, k.c);
    let mut diag = Vec::with_capacity(n + 1);
    let mut anti = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let (mu, nu) = (m as i32, (n - m) as i32);
        diag.push(0.5 * (k.d.powi(mu) * k.a.powi(nu) + k.d.powi(nu) * k.a.powi(mu)));
        let fm = c(k.f.powi(mu), 0.0);
        let fn_m = c(k.f.powi(nu), 0.0);
        anti.push((fm * minus.powi(nu) + fn_m * plus.powi(mu)) * 0.5);
    }
    GhzXState { n, diag, anti }
}

/// d/dω of the evolved probe given ∂b, ∂c, ∂f (a and d do not depend on ω).
pub fn evolve_ghz_derivative(n: usize, k: &CoefficientSet, db: f64, dc: f64, df: f64) -> GhzXState {
    let minus = c(k.b, -k.c);
    let plus = c(k.b, k.c);
    let dminus = c(db, -dc);
    let dplus = c(db, dc);
    // d(x^p) = p x^{p-1} dx, zero for p = 0
    let dpow = |x: C64, dx: C64, p: usize| -> C64 {
        if p == 0 {
            c(0.0, 0.0)
        } else {
            x.powi(p as i32 - 1) * dx * p as f64
        }
    };
    let f = c(k.f, 0.0);
    let dfc = c(df, 0.0);
    let anti = (0..=n)
        .map(|m| {
            let nm = n - m;
            let t1 = dpow(f, dfc, m) * minus.powi(nm as i32) + f.powi(m as i32) * dpow(minus, dminus, nm);
            let t2 = dpow(f, dfc, nm) * plus.powi(m as i32) + f.powi(nm as i32) * dpow(plus, dplus, m);
            (t1 + t2) * 0.5
        })
        .collect();
    GhzXState { n, diag: vec![0.0; n + 1], anti }
}

/// Dense 2ⁿ×2ⁿ matrix of an X-state.
pub fn expand(x: &GhzXState) -> Result<CMat> {
    check_dense(x.n)?;
    Ok(expand_unchecked(x))
}

/// As [`expand`] but without the size guard (derivative states reuse it).
pub(crate) fn expand_unchecked(x: &GhzXState) -> CMat {
    let dim = 1usize << x.n;
    let mut m = CMat::zeros(dim, dim);
    for s in 0..dim {
        let w = s.count_ones() as usize;
        m[(s, s)] += c(x.diag[w], 0.0);
        m[(s, dim - 1 - s)] += x.anti[w];
    }
    m
}

/// Applies the 2×2 operator `op` to qubit `q` of an `n`-qubit state vector.
pub(crate) fn apply_local_vec(psi: &mut [C64], op: &CMat, q: usize, n: usize) {
    let bit = 1usize << (n - 1 - q);
    let (o00, o01, o10, o11) = (op[(0, 0)], op[(0, 1)], op[(1, 0)], op[(1, 1)]);
    for i0 in 0..psi.len() {
        if i0 & bit != 0 {
            continue;
        }
        let i1 = i0 | bit;
        let (a, b) = (psi[i0], psi[i1]);
        psi[i0] = o00 * a + o01 * b;
        psi[i1] = o10 * a + o11 * b;
    }
}

/// ρ ↦ K_q ρ K_q† for a 2×2 operator acting on qubit `q`.
fn conjugate_local(rho: &CMat, op: &CMat, q: usize, n: usize) -> CMat {
    let dim = rho.rows();
    let bit = 1usize << (n - 1 - q);
    let (o00, o01, o10, o11) = (op[(0, 0)], op[(0, 1)], op[(1, 0)], op[(1, 1)]);
    let mut out = rho.clone();
    // rows
    for i0 in (0..dim).filter(|i| i & bit == 0) {
        let i1 = i0 | bit;
        for col in 0..dim {
            let (a, b) = (out[(i0, col)], out[(i1, col)]);
            out[(i0, col)] = o00 * a + o01 * b;
            out[(i1, col)] = o10 * a + o11 * b;
        }
    }
    // columns, multiplying by K† on the right
    for j0 in (0..dim).filter(|j| j & bit == 0) {
        let j1 = j0 | bit;
        for r in 0..dim {
            let (a, b) = (out[(r, j0)], out[(r, j1)]);
            out[(r, j0)] = a * o00.conj() + b * o01.conj();
            out[(r, j1)] = a * o10.conj() + b * o11.conj();
        }
    }
    out
}

/// The product channel E^{⊗n}, applied one qubit at a time.
pub fn apply_product_channel(rho: &CMat, k: &KrausSet, n: usize) -> Result<CMat> {
    check_dense(n)?;
    let dim = 1usize << n;
    if rho.rows() != dim || rho.cols() != dim {
        return Err(Error::DimensionMismatch(format!("expected {dim}x{dim}, got {}x{}", rho.rows(), rho.cols())));
    }
    let mut state = rho.clone();
    for q in 0..n {
        let mut next = CMat::zeros(dim, dim);
        for (p, op) in k.probs.iter().zip(&k.ops) {
            if *p != 0.0 {
                next = &next + &conjugate_local(&state, op, q, n).scale_re(*p);
            }
        }
        state = next;
    }
    Ok(state)
}

/// Largest entry outside the diagonal/anti-diagonal pattern.
pub fn x_pattern_residue(rho: &CMat) -> f64 {
    let dim = rho.rows();
    let mut worst = 0.0f64;
    for r in 0..dim {
        for col in 0..dim {
            if col != r && col != dim - 1 - r {
                worst = worst.max(rho[(r, col)].norm());
            }
        }
    }
    worst
}

/// A 2×2 block of an X-state with the number of identical copies it has.
#[derive(Debug, Clone)]
pub struct XBlock {
    pub block: CMat,
    pub multiplicity: usize,
}

/// Decomposes an X-state (or its ω-derivative) into independent 2×2 blocks.
///
/// Weight classes m < n/2 pair with n − m and contribute C(n, m) copies; for
/// even n the middle class pairs internally into C(n, n/2)/2 copies.
pub fn blocks(x: &GhzXState) -> Vec<XBlock> {
    let n = x.n;
    let mut out = Vec::new();
    for m in 0..=n {
        if 2 * m >= n {
            break;
        }
        let block = CMat::from_vec(2, 2, vec![c(x.diag[m], 0.0), x.anti[m], x.anti[m].conj(), c(x.diag[n - m], 0.0)]);
        out.push(XBlock { block, multiplicity: binomial(n, m) as usize });
    }
    if n % 2 == 0 {
        let m = n / 2;
        let block = CMat::from_vec(2, 2, vec![c(x.diag[m], 0.0), x.anti[m], x.anti[m].conj(), c(x.diag[m], 0.0)]);
        out.push(XBlock { block, multiplicity: binomial(n, m) as usize / 2 });
    }
    out
}

/// ⟨ψ|ρ|ψ⟩ for a pure-state projector ψ.
pub fn fidelity_pure(rho: &CMat, psi: &CMat) -> f64 {
    rho.trace_product(psi).re
}

/// Six-qubit GHZ projector decomposed into a population term and six
/// equatorial correlation settings.
#[derive(Debug, Clone)]
pub struct WitnessG6 {
    /// |0⟩⟨0|^⊗6 + |1⟩⟨1|^⊗6.
    pub population: CMat,
    /// [cos(kπ/6)σx + sin(kπ/6)σy]^⊗6 for k = 0..5.
    pub settings: Vec<CMat>,
}

impl WitnessG6 {
    pub fn new() -> Self {
        let dim = 64;
        let mut population = CMat::zeros(dim, dim);
        population[(0, 0)] = c(1.0, 0.0);
        population[(dim - 1, dim - 1)] = c(1.0, 0.0);
        let settings = (0..6)
            .map(|k| {
                let phi = k as f64 * std::f64::consts::PI / 6.0;
                let single = &pauli::x().scale_re(phi.cos()) + &pauli::y().scale_re(phi.sin());
                kron_power(&single, 6)
            })
            .collect();
        WitnessG6 { population, settings }
    }

    /// (1/2)A + (1/12)Σ(−1)^k M_k as a dense operator.
    pub fn operator(&self) -> CMat {
        let mut op = self.population.scale_re(0.5);
        for (k, m) in self.settings.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            op = &op + &m.scale_re(sign / 12.0);
        }
        op
    }

    pub fn evaluate(&self, rho: &CMat) -> f64 {
        let mut value = 0.5 * self.population.trace_product(rho).re;
        for (k, m) in self.settings.iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            value += sign / 12.0 * m.trace_product(rho).re;
        }
        value
    }
}

impl Default for WitnessG6 {
    fn default() -> Self {
        Self::new()
    }
}

/// Six-qubit GHZ fidelity from the population/correlation settings.
pub fn witness_g6(rho: &CMat) -> Result<f64> {
    if rho.rows() != 64 || rho.cols() != 64 {
        return Err(Error::DimensionMismatch(format!("witness needs 64x64, got {}x{}", rho.rows(), rho.cols())));
    }
    Ok(WitnessG6::new().evaluate(rho))
}

/// H^{⊗n} as a dense matrix.
pub fn hadamard_all(n: usize) -> CMat {
    kron_power(&pauli::hadamard(), n)
}
