//! Coherence quantifiers and the bit-flip freezing experiment.
//!
//! Measures are evaluated in the matrix's own index basis; to measure in the
//! ± basis rotate first with [`hadamard_rotate`].

use crate::channel::bitflip_channel;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{density_spectrum, herm_eig, pauli, shannon_bits, vn_entropy, CMat, C64};
use crate::states::{apply_product_channel, ghz, hadamard_all, Basis};

/// Pairs of eigenvalues whose sum is at or below this are dropped from QFI sums.
pub const QFI_CUTOFF: f64 = 1e-10;

/// Σ_{i≠j} |ρ_ij|.
pub fn c_l1(rho: &CMat) -> f64 {
    let n = rho.rows();
    let mut sum = 0.0;
    for r in 0..n {
        for col in 0..n {
            if r != col {
                sum += rho[(r, col)].norm();
            }
        }
    }
    sum
}

/// S(ρ_diag) − S(ρ) in bits.
pub fn c_re(rho: &CMat) -> Result<f64> {
    let s = vn_entropy(rho)?;
    let diag = (0..rho.rows()).map(|i| rho[(i, i)].re);
    Ok((shannon_bits(diag) - s).max(0.0))
}

/// H^{⊗n} ρ H^{⊗n}.
pub fn hadamard_rotate(rho: &CMat, n: usize) -> CMat {
    rho.conjugate_by(&hadamard_all(n))
}

/// QFI of the unitary family e^{−iφH} ρ e^{iφH}:
/// 2 Σ (λ_n − λ_m)² / (λ_n + λ_m) |⟨ψ_n|H|ψ_m⟩|².
pub fn qfi_unitary(rho: &CMat, h: &CMat) -> Result<f64> {
    let residue = h.hermitian_residue();
    if residue > crate::numerics::HERMITIAN_TOL {
        return Err(Error::NotHermitian { residue });
    }
    if h.rows() != rho.rows() || h.cols() != rho.cols() {
        return Err(Error::DimensionMismatch("generator and state differ in size".into()));
    }
    let eig = density_spectrum(rho)?;
    let v = &eig.vectors;
    let hv = &(&v.dagger() * h) * v;
    let lam = &eig.values;
    let mut f = 0.0;
    for i in 0..lam.len() {
        for j in 0..lam.len() {
            let s = lam[i] + lam[j];
            if s <= QFI_CUTOFF {
                continue;
            }
            let d = lam[i] - lam[j];
            f += d * d / s * hv[(i, j)].norm_sqr();
        }
    }
    Ok(2.0 * f)
}

/// QFI from a state and its parameter derivative:
/// 2 Σ |⟨ψ_m|∂ρ|ψ_n⟩|² / (λ_n + λ_m).
pub fn qfi_from_derivative(rho: &CMat, drho: &CMat) -> Result<f64> {
    let eig = herm_eig(rho)?;
    let v = &eig.vectors;
    let dv = &(&v.dagger() * drho) * v;
    let lam: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let mut f = 0.0;
    for i in 0..lam.len() {
        for j in 0..lam.len() {
            let s = lam[i] + lam[j];
            if s > QFI_CUTOFF {
                f += dv[(i, j)].norm_sqr() / s;
            }
        }
    }
    Ok(2.0 * f)
}

/// One point of the freezing sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FreezeSweepRecord {
    pub prep_basis: Basis,
    pub measure_basis: Basis,
    pub p: f64,
    pub c_l1: f64,
    pub c_re: f64,
    /// Phase QFI of the noisy state for the collective generator along the
    /// measurement axis (Σσz for 0/1, Σσx for ±).
    pub qfi: f64,
}

/// Collective generator Σσz (computational) or Σσx (hadamard).
pub fn phase_generator(n: usize, axis: Basis) -> CMat {
    match axis {
        Basis::Computational => pauli::collective(&pauli::z(), n),
        Basis::Hadamard => pauli::collective(&pauli::x(), n),
    }
}

/// GHZ(prep) after independent bit-flip noise of strength `p` on every qubit.
pub fn bitflip_ghz(n: usize, prep: Basis, p: f64) -> Result<CMat> {
    apply_product_channel(&ghz(n, prep)?, &bitflip_channel(p)?, n)
}

/// Coherence and phase-QFI of a noisy GHZ probe over a grid of bit-flip strengths.
pub fn freeze_sweep(n: usize, prep: Basis, measure: Basis, p_grid: &[f64]) -> Result<Vec<FreezeSweepRecord>> {
    freeze_sweep_with(Execution::default(), n, prep, measure, p_grid)
}

pub fn freeze_sweep_with(
    exec: Execution,
    n: usize,
    prep: Basis,
    measure: Basis,
    p_grid: &[f64],
) -> Result<Vec<FreezeSweepRecord>> {
    let generator = phase_generator(n, measure);
    exec.map_slice(p_grid, |&p| {
        let noisy = bitflip_ghz(n, prep, p)?;
        let seen = match measure {
            Basis::Computational => noisy.clone(),
            Basis::Hadamard => hadamard_rotate(&noisy, n),
        };
        Ok(FreezeSweepRecord {
            prep_basis: prep,
            measure_basis: measure,
            p,
            c_l1: c_l1(&seen),
            c_re: c_re(&seen)?,
            qfi: qfi_unitary(&noisy, &generator)?,
        })
    })
    .into_iter()
    .collect()
}

/// |+⟩^{⊗n} under bit-flip noise: the optimal unentangled phase probe.
pub fn product_plus_state(n: usize, p: f64) -> Result<CMat> {
    let amp = C64::new(1.0 / ((1usize << n) as f64).sqrt(), 0.0);
    let plus = CMat::projector(&vec![amp; 1 << n]);
    apply_product_channel(&plus, &bitflip_channel(p)?, n)
}
