//! Dense complex matrices sized for few-qubit density operators.
//!
//! Everything here is row-major and allocation-light; the largest matrices the
//! crate builds are 64×64 (six qubits).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance for the Hermiticity precondition of [`herm_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above `-EIGEN_CLAMP` are treated as round-off and clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 100;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self[(r, col)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        CMat { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for col in 0..cols {
                m[(r, col)] = f(r, col);
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// The projector |ψ⟩⟨ψ| of a (not necessarily normalised) vector.
    pub fn projector(psi: &[C64]) -> Self {
        let n = psi.len();
        Self::from_fn(n, n, |r, col| psi[r] * psi[col].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self[(col, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Copy with every off-diagonal entry set to zero.
    pub fn diagonal_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, col| if r == col { self[(r, col)] } else { C64::new(0.0, 0.0) })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entry of |A − A†|.
    pub fn hermitian_residue(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for col in r..self.cols {
                worst = worst.max((self[(r, col)] - self[(col, r)].conj()).norm());
            }
        }
        worst
    }

    /// tr(A·B) without forming the product.
    pub fn trace_product(&self, other: &CMat) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// A·B·A†.
    pub fn conjugate_by(&self, a: &CMat) -> Self {
        &(a * self) * &a.dagger()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|col| self[(r, col)] * v[col]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (r, col): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && col < self.cols);
        &self.data[r * self.cols + col]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && col < self.cols);
        &mut self.data[r * self.cols + col]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Kronecker product; row index of `a` is the more significant one.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (br, bc) = (b.rows, b.cols);
    CMat::from_fn(a.rows * br, a.cols * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

/// ⊗ of `op` with itself `n` times.
pub fn kron_power(op: &CMat, n: usize) -> CMat {
    let mut out = op.clone();
    for _ in 1..n {
        out = kron(&out, op);
    }
    out
}

pub mod pauli {
    use super::{c, CMat};

    pub fn i2() -> CMat {
        CMat::identity(2)
    }

    pub fn x() -> CMat {
        CMat::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn y() -> CMat {
        CMat::from_vec(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn z() -> CMat {
        CMat::from_vec(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    pub fn hadamard() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMat::from_vec(2, 2, vec![c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])
    }

    /// (σ0, σx, σy, σz).
    pub fn basis() -> [CMat; 4] {
        [i2(), x(), y(), z()]
    }

    /// Σ_k σ^(k) acting on `n` qubits.
    pub fn collective(op: &CMat, n: usize) -> CMat {
        let dim = 1usize << n;
        let id = i2();
        let mut sum = CMat::zeros(dim, dim);
        for k in 0..n {
            let mut term = CMat::identity(1);
            for j in 0..n {
                term = super::kron(&term, if j == k { op } else { &id });
            }
            sum = &sum + &term;
        }
        sum
    }
}

/// Eigen-decomposition A = V Λ V† of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

impl HermEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|r| self.vectors[(r, k)]).collect()
    }

    pub fn reconstruct(&self) -> CMat {
        let lam = CMat::from_real_diag(&self.values);
        &(&self.vectors * &lam) * &self.vectors.dagger()
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies the
/// real symmetric Jacobi rotation to the resulting 2×2 block.
pub fn herm_eig(a: &CMat) -> Result<HermEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows, a.cols)));
    }
    let residue = a.hermitian_residue();
    if residue > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residue });
    }
    let n = a.rows;
    // symmetrise so round-off in the input cannot bias the rotations
    let mut m = CMat::from_fn(n, n, |r, col| (a[(r, col)] + a[(col, r)].conj()) * 0.5);
    let mut v = CMat::identity(n);

    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&col| col != r).map(move |col| (r, col)))
            .map(|(r, col)| m[(r, col)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                // U restricted to (p,q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let u_pp = C64::new(cs, 0.0);
                let u_pq = C64::new(sn, 0.0);
                let u_qp = -phase.conj() * sn;
                let u_qq = phase.conj() * cs;
                // M <- M U
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * u_pp + mkq * u_qp;
                    m[(k, q)] = mkp * u_pq + mkq * u_qq;
                }
                // M <- U† M
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = u_pp.conj() * mpk + u_qp.conj() * mqk;
                    m[(q, k)] = u_pq.conj() * mpk + u_qq.conj() * mqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(HermEigen { values, vectors })
}

/// Checks the density-matrix contract and returns its clamped spectrum.
pub fn density_spectrum(rho: &CMat) -> Result<HermEigen> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let mut eig = herm_eig(rho).map_err(|e| match e {
        Error::NotHermitian { residue } => Error::NotDensityMatrix(format!("non-Hermitian (residue {residue:.3e})")),
        other => other,
    })?;
    if let Some(&min) = eig.values.first() {
        if min < -EIGEN_CLAMP {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:.3e}")));
        }
    }
    for v in &mut eig.values {
        *v = v.max(0.0);
    }
    Ok(eig)
}

/// Shannon entropy in bits of a probability list, with 0·log 0 = 0.
pub fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &CMat) -> Result<f64> {
    let eig = density_spectrum(rho)?;
    Ok(shannon_bits(eig.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
        let g = random_matrix(rng, n, n);
        (&g + &g.dagger()).scale_re(0.5)
    }

    #[test]
    fn kron_identity_and_parity() {
        assert_eq!(kron(&pauli::i2(), &pauli::i2()), CMat::identity(4));
        let zz = kron(&pauli::z(), &pauli::z());
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&pauli::x(), &pauli::x());
        let mut e00 = vec![C64::new(0.0, 0.0); 4];
        e00[0] = C64::new(1.0, 0.0);
        let out = xx.matvec(&e00);
        assert_eq!(out[3], C64::new(1.0, 0.0));
        assert_eq!(xx.matvec(&out), e00);
    }

    #[test]
    fn eig_of_diagonal() {
        let e = herm_eig(&CMat::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(2, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_of_pauli_x() {
        let e = herm_eig(&pauli::x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        // |−⟩ then |+⟩, up to a global phase
        let minus = e.vector(0);
        assert!((minus[0] + minus[1]).norm() < 1e-14);
        let plus = e.vector(1);
        assert!((plus[0] - plus[1]).norm() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMat::from_vec(2, 2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_reconstructs_random_16x16() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..5 {
            let a = random_hermitian(&mut rng, 16);
            let e = herm_eig(&a).unwrap();
            assert!(e.reconstruct().max_abs_diff(&a) < 1e-10);
            let vv = &e.vectors.dagger() * &e.vectors;
            assert!(vv.max_abs_diff(&CMat::identity(16)) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_spectrum() {
        let a = &kron(&pauli::x(), &pauli::x()) + &kron(&pauli::z(), &pauli::z());
        let e = herm_eig(&a).unwrap();
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn entropy_reference_values() {
        let pure = CMat::projector(&[c(0.6, 0.0), c(0.0, 0.8)]);
        assert!(vn_entropy(&pure).unwrap().abs() < 1e-12);
        assert!((vn_entropy(&CMat::identity(2).scale_re(0.5)).unwrap() - 1.0).abs() < 1e-14);
        for n in 1..=4 {
            let d = 1 << n;
            let mixed = CMat::identity(d).scale_re(1.0 / d as f64);
            assert!((vn_entropy(&mixed).unwrap() - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_rejects_non_states() {
        assert!(matches!(vn_entropy(&CMat::identity(2)), Err(Error::NotDensityMatrix(_))));
        let neg = CMat::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(vn_entropy(&neg), Err(Error::NotDensityMatrix(_))));
    }

    #[test]
    fn collective_z_on_two_qubits() {
        let h = pauli::collective(&pauli::z(), 2);
        let diag: Vec<f64> = (0..4).map(|i| h[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, 0.0, 0.0, -2.0]);
    }

    proptest! {
        #[test]
        fn kron_is_associative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 2, 3);
            let b = random_matrix(&mut rng, 3, 2);
            let cm = random_matrix(&mut rng, 2, 2);
            let lhs = kron(&kron(&a, &b), &cm);
            let rhs = kron(&a, &kron(&b, &cm));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn entropy_within_bounds(seed in any::<u64>(), n in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 1 << n;
            let g = random_matrix(&mut rng, d, d);
            let gg = &g * &g.dagger();
            let rho = gg.scale_re(1.0 / gg.trace().re);
            let s = vn_entropy(&rho).unwrap();
            prop_assert!(s >= -1e-12 && s <= n as f64 + 1e-12);
        }

        #[test]
        fn eig_reconstruction_property(seed in any::<u64>(), n in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(&mut rng, n);
            let e = herm_eig(&a).unwrap();
            prop_assert!(e.reconstruct().max_abs_diff(&a) < 1e-10);
        }
    }
}
