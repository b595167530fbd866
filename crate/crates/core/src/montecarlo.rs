//! Seeded trajectory simulation of the product channel and of parity shots.
//!
//! Every Kraus operator is unitary, so a trajectory is a pure state: each
//! qubit independently draws one operator with probability p_i. Shots are
//! split into fixed-size chunks, chunk `j` drawing from ChaCha8 stream `j` of
//! the configured seed, which makes results independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{coefficients, kraus, KrausSet, NoiseModel};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{CMat, C64};
use crate::states::{apply_local_vec, ghz_vector, Basis};

/// Shots drawn from one RNG stream.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryConfig {
    pub shots: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl TrajectoryConfig {
    pub fn new(shots: usize, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::OutOfRange { name: "shots", value: 0.0, range: "[1, ∞)" });
        }
        Ok(TrajectoryConfig { shots, seed, execution: Execution::default() })
    }

    pub fn with_execution(self, execution: Execution) -> Self {
        TrajectoryConfig { execution, ..self }
    }

    fn chunks(&self) -> usize {
        self.shots.div_ceil(CHUNK)
    }

    fn chunk_len(&self, j: usize) -> usize {
        CHUNK.min(self.shots - j * CHUNK)
    }

    fn rng(&self, j: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(j as u64);
        rng
    }
}

/// Sample mean and standard error of ±1 parity outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: usize,
}

impl ParityEstimate {
    fn from_sum(sum: f64, shots: usize) -> Self {
        let n = shots as f64;
        let mean = sum / n;
        // outcomes are ±1, so the sample variance is n/(n−1)·(1 − mean²)
        let var = if shots > 1 { (1.0 - mean * mean).max(0.0) * n / (n - 1.0) } else { 0.0 };
        ParityEstimate { mean, stderr: (var / n).sqrt(), shots }
    }
}

/// Cumulative distribution over the Kraus indices, negative weights clamped to zero.
fn cumulative(k: &KrausSet) -> [f64; 4] {
    let p = k.probs.map(|p| p.max(0.0));
    let total: f64 = p.iter().sum();
    let mut acc = 0.0;
    p.map(|pi| {
        acc += pi / total;
        acc
    })
}

fn draw(cdf: &[f64; 4], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    cdf.iter().position(|&c| u < c).unwrap_or(3)
}

/// One unravelling of K^{⊗n}: every qubit gets an independently drawn unitary.
pub fn sample_trajectory(k: &KrausSet, psi: &[C64], n: usize, rng: &mut impl Rng) -> Result<Vec<C64>> {
    if psi.len() != 1 << n {
        return Err(Error::DimensionMismatch(format!("state has {} amplitudes, expected {}", psi.len(), 1usize << n)));
    }
    let cdf = cumulative(k);
    let mut out = psi.to_vec();
    sample_in_place(k, &cdf, &mut out, n, rng);
    Ok(out)
}

fn sample_in_place(k: &KrausSet, cdf: &[f64; 4], psi: &mut [C64], n: usize, rng: &mut impl Rng) {
    for q in 0..n {
        apply_local_vec(psi, &k.ops[draw(cdf, rng)], q, n);
    }
}

/// ⟨ψ|σx^{⊗n}|ψ⟩.
fn parity_of(psi: &[C64]) -> f64 {
    let last = psi.len() - 1;
    psi.iter().enumerate().map(|(s, a)| (a.conj() * psi[last - s]).re).sum()
}

fn sample_sign(p_plus: f64, rng: &mut impl Rng) -> f64 {
    if rng.random::<f64>() < p_plus {
        1.0
    } else {
        -1.0
    }
}

/// Parity shots on a GHZ probe sent through the channel.
pub fn simulate_parity(n: usize, model: &NoiseModel, omega: f64, t: f64, cfg: &TrajectoryConfig) -> Result<ParityEstimate> {
    simulate_parity_flipped(n, model, omega, t, cfg, 1.0)
}

/// As [`simulate_parity`], with each outcome flipped with probability (1 − v_add)/2.
pub fn simulate_parity_flipped(
    n: usize,
    model: &NoiseModel,
    omega: f64,
    t: f64,
    cfg: &TrajectoryConfig,
    v_add: f64,
) -> Result<ParityEstimate> {
    check_visibility(v_add)?;
    let k = kraus(&coefficients(model, omega, t)?)?;
    let cdf = cumulative(&k);
    let ghz = ghz_vector(n, Basis::Computational);
    let flip = 0.5 * (1.0 - v_add);
    let sums = cfg.execution.map(cfg.chunks(), |j| {
        let mut rng = cfg.rng(j);
        let mut psi = vec![C64::new(0.0, 0.0); ghz.len()];
        let mut sum = 0.0;
        for _ in 0..cfg.chunk_len(j) {
            psi.copy_from_slice(&ghz);
            sample_in_place(&k, &cdf, &mut psi, n, &mut rng);
            let mut x = sample_sign(0.5 * (1.0 + parity_of(&psi)), &mut rng);
            if flip > 0.0 && rng.random::<f64>() < flip {
                x = -x;
            }
            sum += x;
        }
        sum
    });
    Ok(ParityEstimate::from_sum(sums.iter().sum(), cfg.shots))
}

/// Draws ±1 outcomes with mean `mean_in`, flips each with probability
/// (1 − v_add)/2 and reports the resulting statistics.
pub fn flip_outcomes(mean_in: f64, v_add: f64, cfg: &TrajectoryConfig) -> Result<ParityEstimate> {
    check_visibility(v_add)?;
    if !(-1.0..=1.0).contains(&mean_in) {
        return Err(Error::OutOfRange { name: "mean_in", value: mean_in, range: "[-1, 1]" });
    }
    let flip = 0.5 * (1.0 - v_add);
    let sums = cfg.execution.map(cfg.chunks(), |j| {
        let mut rng = cfg.rng(j);
        (0..cfg.chunk_len(j))
            .map(|_| {
                let x = sample_sign(0.5 * (1.0 + mean_in), &mut rng);
                if rng.random::<f64>() < flip {
                    -x
                } else {
                    x
                }
            })
            .sum::<f64>()
    });
    Ok(ParityEstimate::from_sum(sums.iter().sum(), cfg.shots))
}

fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { name: "v_add", value: v, range: "[0, 1]" });
    }
    Ok(())
}

/// Trajectory average of |ψ⟩⟨ψ| with entrywise standard errors.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub mean: CMat,
    pub stderr_re: Vec<f64>,
    pub stderr_im: Vec<f64>,
}

impl DensityEstimate {
    /// Largest |mean − exact| in units of the entry's standard error, with
    /// `floor` guarding entries that never fluctuate.
    pub fn max_sigma_deviation(&self, exact: &CMat, floor: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, (m, e)) in self.mean.as_slice().iter().zip(exact.as_slice()).enumerate() {
            worst = worst.max((m.re - e.re).abs() / self.stderr_re[i].max(floor));
            worst = worst.max((m.im - e.im).abs() / self.stderr_im[i].max(floor));
        }
        worst
    }
}

pub fn trajectory_average(k: &KrausSet, psi: &[C64], n: usize, cfg: &TrajectoryConfig) -> Result<DensityEstimate> {
    let dim = 1usize << n;
    if psi.len() != dim {
        return Err(Error::DimensionMismatch(format!("state has {} amplitudes, expected {dim}", psi.len())));
    }
    let cdf = cumulative(k);
    let entries = dim * dim;
    // per chunk: Σ entry, Σ re², Σ im²
    let partial = cfg.execution.map(cfg.chunks(), |j| {
        let mut rng = cfg.rng(j);
        let mut sum = vec![C64::new(0.0, 0.0); entries];
        let mut sq_re = vec![0.0; entries];
        let mut sq_im = vec![0.0; entries];
        let mut phi = psi.to_vec();
        for _ in 0..cfg.chunk_len(j) {
            phi.copy_from_slice(psi);
            sample_in_place(k, &cdf, &mut phi, n, &mut rng);
            for r in 0..dim {
                for col in 0..dim {
                    let z = phi[r] * phi[col].conj();
                    let idx = r * dim + col;
                    sum[idx] += z;
                    sq_re[idx] += z.re * z.re;
                    sq_im[idx] += z.im * z.im;
                }
            }
        }
        (sum, sq_re, sq_im)
    });
    let mut sum = vec![C64::new(0.0, 0.0); entries];
    let mut sq_re = vec![0.0; entries];
    let mut sq_im = vec![0.0; entries];
    for (s, r, i) in &partial {
        for idx in 0..entries {
            sum[idx] += s[idx];
            sq_re[idx] += r[idx];
            sq_im[idx] += i[idx];
        }
    }
    let shots = cfg.shots as f64;
    let stderr = |sq: f64, mean: f64| {
        let var = if cfg.shots > 1 { ((sq / shots - mean * mean) * shots / (shots - 1.0)).max(0.0) } else { 0.0 };
        (var / shots).sqrt()
    };
    let mean: Vec<C64> = sum.iter().map(|z| z / shots).collect();
    let stderr_re = (0..entries).map(|i| stderr(sq_re[i], mean[i].re)).collect();
    let stderr_im = (0..entries).map(|i| stderr(sq_im[i], mean[i].im)).collect();
    Ok(DensityEstimate { mean: CMat::from_vec(dim, dim, mean), stderr_re, stderr_im })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bitflip_channel;
    use crate::metrology::parity_expectation;
    use crate::numerics::c;
    use crate::states::{apply_product_channel, ghz};
    use std::f64::consts::PI;

    #[test]
    fn identity_trajectory_is_trivial() {
        let psi = ghz_vector(3, Basis::Hadamard);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = sample_trajectory(&KrausSet::identity(), &psi, 3, &mut rng).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn deterministic_flip_on_every_qubit() {
        let k = bitflip_channel(1.0).unwrap();
        let forced = KrausSet { probs: [0.0, 0.0, 1.0, 0.0], ..k };
        let mut zero = vec![c(0., 0.); 8];
        zero[0] = c(1., 0.);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = sample_trajectory(&forced, &zero, 3, &mut rng).unwrap();
        assert_eq!(out[7], c(1., 0.));
        assert!(out[..7].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn noiseless_fringe_minimum_is_deterministic() {
        let n = 3;
        let t = PI / n as f64;
        let cfg = TrajectoryConfig::new(2000, 5).unwrap();
        let est = simulate_parity(n, &NoiseModel::noiseless(), 1.0, t, &cfg).unwrap();
        assert_eq!(est.mean, -1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn parity_agrees_with_closed_form() {
        let m = NoiseModel::transversal(1.0);
        let cfg = TrajectoryConfig::new(100_000, 42).unwrap();
        let est = simulate_parity(4, &m, 1.0, 0.4650, &cfg).unwrap();
        let exact = parity_expectation(4, &coefficients(&m, 1.0, 0.4650).unwrap());
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{} vs {exact} ± {}", est.mean, est.stderr);
    }

    #[test]
    fn seed_determinism_and_thread_independence() {
        let m = NoiseModel::transversal(1.0);
        let cfg = TrajectoryConfig::new(20_000, 7).unwrap();
        let a = simulate_parity(3, &m, 1.0, 0.5, &cfg).unwrap();
        let b = simulate_parity(3, &m, 1.0, 0.5, &cfg).unwrap();
        let s = simulate_parity(3, &m, 1.0, 0.5, &cfg.with_execution(Execution::Sequential)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, s);
        let other = simulate_parity(3, &m, 1.0, 0.5, &TrajectoryConfig::new(20_000, 8).unwrap()).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn trajectory_average_reproduces_channel() {
        let m = NoiseModel::transversal(1.0);
        let k = kraus(&coefficients(&m, 1.0, 0.7745).unwrap()).unwrap();
        let cfg = TrajectoryConfig::new(100_000, 3).unwrap();
        let est = trajectory_average(&k, &ghz_vector(2, Basis::Computational), 2, &cfg).unwrap();
        let exact = apply_product_channel(&ghz(2, Basis::Computational).unwrap(), &k, 2).unwrap();
        assert!(est.max_sigma_deviation(&exact, 1e-12) <= 4.0);
    }

    #[test]
    fn flip_limits() {
        let cfg = TrajectoryConfig::new(50_000, 11).unwrap();
        let kept = flip_outcomes(0.4, 1.0, &cfg).unwrap();
        let raw = flip_outcomes(0.4, 1.0, &cfg).unwrap();
        assert_eq!(kept, raw);
        assert!((kept.mean - 0.4).abs() <= 4.0 * kept.stderr);
        let coin = flip_outcomes(0.8, 0.0, &cfg).unwrap();
        assert!(coin.mean.abs() <= 4.0 * coin.stderr);
        let partial = flip_outcomes(0.8, 0.93, &cfg).unwrap();
        assert!((partial.mean - 0.93 * 0.8).abs() <= 4.0 * partial.stderr);
        assert!(flip_outcomes(0.5, 1.5, &cfg).is_err());
    }

    #[test]
    fn flipped_shots_match_exact_mixture() {
        let m = NoiseModel::transversal(1.0);
        let cfg = TrajectoryConfig::new(100_000, 21).unwrap();
        for n in 1..=4 {
            let t = 0.3;
            let est = simulate_parity_flipped(n, &m, 1.0, t, &cfg, 0.93).unwrap();
            let exact = 0.93 * parity_expectation(n, &coefficients(&m, 1.0, t).unwrap());
            assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "n={n}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(TrajectoryConfig::new(0, 1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_trajectory(&KrausSet::identity(), &[c(1., 0.)], 2, &mut rng).is_err());
    }
}
