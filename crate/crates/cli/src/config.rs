//! Run configuration: one TOML document with a section per command.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ghz_metrology::channel::NoiseModel;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output: OutputConfig,
    pub noise: NoiseConfig,
    pub freeze: FreezeConfig,
    pub phase_qfi: PhaseQfiConfig,
    pub frequency: FrequencyConfig,
    pub scaling: ScalingSection,
    pub channel_validate: ChannelValidateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            output: OutputConfig::default(),
            noise: NoiseConfig::default(),
            freeze: FreezeConfig::default(),
            phase_qfi: PhaseQfiConfig::default(),
            frequency: FrequencyConfig::default(),
            scaling: ScalingSection::default(),
            channel_validate: ChannelValidateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub gamma: f64,
    pub alpha_x: f64,
    pub alpha_y: f64,
    pub alpha_z: f64,
    pub omega: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { gamma: 1.0, alpha_x: 1.0, alpha_y: 0.0, alpha_z: 0.0, omega: 1.0 }
    }
}

impl NoiseConfig {
    pub fn model(&self) -> Result<NoiseModel, CliError> {
        if !self.omega.is_finite() {
            return Err(CliError::config("noise.omega must be finite"));
        }
        NoiseModel::new(self.gamma, self.alpha_x, self.alpha_y, self.alpha_z).map_err(|e| CliError::config(format!("noise: {e}")))
    }
}

fn unit_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreezeConfig {
    pub n: usize,
    pub p_grid: Vec<f64>,
}

impl Default for FreezeConfig {
    fn default() -> Self {
        FreezeConfig { n: 4, p_grid: unit_grid() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseQfiConfig {
    pub n: usize,
    pub p_grid: Vec<f64>,
}

impl Default for PhaseQfiConfig {
    fn default() -> Self {
        PhaseQfiConfig { n: 4, p_grid: unit_grid() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Analytic,
    FivePoint,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrequencyConfig {
    pub n_list: Vec<usize>,
    /// Derivative scheme used for the reported precision (t_opt always uses the analytic one).
    pub stencil: Scheme,
    /// Five-point grid length; defaults to 0.1 for n ≤ 2 and 0.2 otherwise.
    pub h: Option<f64>,
    /// Number of ω points in the fringe table, centred on ω.
    pub perturbations: usize,
    /// ω spacing of the fringe table; defaults to the stencil grid length.
    pub fringe_step: Option<f64>,
    pub v_add: Option<f64>,
    pub monte_carlo: MonteCarloConfig,
}

impl Default for FrequencyConfig {
    fn default() -> Self {
        FrequencyConfig {
            n_list: vec![1, 2, 3, 4, 6],
            stencil: Scheme::Analytic,
            h: None,
            perturbations: 5,
            fringe_step: None,
            v_add: None,
            monte_carlo: MonteCarloConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub enabled: bool,
    pub shots: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { enabled: false, shots: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeRuleConfig {
    Optimize,
    Proportional { c: f64, exponent: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub f0: Vec<f64>,
    /// Adds a curve with ideal preparation and this fixed white-noise fraction.
    pub fixed_noise: Option<f64>,
    pub n_points: usize,
    pub n_max: usize,
    pub window: [f64; 2],
    pub t_rule: TimeRuleConfig,
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection {
            f0: vec![1.0, 0.9837, 0.9999, 0.99999],
            fixed_noise: Some(0.07),
            n_points: 200,
            n_max: 100_000,
            window: [1e2, 1e5],
            t_rule: TimeRuleConfig::Optimize,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelValidateConfig {
    pub t_grid: Vec<f64>,
    pub rk4_step: f64,
    pub tolerance: f64,
    pub kraus_tolerance: f64,
    /// Perturbs the closed-form b coefficient by 1e-3 to exercise the gate.
    pub inject_fault: bool,
}

impl Default for ChannelValidateConfig {
    fn default() -> Self {
        ChannelValidateConfig {
            t_grid: (0..=20).map(|i| i as f64 / 10.0).collect(),
            rk4_step: 1e-3,
            tolerance: 1e-7,
            kraus_tolerance: 1e-10,
            inject_fault: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(msg()))
    }
}

fn check_p_grid(section: &str, grid: &[f64]) -> Result<(), CliError> {
    check(!grid.is_empty(), || format!("{section}.p_grid is empty"))?;
    for &p in grid {
        check((0.0..=1.0).contains(&p), || format!("{section}.p_grid value {p} outside [0, 1]"))?;
    }
    Ok(())
}

fn check_qubits(section: &str, n: usize) -> Result<(), CliError> {
    let max = ghz_metrology::states::MAX_DENSE_QUBITS;
    check((1..=max).contains(&n), || format!("{section}.n = {n} outside [1, {max}]"))
}

impl FreezeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_qubits("freeze", self.n)?;
        check_p_grid("freeze", &self.p_grid)
    }
}

impl PhaseQfiConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_qubits("phase_qfi", self.n)?;
        check_p_grid("phase_qfi", &self.p_grid)
    }
}

impl FrequencyConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(!self.n_list.is_empty(), || "frequency.n_list is empty".into())?;
        for &n in &self.n_list {
            check((1..=64).contains(&n), || format!("frequency.n_list value {n} outside [1, 64]"))?;
        }
        if let Some(h) = self.h {
            check(h > 0.0 && h.is_finite(), || format!("frequency.h = {h} must be positive"))?;
        }
        if let Some(s) = self.fringe_step {
            check(s > 0.0 && s.is_finite(), || format!("frequency.fringe_step = {s} must be positive"))?;
        }
        check(self.perturbations % 2 == 1, || "frequency.perturbations must be odd".into())?;
        if let Some(v) = self.v_add {
            check((0.0..=1.0).contains(&v), || format!("frequency.v_add = {v} outside [0, 1]"))?;
        }
        check(self.monte_carlo.shots >= 1, || "frequency.monte_carlo.shots must be at least 1".into())?;
        if self.monte_carlo.enabled {
            for &n in &self.n_list {
                check(n <= 16, || format!("frequency.monte_carlo supports n ≤ 16, got {n}"))?;
            }
        }
        Ok(())
    }
}

impl ScalingSection {
    pub fn validate(&self) -> Result<(), CliError> {
        check(!self.f0.is_empty() || self.fixed_noise.is_some(), || "scaling defines no curves".into())?;
        for &f in &self.f0 {
            check(f > 0.0 && f <= 1.0, || format!("scaling.f0 value {f} outside (0, 1]"))?;
        }
        if let Some(x) = self.fixed_noise {
            check((0.0..1.0).contains(&x), || format!("scaling.fixed_noise = {x} outside [0, 1)"))?;
        }
        check(self.n_points >= 2, || "scaling.n_points must be at least 2".into())?;
        check(self.n_max >= 2 && self.n_max <= 10_000_000, || format!("scaling.n_max = {} outside [2, 1e7]", self.n_max))?;
        check(self.window[0] > 0.0 && self.window[0] < self.window[1], || "scaling.window must be an increasing positive pair".into())?;
        if let TimeRuleConfig::Proportional { c, exponent } = self.t_rule {
            check(c > 0.0 && exponent.is_finite(), || "scaling.t_rule needs c > 0 and a finite exponent".into())?;
        }
        Ok(())
    }
}

impl ChannelValidateConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(!self.t_grid.is_empty(), || "channel_validate.t_grid is empty".into())?;
        for &t in &self.t_grid {
            check(t >= 0.0 && t.is_finite(), || format!("channel_validate.t_grid value {t} must be ≥ 0"))?;
        }
        check(self.rk4_step > 0.0, || "channel_validate.rk4_step must be positive".into())?;
        check(self.tolerance > 0.0 && self.kraus_tolerance > 0.0, || "channel_validate tolerances must be positive".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.freeze.p_grid.len(), 11);
        assert_eq!(cfg.scaling.f0.len(), 4);
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = RunConfig::parse(
            r#"
            seed = 7
            [noise]
            gamma = 0.5
            [frequency]
            stencil = "five-point"
            v_add = 0.93
            [frequency.monte_carlo]
            enabled = true
            shots = 1000
            [scaling.t_rule]
            kind = "proportional"
            c = 0.4
            exponent = -0.3333
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.noise.gamma, 0.5);
        assert_eq!(cfg.frequency.stencil, Scheme::FivePoint);
        assert!(cfg.frequency.monte_carlo.enabled);
        assert_eq!(cfg.scaling.t_rule, TimeRuleConfig::Proportional { c: 0.4, exponent: -0.3333 });
    }

    #[test]
    fn example_file_matches_defaults() {
        let cfg = RunConfig::parse(include_str!("../run.example.toml")).unwrap();
        let d = RunConfig::default();
        assert_eq!(cfg.seed, d.seed);
        assert_eq!(cfg.freeze.p_grid, d.freeze.p_grid);
        assert_eq!(cfg.frequency.n_list, d.frequency.n_list);
        assert_eq!(cfg.scaling.f0, d.scaling.f0);
        assert_eq!(cfg.scaling.window, d.scaling.window);
        assert_eq!(cfg.channel_validate.t_grid, d.channel_validate.t_grid);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[freeze]\nq = 3").is_err());
        assert!(RunConfig::parse("sed = 3").is_err());
    }

    #[test]
    fn range_checks() {
        let mut f = FreezeConfig::default();
        f.p_grid.push(1.5);
        assert!(f.validate().is_err());
        let q = PhaseQfiConfig { n: 9, ..Default::default() };
        assert!(q.validate().is_err());
        let s = ScalingSection { f0: vec![1.2], ..Default::default() };
        assert!(s.validate().is_err());
        let fr = FrequencyConfig { perturbations: 4, ..Default::default() };
        assert!(fr.validate().is_err());
        let bad_noise = NoiseConfig { alpha_x: 0.5, ..Default::default() };
        assert!(bad_noise.model().is_err());
    }
}
