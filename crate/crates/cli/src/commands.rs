use std::path::Path;

use serde::Serialize;

use ghz_metrology::channel::{
    channel_distance, coefficients, kraus, s_matrix, s_matrix_from_master_equation, CoefficientSet, NoiseModel,
};
use ghz_metrology::coherence::{freeze_sweep, phase_generator, product_plus_state, qfi_unitary};
use ghz_metrology::metrology::{
    fisher_per_qubit, optimize_time_with_visibility, parity_expectation, precision_with_visibility, ReferenceBounds,
    StencilConfig,
};
use ghz_metrology::montecarlo::{simulate_parity_flipped, TrajectoryConfig};
use ghz_metrology::scaling::{log_spaced_n_grid, scaling_sweeps, ScalingConfig, TimeRule};
use ghz_metrology::states::Basis;
use ghz_metrology::Execution;

use crate::config::{RunConfig, Scheme, TimeRuleConfig};
use crate::error::CliError;
use crate::output::{write_json, write_table, Cell, Table};

const CASES: [(Basis, Basis); 4] = [
    (Basis::Computational, Basis::Computational),
    (Basis::Computational, Basis::Hadamard),
    (Basis::Hadamard, Basis::Computational),
    (Basis::Hadamard, Basis::Hadamard),
];

fn case_label(prep: Basis, measure: Basis) -> String {
    format!("{}_{}", prep.label(), measure.label())
}

#[derive(Serialize)]
struct FreezeCase {
    case: String,
    c_l1_first: f64,
    c_l1_last: f64,
    c_re_first: f64,
    c_re_last: f64,
}

#[derive(Serialize)]
struct FreezeSummary {
    command: &'static str,
    seed: u64,
    n: usize,
    rows: usize,
    cases: Vec<FreezeCase>,
}

pub fn freeze(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let fc = &cfg.freeze;
    fc.validate()?;
    let mut table = Table::new("freeze", cfg.seed, &["prep_basis", "measure_basis", "p", "c_l1", "c_re"]);
    let mut cases = Vec::new();
    for (prep, measure) in CASES {
        let records = freeze_sweep(fc.n, prep, measure, &fc.p_grid)?;
        for r in &records {
            table.push(vec![prep.label().into(), measure.label().into(), r.p.into(), r.c_l1.into(), r.c_re.into()]);
        }
        let (first, last) = (&records[0], &records[records.len() - 1]);
        cases.push(FreezeCase {
            case: case_label(prep, measure),
            c_l1_first: first.c_l1,
            c_l1_last: last.c_l1,
            c_re_first: first.c_re,
            c_re_last: last.c_re,
        });
    }
    let summary = FreezeSummary { command: "freeze", seed: cfg.seed, n: fc.n, rows: table.len(), cases };
    write_table(out, &table)?;
    write_json(out, "freeze", &summary)?;
    log::info!("freeze: {} rows", table.len());
    Ok(())
}

#[derive(Serialize)]
struct QfiCase {
    case: String,
    min: f64,
    max: f64,
}

#[derive(Serialize)]
struct PhaseQfiSummary {
    command: &'static str,
    seed: u64,
    n: usize,
    cases: Vec<QfiCase>,
}

pub fn phase_qfi(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let qc = &cfg.phase_qfi;
    qc.validate()?;
    let mut table = Table::new("phase_qfi", cfg.seed, &["case", "p", "qfi"]);
    let mut cases = Vec::new();
    let mut add_case = |label: String, values: Vec<(f64, f64)>, table: &mut Table| {
        for &(p, q) in &values {
            table.push(vec![label.clone().into(), p.into(), q.into()]);
        }
        let qs = values.iter().map(|v| v.1);
        let min = qs.clone().fold(f64::INFINITY, f64::min);
        let max = qs.fold(f64::NEG_INFINITY, f64::max);
        cases.push(QfiCase { case: label, min, max });
    };
    for (prep, measure) in CASES {
        let records = freeze_sweep(qc.n, prep, measure, &qc.p_grid)?;
        add_case(case_label(prep, measure), records.iter().map(|r| (r.p, r.qfi)).collect(), &mut table);
    }
    let h = phase_generator(qc.n, Basis::Computational);
    let product = qc
        .p_grid
        .iter()
        .map(|&p| Ok((p, qfi_unitary(&product_plus_state(qc.n, p)?, &h)?)))
        .collect::<Result<Vec<_>, ghz_metrology::Error>>()?;
    add_case("product".into(), product, &mut table);
    let summary = PhaseQfiSummary { command: "phase-qfi", seed: cfg.seed, n: qc.n, cases };
    write_table(out, &table)?;
    write_json(out, "phase_qfi", &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct FrequencyRow {
    n: usize,
    v_add: f64,
    t_opt: f64,
    var_omega_t: f64,
    sql: f64,
    hl: f64,
    s_n: f64,
    mc_mean: Option<f64>,
    mc_stderr: Option<f64>,
}

#[derive(Serialize)]
struct FrequencySummary {
    command: &'static str,
    seed: u64,
    gamma: f64,
    omega: f64,
    stencil: &'static str,
    monte_carlo_shots: Option<usize>,
    rows: Vec<FrequencyRow>,
}

fn stencil_for(cfg: &RunConfig, n: usize) -> Result<StencilConfig, CliError> {
    let fc = &cfg.frequency;
    Ok(match fc.stencil {
        Scheme::Analytic => StencilConfig::analytic(),
        Scheme::FivePoint => match fc.h {
            Some(h) => StencilConfig::five_point(h)?,
            None => StencilConfig::experimental(n),
        },
    })
}

pub fn frequency(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let fc = &cfg.frequency;
    fc.validate()?;
    let model = cfg.noise.model()?;
    let omega = cfg.noise.omega;
    let bounds = ReferenceBounds::new(&model, omega)?;

    let mut visibilities = vec![1.0];
    if let Some(v) = fc.v_add {
        visibilities.push(v);
    }
    let mc = fc.monte_carlo.enabled.then(|| TrajectoryConfig::new(fc.monte_carlo.shots, cfg.seed)).transpose()?;

    let mut fringe = Table::new("fringe", cfg.seed, &["n", "v_add", "t", "omega_perturbed", "px"]);
    let mut prec = Table::new(
        "precision",
        cfg.seed,
        &["n", "v_add", "t_opt", "var_omega_t", "sql", "hl", "s_n", "mean", "stderr", "shots", "seed"],
    );
    let mut rows = Vec::new();
    for &v in &visibilities {
        for &n in &fc.n_list {
            let stencil = stencil_for(cfg, n)?;
            let (t, _) = optimize_time_with_visibility(n, &model, omega, v)?;
            let point = precision_with_visibility(n, &model, omega, t, stencil, v)?;

            let step = fc.fringe_step.unwrap_or(StencilConfig::experimental(n).h);
            let half = (fc.perturbations / 2) as i64;
            for k in -half..=half {
                let w = omega + k as f64 * step;
                let px = v * parity_expectation(n, &coefficients(&model, w, t)?);
                fringe.push(vec![n.into(), v.into(), t.into(), w.into(), px.into()]);
            }

            let est = mc.as_ref().map(|m| simulate_parity_flipped(n, &model, omega, t, m, v)).transpose()?;
            let row = FrequencyRow {
                n,
                v_add: v,
                t_opt: t,
                var_omega_t: point.var_omega_t,
                sql: bounds.sql(n),
                hl: bounds.hl(n),
                s_n: fisher_per_qubit(&point),
                mc_mean: est.map(|e| e.mean),
                mc_stderr: est.map(|e| e.stderr),
            };
            prec.push(vec![
                n.into(),
                v.into(),
                t.into(),
                row.var_omega_t.into(),
                row.sql.into(),
                row.hl.into(),
                row.s_n.into(),
                row.mc_mean.into(),
                row.mc_stderr.into(),
                Cell::from(est.map(|e| e.shots)),
                Cell::from(mc.map(|m| m.seed)),
            ]);
            rows.push(row);
        }
    }
    let summary = FrequencySummary {
        command: "frequency",
        seed: cfg.seed,
        gamma: model.gamma,
        omega,
        stencil: match fc.stencil {
            Scheme::Analytic => "analytic",
            Scheme::FivePoint => "five-point",
        },
        monte_carlo_shots: mc.map(|m| m.shots),
        rows,
    };
    write_table(out, &fringe)?;
    write_table(out, &prec)?;
    write_json(out, "frequency", &summary)?;
    Ok(())
}

fn curve_label(f0: f64, fixed: Option<f64>) -> String {
    match fixed {
        Some(x) => format!("fixed={x}"),
        None => format!("f0={f0}"),
    }
}

#[derive(Serialize)]
struct CurveSummary {
    curve: String,
    f0: f64,
    fixed_noise: Option<f64>,
    window: (f64, f64),
    slope: Option<f64>,
    sql_crossing: Option<usize>,
    points: usize,
    skipped: Vec<usize>,
}

#[derive(Serialize)]
struct ScalingSummary {
    command: &'static str,
    seed: u64,
    gamma: f64,
    omega: f64,
    curves: Vec<CurveSummary>,
}

pub fn scaling(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let sc = &cfg.scaling;
    sc.validate()?;
    let model = cfg.noise.model()?;
    let omega = cfg.noise.omega;
    let grid = log_spaced_n_grid(sc.n_points, sc.n_max);
    let t_rule = match sc.t_rule {
        TimeRuleConfig::Optimize => TimeRule::Optimize,
        TimeRuleConfig::Proportional { c, exponent } => TimeRule::Proportional { c, exponent },
    };
    let base = |f0: f64, fixed: Option<f64>| ScalingConfig {
        t_rule,
        fixed_noise: fixed,
        window: (sc.window[0], sc.window[1]),
        ..ScalingConfig::new(f0, grid.clone())
    };
    let mut cfgs: Vec<ScalingConfig> = sc.f0.iter().map(|&f0| base(f0, None)).collect();
    if let Some(x) = sc.fixed_noise {
        cfgs.push(base(1.0, Some(x)));
    }
    let curves = scaling_sweeps(&cfgs, &model, omega, Execution::default())?;

    let mut points = Table::new(
        "scaling",
        cfg.seed,
        &["curve", "f0", "fixed_noise", "n", "t", "var_omega_t", "visibility", "sql", "hl"],
    );
    let mut slopes = Table::new(
        "scaling_slopes",
        cfg.seed,
        &["curve", "f0", "fixed_noise", "window_lo", "window_hi", "slope", "sql_crossing", "skipped"],
    );
    let mut summaries = Vec::new();
    for curve in &curves {
        let label = curve_label(curve.f0, curve.fixed_noise);
        for p in &curve.points {
            points.push(vec![
                label.as_str().into(),
                curve.f0.into(),
                curve.fixed_noise.into(),
                p.n.into(),
                p.t.into(),
                p.var_omega_t.into(),
                p.visibility.into(),
                p.sql.into(),
                p.hl.into(),
            ]);
        }
        slopes.push(vec![
            label.as_str().into(),
            curve.f0.into(),
            curve.fixed_noise.into(),
            curve.window.0.into(),
            curve.window.1.into(),
            curve.fitted_slope.into(),
            curve.sql_crossing().into(),
            curve.skipped.len().into(),
        ]);
        summaries.push(CurveSummary {
            curve: label,
            f0: curve.f0,
            fixed_noise: curve.fixed_noise,
            window: curve.window,
            slope: curve.fitted_slope,
            sql_crossing: curve.sql_crossing(),
            points: curve.points.len(),
            skipped: curve.skipped.clone(),
        });
    }
    let summary = ScalingSummary { command: "scaling", seed: cfg.seed, gamma: model.gamma, omega, curves: summaries };
    write_table(out, &points)?;
    write_table(out, &slopes)?;
    write_json(out, "scaling", &summary)?;
    Ok(())
}

fn validation_sets(gamma: f64) -> Result<[(&'static str, NoiseModel); 3], CliError> {
    Ok([
        ("transversal", NoiseModel::transversal(gamma)),
        ("parallel", NoiseModel::parallel(gamma)),
        ("mixed", NoiseModel::new(gamma, 0.5, 0.3, 0.2)?),
    ])
}

fn max_coefficient_gap(x: &CoefficientSet, y: &CoefficientSet) -> f64 {
    [x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d, x.f - y.f].iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Serialize)]
struct LimitCheck {
    name: String,
    deviation: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ChannelSummary {
    command: &'static str,
    seed: u64,
    gamma: f64,
    omega: f64,
    tolerance: f64,
    kraus_tolerance: f64,
    inject_fault: bool,
    max_distance: f64,
    max_completeness_residue: f64,
    limits: Vec<LimitCheck>,
    pass: bool,
}

pub fn channel_validate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let vc = &cfg.channel_validate;
    vc.validate()?;
    cfg.noise.model()?;
    let (gamma, omega) = (cfg.noise.gamma, cfg.noise.omega);

    let mut table = Table::new(
        "channel_validate",
        cfg.seed,
        &["alpha_set", "t", "distance", "completeness_residue", "min_kraus_prob", "pass"],
    );
    let mut max_distance = 0.0f64;
    let mut max_residue = 0.0f64;
    let mut pass = true;
    for (name, model) in validation_sets(gamma)? {
        for &t in &vc.t_grid {
            let mut k = coefficients(&model, omega, t)?;
            if vc.inject_fault {
                k = CoefficientSet::from_raw(k.a, k.b + 1e-3, k.c, k.d, k.f, k.omega, k.t);
            }
            let distance = channel_distance(&s_matrix(&k), &s_matrix_from_master_equation(&model, omega, t, vc.rk4_step));
            // an unphysical perturbed set may not admit a Kraus form at all
            let (residue, min_prob) = match kraus(&k) {
                Ok(ks) => (ks.completeness_residue(), ks.probs.iter().copied().fold(f64::INFINITY, f64::min)),
                Err(_) => (f64::INFINITY, f64::NEG_INFINITY),
            };
            let ok = distance <= vc.tolerance && residue <= vc.kraus_tolerance && min_prob >= -vc.kraus_tolerance;
            pass &= ok;
            max_distance = max_distance.max(distance);
            max_residue = max_residue.max(residue);
            table.push(vec![
                name.into(),
                t.into(),
                distance.into(),
                residue.into(),
                min_prob.into(),
                if ok { "true" } else { "false" }.into(),
            ]);
        }
    }

    let mut limits = Vec::new();
    let t0 = max_coefficient_gap(&coefficients(&NoiseModel::transversal(gamma), omega, 0.0)?, &CoefficientSet::identity(omega));
    limits.push(LimitCheck { name: "t=0 identity".into(), deviation: t0, pass: t0 <= 1e-12 });
    let t = vc.t_grid.iter().copied().fold(0.0, f64::max);
    let (s, c) = (omega * t).sin_cos();
    let rotation = CoefficientSet::from_raw(1.0, c, s, 0.0, 0.0, omega, t);
    let g0 = max_coefficient_gap(&coefficients(&NoiseModel::noiseless(), omega, t)?, &rotation);
    limits.push(LimitCheck { name: format!("gamma=0 rotation at t={t}"), deviation: g0, pass: g0 <= 1e-12 });
    for l in &limits {
        pass &= l.pass;
    }

    let summary = ChannelSummary {
        command: "channel-validate",
        seed: cfg.seed,
        gamma,
        omega,
        tolerance: vc.tolerance,
        kraus_tolerance: vc.kraus_tolerance,
        inject_fault: vc.inject_fault,
        max_distance,
        max_completeness_residue: max_residue,
        limits,
        pass,
    };
    write_table(out, &table)?;
    write_json(out, "channel_validate", &summary)?;
    if !pass {
        return Err(CliError::Tolerance(format!(
            "channel validation failed (max distance {max_distance:.3e}, max Kraus residue {max_residue:.3e})"
        )));
    }
    Ok(())
}
