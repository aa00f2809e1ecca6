//! The property and identity suite behind `rps verify`.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use rps_core::evolution::{evolve, EvolutionConfig};
use rps_core::littlewood_paley::{
    bernstein_corpus, bernstein_corpus_max, bernstein_grid, BERNSTEIN_CONSTANT,
    BERNSTEIN_CORPUS_SEED, BERNSTEIN_CORPUS_SIZE,
};
use rps_core::normal_form::{
    commutator_split_residual, decomposition_residual, nonresonant_factor_check, phase_ratio_sweep,
    NormalFormConfig,
};
use rps_core::oracles::log_sum_bound;
use rps_core::potentials::{mollified_delta, power_law, sign_jump};
use rps_core::{Field, Grid};

use crate::config::{
    BernsteinCheck, CommutatorCheck, DecompositionCheck, ExperimentConfig, IntegralCheck,
    LogSumCheck, PhaseRatioCheck, VerifySection,
};
use crate::{to_json, write_text, CliError};

pub const CHECKS: [&str; 6] = [
    "bernstein",
    "phase_ratio",
    "decomposition_residual",
    "commutator_split",
    "log_sum_bound",
    "nonresonant_integral",
];

/// Seed of the frozen commutator corpus.
pub const COMMUTATOR_CORPUS_SEED: u64 = 0xc0_3317;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

fn bernstein(cfg: &BernsteinCheck, seed: u64) -> Result<CheckOutcome, CliError> {
    let grid = bernstein_grid();
    let frozen = bernstein_corpus(grid, BERNSTEIN_CORPUS_SEED, BERNSTEIN_CORPUS_SIZE);
    let extra = bernstein_corpus(grid, seed, cfg.extra_fields);
    let frozen_max = bernstein_corpus_max(&frozen)?;
    let extra_max = bernstein_corpus_max(&extra)?;
    let worst = frozen_max.max(extra_max);
    Ok(CheckOutcome {
        name: "bernstein".into(),
        pass: worst <= BERNSTEIN_CONSTANT,
        details: json!({
            "constant": BERNSTEIN_CONSTANT,
            "frozen_corpus_max": frozen_max,
            "extra_corpus_max": extra_max,
            "fields": frozen.len() + extra.len(),
        }),
    })
}

fn phase_ratio(cfg: &PhaseRatioCheck) -> Result<CheckOutcome, CliError> {
    let sweep = phase_ratio_sweep(&cfg.betas, cfg.axis)?;
    let pass = sweep.min_law >= cfg.c1_floor
        && sweep.max_law <= cfg.c2_ceiling
        && sweep.c1 >= cfg.c1_floor
        && sweep.c2 <= cfg.c2_ceiling
        && sweep.pass;
    Ok(CheckOutcome {
        name: "phase_ratio".into(),
        pass,
        details: serde_json::to_value(&sweep)?,
    })
}

fn residual_at(cfg: &DecompositionCheck, dt: f64) -> Result<f64, CliError> {
    let grid = Grid::new(cfg.half_width, cfg.size)?;
    let eta = mollified_delta(grid, cfg.epsilon, cfg.mass)?;
    let evo = EvolutionConfig::linear(eta.clone(), dt, cfg.t_final);
    let u0 = Field::from_real_fn(grid, |x| (-x * x).exp())?;
    let traj = evolve(&u0, &evo)?;
    let nf = NormalFormConfig {
        s: cfg.s,
        n0: cfg.n0,
        beta: cfg.beta,
        ..NormalFormConfig::default()
    };
    Ok(decomposition_residual(&traj, &eta, &nf)?.residual)
}

fn decomposition(cfg: &DecompositionCheck) -> Result<CheckOutcome, CliError> {
    let coarse = residual_at(cfg, cfg.dt)?;
    let fine = residual_at(cfg, 0.5 * cfg.dt)?;
    let ratio = coarse / fine;
    let pass = coarse < cfg.tolerance && ratio >= cfg.ratio_min && ratio <= cfg.ratio_max;
    Ok(CheckOutcome {
        name: "decomposition_residual".into(),
        pass,
        details: json!({
            "residual": coarse,
            "residual_half_dt": fine,
            "ratio": ratio,
            "tolerance": cfg.tolerance,
            "ratio_window": [cfg.ratio_min, cfg.ratio_max],
        }),
    })
}

fn commutator(cfg: &CommutatorCheck) -> Result<CheckOutcome, CliError> {
    let grid = Grid::new(8.0 * std::f64::consts::PI, cfg.size)?;
    let corpus = bernstein_corpus(grid, COMMUTATOR_CORPUS_SEED, cfg.count);
    let potentials = [
        mollified_delta(grid, 0.2, 1.0)?,
        sign_jump(grid),
        power_law(grid, 0.5, 0.05)?,
    ];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for eta in &potentials {
        for w in &corpus {
            for &(s, beta) in &cfg.orders {
                let rep = commutator_split_residual(w, eta, s, beta)?;
                worst = worst.max(rep.residual);
                cases += 1;
            }
        }
    }
    Ok(CheckOutcome {
        name: "commutator_split".into(),
        pass: worst <= cfg.tolerance,
        details: json!({ "max_residual": worst, "cases": cases, "tolerance": cfg.tolerance }),
    })
}

fn log_sum(cfg: &LogSumCheck) -> Result<CheckOutcome, CliError> {
    let reports = cfg
        .n0
        .iter()
        .map(|&n| log_sum_bound(n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CheckOutcome {
        name: "log_sum_bound".into(),
        pass: !reports.is_empty() && reports.iter().all(|r| r.pass),
        details: serde_json::to_value(&reports)?,
    })
}

fn integral(cfg: &IntegralCheck, betas: &[f64]) -> Result<CheckOutcome, CliError> {
    let rep = nonresonant_factor_check(betas, &cfg.gammas, &cfg.xis, cfg.tolerance)?;
    Ok(CheckOutcome {
        name: "nonresonant_integral".into(),
        pass: rep.pass,
        details: serde_json::to_value(&rep)?,
    })
}

fn run_check(name: &str, section: &VerifySection, seed: u64) -> Result<CheckOutcome, CliError> {
    match name {
        "bernstein" => bernstein(&section.bernstein, seed),
        "phase_ratio" => phase_ratio(&section.phase_ratio),
        "decomposition_residual" => decomposition(&section.decomposition_residual),
        "commutator_split" => commutator(&section.commutator_split),
        "log_sum_bound" => log_sum(&section.log_sum_bound),
        "nonresonant_integral" => {
            integral(&section.nonresonant_integral, &section.phase_ratio.betas)
        }
        other => unreachable!("check names are validated before dispatch: {other}"),
    }
}

/// Runs every check, or only `only`; writes `verify_report.json`.
pub fn verify(
    config: &ExperimentConfig,
    out: &Path,
    only: Option<&str>,
) -> Result<VerifyReport, CliError> {
    let section = config.verify.clone().unwrap_or_default();
    let names: Vec<&str> = match only {
        Some(name) => vec![name],
        None if !section.checks.is_empty() => section.checks.iter().map(String::as_str).collect(),
        None => CHECKS.to_vec(),
    };
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(n)) {
        return Err(CliError::Config(format!(
            "unknown check `{bad}`; expected one of {}",
            CHECKS.join(", ")
        )));
    }
    let checks = names
        .iter()
        .map(|n| run_check(n, &section, config.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let report = VerifyReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    write_text(out, "verify_report.json", &to_json(&report)?)?;
    Ok(report)
}
