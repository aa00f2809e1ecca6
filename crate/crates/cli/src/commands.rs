//! `solve`, `oracle` and `probe`: each validates its sections, runs, and
//! writes CSV/JSON artifacts into the output directory.

use std::path::Path;

use serde::Serialize;

use rps_core::evolution::{
    evolve, evolve_backward, free_gaussian, picard_solve, relative_l2, EvolutionConfig, Trajectory,
};
use rps_core::oracles::{growth_sweep, GrowthTable};
use rps_core::potentials::{mollified_delta, Descriptor};
use rps_core::regularity::{
    calibration_grid, estimate_regularity, jump_probe, power_law_spectrum, threshold_experiment,
    JumpReport, RegularityEstimate, ThresholdTable,
};
use rps_core::spectral::sobolev_norm;
use rps_core::{Field, Grid};

use crate::config::{ExperimentConfig, ProbeSection, SolveCheck};
use crate::{to_json, write_text, CliError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardSummary {
    /// `‖u_picard(T) - u_strang(T)‖ / ‖u_strang(T)‖`
    pub relative_distance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub grid: Grid,
    pub potential: Descriptor,
    pub steps: usize,
    pub t_final: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub mass_drift: f64,
    pub conserves_mass: bool,
    /// `(s, ‖u(T)‖_{H^s})`
    pub final_norms: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reversal_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_gaussian_error: Option<f64>,
}

struct Prepared {
    u0: Field,
    cfg: EvolutionConfig,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared, CliError> {
    let grid = config.grid()?;
    let potential = config.potential(grid)?;
    let u0 = config.initial(grid)?;
    let cfg = config.evolution()?.build(potential)?;
    Ok(Prepared { u0, cfg })
}

/// Runs the configured evolution and the requested cross-checks.
pub fn solve(
    config: &ExperimentConfig,
    out: &Path,
) -> Result<(SolveSummary, Trajectory), CliError> {
    let Prepared { u0, cfg } = prepare(config)?;
    let section = config.evolution()?;
    let free_width = if section.checks.contains(&SolveCheck::FreeGaussian) {
        if *cfg.potential.descriptor() != Descriptor::Zero {
            return Err(CliError::Config(
                "the free_gaussian check needs kind = \"zero\"".into(),
            ));
        }
        let width = config
            .initial
            .as_ref()
            .and_then(|i| i.centred_gaussian_width())
            .ok_or_else(|| {
                CliError::Config(
                    "the free_gaussian check needs a centred unit-amplitude Gaussian".into(),
                )
            })?;
        Some(width)
    } else {
        None
    };

    let traj = evolve(&u0, &cfg)?;
    let last = traj.last();
    let grid = *u0.grid();

    let reversal_error = if section.checks.contains(&SolveCheck::Reverse) {
        let back = evolve_backward(&last.field, &cfg)?;
        Some(relative_l2(&back.last().field, &u0)?)
    } else {
        None
    };
    let picard = if section.checks.contains(&SolveCheck::Picard) {
        let outcome = picard_solve(&u0, &cfg, section.picard_iterations)?;
        Some(PicardSummary {
            relative_distance: relative_l2(&outcome.trajectory.last().field, &last.field)?,
            iterations: outcome.distances.len(),
            converged: outcome.converged,
            distances: outcome.distances,
        })
    } else {
        None
    };
    let free_gaussian_error = match free_width {
        Some(w) => Some(relative_l2(&last.field, &free_gaussian(grid, w, last.t)?)?),
        None => None,
    };

    let mut orders = section.sobolev_orders.clone();
    if orders.is_empty() {
        orders.push(0.0);
    }
    let summary = SolveSummary {
        grid,
        potential: cfg.potential.descriptor().clone(),
        steps: cfg.steps()?,
        t_final: last.t,
        mass_initial: traj.diagnostics[0].mass,
        mass_final: traj.diagnostics.last().expect("non-empty").mass,
        mass_drift: traj.mass_drift(),
        conserves_mass: cfg.conserves_mass(),
        final_norms: orders
            .iter()
            .map(|&s| (s, sobolev_norm(&last.field, s).value))
            .collect(),
        reversal_error,
        picard,
        free_gaussian_error,
    };
    traj.export(out)?;
    write_text(out, "summary.json", &to_json(&summary)?)?;
    Ok((summary, traj))
}

/// Runs the configured growth sweep; writes `growth.csv` and `fit.json`.
pub fn oracle(config: &ExperimentConfig, out: &Path) -> Result<GrowthTable, CliError> {
    let section = config.oracle()?;
    let table = growth_sweep(section.spec, &section.ladder, &section.oracle_config())?;
    write_text(out, "growth.csv", &table.to_csv())?;
    write_text(out, "fit.json", &to_json(&table.fit)?)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub sigma: f64,
    pub expected: f64,
    pub estimate: RegularityEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpRow {
    pub epsilon: f64,
    pub report: JumpReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Calibration { rows: Vec<CalibrationRow> },
    Regularity { estimate: RegularityEstimate },
    Jump { rows: Vec<JumpRow> },
    Threshold { table: ThresholdTable },
}

fn final_state(config: &ExperimentConfig) -> Result<Field, CliError> {
    let Prepared { u0, mut cfg } = prepare(config)?;
    cfg.snapshot_stride = cfg.steps()?.max(1);
    Ok(evolve(&u0, &cfg)?.last().field.clone())
}

pub fn probe(config: &ExperimentConfig, out: &Path) -> Result<ProbeOutcome, CliError> {
    let outcome = match config.probe()? {
        ProbeSection::Regularity {
            sigmas,
            n_min,
            n_max,
            s_list,
        } => {
            let window = ProbeSection::window(*n_min, *n_max);
            if sigmas.is_empty() {
                let u = final_state(config)?;
                let estimate = estimate_regularity(&u, window, s_list)?;
                let s = estimate
                    .s_est
                    .map_or("smooth".to_string(), |v| format!("{v:.16e}"));
                write_text(out, "regularity.csv", &format!("s_est\n{s}\n"))?;
                ProbeOutcome::Regularity { estimate }
            } else {
                let grid = calibration_grid();
                let mut rows = Vec::new();
                let mut csv = String::from("sigma,expected,s_est\n");
                for &sigma in sigmas {
                    let f = power_law_spectrum(grid, sigma)?;
                    let estimate = estimate_regularity(&f, window, s_list)?;
                    let s = estimate
                        .s_est
                        .map_or("smooth".to_string(), |v| format!("{v:.16e}"));
                    csv.push_str(&format!("{sigma:.16e},{:.16e},{s}\n", sigma - 0.5));
                    rows.push(CalibrationRow {
                        sigma,
                        expected: sigma - 0.5,
                        estimate,
                    });
                }
                write_text(out, "regularity.csv", &csv)?;
                ProbeOutcome::Calibration { rows }
            }
        }
        ProbeSection::Jump { epsilons, mass } => {
            let grid = config.grid()?;
            let u0 = config.initial(grid)?;
            let section = config.evolution()?;
            let mut rows = Vec::new();
            let mut csv =
                String::from("epsilon,jump_re,jump_im,predicted_re,predicted_im,relative_error\n");
            for &epsilon in epsilons {
                let mut cfg = section.build(mollified_delta(grid, epsilon, *mass)?)?;
                cfg.snapshot_stride = cfg.steps()?.max(1);
                let u = evolve(&u0, &cfg)?.last().field.clone();
                let report = jump_probe(&u, *mass, epsilon)?;
                csv.push_str(&format!(
                    "{epsilon:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    report.jump[0],
                    report.jump[1],
                    report.predicted[0],
                    report.predicted[1],
                    report.relative_error
                ));
                rows.push(JumpRow { epsilon, report });
            }
            write_text(out, "jump.csv", &csv)?;
            ProbeOutcome::Jump { rows }
        }
        ProbeSection::Threshold {
            family,
            s_list,
            ladder,
            ratio,
        } => {
            let table = threshold_experiment(*family, s_list, ladder, *ratio)?;
            write_text(out, "threshold.csv", &table.to_csv())?;
            write_text(out, "threshold.json", &(table.summary_json()? + "\n"))?;
            ProbeOutcome::Threshold { table }
        }
    };
    write_text(out, "probe.json", &to_json(&outcome)?)?;
    Ok(outcome)
}
