//! Experiment configuration: one sectioned TOML file per run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rps_core::evolution::{EvolutionConfig, GUARD_TOLERANCE, PICARD_DEPTH};
use rps_core::oracles::{OracleConfig, OracleSpec};
use rps_core::potentials::{self, Descriptor, Potential};
use rps_core::regularity::{FitWindow, ThresholdFamily, DEFAULT_N_MIN, DEFAULT_RATIO};
use rps_core::{Complex64, Field, Grid};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Artifact directory; `--out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Descriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: f64,
    pub size: usize,
}

impl GridSection {
    pub fn build(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.half_width, self.size)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude · e^{-((x - center)/width)²} e^{i momentum x}`
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        momentum: f64,
    },
    /// `P_{≤1} e^{-x²}`
    LowpassGaussian,
    Rpsf {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

impl InitialData {
    pub fn build(&self, grid: Grid) -> Result<Field, CliError> {
        match *self {
            InitialData::Gaussian {
                center,
                width,
                amplitude,
                momentum,
            } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(CliError::Config(format!(
                        "initial width must be positive, got {width}"
                    )));
                }
                Ok(Field::from_fn(grid, |x| {
                    let d = (x - center) / width;
                    amplitude * (-d * d).exp() * Complex64::from_polar(1.0, momentum * x)
                })?)
            }
            InitialData::LowpassGaussian => {
                let hat = rps_core::oracles::lowpass_gaussian_data(grid)?;
                Ok(rps_core::spectral::inverse_transform(&hat)?)
            }
            InitialData::Rpsf { ref path } => {
                let f = rps_core::rpsf::load(path)?;
                if *f.grid() != grid {
                    return Err(CliError::Config(format!(
                        "{} was written on a different grid",
                        path.display()
                    )));
                }
                Ok(f)
            }
        }
    }

    /// Width of a centred, unboosted Gaussian, the one case with a
    /// closed-form free evolution.
    pub fn centred_gaussian_width(&self) -> Option<f64> {
        match *self {
            InitialData::Gaussian {
                center,
                width,
                amplitude,
                momentum,
            } if center == 0.0 && amplitude == 1.0 && momentum == 0.0 => Some(width),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveCheck {
    /// Evolve backward from `u(T)` and compare with `u₀`.
    Reverse,
    /// Picard iteration on the same time nodes.
    Picard,
    /// Closed-form free Gaussian; requires `η = 0`.
    FreeGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub nonlinear: bool,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub sobolev_orders: Vec<f64>,
    /// `None` disables the boundary guard.
    #[serde(default = "default_guard")]
    pub decay_tolerance: Option<f64>,
    #[serde(default)]
    pub checks: Vec<SolveCheck>,
    #[serde(default = "default_picard")]
    pub picard_iterations: usize,
}

fn default_stride() -> usize {
    1
}

fn default_guard() -> Option<f64> {
    Some(GUARD_TOLERANCE)
}

fn default_picard() -> usize {
    PICARD_DEPTH
}

impl EvolutionSection {
    pub fn build(&self, potential: Potential) -> Result<EvolutionConfig, CliError> {
        let mut cfg = EvolutionConfig::linear(potential, self.dt, self.t_final);
        cfg.lambda = self.lambda;
        cfg.p = self.p;
        cfg.nonlinear = self.nonlinear;
        cfg.snapshot_stride = self.snapshot_stride;
        cfg.sobolev_orders = self.sobolev_orders.clone();
        cfg.decay_tolerance = self.decay_tolerance;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    #[serde(flatten)]
    pub spec: OracleSpec,
    pub ladder: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_resolution() -> f64 {
    OracleConfig::default().resolution
}

impl OracleSection {
    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            resolution: self.resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Checks to run when `--check` is absent; empty means all.
    pub checks: Vec<String>,
    pub bernstein: BernsteinCheck,
    pub phase_ratio: PhaseRatioCheck,
    pub decomposition_residual: DecompositionCheck,
    pub commutator_split: CommutatorCheck,
    pub log_sum_bound: LogSumCheck,
    pub nonresonant_integral: IntegralCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BernsteinCheck {
    /// Fields drawn with the experiment seed in addition to the frozen
    /// calibration corpus.
    pub extra_fields: usize,
}

impl Default for BernsteinCheck {
    fn default() -> Self {
        Self { extra_fields: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseRatioCheck {
    pub betas: Vec<f64>,
    pub axis: usize,
    pub c1_floor: f64,
    pub c2_ceiling: f64,
}

impl Default for PhaseRatioCheck {
    fn default() -> Self {
        Self {
            betas: vec![0.5, 0.9, 0.99],
            axis: 101,
            c1_floor: 0.125,
            c2_ceiling: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecompositionCheck {
    pub half_width: f64,
    pub size: usize,
    pub epsilon: f64,
    pub mass: f64,
    pub dt: f64,
    pub t_final: f64,
    pub s: f64,
    pub n0: u64,
    pub beta: f64,
    pub tolerance: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl Default for DecompositionCheck {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            size: 512,
            epsilon: 0.25,
            mass: 1.0,
            dt: 1e-3,
            t_final: 0.1,
            s: 2.0,
            n0: 16,
            beta: 0.95,
            tolerance: 1e-3,
            ratio_min: 3.0,
            ratio_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommutatorCheck {
    pub size: usize,
    pub count: usize,
    /// `(s, β)` pairs.
    pub orders: Vec<(f64, f64)>,
    pub tolerance: f64,
}

impl Default for CommutatorCheck {
    fn default() -> Self {
        Self {
            size: 1 << 10,
            count: 4,
            orders: vec![(0.95, 0.95), (1.45, 0.95), (2.0, 0.5)],
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogSumCheck {
    pub n0: Vec<u64>,
}

impl Default for LogSumCheck {
    fn default() -> Self {
        Self {
            n0: (4..=9).map(|k| 1u64 << k).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegralCheck {
    pub gammas: Vec<f64>,
    pub xis: Vec<f64>,
    pub tolerance: f64,
}

impl Default for IntegralCheck {
    fn default() -> Self {
        Self {
            gammas: vec![-1.5, -2.0, -3.0],
            xis: vec![1.0, 4.0, 16.0],
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSection {
    /// Band-energy slope of synthetic `⟨ξ⟩^{-σ}` spectra, or of the final
    /// state of the configured solve when `sigmas` is empty.
    Regularity {
        #[serde(default)]
        sigmas: Vec<f64>,
        #[serde(default = "default_n_min")]
        n_min: u64,
        #[serde(default)]
        n_max: Option<u64>,
        #[serde(default)]
        s_list: Vec<f64>,
    },
    /// Solve with a mollified delta for each `ε` and probe the derivative
    /// jump at the final time.
    Jump { epsilons: Vec<f64>, mass: f64 },
    Threshold {
        family: ThresholdFamily,
        s_list: Vec<f64>,
        ladder: Vec<f64>,
        #[serde(default = "default_ratio")]
        ratio: f64,
    },
}

fn default_n_min() -> u64 {
    DEFAULT_N_MIN
}

fn default_ratio() -> f64 {
    DEFAULT_RATIO
}

impl ProbeSection {
    pub fn window(n_min: u64, n_max: Option<u64>) -> FitWindow {
        FitWindow { n_min, n_max }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CliError> {
        fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Self::section(&self.grid, "grid")?.build()
    }

    pub fn potential(&self, grid: Grid) -> Result<Potential, CliError> {
        Ok(potentials::build(
            grid,
            Self::section(&self.potential, "potential")?,
        )?)
    }

    pub fn initial(&self, grid: Grid) -> Result<Field, CliError> {
        Self::section(&self.initial, "initial")?.build(grid)
    }

    pub fn evolution(&self) -> Result<&EvolutionSection, CliError> {
        Self::section(&self.evolution, "evolution")
    }

    pub fn oracle(&self) -> Result<&OracleSection, CliError> {
        Self::section(&self.oracle, "oracle")
    }

    pub fn probe(&self) -> Result<&ProbeSection, CliError> {
        Self::section(&self.probe, "probe")
    }

    pub fn out_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = r#"
seed = 7

[grid]
half_width = 20.0
size = 2048

[potential]
kind = "mollified_delta"
epsilon = 0.1
mass = 1.0

[initial]
kind = "gaussian"

[evolution]
dt = 1e-3
t_final = 0.1
checks = ["reverse", "picard"]
"#;

    #[test]
    fn round_trip() {
        let a = ExperimentConfig::parse(SOLVE).unwrap();
        let text = a.to_toml().unwrap();
        let b = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_toml().unwrap());
        let ev = a.evolution().unwrap();
        assert_eq!(ev.decay_tolerance, Some(GUARD_TOLERANCE));
        assert_eq!(ev.checks, vec![SolveCheck::Reverse, SolveCheck::Picard]);
    }

    #[test]
    fn round_trip_oracle_and_probe() {
        let text = r#"
[oracle]
oracle = "b"
r = 2.0
s = 2.25
ladder = [32.0, 64.0, 128.0, 256.0]

[verify.decomposition_residual]
tolerance = 1e-16

[probe]
kind = "threshold"
s_list = [1.4, 1.6]
ladder = [0.2, 0.1]

[probe.family]
family = "delta_eps"
half_width = 16.0
size = 512
dt = 1e-3
t_final = 0.1
mass = 1.0
"#;
        let a = ExperimentConfig::parse(text).unwrap();
        assert_eq!(a.oracle().unwrap().spec, OracleSpec::B { r: 2.0, s: 2.25 });
        assert_eq!(
            a.verify.as_ref().unwrap().decomposition_residual.tolerance,
            1e-16
        );
        assert_eq!(
            a.verify.as_ref().unwrap().log_sum_bound,
            LogSumCheck::default()
        );
        let b = ExperimentConfig::parse(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        let a = ExperimentConfig::parse(SOLVE).unwrap();
        a.save(&path).unwrap();
        assert_eq!(ExperimentConfig::load(&path).unwrap(), a);
    }

    #[test]
    fn malformed() {
        assert!(ExperimentConfig::parse("[grid]\nhalf_width = \"wide\"").is_err());
        assert!(ExperimentConfig::parse("[grid]\nhalf_width = 1.0\nsize = 8\nbogus = 1").is_err());
        let cfg = ExperimentConfig::parse("").unwrap();
        assert!(cfg.grid().is_err());
    }
}
