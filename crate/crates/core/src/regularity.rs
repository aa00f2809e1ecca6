//! Regularity diagnostics: the dyadic band-energy slope, the derivative jump
//! across a point potential, and ladder experiments that separate bounded
//! from growing Sobolev norms.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{evolve, EvolutionConfig, GUARD_STRIP};
use crate::field::Field;
use crate::fit::fit_line;
use crate::grid::Grid;
use crate::littlewood_paley::band_energies;
use crate::oracles::{b_oracle, c_oracle, hs_squared, OracleConfig};
use crate::potentials::mollified_delta;
use crate::spectral::{self, japanese_bracket, sobolev_norm};
use crate::Complex64;

/// Bands with `‖P_N f‖ ≤ ENERGY_FLOOR ‖f‖` are treated as empty.
pub const ENERGY_FLOOR: f64 = 1e-13;
pub const MIN_BANDS: usize = 5;
/// Top bands dropped from every fit.
pub const GUARD_BANDS: usize = 2;
pub const DEFAULT_N_MIN: u64 = 8;
pub const DEFAULT_RATIO: f64 = 3.0;
/// Degree of the smooth part in the [`jump_probe`] fit.
pub const JUMP_FIT_DEGREE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub n_min: u64,
    /// `None` means up to the guard bands.
    pub n_max: Option<u64>,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            n_min: DEFAULT_N_MIN,
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    Estimated,
    SmoothBeyondResolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityEstimate {
    pub verdict: RegularityVerdict,
    /// `-slope` of `log₂‖P_N f‖` against `log₂ N`.
    pub s_est: Option<f64>,
    pub n_min: u64,
    pub n_max: u64,
    pub slope: f64,
    pub residual: f64,
    pub bands_used: usize,
    /// `(s, ‖f‖_{H^s})`
    pub norms: Vec<(f64, f64)>,
}

/// Band-energy slope of `f` over `window`. If `‖P_N f‖ ~ N^{-σ'}` then
/// `f ∈ H^s` for `s < σ'`, so the estimate is `s_est = σ'`; a spectrum
/// `⟨ξ⟩^{-σ}` gives `σ' = σ - 1/2`.
pub fn estimate_regularity(
    f: &Field,
    window: FitWindow,
    s_list: &[f64],
) -> Result<RegularityEstimate> {
    if window.n_min == 0 || !window.n_min.is_power_of_two() {
        return Err(invalid(
            "n_min",
            format!("must be dyadic, got {}", window.n_min),
        ));
    }
    if let Some(n_max) = window.n_max {
        if !n_max.is_power_of_two() || n_max <= window.n_min {
            return Err(invalid(
                "n_max",
                format!(
                    "need a dyadic n_max > n_min = {}, got {n_max}",
                    window.n_min
                ),
            ));
        }
    }
    let spectrum = band_energies(f);
    let bands = spectrum.energies();
    let keep = bands.len().saturating_sub(GUARD_BANDS);
    let floor = ENERGY_FLOOR * spectrum.total;
    let used: Vec<(u64, f64)> = bands[..keep]
        .iter()
        .copied()
        .filter(|&(n, e)| n >= window.n_min && window.n_max.map_or(true, |m| n <= m) && e > floor)
        .collect();
    let norms = s_list
        .iter()
        .map(|&s| (s, sobolev_norm(f, s).value))
        .collect();
    let n_lo = used.first().map_or(window.n_min, |b| b.0);
    let n_hi = used.last().map_or(window.n_min, |b| b.0);
    if used.len() < MIN_BANDS {
        return Ok(RegularityEstimate {
            verdict: RegularityVerdict::SmoothBeyondResolution,
            s_est: None,
            n_min: n_lo,
            n_max: n_hi,
            slope: f64::NAN,
            residual: 0.0,
            bands_used: used.len(),
            norms,
        });
    }
    let xs: Vec<f64> = used.iter().map(|b| (b.0 as f64).log2()).collect();
    let ys: Vec<f64> = used.iter().map(|b| b.1.log2()).collect();
    let line = fit_line(&xs, &ys)?;
    Ok(RegularityEstimate {
        verdict: RegularityVerdict::Estimated,
        s_est: Some(-line.slope),
        n_min: n_lo,
        n_max: n_hi,
        slope: line.slope,
        residual: line.residual,
        bands_used: used.len(),
        norms,
    })
}

/// Lattice used for the synthetic calibration spectra.
pub fn calibration_grid() -> Grid {
    Grid::new(64.0, 1 << 15).expect("valid constant grid")
}

/// Field with the exact spectrum `⟨ξ⟩^{-σ}`.
pub fn power_law_spectrum(grid: Grid, sigma: f64) -> Result<Field> {
    let f_hat = Field::from_spectrum(grid, |xi| {
        Complex64::new(japanese_bracket(xi).powf(-sigma), 0.0)
    })?;
    Ok(spectral::inverse_transform(&f_hat)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    /// `uₓ(0-)` as `[re, im]`.
    pub left_slope: [f64; 2],
    pub right_slope: [f64; 2],
    pub jump: [f64; 2],
    /// `-mass · u(t, 0)`
    pub predicted: [f64; 2],
    /// `|jump - predicted| / |predicted|`, or `|jump| / max|uₓ|` when the
    /// prediction vanishes.
    pub relative_error: f64,
    pub window: (f64, f64),
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// One-sided slopes of `u` at the origin from a joint least-squares fit
/// `u ≈ p(x) + d x₊ + f x₊³`, `deg p = 5`, over `2 max(ε, dx) ≤ |x| ≤ 10ε`;
/// the jump is `d`.
pub fn jump_probe(u: &Field, mass: f64, epsilon: f64) -> Result<JumpReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    if !mass.is_finite() {
        return Err(invalid("mass", "must be finite"));
    }
    let u = spectral::to_physical(u);
    let grid = *u.grid();
    let inner = 2.0 * epsilon.max(grid.dx());
    let outer = 10.0 * epsilon;
    if outer > (1.0 - GUARD_STRIP) * grid.half_width() {
        return Err(invalid(
            "epsilon",
            format!("probe window 10ε = {outer} reaches the decay strip"),
        ));
    }
    let idx: Vec<usize> = (0..grid.size())
        .filter(|&j| {
            let r = grid.x(j).abs();
            r >= inner && r <= outer
        })
        .collect();
    let per_side = idx.iter().filter(|&&j| grid.x(j) > 0.0).count();
    if per_side.min(idx.len() - per_side) < JUMP_FIT_DEGREE + 3 {
        return Err(Error::Insufficient(format!(
            "only {} samples in the probe window [{inner}, {outer}]",
            idx.len()
        )));
    }
    // u ≈ p(x) + d x₊ + f x₊³ in τ = x/outer; uₓ(0-) = p'(0), uₓ(0+) = p'(0) + d
    let cols = JUMP_FIT_DEGREE + 3;
    let design = DMatrix::from_fn(idx.len(), cols, |row, col| {
        let tau = grid.x(idx[row]) / outer;
        let plus = tau.max(0.0);
        match col {
            c if c <= JUMP_FIT_DEGREE => tau.powi(c as i32),
            c if c == JUMP_FIT_DEGREE + 1 => plus,
            _ => plus.powi(3),
        }
    });
    let svd = design.svd(true, true);
    let solve = |part: fn(Complex64) -> f64| -> Result<(f64, f64)> {
        let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&j| part(u.values()[j])));
        let coef = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Insufficient(format!("jump fit: {e}")))?;
        Ok((coef[1] / outer, coef[JUMP_FIT_DEGREE + 1] / outer))
    };
    let (re_left, re_jump) = solve(|z| z.re)?;
    let (im_left, im_jump) = solve(|z| z.im)?;
    let left = Complex64::new(re_left, im_left);
    let jump = Complex64::new(re_jump, im_jump);
    let right = left + jump;
    let predicted = -mass * u.values()[grid.origin_index()];
    let relative_error = if predicted.norm() > 0.0 {
        (jump - predicted).norm() / predicted.norm()
    } else {
        let v = u.values();
        let scale = (0..grid.size() - 1)
            .map(|j| (v[j + 1] - v[j]).norm() / grid.dx())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            jump.norm() / scale
        } else {
            jump.norm()
        }
    };
    Ok(JumpReport {
        left_slope: pair(left),
        right_slope: pair(right),
        jump: pair(jump),
        predicted: pair(predicted),
        relative_error,
        window: (inner, outer),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ThresholdFamily {
    /// Solver runs with `η = mass · ε⁻¹e^{-(x/ε)²}/√π` and `u₀ = e^{-x²}`;
    /// the ladder is `ε`.
    DeltaEps {
        half_width: f64,
        size: usize,
        dt: f64,
        t_final: f64,
        mass: f64,
    },
    /// Annulus oracle; the ladder is `M`.
    AnnulusM { r: f64, resolution: f64 },
    /// Shifted-annulus oracle with data normalised at `s_data`; the ladder
    /// is `M`.
    ShiftedM {
        n: f64,
        r: f64,
        s_data: f64,
        resolution: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormVerdict {
    Bounded,
    Growing,
    Inconclusive,
}

impl NormVerdict {
    pub fn name(self) -> &'static str {
        match self {
            NormVerdict::Bounded => "bounded",
            NormVerdict::Growing => "growing",
            NormVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub ladder_value: f64,
    pub s: f64,
    pub norm: f64,
    pub verdict: NormVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SVerdict {
    pub s: f64,
    /// `max/min` over the ladder.
    pub ratio: f64,
    /// `last/first` along the ladder.
    pub growth: f64,
    pub monotone: bool,
    pub verdict: NormVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub family: ThresholdFamily,
    pub ratio_threshold: f64,
    pub rows: Vec<ThresholdRow>,
    pub verdicts: Vec<SVerdict>,
    /// Jump probe at each ladder point of the delta family.
    pub jumps: Vec<JumpReport>,
}

impl ThresholdTable {
    /// CSV with header `ladder_value,s,norm,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ladder_value,s,norm,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{}\n",
                r.ladder_value,
                r.s,
                r.norm,
                r.verdict.name()
            ));
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            family: &'a ThresholdFamily,
            ratio_threshold: f64,
            verdicts: &'a [SVerdict],
            jumps: &'a [JumpReport],
        }
        Ok(serde_json::to_string_pretty(&Summary {
            family: &self.family,
            ratio_threshold: self.ratio_threshold,
            verdicts: &self.verdicts,
            jumps: &self.jumps,
        })?)
    }

    pub fn verdict(&self, s: f64) -> Option<NormVerdict> {
        self.verdicts.iter().find(|v| v.s == s).map(|v| v.verdict)
    }
}

/// Classifies one norm sequence taken in ladder order.
pub fn classify(norms: &[f64], ratio_threshold: f64) -> SVerdict {
    let max = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    let growth = norms[norms.len() - 1] / norms[0];
    let monotone = norms.windows(2).all(|w| w[1] > w[0]);
    let verdict = if ratio < ratio_threshold {
        NormVerdict::Bounded
    } else if monotone && growth > ratio_threshold {
        NormVerdict::Growing
    } else {
        NormVerdict::Inconclusive
    };
    SVerdict {
        s: f64::NAN,
        ratio,
        growth,
        monotone,
        verdict,
    }
}

struct LadderPoint {
    norms: Vec<f64>,
    jump: Option<JumpReport>,
}

fn ladder_point(family: &ThresholdFamily, value: f64, s_list: &[f64]) -> Result<LadderPoint> {
    match *family {
        ThresholdFamily::DeltaEps {
            half_width,
            size,
            dt,
            t_final,
            mass,
        } => {
            let grid = Grid::new(half_width, size)?;
            let eta = mollified_delta(grid, value, mass)?;
            let mut cfg = EvolutionConfig::linear(eta, dt, t_final);
            cfg.snapshot_stride = cfg.steps()?.max(1);
            let u0 = Field::from_real_fn(grid, |x| (-x * x).exp())?;
            let traj = evolve(&u0, &cfg)?;
            let u = &traj.last().field;
            Ok(LadderPoint {
                norms: s_list.iter().map(|&s| sobolev_norm(u, s).value).collect(),
                jump: Some(jump_probe(u, mass, value)?),
            })
        }
        ThresholdFamily::AnnulusM { r, resolution } => {
            let rep = b_oracle(value, r, s_list[0], &OracleConfig { resolution })?;
            let spec = rep.spectrum.as_ref().expect("oracle keeps its spectrum");
            Ok(LadderPoint {
                norms: s_list.iter().map(|&s| hs_squared(spec, s).sqrt()).collect(),
                jump: None,
            })
        }
        ThresholdFamily::ShiftedM {
            n,
            r,
            s_data,
            resolution,
        } => {
            let rep = c_oracle(value, n, r, s_data, &OracleConfig { resolution })?;
            let spec = rep.spectrum.as_ref().expect("oracle keeps its spectrum");
            Ok(LadderPoint {
                norms: s_list.iter().map(|&s| hs_squared(spec, s).sqrt()).collect(),
                jump: None,
            })
        }
    }
}

/// Records `‖u‖_{H^s}` at every ladder point for every `s` and classifies
/// each `s` as bounded (`max/min < ratio`) or growing (monotone increase by
/// more than `ratio`).
pub fn threshold_experiment(
    family: ThresholdFamily,
    s_list: &[f64],
    ladder: &[f64],
    ratio_threshold: f64,
) -> Result<ThresholdTable> {
    if s_list.is_empty() {
        return Err(invalid("s_list", "must not be empty"));
    }
    if ladder.len() < 2 {
        return Err(Error::Insufficient(format!(
            "a threshold ladder needs >= 2 points, got {}",
            ladder.len()
        )));
    }
    if !(ratio_threshold > 1.0) {
        return Err(invalid(
            "ratio",
            format!("must exceed 1, got {ratio_threshold}"),
        ));
    }
    let points = ladder
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            ladder_point(&family, value, s_list).map_err(|e| Error::Ladder {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdicts: Vec<SVerdict> = s_list
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let norms: Vec<f64> = points.iter().map(|p| p.norms[k]).collect();
            SVerdict {
                s,
                ..classify(&norms, ratio_threshold)
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(ladder.len() * s_list.len());
    for (p, &value) in points.iter().zip(ladder) {
        for (k, v) in verdicts.iter().enumerate() {
            rows.push(ThresholdRow {
                ladder_value: value,
                s: v.s,
                norm: p.norms[k],
                verdict: v.verdict,
            });
        }
    }
    Ok(ThresholdTable {
        family,
        ratio_threshold,
        rows,
        verdicts,
        jumps: points.iter().filter_map(|p| p.jump).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::mollified_delta;

    #[test]
    fn gaussian_is_smooth_beyond_resolution() {
        let f = Field::from_real_fn(calibration_grid(), |x| (-x * x).exp()).unwrap();
        let est = estimate_regularity(&f, FitWindow::default(), &[1.0]).unwrap();
        assert_eq!(est.verdict, RegularityVerdict::SmoothBeyondResolution);
        assert!(est.s_est.is_none());
    }

    #[test]
    fn power_law_calibration() {
        let grid = calibration_grid();
        for sigma in [1.5, 2.0, 2.5, 3.0] {
            let f = power_law_spectrum(grid, sigma).unwrap();
            let est = estimate_regularity(&f, FitWindow::default(), &[]).unwrap();
            let s = est.s_est.unwrap();
            assert!((s - (sigma - 0.5)).abs() < 0.1, "σ = {sigma}: s_est = {s}");
            assert!(est.bands_used >= MIN_BANDS);
        }
    }

    #[test]
    fn window_validation() {
        let f = power_law_spectrum(calibration_grid(), 2.0).unwrap();
        assert!(estimate_regularity(
            &f,
            FitWindow {
                n_min: 6,
                n_max: None
            },
            &[]
        )
        .is_err());
        let w = FitWindow {
            n_min: 8,
            n_max: Some(8),
        };
        assert!(estimate_regularity(&f, w, &[]).is_err());
        let narrow = FitWindow {
            n_min: 8,
            n_max: Some(32),
        };
        let est = estimate_regularity(&f, narrow, &[]).unwrap();
        assert_eq!(est.verdict, RegularityVerdict::SmoothBeyondResolution);
    }

    #[test]
    fn free_run_has_no_jump() {
        let grid = Grid::new(16.0, 1 << 14).unwrap();
        let u0 = Field::from_real_fn(grid, |x| (-x * x).exp()).unwrap();
        let u = crate::spectral::free_propagate(&u0, 0.5).unwrap();
        let rep = jump_probe(&u, 0.0, 0.01).unwrap();
        assert_eq!(rep.predicted, [0.0, 0.0]);
        assert!(rep.relative_error < 1e-6, "{}", rep.relative_error);
        // asymmetric smooth data: only extrapolation error remains
        let v = Field::from_fn(grid, |x| {
            Complex64::new((-x * x).exp(), 0.3 * (-(x - 0.5).powi(2)).exp())
        })
        .unwrap();
        let rep = jump_probe(&v, 0.0, 0.01).unwrap();
        assert!(rep.relative_error < 1e-4, "{}", rep.relative_error);
    }

    #[test]
    fn kink_is_detected_and_linear() {
        // u = e^{-|x|/2} has uₓ(0+) - uₓ(0-) = -1 = -2 u(0) · ½
        let grid = Grid::new(40.0, 1 << 14).unwrap();
        let u = Field::from_real_fn(grid, |x| (-0.5 * x.abs()).exp()).unwrap();
        let rep = jump_probe(&u, 1.0, 0.05).unwrap();
        assert!((rep.jump[0] + 1.0).abs() < 1e-3, "{:?}", rep.jump);
        let doubled = jump_probe(&u.scale(Complex64::new(2.0, 0.0)), 1.0, 0.05).unwrap();
        assert_eq!(doubled.jump[0], 2.0 * rep.jump[0]);
        assert_eq!(doubled.predicted[0], 2.0 * rep.predicted[0]);
        assert!(jump_probe(&u, 1.0, 5.0).is_err());
        assert!(jump_probe(&u, 1.0, 0.0).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(
            classify(&[1.0, 1.2, 0.9], 3.0).verdict,
            NormVerdict::Bounded
        );
        assert_eq!(
            classify(&[1.0, 2.0, 4.0], 3.0).verdict,
            NormVerdict::Growing
        );
        assert_eq!(
            classify(&[1.0, 4.0, 3.5], 3.0).verdict,
            NormVerdict::Inconclusive
        );
    }

    #[test]
    fn annulus_threshold() {
        let family = ThresholdFamily::AnnulusM {
            r: 2.0,
            resolution: 16.0,
        };
        let ladder: Vec<f64> = (5..=12).map(|k| 2f64.powi(k)).collect();
        let table = threshold_experiment(family, &[2.0, 2.25], &ladder, DEFAULT_RATIO).unwrap();
        assert_eq!(table.verdict(2.0), Some(NormVerdict::Bounded));
        assert_eq!(table.verdict(2.25), Some(NormVerdict::Growing));
        assert_eq!(table.rows.len(), 16);
        assert!(table.to_csv().starts_with("ladder_value,s,norm,verdict\n"));
    }

    #[test]
    fn ladder_errors_carry_index() {
        let family = ThresholdFamily::AnnulusM {
            r: 2.0,
            resolution: 16.0,
        };
        let err = threshold_experiment(family, &[2.0], &[64.0, 8.0], DEFAULT_RATIO).unwrap_err();
        assert!(matches!(err, Error::Ladder { index: 1, .. }), "{err}");
    }

    #[test]
    fn delta_verdict_stable_under_refinement() {
        let ladder = [0.4, 0.2, 0.1];
        let verdicts: Vec<NormVerdict> = [1 << 11, 1 << 12]
            .iter()
            .map(|&size| {
                let family = ThresholdFamily::DeltaEps {
                    half_width: 24.0,
                    size,
                    dt: 1e-3,
                    t_final: 0.1,
                    mass: 1.0,
                };
                threshold_experiment(family, &[1.0], &ladder, DEFAULT_RATIO)
                    .unwrap()
                    .verdict(1.0)
                    .unwrap()
            })
            .collect();
        assert_eq!(verdicts[0], verdicts[1]);
        assert_eq!(verdicts[0], NormVerdict::Bounded);
    }

    #[test]
    fn delta_jump_on_short_run() {
        let grid = Grid::new(64.0, 1 << 14).unwrap();
        let eta = mollified_delta(grid, 0.05, 1.0).unwrap();
        let mut cfg = EvolutionConfig::linear(eta, 1e-3, 0.1);
        cfg.snapshot_stride = 100;
        let u0 = Field::from_real_fn(grid, |x| (-x * x).exp()).unwrap();
        let u = evolve(&u0, &cfg).unwrap().last().field.clone();
        let rep = jump_probe(&u, 1.0, 0.05).unwrap();
        assert!(rep.relative_error < 0.2, "{rep:?}");
    }
}
