//! Time integration of `i∂ₜu + ∂ₓ²u + ηu = λ|u|ᵖu`.
//!
//! [`evolve`] is Strang splitting (half free step, pointwise phase
//! `e^{i dt (η - λ|u|ᵖ)}`, half free step), so `η` never gets
//! differentiated. [`picard_solve`] iterates the Duhamel formula in the
//! interaction picture with trapezoid quadrature and serves as the
//! independent reference for the linear problem.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Snapshot, Space};
use crate::grid::Grid;
use crate::potentials::Potential;
use crate::rpsf;
use crate::spectral::{self, l2_norm, sobolev_norm};
use crate::Complex64;

/// Outer strip, as a fraction of `L`, watched by the decay guard.
pub const GUARD_STRIP: f64 = 0.1;
pub const GUARD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub lambda: f64,
    pub p: f64,
    pub potential: Potential,
    /// Record a snapshot every this many steps (the final step is always
    /// recorded).
    pub snapshot_stride: usize,
    /// Sobolev exponents reported in the diagnostics.
    pub sobolev_orders: Vec<f64>,
    /// Nonlinear runs are exploratory and must be switched on explicitly.
    pub nonlinear: bool,
    /// Absolute bound on `|u|` in the outer strip; `None` disables the guard.
    pub decay_tolerance: Option<f64>,
    /// Metadata only: critical and regularity thresholds of the run.
    pub s_c: Option<f64>,
    pub s_r: Option<f64>,
}

impl EvolutionConfig {
    pub fn linear(potential: Potential, dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            lambda: 0.0,
            p: 0.0,
            potential,
            snapshot_stride: 1,
            sobolev_orders: Vec::new(),
            nonlinear: false,
            decay_tolerance: Some(GUARD_TOLERANCE),
            s_c: None,
            s_r: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(invalid(
                "t_final",
                format!("need t_final >= dt, got {} < {}", self.t_final, self.dt),
            ));
        }
        self.steps()?;
        if !(self.p.is_finite() && self.p >= 0.0) {
            return Err(invalid("p", format!("must be nonnegative, got {}", self.p)));
        }
        if !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be finite"));
        }
        if self.lambda != 0.0 && !self.nonlinear {
            return Err(invalid(
                "lambda",
                "nonlinear runs are exploratory; set the nonlinear flag to enable them",
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(invalid("snapshot_stride", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps; `t_final` must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(invalid(
                "t_final",
                format!("{} is not a multiple of dt = {}", self.t_final, self.dt),
            ));
        }
        Ok(n as usize)
    }

    fn is_linear(&self) -> bool {
        self.lambda == 0.0
    }

    /// Mass is conserved only for real `η` and real `λ`.
    pub fn conserves_mass(&self) -> bool {
        self.potential.is_real()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    /// `(s, ‖u(t)‖_{H^s})`
    pub sobolev: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostics>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    index: usize,
    t: f64,
    file: &'a str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    grid: Grid,
    snapshots: Vec<ManifestEntry<'a>>,
    diagnostics: &'a str,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories are never empty")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Largest `|‖u(t)‖ - ‖u₀‖| / ‖u₀‖` over the recorded snapshots.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mass;
        if m0 == 0.0 {
            return 0.0;
        }
        self.diagnostics
            .iter()
            .map(|d| (d.mass - m0).abs() / m0)
            .fold(0.0, f64::max)
    }

    /// Diagnostics CSV: `t,mass,H^s...`.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("t,mass");
        if let Some(first) = self.diagnostics.first() {
            for (s, _) in &first.sobolev {
                out.push_str(&format!(",H^{s}"));
            }
        }
        out.push('\n');
        for d in &self.diagnostics {
            out.push_str(&format!("{:.16e},{:.16e}", d.t, d.mass));
            for (_, v) in &d.sobolev {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Writes `manifest.json`, `diagnostics.csv` and one RPSF1 file per
    /// snapshot into `dir`.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let names: Vec<String> = (0..self.snapshots.len())
            .map(|i| format!("snapshot_{i:05}.rpsf"))
            .collect();
        for (snap, name) in self.snapshots.iter().zip(&names) {
            rpsf::save(&snap.field, dir.join(name))?;
        }
        std::fs::write(dir.join("diagnostics.csv"), self.diagnostics_csv())?;
        let manifest = Manifest {
            grid: *self.last().field.grid(),
            snapshots: self
                .snapshots
                .iter()
                .zip(&names)
                .enumerate()
                .map(|(index, (s, file))| ManifestEntry {
                    index,
                    t: s.t,
                    file,
                })
                .collect(),
            diagnostics: "diagnostics.csv",
        };
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)?,
        )?;
        Ok(())
    }
}

fn diagnostics(t: f64, u: &Field, orders: &[f64]) -> Diagnostics {
    Diagnostics {
        t,
        mass: l2_norm(u),
        sobolev: orders
            .iter()
            .map(|&s| (s, sobolev_norm(u, s).value))
            .collect(),
    }
}

/// Free evolution of `e^{-x²/w²}`: `(1 + 4it/w²)^{-1/2} e^{-x²/(w² + 4it)}`.
pub fn free_gaussian(grid: Grid, width: f64, t: f64) -> Result<Field> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(invalid("width", format!("must be positive, got {width}")));
    }
    let w2 = width * width;
    let pre = Complex64::new(1.0, 4.0 * t / w2).powf(-0.5);
    let den = Complex64::new(w2, 4.0 * t);
    Field::from_fn(grid, |x| pre * (-x * x / den).exp())
}

/// Checks `|u| < tol` on `|x| ≥ (1 - GUARD_STRIP) L`.
pub fn check_decay(u: &Field, t: f64, tol: f64) -> Result<()> {
    let phys = spectral::to_physical(u);
    let grid = phys.grid();
    let edge = (1.0 - GUARD_STRIP) * grid.half_width();
    let amplitude = phys
        .values()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j).abs() >= edge)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    if amplitude >= tol {
        return Err(Error::BoundaryContamination { time: t, amplitude });
    }
    Ok(())
}

struct Stepper {
    half: Vec<Complex64>,
    eta: Vec<Complex64>,
    grid: Grid,
    lambda: f64,
    p: f64,
}

impl Stepper {
    fn new(cfg: &EvolutionConfig, dt: f64) -> Result<Self> {
        let grid = *cfg.potential.grid();
        let symbol = spectral::propagator_symbol(0.5 * dt);
        Ok(Self {
            half: (0..grid.size())
                .map(|j| symbol(grid.frequency(j)))
                .collect(),
            eta: cfg.potential.values().to_vec(),
            grid,
            lambda: cfg.lambda,
            p: cfg.p,
        })
    }

    fn free_half(&self, buf: &mut [Complex64]) {
        spectral::forward_in_place(&self.grid, buf);
        for (z, m) in buf.iter_mut().zip(&self.half) {
            *z *= m;
        }
        spectral::inverse_in_place(&self.grid, buf);
    }

    fn step(&self, buf: &mut [Complex64], dt: f64, t: f64) -> Result<()> {
        self.free_half(buf);
        let i_dt = Complex64::new(0.0, dt);
        for (z, eta) in buf.iter_mut().zip(&self.eta) {
            let mut v = *eta;
            if self.lambda != 0.0 {
                let a = z.norm().powf(self.p);
                if !a.is_finite() {
                    return Err(Error::StepRejected {
                        time: t,
                        reason: format!("|u|^p overflowed at amplitude {:e}", z.norm()),
                    });
                }
                v -= self.lambda * a;
            }
            *z *= (i_dt * v).exp();
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::StepRejected {
                    time: t,
                    reason: "phase step produced a non-finite value".into(),
                });
            }
        }
        self.free_half(buf);
        Ok(())
    }
}

/// One Strang step of size `dt` (negative `dt` runs backwards).
pub fn strang_step(u: &Field, cfg: &EvolutionConfig, dt: f64) -> Result<Field> {
    if *u.grid() != *cfg.potential.grid() {
        return Err(Error::GridMismatch(
            "field and potential grids differ".into(),
        ));
    }
    u.check_finite()?;
    let stepper = Stepper::new(cfg, dt)?;
    let mut buf = spectral::to_physical(u).into_values();
    stepper.step(&mut buf, dt, 0.0)?;
    let out = Field::from_parts(*u.grid(), buf, Space::Physical);
    Ok(match u.space() {
        Space::Physical => out,
        Space::Frequency => spectral::to_frequency(&out),
    })
}

fn run(u0: &Field, cfg: &EvolutionConfig, dt: f64) -> Result<Trajectory> {
    cfg.validate()?;
    if *u0.grid() != *cfg.potential.grid() {
        return Err(Error::GridMismatch(
            "initial data and potential grids differ".into(),
        ));
    }
    u0.check_finite()?;
    let u0 = spectral::to_physical(u0);
    if let Some(tol) = cfg.decay_tolerance {
        check_decay(&u0, 0.0, tol)?;
    }
    let steps = cfg.steps()?;
    let stepper = Stepper::new(cfg, dt)?;
    let grid = *u0.grid();
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: u0.clone(),
    }];
    let mut diags = vec![diagnostics(0.0, &u0, &cfg.sobolev_orders)];
    let mut buf = u0.into_values();
    for n in 1..=steps {
        let t = n as f64 * dt;
        stepper.step(&mut buf, dt, t)?;
        if n % cfg.snapshot_stride == 0 || n == steps {
            let field = Field::from_parts(grid, buf.clone(), Space::Physical);
            if let Some(tol) = cfg.decay_tolerance {
                check_decay(&field, t, tol)?;
            }
            diags.push(diagnostics(t, &field, &cfg.sobolev_orders));
            snapshots.push(Snapshot { t, field });
        }
    }
    Ok(Trajectory {
        snapshots,
        diagnostics: diags,
    })
}

/// Strang evolution from `u₀` over `[0, t_final]`.
pub fn evolve(u0: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    run(u0, cfg, cfg.dt)
}

/// Runs the same number of steps with `-dt`; snapshot times are reported
/// as elapsed backward time.
pub fn evolve_backward(u: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    run(u, cfg, -cfg.dt)
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    /// `max_k ‖u^{(m+1)}(t_k) - u^{(m)}(t_k)‖_{L²}` per iteration.
    pub distances: Vec<f64>,
    pub converged: bool,
}

pub const PICARD_DEPTH: usize = 12;
pub const PICARD_TOLERANCE: f64 = 1e-10;

/// Picard iteration on `u(t) = e^{it∂²}u₀ + i∫₀ᵗ e^{i(t-ρ)∂²}(ηu)(ρ)dρ`
/// at the nodes `t_k = k dt`, trapezoid rule in `ρ`. Stops early once
/// successive iterates agree to [`PICARD_TOLERANCE`] relative to `‖u₀‖`.
pub fn picard_solve(u0: &Field, cfg: &EvolutionConfig, iterations: usize) -> Result<PicardOutcome> {
    cfg.validate()?;
    if !cfg.is_linear() {
        return Err(invalid(
            "lambda",
            "picard iteration covers the linear equation only",
        ));
    }
    if *u0.grid() != *cfg.potential.grid() {
        return Err(Error::GridMismatch(
            "initial data and potential grids differ".into(),
        ));
    }
    let grid = *u0.grid();
    let steps = cfg.steps()?;
    let dt = cfg.dt;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let u0_hat = spectral::to_frequency(u0);
    let xis = grid.frequencies();
    let scale = l2_norm(&u0_hat).max(f64::MIN_POSITIVE);

    // u(t_k) = e^{it_k∂²}(u₀ + i w_k), w in frequency space
    let assemble = |w: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        times
            .iter()
            .zip(w)
            .map(|(&t, wk)| {
                let mut v: Vec<Complex64> = u0_hat
                    .values()
                    .iter()
                    .zip(wk)
                    .zip(&xis)
                    .map(|((a, b), xi)| {
                        (a + Complex64::i() * b) * Complex64::from_polar(1.0, -t * xi * xi)
                    })
                    .collect();
                spectral::inverse_in_place(&grid, &mut v);
                v
            })
            .collect()
    };
    let zero = vec![Complex64::new(0.0, 0.0); grid.size()];
    let mut current = assemble(&vec![zero.clone(); times.len()]);
    let mut distances = Vec::new();
    let mut converged = false;
    let eta = cfg.potential.values();

    for iteration in 0..iterations {
        // g_k = e^{-it_k∂²}(η u(t_k)) in frequency space
        let g: Vec<Vec<Complex64>> = times
            .iter()
            .zip(&current)
            .map(|(&t, u)| {
                let mut v: Vec<Complex64> = u.iter().zip(eta).map(|(a, b)| a * b).collect();
                spectral::forward_in_place(&grid, &mut v);
                for (z, xi) in v.iter_mut().zip(&xis) {
                    *z *= Complex64::from_polar(1.0, t * xi * xi);
                }
                v
            })
            .collect();
        let mut w = vec![zero.clone(); times.len()];
        for k in 1..times.len() {
            let (done, rest) = w.split_at_mut(k);
            for (j, z) in rest[0].iter_mut().enumerate() {
                *z = done[k - 1][j] + 0.5 * dt * (g[k - 1][j] + g[k][j]);
            }
        }
        let next = assemble(&w);
        let distance = current
            .iter()
            .zip(&next)
            .map(|(a, b)| {
                (grid.dx()
                    * a.iter()
                        .zip(b)
                        .map(|(x, y)| (x - y).norm_sqr())
                        .sum::<f64>())
                .sqrt()
            })
            .fold(0.0, f64::max);
        distances.push(distance);
        current = next;
        if distance <= PICARD_TOLERANCE * scale {
            converged = true;
            break;
        }
        let n = distances.len();
        if n >= 3 && distances[n - 1] > distances[n - 2] && distances[n - 2] > distances[n - 3] {
            return Err(Error::NonContraction {
                iteration: iteration + 1,
                distance,
            });
        }
    }
    if iterations == 0 {
        converged = cfg.potential.field().is_zero();
    }

    let mut snapshots = Vec::new();
    let mut diags = Vec::new();
    for (k, (t, v)) in times.iter().zip(current).enumerate() {
        if k % cfg.snapshot_stride == 0 || k == steps {
            let field = Field::from_parts(grid, v, Space::Physical);
            diags.push(diagnostics(*t, &field, &cfg.sobolev_orders));
            snapshots.push(Snapshot { t: *t, field });
        }
    }
    Ok(PicardOutcome {
        trajectory: Trajectory {
            snapshots,
            diagnostics: diags,
        },
        distances,
        converged,
    })
}

/// `v(t) = e^{-it∂²}u(t)` for every snapshot.
pub fn interaction_picture(traj: &Trajectory) -> Result<Trajectory> {
    let mut snapshots = Vec::with_capacity(traj.snapshots.len());
    let mut diags = Vec::with_capacity(traj.snapshots.len());
    for (snap, d) in traj.snapshots.iter().zip(&traj.diagnostics) {
        let field = spectral::free_propagate(&snap.field, -snap.t)?;
        let orders: Vec<f64> = d.sobolev.iter().map(|(s, _)| *s).collect();
        diags.push(diagnostics(snap.t, &field, &orders));
        snapshots.push(Snapshot { t: snap.t, field });
    }
    Ok(Trajectory {
        snapshots,
        diagnostics: diags,
    })
}

/// `‖a - b‖_{L²} / ‖b‖_{L²}`.
pub fn relative_l2(a: &Field, b: &Field) -> Result<f64> {
    let pa = spectral::to_physical(a);
    let pb = spectral::to_physical(b);
    Ok(l2_norm(&pa.sub(&pb)?) / l2_norm(&pb))
}
