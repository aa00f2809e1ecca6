//! Normal-form machinery: the phase ratio `φ_β/φ₂`, the multiplier `m`, the
//! bilinear operator `𝓑`, the resonant remainder `𝓡`, and residual checks
//! of the integration-by-parts identity and the commutator split.
//!
//! Bilinear sums run over the frequency lattice with `ξ = ξ_k`, `ξ₂ = ξ_j`
//! and `ξ₁ = ξ_{k-j mod K}`, the same aliasing as the pointwise product, so
//! `𝓡 + Π = ηu` holds to roundoff.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::Trajectory;
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::littlewood_paley::{bump, dyadic_ladder, phi_band, phi_le, SEPARATION};
use crate::potentials::Potential;
use crate::quadrature::adaptive_simpson;
use crate::spectral::{self, japanese_bracket, l2_norm};
use crate::Complex64;

/// Largest grid accepted by the direct `O(K²)` sums.
pub const MAX_DIRECT_SIZE: usize = 1 << 13;

/// Bounds on `phase_ratio / min{|x|^{β-2}, |y|^{β-2}}`, fixed from a
/// brute-force scan of the sweep below (observed range about `[0.25, 1]`).
pub const PHASE_RATIO_C1: f64 = 0.24;
pub const PHASE_RATIO_C2: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFormConfig {
    pub s: f64,
    pub n0: u64,
    pub beta: f64,
    pub eps0: f64,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        let eps0 = 0.1;
        Self {
            s: 1.5 - eps0,
            n0: 16,
            beta: 1.0 - eps0 / 2.0,
            eps0,
        }
    }
}

impl NormalFormConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0 < 2 || !self.n0.is_power_of_two() {
            return Err(invalid(
                "N0",
                format!("need a dyadic N0 >= 2, got {}", self.n0),
            ));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(invalid(
                "beta",
                format!("need 0 < β < 1, got {}", self.beta),
            ));
        }
        if !(self.eps0 > 0.0) {
            return Err(invalid(
                "eps0",
                format!("must be positive, got {}", self.eps0),
            ));
        }
        if !self.s.is_finite() {
            return Err(invalid("s", "must be finite"));
        }
        Ok(())
    }
}

/// `(|x|^β - |y|^β) / (x² - y²)`.
pub fn phase_ratio(x: f64, y: f64, beta: f64) -> Result<f64> {
    if !(beta < 2.0 || beta == 2.0) {
        return Err(invalid("beta", format!("need β <= 2, got {beta}")));
    }
    let (ax, ay) = (x.abs(), y.abs());
    if ax == ay {
        return Err(invalid("x, y", format!("|x| = |y| = {ax} is resonant")));
    }
    if beta == 2.0 {
        return Ok(1.0);
    }
    Ok((ax.powf(beta) - ay.powf(beta)) / (x * x - y * y))
}

/// `phase_ratio / min{|x|^{β-2}, |y|^{β-2}}`.
pub fn phase_ratio_law(x: f64, y: f64, beta: f64) -> Result<f64> {
    let ratio = phase_ratio(x, y, beta)?;
    let e = beta - 2.0;
    let floor = x.abs().powf(e).min(y.abs().powf(e));
    Ok(ratio / floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub betas: Vec<f64>,
    pub points: usize,
    pub min_law: f64,
    pub max_law: f64,
    pub c1: f64,
    pub c2: f64,
    pub pass: bool,
}

/// Sweeps `x = 2^a`, `y = ±2^b` over an `axis × axis` exponent grid on
/// `[-10, 10]` (diagonal excluded) for each `β`.
pub fn phase_ratio_sweep(betas: &[f64], axis: usize) -> Result<PhaseSweep> {
    if axis < 2 {
        return Err(invalid("axis", "need at least two exponents per axis"));
    }
    let exps: Vec<f64> = (0..axis)
        .map(|i| -10.0 + 20.0 * i as f64 / (axis - 1) as f64)
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut points = 0;
    for &beta in betas {
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if i == j {
                    continue;
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let law = phase_ratio_law(2f64.powf(*a), sign * 2f64.powf(*b), beta)?;
                lo = lo.min(law);
                hi = hi.max(law);
                points += 1;
            }
        }
    }
    Ok(PhaseSweep {
        betas: betas.to_vec(),
        points,
        min_law: lo,
        max_law: hi,
        c1: PHASE_RATIO_C1,
        c2: PHASE_RATIO_C2,
        pass: lo >= PHASE_RATIO_C1 && hi <= PHASE_RATIO_C2,
    })
}

/// Cutoff `φ_{≥N₀}(|ξ|) φ_{≪1}(|ξ₂|/|ξ|)`.
pub fn nonresonant_cutoff(xi: f64, xi2: f64, n0: f64) -> f64 {
    let high = 1.0 - phi_le(n0, xi.abs());
    if high == 0.0 {
        return 0.0;
    }
    high * bump(SEPARATION * xi2.abs() / xi.abs())
}

/// `m` evaluated with an explicit output frequency `ξ`; on the lattice `ξ₁`
/// is the aliased difference, off the lattice `ξ = ξ₁ + ξ₂`.
fn multiplier_at(xi: f64, xi1: f64, xi2: f64, cfg: &NormalFormConfig) -> f64 {
    let c = nonresonant_cutoff(xi, xi2, cfg.n0 as f64);
    if c == 0.0 {
        return 0.0;
    }
    let phase = xi * xi - xi2 * xi2;
    assert!(
        phase != 0.0,
        "resonant pair ξ = {xi}, ξ₂ = {xi2} inside the cutoff support"
    );
    japanese_bracket(xi).powf(cfg.s) * japanese_bracket(xi1).powf(2.0 - cfg.s) / phase * c
}

/// `m(ξ₁, ξ₂) = ⟨ξ⟩^s ⟨ξ₁⟩^{2-s} / (ξ² - ξ₂²) · φ_{≥N₀}(|ξ|) φ_{≪1}(|ξ₂|/|ξ|)`
/// with `ξ = ξ₁ + ξ₂`.
pub fn multiplier_m(xi1: f64, xi2: f64, cfg: &NormalFormConfig) -> f64 {
    multiplier_at(xi1 + xi2, xi1, xi2, cfg)
}

/// Nonzero lattice entries of a bilinear symbol, row `k` holding
/// `(j, weight)` pairs.
struct SparseKernel {
    grid: Grid,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseKernel {
    fn build(grid: Grid, weight: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<Self> {
        if grid.size() > MAX_DIRECT_SIZE {
            return Err(Error::TooLarge {
                size: grid.size(),
                cap: MAX_DIRECT_SIZE,
            });
        }
        let k_size = grid.size();
        let rows = (0..k_size)
            .into_par_iter()
            .map(|k| {
                let xi = grid.frequency(k);
                // weights vanish unless |ξ₂| < |ξ| / 16
                let reach = (xi.abs() / 16.0 / grid.dxi()).ceil() as i64;
                let mut row = Vec::new();
                for w in -reach..=reach {
                    let j = grid.slot(w);
                    let xi2 = grid.frequency(j);
                    let xi1 = grid.frequency((k + k_size - j) % k_size);
                    let v = weight(xi, xi1, xi2);
                    if v != 0.0 {
                        row.push((j, v));
                    }
                }
                row
            })
            .collect();
        Ok(Self { grid, rows })
    }

    /// `(dξ/2π) Σ_j w_{kj} f̂_{k-j} ĝ_j`, returned in frequency space.
    fn apply(&self, f_hat: &Field, g_hat: &Field) -> Field {
        let k_size = self.grid.size();
        let scale = self.grid.dxi() / (2.0 * std::f64::consts::PI);
        let f = f_hat.values();
        let g = g_hat.values();
        let out = self
            .rows
            .par_iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .map(|&(j, w)| w * f[(k + k_size - j) % k_size] * g[j])
                    .sum::<Complex64>()
                    * scale
            })
            .collect();
        Field::from_parts(self.grid, out, Space::Frequency)
    }
}

fn check_pair(f: &Field, g: &Field) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(
            "bilinear inputs live on different grids".into(),
        ));
    }
    f.check_finite()?;
    g.check_finite()
}

fn in_space(f: Field, space: Space) -> Field {
    match space {
        Space::Frequency => f,
        Space::Physical => spectral::to_physical(&f),
    }
}

/// Precomputed `𝓑` and `Π` kernels for one grid and configuration.
pub struct NormalForm {
    cfg: NormalFormConfig,
    m: SparseKernel,
    cutoff: SparseKernel,
}

impl NormalForm {
    pub fn new(grid: Grid, cfg: NormalFormConfig) -> Result<Self> {
        if cfg.n0 < 1 || !cfg.n0.is_power_of_two() {
            return Err(invalid("N0", format!("need a dyadic N0, got {}", cfg.n0)));
        }
        let n0 = cfg.n0 as f64;
        let m = SparseKernel::build(grid, |xi, xi1, xi2| multiplier_at(xi, xi1, xi2, &cfg))?;
        let cutoff = SparseKernel::build(grid, |xi, _, xi2| nonresonant_cutoff(xi, xi2, n0))?;
        Ok(Self { cfg, m, cutoff })
    }

    pub fn config(&self) -> &NormalFormConfig {
        &self.cfg
    }

    /// `𝓑(f, g)`, in the space of `f`.
    pub fn bilinear(&self, f: &Field, g: &Field) -> Result<Field> {
        check_pair(f, g)?;
        if *f.grid() != self.m.grid {
            return Err(Error::GridMismatch(
                "inputs differ from the kernel grid".into(),
            ));
        }
        let out = self
            .m
            .apply(&spectral::to_frequency(f), &spectral::to_frequency(g));
        Ok(in_space(out, f.space()))
    }

    /// Nonresonant part `Π(η, u)` of the product, weight
    /// `φ_{≥N₀}(|ξ|) φ_{≪1}(|ξ₂|/|ξ|)`.
    pub fn nonresonant_product(&self, eta: &Field, u: &Field) -> Result<Field> {
        check_pair(eta, u)?;
        let out = self
            .cutoff
            .apply(&spectral::to_frequency(eta), &spectral::to_frequency(u));
        Ok(in_space(out, u.space()))
    }

    /// `𝓡(η, u) = ηu - Π(η, u)`, in the space of `u`.
    pub fn resonance(&self, eta: &Field, u: &Field) -> Result<Field> {
        let product = spectral::to_physical(eta).mul(&spectral::to_physical(u))?;
        let pi = self.nonresonant_product(eta, u)?;
        let r = spectral::to_frequency(&product).sub(&spectral::to_frequency(&pi))?;
        Ok(in_space(r, u.space()))
    }
}

/// `𝓑(f, g)(x) = ∫∫ e^{ix(ξ₁+ξ₂)} m(ξ₁, ξ₂) f̂(ξ₁) ĝ(ξ₂)`, normalized so
/// that `m ≡ 1` would give the product `fg`.
pub fn bilinear_b(f: &Field, g: &Field, cfg: &NormalFormConfig) -> Result<Field> {
    check_pair(f, g)?;
    NormalForm::new(*f.grid(), *cfg)?.bilinear(f, g)
}

/// `𝓡(η, u) = P_{≤N₀}(ηu) + P_{≥N₀}(ηu - Π_≪(η, u))`: the complement of the
/// nonresonant part, so it is exact on the lattice.
pub fn resonance_r(eta: &Potential, u: &Field, n0: u64) -> Result<Field> {
    let cfg = NormalFormConfig {
        n0,
        ..NormalFormConfig::default()
    };
    NormalForm::new(*u.grid(), cfg)?.resonance(eta.field(), u)
}

/// Littlewood-Paley form `P_{≤N₀}(ηu) + P_{≥N₀} Σ_N P_N(η P_{≳N} u)`, the
/// band sum truncated at the first band past Nyquist.
pub fn resonance_r_dyadic(eta: &Potential, u: &Field, n0: u64) -> Result<Field> {
    if n0 < 1 || !n0.is_power_of_two() {
        return Err(invalid("N0", format!("need a dyadic N0, got {n0}")));
    }
    if eta.grid() != u.grid() {
        return Err(Error::GridMismatch(
            "potential and field grids differ".into(),
        ));
    }
    let grid = *u.grid();
    let eta_phys = eta.field();
    let u_phys = spectral::to_physical(u);
    let mut sum = vec![Complex64::new(0.0, 0.0); grid.size()];
    for n in dyadic_ladder(&grid) {
        let nf = n as f64;
        // P_{≳N} = 1 - P_{≪N}, symbol 1 - φ(2⁵|ξ|/N)
        let high = spectral::apply_multiplier(&u_phys, |xi| {
            Complex64::new(1.0 - phi_le(nf, SEPARATION * xi.abs()), 0.0)
        })?;
        let prod = spectral::to_frequency(&eta_phys.mul(&high)?);
        for (j, (acc, z)) in sum.iter_mut().zip(prod.values()).enumerate() {
            *acc += z * phi_band(nf, grid.frequency(j).abs());
        }
    }
    let n0f = n0 as f64;
    let full = spectral::to_frequency(&eta_phys.mul(&u_phys)?);
    let out: Vec<Complex64> = (0..grid.size())
        .map(|j| {
            let low = phi_le(n0f, grid.frequency(j).abs());
            low * full.values()[j] + (1.0 - low) * sum[j]
        })
        .collect();
    Ok(in_space(
        Field::from_parts(grid, out, Space::Frequency),
        u.space(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub lhs_norm: f64,
    pub rhs_norm: f64,
    pub residual: f64,
    pub config: NormalFormConfig,
}

fn report(lhs: &Field, rhs: &Field, cfg: NormalFormConfig) -> Result<ResidualReport> {
    let lhs_norm = l2_norm(lhs);
    let rhs_norm = l2_norm(rhs);
    let diff = l2_norm(&lhs.sub(rhs)?);
    let residual = if lhs_norm == 0.0 {
        diff
    } else {
        diff / lhs_norm
    };
    Ok(ResidualReport {
        lhs_norm,
        rhs_norm,
        residual,
        config: cfg,
    })
}

/// Evaluates both sides of
///
/// ```text
/// ⟨∇⟩^s u(t) = ⟨∇⟩^s e^{it∂²}u₀ - e^{it∂²}𝓑(η_s, u₀) + 𝓑(η_s, u(t))
///            + i∫₀ᵗ e^{i(t-ρ)∂²}⟨∇⟩^s 𝓡(η, u) dρ - i∫₀ᵗ e^{i(t-ρ)∂²}𝓑(η_s, ηu) dρ
/// ```
///
/// with `η_s = ⟨∇⟩^{s-2}η`, `t` the last snapshot time and the time
/// integrals taken by the trapezoid rule over the snapshots, which must be
/// equally spaced from `t = 0`.
pub fn decomposition_residual(
    traj: &Trajectory,
    eta: &Potential,
    cfg: &NormalFormConfig,
) -> Result<ResidualReport> {
    let snaps = &traj.snapshots;
    if snaps.is_empty() || snaps[0].t != 0.0 {
        return Err(Error::MissingSnapshot(
            "the trajectory must start at t = 0".into(),
        ));
    }
    let grid = *snaps[0].field.grid();
    if *eta.grid() != grid {
        return Err(Error::GridMismatch(
            "potential and trajectory grids differ".into(),
        ));
    }
    let t = snaps.last().expect("non-empty").t;
    let n = snaps.len() - 1;
    if n > 0 {
        let dt = t / n as f64;
        for (k, s) in snaps.iter().enumerate() {
            if (s.t - k as f64 * dt).abs() > 1e-9 * dt.max(1e-300) {
                return Err(Error::MissingSnapshot(format!(
                    "quadrature node {k} expected at t = {}, found {}",
                    k as f64 * dt,
                    s.t
                )));
            }
        }
    }
    let nf = NormalForm::new(grid, *cfg)?;
    let eta_s = spectral::to_frequency(&spectral::bessel_potential(eta.field(), cfg.s - 2.0)?);
    let bracket_s: Vec<f64> = grid
        .frequencies()
        .iter()
        .map(|&xi| japanese_bracket(xi).powf(cfg.s))
        .collect();
    let prop = |tau: f64, f: &Field| -> Field {
        let mut out = f.clone();
        for (j, z) in out.values_mut().iter_mut().enumerate() {
            let xi = grid.frequency(j);
            *z *= Complex64::from_polar(1.0, -tau * xi * xi);
        }
        out
    };
    let bracket = |f: &Field| -> Field {
        let mut out = f.clone();
        for (z, w) in out.values_mut().iter_mut().zip(&bracket_s) {
            *z *= w;
        }
        out
    };

    let u0 = spectral::to_frequency(&snaps[0].field);
    let ut = spectral::to_frequency(&snaps[n].field);
    let lhs = bracket(&ut);

    let free = bracket(&prop(t, &u0));
    let b0 = prop(t, &nf.bilinear(&eta_s, &u0)?);
    let bt = nf.bilinear(&eta_s, &ut)?;

    // integrand e^{i(t-ρ)∂²}(⟨∇⟩^s 𝓡 - 𝓑(η_s, ηu)) at each node
    let integrands: Vec<Field> = snaps
        .par_iter()
        .map(|s| -> Result<Field> {
            let u = spectral::to_frequency(&s.field);
            let r = bracket(&nf.resonance(eta.field(), &u)?);
            let eu = spectral::to_frequency(&eta.field().mul(&spectral::to_physical(&u))?);
            let b = nf.bilinear(&eta_s, &eu)?;
            Ok(prop(t - s.t, &r.sub(&b)?))
        })
        .collect::<Result<_>>()?;
    let mut integral = Field::zeros(grid, Space::Frequency);
    if n > 0 {
        let dt = t / n as f64;
        for (k, g) in integrands.iter().enumerate() {
            let w = if k == 0 || k == n { 0.5 * dt } else { dt };
            integral = integral.add(&g.scale(Complex64::new(w, 0.0)))?;
        }
    }
    let rhs = free
        .sub(&b0)?
        .add(&bt)?
        .add(&integral.scale(Complex64::i()))?;
    report(&lhs, &rhs, *cfg)
}

/// `(|ξ|^β - |ξ₂|^β)` double sum for `[D^β, η] w`, returned in frequency
/// space.
pub fn commutator(eta: &Field, w: &Field, beta: f64) -> Result<Field> {
    check_pair(eta, w)?;
    let grid = *w.grid();
    if grid.size() > MAX_DIRECT_SIZE {
        return Err(Error::TooLarge {
            size: grid.size(),
            cap: MAX_DIRECT_SIZE,
        });
    }
    let k_size = grid.size();
    let eh = spectral::to_frequency(eta);
    let wh = spectral::to_frequency(w);
    let powers: Vec<f64> = grid
        .frequencies()
        .iter()
        .map(|x| x.abs().powf(beta))
        .collect();
    let scale = grid.dxi() / (2.0 * std::f64::consts::PI);
    let (e, v) = (eh.values(), wh.values());
    let out = (0..k_size)
        .into_par_iter()
        .map(|k| {
            (0..k_size)
                .map(|j| (powers[k] - powers[j]) * e[(k + k_size - j) % k_size] * v[j])
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(Field::from_parts(grid, out, Space::Frequency))
}

/// Compares `D^s(ηw)` with `D^{s-β}(η D^β w) + D^{s-β}([D^β, η] w)`, the
/// commutator taken from the direct double sum.
///
/// When η and w barely overlap, the double sum cancels O(1) terms down to a
/// tiny result and its rounding error is set by the inputs, not the output.
/// The residual is therefore measured against the largest of `‖D^s(ηw)‖`,
/// both summands, and `‖η‖_∞ ‖D^s w‖`.
pub fn commutator_split_residual(
    w: &Field,
    eta: &Potential,
    s: f64,
    beta: f64,
) -> Result<ResidualReport> {
    if !(beta >= 0.0 && s >= beta) {
        return Err(invalid(
            "s, beta",
            format!("need 0 <= β <= s, got β = {beta}, s = {s}"),
        ));
    }
    let e = eta.field();
    let wp = spectral::to_physical(w);
    let lhs = spectral::fractional_derivative(&e.mul(&wp)?, s)?;
    let inner = e.mul(&spectral::fractional_derivative(&wp, beta)?)?;
    let first = spectral::fractional_derivative(&inner, s - beta)?;
    let second = spectral::to_physical(&spectral::fractional_derivative(
        &commutator(e, &wp, beta)?,
        s - beta,
    )?);
    let rhs = first.add(&second)?;
    let cfg = NormalFormConfig {
        s,
        beta,
        ..NormalFormConfig::default()
    };
    let mut rep = report(&lhs, &rhs, cfg)?;
    let input_scale = e.max_abs() * l2_norm(&spectral::fractional_derivative(&wp, s)?);
    let scale = rep
        .lhs_norm
        .max(l2_norm(&first))
        .max(l2_norm(&second))
        .max(input_scale);
    if scale > 0.0 {
        rep.residual = l2_norm(&lhs.sub(&rhs)?) / scale;
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralCheck {
    pub gamma: f64,
    pub xi: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

/// `∫ min{|ξ|^γ, |ξ₂|^γ} dξ₂` over the line by adaptive quadrature, next to
/// `2|ξ|^{γ+1}(1 + 1/(-γ-1))`.
pub fn nonresonant_integral(gamma: f64, xi: f64) -> Result<IntegralCheck> {
    if !(gamma < -1.0) {
        return Err(invalid(
            "gamma",
            format!("need γ < -1 for convergence, got {gamma}"),
        ));
    }
    let a = xi.abs();
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("xi", format!("need 0 < |ξ| < ∞, got {xi}")));
    }
    let closed = 2.0 * a.powf(gamma + 1.0) * (1.0 + 1.0 / (-gamma - 1.0));
    let tol = 1e-13 * closed;
    let integrand = |t: f64| a.powf(gamma).min(t.abs().powf(gamma));
    let core = adaptive_simpson(integrand, 0.0, a, tol)?;
    // tail ξ₂ = |ξ| e^v, truncated where the integrand drops below 1e-18
    let v_max = 41.5 / (-gamma - 1.0);
    let tail = adaptive_simpson(
        |v: f64| {
            let t = a * v.exp();
            integrand(t) * t
        },
        0.0,
        v_max,
        tol,
    )?;
    let quadrature = 2.0 * (core + tail);
    Ok(IntegralCheck {
        gamma,
        xi,
        quadrature,
        closed_form: closed,
        relative_error: (quadrature - closed).abs() / closed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonresonantReport {
    pub sweep: PhaseSweep,
    pub integrals: Vec<IntegralCheck>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn nonresonant_factor_check(
    betas: &[f64],
    gammas: &[f64],
    xis: &[f64],
    tolerance: f64,
) -> Result<NonresonantReport> {
    let sweep = phase_ratio_sweep(betas, 101)?;
    let mut integrals = Vec::new();
    for &g in gammas {
        for &x in xis {
            integrals.push(nonresonant_integral(g, x)?);
        }
    }
    let pass = sweep.pass && integrals.iter().all(|c| c.relative_error <= tolerance);
    Ok(NonresonantReport {
        sweep,
        integrals,
        tolerance,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve, EvolutionConfig};
    use crate::littlewood_paley::{project, Selector};
    use crate::potentials;
    use std::f64::consts::PI;

    #[test]
    fn phase_ratio_examples() {
        assert!((phase_ratio(2.0, 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(phase_ratio(3.0, 0.5, 2.0).unwrap(), 1.0);
        assert!(phase_ratio(2.0, -2.0, 0.5).is_err());
        assert!(phase_ratio(2.0, 1.0, 2.5).is_err());
        let x = 1024.0;
        let r = phase_ratio(x, 1.0, 0.9).unwrap();
        let asym = x.powf(0.9 - 2.0);
        assert!(r / asym > 0.5 && r / asym < 2.0);
        assert!(phase_ratio(5.0, 3.0, 0.7).unwrap() > 0.0);
        assert!(phase_ratio(3.0, 5.0, 0.7).unwrap() > 0.0);
    }

    #[test]
    fn phase_ratio_sweep_is_within_constants() {
        let sweep = phase_ratio_sweep(&[0.5, 0.9, 0.99], 101).unwrap();
        assert!(sweep.points >= 10_000);
        assert!(sweep.pass, "{sweep:?}");
        assert!(sweep.min_law > 0.25 - 1e-9 && sweep.max_law <= 1.0 + 1e-12);
    }

    #[test]
    fn multiplier_support() {
        let cfg = NormalFormConfig {
            s: 2.0,
            n0: 16,
            ..NormalFormConfig::default()
        };
        // |ξ| = N₀/4
        assert_eq!(multiplier_m(3.0, 1.0, &cfg), 0.0);
        // |ξ₂|/|ξ| = 1/2
        assert_eq!(multiplier_m(50.0, 50.0, &cfg), 0.0);
        let (xi1, xi2) = (99.0, 1.0);
        let xi: f64 = 100.0;
        let tilde = (1.0 + xi * xi) / (xi * xi - xi2 * xi2) * nonresonant_cutoff(xi, xi2, 16.0);
        assert!((multiplier_m(xi1, xi2, &cfg) - tilde).abs() < 1e-15);
        // boundedness on the support
        let cfg = NormalFormConfig::default();
        for i in 1..400 {
            for j in -40..40 {
                let xi1 = i as f64 * 0.73;
                let xi2 = j as f64 * 0.11;
                let m = multiplier_m(xi1, xi2, &cfg);
                assert!(m.is_finite());
                let xi = (xi1 + xi2).abs();
                if m != 0.0 {
                    let bound = 4.0
                        * japanese_bracket(xi1).powf(2.0 - cfg.s).max(1.0)
                        * xi.powf(cfg.s - 2.0);
                    assert!(m.abs() <= bound, "{xi1} {xi2} {m} {bound}");
                }
            }
        }
    }

    fn lowpass(grid: Grid) -> Field {
        let f = Field::from_real_fn(grid, |x| (-x * x).exp()).unwrap();
        project(&f, Selector::AtMost(1)).unwrap()
    }

    #[test]
    fn bilinear_support_and_zero() {
        let g = Grid::new(16.0 * PI, 1 << 12).unwrap(); // dξ = 1/16, Nyquist 128
        let cfg = NormalFormConfig {
            s: 2.0,
            n0: 16,
            ..NormalFormConfig::default()
        };
        let eta = potentials::annulus_bump(g, 32.0, 2.0).unwrap();
        let u = lowpass(g);
        // exact spectra, so that the zeros are exact
        let eta_hat = Field::from_spectrum(g, |xi| {
            Complex64::new(potentials::annulus_bump_hat(32.0, 2.0, xi), 0.0)
        })
        .unwrap();
        let u_hat = Field::from_spectrum(g, |xi| {
            Complex64::new(bump(xi) * PI.sqrt() * (-xi * xi / 4.0).exp(), 0.0)
        })
        .unwrap();
        let hat = bilinear_b(&eta_hat, &u_hat, &cfg).unwrap();
        assert_eq!(hat.space(), Space::Frequency);
        assert!(hat.max_abs() > 0.0);
        for (j, z) in hat.values().iter().enumerate() {
            let r = g.frequency(j).abs();
            if r < 32.0 / 4.0 - 2.25 || r > 2.25 * 32.0 + 2.25 || r < 8.0 {
                assert_eq!(*z, Complex64::new(0.0, 0.0), "ξ = {r}");
            }
        }
        let zero = Field::zeros(g, Space::Physical);
        assert!(bilinear_b(&zero, &u, &cfg).unwrap().is_zero());
        assert!(bilinear_b(eta.field(), &zero, &cfg).unwrap().is_zero());
        // ĝ only at |ξ₂| ≥ |ξ|/4 for every output ξ: a single high mode
        let high = Field::from_spectrum(g, |xi| {
            Complex64::new(if (xi - 60.0).abs() < 1e-9 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let low = Field::from_spectrum(g, |xi| {
            Complex64::new(if xi.abs() < 1.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(bilinear_b(&low, &high, &cfg).unwrap().is_zero());
        let big = Grid::new(1.0, 1 << 14).unwrap();
        let z = Field::zeros(big, Space::Physical);
        assert!(matches!(
            bilinear_b(&z, &z, &cfg),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn resonance_cases() {
        let g = Grid::new(8.0 * PI, 1 << 10).unwrap();
        let u = Field::from_real_fn(g, |x| (-x * x).exp()).unwrap();
        let zero = Field::zeros(g, Space::Physical);
        let eta = potentials::sign_jump(g);
        assert!(resonance_r(&eta, &zero, 16).unwrap().is_zero());
        assert!(resonance_r_dyadic(&eta, &zero, 16).unwrap().is_zero());
        // everything below N₀/2
        let smooth = potentials::mollified_delta(g, 2.0, 1.0).unwrap();
        let prod = smooth.field().mul(&u).unwrap();
        for r in [
            resonance_r(&smooth, &u, 64).unwrap(),
            resonance_r_dyadic(&smooth, &u, 64).unwrap(),
        ] {
            assert!(l2_norm(&r.sub(&prod).unwrap()) < 1e-12 * l2_norm(&prod));
        }
        let prod = eta.field().mul(&u).unwrap();
        for r in [
            resonance_r(&eta, &u, 16).unwrap(),
            resonance_r_dyadic(&eta, &u, 16).unwrap(),
        ] {
            assert!(l2_norm(&r) <= 2.0 * l2_norm(&prod));
        }
    }

    #[test]
    fn resonance_plus_nonresonant_is_product() {
        let g = Grid::new(8.0 * PI, 1 << 10).unwrap();
        let u = Field::from_real_fn(g, |x| (-x * x).exp() * (1.0 + (3.0 * x).cos())).unwrap();
        let eta = potentials::mollified_delta(g, 0.2, 1.0).unwrap();
        let nf = NormalForm::new(g, NormalFormConfig::default()).unwrap();
        let r = nf.resonance(eta.field(), &u).unwrap();
        let pi = nf.nonresonant_product(eta.field(), &u).unwrap();
        let prod = eta.field().mul(&u).unwrap();
        assert!(l2_norm(&r.add(&pi).unwrap().sub(&prod).unwrap()) < 1e-13 * l2_norm(&prod));
    }

    fn delta_trajectory(dt: f64, t: f64) -> (Trajectory, Potential) {
        let g = Grid::new(16.0, 1 << 9).unwrap();
        let eta = potentials::mollified_delta(g, 0.25, 1.0).unwrap();
        let u0 = Field::from_real_fn(g, |x| (-x * x).exp()).unwrap();
        let cfg = EvolutionConfig::linear(eta.clone(), dt, t);
        (evolve(&u0, &cfg).unwrap(), eta)
    }

    #[test]
    fn decomposition_degenerate_cases() {
        let cfg = NormalFormConfig {
            s: 2.0,
            n0: 16,
            ..NormalFormConfig::default()
        };
        let g = Grid::new(16.0, 1 << 9).unwrap();
        let u0 = Field::from_real_fn(g, |x| (-x * x).exp()).unwrap();
        let zero = potentials::zero(g);
        let traj = evolve(&u0, &EvolutionConfig::linear(zero.clone(), 0.01, 0.1)).unwrap();
        let rep = decomposition_residual(&traj, &zero, &cfg).unwrap();
        assert!(rep.residual < 1e-12, "{rep:?}");
        let (traj, eta) = delta_trajectory(0.01, 0.1);
        let mut start = traj.clone();
        start.snapshots.truncate(1);
        let rep = decomposition_residual(&start, &eta, &cfg).unwrap();
        assert!(rep.residual <= 1e-12, "{rep:?}");
        let mut gappy = traj;
        gappy.snapshots.remove(3);
        assert!(matches!(
            decomposition_residual(&gappy, &eta, &cfg),
            Err(Error::MissingSnapshot(_))
        ));
    }

    #[test]
    fn decomposition_residual_is_second_order() {
        let cfg = NormalFormConfig {
            s: 2.0,
            n0: 16,
            ..NormalFormConfig::default()
        };
        let (coarse, eta) = delta_trajectory(2e-3, 0.1);
        let (fine, _) = delta_trajectory(1e-3, 0.1);
        let a = decomposition_residual(&coarse, &eta, &cfg)
            .unwrap()
            .residual;
        let b = decomposition_residual(&fine, &eta, &cfg).unwrap().residual;
        assert!(b < 1e-3, "{b}");
        assert!(a / b > 3.0 && a / b < 5.0, "{a} {b}");
    }

    #[test]
    fn commutator_split_cases() {
        let g = Grid::new(8.0 * PI, 1 << 10).unwrap();
        let w = Field::from_real_fn(g, |x| (-x * x).exp()).unwrap();
        let c = potentials::constant(g, Complex64::new(1.7, 0.0)).unwrap();
        let comm = commutator(c.field(), &w, 0.95).unwrap();
        assert!(comm.max_abs() < 1e-12);
        let eta = potentials::mollified_delta(g, 0.2, 1.0).unwrap();
        let rep = commutator_split_residual(&w, &eta, 0.95, 0.95).unwrap();
        assert!(rep.residual <= 1e-12, "{rep:?}");
        let rep = commutator_split_residual(&w, &eta, 1.45, 0.95).unwrap();
        assert!(rep.residual <= 1e-10, "{rep:?}");
        assert!(commutator_split_residual(&w, &eta, 0.5, 0.95).is_err());
    }

    #[test]
    fn nonresonant_integral_examples() {
        let c = nonresonant_integral(-2.0, 4.0).unwrap();
        assert!((c.closed_form - 1.0).abs() < 1e-15);
        assert!(c.relative_error < 1e-6, "{c:?}");
        let c = nonresonant_integral(-3.0, 1.0).unwrap();
        assert!((c.closed_form - 3.0).abs() < 1e-15);
        assert!(c.relative_error < 1e-6, "{c:?}");
        assert!(nonresonant_integral(-2.0, 1e6).unwrap().quadrature < 1e-5);
        assert!(nonresonant_integral(-1.0, 1.0).is_err());
        let rep =
            nonresonant_factor_check(&[0.9], &[-1.5, -2.0, -3.0], &[1.0, 4.0, 16.0], 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
