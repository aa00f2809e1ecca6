//! First Duhamel iterates of the ill-posedness examples, evaluated exactly
//! in time and by lattice quadrature in frequency:
//!
//! ```text
//! F̂(ξ) = (dξ/2π) Σ_j K(ξ, ξ_j, t) η̂(ξ - ξ_j) û₀(ξ_j),
//! K(ξ, ξ₂, t) = (e^{it(ξ²-ξ₂²)} - 1) / (i(ξ²-ξ₂²)),
//! ```
//!
//! which is `∫₀ᵗ e^{-iρ∂²}(η e^{iρ∂²}u₀) dρ` on the transform side. The
//! potentials enter through their exact transforms, so nothing is time
//! stepped and no potential is sampled in physical space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Space};
use crate::fit::{fit_line, LineFit};
use crate::grid::Grid;
use crate::littlewood_paley::{annulus, bump, ANNULUS_RAMP};
use crate::potentials::{
    annulus_bump_hat, mollified_delta_hat, shifted_annulus_hat, shifted_inner_factor,
};
use crate::quadrature::compensated_sum;
use crate::spectral::japanese_bracket;
use crate::Complex64;

use std::f64::consts::PI;

/// Largest lattice the oracles will allocate.
pub const MAX_ORACLE_SIZE: usize = 1 << 22;
/// Largest `N₀` accepted by the log-sum and the `Ω` union.
pub const MAX_UNION_N0: u64 = 1 << 10;
/// Slope tolerance of the power-law growth fits.
pub const SLOPE_TOLERANCE: f64 = 0.15;
/// `ε` rule for the delta example: `N₀^{3/2} ≥ A_EPSILON_RULE / ε`.
pub const A_EPSILON_RULE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencySetKind {
    OmegaUnion { n0: u64 },
    OmegaAnnulus { m: f64 },
    OmegaShifted { m: f64, n: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub kind: FrequencySetKind,
    /// Sorted, pairwise disjoint `(lo, hi)`.
    pub intervals: Vec<(f64, f64)>,
}

impl FrequencySet {
    /// `⋃_{k=N₀}^{N₀²} (√N₀ √(2kπ + 5π/12), √N₀ √(2kπ + π/2))`.
    pub fn omega_union(n0: u64) -> Result<Self> {
        if n0 < 1 || n0 > MAX_UNION_N0 {
            return Err(invalid(
                "N0",
                format!("need 1 <= N0 <= {MAX_UNION_N0}, got {n0}"),
            ));
        }
        let root = (n0 as f64).sqrt();
        let intervals = (n0..=n0 * n0)
            .map(|k| {
                let base = 2.0 * k as f64 * PI;
                (
                    root * (base + 5.0 * PI / 12.0).sqrt(),
                    root * (base + PI / 2.0).sqrt(),
                )
            })
            .collect();
        Ok(Self {
            kind: FrequencySetKind::OmegaUnion { n0 },
            intervals,
        })
    }

    /// `√(π/3) M ≤ |ξ| ≤ √(π/2) M`.
    pub fn omega_annulus(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid("M", format!("must be positive, got {m}")));
        }
        let (a, b) = ((PI / 3.0).sqrt() * m, (PI / 2.0).sqrt() * m);
        Ok(Self {
            kind: FrequencySetKind::OmegaAnnulus { m },
            intervals: vec![(-b, -a), (a, b)],
        })
    }

    /// `√(π/3) M + N/4 ≤ |ξ| ≤ √(π/3) M + 3N/4`.
    pub fn omega_shifted(m: f64, n: f64) -> Result<Self> {
        if !(m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite()) {
            return Err(invalid("M, N", format!("must be positive, got {m}, {n}")));
        }
        let a = shifted_inner_factor() * m;
        let (lo, hi) = (a + 0.25 * n, a + 0.75 * n);
        Ok(Self {
            kind: FrequencySetKind::OmegaShifted { m, n },
            intervals: vec![(-hi, -lo), (lo, hi)],
        })
    }

    pub fn is_disjoint(&self) -> bool {
        self.intervals.iter().all(|(lo, hi)| lo < hi)
            && self.intervals.windows(2).all(|w| w[0].1 < w[1].0)
    }

    pub fn contains(&self, xi: f64) -> bool {
        let closed = !matches!(self.kind, FrequencySetKind::OmegaUnion { .. });
        // intervals are sorted; find the last with lo <= xi
        let idx = self.intervals.partition_point(|(lo, _)| *lo <= xi);
        if idx == 0 {
            return false;
        }
        let (lo, hi) = self.intervals[idx - 1];
        if closed {
            lo <= xi && xi <= hi
        } else {
            lo < xi && xi < hi
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.intervals
            .iter()
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .fold(0.0, f64::max)
    }

    pub fn lattice_slots(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.size())
            .filter(|&j| self.contains(grid.frequency(j)))
            .collect()
    }

    /// `∫_Ω dξ / |ξ|`.
    pub fn inverse_measure(&self) -> f64 {
        compensated_sum(self.intervals.iter().map(|&(lo, hi)| {
            if lo > 0.0 {
                (hi / lo).ln()
            } else {
                (lo / hi).ln()
            }
        }))
    }
}

/// `(e^{itφ} - 1)/(iφ)` with `φ = ξ² - ξ₂²`, by its Taylor polynomial when
/// `|tφ| < 1e-6`.
pub fn duhamel_kernel(xi: f64, xi2: f64, t: f64) -> Complex64 {
    let phi = xi * xi - xi2 * xi2;
    let x = t * phi;
    if x.abs() < 1e-6 {
        // t(1 + ix/2 - x²/6)
        Complex64::new(t * (1.0 - x * x / 6.0), t * x / 2.0)
    } else {
        Complex64::new(x.sin() / phi, 2.0 * (0.5 * x).sin().powi(2) / phi)
    }
}

/// `û₀ = φ(|ξ|) √π e^{-ξ²/4}`, the transform of `P_{≤1} e^{-x²}`, built
/// directly on the frequency lattice.
pub fn lowpass_gaussian_data(grid: Grid) -> Result<Field> {
    if grid.nyquist() < 2.0 + ANNULUS_RAMP {
        return Err(Error::AboveNyquist {
            requested: 2.0 + ANNULUS_RAMP,
            limit: grid.nyquist(),
        });
    }
    Field::from_spectrum(grid, |xi| {
        Complex64::new(bump(xi) * PI.sqrt() * (-0.25 * xi * xi).exp(), 0.0)
    })
}

/// `∫ û₀ dξ` by the lattice sum.
pub fn spectral_mass(u0_hat: &Field) -> Complex64 {
    u0_hat.values().iter().sum::<Complex64>() * u0_hat.grid().dxi()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Lattice points per unit frequency, `1/dξ`.
    pub resolution: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { resolution: 32.0 }
    }
}

impl OracleConfig {
    /// Smallest lattice with `dξ = 1/resolution` resolving `|ξ| ≤ reach`.
    pub fn grid(&self, reach: f64) -> Result<Grid> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(invalid(
                "resolution",
                format!("must be positive, got {}", self.resolution),
            ));
        }
        let needed = (2.0 * reach * self.resolution).ceil() as usize;
        let size = needed.max(16).next_power_of_two();
        if size > MAX_ORACLE_SIZE {
            return Err(Error::TooLarge {
                size,
                cap: MAX_ORACLE_SIZE,
            });
        }
        Grid::new(PI * self.resolution, size)
    }
}

/// Evaluates the first Duhamel iterate at the given output slots; all other
/// slots are zero.
pub fn first_iterate(
    u0_hat: &Field,
    eta_hat: impl Fn(f64) -> f64 + Sync,
    t: f64,
    slots: &[usize],
) -> Result<Field> {
    u0_hat.expect_space(Space::Frequency)?;
    let grid = *u0_hat.grid();
    let support: Vec<(f64, Complex64)> = u0_hat
        .values()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() != 0.0)
        .map(|(j, z)| (grid.frequency(j), *z))
        .collect();
    let scale = grid.dxi() / (2.0 * PI);
    let computed: Vec<Complex64> = slots
        .par_iter()
        .map(|&k| {
            let xi = grid.frequency(k);
            support
                .iter()
                .map(|&(xi2, u)| duhamel_kernel(xi, xi2, t) * eta_hat(xi - xi2) * u)
                .sum::<Complex64>()
                * scale
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.size()];
    for (&k, v) in slots.iter().zip(computed) {
        values[k] = v;
    }
    Field::new(grid, values, Space::Frequency)
}

fn slots_within(grid: &Grid, lo: f64, hi: f64) -> Vec<usize> {
    (0..grid.size())
        .filter(|&j| {
            let r = grid.frequency(j).abs();
            r >= lo && r <= hi
        })
        .collect()
}

/// `‖f‖²_{H^s}` from frequency samples.
pub fn hs_squared(f_hat: &Field, s: f64) -> f64 {
    let grid = f_hat.grid();
    grid.dxi() / (2.0 * PI)
        * compensated_sum(
            f_hat
                .values()
                .iter()
                .enumerate()
                .map(|(j, z)| japanese_bracket(grid.frequency(j)).powf(2.0 * s) * z.norm_sqr()),
        )
}

/// Smallest `Re F̂` over the lattice points of `omega`, with the point count.
fn min_real_on(f_hat: &Field, omega: &FrequencySet) -> (f64, usize) {
    let slots = omega.lattice_slots(f_hat.grid());
    let min = slots
        .iter()
        .map(|&j| f_hat.values()[j].re)
        .fold(f64::INFINITY, f64::min);
    (min, slots.len())
}

/// Smallest `sin(t ξ²)` over the lattice points of `omega`.
pub fn omega_phase_floor(omega: &FrequencySet, grid: &Grid, t: f64) -> f64 {
    omega
        .lattice_slots(grid)
        .iter()
        .map(|&j| (t * grid.frequency(j).powi(2)).sin())
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AOracleReport {
    pub n0: u64,
    pub epsilon: f64,
    pub t: f64,
    pub grid: Grid,
    pub omega_points: usize,
    pub min_re_on_omega: f64,
    pub positive: bool,
    /// `‖A[u₀]‖²_{H^{3/2}}`
    pub hs_norm_sq: f64,
    /// `(1/2π) Σ_{ξ∈Ω} ⟨ξ⟩³ |Â|² dξ`
    pub omega_energy: f64,
    /// `∫_Ω dξ/|ξ|`
    pub omega_integral: f64,
    /// `C₀ = (∫ û₀ dξ / 2π)²`
    pub c0: f64,
    /// `‖u₀‖_{H^{3/2}}`
    pub data_norm: f64,
    #[serde(skip)]
    pub spectrum: Option<Field>,
}

/// The delta example: `η = ε⁻¹e^{-(x/ε)²}/√π`, `t = 1/N₀`,
/// `u₀ = P_{≤1}e^{-x²}`.
pub fn a_oracle(n0: u64, epsilon: f64, cfg: &OracleConfig) -> Result<AOracleReport> {
    if n0 < 2 || !n0.is_power_of_two() {
        return Err(invalid("N0", format!("need a dyadic N0 >= 2, got {n0}")));
    }
    if !(epsilon > 0.0) || (n0 as f64).powf(1.5) < A_EPSILON_RULE / epsilon * (1.0 - 1e-12) {
        return Err(invalid(
            "epsilon",
            format!("need N0^(3/2) >= {A_EPSILON_RULE}/ε, got N0 = {n0}, ε = {epsilon}"),
        ));
    }
    let omega = FrequencySet::omega_union(n0)?;
    // η̂ < 1e-40 beyond ε|ξ| ≈ 19.2
    let reach = omega.max_abs().max(19.2 / epsilon) + 2.0 + ANNULUS_RAMP + 1.0;
    let grid = cfg.grid(reach)?;
    let u0 = lowpass_gaussian_data(grid)?;
    let t = 1.0 / n0 as f64;
    let slots = slots_within(&grid, 0.0, reach);
    let a = first_iterate(&u0, |z| mollified_delta_hat(epsilon, 1.0, z), t, &slots)?;
    let (min_re, points) = min_real_on(&a, &omega);
    let omega_energy = grid.dxi() / (2.0 * PI)
        * compensated_sum(
            omega
                .lattice_slots(&grid)
                .iter()
                .map(|&j| japanese_bracket(grid.frequency(j)).powi(3) * a.values()[j].norm_sqr()),
        );
    let c0 = (spectral_mass(&u0).re / (2.0 * PI)).powi(2);
    Ok(AOracleReport {
        n0,
        epsilon,
        t,
        grid,
        omega_points: points,
        min_re_on_omega: min_re,
        positive: points > 0 && min_re > 0.0,
        hs_norm_sq: hs_squared(&a, 1.5),
        omega_energy,
        omega_integral: omega.inverse_measure(),
        c0,
        data_norm: hs_squared(&u0, 1.5).sqrt(),
        spectrum: Some(a),
    })
}

/// Smallest `ε` allowed by the rule at `N₀`.
pub fn a_epsilon(n0: u64) -> f64 {
    A_EPSILON_RULE / (n0 as f64).powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSumReport {
    pub n0: u64,
    pub terms: u64,
    /// `½ Σ_{k=N₀}^{N₀²} ln((2kπ + π/2)/(2kπ + 5π/12))`
    pub sum: f64,
    /// `(π/50) ln N₀`
    pub bound: f64,
    pub pass: bool,
}

pub fn log_sum_bound(n0: u64) -> Result<LogSumReport> {
    if n0 < 1 || !n0.is_power_of_two() || n0 > MAX_UNION_N0 {
        return Err(invalid(
            "N0",
            format!("need a dyadic N0 <= {MAX_UNION_N0}, got {n0}"),
        ));
    }
    // (2kπ + π/2)/(2kπ + 5π/12) = 1 + 1/(24k + 5)
    let sum =
        0.5 * compensated_sum((n0..=n0 * n0).map(|k| (1.0 / (24.0 * k as f64 + 5.0)).ln_1p()));
    let bound = PI / 50.0 * (n0 as f64).ln();
    Ok(LogSumReport {
        n0,
        terms: n0 * n0 - n0 + 1,
        sum,
        bound,
        pass: sum >= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BOracleReport {
    pub m: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub grid: Grid,
    /// `‖B[u₀]‖_{H^s}`
    pub norm: f64,
    pub omega_points: usize,
    pub min_re_on_omega: f64,
    pub positive: bool,
    /// `(1/2π) M^{-3+1/r} J`, `J = (1/2π) ∫ χ((ξ-ξ₂)/M) û₀(ξ₂) dξ₂` at the
    /// point of `Ω` where `J` is smallest.
    pub lower_bound: f64,
    /// `min_{ξ∈Ω} (Re B̂(ξ) - (1/2π) M^{-3+1/r} J(ξ))`
    pub bound_margin: f64,
    /// `‖u₀‖_{H^s}`
    pub data_norm: f64,
    #[serde(skip)]
    pub spectrum: Option<Field>,
}

fn check_r_s(r: f64, (lo, hi): (f64, f64), s: f64) -> Result<()> {
    if !(r > lo && r <= hi) {
        return Err(invalid("r", format!("need {lo} < r <= {hi}, got {r}")));
    }
    if !s.is_finite() {
        return Err(invalid("s", "must be finite"));
    }
    Ok(())
}

/// Lattice for the annulus example at frequency scale `M`.
pub fn b_grid(m: f64, cfg: &OracleConfig) -> Result<Grid> {
    cfg.grid((2.0 + ANNULUS_RAMP) * m + 2.0 + ANNULUS_RAMP + 1.0)
}

/// The annulus example with data `u0_hat` on a lattice from [`b_grid`].
pub fn b_oracle_with(m: f64, r: f64, s: f64, u0_hat: &Field) -> Result<BOracleReport> {
    check_r_s(r, (1.0, 2.0), s)?;
    if !(m >= 32.0 && m.is_finite()) {
        return Err(invalid("M", format!("need M >= 32, got {m}")));
    }
    let grid = *u0_hat.grid();
    let reach = (2.0 + ANNULUS_RAMP) * m + 2.0 + ANNULUS_RAMP;
    if reach > grid.nyquist() {
        return Err(Error::AboveNyquist {
            requested: reach,
            limit: grid.nyquist(),
        });
    }
    let t = 1.0 / (m * m);
    let slots = slots_within(&grid, 0.25 * m - 2.0 - ANNULUS_RAMP, reach);
    let b = first_iterate(u0_hat, |z| annulus_bump_hat(m, r, z), t, &slots)?;
    let omega = FrequencySet::omega_annulus(m)?;
    let (min_re, points) = min_real_on(&b, &omega);
    let scale = grid.dxi() / (2.0 * PI);
    let prefactor = m.powf(-3.0 + 1.0 / r) / (2.0 * PI);
    let support: Vec<(f64, f64)> = u0_hat
        .values()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re != 0.0)
        .map(|(i, z)| (grid.frequency(i), z.re))
        .collect();
    let mut lower = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for j in omega.lattice_slots(&grid) {
        let xi = grid.frequency(j);
        let jv = scale
            * compensated_sum(
                support
                    .iter()
                    .map(|&(xi2, u)| annulus(0.5, 2.0, (xi - xi2) / m) * u),
            );
        lower = lower.min(prefactor * jv);
        margin = margin.min(b.values()[j].re - prefactor * jv);
    }
    Ok(BOracleReport {
        m,
        r,
        s,
        t,
        grid,
        norm: hs_squared(&b, s).sqrt(),
        omega_points: points,
        min_re_on_omega: min_re,
        positive: points > 0 && min_re > 0.0,
        lower_bound: lower,
        bound_margin: margin,
        data_norm: hs_squared(u0_hat, s).sqrt(),
        spectrum: Some(b),
    })
}

/// The annulus example, `η̂ = M^{-1+1/r} χ(ξ/M)`, `t = 1/M²`,
/// `u₀ = P_{≤1}e^{-x²}`.
pub fn b_oracle(m: f64, r: f64, s: f64, cfg: &OracleConfig) -> Result<BOracleReport> {
    let grid = b_grid(m, cfg)?;
    b_oracle_with(m, r, s, &lowpass_gaussian_data(grid)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct COracleReport {
    pub m: f64,
    pub n: f64,
    pub r: f64,
    pub s: f64,
    /// Data band `L = N/8`.
    pub band: f64,
    pub t: f64,
    pub grid: Grid,
    pub norm: f64,
    /// `‖u₀‖_{H^s}`
    pub data_norm: f64,
    pub omega_points: usize,
    pub min_re_on_omega: f64,
    pub positive: bool,
    #[serde(skip)]
    pub spectrum: Option<Field>,
}

/// `û₀ = L^{-1/2-s} χ_{L≤|·|≤2L}` with `L = N/8`.
pub fn c_data(grid: Grid, n: f64, s: f64) -> Result<Field> {
    let band = n / 8.0;
    Field::from_spectrum(grid, |xi| {
        Complex64::new(band.powf(-0.5 - s) * annulus(band, 2.0 * band, xi), 0.0)
    })
}

pub fn c_grid(m: f64, n: f64, cfg: &OracleConfig) -> Result<Grid> {
    cfg.grid(shifted_inner_factor() * m + n + 2.0 * ANNULUS_RAMP + n / 4.0 + 1.0)
}

pub fn c_oracle_with(m: f64, n: f64, r: f64, s: f64, u0_hat: &Field) -> Result<COracleReport> {
    check_r_s(r, (2.0, f64::INFINITY), s)?;
    if !(n >= 8.0 && n.is_finite()) {
        return Err(invalid("N", format!("need N >= 8, got {n}")));
    }
    if !(m > 4.0 * n && m.is_finite()) {
        return Err(invalid("M", format!("need M > 4N, got M = {m}, N = {n}")));
    }
    let grid = *u0_hat.grid();
    let band = n / 8.0;
    if 4.0 * grid.dxi() > band {
        return Err(invalid(
            "resolution",
            format!(
                "the data band L = {band} needs dξ <= L/4, got {}",
                grid.dxi()
            ),
        ));
    }
    let a = shifted_inner_factor() * m;
    let spread = 2.0 * band + ANNULUS_RAMP;
    let (lo, hi) = (a - ANNULUS_RAMP - spread, a + n + ANNULUS_RAMP + spread);
    if hi > grid.nyquist() {
        return Err(Error::AboveNyquist {
            requested: hi,
            limit: grid.nyquist(),
        });
    }
    let t = 1.0 / (m * m);
    let slots = slots_within(&grid, lo, hi);
    let c = first_iterate(u0_hat, |z| shifted_annulus_hat(m, n, r, z), t, &slots)?;
    let omega = FrequencySet::omega_shifted(m, n)?;
    let (min_re, points) = min_real_on(&c, &omega);
    Ok(COracleReport {
        m,
        n,
        r,
        s,
        band,
        t,
        grid,
        norm: hs_squared(&c, s).sqrt(),
        data_norm: hs_squared(u0_hat, s).sqrt(),
        omega_points: points,
        min_re_on_omega: min_re,
        positive: points > 0 && min_re > 0.0,
        spectrum: Some(c),
    })
}

/// The shifted-annulus example: `η̂ = N^{-1+1/r} χ_{a≤|·|≤a+N}`,
/// `a = √(π/3) M`, `t = 1/M²`, data from [`c_data`].
pub fn c_oracle(m: f64, n: f64, r: f64, s: f64, cfg: &OracleConfig) -> Result<COracleReport> {
    let grid = c_grid(m, n, cfg)?;
    c_oracle_with(m, n, r, s, &c_data(grid, n, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "oracle", rename_all = "snake_case")]
pub enum OracleSpec {
    /// Parameter `N₀`, `ε` from the rule.
    A,
    /// Parameter `M`.
    B { r: f64, s: f64 },
    /// Parameter `M`.
    C { n: f64, r: f64, s: f64 },
}

impl OracleSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OracleSpec::A => "A",
            OracleSpec::B { .. } => "B",
            OracleSpec::C { .. } => "C",
        }
    }

    pub fn expected_exponent(&self) -> Option<f64> {
        match *self {
            OracleSpec::A => None,
            OracleSpec::B { r, s } => Some(s - 2.5 + 1.0 / r),
            OracleSpec::C { s, .. } => Some(s - 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub parameter: f64,
    pub norm: f64,
    pub log_norm: f64,
    /// Oracle spectrum positive on `Ω`.
    pub positive: bool,
    /// Norm of the data in the space of the fit.
    pub data_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    /// `log_norm_vs_log_parameter` or `norm_squared_vs_ln_parameter`.
    pub law: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub expected_exponent: Option<f64>,
    pub tolerance: f64,
    /// Every oracle spectrum was positive on its `Ω`.
    pub all_positive: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub spec: OracleSpec,
    pub rows: Vec<GrowthRow>,
    pub fit: FitSummary,
}

impl GrowthTable {
    /// CSV with header `parameter,norm,log_norm,data_norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,norm,log_norm,data_norm\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.parameter, r.norm, r.log_norm, r.data_norm
            ));
        }
        out
    }

    pub fn fit_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.fit)?)
    }
}

fn check_ladder(params: &[f64]) -> Result<()> {
    if params.len() < 4 {
        return Err(Error::Insufficient(format!(
            "a growth fit needs >= 4 parameter values, got {}",
            params.len()
        )));
    }
    if params.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(invalid("ladder", "parameters must be positive"));
    }
    let ratio = params[1] / params[0];
    if !(ratio > 1.0) {
        return Err(invalid("ladder", "parameters must be strictly increasing"));
    }
    if params
        .windows(2)
        .any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9)
    {
        return Err(invalid("ladder", "parameters must be geometrically spaced"));
    }
    Ok(())
}

/// Runs `spec` over `params` and fits the growth law: `ln‖F‖` against
/// `ln M` for B and C, `‖A‖²_{H^{3/2}}` against `ln N₀` for A.
pub fn growth_sweep(spec: OracleSpec, params: &[f64], cfg: &OracleConfig) -> Result<GrowthTable> {
    check_ladder(params)?;
    let rows = params
        .par_iter()
        .map(|&p| -> Result<GrowthRow> {
            let (norm, positive, data_norm) = match spec {
                OracleSpec::A => {
                    if p.fract() != 0.0 {
                        return Err(invalid("N0", format!("{p} is not an integer")));
                    }
                    let n0 = p as u64;
                    let rep = a_oracle(n0, a_epsilon(n0), cfg)?;
                    (rep.hs_norm_sq.sqrt(), rep.positive, rep.data_norm)
                }
                OracleSpec::B { r, s } => {
                    let rep = b_oracle(p, r, s, cfg)?;
                    (rep.norm, rep.positive, rep.data_norm)
                }
                OracleSpec::C { n, r, s } => {
                    let rep = c_oracle(p, n, r, s, cfg)?;
                    (rep.norm, rep.positive, rep.data_norm)
                }
            };
            Ok(GrowthRow {
                parameter: p,
                norm,
                log_norm: norm.ln(),
                positive,
                data_norm,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.parameter.ln()).collect();
    let fit = match spec.expected_exponent() {
        None => {
            let ys: Vec<f64> = rows.iter().map(|r| r.norm * r.norm).collect();
            let line = fit_line(&xs, &ys)?;
            let range = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - ys.iter().cloned().fold(f64::INFINITY, f64::min);
            summary(
                "norm_squared_vs_ln_parameter",
                line,
                None,
                0.1,
                line.slope > 0.0 && line.residual < 0.1 * range,
            )
        }
        Some(expected) => {
            let ys: Vec<f64> = rows.iter().map(|r| r.log_norm).collect();
            let line = fit_line(&xs, &ys)?;
            let pass = (line.slope - expected).abs() <= SLOPE_TOLERANCE;
            summary(
                "log_norm_vs_log_parameter",
                line,
                Some(expected),
                SLOPE_TOLERANCE,
                pass,
            )
        }
    };
    let mut fit = fit;
    fit.all_positive = rows.iter().all(|r| r.positive);
    fit.pass &= fit.all_positive;
    Ok(GrowthTable { spec, rows, fit })
}

fn summary(
    law: &str,
    line: LineFit,
    expected: Option<f64>,
    tolerance: f64,
    pass: bool,
) -> FitSummary {
    FitSummary {
        law: law.into(),
        slope: line.slope,
        intercept: line.intercept,
        residual: line.residual,
        expected_exponent: expected,
        tolerance,
        all_positive: true,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        assert_eq!(duhamel_kernel(3.0, 1.0, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(duhamel_kernel(2.0, -2.0, 0.7), Complex64::new(0.7, 0.0));
        let k = duhamel_kernel(2.0, 0.0, PI / 4.0);
        assert!((k - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        // branch continuity at |tφ| = 1e-6
        let t = 1.0;
        let xi2 = 1.0;
        let xi = (1.0 + 1e-6f64).sqrt();
        let phi = xi * xi - xi2 * xi2;
        let direct = (Complex64::new(0.0, t * phi).exp() - 1.0) / Complex64::new(0.0, phi);
        assert!((duhamel_kernel(xi, xi2, t) - direct).norm() < 1e-9);
        let x = 1e-6;
        let taylor = Complex64::new(1.0 - x * x / 6.0, x / 2.0);
        let exact = Complex64::new(x.sin() / x, 2.0 * (0.5 * x).sin().powi(2) / x);
        assert!((taylor - exact).norm() < 1e-12);
    }

    #[test]
    fn frequency_sets() {
        let u = FrequencySet::omega_union(16).unwrap();
        assert_eq!(u.intervals.len(), 16 * 16 - 16 + 1);
        assert!(u.is_disjoint());
        let big = FrequencySet::omega_union(MAX_UNION_N0).unwrap();
        assert!(big.is_disjoint());
        assert!(FrequencySet::omega_union(MAX_UNION_N0 * 2).is_err());
        let a = FrequencySet::omega_annulus(64.0).unwrap();
        assert!(a.contains(70.0) && a.contains(-70.0) && !a.contains(10.0));
        let s = FrequencySet::omega_shifted(512.0, 64.0).unwrap();
        assert!(s.is_disjoint());
        assert!(s.contains(shifted_inner_factor() * 512.0 + 32.0));
        // centres of Ω_k: t ξ² = 2kπ + 11π/24
        let n0 = 16u64;
        for k in n0..=n0 * n0 {
            let centre = 2.0 * k as f64 * PI + 11.0 * PI / 24.0;
            assert!(centre.sin() >= (5.0 * PI / 12.0).sin());
        }
    }

    #[test]
    fn lowpass_data() {
        let g = OracleConfig::default().grid(8.0).unwrap();
        let u = lowpass_gaussian_data(g).unwrap();
        assert!(u.values()[0].re > 0.0);
        assert!(u.values().iter().all(|z| z.re >= -1e-14));
        assert_eq!(u.values()[g.slot(3 * 32)].re, 0.0);
        let mass = spectral_mass(&u).re;
        let oracle = crate::quadrature::adaptive_simpson(
            |x| bump(x) * PI.sqrt() * (-x * x / 4.0).exp(),
            -2.0,
            2.0,
            1e-13,
        )
        .unwrap();
        assert!((mass - oracle).abs() < 1e-6, "{mass} {oracle}");
        assert!(mass < 2.0 * PI);
    }

    #[test]
    fn log_sum_values() {
        let direct: f64 = 0.5
            * (2..=4)
                .map(|k| {
                    ((2.0 * k as f64 * PI + PI / 2.0) / (2.0 * k as f64 * PI + 5.0 * PI / 12.0))
                        .ln()
                })
                .sum::<f64>();
        let rep = log_sum_bound(2).unwrap();
        assert!((rep.sum - direct).abs() < 1e-15);
        assert!(rep.sum > 0.0);
        let rep = log_sum_bound(16).unwrap();
        assert!((rep.bound - 0.174_24).abs() < 1e-4);
        assert_eq!(rep.terms, 241);
        assert!(log_sum_bound(3).is_err());
        assert!(log_sum_bound(2048).is_err());
        // ∫_Ω dξ/|ξ| is the same sum
        let omega = FrequencySet::omega_union(16).unwrap();
        assert!((omega.inverse_measure() - rep.sum).abs() < 1e-12);
    }

    #[test]
    fn a_oracle_positive_and_growing() {
        let cfg = OracleConfig::default();
        assert!(a_oracle(16, 0.05, &cfg).is_err());
        let a16 = a_oracle(16, a_epsilon(16), &cfg).unwrap();
        assert!(a16.positive, "{}", a16.min_re_on_omega);
        assert!(a16.omega_points > 100);
        let a64 = a_oracle(64, a_epsilon(64), &cfg).unwrap();
        assert!(a64.positive);
        assert!(a64.omega_integral > a16.omega_integral);
        assert!(a64.hs_norm_sq > a16.hs_norm_sq);
        let floor = omega_phase_floor(&FrequencySet::omega_union(16).unwrap(), &a16.grid, a16.t);
        assert!(floor >= 0.5);
    }

    #[test]
    fn b_oracle_bounds_and_linearity() {
        let cfg = OracleConfig::default();
        let rep = b_oracle(64.0, 2.0, 2.25, &cfg).unwrap();
        assert!(rep.positive);
        assert!(rep.lower_bound > 0.0);
        assert!(rep.bound_margin > 0.0, "{rep:?}");
        let grid = rep.grid;
        let zero = Field::zeros(grid, Space::Frequency);
        assert_eq!(b_oracle_with(64.0, 2.0, 2.25, &zero).unwrap().norm, 0.0);
        let rotated = lowpass_gaussian_data(grid)
            .unwrap()
            .scale(Complex64::from_polar(1.0, 0.8));
        let rot = b_oracle_with(64.0, 2.0, 2.25, &rotated).unwrap();
        assert!((rot.norm / rep.norm - 1.0).abs() < 1e-12);
        assert!(b_oracle(16.0, 2.0, 2.25, &cfg).is_err());
        let omega = FrequencySet::omega_annulus(64.0).unwrap();
        assert!(omega_phase_floor(&omega, &grid, rep.t) >= 0.5);
    }

    #[test]
    fn c_oracle_data_and_guards() {
        let cfg = OracleConfig { resolution: 8.0 };
        let rep = c_oracle(512.0, 64.0, 4.0, 2.5, &cfg).unwrap();
        assert!(rep.positive);
        assert!(
            rep.data_norm >= 0.25 && rep.data_norm <= 4.0,
            "{}",
            rep.data_norm
        );
        assert!(c_oracle(256.0, 64.0, 4.0, 2.5, &cfg).is_err());
        let zero = Field::zeros(rep.grid, Space::Frequency);
        assert_eq!(
            c_oracle_with(512.0, 64.0, 4.0, 2.5, &zero).unwrap().norm,
            0.0
        );
        let data = c_data(rep.grid, 64.0, 2.5)
            .unwrap()
            .scale(Complex64::from_polar(1.0, -2.0));
        let rot = c_oracle_with(512.0, 64.0, 4.0, 2.5, &data).unwrap();
        assert!((rot.norm / rep.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_checks() {
        let cfg = OracleConfig::default();
        let spec = OracleSpec::B { r: 2.0, s: 2.25 };
        assert!(growth_sweep(spec, &[], &cfg).is_err());
        assert!(growth_sweep(spec, &[32.0, 64.0, 128.0], &cfg).is_err());
        assert!(growth_sweep(spec, &[32.0, 64.0, 128.0, 200.0], &cfg).is_err());
        assert!(growth_sweep(spec, &[256.0, 128.0, 64.0, 32.0], &cfg).is_err());
    }
}
