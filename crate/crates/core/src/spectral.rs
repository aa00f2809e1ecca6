//! Fourier transforms, Fourier multipliers, the free propagator and norms.
//!
//! The forward transform approximates `∫ e^{-ixξ} f(x) dx` by `dx Σ`, the
//! inverse carries `dξ / 2π`, so the pair is an exact inverse on the lattice
//! and `‖f‖_{L²}² = (1/2π) Σ |f̂|² dξ`. Sobolev norms use the same `1/2π`
//! weight, so `H⁰` coincides with `L²`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Snapshot, Space};
use crate::grid::Grid;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache {
        planner: FftPlanner::new(),
        forward: HashMap::new(),
        inverse: HashMap::new(),
    });
}

struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn run_fft(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let plan = PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let PlanCache {
            planner,
            forward,
            inverse: inv,
        } = &mut *cache;
        if inverse {
            inv.entry(n)
                .or_insert_with(|| planner.plan_fft_inverse(n))
                .clone()
        } else {
            forward
                .entry(n)
                .or_insert_with(|| planner.plan_fft_forward(n))
                .clone()
        }
    });
    plan.process(buf);
}

/// Forward transform of raw physical samples, in place.
pub(crate) fn forward_in_place(grid: &Grid, buf: &mut [Complex64]) {
    run_fft(buf, false);
    let dx = grid.dx();
    for (j, z) in buf.iter_mut().enumerate() {
        // e^{iLξ_k} = (-1)^k and k ≡ j (mod 2)
        *z *= if j % 2 == 0 { dx } else { -dx };
    }
}

/// Inverse transform of raw frequency samples, in place.
pub(crate) fn inverse_in_place(grid: &Grid, buf: &mut [Complex64]) {
    let w = 1.0 / (grid.size() as f64 * grid.dx());
    for (j, z) in buf.iter_mut().enumerate() {
        *z *= if j % 2 == 0 { w } else { -w };
    }
    run_fft(buf, true);
}

pub(crate) fn to_frequency(f: &Field) -> Field {
    match f.space() {
        Space::Frequency => f.clone(),
        Space::Physical => {
            let mut v = f.values().to_vec();
            forward_in_place(f.grid(), &mut v);
            Field::from_parts(*f.grid(), v, Space::Frequency)
        }
    }
}

pub(crate) fn to_physical(f: &Field) -> Field {
    match f.space() {
        Space::Physical => f.clone(),
        Space::Frequency => {
            let mut v = f.values().to_vec();
            inverse_in_place(f.grid(), &mut v);
            Field::from_parts(*f.grid(), v, Space::Physical)
        }
    }
}

pub fn forward_transform(f: &Field) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    f.check_finite()?;
    Ok(to_frequency(f))
}

pub fn inverse_transform(g: &Field) -> Result<Field> {
    g.expect_space(Space::Frequency)?;
    g.check_finite()?;
    Ok(to_physical(g))
}

fn sample_symbol(grid: &Grid, m: impl Fn(f64) -> Complex64) -> Result<Vec<Complex64>> {
    let symbol: Vec<Complex64> = (0..grid.size()).map(|j| m(grid.frequency(j))).collect();
    if let Some(index) = symbol
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::NonFinite { index });
    }
    Ok(symbol)
}

fn apply_symbol(f: &Field, symbol: &[Complex64]) -> Field {
    let mut hat = to_frequency(f);
    for (z, m) in hat.values_mut().iter_mut().zip(symbol) {
        *z *= m;
    }
    match f.space() {
        Space::Frequency => hat,
        Space::Physical => to_physical(&hat),
    }
}

/// `𝓕^{-1}(m f̂)`, returned in the same space as `f`.
pub fn apply_multiplier(f: &Field, m: impl Fn(f64) -> Complex64) -> Result<Field> {
    f.check_finite()?;
    let symbol = sample_symbol(f.grid(), m)?;
    Ok(apply_symbol(f, &symbol))
}

/// As [`apply_multiplier`] for symbols odd in ξ: the unpaired Nyquist mode is
/// dropped.
pub fn apply_odd_multiplier(f: &Field, m: impl Fn(f64) -> Complex64) -> Result<Field> {
    f.check_finite()?;
    let mut symbol = sample_symbol(f.grid(), m)?;
    symbol[f.grid().nyquist_slot()] = Complex64::new(0.0, 0.0);
    Ok(apply_symbol(f, &symbol))
}

pub fn japanese_bracket(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// `⟨∇⟩^s`.
pub fn bessel_potential(f: &Field, s: f64) -> Result<Field> {
    apply_multiplier(f, |xi| Complex64::new(japanese_bracket(xi).powf(s), 0.0))
}

/// `D^α = |∇|^α`; `α` must be nonnegative since the symbol vanishes at 0.
pub fn fractional_derivative(f: &Field, alpha: f64) -> Result<Field> {
    if alpha < 0.0 {
        return Err(invalid("alpha", "negative order is singular at ξ = 0"));
    }
    apply_multiplier(f, |xi| Complex64::new(xi.abs().powf(alpha), 0.0))
}

/// `∂_x`, symbol `iξ`.
pub fn derivative(f: &Field) -> Result<Field> {
    apply_odd_multiplier(f, |xi| Complex64::new(0.0, xi))
}

pub(crate) fn propagator_symbol(t: f64) -> impl Fn(f64) -> Complex64 {
    move |xi| Complex64::from_polar(1.0, -t * xi * xi)
}

/// `e^{it∂ₓ²} f`, the multiplier `e^{-itξ²}`.
pub fn free_propagate(f: &Field, t: f64) -> Result<Field> {
    if !t.is_finite() {
        return Err(invalid("t", "time must be finite"));
    }
    if t == 0.0 {
        f.check_finite()?;
        return Ok(f.clone());
    }
    apply_multiplier(f, propagator_symbol(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    L2,
    Lp { p: f64 },
    Hs { s: f64 },
    Mixed { q: f64, p: f64, order: MixedOrder },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedOrder {
    /// `‖ ‖u(t)‖_{L^p_x} ‖_{L^q_t}`
    TimeOuter,
    /// `‖ ‖u(·, x)‖_{L^q_t} ‖_{L^p_x}`
    SpaceOuter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
}

fn physical_l2(grid: &Grid, values: &[Complex64]) -> f64 {
    (grid.dx() * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// `‖f‖_{L²}`, evaluated in whichever space `f` lives (Parseval makes the two
/// agree to roundoff).
pub fn l2_norm(f: &Field) -> f64 {
    match f.space() {
        Space::Physical => physical_l2(f.grid(), f.values()),
        Space::Frequency => (f.grid().dxi() / (2.0 * std::f64::consts::PI)
            * f.values().iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sqrt(),
    }
}

fn lp_of_samples(dx: f64, values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        (dx * values.map(|a| a.powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(
            name,
            format!("exponent must lie in [1, ∞], got {p}"),
        ));
    }
    Ok(())
}

/// Riemann-sum `L^p` norm of the physical samples; `p = ∞` is the maximum.
pub fn lp_norm(f: &Field, p: f64) -> Result<NormReport> {
    check_exponent("p", p)?;
    let phys = to_physical(f);
    let value = lp_of_samples(f.grid().dx(), phys.values().iter().map(|z| z.norm()), p);
    Ok(NormReport {
        kind: NormKind::Lp { p },
        value,
    })
}

/// `‖⟨ξ⟩^s f̂‖_{L²_ξ} / √(2π)`.
pub fn sobolev_norm(f: &Field, s: f64) -> NormReport {
    let hat = to_frequency(f);
    let grid = hat.grid();
    let sum: f64 = hat
        .values()
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let w = 1.0 + grid.frequency(j).powi(2);
            w.powf(s) * z.norm_sqr()
        })
        .sum();
    NormReport {
        kind: NormKind::Hs { s },
        value: (grid.dxi() / (2.0 * std::f64::consts::PI) * sum).sqrt(),
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = times[i + 1] - times[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

fn lq_in_time(weights: &[f64], values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else {
        weights
            .iter()
            .zip(values)
            .map(|(w, a)| w * a.powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// Space-time norm of a trajectory: trapezoid rule in time, Riemann sums in
/// space, suprema for infinite exponents.
pub fn mixed_norm(traj: &[Snapshot], q: f64, p: f64, order: MixedOrder) -> Result<NormReport> {
    check_exponent("q", q)?;
    check_exponent("p", p)?;
    if traj.is_empty() {
        return Err(Error::Insufficient("empty trajectory".into()));
    }
    if q.is_finite() && traj.len() < 2 {
        return Err(Error::Insufficient(
            "a finite time exponent needs at least two snapshots".into(),
        ));
    }
    if traj.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(invalid("traj", "timestamps must be strictly increasing"));
    }
    let grid = *traj[0].field.grid();
    let phys: Vec<Field> = traj
        .iter()
        .map(|s| {
            if *s.field.grid() != grid {
                Err(Error::GridMismatch("snapshots on different grids".into()))
            } else {
                Ok(to_physical(&s.field))
            }
        })
        .collect::<Result<_>>()?;
    let times: Vec<f64> = traj.iter().map(|s| s.t).collect();
    let weights = trapezoid_weights(&times);
    let dx = grid.dx();

    let value = match order {
        MixedOrder::TimeOuter => {
            let per_time: Vec<f64> = phys
                .iter()
                .map(|f| lp_of_samples(dx, f.values().iter().map(|z| z.norm()), p))
                .collect();
            lq_in_time(&weights, &per_time, q)
        }
        MixedOrder::SpaceOuter => {
            let per_point = (0..grid.size()).map(|j| {
                let column: Vec<f64> = phys.iter().map(|f| f.values()[j].norm()).collect();
                lq_in_time(&weights, &column, q)
            });
            lp_of_samples(dx, per_point, p)
        }
    };
    Ok(NormReport {
        kind: NormKind::Mixed { q, p, order },
        value,
    })
}
