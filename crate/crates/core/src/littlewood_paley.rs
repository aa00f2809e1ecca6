//! Smooth cutoffs and inhomogeneous dyadic projections.
//!
//! `φ` equals 1 on `[0, 1]` and 0 on `[2, ∞)`, `φ_{≤N}(r) = φ(r/N)`,
//! `φ_1 = φ` and `φ_N = φ_{≤N} - φ_{≤N/2}` for `N ≥ 2`, so the bands
//! telescope to the identity. The `≪`/`≲` variants shift the argument by
//! `2^{±5}`. Ramps are the order-5 smoothstep `6t⁵ - 15t⁴ + 10t³`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::spectral::{self, l2_norm, lp_norm};
use crate::Complex64;

/// Separation factor behind `≪` and `≳`.
pub const SEPARATION: f64 = 32.0;

/// Bernstein constant: twice the largest ratio seen on the frozen corpus
/// produced by [`bernstein_corpus`] with [`BERNSTEIN_CORPUS_SEED`] over
/// [`BERNSTEIN_EXPONENTS`] and [`BERNSTEIN_BANDS`].
pub const BERNSTEIN_CONSTANT: f64 = 2.0 * BERNSTEIN_CORPUS_MAX;
/// Largest ratio observed on the calibration corpus.
pub const BERNSTEIN_CORPUS_MAX: f64 = 0.928_791_787_021_977;
pub const BERNSTEIN_CORPUS_SEED: u64 = 0x5eed_b0b5;
pub const BERNSTEIN_CORPUS_SIZE: usize = 50;
pub const BERNSTEIN_BANDS: [u64; 7] = [1, 2, 4, 8, 16, 32, 64];
pub const BERNSTEIN_EXPONENTS: [(f64, f64); 6] = [
    (1.0, 2.0),
    (1.0, 4.0),
    (1.0, f64::INFINITY),
    (2.0, 4.0),
    (2.0, f64::INFINITY),
    (4.0, f64::INFINITY),
];

pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// `φ(r)`: 1 for `r ≤ 1`, 0 for `r ≥ 2`.
pub fn bump(r: f64) -> f64 {
    1.0 - smoothstep(r.abs() - 1.0)
}

pub fn phi_le(n: f64, r: f64) -> f64 {
    bump(r / n)
}

/// Band symbol `φ_N(r)`.
pub fn phi_band(n: f64, r: f64) -> f64 {
    if n <= 1.0 {
        bump(r)
    } else {
        phi_le(n, r) - phi_le(0.5 * n, r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `φ`.
    Bump,
    /// `χ_{a≤|·|≤b}`: 1 on `a ≤ |x| ≤ b`, 0 for `|x| ≤ a - 1/4` or
    /// `|x| ≥ b + 1/4`.
    Annulus { a: f64, b: f64 },
}

pub const ANNULUS_RAMP: f64 = 0.25;

impl CutoffProfile {
    pub fn annulus(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid("a, b", "bounds must be finite"));
        }
        if a >= b {
            return Err(invalid("a, b", format!("need a < b, got a = {a}, b = {b}")));
        }
        if a <= ANNULUS_RAMP {
            return Err(invalid("a", format!("need a > 1/4, got {a}")));
        }
        Ok(CutoffProfile::Annulus { a, b })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CutoffProfile::Bump => bump(x),
            CutoffProfile::Annulus { a, b } => annulus(a, b, x),
        }
    }
}

/// `χ_{a≤|·|≤b}(x)` without parameter validation.
pub fn annulus(a: f64, b: f64, x: f64) -> f64 {
    let r = x.abs();
    if r <= a {
        smoothstep((r - (a - ANNULUS_RAMP)) / ANNULUS_RAMP)
    } else if r <= b {
        1.0
    } else {
        1.0 - smoothstep((r - b) / ANNULUS_RAMP)
    }
}

/// Which dyadic piece to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum Selector {
    /// `P_N`
    Band(u64),
    /// `P_{≤N}`
    AtMost(u64),
    /// `P_{≥N} = 1 - P_{≤N}`
    AtLeast(u64),
    /// `P_{≪N}`, symbol `φ_{≤N}(2⁵|ξ|)`
    MuchBelow(u64),
    /// `P_{≲N}`, symbol `φ_{≤N}(2⁻⁵|ξ|)`
    Lesssim(u64),
    /// `P_{≳N} = 1 - P_{≪N}`
    Gtrsim(u64),
    /// `P_{≫N} = 1 - P_{≲N}`
    MuchAbove(u64),
}

impl Selector {
    pub fn dyadic(&self) -> u64 {
        match *self {
            Selector::Band(n)
            | Selector::AtMost(n)
            | Selector::AtLeast(n)
            | Selector::MuchBelow(n)
            | Selector::Lesssim(n)
            | Selector::Gtrsim(n)
            | Selector::MuchAbove(n) => n,
        }
    }

    pub fn symbol(&self, xi: f64) -> f64 {
        let r = xi.abs();
        let n = self.dyadic() as f64;
        match *self {
            Selector::Band(_) => phi_band(n, r),
            Selector::AtMost(_) => phi_le(n, r),
            Selector::AtLeast(_) => 1.0 - phi_le(n, r),
            Selector::MuchBelow(_) => phi_le(n, SEPARATION * r),
            Selector::Lesssim(_) => phi_le(n, r / SEPARATION),
            Selector::Gtrsim(_) => 1.0 - phi_le(n, SEPARATION * r),
            Selector::MuchAbove(_) => 1.0 - phi_le(n, r / SEPARATION),
        }
    }
}

fn check_dyadic(name: &'static str, n: u64) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid(
            name,
            format!("{n} is not a dyadic number 2^k, k >= 0"),
        ));
    }
    Ok(())
}

pub fn project(f: &Field, selector: Selector) -> Result<Field> {
    let n = selector.dyadic();
    check_dyadic("N", n)?;
    let nyquist = f.grid().nyquist();
    if n as f64 > nyquist {
        return Err(Error::AboveNyquist {
            requested: n as f64,
            limit: nyquist,
        });
    }
    spectral::apply_multiplier(f, |xi| Complex64::new(selector.symbol(xi), 0.0))
}

/// Dyadic bands `1, 2, 4, …` up to the first `N ≥` Nyquist, so that the
/// bands sum to the identity on the lattice.
pub fn dyadic_ladder(grid: &Grid) -> Vec<u64> {
    let nyquist = grid.nyquist();
    let mut out = vec![1u64];
    while (*out.last().expect("non-empty") as f64) < nyquist {
        out.push(out.last().expect("non-empty") * 2);
    }
    out
}

#[derive(Debug, Clone)]
pub struct Band {
    pub n: u64,
    pub field: Field,
    /// `‖P_N f‖_{L²}`
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct DyadicSpectrum {
    pub grid: Grid,
    pub bands: Vec<Band>,
    /// `‖f‖_{L²}`
    pub total: f64,
}

impl DyadicSpectrum {
    /// `Σ_N ‖P_N f‖² / ‖f‖²`; close to 1 only when the spectrum avoids the
    /// overlaps of neighbouring bands.
    pub fn orthogonality_ratio(&self) -> f64 {
        if self.total == 0.0 {
            return 1.0;
        }
        self.bands.iter().map(|b| b.energy * b.energy).sum::<f64>() / (self.total * self.total)
    }

    pub fn reconstruct(&self) -> Field {
        let mut acc = Field::zeros(self.grid, Space::Physical);
        for b in &self.bands {
            acc = acc.add(&b.field).expect("bands share the source grid");
        }
        acc
    }

    pub fn energies(&self) -> Vec<(u64, f64)> {
        self.bands.iter().map(|b| (b.n, b.energy)).collect()
    }

    /// CSV with header `N,energy,energy_fraction`; the fraction is
    /// `‖P_N f‖² / ‖f‖²`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,energy,energy_fraction\n");
        let total2 = self.total * self.total;
        for b in &self.bands {
            let frac = if total2 > 0.0 {
                b.energy * b.energy / total2
            } else {
                0.0
            };
            out.push_str(&format!("{},{:.16e},{:.16e}\n", b.n, b.energy, frac));
        }
        out
    }
}

pub fn band_energies(f: &Field) -> DyadicSpectrum {
    let grid = *f.grid();
    let hat = spectral::to_frequency(f);
    let bands = dyadic_ladder(&grid)
        .into_iter()
        .map(|n| {
            let mut values = hat.values().to_vec();
            for (j, z) in values.iter_mut().enumerate() {
                *z *= phi_band(n as f64, grid.frequency(j).abs());
            }
            let band_hat = Field::from_parts(grid, values, Space::Frequency);
            let energy = l2_norm(&band_hat);
            Band {
                n,
                field: spectral::to_physical(&band_hat),
                energy,
            }
        })
        .collect();
    DyadicSpectrum {
        grid,
        bands,
        total: l2_norm(f),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub n: u64,
    pub p: f64,
    pub q: f64,
    /// `‖P_N f‖_q / (N^{1/p-1/q} ‖P_N f‖_p)`; `None` when `P_N f = 0`.
    pub ratio: Option<f64>,
}

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

pub fn check_bernstein(f: &Field, n: u64, p: f64, q: f64) -> Result<BernsteinReport> {
    if !(p >= 1.0 && q >= p) {
        return Err(invalid(
            "p, q",
            format!("need 1 <= p <= q <= ∞, got p = {p}, q = {q}"),
        ));
    }
    let band = project(f, Selector::Band(n))?;
    let norm_p = lp_norm(&band, p)?.value;
    let ratio = if norm_p == 0.0 {
        None
    } else {
        let norm_q = lp_norm(&band, q)?.value;
        Some(norm_q / ((n as f64).powf(inv(p) - inv(q)) * norm_p))
    };
    Ok(BernsteinReport { n, p, q, ratio })
}

/// `‖D^s P_N f‖_{L²} / (N^s ‖P_N f‖_{L²})`, `None` for an empty band.
pub fn derivative_band_ratio(f: &Field, n: u64, s: f64) -> Result<Option<f64>> {
    let band = project(f, Selector::Band(n))?;
    let base = l2_norm(&band);
    if base == 0.0 {
        return Ok(None);
    }
    let lifted = spectral::apply_multiplier(&band, |xi| Complex64::new(xi.abs().powf(s), 0.0))?;
    Ok(Some(l2_norm(&lifted) / ((n as f64).powf(s) * base)))
}

/// Grid on which the Bernstein corpus lives.
pub fn bernstein_grid() -> Grid {
    Grid::new(16.0 * std::f64::consts::PI, 1 << 12).expect("valid constant grid")
}

/// Deterministic corpus of wave-packet superpositions used to calibrate the
/// Bernstein constant.
pub fn bernstein_corpus(grid: Grid, seed: u64, count: usize) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = grid.half_width();
    let kmax = 0.5 * grid.nyquist();
    (0..count)
        .map(|_| {
            let packets: Vec<(Complex64, f64, f64, f64)> = (0..rng.gen_range(1..=4))
                .map(|_| {
                    let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let x0 = rng.gen_range(-0.25 * l..0.25 * l);
                    let width = rng.gen_range(0.5..4.0);
                    let k = rng.gen_range(-kmax..kmax);
                    (amp, x0, width, k)
                })
                .collect();
            Field::from_fn(grid, |x| {
                packets
                    .iter()
                    .map(|&(amp, x0, w, k)| {
                        let d = (x - x0) / w;
                        amp * (-d * d).exp() * Complex64::from_polar(1.0, k * x)
                    })
                    .sum()
            })
            .expect("wave packets are finite")
        })
        .collect()
}

/// Largest Bernstein ratio over the calibration corpus and tested `(N, p, q)`.
pub fn bernstein_corpus_max(corpus: &[Field]) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in corpus {
        for &n in &BERNSTEIN_BANDS {
            for &(p, q) in &BERNSTEIN_EXPONENTS {
                if let Some(r) = check_bernstein(f, n, p, q)?.ratio {
                    worst = worst.max(r);
                }
            }
        }
    }
    Ok(worst)
}
