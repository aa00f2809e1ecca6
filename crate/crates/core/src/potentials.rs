//! Catalog of rough potentials `η`, their `Lʳ` norms and `Lʳ + L^∞` splits.
//!
//! The two Fourier-bump families are built by sampling `η̂` on the frequency
//! lattice and transforming back, so their band support is exact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{Field, Space};
use crate::grid::Grid;
use crate::littlewood_paley::{annulus, ANNULUS_RAMP};
use crate::rpsf;
use crate::spectral::{self, lp_norm, NormKind, NormReport};
use crate::Complex64;

/// `√(π/3)`, the inner radius factor of the shifted annulus.
pub fn shifted_inner_factor() -> f64 {
    (std::f64::consts::PI / 3.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    Zero,
    Constant { re: f64, im: f64 },
    MollifiedDelta { epsilon: f64, mass: f64 },
    SignJump,
    PowerLaw { gamma: f64, delta0: f64 },
    AnnulusBump { m: f64, r: f64 },
    ShiftedAnnulus { m: f64, n: f64, r: f64 },
    Custom { label: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    descriptor: Descriptor,
    field: Field,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    descriptor: Descriptor,
    grid: Grid,
}

impl Potential {
    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    /// Physical samples.
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn values(&self) -> &[Complex64] {
        self.field.values()
    }

    pub fn is_real(&self) -> bool {
        self.values().iter().all(|z| z.im == 0.0)
    }

    /// `∫ η dx` by the Riemann sum.
    pub fn integral(&self) -> Complex64 {
        self.values().iter().sum::<Complex64>() * self.grid().dx()
    }

    pub fn sidecar_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Sidecar {
            descriptor: self.descriptor.clone(),
            grid: *self.grid(),
        })?)
    }

    /// Writes the samples as RPSF1 to `path` and the descriptor next to it
    /// with a `.json` extension.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<PathBuf> {
        let path = path.as_ref();
        rpsf::save(&self.field, path)?;
        let sidecar = path.with_extension("json");
        std::fs::write(&sidecar, self.sidecar_json()?)?;
        Ok(sidecar)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let field = spectral::to_physical(&rpsf::load(path)?);
        let sidecar: Sidecar =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
        if sidecar.grid != *field.grid() {
            return Err(Error::GridMismatch(
                "sidecar grid differs from the samples".into(),
            ));
        }
        Ok(Self {
            descriptor: sidecar.descriptor,
            field,
        })
    }
}

pub fn zero(grid: Grid) -> Potential {
    Potential {
        descriptor: Descriptor::Zero,
        field: Field::zeros(grid, Space::Physical),
    }
}

pub fn constant(grid: Grid, c: Complex64) -> Result<Potential> {
    Ok(Potential {
        descriptor: Descriptor::Constant { re: c.re, im: c.im },
        field: Field::from_fn(grid, |_| c)?,
    })
}

/// Arbitrary samples; physical-space input is taken as is, frequency-space
/// input is transformed back.
pub fn custom(label: impl Into<String>, field: Field) -> Result<Potential> {
    field.check_finite()?;
    Ok(Potential {
        descriptor: Descriptor::Custom {
            label: label.into(),
        },
        field: spectral::to_physical(&field),
    })
}

/// `η = mass · ε⁻¹ e^{-(x/ε)²} / √π`, so `∫ η = mass` and
/// `η̂(ξ) = mass · e^{-ε²ξ²/4}`.
pub fn mollified_delta(grid: Grid, epsilon: f64, mass: f64) -> Result<Potential> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(invalid(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }
    if epsilon < 4.0 * grid.dx() {
        return Err(invalid(
            "epsilon",
            format!(
                "{epsilon} is below 4 dx = {} (unresolvable)",
                4.0 * grid.dx()
            ),
        ));
    }
    if 6.0 * epsilon > grid.half_width() {
        return Err(invalid(
            "epsilon",
            format!("{epsilon} too wide for half-width {}", grid.half_width()),
        ));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be positive, got {mass}")));
    }
    let amp = mass / (epsilon * std::f64::consts::PI.sqrt());
    let field = Field::from_real_fn(grid, |x| {
        let y = x / epsilon;
        amp * (-y * y).exp()
    })?;
    Ok(Potential {
        descriptor: Descriptor::MollifiedDelta { epsilon, mass },
        field,
    })
}

/// Exact transform of [`mollified_delta`].
pub fn mollified_delta_hat(epsilon: f64, mass: f64, xi: f64) -> f64 {
    mass * (-0.25 * epsilon * epsilon * xi * xi).exp()
}

/// Builds the potential named by `descriptor` on `grid`; custom potentials
/// carry sampled data and cannot be rebuilt from their label.
pub fn build(grid: Grid, descriptor: &Descriptor) -> Result<Potential> {
    match *descriptor {
        Descriptor::Zero => Ok(zero(grid)),
        Descriptor::Constant { re, im } => constant(grid, Complex64::new(re, im)),
        Descriptor::MollifiedDelta { epsilon, mass } => mollified_delta(grid, epsilon, mass),
        Descriptor::SignJump => Ok(sign_jump(grid)),
        Descriptor::PowerLaw { gamma, delta0 } => power_law(grid, gamma, delta0),
        Descriptor::AnnulusBump { m, r } => annulus_bump(grid, m, r),
        Descriptor::ShiftedAnnulus { m, n, r } => shifted_annulus(grid, m, n, r),
        Descriptor::Custom { ref label } => Err(invalid(
            "potential",
            format!("custom potential `{label}` must be loaded from an RPSF1 file"),
        )),
    }
}

/// `η = sgn x` with `sgn 0 = 0`, so the samples are odd about the origin
/// (the unpaired endpoint `x = -L` carries `-1`).
pub fn sign_jump(grid: Grid) -> Potential {
    let values = (0..grid.size())
        .map(|j| {
            let x = grid.x(j);
            let s = if j == grid.origin_index() {
                0.0
            } else if x > 0.0 {
                1.0
            } else {
                -1.0
            };
            Complex64::new(s, 0.0)
        })
        .collect();
    Potential {
        descriptor: Descriptor::SignJump,
        field: Field::from_parts(grid, values, Space::Physical),
    }
}

/// `|x|^{-γ}`, frozen at `δ₀^{-γ}` on `|x| < δ₀`.
pub fn power_law(grid: Grid, gamma: f64, delta0: f64) -> Result<Potential> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", format!("need 0 < γ < 1, got {gamma}")));
    }
    if !(delta0.is_finite() && delta0 > 0.0) {
        return Err(invalid(
            "delta0",
            format!("core radius must be positive, got {delta0}"),
        ));
    }
    let field = Field::from_real_fn(grid, |x| x.abs().max(delta0).powf(-gamma))?;
    Ok(Potential {
        descriptor: Descriptor::PowerLaw { gamma, delta0 },
        field,
    })
}

fn from_spectrum(
    grid: Grid,
    descriptor: Descriptor,
    hat: impl Fn(f64) -> f64,
) -> Result<Potential> {
    let spec = Field::from_spectrum(grid, |xi| Complex64::new(hat(xi), 0.0))?;
    Ok(Potential {
        descriptor,
        field: spectral::to_physical(&spec),
    })
}

/// `η̂(ξ) = M^{-1+1/r} χ_{1/2≤|·|≤2}(ξ/M)`.
pub fn annulus_bump_hat(m: f64, r: f64, xi: f64) -> f64 {
    m.powf(-1.0 + 1.0 / r) * annulus(0.5, 2.0, xi / m)
}

pub fn annulus_bump(grid: Grid, m: f64, r: f64) -> Result<Potential> {
    if !(m.is_finite() && m >= 1.0) {
        return Err(invalid("M", format!("need M >= 1, got {m}")));
    }
    if !(r > 1.0 && r <= 2.0) {
        return Err(invalid("r", format!("need 1 < r <= 2, got {r}")));
    }
    let outer = (2.0 + ANNULUS_RAMP) * m;
    if outer > grid.nyquist() {
        return Err(Error::AboveNyquist {
            requested: outer,
            limit: grid.nyquist(),
        });
    }
    from_spectrum(grid, Descriptor::AnnulusBump { m, r }, |xi| {
        annulus_bump_hat(m, r, xi)
    })
}

/// `η̂(ξ) = N^{-1+1/r} χ_{a≤|·|≤a+N}(ξ)` with `a = √(π/3) M`.
pub fn shifted_annulus_hat(m: f64, n: f64, r: f64, xi: f64) -> f64 {
    let a = shifted_inner_factor() * m;
    n.powf(-1.0 + 1.0 / r) * annulus(a, a + n, xi)
}

pub fn shifted_annulus(grid: Grid, m: f64, n: f64, r: f64) -> Result<Potential> {
    if !(m.is_finite() && m >= 1.0) {
        return Err(invalid("M", format!("need M >= 1, got {m}")));
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(invalid("N", format!("need N > 0, got {n}")));
    }
    if !(r > 2.0) {
        return Err(invalid("r", format!("need r > 2, got {r}")));
    }
    let outer = shifted_inner_factor() * m + n + 1.0;
    if outer > grid.nyquist() {
        return Err(Error::AboveNyquist {
            requested: outer,
            limit: grid.nyquist(),
        });
    }
    from_spectrum(grid, Descriptor::ShiftedAnnulus { m, n, r }, |xi| {
        shifted_annulus_hat(m, n, r, xi)
    })
}

/// Riemann-sum `Lʳ` norm of the samples; `r = ∞` is the maximum.
pub fn lr_norm(eta: &Potential, r: f64) -> Result<NormReport> {
    lp_norm(&eta.field, r)
}

/// `‖η̂‖_{Lʳ_ξ}` with plain `dξ` weight.
pub fn fourier_lr_norm(eta: &Potential, r: f64) -> Result<NormReport> {
    if r.is_nan() || r < 1.0 {
        return Err(invalid(
            "r",
            format!("exponent must lie in [1, ∞], got {r}"),
        ));
    }
    let hat = spectral::to_frequency(&eta.field);
    let mags = hat.values().iter().map(|z| z.norm());
    let value = if r.is_infinite() {
        mags.fold(0.0, f64::max)
    } else {
        (eta.grid().dxi() * mags.map(|a| a.powf(r)).sum::<f64>()).powf(1.0 / r)
    };
    Ok(NormReport {
        kind: NormKind::Lp { p: r },
        value,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrSplit {
    /// `η₁ = η 1_{|η|>λ_c}`
    pub rough: Field,
    /// `η₂ = η 1_{|η|≤λ_c}`
    pub bounded: Field,
    pub threshold: f64,
    pub r: f64,
    pub rough_norm: f64,
    pub bounded_norm: f64,
}

/// Level-set split of `η` at `|η| = λ_c`; `r` selects the norm reported
/// for the rough part.
pub fn decompose_lr_linf(eta: &Potential, threshold: f64, r: f64) -> Result<LrSplit> {
    if !(threshold > 0.0) {
        return Err(invalid(
            "lambda_c",
            format!("must be positive, got {threshold}"),
        ));
    }
    let zero = Complex64::new(0.0, 0.0);
    let grid = *eta.grid();
    let (rough, bounded): (Vec<_>, Vec<_>) = eta
        .values()
        .iter()
        .map(|&z| {
            if z.norm() > threshold {
                (z, zero)
            } else {
                (zero, z)
            }
        })
        .unzip();
    let rough = Field::from_parts(grid, rough, Space::Physical);
    let bounded = Field::from_parts(grid, bounded, Space::Physical);
    let rough_norm = lp_norm(&rough, r)?.value;
    let bounded_norm = bounded.max_abs();
    Ok(LrSplit {
        rough,
        bounded,
        threshold,
        r,
        rough_norm,
        bounded_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mollified_delta_mass_and_scaling() {
        let g = Grid::new(10.0, 1 << 12).unwrap();
        let a = mollified_delta(g, 0.1, 1.0).unwrap();
        assert!((a.integral().re - 1.0).abs() < 1e-8);
        assert!((lr_norm(&a, 1.0).unwrap().value - 1.0).abs() < 1e-8);
        let b = mollified_delta(g, 0.05, 1.0).unwrap();
        let peak = |p: &Potential| p.values()[g.origin_index()].re;
        assert!((peak(&b) / peak(&a) - 2.0).abs() < 1e-12);
        assert!((lr_norm(&b, 1.0).unwrap().value - lr_norm(&a, 1.0).unwrap().value).abs() < 1e-8);
        assert!(mollified_delta(g, 3.0 * g.dx(), 1.0).is_err());
        assert!(mollified_delta(g, 0.1, 0.0).is_err());
        // unnormalized profile: mass √π, transform √π at the origin
        let c = mollified_delta(g, 0.1, PI.sqrt()).unwrap();
        let hat = spectral::forward_transform(c.field()).unwrap();
        assert!((hat.values()[0].re - PI.sqrt()).abs() < 1e-10);
        let j = g.slot(20);
        let xi = g.frequency(j);
        assert!((hat.values()[j].re - mollified_delta_hat(0.1, PI.sqrt(), xi)).abs() < 1e-10);
    }

    #[test]
    fn sign_jump_values() {
        let g = Grid::new(4.0, 64).unwrap();
        let s = sign_jump(g);
        let at = |x: f64| {
            let j = (0..g.size()).find(|&j| (g.x(j) - x).abs() < 1e-12).unwrap();
            s.values()[j].re
        };
        assert_eq!(at(1.0), 1.0);
        assert_eq!(at(-1.0), -1.0);
        assert_eq!(lr_norm(&s, f64::INFINITY).unwrap().value, 1.0);
        for j in 1..g.size() {
            assert_eq!(s.values()[j], -s.values()[g.size() - j]);
        }
    }

    #[test]
    fn annulus_bump_spectrum() {
        let r = 2.0;
        let m = 64.0;
        let g = Grid::new(8.0 * PI, 1 << 13).unwrap(); // dξ = 1/8, Nyquist 512
        let eta = annulus_bump(g, m, r).unwrap();
        assert!(eta.is_real() || eta.values().iter().all(|z| z.im.abs() < 1e-14));
        let hat = spectral::forward_transform(eta.field()).unwrap();
        let at_m = hat.values()[g.slot(8 * 64)].re;
        assert!((at_m - m.powf(-1.0 + 1.0 / r)).abs() < 1e-12);
        for (j, z) in hat.values().iter().enumerate() {
            if g.frequency(j).abs() <= m / 4.0 {
                assert!(z.norm() < 1e-14);
            }
        }
        assert!(annulus_bump(g, 256.0, r).is_err());
        assert!(annulus_bump(g, 64.0, 2.5).is_err());
    }

    #[test]
    fn annulus_bump_l2_matches_plancherel() {
        let g = Grid::new(16.0 * PI, 1 << 14).unwrap();
        let base = lr_norm(&annulus_bump(g, 32.0, 2.0).unwrap(), 2.0)
            .unwrap()
            .value;
        for m in [64.0, 128.0] {
            let v = lr_norm(&annulus_bump(g, m, 2.0).unwrap(), 2.0)
                .unwrap()
                .value;
            assert!((v / base - 1.0).abs() < 1e-6, "{v} vs {base}");
        }
        // (2π)^{-1/2} M^{-1/2} ‖χ(·/M)‖_{L²} = (2π)^{-1/2} ‖χ‖_{L²}
        let chi2 =
            crate::quadrature::adaptive_simpson(|x| annulus(0.5, 2.0, x).powi(2), 0.0, 3.0, 1e-12)
                .unwrap()
                * 2.0;
        assert!((base - (chi2 / (2.0 * PI)).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn shifted_annulus_spectrum() {
        let (m, n, r) = (128.0, 64.0, 4.0);
        let g = Grid::new(4.0 * PI, 1 << 12).unwrap(); // dξ = 1/4, Nyquist 512
        let eta = shifted_annulus(g, m, n, r).unwrap();
        let hat = spectral::to_frequency(eta.field());
        assert!(hat.values()[0].norm() < 1e-14);
        let xi = shifted_inner_factor() * m + n / 2.0;
        let j = g.slot((xi / g.dxi()).round() as i64);
        assert!((hat.values()[j].re - n.powf(-1.0 + 1.0 / r)).abs() < 1e-12);
        let f = fourier_lr_norm(&eta, 4.0 / 3.0).unwrap().value;
        assert!((f / 2f64.powf(0.75) - 1.0).abs() < 0.02, "{f}");
        assert!(shifted_annulus(g, 512.0, n, r).is_err());
        assert!(shifted_annulus(g, m, n, 2.0).is_err());
    }

    #[test]
    fn power_law_and_split() {
        let g = Grid::new(32.0, 1 << 16).unwrap();
        let eta = power_law(g, 0.5, g.dx()).unwrap();
        let j4 = (0..g.size())
            .find(|&j| (g.x(j) - 4.0).abs() < 1e-12)
            .unwrap();
        assert!((eta.values()[j4].re - 0.5).abs() < 1e-15);
        let split = decompose_lr_linf(&eta, 1.0, 1.0).unwrap();
        for j in 0..g.size() {
            if split.rough.values()[j].norm() > 0.0 {
                assert!(g.x(j).abs() < 1.0);
            }
            assert_eq!(
                split.rough.values()[j] + split.bounded.values()[j],
                eta.values()[j]
            );
        }
        assert!(split.bounded_norm <= 1.0);
        // ∫_{|x|<1} |x|^{-1/2} dx = 4; the Riemann sum is off by O(√dx)
        assert!((split.rough_norm - 4.0).abs() < 0.1, "{}", split.rough_norm);
        assert!(power_law(g, 1.0, 0.1).is_err());
        assert!(power_law(g, 0.5, 0.0).is_err());
    }

    #[test]
    fn split_of_bounded_potential_is_trivial() {
        let g = Grid::new(8.0, 256).unwrap();
        let s = sign_jump(g);
        let split = decompose_lr_linf(&s, 1.0, 2.0).unwrap();
        assert!(split.rough.is_zero());
        assert_eq!(split.bounded, *s.field());
        let d = mollified_delta(g, 0.5, 1.0).unwrap();
        let split = decompose_lr_linf(&d, 1.0, 1.0).unwrap();
        for (j, z) in split.rough.values().iter().enumerate() {
            if z.norm() > 0.0 {
                assert!(d.values()[j].re > 1.0);
            }
        }
        assert!(decompose_lr_linf(&d, 0.0, 1.0).is_err());
        assert_eq!(lr_norm(&zero(g), 3.0).unwrap().value, 0.0);
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(8.0, 256).unwrap();
        let eta = mollified_delta(g, 0.5, 2.0).unwrap();
        let path = dir.path().join("eta.rpsf");
        let sidecar = eta.save(&path).unwrap();
        let text = std::fs::read_to_string(sidecar).unwrap();
        assert!(text.contains("mollified_delta"));
        assert_eq!(Potential::load(&path).unwrap(), eta);
    }
}
