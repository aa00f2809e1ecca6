//! Periodic truncation of the real line and its dual frequency lattice.
//!
//! Samples sit at `x_j = -L + j dx` for `j = 0..K`, and frequency samples are
//! stored in FFT order: slot `j` carries `xi = pi k / L` with `k = j` for
//! `j < K/2` and `k = j - K` otherwise, so slot `K/2` is the lone Nyquist mode
//! `-pi K / (2L)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    size: usize,
}

impl Grid {
    pub const MIN_SIZE: usize = 16;

    pub fn new(half_width: f64, size: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if size < Self::MIN_SIZE || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "size must be a power of two >= {}, got {size}",
                Self::MIN_SIZE
            )));
        }
        Ok(Self { half_width, size })
    }

    /// Smallest power-of-two grid on `[-L, L)` whose Nyquist frequency is at
    /// least `min_nyquist`.
    pub fn with_nyquist(half_width: f64, min_nyquist: f64) -> Result<Self> {
        let needed = (2.0 * half_width * min_nyquist / std::f64::consts::PI).ceil() as usize;
        Self::new(half_width, needed.max(Self::MIN_SIZE).next_power_of_two())
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.size as f64
    }

    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Largest |xi| on the lattice (the Nyquist frequency).
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.size as f64 / (2.0 * self.half_width)
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    /// Signed wavenumber index of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j < self.size / 2 {
            j as i64
        } else {
            j as i64 - self.size as i64
        }
    }

    pub fn frequency(&self, j: usize) -> f64 {
        self.wavenumber(j) as f64 * self.dxi()
    }

    /// FFT slot holding the signed wavenumber `k` (taken modulo K).
    pub fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.size as i64) as usize
    }

    pub fn nyquist_slot(&self) -> usize {
        self.size / 2
    }

    /// Slot of the origin `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.size / 2
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.size).map(|j| self.x(j)).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.size).map(|j| self.frequency(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(1.0, 8).is_err());
        assert!(Grid::new(1.0, 24).is_err());
        assert!(Grid::new(0.0, 32).is_err());
        assert!(Grid::new(f64::NAN, 32).is_err());
        assert!(Grid::new(1.0, 32).is_ok());
    }

    #[test]
    fn lattice_layout() {
        let g = Grid::new(std::f64::consts::PI, 16).unwrap();
        assert!((g.dx() * 16.0 - 2.0 * g.half_width()).abs() < 1e-15);
        assert_eq!(g.frequency(1), 1.0);
        assert_eq!(g.frequency(15), -1.0);
        assert_eq!(g.frequency(8), -8.0);
        assert_eq!(g.nyquist(), 8.0);
        assert_eq!(g.x(g.origin_index()), 0.0);
        // symmetric up to the Nyquist slot
        for j in 1..8 {
            assert_eq!(g.frequency(j), -g.frequency(16 - j));
        }
        assert_eq!(g.slot(-3), 13);
        assert_eq!(g.slot(17), 1);
    }

    #[test]
    fn nyquist_sizing() {
        let g = Grid::with_nyquist(10.0, 100.0).unwrap();
        assert!(g.nyquist() >= 100.0);
        assert!(g.nyquist() / 2.0 < 100.0);
    }
}
