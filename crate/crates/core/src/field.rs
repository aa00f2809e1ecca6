//! Complex samples on a [`Grid`], tagged with the space they live in.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Physical,
    Frequency,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Physical => "physical",
            Space::Frequency => "frequency",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    space: Space,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, space: Space) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of size {}",
                values.len(),
                grid.size()
            )));
        }
        let field = Self {
            grid,
            values,
            space,
        };
        field.check_finite()?;
        Ok(field)
    }

    /// Builds without the finiteness scan; callers guarantee finite input.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>, space: Space) -> Self {
        debug_assert_eq!(values.len(), grid.size());
        Self {
            grid,
            values,
            space,
        }
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        Self::from_parts(grid, vec![Complex64::new(0.0, 0.0); grid.size()], space)
    }

    /// Samples `f(x_j)` in physical space.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.size()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, values, Space::Physical)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// Samples `g(xi_j)` directly on the frequency lattice.
    pub fn from_spectrum(grid: Grid, g: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.size()).map(|j| g(grid.frequency(j))).collect();
        Self::new(grid, values, Space::Frequency)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::WrongSpace {
                expected: expected.name(),
                found: self.space.name(),
            })
        }
    }

    pub fn same_layout(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.space != other.space {
            return Err(Error::WrongSpace {
                expected: self.space.name(),
                found: other.space.name(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::from_parts(
            self.grid,
            self.values.iter().map(|&z| f(z)).collect(),
            self.space,
        )
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|z| z * c)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.same_layout(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.same_layout(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Pointwise product; meaningful in physical space.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.same_layout(other)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    fn zip_with(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::from_parts(self.grid, values, self.space)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// A field sampled at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = Grid::new(1.0, 16).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 16];
        v[3].im = f64::NAN;
        assert!(matches!(
            Field::new(g, v, Space::Physical),
            Err(Error::NonFinite { index: 3 })
        ));
        assert!(Field::new(g, vec![Complex64::new(0.0, 0.0); 15], Space::Physical).is_err());
    }

    #[test]
    fn layout_checks() {
        let g = Grid::new(1.0, 16).unwrap();
        let a = Field::zeros(g, Space::Physical);
        let b = Field::zeros(g, Space::Frequency);
        assert!(a.add(&b).is_err());
        let c = Field::zeros(Grid::new(2.0, 16).unwrap(), Space::Physical);
        assert!(a.add(&c).is_err());
    }
}
