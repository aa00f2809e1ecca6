//! Spectral laboratory for the one-dimensional Schrödinger equation with a
//! rough potential,
//!
//! ```text
//! i ∂ₜu + ∂ₓ²u + η u = λ |u|^p u,
//! ```
//!
//! on a periodic truncation of the line. The crate provides the spectral
//! machinery (transforms, multipliers, Sobolev norms), Littlewood-Paley
//! projections, a catalog of rough potentials, a Strang-splitting solver
//! cross-checked by Picard iteration, the normal-form and commutator
//! decompositions as executable identities, exact frequency-space evaluation
//! of the first Duhamel iterate for the ill-posedness examples, and a
//! band-energy regularity estimator.

pub mod error;
pub mod evolution;
pub mod field;
pub mod fit;
pub mod grid;
pub mod littlewood_paley;
pub mod normal_form;
pub mod oracles;
pub mod potentials;
pub mod quadrature;
pub mod regularity;
pub mod rpsf;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Field, Snapshot, Space};
pub use grid::Grid;
pub use rustfft::num_complex::Complex64;
