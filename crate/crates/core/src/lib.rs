//! Discrete symmetric-decreasing and Steiner rearrangements, fractional
//! Gagliardo energies and perimeters, fractional Laplacians and Dirichlet
//! eigenproblems, and the Caffarelli–Silvestre extension, used to check the
//! fractional Pólya–Szegő principle and its consequences on uniform grids.
//!
//! Functions are piecewise constant on the cells of a uniform grid
//! ([`grid::Grid`]). On non-periodic grids they are extended by zero, and
//! every nonlocal energy includes the exact interaction with the exterior of
//! the box.

pub mod energy;
pub mod error;
pub mod extension;
pub(crate) mod fft;
pub mod fourier;
pub mod geometry;
pub mod grid;
pub mod kernel;
pub mod quadrature;
pub mod rearrange;
pub mod report;
pub mod special;
pub mod spectral;
pub mod suites;
pub mod sum;

pub use error::{Error, Result};
pub use grid::{lp_norm, measure, FracParams, Grid, GridFunction, IndicatorSet};
pub use kernel::{KernelSpec, NearField, Norm};
