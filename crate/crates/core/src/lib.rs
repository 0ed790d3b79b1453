//! Finite element solver for nonlinear Helmholtz transmission problems with a
//! Kerr-type medium, posed on a disk B_R whose boundary carries a truncated
//! Dirichlet-to-Neumann operator, and solved by Picard iteration.
//!
//! Module overview:
//!
//! * [`specfun`]: Hankel functions, DtN symbols, Legendre functions, harmonics.
//! * [`boundary`]: traces on S_R as harmonic coefficients, Sobolev norms,
//!   truncated DtN, exterior field.
//! * [`mesh`]: disk triangulations with a tagged obstacle and boundary ring.
//! * [`assembly`]: P1 assembly of a_N and the right-hand-side functionals.
//! * [`solver`]: nonlinear material laws and the fixed-point iteration.
//! * [`verify`]: penetrable-disk oracle and convergence studies.
//! * [`config`]: run configuration files and N lists.
//! * [`cli`]: the batch commands.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod boundary;
pub mod cli;
pub mod config;
pub mod error;
pub mod mesh;
pub mod solver;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};

/// Global wave parameters: dimension, wavenumber kappa, radius R of the
/// artificial boundary and truncation order N of the DtN series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext {
    pub dim: u8,
    pub kappa: f64,
    pub radius: f64,
    pub order: usize,
}

impl WaveContext {
    pub fn new(dim: u8, kappa: f64, radius: f64, order: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Domain(format!("dimension must be 2 or 3, got {dim}")));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be positive, got {kappa}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        Ok(WaveContext {
            dim,
            kappa,
            radius,
            order,
        })
    }

    /// kappa * R, the argument of the DtN symbols.
    pub fn xi(&self) -> f64 {
        self.kappa * self.radius
    }

    pub fn with_order(&self, order: usize) -> Self {
        WaveContext { order, ..*self }
    }
}
